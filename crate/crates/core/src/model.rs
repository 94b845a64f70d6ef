//! Observations, traces, states, and the transition-system representation.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::event::{EventSet, Observable};
use crate::term::Atom;
use crate::time::TimeStamp;

/// A pair of an observable and a timestamp.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Observation {
    pub observable: Observable,
    pub time: TimeStamp,
}

impl Observation {
    pub fn new(observable: Observable, time: TimeStamp) -> Observation {
        Observation { observable, time }
    }

    pub fn at_nat(observable: Observable, step: u64) -> Observation {
        Observation { observable, time: TimeStamp::from_nat(step) }
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.observable, self.time)
    }
}

/// A finite observation sequence with strictly increasing timestamps — a left
/// factor of a timed-event stream.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    items: Vec<Observation>,
}

/// Checks strict monotonicity of timestamps and wraps the sequence as a trace.
pub fn validate_trace(items: Vec<Observation>) -> Result<Trace> {
    for i in 1..items.len() {
        if items[i].time <= items[i - 1].time {
            return Err(Error::NonMonotoneTime(i));
        }
    }
    Ok(Trace { items })
}

impl Trace {
    pub fn empty() -> Trace {
        Trace { items: Vec::new() }
    }

    pub fn items(&self) -> &[Observation] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Appends an observation, preserving the monotonicity invariant.
    pub fn push(&mut self, obs: Observation) -> Result<()> {
        if let Some(last) = self.items.last() {
            if obs.time <= last.time {
                return Err(Error::NonMonotoneTime(self.items.len()));
            }
        }
        self.items.push(obs);
        Ok(())
    }
}

/// A state term. Opaque to the core machinery: equality, hashing, and total
/// order come from the underlying atom. The hash is precomputed so visited
/// sets stay cheap.
#[derive(Clone)]
pub struct State {
    atom: Arc<Atom>,
    hash: u64,
}

impl State {
    pub fn new(atom: Atom) -> State {
        let mut hasher = rustc_hash::FxHasher::default();
        atom.hash(&mut hasher);
        State { hash: hasher.finish(), atom: Arc::new(atom) }
    }

    pub fn sym(name: impl Into<String>) -> State {
        State::new(Atom::Sym(name.into()))
    }

    pub fn atom(&self) -> &Atom {
        &self.atom
    }

    /// Builds the canonical pair state used by binary products.
    pub fn pair(left: &State, right: &State) -> State {
        State::new(Atom::App("pair".into(), vec![left.atom().clone(), right.atom().clone()]))
    }

    /// Splits a pair state built by [`State::pair`].
    pub fn unpair(&self) -> Option<(State, State)> {
        match self.atom() {
            Atom::App(head, args) if head == "pair" && args.len() == 2 => {
                Some((State::new(args[0].clone()), State::new(args[1].clone())))
            }
            _ => None,
        }
    }

    /// Flattens nested pair states into their leaf states, left to right.
    pub fn flatten(&self) -> Vec<State> {
        match self.unpair() {
            Some((l, r)) => {
                let mut out = l.flatten();
                out.extend(r.flatten());
                out
            }
            None => vec![self.clone()],
        }
    }
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.hash == other.hash
            && (Arc::ptr_eq(&self.atom, &other.atom) || self.atom == other.atom)
    }
}

impl Eq for State {}

impl Hash for State {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash);
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        self.atom.cmp(&other.atom)
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.atom)
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.atom)
    }
}

/// Whether transition labels carry explicit timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Labels are observations with concrete rational timestamps.
    Timed,
    /// Labels are observables; any strictly increasing stamping is denoted.
    DelayInsensitive,
}

/// A transition label: an observable, plus a timestamp in timed mode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub events: Observable,
    pub time: Option<TimeStamp>,
}

impl Label {
    pub fn untimed(events: Observable) -> Label {
        Label { events, time: None }
    }

    pub fn timed(events: Observable, time: TimeStamp) -> Label {
        Label { events, time: Some(time) }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.time {
            Some(t) => write!(f, "({},{})", self.events, t),
            None => write!(f, "{}", self.events),
        }
    }
}

/// One outgoing transition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub label: Label,
    pub target: State,
}

impl Transition {
    pub fn new(label: Label, target: State) -> Transition {
        Transition { label, target }
    }
}

/// The successor generator: total, pure, and returning a canonically sorted,
/// deduplicated set for every queried state.
pub type SuccessorFn = Arc<dyn Fn(&State) -> Arc<Vec<Transition>> + Send + Sync>;

/// A transition system whose labels are observations (timed mode) or
/// observables (delay-insensitive mode). The state space may be backed by an
/// explicit table or by a generator function.
#[derive(Clone)]
pub struct TesTransitionSystem {
    name: String,
    interface: EventSet,
    initial: State,
    mode: Mode,
    successors: SuccessorFn,
}

impl TesTransitionSystem {
    pub fn new(
        name: impl Into<String>,
        interface: EventSet,
        initial: State,
        mode: Mode,
        successors: SuccessorFn,
    ) -> TesTransitionSystem {
        TesTransitionSystem { name: name.into(), interface, initial, mode, successors }
    }

    /// Builds an explicit finite system from a transition list.
    ///
    /// Labels are sorted and deduplicated per state; transitions whose events
    /// fall outside the interface are rejected.
    pub fn explicit(
        name: impl Into<String>,
        interface: EventSet,
        initial: State,
        mode: Mode,
        transitions: Vec<(State, Label, State)>,
    ) -> Result<TesTransitionSystem> {
        let mut table: FxHashMap<State, Vec<Transition>> = FxHashMap::default();
        for (from, label, to) in transitions {
            for event in label.events.iter() {
                if !interface.contains(event) {
                    return Err(Error::Parse(format!(
                        "transition label event {event} is not in the interface"
                    )));
                }
            }
            match (mode, label.time.is_some()) {
                (Mode::Timed, false) | (Mode::DelayInsensitive, true) => {
                    return Err(Error::ModeMismatch)
                }
                _ => {}
            }
            table.entry(from).or_default().push(Transition::new(label, to));
        }
        let mut canonical: FxHashMap<State, Arc<Vec<Transition>>> = FxHashMap::default();
        for (state, mut trs) in table {
            trs.sort_unstable();
            trs.dedup();
            canonical.insert(state, Arc::new(trs));
        }
        let empty = Arc::new(Vec::new());
        let successors: SuccessorFn = Arc::new(move |q: &State| {
            canonical.get(q).cloned().unwrap_or_else(|| Arc::clone(&empty))
        });
        Ok(TesTransitionSystem::new(name, interface, initial, mode, successors))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn interface(&self) -> &EventSet {
        &self.interface
    }

    pub fn initial(&self) -> &State {
        &self.initial
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Restarts the same system from a different initial state.
    pub fn with_initial(&self, initial: State) -> TesTransitionSystem {
        let mut out = self.clone();
        out.initial = initial;
        out
    }

    pub fn successors(&self, q: &State) -> Arc<Vec<Transition>> {
        (self.successors)(q)
    }

    /// Wraps the successor function with a memo table. Worthwhile for product
    /// systems whose successor sets are expensive to recompute.
    pub fn memoized(self) -> TesTransitionSystem {
        let inner = self.successors;
        let cache: Mutex<FxHashMap<State, Arc<Vec<Transition>>>> =
            Mutex::new(FxHashMap::default());
        let successors: SuccessorFn = Arc::new(move |q: &State| {
            if let Some(hit) = cache.lock().unwrap().get(q) {
                return Arc::clone(hit);
            }
            let computed = inner(q);
            cache.lock().unwrap().insert(q.clone(), Arc::clone(&computed));
            computed
        });
        TesTransitionSystem { successors, ..self }
    }
}

impl fmt::Debug for TesTransitionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TesTransitionSystem")
            .field("name", &self.name)
            .field("interface", &self.interface)
            .field("initial", &self.initial)
            .field("mode", &self.mode)
            .finish_non_exhaustive()
    }
}

/// Exploration caps for the explicit-state analyses.
#[derive(Debug, Clone, Copy)]
pub struct ExploreLimits {
    /// Cap on the number of distinct visited states.
    pub max_states: usize,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        ExploreLimits { max_states: 1_000_000 }
    }
}

impl ExploreLimits {
    pub fn with_max_states(max_states: usize) -> ExploreLimits {
        ExploreLimits { max_states }
    }
}

/// The outgoing transitions of `q`, in canonical order. Unknown states have
/// none.
pub fn successors_of(system: &TesTransitionSystem, q: &State) -> Arc<Vec<Transition>> {
    system.successors(q)
}

/// The set of states reachable from the initial state by at most `bound`
/// transitions.
pub fn reachable_states(
    system: &TesTransitionSystem,
    bound: usize,
    limits: &ExploreLimits,
) -> Result<FxHashSet<State>> {
    let mut seen: FxHashSet<State> = FxHashSet::default();
    let mut frontier: VecDeque<(State, usize)> = VecDeque::new();
    seen.insert(system.initial().clone());
    frontier.push_back((system.initial().clone(), 0));
    while let Some((state, depth)) = frontier.pop_front() {
        if depth == bound {
            continue;
        }
        for tr in system.successors(&state).iter() {
            if seen.insert(tr.target.clone()) {
                if seen.len() > limits.max_states {
                    return Err(Error::ExplosionLimit { limit: limits.max_states });
                }
                frontier.push_back((tr.target.clone(), depth + 1));
            }
        }
    }
    Ok(seen)
}

/// Explores until the reachable set stabilises (no depth bound). Errors out at
/// the state cap.
pub fn reachable_states_full(
    system: &TesTransitionSystem,
    limits: &ExploreLimits,
) -> Result<FxHashSet<State>> {
    reachable_states(system, usize::MAX, limits)
}
