//! Behavior semantics: run enumeration, greatest-fixed-point liveness
//! pruning, deadlock freedom, and prefix closure.
//!
//! Two semantics are available for a transition system. The run semantics
//! collects label sequences along consecutive transitions. The fixed-point
//! semantics keeps the largest set of states from which an infinite run
//! exists, computed by iterated removal of states with no successor inside
//! the current set. On finite graphs both describe the same behavior; the
//! agreement is exercised at bounded depth in the test suites.

use std::collections::BTreeSet;
use std::collections::VecDeque;
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::Result;
use crate::event::Observable;
use crate::model::{
    reachable_states_full, ExploreLimits, Label, Mode, State, SuccessorFn, TesTransitionSystem,
    Transition,
};

/// All label sequences of length at most `depth` along consecutive
/// transitions from the initial state (the empty sequence included).
pub fn finite_runs(
    system: &TesTransitionSystem,
    depth: usize,
    limits: &ExploreLimits,
) -> Result<BTreeSet<Vec<Label>>> {
    let mut runs: BTreeSet<Vec<Label>> = BTreeSet::new();
    runs.insert(Vec::new());
    // Depth-layered frontier of (state, labels so far); merging identical
    // (state, labels) pairs keeps duplicated paths from multiplying.
    let mut frontier: BTreeSet<(State, Vec<Label>)> = BTreeSet::new();
    frontier.insert((system.initial().clone(), Vec::new()));
    for _ in 0..depth {
        let mut next: BTreeSet<(State, Vec<Label>)> = BTreeSet::new();
        for (state, labels) in &frontier {
            for tr in system.successors(state).iter() {
                let mut extended = labels.clone();
                extended.push(tr.label.clone());
                runs.insert(extended.clone());
                if runs.len() > limits.max_states {
                    return Err(crate::error::Error::ExplosionLimit {
                        limit: limits.max_states,
                    });
                }
                next.insert((tr.target.clone(), extended));
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(runs)
}

/// The largest subset of the reachable states in which every state keeps an
/// outgoing transition leading back into the subset — the states from which
/// an infinite run exists.
pub fn live_states(
    system: &TesTransitionSystem,
    limits: &ExploreLimits,
) -> Result<FxHashSet<State>> {
    let reachable = reachable_states_full(system, limits)?;
    let mut live: FxHashSet<State> = reachable.clone();
    loop {
        let doomed: Vec<State> = live
            .iter()
            .filter(|q| {
                !system
                    .successors(q)
                    .iter()
                    .any(|tr| live.contains(&tr.target))
            })
            .cloned()
            .collect();
        if doomed.is_empty() {
            return Ok(live);
        }
        for q in doomed {
            live.remove(&q);
        }
    }
}

/// Verdict of the deadlock-freedom check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeadlockVerdict {
    /// Every reachable state has an outgoing transition, so every finite run
    /// extends to an infinite one.
    Free,
    /// A reachable state with no outgoing transitions, and a trace reaching
    /// it.
    Deadlocking { witness: State, trace: Vec<Label> },
    /// The exploration cap was exhausted before a verdict.
    Unknown { explored: usize },
}

impl DeadlockVerdict {
    pub fn is_free(&self) -> bool {
        matches!(self, DeadlockVerdict::Free)
    }
}

/// Decides deadlock freedom by searching for a reachable state without
/// outgoing transitions.
///
/// On a finite graph this is exact: if no such state exists every reachable
/// state has a successor, hence every finite run extends forever; if one
/// exists, the run reaching it is a finite run that extends no further. The
/// search expands low-degree states first so that jammed regions surface
/// early, and short-circuits on the first dead state.
pub fn is_deadlock_free(
    system: &TesTransitionSystem,
    limits: &ExploreLimits,
) -> DeadlockVerdict {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    // Parent links for witness reconstruction.
    let mut parents: FxHashMap<State, (State, Label)> = FxHashMap::default();
    let mut seen: FxHashSet<State> = FxHashSet::default();
    // Min-heap on successor count; a freshly discovered dead state pops next.
    let mut heap: BinaryHeap<(Reverse<usize>, usize, State)> = BinaryHeap::new();
    let mut tiebreak = 0usize;

    let initial = system.initial().clone();
    seen.insert(initial.clone());
    heap.push((Reverse(system.successors(&initial).len()), tiebreak, initial));

    while let Some((Reverse(degree), _, state)) = heap.pop() {
        if degree == 0 {
            let mut trace = Vec::new();
            let mut cursor = state.clone();
            while let Some((parent, label)) = parents.get(&cursor) {
                trace.push(label.clone());
                cursor = parent.clone();
            }
            trace.reverse();
            return DeadlockVerdict::Deadlocking { witness: state, trace };
        }
        for tr in system.successors(&state).iter() {
            if seen.insert(tr.target.clone()) {
                if seen.len() > limits.max_states {
                    return DeadlockVerdict::Unknown { explored: seen.len() };
                }
                parents.insert(tr.target.clone(), (state.clone(), tr.label.clone()));
                tiebreak += 1;
                heap.push((
                    Reverse(system.successors(&tr.target).len()),
                    tiebreak,
                    tr.target.clone(),
                ));
            }
        }
    }
    DeadlockVerdict::Free
}

/// True when every reachable state has a silent self-loop. A sufficient,
/// syntactic condition for prefix closure — not a semantic equivalence check.
pub fn is_prefix_closed_syntactic(
    system: &TesTransitionSystem,
    limits: &ExploreLimits,
) -> Result<bool> {
    let reachable = reachable_states_full(system, limits)?;
    Ok(reachable.iter().all(|q| {
        system
            .successors(q)
            .iter()
            .any(|tr| tr.label.events.is_empty() && tr.target == *q)
    }))
}

/// Adds a silent self-loop at every state, making the system able to idle
/// after any finite run. Bounded languages of the input are preserved.
///
/// Defined for delay-insensitive systems: a timed system would need a silent
/// loop at every timestamp, which no single transition represents.
pub fn prefix_closure(system: &TesTransitionSystem) -> Result<TesTransitionSystem> {
    if system.mode() != Mode::DelayInsensitive {
        return Err(crate::error::Error::ModeMismatch);
    }
    let inner = system.clone();
    let successors: SuccessorFn = Arc::new(move |q: &State| {
        let base = inner.successors(q);
        let idle = Transition::new(Label::untimed(Observable::empty()), q.clone());
        if base.contains(&idle) {
            return base;
        }
        let mut out: Vec<Transition> = base.iter().cloned().collect();
        out.push(idle);
        out.sort_unstable();
        Arc::new(out)
    });
    Ok(TesTransitionSystem::new(
        format!("{}*", system.name()),
        system.interface().clone(),
        system.initial().clone(),
        system.mode(),
        successors,
    ))
}

/// Layer-by-layer breadth-first depths, used by tests to cross-check run
/// enumeration against reachability.
pub fn states_at_depth(
    system: &TesTransitionSystem,
    depth: usize,
) -> Vec<FxHashSet<State>> {
    let mut layers = Vec::with_capacity(depth + 1);
    let mut current: FxHashSet<State> = FxHashSet::default();
    current.insert(system.initial().clone());
    layers.push(current.clone());
    for _ in 0..depth {
        let mut next: FxHashSet<State> = FxHashSet::default();
        for q in &current {
            for tr in system.successors(q).iter() {
                next.insert(tr.target.clone());
            }
        }
        layers.push(next.clone());
        current = next;
    }
    layers
}

/// BFS shortest trace (as labels) from the initial state to `target`.
pub fn trace_to_state(
    system: &TesTransitionSystem,
    target: &State,
    limits: &ExploreLimits,
) -> Option<Vec<Label>> {
    let mut parents: FxHashMap<State, (State, Label)> = FxHashMap::default();
    let mut seen: FxHashSet<State> = FxHashSet::default();
    let mut queue: VecDeque<State> = VecDeque::new();
    let initial = system.initial().clone();
    seen.insert(initial.clone());
    queue.push_back(initial);
    while let Some(state) = queue.pop_front() {
        if state == *target {
            let mut trace = Vec::new();
            let mut cursor = state;
            while let Some((parent, label)) = parents.get(&cursor) {
                trace.push(label.clone());
                cursor = parent.clone();
            }
            trace.reverse();
            return Some(trace);
        }
        for tr in system.successors(&state).iter() {
            if seen.insert(tr.target.clone()) {
                if seen.len() > limits.max_states {
                    return None;
                }
                parents.insert(tr.target.clone(), (state.clone(), tr.label.clone()));
                queue.push_back(tr.target.clone());
            }
        }
    }
    None
}
