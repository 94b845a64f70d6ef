//! Test support: seeded random explicit systems and independent oracles.
//!
//! The oracles here deliberately avoid the production code paths they are
//! used to check. The merge oracle enumerates run pairs and interleaving
//! schedules directly, consulting only the decomposition-based composability
//! oracle; the liveness-prefix oracle decides infinite extensibility by path
//! pumping instead of fixed-point pruning.

use std::collections::BTreeSet;

use rand::rngs::SmallRng;
use rand::Rng;
use rustc_hash::FxHashMap;

use crate::composability::{kappa_sync, ComposabilityBase};
use crate::error::Result;
use crate::event::{Event, EventSet, Observable};
use crate::model::{
    reachable_states_full, ExploreLimits, Label, Mode, Observation, State,
    TesTransitionSystem,
};
use crate::semantics::{finite_runs, live_states};

/// Shape parameters for random explicit delay-insensitive systems.
#[derive(Debug, Clone)]
pub struct GenCfg {
    pub max_states: usize,
    pub events: Vec<Event>,
    /// Outgoing transitions drawn per state (before deduplication).
    pub max_out: usize,
    /// Permit the empty observable as a label.
    pub allow_empty_label: bool,
    /// Give every state at least one outgoing transition.
    pub ensure_outgoing: bool,
    /// Add a silent self-loop at every state (prefix-closed by construction).
    pub silent_loops: bool,
    /// Draw a random nonempty sub-interface per system instead of using the
    /// whole universe; labels then range over that sub-interface.
    pub interface_subset: bool,
}

impl GenCfg {
    pub fn small(events: &[&str]) -> GenCfg {
        GenCfg {
            max_states: 4,
            events: events.iter().map(|e| Event::atom(*e)).collect(),
            max_out: 3,
            allow_empty_label: false,
            ensure_outgoing: false,
            silent_loops: false,
            interface_subset: false,
        }
    }
}

/// A seeded random explicit system over the configured event universe.
pub fn random_system(rng: &mut SmallRng, cfg: &GenCfg, name: &str) -> TesTransitionSystem {
    let n_states = rng.gen_range(1..=cfg.max_states);
    let states: Vec<State> =
        (0..n_states).map(|i| State::sym(format!("{name}q{i}"))).collect();
    let mut cfg = cfg.clone();
    if cfg.interface_subset {
        let mut events: Vec<Event> =
            cfg.events.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
        if events.is_empty() && !cfg.events.is_empty() {
            events.push(cfg.events[rng.gen_range(0..cfg.events.len())].clone());
        }
        cfg.events = events;
    }
    let cfg = &cfg;
    let interface: EventSet = cfg.events.iter().cloned().collect();
    let mut transitions = Vec::new();
    for state in &states {
        let out_degree = if cfg.ensure_outgoing {
            rng.gen_range(1..=cfg.max_out.max(1))
        } else {
            rng.gen_range(0..=cfg.max_out)
        };
        for _ in 0..out_degree {
            let label = random_label(rng, cfg);
            let target = states[rng.gen_range(0..n_states)].clone();
            transitions.push((state.clone(), Label::untimed(label), target));
        }
        if cfg.silent_loops {
            transitions.push((
                state.clone(),
                Label::untimed(Observable::empty()),
                state.clone(),
            ));
        }
    }
    TesTransitionSystem::explicit(
        name,
        interface,
        states[0].clone(),
        Mode::DelayInsensitive,
        transitions,
    )
    .expect("generated system is well-formed")
}

fn random_label(rng: &mut SmallRng, cfg: &GenCfg) -> Observable {
    loop {
        let events: Vec<Event> = cfg
            .events
            .iter()
            .filter(|_| rng.gen_bool(0.4))
            .cloned()
            .collect();
        if events.is_empty() && !cfg.allow_empty_label && !cfg.events.is_empty() {
            continue;
        }
        return Observable::new(events);
    }
}

/// All runs (label sequences) of length at most `depth`, with no
/// deduplication subtleties: a thin wrapper over [`finite_runs`] projected to
/// observables.
pub fn observable_runs(
    system: &TesTransitionSystem,
    depth: usize,
    limits: &ExploreLimits,
) -> Result<BTreeSet<Vec<Observable>>> {
    Ok(finite_runs(system, depth, limits)?
        .into_iter()
        .map(|labels| labels.into_iter().map(|l| l.events).collect())
        .collect())
}

/// Brute-force oracle for the delay-insensitive product language: every
/// stepwise-composable interleaving of a run of `t1` with a run of `t2`,
/// built by schedule enumeration over explicit run pairs. Composability of
/// each step is decided by the decomposition oracle at representative
/// timestamps.
pub fn merge_trace_oracle(
    t1: &TesTransitionSystem,
    t2: &TesTransitionSystem,
    base: &ComposabilityBase,
    depth: usize,
    limits: &ExploreLimits,
) -> Result<BTreeSet<Vec<Observable>>> {
    let runs1 = maximal_runs(t1, depth, limits)?;
    let runs2 = maximal_runs(t2, depth, limits)?;
    let e1 = t1.interface();
    let e2 = t2.interface();
    let composable = |o1: &Observable, t1: u64, o2: &Observable, t2: u64| -> bool {
        kappa_sync(
            base,
            e1,
            e2,
            &Observation::at_nat(o1.clone(), t1),
            &Observation::at_nat(o2.clone(), t2),
        )
        .unwrap_or(false)
    };
    let mut out: BTreeSet<Vec<Observable>> = BTreeSet::new();
    out.insert(Vec::new());
    for r1 in &runs1 {
        for r2 in &runs2 {
            let mut current = Vec::new();
            merge_rec(r1, 0, r2, 0, depth, &composable, &mut current, &mut out);
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn merge_rec(
    r1: &[Observable],
    i: usize,
    r2: &[Observable],
    j: usize,
    remaining: usize,
    composable: &impl Fn(&Observable, u64, &Observable, u64) -> bool,
    current: &mut Vec<Observable>,
    out: &mut BTreeSet<Vec<Observable>>,
) {
    if remaining == 0 || i >= r1.len() || j >= r2.len() {
        return;
    }
    let o1 = &r1[i];
    let o2 = &r2[j];
    if composable(o1, 1, o2, 2) {
        current.push(o1.clone());
        out.insert(current.clone());
        merge_rec(r1, i + 1, r2, j, remaining - 1, composable, current, out);
        current.pop();
    }
    if composable(o1, 2, o2, 1) {
        current.push(o2.clone());
        out.insert(current.clone());
        merge_rec(r1, i, r2, j + 1, remaining - 1, composable, current, out);
        current.pop();
    }
    if composable(o1, 1, o2, 1) {
        current.push(o1.union(o2));
        out.insert(current.clone());
        merge_rec(r1, i + 1, r2, j + 1, remaining - 1, composable, current, out);
        current.pop();
    }
}

/// Runs that are either `depth` long or end in a state with no successors.
/// Schedule enumeration over these covers all shorter runs as prefixes.
fn maximal_runs(
    system: &TesTransitionSystem,
    depth: usize,
    limits: &ExploreLimits,
) -> Result<Vec<Vec<Observable>>> {
    let mut out = Vec::new();
    let mut stack: Vec<(State, Vec<Observable>)> =
        vec![(system.initial().clone(), Vec::new())];
    while let Some((state, run)) = stack.pop() {
        if out.len() + stack.len() > limits.max_states {
            return Err(crate::error::Error::ExplosionLimit { limit: limits.max_states });
        }
        let successors = system.successors(&state);
        if run.len() == depth || successors.is_empty() {
            out.push(run);
            continue;
        }
        for tr in successors.iter() {
            let mut extended = run.clone();
            extended.push(tr.label.events.clone());
            stack.push((tr.target.clone(), extended));
        }
    }
    Ok(out)
}

/// Prefixes (length ≤ `depth`) of infinite runs, decided by path pumping:
/// a run extends to an infinite one exactly when its endpoint admits a path
/// as long as the reachable state count.
pub fn infinite_run_prefixes(
    system: &TesTransitionSystem,
    depth: usize,
    limits: &ExploreLimits,
) -> Result<BTreeSet<Vec<Label>>> {
    let pump = reachable_states_full(system, limits)?.len();
    let mut memo: FxHashMap<(State, usize), bool> = FxHashMap::default();
    let mut out = BTreeSet::new();
    let mut stack: Vec<(State, Vec<Label>)> = vec![(system.initial().clone(), Vec::new())];
    while let Some((state, run)) = stack.pop() {
        if !can_extend(system, &state, pump, &mut memo) {
            continue;
        }
        out.insert(run.clone());
        if run.len() == depth {
            continue;
        }
        for tr in system.successors(&state).iter() {
            let mut extended = run.clone();
            extended.push(tr.label.clone());
            stack.push((tr.target.clone(), extended));
        }
    }
    Ok(out)
}

fn can_extend(
    system: &TesTransitionSystem,
    state: &State,
    k: usize,
    memo: &mut FxHashMap<(State, usize), bool>,
) -> bool {
    if k == 0 {
        return true;
    }
    if let Some(&hit) = memo.get(&(state.clone(), k)) {
        return hit;
    }
    // The recursion strictly decreases k, so queries never re-enter.
    let result = system
        .successors(state)
        .iter()
        .any(|tr| can_extend(system, &tr.target, k - 1, memo));
    memo.insert((state.clone(), k), result);
    result
}

/// Prefixes (length ≤ `depth`) of runs through the live-state-pruned graph:
/// the greatest-fixed-point route to the same set as
/// [`infinite_run_prefixes`].
pub fn pruned_run_prefixes(
    system: &TesTransitionSystem,
    depth: usize,
    limits: &ExploreLimits,
) -> Result<BTreeSet<Vec<Label>>> {
    let live = live_states(system, limits)?;
    let mut out = BTreeSet::new();
    if !live.contains(system.initial()) {
        return Ok(out);
    }
    let mut stack: Vec<(State, Vec<Label>)> = vec![(system.initial().clone(), Vec::new())];
    while let Some((state, run)) = stack.pop() {
        out.insert(run.clone());
        if run.len() == depth {
            continue;
        }
        for tr in system.successors(&state).iter() {
            if live.contains(&tr.target) {
                let mut extended = run.clone();
                extended.push(tr.label.clone());
                stack.push((tr.target.clone(), extended));
            }
        }
    }
    Ok(out)
}
