//! Lazy, step-wise runtime composition of initialised transition systems.
//!
//! Instead of materialising the product, the runtime folds the components'
//! current outgoing transitions pairwise, pruning joint candidates that
//! violate the composability relation, then commits one enabled joint
//! transition per step. Timestamps are the logical step counter: the systems
//! are delay insensitive, so only the order of stamps matters.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use rustc_hash::{FxHashMap, FxHashSet};

use crate::composability::ComposabilityBase;
use crate::error::{Error, Result};
use crate::event::{EventSet, Observable};
use crate::model::{
    validate_trace, ExploreLimits, Observation, State, TesTransitionSystem, Trace,
};
use crate::product::{combine_steps, CombineKind};

/// The runtime state: each component paired with its current state, plus the
/// logical clock.
#[derive(Debug, Clone)]
pub struct SystemState {
    components: Vec<(TesTransitionSystem, State)>,
    step: u64,
}

impl SystemState {
    /// Starts every component in its initial state at logical time zero.
    pub fn new(systems: Vec<TesTransitionSystem>) -> Result<SystemState> {
        if systems.is_empty() {
            return Err(Error::MissingComponent("runtime needs at least one component".into()));
        }
        let components = systems
            .into_iter()
            .map(|s| {
                let q = s.initial().clone();
                (s, q)
            })
            .collect();
        Ok(SystemState { components, step: 0 })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn system(&self, index: usize) -> &TesTransitionSystem {
        &self.components[index].0
    }

    pub fn state(&self, index: usize) -> &State {
        &self.components[index].1
    }

    pub fn current_states(&self) -> Vec<State> {
        self.components.iter().map(|(_, q)| q.clone()).collect()
    }

    pub fn components(&self) -> impl Iterator<Item = (&TesTransitionSystem, &State)> {
        self.components.iter().map(|(s, q)| (s, q))
    }

    fn with_states(&self, states: Vec<State>, step: u64) -> SystemState {
        let components = self
            .components
            .iter()
            .zip(states)
            .map(|((s, _), q)| (s.clone(), q))
            .collect();
        SystemState { components, step }
    }

    /// The state after committing `joint`, with the clock advanced.
    pub fn apply(&self, joint: &JointTransition) -> SystemState {
        self.with_states(joint.next_states(), self.step + 1)
    }
}

/// One committed joint step: the merged label and, per component, whether it
/// advances and to which state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct JointTransition {
    pub label: Observable,
    pub parts: Vec<(bool, State)>,
}

impl JointTransition {
    pub fn next_states(&self) -> Vec<State> {
        self.parts.iter().map(|(_, q)| q.clone()).collect()
    }

    pub fn advances_any(&self) -> bool {
        self.parts.iter().any(|(adv, _)| *adv)
    }
}

/// All joint transitions enabled at `s`, computed by folding the components'
/// outgoing transition sets pairwise under the three timestamp orders.
///
/// The fold follows the component order of `s`. A component with no outgoing
/// transition empties the result: every joint step needs a transition pair.
pub fn enabled_joint_transitions(
    s: &SystemState,
    base: &ComposabilityBase,
    limits: &ExploreLimits,
) -> Result<Vec<JointTransition>> {
    let first = &s.components[0];
    let mut acc_interface: EventSet = first.0.interface().clone();
    let mut partial: Vec<(Observable, Vec<(bool, State)>)> = first
        .0
        .successors(&first.1)
        .iter()
        .map(|tr| (tr.label.events.clone(), vec![(true, tr.target.clone())]))
        .collect();
    for (width, (system, current)) in s.components.iter().enumerate().skip(1) {
        let rights: Vec<(Observable, State)> = system
            .successors(current)
            .iter()
            .map(|tr| (tr.label.events.clone(), tr.target.clone()))
            .collect();
        let left_labels: Vec<Observable> = partial.iter().map(|(l, _)| l.clone()).collect();
        let right_labels: Vec<Observable> = rights.iter().map(|(l, _)| l.clone()).collect();

        let mut next: Vec<(Observable, Vec<(bool, State)>)> = Vec::new();
        combine_steps(
            base,
            &acc_interface,
            &left_labels,
            system.interface(),
            &right_labels,
            |kind, label| {
                let parts = match kind {
                    CombineKind::LeftAlone(i) => {
                        let mut parts = partial[i].1.clone();
                        parts.push((false, current.clone()));
                        parts
                    }
                    CombineKind::RightAlone(j) => {
                        let mut parts: Vec<(bool, State)> = s.components[..width]
                            .iter()
                            .map(|(_, q)| (false, q.clone()))
                            .collect();
                        parts.push((true, rights[j].1.clone()));
                        parts
                    }
                    CombineKind::Both(i, j) => {
                        let mut parts = partial[i].1.clone();
                        parts.push((true, rights[j].1.clone()));
                        parts
                    }
                };
                next.push((label, parts));
            },
        );
        next.sort_unstable();
        next.dedup();
        if next.len() > limits.max_states {
            return Err(Error::ExplosionLimit { limit: limits.max_states });
        }
        partial = next;
        acc_interface = acc_interface.union(system.interface());
    }

    let mut out: Vec<JointTransition> = partial
        .into_iter()
        .map(|(label, parts)| JointTransition { label, parts })
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Picks among enabled joint transitions: a seeded uniform choice for
/// simulation, or a script of indices for reproducing specific schedules.
#[derive(Debug, Clone)]
pub enum Chooser {
    Seeded(SmallRng),
    Scripted(VecDeque<usize>),
}

impl Chooser {
    pub fn seeded(seed: u64) -> Chooser {
        Chooser::Seeded(SmallRng::seed_from_u64(seed))
    }

    pub fn scripted(indices: Vec<usize>) -> Chooser {
        Chooser::Scripted(indices.into())
    }

    /// An index into a nonempty enabled list. Scripted choosers fall back to
    /// the first transition when the script runs out or points past the end.
    pub fn choose(&mut self, enabled: usize) -> usize {
        debug_assert!(enabled > 0);
        match self {
            Chooser::Seeded(rng) => rng.gen_range(0..enabled),
            Chooser::Scripted(script) => match script.pop_front() {
                Some(i) if i < enabled => i,
                _ => 0,
            },
        }
    }
}

/// Commits one joint transition chosen from the enabled set. Advancing
/// components move to their successor states; the logical clock increments.
pub fn runtime_step(
    s: &SystemState,
    base: &ComposabilityBase,
    chooser: &mut Chooser,
    limits: &ExploreLimits,
) -> Result<(JointTransition, SystemState)> {
    let enabled = enabled_joint_transitions(s, base, limits)?;
    if enabled.is_empty() {
        return Err(Error::RuntimeDeadlock);
    }
    let chosen = enabled[chooser.choose(enabled.len())].clone();
    let next = s.with_states(chosen.next_states(), s.step + 1);
    Ok((chosen, next))
}

/// Result of a bounded run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: Trace,
    pub final_state: SystemState,
    /// True when the run stopped early because no joint transition was
    /// enabled.
    pub deadlocked: bool,
}

/// Runs up to `steps` joint transitions with a seeded uniform chooser.
/// Deadlock is data, not failure: the partial trace is returned with the
/// flag set.
pub fn run(
    s0: SystemState,
    base: &ComposabilityBase,
    steps: u64,
    seed: u64,
    limits: &ExploreLimits,
) -> Result<RunOutcome> {
    run_with_chooser(s0, base, steps, &mut Chooser::seeded(seed), limits)
}

pub fn run_with_chooser(
    s0: SystemState,
    base: &ComposabilityBase,
    steps: u64,
    chooser: &mut Chooser,
    limits: &ExploreLimits,
) -> Result<RunOutcome> {
    let mut state = s0;
    let mut observations = Vec::new();
    let mut deadlocked = false;
    for _ in 0..steps {
        match runtime_step(&state, base, chooser, limits) {
            Ok((joint, next)) => {
                observations.push(Observation::at_nat(joint.label, next.step()));
                state = next;
            }
            Err(Error::RuntimeDeadlock) => {
                deadlocked = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let trace = validate_trace(observations)?;
    Ok(RunOutcome { trace, final_state: state, deadlocked })
}

/// Result of a breadth-first reachability search.
#[derive(Debug, Clone)]
pub struct ReachOutcome {
    /// A shortest witness trace, or `None` when the whole reachable space was
    /// exhausted without a match.
    pub witness: Option<Trace>,
    /// Number of distinct component-state tuples visited.
    pub visited: usize,
}

/// Breadth-first search over component-state tuples for a state satisfying
/// `predicate`. The step counter is not part of the visited key.
pub fn reach(
    s0: &SystemState,
    base: &ComposabilityBase,
    predicate: impl Fn(&SystemState) -> bool,
    max_states: usize,
) -> Result<ReachOutcome> {
    let limits = ExploreLimits::with_max_states(max_states);
    let mut visited: FxHashSet<Vec<State>> = FxHashSet::default();
    let mut parents: FxHashMap<Vec<State>, (Vec<State>, Observable)> = FxHashMap::default();
    let mut queue: VecDeque<(Vec<State>, u64)> = VecDeque::new();

    let start = s0.current_states();
    visited.insert(start.clone());
    queue.push_back((start.clone(), 0));

    while let Some((states, depth)) = queue.pop_front() {
        let here = s0.with_states(states.clone(), depth);
        if predicate(&here) {
            let mut labels = Vec::new();
            let mut cursor = states;
            while let Some((parent, label)) = parents.get(&cursor) {
                labels.push(label.clone());
                cursor = parent.clone();
            }
            labels.reverse();
            let observations = labels
                .into_iter()
                .enumerate()
                .map(|(i, label)| Observation::at_nat(label, i as u64 + 1))
                .collect();
            return Ok(ReachOutcome {
                witness: Some(validate_trace(observations)?),
                visited: visited.len(),
            });
        }
        for joint in enabled_joint_transitions(&here, base, &limits)? {
            let next = joint.next_states();
            if visited.insert(next.clone()) {
                if visited.len() > max_states {
                    return Err(Error::ExplosionLimit { limit: max_states });
                }
                parents.insert(next.clone(), (states.clone(), joint.label.clone()));
                queue.push_back((next, depth + 1));
            }
        }
    }
    Ok(ReachOutcome { witness: None, visited: visited.len() })
}

/// Renders a trace in the line-based exchange format: one observation per
/// line as `step<TAB>{event,…}`, the empty observable printed as `{}`, and a
/// final `DEADLOCK` line when the run was cut short.
pub fn render_trace(trace: &Trace, deadlocked: bool) -> String {
    let mut out = String::new();
    for obs in trace.items() {
        let _ = writeln!(out, "{}\t{}", obs.time, obs.observable);
    }
    if deadlocked {
        out.push_str("DEADLOCK\n");
    }
    out
}
