//! Compatibility of two transition systems under a composability relation.
//!
//! Two initialised systems are compatible when there is a relation on state
//! pairs, containing the initial pair, such that every related pair has at
//! least one composable pair of outgoing transitions, and every composable
//! pair of outgoing transitions advances (per the minimum-timestamp rule) to
//! a related pair. Compatibility of both orders with individual deadlock
//! freedom licenses lazy, step-wise execution of the product.

use rustc_hash::{FxHashMap, FxHashSet};

use crate::composability::ComposabilityBase;
use crate::error::{Error, Result};
use crate::event::Observable;
use crate::model::{ExploreLimits, Label, Mode, State, TesTransitionSystem};
use crate::product::{combine_steps, CombineKind};
use crate::semantics::{is_deadlock_free, is_prefix_closed_syntactic};

/// Outcome of a compatibility check: the witness relation when compatible,
/// a reachable stuck pair with its reaching trace when not.
#[derive(Debug, Clone)]
pub struct CompatibilityVerdict {
    pub compatible: bool,
    /// The greatest relation satisfying both conditions over reachable pairs.
    pub relation: Option<FxHashSet<(State, State)>>,
    /// A reachable pair violating the conditions, with a joint trace to it.
    pub counterexample: Option<(State, State, Vec<Label>)>,
}

type JointStepTable = FxHashMap<(State, State), Vec<(Label, (State, State))>>;

/// The composable joint steps from a pair of states: label plus successor
/// pair, advancing per the minimum-timestamp rule (in delay-insensitive mode,
/// per the three representative timestamp orders).
fn joint_steps(
    t1: &TesTransitionSystem,
    t2: &TesTransitionSystem,
    base: &ComposabilityBase,
    p1: &State,
    p2: &State,
) -> Vec<(Label, (State, State))> {
    let trs1 = t1.successors(p1);
    let trs2 = t2.successors(p2);
    let mut out = Vec::new();
    match t1.mode() {
        Mode::DelayInsensitive => {
            let labels1: Vec<Observable> = trs1.iter().map(|t| t.label.events.clone()).collect();
            let labels2: Vec<Observable> = trs2.iter().map(|t| t.label.events.clone()).collect();
            combine_steps(base, t1.interface(), &labels1, t2.interface(), &labels2, |kind, label| {
                let pair = match kind {
                    CombineKind::LeftAlone(i) => (trs1[i].target.clone(), p2.clone()),
                    CombineKind::RightAlone(j) => (p1.clone(), trs2[j].target.clone()),
                    CombineKind::Both(i, j) => (trs1[i].target.clone(), trs2[j].target.clone()),
                };
                out.push((Label::untimed(label), pair));
            });
        }
        Mode::Timed => {
            for tr1 in trs1.iter() {
                for tr2 in trs2.iter() {
                    let (Some(time1), Some(time2)) = (tr1.label.time, tr2.label.time) else {
                        continue;
                    };
                    let o1 = crate::model::Observation::new(tr1.label.events.clone(), time1);
                    let o2 = crate::model::Observation::new(tr2.label.events.clone(), time2);
                    if !crate::composability::composable_timed(
                        base,
                        t1.interface(),
                        t2.interface(),
                        &o1,
                        &o2,
                    ) {
                        continue;
                    }
                    let step = if time1 < time2 {
                        (tr1.label.clone(), (tr1.target.clone(), p2.clone()))
                    } else if time2 < time1 {
                        (tr2.label.clone(), (p1.clone(), tr2.target.clone()))
                    } else {
                        (
                            Label::timed(o1.observable.union(&o2.observable), time1),
                            (tr1.target.clone(), tr2.target.clone()),
                        )
                    };
                    out.push(step);
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Decides whether `(t1, initial1)` is compatible with `(t2, initial2)` under
/// `base`, by computing the greatest relation over composably reachable state
/// pairs. This checks one direction; mutual compatibility is the conjunction
/// of both argument orders.
pub fn check_compatible(
    t1: &TesTransitionSystem,
    t2: &TesTransitionSystem,
    base: &ComposabilityBase,
    limits: &ExploreLimits,
) -> Result<CompatibilityVerdict> {
    if t1.mode() != t2.mode() {
        return Err(Error::ModeMismatch);
    }
    let initial = (t1.initial().clone(), t2.initial().clone());

    // Reachable pairs under composable joint stepping, with parent links for
    // counterexample traces.
    let mut reachable: FxHashSet<(State, State)> = FxHashSet::default();
    let mut parents: FxHashMap<(State, State), ((State, State), Label)> = FxHashMap::default();
    let mut queue: Vec<(State, State)> = vec![initial.clone()];
    reachable.insert(initial.clone());
    let mut steps: JointStepTable = FxHashMap::default();
    while let Some(pair) = queue.pop() {
        let out = joint_steps(t1, t2, base, &pair.0, &pair.1);
        for (label, next) in &out {
            if reachable.insert(next.clone()) {
                if reachable.len() > limits.max_states {
                    return Err(Error::ExplosionLimit { limit: limits.max_states });
                }
                parents.insert(next.clone(), (pair.clone(), label.clone()));
                queue.push(next.clone());
            }
        }
        steps.insert(pair, out);
    }

    // Greatest fixed point by iterated removal: a pair dies when it has no
    // composable joint step or when some composable joint step leaves the
    // current relation.
    let mut relation = reachable.clone();
    loop {
        let doomed: Vec<(State, State)> = relation
            .iter()
            .filter(|pair| {
                let out = &steps[*pair];
                out.is_empty() || out.iter().any(|(_, next)| !relation.contains(next))
            })
            .cloned()
            .collect();
        if doomed.is_empty() {
            break;
        }
        for pair in doomed {
            relation.remove(&pair);
        }
    }

    if relation.contains(&initial) {
        return Ok(CompatibilityVerdict {
            compatible: true,
            relation: Some(relation),
            counterexample: None,
        });
    }

    // Prefer a hard witness: a reachable pair with no composable joint step.
    let stuck = reachable
        .iter()
        .find(|pair| steps[*pair].is_empty())
        .cloned()
        .unwrap_or(initial);
    let mut trace = Vec::new();
    let mut cursor = stuck.clone();
    while let Some((parent, label)) = parents.get(&cursor) {
        trace.push(label.clone());
        cursor = parent.clone();
    }
    trace.reverse();
    Ok(CompatibilityVerdict {
        compatible: false,
        relation: None,
        counterexample: Some((stuck.0, stuck.1, trace)),
    })
}

/// Sufficient-condition shortcuts. Returns `Some(true)` when a hypothesis
/// that guarantees compatibility is verified:
///
/// - the base relation restricted to the two interfaces is empty and both
///   systems are deadlock free, so any pair of observations composes and
///   transitions never run out; or
/// - both systems are syntactically prefix-closed (silent self-loops
///   everywhere), so the silent pair always composes.
///
/// Returns `None` when neither hypothesis is verified — the caller falls back
/// to [`check_compatible`]. Never returns `Some(false)`.
pub fn shortcut_compatible(
    t1: &TesTransitionSystem,
    t2: &TesTransitionSystem,
    base: &ComposabilityBase,
    limits: &ExploreLimits,
) -> Option<bool> {
    if base.restriction_is_empty(t1.interface(), t2.interface())
        && is_deadlock_free(t1, limits).is_free()
        && is_deadlock_free(t2, limits).is_free()
    {
        return Some(true);
    }
    let closed = |t: &TesTransitionSystem| is_prefix_closed_syntactic(t, limits).unwrap_or(false);
    if t1.mode() == Mode::DelayInsensitive
        && t2.mode() == Mode::DelayInsensitive
        && closed(t1)
        && closed(t2)
    {
        return Some(true);
    }
    None
}
