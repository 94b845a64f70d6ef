//! The synchronous product of transition systems under a composability
//! relation, n-ary folds, and a bounded language-equivalence oracle.
//!
//! Product states are pairs, the interface is the union, and successors
//! implement three rules: the strictly earlier side advances alone with its
//! own label, and simultaneous composable steps advance both sides with the
//! merged label. In delay-insensitive mode the three timestamp orders are
//! decided at representative stamps (1,2), (2,1), (1,1); only the order of
//! stamps matters to the composability relation, not their values.

use std::collections::BTreeSet;
use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::composability::{composable_timed, independent, ComposabilityBase};
use crate::error::{Error, Result};
use crate::event::{EventSet, Observable};
use crate::model::{
    ExploreLimits, Label, Mode, State, SuccessorFn, TesTransitionSystem, Transition,
};
use crate::semantics::finite_runs;

/// How a pairwise joint step advances the two sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CombineKind {
    /// The left side advances alone (strictly earlier step).
    LeftAlone(usize),
    /// The right side advances alone.
    RightAlone(usize),
    /// Both sides advance simultaneously with the merged label.
    Both(usize, usize),
}

/// Computes the composable joint steps of two delay-insensitive transition
/// sets. Emits nothing when either side has no transitions: a product step
/// always needs a pair of transitions.
///
/// The simultaneous rule for the shared-identity and ruleset bases is decided
/// by a join on interface slices (`left ∩ E2 = right ∩ E1`) instead of an
/// all-pairs scan; other bases fall back to the quadratic scan.
pub(crate) fn combine_steps(
    base: &ComposabilityBase,
    e1: &EventSet,
    lefts: &[Observable],
    e2: &EventSet,
    rights: &[Observable],
    mut emit: impl FnMut(CombineKind, Observable),
) {
    if lefts.is_empty() || rights.is_empty() {
        return;
    }
    // Strictly earlier steps: the condition depends only on the advancing
    // label and the other interface.
    for (i, left) in lefts.iter().enumerate() {
        if independent(base, left, e2) {
            emit(CombineKind::LeftAlone(i), left.clone());
        }
    }
    for (j, right) in rights.iter().enumerate() {
        if independent(base, right, e1) {
            emit(CombineKind::RightAlone(j), right.clone());
        }
    }
    match base {
        ComposabilityBase::SharedIdentity | ComposabilityBase::Ruleset(_) => {
            let rules = base.rules();
            let mut by_slice: FxHashMap<Observable, Vec<usize>> = FxHashMap::default();
            for (j, right) in rights.iter().enumerate() {
                by_slice.entry(right.restrict(e1)).or_default().push(j);
            }
            for (i, left) in lefts.iter().enumerate() {
                let Some(candidates) = by_slice.get(&left.restrict(e2)) else {
                    continue;
                };
                for &j in candidates {
                    let union = left.union(&rights[j]);
                    if crate::composability::rules_satisfied(rules, e1, e2, &union) {
                        emit(CombineKind::Both(i, j), union);
                    }
                }
            }
        }
        _ => {
            for (i, left) in lefts.iter().enumerate() {
                for (j, right) in rights.iter().enumerate() {
                    if crate::composability::composable_at(
                        base,
                        e1,
                        e2,
                        left,
                        right,
                        crate::composability::TimeOrder::Simultaneous,
                    ) {
                        emit(CombineKind::Both(i, j), left.union(right));
                    }
                }
            }
        }
    }
}

/// The product of two transition systems under the synchronous composability
/// relation induced by `base` on their interfaces.
///
/// Lazy: pair-state successors are computed on demand and memoized.
pub fn product(
    t1: &TesTransitionSystem,
    t2: &TesTransitionSystem,
    base: &ComposabilityBase,
) -> Result<TesTransitionSystem> {
    if t1.mode() != t2.mode() {
        return Err(Error::ModeMismatch);
    }
    let mode = t1.mode();
    let e1 = t1.interface().clone();
    let e2 = t2.interface().clone();
    let interface = e1.union(&e2);
    let initial = State::pair(t1.initial(), t2.initial());
    let name = format!("({}x{})", t1.name(), t2.name());
    let left = t1.clone();
    let right = t2.clone();
    let base = base.clone();

    let successors: SuccessorFn = Arc::new(move |q: &State| {
        let Some((q1, q2)) = q.unpair() else {
            return Arc::new(Vec::new());
        };
        let trs1 = left.successors(&q1);
        let trs2 = right.successors(&q2);
        let mut out: Vec<Transition> = Vec::new();
        match mode {
            Mode::DelayInsensitive => {
                let labels1: Vec<Observable> =
                    trs1.iter().map(|t| t.label.events.clone()).collect();
                let labels2: Vec<Observable> =
                    trs2.iter().map(|t| t.label.events.clone()).collect();
                combine_steps(&base, &e1, &labels1, &e2, &labels2, |kind, label| {
                    let target = match kind {
                        CombineKind::LeftAlone(i) => State::pair(&trs1[i].target, &q2),
                        CombineKind::RightAlone(j) => State::pair(&q1, &trs2[j].target),
                        CombineKind::Both(i, j) => {
                            State::pair(&trs1[i].target, &trs2[j].target)
                        }
                    };
                    out.push(Transition::new(Label::untimed(label), target));
                });
            }
            Mode::Timed => {
                for tr1 in trs1.iter() {
                    for tr2 in trs2.iter() {
                        let (Some(time1), Some(time2)) = (tr1.label.time, tr2.label.time)
                        else {
                            continue;
                        };
                        let o1 = crate::model::Observation::new(
                            tr1.label.events.clone(),
                            time1,
                        );
                        let o2 = crate::model::Observation::new(
                            tr2.label.events.clone(),
                            time2,
                        );
                        if !composable_timed(&base, &e1, &e2, &o1, &o2) {
                            continue;
                        }
                        let (label, target) = if time1 < time2 {
                            (tr1.label.clone(), State::pair(&tr1.target, &q2))
                        } else if time2 < time1 {
                            (tr2.label.clone(), State::pair(&q1, &tr2.target))
                        } else {
                            (
                                Label::timed(o1.observable.union(&o2.observable), time1),
                                State::pair(&tr1.target, &tr2.target),
                            )
                        };
                        out.push(Transition::new(label, target));
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Arc::new(out)
    });

    Ok(TesTransitionSystem::new(name, interface, initial, mode, successors).memoized())
}

/// Left fold of [`product`] over a nonempty component list. The state is the
/// left-nested pair tuple.
pub fn product_n(
    systems: &[TesTransitionSystem],
    base: &ComposabilityBase,
) -> Result<TesTransitionSystem> {
    let (first, rest) = systems
        .split_first()
        .ok_or_else(|| Error::MissingComponent("product of an empty component list".into()))?;
    let mut acc = first.clone();
    for next in rest {
        acc = product(&acc, next, base)?;
    }
    Ok(acc)
}

/// True when the two systems have the same set of label traces of length at
/// most `depth` from their initial states.
pub fn bounded_lang_equal(
    ta: &TesTransitionSystem,
    tb: &TesTransitionSystem,
    depth: usize,
    limits: &ExploreLimits,
) -> Result<bool> {
    let la: BTreeSet<Vec<Label>> = finite_runs(ta, depth, limits)?;
    let lb: BTreeSet<Vec<Label>> = finite_runs(tb, depth, limits)?;
    Ok(la == lb)
}
