//! Components as transition systems over timed-event streams.
//!
//! A component is an interface (a finite event set) plus a behavior: the set
//! of infinite observation sequences its transition system generates. This
//! crate provides:
//!
//! - the data model: events, observables, exact rational timestamps,
//!   observations, traces, and transition systems with explicit or
//!   generator-backed state spaces ([`model`]);
//! - composability relations on observables and the synchronous composability
//!   relation on observations they induce ([`composability`]);
//! - the parametrised synchronous product of transition systems, n-ary folds,
//!   and bounded language-equivalence oracles ([`product`]);
//! - run/greatest-fixed-point semantics, deadlock freedom, and prefix closure
//!   ([`semantics`]);
//! - compatibility analysis deciding whether two systems can be composed
//!   lazily without introducing deadlocks ([`compatibility`]);
//! - a step-wise runtime engine with seeded simulation and breadth-first
//!   reachability search ([`runtime`]);
//! - a self-sorting-robots case study: robots, grids, batteries, and swap
//!   protocols with lock-based coordination rules ([`robots`]);
//! - a JSON system-specification format ([`spec_file`]) and named built-in
//!   demo systems ([`demos`]).

pub mod composability;
pub mod compatibility;
pub mod demos;
pub mod error;
pub mod event;
pub mod model;
pub mod product;
pub mod robots;
pub mod runtime;
pub mod semantics;
pub mod spec_file;
pub mod term;
pub mod testing;
pub mod time;

pub use composability::{
    composable_at, composable_timed, independent, kappa_sync, kappa_sync_shared, lift_step,
    merge, ComposabilityBase, EventPattern, StepOutcome, SyncRule, TimeOrder,
};
pub use compatibility::{check_compatible, shortcut_compatible, CompatibilityVerdict};
pub use error::{Error, Result};
pub use event::{Event, EventSet, Observable};
pub use model::{
    reachable_states, reachable_states_full, successors_of, validate_trace, ExploreLimits,
    Label, Mode, Observation, State, SuccessorFn, TesTransitionSystem, Trace, Transition,
};
pub use product::{bounded_lang_equal, product, product_n};
pub use semantics::{
    finite_runs, is_deadlock_free, is_prefix_closed_syntactic, live_states, prefix_closure,
    DeadlockVerdict,
};
pub use robots::{p_battery_out, p_sorted, robots_composability, RobotId};
pub use runtime::{
    enabled_joint_transitions, reach, run, runtime_step, Chooser, JointTransition,
    ReachOutcome, RunOutcome, SystemState,
};
pub use term::Atom;
pub use time::TimeStamp;
