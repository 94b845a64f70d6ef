//! End-to-end behavior of the robots case study: sorting with and without
//! protocols, battery exhaustion, the strategy deadlock, and the safety
//! invariants of composed runs.

use std::collections::BTreeMap;

use tes_core::demos;
use tes_core::robots::{decode_grid_state, ev_move, RobotId};
use tes_core::semantics::is_deadlock_free;
use tes_core::spec_file::LoadedSystem;
use tes_core::{
    p_battery_out, p_sorted, product_n, reach, run, DeadlockVerdict, ExploreLimits,
    SystemState,
};

fn load(name: &str) -> LoadedSystem {
    demos::demo(name).expect("known demo").build().expect("demo builds")
}

fn initial(name: &str) -> (SystemState, tes_core::ComposabilityBase) {
    let loaded = load(name);
    (SystemState::new(loaded.components).unwrap(), loaded.base)
}

#[test]
fn two_robot_swap_sorts() {
    let (s0, base) = initial("example2");
    let out = reach(&s0, &base, |s| p_sorted(s).unwrap_or(false), 100_000).unwrap();
    let witness = out.witness.expect("the swap protocol sorts two robots");
    // start, three move steps: four observations at minimum.
    assert!(witness.len() >= 4, "unexpectedly short witness: {}", witness.len());
}

#[test]
fn free_trolls_reach_sorted() {
    let (s0, base) = initial("troll3");
    let out = reach(&s0, &base, |s| p_sorted(s).unwrap_or(false), 100_000).unwrap();
    assert!(out.witness.is_some());
}

#[test]
fn coordinated_trolls_reach_sorted() {
    let (s0, base) = initial("troll3-protocols");
    let out = reach(&s0, &base, |s| p_sorted(s).unwrap_or(false), 500_000).unwrap();
    assert!(out.witness.is_some(), "lock-coordinated swaps must still sort");
}

#[test]
fn batteries_run_out_only_without_protocols() {
    let (s0, base) = initial("troll3-batteries");
    let out = reach(&s0, &base, |s| p_battery_out(s).unwrap_or(false), 500_000).unwrap();
    assert!(out.witness.is_some(), "free robots can drain their batteries");

    let (s0, base) = initial("troll3-full");
    let out = reach(&s0, &base, |s| p_battery_out(s).unwrap_or(false), 1_000_000).unwrap();
    assert!(
        out.witness.is_none(),
        "protocol-coordinated robots move only inside swaps and cannot drain"
    );
}

#[test]
fn coordinated_trolls_with_batteries_still_sort() {
    let (s0, base) = initial("troll3-full");
    let out = reach(&s0, &base, |s| p_sorted(s).unwrap_or(false), 1_000_000).unwrap();
    assert!(out.witness.is_some());
}

#[test]
fn strategy_robots_deadlock() {
    let loaded = load("fig2");
    let product = product_n(&loaded.components, &loaded.base).unwrap();
    let verdict = is_deadlock_free(&product, &ExploreLimits::default());
    match verdict {
        DeadlockVerdict::Deadlocking { witness, trace } => {
            assert!(!trace.is_empty(), "the initial configuration is not yet stuck");
            // Cross-check with an independent breadth-first search to the
            // witness state.
            let shortest =
                tes_core::semantics::trace_to_state(&product, &witness, &ExploreLimits::default())
                    .expect("the witness is reachable");
            assert!(shortest.len() <= trace.len());
        }
        other => panic!("expected a reachable dead configuration, got {other:?}"),
    }
}

/// Runs of the composed systems preserve the grid's physical invariants:
/// occupancy stays injective and in bounds, and a robot's position changes
/// exactly when the observable carries its move.
#[test]
fn runs_respect_grid_physics() {
    for demo in ["troll3", "troll3-protocols"] {
        let loaded = load(demo);
        for seed in 0..20u64 {
            let mut chooser = tes_core::Chooser::seeded(seed);
            let mut state = SystemState::new(loaded.components.clone()).unwrap();
            let mut previous = grid_of(&state);
            for _ in 0..30 {
                let (joint, next) = tes_core::runtime_step(
                    &state,
                    &loaded.base,
                    &mut chooser,
                    &ExploreLimits::default(),
                )
                .expect("these demos never deadlock");
                let current = grid_of(&next);
                assert_injective_in_bounds(&current, 3, 2);
                for (robot, cell) in &current {
                    if previous[robot] != *cell {
                        let moved = tes_core::robots::Direction::ALL
                            .iter()
                            .any(|d| joint.label.contains(&ev_move(*robot, *d)));
                        assert!(
                            moved,
                            "{demo}: R{} changed cell without a move event",
                            robot.index()
                        );
                    }
                }
                previous = current;
                state = next;
            }
        }
    }
}

/// Between a protocol's start and its end, no other start involving one of
/// its robots occurs: the lock rules enforce mutual exclusion.
#[test]
fn swaps_are_mutually_exclusive_per_robot() {
    let loaded = load("troll3-protocols");
    for seed in 0..50u64 {
        let s0 = SystemState::new(loaded.components.clone()).unwrap();
        let out =
            run(s0, &loaded.base, 40, seed, &ExploreLimits::default()).unwrap();
        let mut active: Vec<(u32, u32)> = Vec::new();
        for obs in out.trace.items() {
            for event in obs.observable.iter() {
                if event.name() == "start" || event.name() == "end" {
                    let pair = protocol_of(event);
                    if event.name() == "start" {
                        for (i, j) in &active {
                            assert!(
                                pair.0 != *i && pair.0 != *j && pair.1 != *i && pair.1 != *j,
                                "seed {seed}: start{pair:?} overlaps active swap ({i},{j})"
                            );
                        }
                        active.push(pair);
                    } else {
                        active.retain(|p| *p != pair);
                    }
                }
            }
        }
    }
}

fn protocol_of(event: &tes_core::Event) -> (u32, u32) {
    let tes_core::Atom::App(_, args) = &event.args()[0] else {
        panic!("protocol events carry S(i,j)");
    };
    (args[0].as_int().unwrap() as u32, args[1].as_int().unwrap() as u32)
}

fn grid_of(state: &SystemState) -> BTreeMap<RobotId, (i64, i64)> {
    state
        .components()
        .find_map(|(_, q)| decode_grid_state(q))
        .expect("demo systems contain a grid")
}

fn assert_injective_in_bounds(occupancy: &BTreeMap<RobotId, (i64, i64)>, n: i64, m: i64) {
    let mut seen = std::collections::BTreeSet::new();
    for (robot, (x, y)) in occupancy {
        assert!(*x >= 0 && *x < n && *y >= 0 && *y < m, "R{} out of bounds", robot.index());
        assert!(seen.insert((*x, *y)), "two robots share ({x},{y})");
    }
}


/// A scripted runtime run reproduces the strategy jam: following the
/// search's witness labels step by step ends in a runtime deadlock.
#[test]
fn scripted_runtime_run_reaches_the_jam() {
    let loaded = load("fig2");
    let s0 = SystemState::new(loaded.components.clone()).unwrap();
    let limits = ExploreLimits::default();

    // Find a trace to a configuration with no enabled joint transition.
    let dead = reach(
        &s0,
        &loaded.base,
        |s| {
            tes_core::enabled_joint_transitions(s, &loaded.base, &limits)
                .map(|e| e.is_empty())
                .unwrap_or(false)
        },
        200_000,
    )
    .unwrap();
    let witness = dead.witness.expect("the strategy system jams");

    // Convert the label trace into chooser indices, then drive the runtime
    // through a scripted chooser.
    let mut indices = Vec::new();
    let mut cursor = SystemState::new(loaded.components.clone()).unwrap();
    for obs in witness.items() {
        let enabled =
            tes_core::enabled_joint_transitions(&cursor, &loaded.base, &limits).unwrap();
        let idx = enabled
            .iter()
            .position(|j| j.label == obs.observable)
            .expect("witness label enabled");
        cursor = cursor.apply(&enabled[idx]);
        indices.push(idx);
    }

    let steps = indices.len() as u64;
    let mut chooser = tes_core::Chooser::scripted(indices);
    let s0 = SystemState::new(loaded.components.clone()).unwrap();
    let outcome = tes_core::runtime::run_with_chooser(s0, &loaded.base, steps + 1, &mut chooser, &limits)
        .unwrap();
    assert!(outcome.deadlocked, "the scripted run ends jammed");
    assert_eq!(outcome.trace.len() as u64, steps);
}

/// Searching with an unsatisfiable predicate visits exactly the states the
/// eager product reaches.
#[test]
fn reach_visits_exactly_the_eager_state_space() {
    for demo in ["troll3-protocols", "example5"] {
        let loaded = load(demo);
        let s0 = SystemState::new(loaded.components.clone()).unwrap();
        let outcome = reach(&s0, &loaded.base, |_| false, 1_000_000).unwrap();
        assert!(outcome.witness.is_none());
        let eager = product_n(&loaded.components, &loaded.base).unwrap();
        let eager_states =
            tes_core::reachable_states_full(&eager, &ExploreLimits::default()).unwrap();
        assert_eq!(outcome.visited, eager_states.len(), "{demo}");
    }
}
