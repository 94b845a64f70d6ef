//! Named built-in demo systems.
//!
//! Each demo is an ordinary [`SystemSpec`] value, so it can be exported as a
//! JSON file, inspected, or built directly. Grids come first in composite
//! demos: the grid constrains the robots immediately, which keeps the
//! intermediate joint-transition sets small during folds.

use std::collections::BTreeMap;

use crate::spec_file::{
    BaseSpec, BuiltinSpec, ComponentSpec, ExplicitSpec, LabelSpec, SystemSpec, TransitionSpec,
};

pub const DEMO_NAMES: [&str; 7] = [
    "example2",
    "example5",
    "fig2",
    "troll3",
    "troll3-batteries",
    "troll3-protocols",
    "troll3-full",
];

/// Returns the named demo, or `None` for an unknown name.
pub fn demo(name: &str) -> Option<SystemSpec> {
    match name {
        "example2" => Some(example2()),
        "example5" => Some(example5()),
        "fig2" => Some(fig2()),
        "troll3" => Some(troll3(false, false)),
        "troll3-batteries" => Some(troll3(true, false)),
        "troll3-protocols" => Some(troll3(false, true)),
        "troll3-full" => Some(troll3(true, true)),
        _ => None,
    }
}

fn grid(ids: &[u32], n: i64, m: i64, init: &[(u32, (i64, i64))], silent_loop: bool) -> ComponentSpec {
    ComponentSpec::Builtin(BuiltinSpec::Grid {
        ids: ids.to_vec(),
        n,
        m,
        init: init
            .iter()
            .map(|(id, cell)| (id.to_string(), *cell))
            .collect::<BTreeMap<_, _>>(),
        silent_loop,
    })
}

/// Two free robots, a swap protocol, and a 3×2 grid with the robots in the
/// wrong order — the component zoo of the running example.
fn example2() -> SystemSpec {
    SystemSpec {
        version: 1,
        composability: BaseSpec::Robots,
        components: vec![
            grid(&[1, 2], 3, 2, &[(1, (1, 0)), (2, (0, 0))], true),
            ComponentSpec::Builtin(BuiltinSpec::Robot { id: 1, n: 3, m: 2 }),
            ComponentSpec::Builtin(BuiltinSpec::Robot { id: 2, n: 3, m: 2 }),
            ComponentSpec::Builtin(BuiltinSpec::Swap { i: 1, j: 2, n: 3, m: 2 }),
        ],
    }
}

/// Three single-state systems over the interface {a,b,c,d} that are pairwise
/// compatible although the first is incompatible with the product of the
/// other two.
fn example5() -> SystemSpec {
    let system = |name: &str, first: &[&str], second: &[&str], state: &str| {
        ComponentSpec::Explicit(ExplicitSpec {
            name: Some(name.into()),
            interface: vec!["a".into(), "b".into(), "c".into(), "d".into()],
            initial: state.into(),
            mode: None,
            transitions: vec![
                TransitionSpec {
                    from: state.into(),
                    label: LabelSpec {
                        events: first.iter().map(|s| s.to_string()).collect(),
                        time: None,
                    },
                    to: state.into(),
                },
                TransitionSpec {
                    from: state.into(),
                    label: LabelSpec {
                        events: second.iter().map(|s| s.to_string()).collect(),
                        time: None,
                    },
                    to: state.into(),
                },
            ],
        })
    };
    SystemSpec {
        version: 1,
        composability: BaseSpec::SharedIdentity,
        components: vec![
            system("T1", &["a", "b"], &["a", "c"], "q1"),
            system("T2", &["a", "c"], &["a", "d"], "q2"),
            system("T3", &["a", "d"], &["a", "b"], "q3"),
        ],
    }
}

/// Five strategy robots on a 5×2 grid, initially in reverse order. The grid
/// omits its silent loop so a configuration where every pending move is
/// blocked is a genuine dead end.
fn fig2() -> SystemSpec {
    let mut components = vec![grid(
        &[1, 2, 3, 4, 5],
        5,
        2,
        &[(1, (4, 0)), (2, (3, 0)), (3, (2, 0)), (4, (1, 0)), (5, (0, 0))],
        false,
    )];
    for id in 1..=5 {
        components.push(ComponentSpec::Builtin(BuiltinSpec::StrategyRobot {
            id,
            n: 5,
            m: 2,
        }));
    }
    SystemSpec { version: 1, composability: BaseSpec::SharedIdentity, components }
}

/// Three free robots ("trolls") on a 3×2 grid, initially in reverse order,
/// optionally with batteries and with the full set of swap protocols.
fn troll3(batteries: bool, protocols: bool) -> SystemSpec {
    let mut components = vec![grid(
        &[1, 2, 3],
        3,
        2,
        &[(1, (2, 0)), (2, (1, 0)), (3, (0, 0))],
        true,
    )];
    for id in 1..=3 {
        components.push(ComponentSpec::Builtin(BuiltinSpec::Robot { id, n: 3, m: 2 }));
    }
    if batteries {
        for id in 1..=3 {
            components.push(ComponentSpec::Builtin(BuiltinSpec::Battery { id, capacity: 9 }));
        }
    }
    if protocols {
        for (i, j) in [(1, 2), (1, 3), (2, 3)] {
            components.push(ComponentSpec::Builtin(BuiltinSpec::Swap { i, j, n: 3, m: 2 }));
        }
    }
    SystemSpec {
        version: 1,
        composability: if protocols { BaseSpec::Robots } else { BaseSpec::SharedIdentity },
        components,
    }
}
