//! The JSON system-specification format.
//!
//! A spec file declares a composability base and a component list. Components
//! are either explicit transition tables or named builders from the robots
//! case study. Event strings use the `name(arg,…)` syntax, e.g. `move(R1,N)`
//! or `pos(R1,2,0)`; state terms use the same term grammar.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::composability::{ComposabilityBase, EventPattern, SyncRule};
use crate::error::{Error, Result};
use crate::event::{Event, EventSet, Observable};
use crate::model::{Label, Mode, State, TesTransitionSystem};
use crate::robots;
use crate::term::Atom;
use crate::time::TimeStamp;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemSpec {
    pub version: u32,
    pub composability: BaseSpec,
    pub components: Vec<ComponentSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BaseSpec {
    /// Observables synchronise exactly on shared events.
    SharedIdentity,
    /// Nothing synchronises.
    Empty,
    /// An explicit table of related observable pairs.
    Pairs { pairs: Vec<PairSpec> },
    /// Shared identity constrained by synchronisation rules.
    Rules { rules: Vec<RuleSpec> },
    /// Shared identity plus the lock rules derived from the swap components
    /// present in the component list.
    Robots,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairSpec {
    pub left: Vec<String>,
    pub right: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleSpec {
    pub trigger: String,
    #[serde(rename = "requires-any")]
    pub requires_any: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentSpec {
    Builtin(BuiltinSpec),
    Explicit(ExplicitSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "kebab-case")]
pub enum BuiltinSpec {
    Robot {
        id: u32,
        n: i64,
        m: i64,
    },
    StrategyRobot {
        id: u32,
        n: i64,
        m: i64,
    },
    Grid {
        ids: Vec<u32>,
        n: i64,
        m: i64,
        /// Robot index (as a string key, with or without the `R` prefix) to
        /// its initial cell.
        init: BTreeMap<String, (i64, i64)>,
        #[serde(default = "default_true", rename = "silent-loop")]
        silent_loop: bool,
    },
    Battery {
        id: u32,
        capacity: u32,
    },
    Swap {
        i: u32,
        j: u32,
        n: i64,
        m: i64,
    },
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExplicitSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub interface: Vec<String>,
    pub initial: String,
    #[serde(default)]
    pub mode: Option<ModeSpec>,
    pub transitions: Vec<TransitionSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    Timed,
    DelayInsensitive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub from: String,
    pub label: LabelSpec,
    pub to: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelSpec {
    pub events: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeSpec {
    Nat(u64),
    Text(String),
}

/// A spec file resolved into live objects.
pub struct LoadedSystem {
    pub components: Vec<TesTransitionSystem>,
    pub base: ComposabilityBase,
}

impl SystemSpec {
    pub fn parse(text: &str) -> Result<SystemSpec> {
        let spec: SystemSpec =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if spec.version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported spec version {} (expected {FORMAT_VERSION})",
                spec.version
            )));
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialisation cannot fail")
    }

    /// Builds the declared components and composability base.
    pub fn build(&self) -> Result<LoadedSystem> {
        let mut components = Vec::new();
        let mut protocols: Vec<(robots::RobotId, robots::RobotId)> = Vec::new();
        for spec in &self.components {
            match spec {
                ComponentSpec::Builtin(b) => {
                    if let BuiltinSpec::Swap { i, j, .. } = b {
                        protocols
                            .push((robots::RobotId::new(*i)?, robots::RobotId::new(*j)?));
                    }
                    components.push(build_builtin(b)?);
                }
                ComponentSpec::Explicit(e) => components.push(build_explicit(e)?),
            }
        }
        let base = match &self.composability {
            BaseSpec::SharedIdentity => ComposabilityBase::SharedIdentity,
            BaseSpec::Empty => ComposabilityBase::Empty,
            BaseSpec::Pairs { pairs } => {
                let mut table = Vec::new();
                for pair in pairs {
                    table.push((parse_observable(&pair.left)?, parse_observable(&pair.right)?));
                }
                ComposabilityBase::explicit_pairs(table)?
            }
            BaseSpec::Rules { rules } => {
                let mut compiled = Vec::new();
                for rule in rules {
                    let trigger = EventPattern::parse(&rule.trigger)?;
                    let requires = rule
                        .requires_any
                        .iter()
                        .map(|r| EventPattern::parse(r))
                        .collect::<Result<Vec<_>>>()?;
                    compiled.push(SyncRule::new(trigger, requires));
                }
                ComposabilityBase::Ruleset(compiled)
            }
            BaseSpec::Robots => robots::robots_composability(&protocols),
        };
        Ok(LoadedSystem { components, base })
    }
}

fn parse_observable(events: &[String]) -> Result<Observable> {
    Ok(Observable::new(
        events.iter().map(|e| Event::parse(e)).collect::<Result<Vec<_>>>()?,
    ))
}

fn parse_robot_key(key: &str) -> Result<robots::RobotId> {
    let digits = key.strip_prefix('R').unwrap_or(key);
    let index: u32 = digits
        .parse()
        .map_err(|_| Error::Parse(format!("bad robot key {key:?}")))?;
    robots::RobotId::new(index)
}

fn build_builtin(spec: &BuiltinSpec) -> Result<TesTransitionSystem> {
    match spec {
        BuiltinSpec::Robot { id, n, m } => {
            Ok(robots::make_robot(robots::RobotId::new(*id)?, *n, *m))
        }
        BuiltinSpec::StrategyRobot { id, n, m } => {
            Ok(robots::make_strategy_robot(robots::RobotId::new(*id)?, *n, *m))
        }
        BuiltinSpec::Grid { ids, n, m, init, silent_loop } => {
            let ids = ids
                .iter()
                .map(|i| robots::RobotId::new(*i))
                .collect::<Result<Vec<_>>>()?;
            let mut occupancy = BTreeMap::new();
            for (key, cell) in init {
                occupancy.insert(parse_robot_key(key)?, *cell);
            }
            robots::make_grid(
                &ids,
                *n,
                *m,
                &occupancy,
                robots::GridOptions { silent_loop: *silent_loop },
            )
        }
        BuiltinSpec::Battery { id, capacity } => {
            Ok(robots::make_battery(robots::RobotId::new(*id)?, *capacity))
        }
        BuiltinSpec::Swap { i, j, n, m } => {
            robots::make_swap(robots::RobotId::new(*i)?, robots::RobotId::new(*j)?, *n, *m)
        }
    }
}

fn build_explicit(spec: &ExplicitSpec) -> Result<TesTransitionSystem> {
    let mode = match spec.mode {
        Some(ModeSpec::Timed) => Mode::Timed,
        Some(ModeSpec::DelayInsensitive) | None => Mode::DelayInsensitive,
    };
    let interface: EventSet = spec
        .interface
        .iter()
        .map(|e| Event::parse(e))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();
    let initial = State::new(Atom::parse(&spec.initial)?);
    let mut transitions = Vec::new();
    for tr in &spec.transitions {
        let events = parse_observable(&tr.label.events)?;
        let label = match (&tr.label.time, mode) {
            (None, Mode::DelayInsensitive) => Label::untimed(events),
            (Some(t), Mode::Timed) => {
                let stamp = match t {
                    TimeSpec::Nat(n) => TimeStamp::from_nat(*n),
                    TimeSpec::Text(s) => TimeStamp::parse(s)?,
                };
                Label::timed(events, stamp)
            }
            _ => return Err(Error::ModeMismatch),
        };
        transitions.push((
            State::new(Atom::parse(&tr.from)?),
            label,
            State::new(Atom::parse(&tr.to)?),
        ));
    }
    TesTransitionSystem::explicit(
        spec.name.clone().unwrap_or_else(|| "component".into()),
        interface,
        initial,
        mode,
        transitions,
    )
}
