//! Command implementations behind the `tes` binary.
//!
//! Commands load a system specification (a JSON file, or `demo:<name>` for a
//! built-in system), run an analysis, and print a report. Exit codes are
//! stable: 0 success, 1 input error, 2 runtime deadlock, 3 resource limit.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use tes_core::demos;
use tes_core::robots::{p_battery_out, p_sorted};
use tes_core::spec_file::{LoadedSystem, SystemSpec};
use tes_core::{
    bounded_lang_equal, check_compatible, enabled_joint_transitions, is_deadlock_free,
    is_prefix_closed_syntactic, product, product_n, reach, run, runtime::render_trace,
    DeadlockVerdict, Error, Event, ExploreLimits, Label, SystemState, TesTransitionSystem,
    Trace,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_DEADLOCK: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "tes",
    about = "Compose, analyse, and execute transition systems over timed-event streams"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the composed system step by step with a seeded chooser and emit
    /// the observed trace.
    Simulate {
        /// Spec file path, or demo:<name>.
        spec: String,
        #[arg(long, default_value_t = 20)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long = "max-states", default_value_t = 1_000_000)]
        max_states: usize,
    },
    /// Breadth-first search for a reachable configuration satisfying a query.
    Reach {
        /// Spec file path, or demo:<name>.
        spec: String,
        #[command(subcommand)]
        query: Query,
    },
    /// Behavioral analyses: deadlock freedom, compatibility, prefix closure,
    /// and the bounded algebraic laws.
    Check {
        /// Spec file path, or demo:<name>.
        spec: String,
        #[command(subcommand)]
        analysis: Analysis,
    },
    /// List or export the built-in demo systems.
    Demo {
        #[command(subcommand)]
        action: DemoAction,
    },
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Jsonl,
}

#[derive(Debug, Subcommand)]
pub enum Query {
    /// Every robot on its target cell.
    Sorted(QueryArgs),
    /// Every battery empty.
    BatteryOut(QueryArgs),
    /// Some joint transition carrying the given event is enabled.
    Event {
        event: String,
        #[command(flatten)]
        args: QueryArgs,
    },
    /// Some component sits in the given state term.
    State {
        term: String,
        #[command(flatten)]
        args: QueryArgs,
    },
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long = "max-states", default_value_t = 1_000_000)]
    pub max_states: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Analysis {
    /// Search the composed system for a reachable dead configuration.
    Deadlock {
        #[arg(long = "max-states", default_value_t = 1_000_000)]
        max_states: usize,
    },
    /// Mutual compatibility of two components (1-based indices; `2x3`
    /// denotes the product of components 2 and 3).
    Compatibility {
        left: String,
        right: String,
        #[arg(long = "max-states", default_value_t = 1_000_000)]
        max_states: usize,
    },
    /// Silent self-loops at every reachable state of one component.
    PrefixClosed {
        index: usize,
        #[arg(long = "max-states", default_value_t = 1_000_000)]
        max_states: usize,
    },
    /// Bounded commutativity, associativity, and idempotence checks over the
    /// spec's components.
    Algebra {
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long = "max-states", default_value_t = 1_000_000)]
        max_states: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum DemoAction {
    /// Print the demo names.
    List,
    /// Write a demo's spec file as JSON.
    Write {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs a command, printing reports to standard output (or `--out` files),
/// and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(CliError { code, message }) => {
            eprintln!("error: {message}");
            code
        }
    }
}

struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> CliError {
        CliError { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        let code = match e {
            Error::ExplosionLimit { .. } | Error::DecompositionLimit { .. } => EXIT_LIMIT,
            Error::RuntimeDeadlock => EXIT_DEADLOCK,
            _ => EXIT_INPUT,
        };
        CliError { code, message: e.to_string() }
    }
}

fn load_spec(path: &str) -> Result<LoadedSystem, CliError> {
    let spec = if let Some(name) = path.strip_prefix("demo:") {
        demos::demo(name)
            .ok_or_else(|| CliError::input(format!("unknown demo {name:?}")))?
    } else {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {path}: {e}")))?;
        SystemSpec::parse(&text)?
    };
    Ok(spec.build()?)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate { spec, steps, seed, output, max_states } => {
            let loaded = load_spec(&spec)?;
            let s0 = SystemState::new(loaded.components)?;
            let limits = ExploreLimits::with_max_states(max_states);
            let outcome = run(s0, &loaded.base, steps, seed, &limits)?;
            let rendered = match output.format {
                Format::Text => render_trace(&outcome.trace, outcome.deadlocked),
                Format::Jsonl => render_jsonl(&outcome.trace, outcome.deadlocked),
            };
            emit(&output.out, &rendered)?;
            Ok(if outcome.deadlocked { EXIT_DEADLOCK } else { EXIT_OK })
        }
        Command::Reach { spec, query } => {
            let loaded = load_spec(&spec)?;
            let (args, predicate) = build_query(&loaded, query)?;
            let s0 = SystemState::new(loaded.components.clone())?;
            let outcome = reach(&s0, &loaded.base, predicate, args.max_states)?;
            let mut report = String::new();
            match &outcome.witness {
                Some(trace) => {
                    let _ = writeln!(report, "FOUND depth={}", trace.len());
                    report.push_str(&render_trace(trace, false));
                }
                None => {
                    let _ = writeln!(report, "EXHAUSTED states={}", outcome.visited);
                }
            }
            let _ = writeln!(report, "states={}", outcome.visited);
            emit(&args.out, &report)?;
            Ok(EXIT_OK)
        }
        Command::Check { spec, analysis } => {
            let loaded = load_spec(&spec)?;
            check(&loaded, analysis)
        }
        Command::Demo { action } => match action {
            DemoAction::List => {
                for name in demos::DEMO_NAMES {
                    println!("{name}");
                }
                Ok(EXIT_OK)
            }
            DemoAction::Write { name, out } => {
                let spec = demos::demo(&name)
                    .ok_or_else(|| CliError::input(format!("unknown demo {name:?}")))?;
                emit(&out, &format!("{}\n", spec.to_json()))?;
                Ok(EXIT_OK)
            }
        },
    }
}

fn render_jsonl(trace: &Trace, deadlocked: bool) -> String {
    let mut out = String::new();
    for obs in trace.items() {
        let events: Vec<String> = obs.observable.iter().map(|e| e.to_string()).collect();
        let line = serde_json::json!({
            "step": obs.time.to_string(),
            "events": events,
        });
        let _ = writeln!(out, "{line}");
    }
    if deadlocked {
        let _ = writeln!(out, "{}", serde_json::json!({"deadlock": true}));
    }
    out
}

type Predicate = Box<dyn Fn(&SystemState) -> bool>;

fn build_query(loaded: &LoadedSystem, query: Query) -> Result<(QueryArgs, Predicate), CliError> {
    match query {
        Query::Sorted(args) => {
            confirm_applicable(loaded, p_sorted)?;
            Ok((args, Box::new(|s| p_sorted(s).unwrap_or(false))))
        }
        Query::BatteryOut(args) => {
            confirm_applicable(loaded, p_battery_out)?;
            Ok((args, Box::new(|s| p_battery_out(s).unwrap_or(false))))
        }
        Query::Event { event, args } => {
            let event = Event::parse(&event)?;
            let base = loaded.base.clone();
            let limits = ExploreLimits::with_max_states(args.max_states);
            let predicate: Predicate = Box::new(move |s| {
                enabled_joint_transitions(s, &base, &limits)
                    .map(|joints| joints.iter().any(|j| j.label.contains(&event)))
                    .unwrap_or(false)
            });
            Ok((args, predicate))
        }
        Query::State { term, args } => {
            let state = tes_core::State::new(tes_core::Atom::parse(&term)?);
            let predicate: Predicate =
                Box::new(move |s| s.current_states().contains(&state));
            Ok((args, predicate))
        }
    }
}

/// Queries that need particular components must fail on specs lacking them.
fn confirm_applicable(
    loaded: &LoadedSystem,
    predicate: fn(&SystemState) -> tes_core::Result<bool>,
) -> Result<(), CliError> {
    let s0 = SystemState::new(loaded.components.clone())?;
    predicate(&s0)?;
    Ok(())
}

fn check(loaded: &LoadedSystem, analysis: Analysis) -> Result<i32, CliError> {
    match analysis {
        Analysis::Deadlock { max_states } => {
            let limits = ExploreLimits::with_max_states(max_states);
            let composed = product_n(&loaded.components, &loaded.base)?;
            match is_deadlock_free(&composed, &limits) {
                DeadlockVerdict::Free => {
                    println!("deadlock-free: yes");
                    Ok(EXIT_OK)
                }
                DeadlockVerdict::Deadlocking { witness, trace } => {
                    println!("deadlock-free: no");
                    println!("dead state: {witness}");
                    print!("{}", render_label_trace(&trace));
                    Ok(EXIT_OK)
                }
                DeadlockVerdict::Unknown { explored } => {
                    println!("deadlock-free: unknown (explored {explored} states)");
                    Ok(EXIT_LIMIT)
                }
            }
        }
        Analysis::Compatibility { left, right, max_states } => {
            let limits = ExploreLimits::with_max_states(max_states);
            let a = operand(loaded, &left)?;
            let b = operand(loaded, &right)?;
            let forward = check_compatible(&a, &b, &loaded.base, &limits)?;
            let backward = check_compatible(&b, &a, &loaded.base, &limits)?;
            let mutual = forward.compatible && backward.compatible;
            println!("compatible: {}", if mutual { "yes" } else { "no" });
            for (direction, verdict) in [
                (format!("{left} with {right}"), &forward),
                (format!("{right} with {left}"), &backward),
            ] {
                match (&verdict.relation, &verdict.counterexample) {
                    (Some(relation), _) => {
                        println!(
                            "  {direction}: compatible (relation size {})",
                            relation.len()
                        );
                    }
                    (_, Some((p, q, trace))) => {
                        println!("  {direction}: NOT compatible at pair ({p}, {q})");
                        print!("{}", render_label_trace(trace));
                    }
                    _ => unreachable!("verdict carries a relation or a counterexample"),
                }
            }
            Ok(EXIT_OK)
        }
        Analysis::PrefixClosed { index, max_states } => {
            let limits = ExploreLimits::with_max_states(max_states);
            let t = component(loaded, index)?;
            let closed = is_prefix_closed_syntactic(t, &limits)?;
            println!("prefix-closed: {}", if closed { "yes" } else { "no" });
            Ok(EXIT_OK)
        }
        Analysis::Algebra { depth, max_states } => {
            let limits = ExploreLimits::with_max_states(max_states);
            let systems = &loaded.components;
            let base = &loaded.base;
            let mut all_ok = true;
            for pair in systems.windows(2) {
                let ab = product(&pair[0], &pair[1], base)?;
                let ba = product(&pair[1], &pair[0], base)?;
                let ok = bounded_lang_equal(&ab, &ba, depth, &limits)?;
                all_ok &= ok;
                println!(
                    "commutative({},{})@depth{depth}: {}",
                    pair[0].name(),
                    pair[1].name(),
                    verdict(ok)
                );
            }
            if systems.len() >= 3 {
                let left =
                    product(&product(&systems[0], &systems[1], base)?, &systems[2], base)?;
                let right =
                    product(&systems[0], &product(&systems[1], &systems[2], base)?, base)?;
                let ok = bounded_lang_equal(&left, &right, depth, &limits)?;
                all_ok &= ok;
                println!(
                    "associative({},{},{})@depth{depth}: {}",
                    systems[0].name(),
                    systems[1].name(),
                    systems[2].name(),
                    verdict(ok)
                );
            }
            for t in systems {
                let tt = product(t, t, base)?;
                let ok = bounded_lang_equal(&tt, t, depth, &limits)?;
                all_ok &= ok;
                println!("idempotent({})@depth{depth}: {}", t.name(), verdict(ok));
            }
            println!("algebra: {}", verdict(all_ok));
            Ok(EXIT_OK)
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn render_label_trace(labels: &[Label]) -> String {
    let mut out = String::new();
    for (i, label) in labels.iter().enumerate() {
        let _ = writeln!(out, "{}\t{}", i + 1, label.events);
    }
    out
}

fn component(loaded: &LoadedSystem, index: usize) -> Result<&TesTransitionSystem, CliError> {
    if index == 0 || index > loaded.components.len() {
        return Err(CliError::input(format!(
            "component index {index} out of range 1..={}",
            loaded.components.len()
        )));
    }
    Ok(&loaded.components[index - 1])
}

/// A compatibility operand: a 1-based component index, or a product of
/// indices written `2x3`.
fn operand(loaded: &LoadedSystem, text: &str) -> Result<TesTransitionSystem, CliError> {
    let indices: Vec<usize> = text
        .split('x')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| CliError::input(format!("bad component operand {text:?}")))
        })
        .collect::<Result<_, _>>()?;
    if indices.is_empty() {
        return Err(CliError::input("empty component operand"));
    }
    let mut acc = component(loaded, indices[0])?.clone();
    for &i in &indices[1..] {
        acc = product(&acc, component(loaded, i)?, &loaded.base)?;
    }
    Ok(acc)
}
