//! Binary-level tests: exit codes, report formats, and input handling.

use std::path::PathBuf;
use std::process::{Command, Output};

fn tes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tes"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("tes-cli-test-{}-{name}", std::process::id()))
}

#[test]
fn demo_list_names_every_demo() {
    let out = tes(&["demo", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in ["example2", "example5", "fig2", "troll3", "troll3-full"] {
        assert!(text.contains(name), "missing {name} in {text}");
    }
}

#[test]
fn demo_write_emits_loadable_spec() {
    let path = tmp("spec.json");
    let out = tes(&["demo", "write", "troll3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    // The written file loads like any other spec.
    let reach = tes(&["reach", path.to_str().unwrap(), "sorted"]);
    assert_eq!(reach.status.code(), Some(0));
    assert!(stdout(&reach).starts_with("FOUND depth="));
    std::fs::remove_file(path).ok();
}

#[test]
fn simulate_writes_trace_lines_and_exits_zero() {
    let out = tes(&["simulate", "demo:troll3", "--steps", "5", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    for (i, line) in lines.iter().enumerate() {
        let (step, events) = line.split_once('\t').expect("step TAB events");
        assert_eq!(step.parse::<usize>().unwrap(), i + 1);
        assert!(events.starts_with('{') && events.ends_with('}'));
    }
}

#[test]
fn simulate_zero_steps_is_empty() {
    let out = tes(&["simulate", "demo:troll3", "--steps", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "");
}

#[test]
fn simulate_deadlocked_system_exits_two_with_marker() {
    let out = tes(&["simulate", "demo:example5", "--steps", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout(&out), "DEADLOCK\n");
}

#[test]
fn simulate_same_seed_reproduces_trace() {
    let a = tes(&["simulate", "demo:troll3-protocols", "--steps", "15", "--seed", "3"]);
    let b = tes(&["simulate", "demo:troll3-protocols", "--steps", "15", "--seed", "3"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn simulate_jsonl_format() {
    let out = tes(&[
        "simulate",
        "demo:troll3",
        "--steps",
        "3",
        "--seed",
        "1",
        "--format",
        "jsonl",
    ]);
    assert_eq!(out.status.code(), Some(0));
    for line in stdout(&out).lines() {
        let value: serde_json::Value = serde_json::from_str(line).expect("valid JSON line");
        assert!(value.get("step").is_some());
        assert!(value.get("events").is_some());
    }
}

#[test]
fn malformed_spec_exits_one_with_diagnostics() {
    let path = tmp("broken.json");
    std::fs::write(&path, "{\"version\": 1,").unwrap();
    let out = tes(&["simulate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    std::fs::remove_file(path).ok();

    let missing = tes(&["simulate", "/no/such/file.json"]);
    assert_eq!(missing.status.code(), Some(1));

    let unknown_demo = tes(&["reach", "demo:nonsense", "sorted"]);
    assert_eq!(unknown_demo.status.code(), Some(1));
}

#[test]
fn reach_reports_found_with_witness_and_count() {
    let out = tes(&["reach", "demo:troll3", "sorted"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("FOUND depth="));
    assert!(text.lines().last().unwrap().starts_with("states="));
}

#[test]
fn reach_reports_exhausted_when_unreachable() {
    let out = tes(&["reach", "demo:troll3-full", "battery-out"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("EXHAUSTED states="));
}

#[test]
fn reach_rejects_inapplicable_queries() {
    // No batteries in the plain troll system.
    let out = tes(&["reach", "demo:troll3", "battery-out"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reach_event_query_finds_protocol_start() {
    let out = tes(&["reach", "demo:troll3-protocols", "event", "start(S(1,2))"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("FOUND"));
}

#[test]
fn check_compatibility_operands_support_products() {
    let pairwise = tes(&["check", "demo:example5", "compatibility", "1", "2"]);
    assert_eq!(pairwise.status.code(), Some(0));
    assert!(stdout(&pairwise).starts_with("compatible: yes"));

    let grouped = tes(&["check", "demo:example5", "compatibility", "1", "2x3"]);
    assert_eq!(grouped.status.code(), Some(0));
    assert!(stdout(&grouped).starts_with("compatible: no"));

    let bad_index = tes(&["check", "demo:example5", "compatibility", "1", "9"]);
    assert_eq!(bad_index.status.code(), Some(1));
}

#[test]
fn check_prefix_closed_verdicts() {
    // Component 2 of troll3 is a free robot: closed. The fig2 strategy
    // robots are not.
    let robot = tes(&["check", "demo:troll3", "prefix-closed", "2"]);
    assert!(stdout(&robot).contains("prefix-closed: yes"));
    let strategy = tes(&["check", "demo:fig2", "prefix-closed", "2"]);
    assert!(stdout(&strategy).contains("prefix-closed: no"));
}

#[test]
fn check_deadlock_reports_witness_for_strategies() {
    let out = tes(&["check", "demo:fig2", "deadlock"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("deadlock-free: no"));
    assert!(text.contains("dead state:"));
}

#[test]
fn check_deadlock_limit_exits_three() {
    let out = tes(&["check", "demo:fig2", "deadlock", "--max-states", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("unknown"));
}

#[test]
fn check_algebra_runs_bounded_laws() {
    let out = tes(&["check", "demo:example5", "algebra", "--depth", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("commutative(T1,T2)@depth3: ok"));
    assert!(text.contains("associative(T1,T2,T3)@depth3: ok"));
    assert!(text.contains("idempotent(T1)@depth3: ok"));
    assert!(text.lines().last().unwrap().starts_with("algebra:"));
}

#[test]
fn trace_file_round_trips_through_out_flag() {
    let path = tmp("trace.txt");
    let out = tes(&[
        "simulate",
        "demo:troll3",
        "--steps",
        "4",
        "--seed",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
    std::fs::remove_file(path).ok();
}

/// Emitted traces re-validate and replay step for step in the eager product.
#[test]
fn emitted_traces_replay_in_the_eager_product() {
    use tes_core::{demos, product_n, validate_trace, Event, Observable, Observation};

    let out = tes(&["simulate", "demo:troll3-protocols", "--steps", "12", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));

    // Parse the line format back into observations.
    let mut observations = Vec::new();
    for line in stdout(&out).lines() {
        let (step, events) = line.split_once('\t').unwrap();
        let inner = events.strip_prefix('{').unwrap().strip_suffix('}').unwrap();
        let observable: Observable = if inner.is_empty() {
            Observable::empty()
        } else {
            split_events(inner)
                .into_iter()
                .map(|e| Event::parse(&e).unwrap())
                .collect()
        };
        observations.push(Observation::at_nat(observable, step.parse().unwrap()));
    }
    let trace = validate_trace(observations).expect("emitted trace validates");
    assert_eq!(trace.len(), 12);

    let loaded = demos::demo("troll3-protocols").unwrap().build().unwrap();
    let eager = product_n(&loaded.components, &loaded.base).unwrap();
    let mut state = eager.initial().clone();
    for obs in trace.items() {
        let successors = eager.successors(&state);
        let step = successors
            .iter()
            .find(|tr| tr.label.events == obs.observable)
            .unwrap_or_else(|| panic!("observation {} does not replay", obs.observable));
        state = step.target.clone();
    }
}

/// Splits `a,b(c,d),e` at top-level commas only.
fn split_events(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for c in text.chars() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth -= 1;
                current.push(c);
            }
            ',' if depth == 0 => out.push(std::mem::take(&mut current)),
            _ => current.push(c),
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}
