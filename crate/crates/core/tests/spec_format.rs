//! Loading systems from the JSON specification format.

use tes_core::demos;
use tes_core::spec_file::SystemSpec;
use tes_core::{reach, ComposabilityBase, Mode, SystemState};

#[test]
fn explicit_component_round_trips() {
    let text = r#"{
        "version": 1,
        "composability": {"kind": "shared-identity"},
        "components": [
            {
                "name": "writer",
                "interface": ["move(R1,N)", "pos(R1,2,0)"],
                "initial": "q0",
                "transitions": [
                    {"from": "q0", "label": {"events": ["move(R1,N)"]}, "to": "q1"},
                    {"from": "q1", "label": {"events": []}, "to": "q1"}
                ]
            }
        ]
    }"#;
    let spec = SystemSpec::parse(text).unwrap();
    let loaded = spec.build().unwrap();
    assert_eq!(loaded.components.len(), 1);
    let t = &loaded.components[0];
    assert_eq!(t.name(), "writer");
    assert_eq!(t.mode(), Mode::DelayInsensitive);
    assert_eq!(t.interface().len(), 2);
    assert_eq!(t.successors(t.initial()).len(), 1);
    assert!(matches!(loaded.base, ComposabilityBase::SharedIdentity));

    // Serialise back and re-load.
    let again = SystemSpec::parse(&spec.to_json()).unwrap().build().unwrap();
    assert_eq!(again.components[0].interface().len(), 2);
}

#[test]
fn timed_components_parse_rational_stamps() {
    let text = r#"{
        "version": 1,
        "composability": {"kind": "empty"},
        "components": [
            {
                "interface": ["a"],
                "initial": "q0",
                "mode": "timed",
                "transitions": [
                    {"from": "q0", "label": {"events": ["a"], "time": "3/2"}, "to": "q1"},
                    {"from": "q1", "label": {"events": ["a"], "time": 2}, "to": "q0"}
                ]
            }
        ]
    }"#;
    let loaded = SystemSpec::parse(text).unwrap().build().unwrap();
    assert_eq!(loaded.components[0].mode(), Mode::Timed);
}

#[test]
fn version_and_syntax_errors_are_reported() {
    assert!(SystemSpec::parse("{").is_err());
    let wrong_version = r#"{"version": 99, "composability": {"kind": "empty"}, "components": []}"#;
    let err = SystemSpec::parse(wrong_version).unwrap_err();
    assert!(err.to_string().contains("version"));
}

#[test]
fn mode_and_time_must_agree() {
    let text = r#"{
        "version": 1,
        "composability": {"kind": "empty"},
        "components": [
            {
                "interface": ["a"],
                "initial": "q0",
                "transitions": [
                    {"from": "q0", "label": {"events": ["a"], "time": 1}, "to": "q1"}
                ]
            }
        ]
    }"#;
    assert!(SystemSpec::parse(text).unwrap().build().is_err());
}

#[test]
fn rule_bases_parse_patterns() {
    let text = r#"{
        "version": 1,
        "composability": {"kind": "rules", "rules": [
            {"trigger": "start(S(i,j))",
             "requires-any": ["locked(S(k,i)) where k<i", "locked(S(j,k)) where j<k"]}
        ]},
        "components": []
    }"#;
    let loaded = SystemSpec::parse(text).unwrap().build().unwrap();
    assert!(matches!(loaded.base, ComposabilityBase::Ruleset(rules) if rules.len() == 1));
}

#[test]
fn every_demo_builds_and_starts() {
    for name in demos::DEMO_NAMES {
        let spec = demos::demo(name).unwrap();
        let loaded = spec.build().unwrap_or_else(|e| panic!("demo {name}: {e}"));
        assert!(!loaded.components.is_empty());
        // The spec serialises and reloads identically.
        let reloaded = SystemSpec::parse(&spec.to_json()).unwrap().build().unwrap();
        assert_eq!(reloaded.components.len(), loaded.components.len());
        let s0 = SystemState::new(loaded.components).unwrap();
        // Smoke: the initial state is explorable.
        let out = reach(&s0, &loaded.base, |_| true, 10).unwrap();
        assert!(out.witness.is_some());
    }
}

#[test]
fn unknown_demo_is_none() {
    assert!(demos::demo("no-such-demo").is_none());
}

/// Pattern rules from a spec file drive a full product: the guarded event
/// only fires together with a matching lock, both loaded from JSON.
#[test]
fn pattern_rules_constrain_loaded_products() {
    let text = r#"{
        "version": 1,
        "composability": {"kind": "rules", "rules": [
            {"trigger": "start(S(i,j))",
             "requires-any": ["locked(S(k,i)) where k<i", "locked(S(j,k)) where j<k"]}
        ]},
        "components": [
            {
                "name": "starter",
                "interface": ["start(S(1,2))", "tick"],
                "initial": "s0",
                "transitions": [
                    {"from": "s0", "label": {"events": ["start(S(1,2))"]}, "to": "s1"},
                    {"from": "s0", "label": {"events": ["tick"]}, "to": "s0"}
                ]
            },
            {
                "name": "locker",
                "interface": ["locked(S(2,3))", "idle"],
                "initial": "l0",
                "transitions": [
                    {"from": "l0", "label": {"events": ["locked(S(2,3))"]}, "to": "l1"},
                    {"from": "l0", "label": {"events": ["idle"]}, "to": "l0"},
                    {"from": "l1", "label": {"events": ["idle"]}, "to": "l1"}
                ]
            }
        ]
    }"#;
    let loaded = SystemSpec::parse(text).unwrap().build().unwrap();
    let p = tes_core::product(&loaded.components[0], &loaded.components[1], &loaded.base)
        .unwrap();
    let start = tes_core::Event::parse("start(S(1,2))").unwrap();
    let locked = tes_core::Event::parse("locked(S(2,3))").unwrap();
    for tr in p.successors(p.initial()).iter() {
        if tr.label.events.contains(&start) {
            assert!(
                tr.label.events.contains(&locked),
                "a start fired without its lock: {}",
                tr.label.events
            );
        }
    }
    // The joint start+lock step exists.
    assert!(p
        .successors(p.initial())
        .iter()
        .any(|tr| tr.label.events.contains(&start) && tr.label.events.contains(&locked)));
    // Unrelated events interleave freely.
    let tick = tes_core::Event::atom("tick");
    assert!(p
        .successors(p.initial())
        .iter()
        .any(|tr| tr.label.events == tes_core::Observable::singleton(tick.clone())));
}
