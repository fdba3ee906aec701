use super::*;
use crate::hilbert::C64;
use crate::scenarios::{
    build_decoherence_demo, build_epr_bell, build_molecule_toy, build_wigners_friend,
};

const SAMPLE: &str = include_str!("../../examples/molecule_toy.scn");

/// Seventeen correct digits of 2^-1/2 rather than of the nearest double.
const SAMPLE_EXACT_DIGITS: &str = "SCENARIO molecule_toy
SYSTEM A dim=2
SYSTEM B dim=2
SYSTEM C dim=2
AGENT F observes A B C
AGENT W observes A B C
STATE A 0.70710678118654752|0> + 0.70710678118654752|1>
STATE B |0>
STATE C |0>
EVENT unitary CORRELATE A B
EVENT measure F basis=computational targets=A,B record=mF
EVENT measure W basis=bell targets=A,B record=mW
EVENT signal when mW==PhiPlus apply FLIP C
CHECK outcome C==1 agents=F,W tol=1e-9
";

fn errors(text: &str) -> Vec<ParseDiagnostic> {
    parse_scenario(text).unwrap_err()
}

#[test]
fn sample_is_the_builtin() {
    assert_eq!(parse_scenario(SAMPLE).unwrap(), build_molecule_toy());
    assert_eq!(
        parse_scenario(SAMPLE_EXACT_DIGITS).unwrap(),
        build_molecule_toy()
    );
}

#[test]
fn sample_is_canonical() {
    assert_eq!(serialize_scenario(&build_molecule_toy()).unwrap(), SAMPLE);
}

#[test]
fn builtins_round_trip() {
    for s in [
        build_molecule_toy(),
        build_wigners_friend(),
        build_epr_bell(0.3),
        build_epr_bell(-2.5),
        build_decoherence_demo(4).unwrap(),
    ] {
        let text = serialize_scenario(&s).unwrap();
        assert_eq!(parse_scenario(&text).unwrap(), s, "{text}");
        assert_eq!(serialize_scenario(&s).unwrap(), text);
    }
}

#[test]
fn minimal_file() {
    let s = parse_scenario("SCENARIO t\nSYSTEM Q dim=3\nSTATE Q |2>\n").unwrap();
    assert_eq!(s.register.len(), 1);
    assert!(s.events.is_empty() && s.agents.is_empty() && s.checks.is_empty());
}

#[test]
fn unknown_event_kind() {
    let d = errors("SCENARIO t\nSYSTEM Q dim=2\nSTATE Q |0>\nEVENT mesure F basis=bell\n");
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].span.line, 4);
    assert_eq!(d[0].span.column, 7);
    assert!(d[0].message.contains("unknown event kind"));
    assert!(d[0].hint.as_deref().unwrap().contains("measure"));
}

#[test]
fn empty_file_has_no_header() {
    let d = errors("");
    assert_eq!(d[0].message, "missing SCENARIO header");
    let d = errors("# only a comment\nSYSTEM A dim=2\n");
    assert_eq!(d[0].message, "missing SCENARIO header");
    assert_eq!(d[0].span.line, 2);
}

#[test]
fn every_bad_line_is_reported() {
    let text = "SCENARIO t\nSYSTEM A dim=x\nSYSTEM B dim=2\nSTATE B |0\nEVENT teleport B\nAGENT F sees B\nCHECK outcome B=1 agents=F\n";
    let d = errors(text);
    let lines: Vec<usize> = d.iter().map(|d| d.span.line).collect();
    assert_eq!(lines, vec![2, 4, 5, 6, 7]);
}

#[test]
fn validation_errors_point_at_their_line() {
    let text = "SCENARIO t\nSYSTEM A dim=2\nAGENT F observes A\nSTATE A |0>\nEVENT measure F basis=computational targets=A record=m\nEVENT signal when k==1 apply FLIP A\n";
    let d = errors(text);
    assert_eq!(d.len(), 1, "{d:?}");
    assert!(d.iter().all(|d| d.span.line == 6));
}

#[test]
fn amplitudes_and_options() {
    let text = "SCENARIO t
SYSTEM A dim=2
SYSTEM K dim=12
AGENT F observes A K
STATE A,K (0.6+0i)|0.11> - 0.8i|1.3>
POLICY collapse_at:F
EVENT unitary [0, 1; 1, 0] A
EVENT measure F record=r targets=A basis=spin(-1.5)
CHECK outcome A==up tol=1e-6 basis=spin(0.25) agents=F
CHECK witness agents=F targets=A basis=computational
";
    let s = parse_scenario(text).unwrap();
    assert_eq!(s.preparation[0].terms[0].1, vec![0, 11]);
    assert_eq!(s.preparation[0].terms[1].0, C64::new(0.0, -0.8));
    assert_eq!(s.checks[0].tol, 1e-6);
    let again = serialize_scenario(&s).unwrap();
    assert!(
        again.contains("STATE A,K 0.59999999999999998|0.11> + (-0-0.80000000000000004i)|1.3>"),
        "{again}"
    );
    assert_eq!(parse_scenario(&again).unwrap(), s);
}

#[test]
fn unnormalized_state_warns() {
    let out = parse_scenario_with_warnings("SCENARIO t\nSYSTEM A dim=2\nSTATE A |0> + |1>\n");
    assert!(out.scenario.is_some());
    assert_eq!(out.diagnostics.len(), 1);
    assert_eq!(out.diagnostics[0].severity, Severity::Warning);
}

#[test]
fn ket_digit_errors() {
    assert!(errors("SCENARIO t\nSYSTEM A dim=2\nSTATE A |2>\n")[0]
        .message
        .contains("exceeds"));
    assert!(errors("SCENARIO t\nSYSTEM A dim=2\nSTATE A |00>\n")[0]
        .message
        .contains("digit"));
}

#[test]
fn display_format() {
    let d = errors("SCENARIO t\nBOGUS\n");
    assert_eq!(
        d[0].to_string(),
        "2:1: error: unknown statement `BOGUS` (expected SCENARIO, SYSTEM, AGENT, STATE, POLICY, EVENT or CHECK)"
    );
}
