mod common;

use ethiplan::{compile_chain, parse_model, serialize_model, ParseError, SourceDocument};
use ethiplan_oracles::random_suggestion;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn serialize_then_parse_is_identity(seed in any::<u64>()) {
        let m = common::model(seed);
        let (d, p) = serialize_model(&m);
        prop_assert_eq!(parse_model(&d, &p).unwrap(), m);
    }

    #[test]
    fn hmodels_round_trip_with_provenance(seed in any::<u64>()) {
        let m = common::model(seed);
        let mut rng = common::rng(seed ^ 3);
        let s = random_suggestion(&mut rng, &m);
        let h = compile_chain(&m, &[s]).unwrap().hmodel;
        let (d, p) = serialize_model(&h);
        prop_assert_eq!(parse_model(&d, &p).unwrap(), h);
    }
}

#[test]
fn fixture_files_round_trip() {
    let m = ethiplan::fixtures::robot_and_frank();
    let (d, p) = serialize_model(&m);
    assert_eq!(parse_model(&d, &p).unwrap(), m);
}

#[test]
fn broken_domain_reports_position() {
    let d = SourceDocument::new("(define (domain x)\n  (:facts a b)\n  (:action go :add (a)", "broken.dom");
    let p = SourceDocument::new("(define (problem y) (:domain x) (:init ()) (:goal (a)))", "y.prob");
    let err = parse_model(&d, &p).unwrap_err();
    assert!(matches!(err, ParseError::Syntax { .. }));
    assert_eq!(err.position().line, 3);
}
