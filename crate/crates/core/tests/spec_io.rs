mod common;

use std::path::Path;

use common::random_spec;
use m4_indices::model::{build_example_4_1, build_example_4_2, M4Spec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn data(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

#[test]
fn bundled_specs_are_the_presets() {
    let a = M4Spec::load(&data("example4_1.json")).unwrap();
    let b = M4Spec::load(&data("example4_2.json")).unwrap();
    assert_eq!(a, build_example_4_1());
    assert_eq!(b, build_example_4_2());
    assert_eq!(a.fingerprint(), build_example_4_1().fingerprint());
    assert!(a.is_exact() && b.is_exact());
}

#[test]
fn float_weights_survive_a_round_trip() {
    let text = r#"{"L": 1, "m_min": 0, "m_max": 1,
        "domain": {"x_min": 0, "x_max": 2, "y_min": 0, "y_max": 0},
        "sites": [
            {"x": 0, "y": 0, "patterns": [[0.3, 0.7]]},
            {"x": 1, "y": 0, "patterns": [["1/2", "1/2"]]},
            {"x": 2, "y": 0, "patterns": [[0.1, 0.9]]}
        ]}"#;
    let spec = M4Spec::from_json(text).unwrap();
    assert!(!spec.is_exact());
    let again = M4Spec::from_json(&spec.to_json()).unwrap();
    assert_eq!(again, spec);
    assert_eq!(again.to_json(), spec.to_json());
}

#[test]
fn malformed_specs_are_rejected() {
    for bad in [
        r#"{"L": 1, "m_min": 0, "m_max": 0, "domain": {"x_min": 0, "x_max": 0, "y_min": 0, "y_max": 0}}"#,
        r#"{"L": 1, "m_min": 0, "m_max": 0, "domain": {"x_min": 0, "x_max": 0, "y_min": 0, "y_max": 0},
            "rules": [{"predicate": "abscissa_even", "patterns": [["1"]]}]}"#,
        r#"{"L": 1, "m_min": 0, "m_max": 0, "domain": {"x_min": 0, "x_max": 0, "y_min": 0, "y_max": 0},
            "rules": [{"predicate": "always", "patterns": [["1", "0"]]}]}"#,
        r#"{"L": 1, "m_min": 0, "m_max": 0, "domain": {"x_min": 0, "x_max": 0, "y_min": 0, "y_max": 0},
            "rules": [{"predicate": "always", "patterns": [["one"]]}]}"#,
        r#"{"L": 1, "m_min": 0, "m_max": 0, "extra": 1, "domain": {"x_min": 0, "x_max": 0, "y_min": 0, "y_max": 0},
            "rules": [{"predicate": "always", "patterns": [["1"]]}]}"#,
    ] {
        assert!(M4Spec::from_json(bad).is_err(), "{bad}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_is_idempotent(seed in any::<u64>()) {
        let spec = random_spec(&mut ChaCha8Rng::seed_from_u64(seed));
        let once = M4Spec::from_json(&spec.to_json()).unwrap();
        let twice = M4Spec::from_json(&once.to_json()).unwrap();
        prop_assert_eq!(&once, &spec);
        prop_assert_eq!(&twice, &once);
        prop_assert_eq!(once.fingerprint(), spec.fingerprint());
    }
}
