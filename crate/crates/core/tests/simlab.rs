mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stressbench::simlab::{
    gen_two_county, run_two_county_experiment, train_linear_scorer, TwoCountyConfig,
};
use stressbench::Example;

fn column(examples: &[Example], name: &str) -> Vec<f64> {
    examples
        .iter()
        .map(|e| e.features[name].as_number().unwrap())
        .collect()
}

fn labels(examples: &[Example]) -> Vec<f64> {
    examples.iter().map(|e| e.label.unwrap().as_f64()).collect()
}

#[test]
fn generated_correlations_match_config() {
    for (rho, seed) in [(0.9, 1), (0.5, 2), (0.0, 3)] {
        let cfg = TwoCountyConfig {
            rho,
            seed,
            ..Default::default()
        };
        let tc = gen_two_county(&cfg).unwrap();
        let train = tc.train.examples();
        assert!((common::pearson(&column(train, "x2"), &labels(train)) - rho).abs() < 0.1);
        assert!((common::pearson(&column(train, "x1"), &labels(train)) - 0.6).abs() < 0.1);
        let out = tc.stress_out.examples().examples();
        assert!((common::pearson(&column(out, "x2"), &labels(out)) + rho).abs() < 0.1);
    }
}

#[test]
fn training_loss_never_increases() {
    let tc = gen_two_county(&TwoCountyConfig {
        n_per_domain: 500,
        seed: 4,
        ..Default::default()
    })
    .unwrap();
    let scorer = train_linear_scorer(&tc.train, 0.5, 300).unwrap();
    assert_eq!(scorer.trace.len(), 301);
    for w in scorer.trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{} then {}", w[0], w[1]);
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        assert!(common::gradient_relative_error(&mut rng) < 1e-5);
    }
}

#[test]
fn proxy_reversal_breaks_out_of_domain() {
    let flipped = run_two_county_experiment(&TwoCountyConfig::default()).unwrap();
    assert!(flipped.pass_in && !flipped.pass_out, "{flipped:?}");
    assert!(flipped.acc_in - flipped.acc_out >= 0.15);

    let control = run_two_county_experiment(&TwoCountyConfig {
        flip: false,
        ..Default::default()
    })
    .unwrap();
    assert!(
        (control.acc_in - control.acc_out).abs() <= 0.05,
        "{control:?}"
    );
}

#[test]
fn report_serialises_with_rng_description() {
    let report = run_two_county_experiment(&TwoCountyConfig {
        n_per_domain: 100,
        ..Default::default()
    })
    .unwrap();
    let json = serde_json::to_value(&report).unwrap();
    assert!(json["rng_algorithm"].as_str().unwrap().contains("ChaCha8"));
    assert_eq!(json["config"]["n_per_domain"], 100);
}
