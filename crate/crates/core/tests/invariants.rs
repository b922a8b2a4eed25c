use chrono::{DateTime, Utc};
use proptest::prelude::*;
use stressbench::crypto::{
    hash_dataset, hash_example, hash_score, sign_prediction, sign_stress_results,
    signature_records, verify_prediction, KeyPair, Salt,
};
use stressbench::evaluate::{is_multiple_of_step, permitted_fields};
use stressbench::{
    canonical_encode, evaluate_stress_test, filter_report, ladder_update, Direction, Error,
    Example, FeatureValue, Label, LadderState, MetricKind, MetricSpec, PredictionEntry,
    PredictionSet, PrivacyLevel, StressManifest, StressTest,
};

fn now() -> DateTime<Utc> {
    "2026-06-01T00:00:00Z".parse().unwrap()
}

fn example_strategy() -> impl Strategy<Value = Example> {
    (
        "[a-z0-9-]{1,12}",
        prop::collection::btree_map("[a-z_]{1,6}", -1e6f64..1e6, 0..5),
        prop::option::of(any::<bool>()),
        prop::option::of("[ab]"),
    )
        .prop_map(|(id, feats, label, group)| {
            let mut e = Example::new(id);
            for (k, v) in feats {
                e = e.with_feature(k, FeatureValue::Number(v));
            }
            if let Some(y) = label {
                e = e.with_label(Label::from_decision(y));
            }
            if let Some(g) = group {
                e = e.with_sensitive_attr(g);
            }
            e
        })
}

fn distinct_examples(max: usize) -> impl Strategy<Value = Vec<Example>> {
    prop::collection::vec(example_strategy(), 1..=max).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, mut e)| {
                e.id = format!("{}-{i}", e.id);
                e
            })
            .collect()
    })
}

fn labelled_test(n: usize, threshold: f64, seed_labels: &[bool]) -> StressTest {
    let examples = (0..n)
        .map(|i| {
            Example::new(format!("x{i}"))
                .with_label(Label::from_decision(seed_labels[i % seed_labels.len()]))
        })
        .collect();
    let m = StressManifest::new(
        "t",
        "c",
        MetricSpec::new(MetricKind::Accuracy, threshold).unwrap(),
        PrivacyLevel::Full,
    );
    StressTest::new(m, examples).unwrap()
}

fn preds_for(test: &StressTest, scores: &[f64]) -> PredictionSet {
    let entries = test
        .examples()
        .examples()
        .iter()
        .zip(scores.iter().cycle())
        .map(|(e, &s)| PredictionEntry::new(e.id.clone(), s))
        .collect();
    PredictionSet::new("m", test.id(), entries, now()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonical_bytes_ignore_insertion_order(e in example_strategy()) {
        let mut rebuilt = Example::new(e.id.clone());
        for (k, v) in e.features.iter().rev() {
            rebuilt = rebuilt.with_feature(k.clone(), v.clone());
        }
        rebuilt.label = e.label;
        rebuilt.sensitive_attr = e.sensitive_attr.clone();
        prop_assert_eq!(canonical_encode(&e).unwrap(), canonical_encode(&rebuilt).unwrap());
    }

    #[test]
    fn any_field_change_changes_bytes(e in example_strategy(), which in 0usize..4) {
        let mut changed = e.clone();
        match which {
            0 => changed.id.push('x'),
            1 => changed.label = Some(e.label.map_or(Label::Positive, Label::flipped)),
            2 => changed.sensitive_attr = Some(format!("{}z", e.sensitive_attr.clone().unwrap_or_default())),
            _ => changed = changed.with_feature("zz_new", FeatureValue::Number(1.0)),
        }
        prop_assert_ne!(canonical_encode(&e).unwrap(), canonical_encode(&changed).unwrap());
    }

    #[test]
    fn dataset_hash_permutation_and_salt(examples in distinct_examples(100), salt in any::<[u8; 16]>(), rot in any::<usize>()) {
        let salt = Salt(salt);
        let mut rotated = examples.clone();
        let k = rot % rotated.len();
        rotated.rotate_left(k);
        rotated.reverse();
        prop_assert_eq!(hash_dataset(&examples, &salt).unwrap(), hash_dataset(&rotated, &salt).unwrap());
        let mut other = salt;
        other.0[0] ^= 1;
        prop_assert_ne!(hash_dataset(&examples, &salt).unwrap(), hash_dataset(&examples, &other).unwrap());
    }

    #[test]
    fn signatures_bind_message_and_key(e in example_strategy(), score in 0.0f64..=1.0, seed in any::<[u8; 32]>(), bit in 0usize..512) {
        let keys = KeyPair::from_seed(seed);
        let (hx, hr) = (hash_example(&e).unwrap(), hash_score(score).unwrap());
        let sig = sign_prediction(&hx, &hr, &keys);
        prop_assert!(verify_prediction(&sig, &hx, &hr, &keys.public_key()));
        let (mut tx, mut tr) = (hx, hr);
        if bit < 256 { tx.0[bit / 8] ^= 1 << (bit % 8) } else { tr.0[(bit - 256) / 8] ^= 1 << (bit % 8) }
        prop_assert!(!verify_prediction(&sig, &tx, &tr, &keys.public_key()));
        let mut pk = keys.public_key();
        pk.0[bit % 256 / 8] ^= 1 << (bit % 8);
        prop_assert!(!verify_prediction(&sig, &hx, &hr, &pk));
    }

    #[test]
    fn ladder_releases_staircase(values in prop::collection::vec(0.0f64..=1.0, 1..60), step in prop::sample::select(vec![0.01, 0.05, 0.1, 0.25]), at_most in any::<bool>()) {
        let direction = if at_most { Direction::AtMost } else { Direction::AtLeast };
        let mut state = LadderState::new("t", "lineage", step, direction).unwrap();
        let mut prev: Option<f64> = None;
        for v in values {
            let (released, next) = ladder_update(&state, v, direction, now()).unwrap();
            prop_assert!(is_multiple_of_step(released, step), "{} not a multiple of {}", released, step);
            if let Some(p) = prev {
                match direction {
                    Direction::AtMost => prop_assert!(released <= p),
                    Direction::AtLeast => prop_assert!(released >= p),
                }
            }
            prev = Some(released);
            state = next;
        }
    }

    #[test]
    fn filtered_fields_are_a_subset_of_full(scores in prop::collection::vec(0.0f64..=1.0, 1..8), labels in prop::collection::vec(any::<bool>(), 1..8)) {
        let test = labelled_test(scores.len(), 0.5, &labels);
        let outcome = evaluate_stress_test(&test, &preds_for(&test, &scores), now()).unwrap();
        let full = filter_report(&outcome, PrivacyLevel::Full, None, now()).unwrap().0.field_names();
        for level in [PrivacyLevel::MetricOnly, PrivacyLevel::PassFail, PrivacyLevel::Ladder { step: 0.01 }] {
            let ladder = LadderState::new("t", "m", 0.01, Direction::AtLeast).unwrap();
            let report = filter_report(&outcome, level, Some(&ladder), now()).unwrap().0;
            prop_assert_eq!(report.field_names(), permitted_fields(level));
            let is_ladder = matches!(level, PrivacyLevel::Ladder { .. });
            prop_assert!(is_ladder || report.field_names().is_subset(&full));
        }
        prop_assert_eq!(full, permitted_fields(PrivacyLevel::Full));
    }

    #[test]
    fn coverage_is_exact(n in 1usize..10, drop_one in any::<bool>(), idx in any::<usize>()) {
        let test = labelled_test(n, 0.5, &[true, false]);
        let mut entries: Vec<PredictionEntry> = preds_for(&test, &[0.7]).entries().to_vec();
        if drop_one {
            entries.remove(idx % n);
        } else {
            entries.push(PredictionEntry::new("stranger", 0.5));
        }
        let preds = PredictionSet::new("m", "t", entries, now()).unwrap();
        let is_coverage_mismatch = matches!(evaluate_stress_test(&test, &preds, now()), Err(Error::CoverageMismatch { .. }));
        prop_assert!(is_coverage_mismatch);
    }

    #[test]
    fn evaluation_is_deterministic(scores in prop::collection::vec(0.0f64..=1.0, 1..8)) {
        let test = labelled_test(scores.len(), 0.5, &[true, false, false]);
        let preds = preds_for(&test, &scores);
        let a = serde_json::to_string(&evaluate_stress_test(&test, &preds, now()).unwrap()).unwrap();
        let b = serde_json::to_string(&evaluate_stress_test(&test, &preds, now()).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn signed_results_pinpoint_tampering(scores in prop::collection::vec(0.0f64..=1.0, 1..10), victim in any::<usize>(), seed in any::<[u8; 32]>()) {
        let test = labelled_test(scores.len(), 0.5, &[true]);
        let preds = preds_for(&test, &scores);
        let keys = KeyPair::from_seed(seed);
        let sigs = sign_stress_results(&test, &preds, &keys).unwrap();
        let v = victim % scores.len();
        let mut entries = preds.entries().to_vec();
        entries[v].score = if entries[v].score > 0.5 { entries[v].score / 2.0 } else { entries[v].score + 0.25 };
        let tampered = PredictionSet::new("m", "t", entries, now()).unwrap();
        let records = signature_records(&test, &tampered, &sigs).unwrap();
        let failing: Vec<usize> = records.iter().enumerate().filter(|(_, r)| !r.verify()).map(|(i, _)| i).collect();
        prop_assert_eq!(failing, vec![v]);
    }
}

#[test]
fn single_example_expired_and_wrong() {
    let test = labelled_test(1, 1.0, &[true]);
    let outcome = evaluate_stress_test(&test, &preds_for(&test, &[0.1]), now()).unwrap();
    assert_eq!(outcome.metric_value, 0.0);
    assert!(!outcome.passed);
    let expired = test.with_valid_until("2026-01-01T00:00:00Z".parse().unwrap());
    assert!(matches!(
        evaluate_stress_test(&expired, &preds_for(&expired, &[0.9]), now()),
        Err(Error::Expired { .. })
    ));
}
