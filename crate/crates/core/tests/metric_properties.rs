mod common;

use common::{naive, Case};
use proptest::prelude::*;
use stressbench::metrics::{accuracy, independence_gap, separation_gap, sufficiency_gap};

fn case_strategy(max_n: usize) -> impl Strategy<Value = Case> {
    (
        2usize..=5,
        prop::sample::select(vec![0.0, 0.25, 0.5, 0.7, 1.0]),
        1usize..=2,
    )
        .prop_flat_map(move |(bins, threshold, support)| {
            let score = prop_oneof![
                (0..=bins).prop_map(move |k| k as f64 / bins as f64),
                Just(threshold),
                0.0f64..=1.0,
            ];
            prop::collection::vec((score, any::<bool>(), 0usize..3), 1..=max_n).prop_map(
                move |rows| Case {
                    scores: rows.iter().map(|r| r.0).collect(),
                    labels: rows.iter().map(|r| if r.1 { 1 } else { -1 }).collect(),
                    groups: rows
                        .iter()
                        .map(|r| ["a", "b", "c"][r.2].to_owned())
                        .collect(),
                    threshold,
                    bins,
                    support,
                },
            )
        })
}

fn all_metrics(c: &Case) -> [Option<f64>; 4] {
    let s = c.sample();
    [
        accuracy(&s, c.threshold).ok(),
        independence_gap(&s, c.threshold).ok(),
        separation_gap(&s, c.threshold).ok(),
        sufficiency_gap(&s, c.bins, c.support).ok(),
    ]
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() <= 1e-12,
        (None, None) => true,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn metrics_match_naive_enumeration(c in case_strategy(8)) {
        let got = all_metrics(&c);
        let want = [Some(naive::accuracy(&c)), naive::independence(&c), naive::separation(&c), naive::sufficiency(&c)];
        for (g, w) in got.iter().zip(want) {
            prop_assert!(close(*g, w), "library {:?} vs naive {:?} on {:?}", got, w, c);
        }
    }

    #[test]
    fn metrics_lie_in_unit_interval(c in case_strategy(30)) {
        for v in all_metrics(&c).into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn metrics_ignore_entry_order(c in case_strategy(20), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut order: Vec<usize> = (0..c.scores.len()).collect();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let shuffled = Case {
            scores: order.iter().map(|&i| c.scores[i]).collect(),
            labels: order.iter().map(|&i| c.labels[i]).collect(),
            groups: order.iter().map(|&i| c.groups[i].clone()).collect(),
            ..c.clone()
        };
        prop_assert_eq!(all_metrics(&c), all_metrics(&shuffled));
    }

    #[test]
    fn gap_metrics_ignore_group_names(c in case_strategy(20)) {
        let renamed = Case {
            groups: c.groups.iter().map(|g| match g.as_str() { "a" => "zz", "b" => "a", _ => "m" }.to_owned()).collect(),
            ..c.clone()
        };
        prop_assert_eq!(&all_metrics(&c)[1..], &all_metrics(&renamed)[1..]);
    }

    #[test]
    fn mirrored_sample_keeps_accuracy(c in case_strategy(20)) {
        let c = Case { threshold: 0.5, ..c };
        // mirror: label flipped and decision flipped (score 1 - s, nudged off the tie)
        let mirror_score = |s: f64| if s == 0.5 { 0.25 } else { 1.0 - s };
        let mut both = c.clone();
        both.scores.extend(c.scores.iter().map(|&s| mirror_score(s)));
        both.labels.extend(c.labels.iter().map(|&y| -y));
        both.groups.extend(c.groups.iter().cloned());
        let a = accuracy(&c.sample(), 0.5).unwrap();
        let b = accuracy(&both.sample(), 0.5).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn independence_zero_iff_equal_rates(c in case_strategy(12)) {
        if let Some(gap) = naive::independence(&c) {
            let lib = independence_gap(&c.sample(), c.threshold).unwrap();
            let mut rates: Vec<f64> = ["a", "b", "c"].iter().filter_map(|g| {
                let idx: Vec<usize> = (0..c.scores.len()).filter(|&i| c.groups[i] == *g).collect();
                (!idx.is_empty()).then(|| idx.iter().filter(|&&i| c.scores[i] >= c.threshold).count() as f64 / idx.len() as f64)
            }).collect();
            rates.dedup();
            prop_assert_eq!(lib == 0.0, rates.len() == 1);
            prop_assert_eq!(lib, gap);
        }
    }
}
