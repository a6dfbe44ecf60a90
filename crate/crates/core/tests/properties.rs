mod common;

use mutval_core::baselines::{score_consensus_product, score_pass_count};
use mutval_core::metrics::{kendall_tau, ndcg, spearman};
use mutval_core::ranking::rank_candidates;
use mutval_core::scoring::{trajectory, ScoreState, ScoringConfig};
use mutval_core::{run_scoring, LinkMatrix};
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = LinkMatrix> {
    (1usize..=8, 1usize..=8).prop_flat_map(|(n, m)| {
        prop::collection::vec(any::<bool>(), n * m)
            .prop_map(move |links| LinkMatrix::new(n, m, links).unwrap())
    })
}

fn config() -> impl Strategy<Value = ScoringConfig> {
    (prop::sample::select(vec![0.1, 0.5, 0.85, 0.99]), 0u32..=10)
        .prop_map(|(d, t)| ScoringConfig::new(d, t).unwrap())
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn scores_stay_positive(m in matrix(), cfg in config()) {
        for s in trajectory(&m, &cfg).unwrap() {
            prop_assert!(s.code_scores.iter().chain(&s.test_scores).all(|&v| v > 0.0));
        }
    }

    #[test]
    fn superset_pass_set_dominates(m in matrix(), cfg in config()) {
        for s in trajectory(&m, &cfg).unwrap() {
            for a in 0..m.n_codes() {
                for b in 0..m.n_codes() {
                    let superset = (0..m.n_tests()).all(|j| !m.passes(b, j) || m.passes(a, j));
                    if superset {
                        prop_assert!(s.code_scores[a] >= s.code_scores[b]);
                    }
                }
            }
        }
    }

    #[test]
    fn weak_test_shifts_first_iteration_uniformly(m in matrix(), d in 0.05f64..0.95) {
        let cfg = ScoringConfig::new(d, 1).unwrap();
        let base = run_scoring(&m, &cfg).unwrap();
        let weak = run_scoring(&m.with_test(&vec![true; m.n_codes()]).unwrap(), &cfg).unwrap();
        let shift = weak.code_scores[0] - base.code_scores[0];
        for (a, b) in weak.code_scores.iter().zip(&base.code_scores) {
            prop_assert!((a - b - shift).abs() < 1e-9);
        }
    }

    #[test]
    fn code_permutation_is_equivariant(
        (m, perm) in matrix().prop_flat_map(|m| { let n = m.n_codes(); (Just(m), permutation(n)) }),
        cfg in config(),
    ) {
        let base = run_scoring(&m, &cfg).unwrap();
        let permuted = run_scoring(&m.permute_codes(&perm).unwrap(), &cfg).unwrap();
        for (k, &src) in perm.iter().enumerate() {
            let (x, y) = (permuted.code_scores[k], base.code_scores[src]);
            prop_assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
        }
        for (x, y) in permuted.test_scores.iter().zip(&base.test_scores) {
            prop_assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
        }
    }

    #[test]
    fn test_permutation_is_equivariant(
        (m, perm) in matrix().prop_flat_map(|m| { let n = m.n_tests(); (Just(m), permutation(n)) }),
        cfg in config(),
    ) {
        let base = run_scoring(&m, &cfg).unwrap();
        let pm = m.permute_tests(&perm).unwrap();
        let permuted = run_scoring(&pm, &cfg).unwrap();
        for (k, &src) in perm.iter().enumerate() {
            let (x, y) = (permuted.test_scores[k], base.test_scores[src]);
            prop_assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
        }
        prop_assert_eq!(score_pass_count(&pm), score_pass_count(&m));
        prop_assert_eq!(score_consensus_product(&pm), score_consensus_product(&m));
    }

    #[test]
    fn zero_iterations_is_all_ones(m in matrix(), d in 0.0f64..=1.0) {
        let s = run_scoring(&m, &ScoringConfig::new(d, 0).unwrap()).unwrap();
        prop_assert_eq!(s, ScoreState::initial(&m));
    }

    #[test]
    fn ranking_is_a_sorted_permutation(scores in prop::collection::vec(0.0f64..10.0, 1..20)) {
        let state = ScoreState { code_scores: scores.clone(), test_scores: vec![1.0], iteration: 0 };
        let r = rank_candidates(&state);
        let mut seen = r.order.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..scores.len()).collect::<Vec<_>>());
        prop_assert!(r.scores.windows(2).all(|w| w[0] >= w[1]));
        for w in r.order.windows(2) {
            if scores[w[0]] == scores[w[1]] {
                prop_assert!(w[0] < w[1]);
            }
        }
    }

    #[test]
    fn metrics_ignore_monotone_transforms(
        pairs in prop::collection::vec((0.0f64..5.0, 0.0f64..3.0), 2..12),
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let tx: Vec<f64> = x.iter().map(|v| (v * 3.0).exp() + 7.0).collect();
        match (spearman(&x, &y), spearman(&tx, &y)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-9),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
        if let (Ok(a), Ok(b)) = (kendall_tau(&x, &y), kendall_tau(&tx, &y)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        prop_assert!((ndcg(&x, &y).unwrap() - ndcg(&tx, &y).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn correlations_are_symmetric(
        pairs in prop::collection::vec((0u8..6, 0u8..6), 2..12),
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        if let (Ok(a), Ok(b)) = (spearman(&x, &y), spearman(&y, &x)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        if let (Ok(a), Ok(b)) = (kendall_tau(&x, &y), kendall_tau(&y, &x)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn ndcg_is_not_symmetric() {
    let x = [3.0, 1.0, 2.0];
    let y = [0.0, 2.0, 5.0];
    assert_ne!(ndcg(&x, &y).unwrap(), ndcg(&y, &x).unwrap());
}
