use proptest::prelude::*;

use fedval_core::dataset::{split_and_partition, synthetic_corpus, PartitionConfig};
use fedval_core::federation::{
    aggregate_fedavg, aggregate_selected, removal_count, select_excluding_ranked, GradientBundle, Removal,
    SelectionVector,
};
use fedval_core::models::MlpPolicy;
use fedval_core::numkit::{dirichlet_sample, sigmoid, DenseMatrix, RngStream};
use fedval_core::rcce::{log_prob, RewardBaseline};

fn bundle_from(n: usize, dim: usize, data: Vec<f64>) -> GradientBundle {
    GradientBundle::new((0..n).collect(), DenseMatrix::from_vec(n, dim, data).unwrap(), vec![false; n]).unwrap()
}

fn bundle_strategy() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>)> {
    (1usize..12, 1usize..20).prop_flat_map(|(n, dim)| {
        (
            Just(n),
            Just(dim),
            prop::collection::vec(-1e3f64..1e3, n * dim),
            prop::collection::vec(-10f64..10.0, dim),
        )
    })
}

proptest! {
    #[test]
    fn full_selection_is_bitwise_fedavg((n, dim, data, theta) in bundle_strategy(), lr in 1e-4f64..1.0) {
        let b = bundle_from(n, dim, data);
        let a = aggregate_fedavg(&theta, &b, lr).unwrap();
        let s = aggregate_selected(&theta, &b, &SelectionVector::all(n), lr).unwrap();
        prop_assert!(a.iter().zip(s.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn empty_selection_leaves_model_unchanged((n, dim, data, theta) in bundle_strategy()) {
        let b = bundle_from(n, dim, data);
        let out = aggregate_selected(&theta, &b, &SelectionVector(vec![false; n]), 0.1).unwrap();
        prop_assert_eq!(out.to_vec(), theta);
    }

    #[test]
    fn selected_average_matches_subset_average(
        (n, dim, data, theta) in bundle_strategy(),
        mask_seed in any::<u64>(),
    ) {
        let mut rng = RngStream::new(mask_seed, 0);
        let mask: Vec<bool> = (0..n).map(|_| rng.next_f64() < 0.5).collect();
        prop_assume!(mask.iter().any(|&m| m));
        let b = bundle_from(n, dim, data.clone());
        let kept: Vec<f64> = (0..n).filter(|&i| mask[i]).flat_map(|i| data[i * dim..(i + 1) * dim].to_vec()).collect();
        let k = mask.iter().filter(|&&m| m).count();
        let sub = bundle_from(k, dim, kept);
        let a = aggregate_selected(&theta, &b, &SelectionVector(mask), 0.1).unwrap();
        let c = aggregate_fedavg(&theta, &sub, 0.1).unwrap();
        prop_assert_eq!(a.to_vec(), c.to_vec());
    }

    #[test]
    fn aggregation_ignores_client_order((n, dim, data, theta) in bundle_strategy(), perm_seed in any::<u64>()) {
        let mut order: Vec<usize> = (0..n).collect();
        RngStream::new(perm_seed, 0).shuffle(&mut order);
        let permuted: Vec<f64> = order.iter().flat_map(|&i| data[i * dim..(i + 1) * dim].to_vec()).collect();
        let a = aggregate_fedavg(&theta, &bundle_from(n, dim, data), 0.1).unwrap();
        let b = aggregate_fedavg(&theta, &bundle_from(n, dim, permuted), 0.1).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn dirichlet_is_a_distribution(seed in any::<u64>(), alpha in 0.05f64..20.0, n in 1usize..300) {
        let mut rng = RngStream::new(seed, 4);
        let v = dirichlet_sample(&mut rng, alpha, n).unwrap();
        prop_assert_eq!(v.len(), n);
        prop_assert!(v.iter().all(|&p| (0.0..=1.0).contains(&p)));
        prop_assert!((v.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn sigmoid_is_bounded_and_monotone(a in -800f64..800.0, b in -800f64..800.0) {
        let (sa, sb) = (sigmoid(a), sigmoid(b));
        prop_assert!((0.0..=1.0).contains(&sa));
        if a < b {
            prop_assert!(sa <= sb);
        }
        prop_assert!((sigmoid(-a) - (1.0 - sa)).abs() <= 1e-15);
    }

    #[test]
    fn policy_outputs_are_probabilities(seed in any::<u64>(), scale in 0.0f64..50.0) {
        let mut rng = RngStream::new(seed, 5);
        let mut policy = MlpPolicy::new(6, &[5, 4], &mut rng).unwrap();
        for p in policy.params_mut() {
            *p = rng.normal();
        }
        let input: Vec<f64> = (0..6).map(|_| scale * rng.normal()).collect();
        let w = policy.forward(&input).unwrap();
        prop_assert!((0.0..=1.0).contains(&w));
    }

    #[test]
    fn fresh_policy_is_indifferent(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 5);
        let policy = MlpPolicy::new(8, &[6, 6, 3], &mut rng).unwrap();
        let input: Vec<f64> = (0..8).map(|_| rng.normal() * 100.0).collect();
        prop_assert_eq!(policy.forward(&input).unwrap(), 0.5);
    }

    #[test]
    fn two_client_half_probabilities_give_quarter(a in any::<bool>(), b in any::<bool>()) {
        let lp = log_prob(&[0.5, 0.5], &SelectionVector(vec![a, b]));
        prop_assert!((lp.exp() - 0.25).abs() <= 1e-15);
    }

    #[test]
    fn baseline_stays_within_observed_range(window in 1u32..100, losses in prop::collection::vec(0f64..10.0, 1..60)) {
        let mut b = RewardBaseline::new(window).unwrap();
        let lo = losses.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = losses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for &l in &losses {
            b.update(l);
            prop_assert!(b.delta >= lo - 1e-12 && b.delta <= hi + 1e-12);
        }
    }

    #[test]
    fn constant_loss_is_a_fixed_point(window in 1u32..1000, loss in 0f64..100.0, steps in 1usize..50) {
        let mut b = RewardBaseline::new(window).unwrap();
        for _ in 0..steps {
            b.update(loss);
        }
        prop_assert_eq!(b.delta, loss);
    }

    #[test]
    fn ranked_removal_drops_the_extremes(values in prop::collection::vec(-5f64..5.0, 1..40), rate in 0f64..0.9) {
        let n = values.len();
        let count = removal_count(n, rate).min(n);
        for which in [Removal::Highest, Removal::Lowest] {
            let keep = select_excluding_ranked(&values, count, which);
            prop_assert_eq!(keep.count(), n - count);
            let dropped: Vec<f64> = (0..n).filter(|&i| !keep.bits()[i]).map(|i| values[i]).collect();
            let kept: Vec<f64> = (0..n).filter(|&i| keep.bits()[i]).map(|i| values[i]).collect();
            for d in &dropped {
                for k in &kept {
                    match which {
                        Removal::Highest => prop_assert!(d >= k),
                        Removal::Lowest => prop_assert!(d <= k),
                    }
                }
            }
        }
    }

    #[test]
    fn same_seed_same_stream(seed in any::<u64>(), stream in 0u64..16) {
        let mut a = RngStream::new(seed, stream);
        let mut b = RngStream::new(seed, stream);
        let mut c = RngStream::new(seed, stream + 1);
        let xa: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        prop_assert_eq!(&xa, &xb);
        prop_assert_ne!(&xa, &xc);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn partition_accounts_for_every_training_row(seed in any::<u64>(), n_clients in 1usize..30, alpha in 0.1f64..5.0) {
        let corpus = synthetic_corpus(7, 400, 60);
        let cfg = PartitionConfig { n_clients, alpha, validation_size: 50, ..PartitionConfig::default() };
        let data = split_and_partition(&corpus, &RngStream::new(seed, 0), &cfg).unwrap();
        prop_assert_eq!(data.shards.len(), n_clients);
        let mut rows: Vec<usize> = data.shards.iter().flat_map(|s| s.source_rows.clone()).collect();
        rows.extend(data.validation.source_rows.iter().copied());
        rows.sort_unstable();
        prop_assert_eq!(rows, (0..400).collect::<Vec<_>>());
        for (i, s) in data.shards.iter().enumerate() {
            prop_assert_eq!(s.client_id, i);
            prop_assert_eq!(s.x.rows(), s.y.len());
        }
    }
}
