use branchlearn_core::policy::{
    entropy_grad, logprob_grad, policy_forward, DecisionRecord, FeatureVector, PolicyGradient, PolicyParams, FEATURE_DIM,
};
use branchlearn_core::train::{batch_loss_and_grad, Tuple};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn features(n: usize) -> impl Strategy<Value = Vec<FeatureVector>> {
    prop::collection::vec(prop::array::uniform12(-2.0f64..2.0), n)
}

fn params(hidden: usize) -> impl Strategy<Value = PolicyParams> {
    any::<u64>().prop_map(move |s| {
        let mut p = PolicyParams::random(hidden, &mut ChaCha8Rng::seed_from_u64(s));
        // push the weights away from the small-init regime
        for v in p.as_mut_slice() {
            *v *= 3.0;
        }
        p
    })
}

/// Central differences of `f` at `p`, step `h`.
fn fd_gradient(p: &PolicyParams, h: f64, f: impl Fn(&PolicyParams) -> f64) -> Vec<f64> {
    (0..p.as_slice().len())
        .map(|i| {
            let mut plus = p.clone();
            plus.as_mut_slice()[i] += h;
            let mut minus = p.clone();
            minus.as_mut_slice()[i] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

fn rel_err(analytic: &PolicyGradient, fd: &[f64]) -> f64 {
    let diff: f64 = analytic.as_slice().iter().zip(fd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let norm: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
    diff / norm.max(1e-8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn softmax_is_a_distribution(p in params(5), f in features(6)) {
        let fwd = policy_forward(&p, &f);
        let total: f64 = fwd.probs.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(fwd.probs.iter().all(|&q| (0.0..=1.0).contains(&q)));
        let h = fwd.entropy();
        prop_assert!(h >= -1e-12 && h <= (f.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn permutation_equivariance(p in params(4), f in features(5), rot in 1usize..5) {
        let fwd = policy_forward(&p, &f);
        let mut g = f.clone();
        g.rotate_left(rot);
        let fwd2 = policy_forward(&p, &g);
        for j in 0..f.len() {
            let k = (j + f.len() - rot) % f.len();
            prop_assert!((fwd.probs[j] - fwd2.probs[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn logprob_gradient_matches_fd(p in params(3), f in features(4), chosen in 0usize..4) {
        let (_, g) = logprob_grad(&p, &f, chosen);
        let fd = fd_gradient(&p, 1e-6, |q| policy_forward(q, &f).log_prob(chosen));
        prop_assert!(rel_err(&g, &fd) < 1e-4);
    }

    #[test]
    fn entropy_gradient_matches_fd(p in params(3), f in features(4)) {
        let (_, g) = entropy_grad(&p, &f);
        let fd = fd_gradient(&p, 1e-6, |q| policy_forward(q, &f).entropy());
        prop_assert!(rel_err(&g, &fd) < 1e-4);
    }

    #[test]
    fn batch_loss_gradient_matches_fd(
        p in params(3),
        batch in prop::collection::vec((features(3), 0usize..3, -40.0f64..0.0), 1..6),
        lambda in 0.0f64..0.5,
    ) {
        let tuples: Vec<Tuple> = batch
            .into_iter()
            .map(|(features, chosen, ret)| Tuple { decision: DecisionRecord { features, chosen }, ret })
            .collect();
        let (_, _, g) = batch_loss_and_grad(&p, &tuples, lambda);
        let fd = fd_gradient(&p, 1e-6, |q| batch_loss_and_grad(q, &tuples, lambda).0);
        prop_assert!(rel_err(&g, &fd) < 1e-4);
    }

    #[test]
    fn batch_gradient_is_sum_of_parts(
        p in params(2),
        batch in prop::collection::vec((features(2), 0usize..2, -10.0f64..0.0), 1..5),
        lambda in 0.0f64..0.5,
    ) {
        let n = batch.len() as f64;
        let mut expected = PolicyGradient::zeros(2);
        let tuples: Vec<Tuple> = batch
            .into_iter()
            .map(|(features, chosen, ret)| {
                let (_, lg) = logprob_grad(&p, &features, chosen);
                let (_, eg) = entropy_grad(&p, &features);
                expected.add_scaled(&lg, -ret / n);
                expected.add_scaled(&eg, -lambda / n);
                Tuple { decision: DecisionRecord { features, chosen }, ret }
            })
            .collect();
        let (_, _, g) = batch_loss_and_grad(&p, &tuples, lambda);
        for (a, b) in g.as_slice().iter().zip(expected.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}

#[test]
fn feature_dim_is_fixed() {
    assert_eq!(FEATURE_DIM, 12);
}
