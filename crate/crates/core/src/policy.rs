//! Stochastic branching policy `π_θ(a|s)`.
//!
//! Each candidate variable is described by a fixed vector of twelve
//! hand-crafted features. A one-hidden-layer tanh network maps every
//! feature vector to a logit, and a softmax over the node's candidates
//! gives the action distribution. Gradients of `log π` and of the policy
//! entropy are computed analytically.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bnb::{BranchContext, Side};
use crate::milp::MilpInstance;

pub const FEATURE_DIM: usize = 12;
pub const DEFAULT_HIDDEN: usize = 32;
/// Lower clamp applied to probabilities inside logarithms.
pub const PROB_FLOOR: f64 = 1e-12;

pub type FeatureVector = [f64; FEATURE_DIM];

/// Snapshot of one learned branching decision, kept for training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub features: Vec<FeatureVector>,
    pub chosen: usize,
}

/// Per-instance constants the features are normalised by.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceStats {
    pub n_vars: usize,
    pub n_rows: usize,
    pub max_abs_obj: f64,
    pub max_abs_coef: f64,
    pub col_count: Vec<usize>,
    pub col_mean_abs: Vec<f64>,
    pub root_width: Vec<f64>,
}

impl InstanceStats {
    pub fn new(inst: &MilpInstance) -> Self {
        let col_count = inst.rows.col_counts();
        let col_mean_abs = inst
            .rows
            .col_abs_sums()
            .iter()
            .zip(&col_count)
            .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
            .collect();
        InstanceStats {
            n_vars: inst.n_vars(),
            n_rows: inst.n_rows(),
            max_abs_obj: inst.obj.iter().fold(0.0, |m, c| f64::max(m, libm::fabs(*c))),
            max_abs_coef: inst.rows.max_abs(),
            col_count,
            col_mean_abs,
            root_width: inst.upper.iter().zip(&inst.lower).map(|(u, l)| u - l).collect(),
        }
    }
}

/// One feature vector per candidate, in candidate order:
///
/// | # | feature |
/// |---|---------|
/// | 0 | fractional part `f` of the LP value |
/// | 1 | `2·min(f, 1−f)` |
/// | 2 | `c_j / (1 + max|c|)` |
/// | 3 | `(x_j − l_j) / (1 + u_j − l_j)` on the local domain |
/// | 4 | local domain width / (1 + root width) |
/// | 5 | `depth / (1 + n_vars)` |
/// | 6 | column nonzeros / rows |
/// | 7 | mean column `|a_ij|` / max `|a_ij|` |
/// | 8 | up pseudocost estimate / max over candidates |
/// | 9 | down pseudocost estimate / max over candidates |
/// | 10 | times branched on along the path / (1 + depth) |
/// | 11 | 1 if a finite GUB exists |
pub fn featurize(ctx: &BranchContext<'_>) -> Vec<FeatureVector> {
    let stats = ctx.stats;
    let depth = ctx.node.depth as f64;
    let pc_up: Vec<f64> = ctx
        .candidates
        .iter()
        .map(|c| ctx.pseudocosts.estimate(c.var, Side::Up) * (1.0 - c.frac()))
        .collect();
    let pc_down: Vec<f64> = ctx
        .candidates
        .iter()
        .map(|c| ctx.pseudocosts.estimate(c.var, Side::Down) * c.frac())
        .collect();
    let max_up = pc_up.iter().copied().fold(0.0, f64::max);
    let max_down = pc_down.iter().copied().fold(0.0, f64::max);
    let normalise = |v: f64, max: f64| if max > 0.0 { v / max } else { 0.0 };

    ctx.candidates
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let j = c.var;
            let f = c.frac();
            let (l, u) = (ctx.lower[j], ctx.upper[j]);
            let position = if l.is_finite() && u.is_finite() {
                (c.value - l) / (1.0 + u - l)
            } else {
                0.5
            };
            let width = u - l;
            let width_ratio = if width.is_finite() {
                width / (1.0 + stats.root_width[j])
            } else {
                1.0
            };
            [
                f,
                2.0 * f.min(1.0 - f),
                ctx.instance.obj[j] / (1.0 + stats.max_abs_obj),
                position,
                width_ratio,
                (depth / (1.0 + stats.n_vars as f64)).min(1.0),
                if stats.n_rows > 0 {
                    stats.col_count[j] as f64 / stats.n_rows as f64
                } else {
                    0.0
                },
                normalise(stats.col_mean_abs[j], stats.max_abs_coef),
                normalise(pc_up[k], max_up),
                normalise(pc_down[k], max_down),
                ctx.node.times_branched_on(j) as f64 / (1.0 + depth),
                if ctx.gub.is_finite() { 1.0 } else { 0.0 },
            ]
        })
        .collect()
}

/// Network weights, stored flat as `[W1 (F×H) | b1 (H) | w2 (H) | b2]`
/// with `W1[f][h]` at `f·H + h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    hidden: usize,
    theta: Vec<f64>,
}

/// Same shape and layout as [`PolicyParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyGradient {
    hidden: usize,
    values: Vec<f64>,
}

pub fn param_count(hidden: usize) -> usize {
    FEATURE_DIM * hidden + 2 * hidden + 1
}

impl PolicyParams {
    pub fn zeros(hidden: usize) -> Self {
        PolicyParams {
            hidden,
            theta: vec![0.0; param_count(hidden)],
        }
    }

    /// Every weight uniform in `[−1/√F, 1/√F]`.
    pub fn random<R: Rng + ?Sized>(hidden: usize, rng: &mut R) -> Self {
        let bound = 1.0 / libm::sqrt(FEATURE_DIM as f64);
        PolicyParams {
            hidden,
            theta: (0..param_count(hidden))
                .map(|_| rng.gen_range(-bound..=bound))
                .collect(),
        }
    }

    /// Rebuilds from a flat vector; `None` if the length does not match.
    pub fn from_flat(hidden: usize, theta: Vec<f64>) -> Option<Self> {
        (theta.len() == param_count(hidden)).then_some(PolicyParams { hidden, theta })
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().all(|v| v.is_finite())
    }

    fn w1(&self, f: usize, h: usize) -> f64 {
        self.theta[f * self.hidden + h]
    }

    fn b1(&self, h: usize) -> f64 {
        self.theta[FEATURE_DIM * self.hidden + h]
    }

    fn w2(&self, h: usize) -> f64 {
        self.theta[(FEATURE_DIM + 1) * self.hidden + h]
    }

    fn b2(&self) -> f64 {
        self.theta[(FEATURE_DIM + 2) * self.hidden]
    }

    /// `θ ← θ + scale·g`
    pub fn apply(&mut self, grad: &PolicyGradient, scale: f64) {
        debug_assert_eq!(self.hidden, grad.hidden);
        for (t, g) in self.theta.iter_mut().zip(&grad.values) {
            *t += scale * g;
        }
    }
}

impl PolicyGradient {
    pub fn zeros(hidden: usize) -> Self {
        PolicyGradient {
            hidden,
            values: vec![0.0; param_count(hidden)],
        }
    }

    pub fn from_flat(hidden: usize, values: Vec<f64>) -> Option<Self> {
        (values.len() == param_count(hidden)).then_some(PolicyGradient { hidden, values })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// `self ← self + scale·other`
    pub fn add_scaled(&mut self, other: &PolicyGradient, scale: f64) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += scale * b;
        }
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.values.iter().map(|v| v * v).sum())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }
}

/// Forward pass over one candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
    /// tanh activations, `k × H` row-major
    hidden_act: Vec<f64>,
    log_norm: f64,
}

impl Forward {
    pub fn log_prob(&self, index: usize) -> f64 {
        self.logits[index] - self.log_norm
    }

    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .map(|&p| p * libm::log(p.max(PROB_FLOOR)))
            .sum::<f64>()
    }
}

/// `logit_j = w2·tanh(W1ᵀφ_j + b1) + b2`, softmax over the candidates.
pub fn policy_forward(params: &PolicyParams, features: &[FeatureVector]) -> Forward {
    let h = params.hidden;
    let mut hidden_act = vec![0.0; features.len() * h];
    let mut logits = Vec::with_capacity(features.len());
    for (j, phi) in features.iter().enumerate() {
        let mut z = params.b2();
        for k in 0..h {
            let mut a = params.b1(k);
            for (f, x) in phi.iter().enumerate() {
                a += params.w1(f, k) * x;
            }
            let t = libm::tanh(a);
            hidden_act[j * h + k] = t;
            z += params.w2(k) * t;
        }
        logits.push(z);
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|z| libm::exp(z - max)).sum();
    let log_norm = max + libm::log(sum);
    let probs = logits.iter().map(|z| libm::exp(z - log_norm)).collect();
    Forward {
        logits,
        probs,
        hidden_act,
        log_norm,
    }
}

/// Accumulates `scale · Σ_j dlogits_j · ∂logit_j/∂θ` into `out`.
fn backprop(params: &PolicyParams, features: &[FeatureVector], fwd: &Forward, dlogits: &[f64], scale: f64, out: &mut PolicyGradient) {
    let h = params.hidden;
    let (b1_off, w2_off, b2_off) = (FEATURE_DIM * h, (FEATURE_DIM + 1) * h, (FEATURE_DIM + 2) * h);
    let g = &mut out.values;
    for (j, phi) in features.iter().enumerate() {
        let dz = scale * dlogits[j];
        if dz == 0.0 {
            continue;
        }
        g[b2_off] += dz;
        for k in 0..h {
            let t = fwd.hidden_act[j * h + k];
            g[w2_off + k] += dz * t;
            let da = dz * params.w2(k) * (1.0 - t * t);
            g[b1_off + k] += da;
            for (f, x) in phi.iter().enumerate() {
                g[f * h + k] += da * x;
            }
        }
    }
}

/// `log π(chosen | features)` and its gradient.
pub fn logprob_grad(params: &PolicyParams, features: &[FeatureVector], chosen: usize) -> (f64, PolicyGradient) {
    let fwd = policy_forward(params, features);
    let mut grad = PolicyGradient::zeros(params.hidden);
    accumulate_logprob(params, features, &fwd, chosen, 1.0, &mut grad);
    (fwd.log_prob(chosen), grad)
}

/// Adds `scale·∇log π(chosen)` to `out` given a precomputed forward pass.
pub fn accumulate_logprob(params: &PolicyParams, features: &[FeatureVector], fwd: &Forward, chosen: usize, scale: f64, out: &mut PolicyGradient) {
    let dlogits: Vec<f64> = fwd
        .probs
        .iter()
        .enumerate()
        .map(|(j, p)| if j == chosen { 1.0 - p } else { -p })
        .collect();
    backprop(params, features, fwd, &dlogits, scale, out);
}

/// `H(π(·|s)) = −Σ p log p` and its gradient.
pub fn entropy_grad(params: &PolicyParams, features: &[FeatureVector]) -> (f64, PolicyGradient) {
    let fwd = policy_forward(params, features);
    let mut grad = PolicyGradient::zeros(params.hidden);
    accumulate_entropy(params, features, &fwd, 1.0, &mut grad);
    (fwd.entropy(), grad)
}

/// Adds `scale·∇H` to `out` given a precomputed forward pass.
pub fn accumulate_entropy(params: &PolicyParams, features: &[FeatureVector], fwd: &Forward, scale: f64, out: &mut PolicyGradient) {
    let entropy = fwd.entropy();
    let dlogits: Vec<f64> = fwd
        .probs
        .iter()
        .map(|&p| -p * (libm::log(p.max(PROB_FLOOR)) + entropy))
        .collect();
    backprop(params, features, fwd, &dlogits, scale, out);
}

/// Inverse-CDF draw over the candidate order.
pub fn sample_action<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (j, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return j;
        }
    }
    // rounding left u above the total; take the last candidate with mass
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

/// Argmax with lowest-index tie-break.
pub fn greedy_action(logits: &[f64]) -> usize {
    let mut best = 0;
    for (j, z) in logits.iter().enumerate() {
        if *z > logits[best] {
            best = j;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_features(rng: &mut ChaCha8Rng, k: usize) -> Vec<FeatureVector> {
        (0..k)
            .map(|_| {
                let mut phi = [0.0; FEATURE_DIM];
                phi.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
                phi
            })
            .collect()
    }

    #[test]
    fn single_candidate_is_certain() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = PolicyParams::random(DEFAULT_HIDDEN, &mut rng);
        let feats = random_features(&mut rng, 1);
        let fwd = policy_forward(&params, &feats);
        assert_eq!(fwd.probs, vec![1.0]);
        let (logp, grad) = logprob_grad(&params, &feats, 0);
        assert_eq!(logp, 0.0);
        assert!(grad.is_zero());
        let (h, grad) = entropy_grad(&params, &feats);
        assert_eq!(h, 0.0);
        assert!(grad.norm() < 1e-15);
    }

    #[test]
    fn zero_params_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let feats = random_features(&mut rng, 4);
        let fwd = policy_forward(&PolicyParams::zeros(8), &feats);
        for p in &fwd.probs {
            assert!((p - 0.25).abs() < 1e-15);
        }
        assert!((fwd.entropy() - libm::log(4.0)).abs() < 1e-12);
    }

    #[test]
    fn logit_shift_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut params = PolicyParams::random(DEFAULT_HIDDEN, &mut rng);
        let feats = random_features(&mut rng, 5);
        let before = policy_forward(&params, &feats);
        let b2 = (FEATURE_DIM + 2) * DEFAULT_HIDDEN;
        params.as_mut_slice()[b2] += 5.0;
        let after = policy_forward(&params, &feats);
        for (a, b) in before.probs.iter().zip(&after.probs) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_probs_sample_deterministically() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            assert_eq!(sample_action(&[0.0, 0.0, 1.0], &mut rng), 2);
        }
    }

    #[test]
    fn greedy_tie_break() {
        assert_eq!(greedy_action(&[1.0, 3.0, 3.0]), 1);
    }

    #[test]
    fn sample_frequencies_match_probs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let probs = [0.1, 0.2, 0.3, 0.4];
        let mut counts = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            counts[sample_action(&probs, &mut rng)] += 1;
        }
        for (c, p) in counts.iter().zip(&probs) {
            assert!((*c as f64 / n as f64 - p).abs() < 0.01);
        }
    }
}
