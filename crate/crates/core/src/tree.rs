//! Episodes as binary trees, tree and temporal returns, and small synthetic
//! tree MDPs whose value can be computed exactly.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnb::{NodeStatus, SolveReport};
use crate::policy::{logprob_grad, policy_forward, sample_action, DecisionRecord, FeatureVector, PolicyGradient, PolicyParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("malformed episode tree: {0}")]
    MalformedTree(&'static str),
    #[error("solve did not finish; episode is incomplete")]
    IncompleteEpisode,
    #[error("synthetic MDP exceeds its depth cap")]
    DepthCapExceeded,
    #[error("invalid synthetic MDP: {0}")]
    InvalidMdp(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeNode {
    /// B&B node id or synthetic state id.
    pub state: usize,
    /// Branching variable or synthetic action index.
    pub action: Option<usize>,
    pub reward: f64,
    pub parent: Option<usize>,
    pub children: Option<[usize; 2]>,
    /// Features and choice of a learned rule, if one acted here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<DecisionRecord>,
}

impl EpisodeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTree {
    pub nodes: Vec<EpisodeNode>,
    /// Node indices in the order they were processed.
    pub temporal_order: Vec<usize>,
}

impl EpisodeTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn non_leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| !self.nodes[i].is_leaf())
    }

    /// Checks root, binary-ness, parent links, connectivity and that the
    /// temporal order is a permutation with parents before children.
    pub fn validate(&self) -> Result<(), TreeError> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(TreeError::MalformedTree("empty tree"));
        }
        if self.nodes[0].parent.is_some() {
            return Err(TreeError::MalformedTree("node 0 must be the root"));
        }
        let mut child_links = 0usize;
        for (i, node) in self.nodes.iter().enumerate() {
            if i > 0 && node.parent.is_none() {
                return Err(TreeError::MalformedTree("second root"));
            }
            if node.action.is_some() != node.children.is_some() {
                return Err(TreeError::MalformedTree("action present iff children present"));
            }
            if let Some(cs) = node.children {
                for c in cs {
                    if c >= n || self.nodes[c].parent != Some(i) {
                        return Err(TreeError::MalformedTree("child/parent link mismatch"));
                    }
                }
                if cs[0] == cs[1] {
                    return Err(TreeError::MalformedTree("duplicate child"));
                }
                child_links += 2;
            }
            if let Some(p) = node.parent {
                if p >= n || !self.nodes[p].children.is_some_and(|cs| cs.contains(&i)) {
                    return Err(TreeError::MalformedTree("parent does not list child"));
                }
            }
            if !node.reward.is_finite() {
                return Err(TreeError::MalformedTree("non-finite reward"));
            }
        }
        if child_links != n - 1 {
            return Err(TreeError::MalformedTree("not a tree"));
        }
        if self.temporal_order.len() != n {
            return Err(TreeError::MalformedTree("temporal order length"));
        }
        let mut position = vec![usize::MAX; n];
        for (t, &i) in self.temporal_order.iter().enumerate() {
            if i >= n || position[i] != usize::MAX {
                return Err(TreeError::MalformedTree("temporal order is not a permutation"));
            }
            position[i] = t;
        }
        // parent-before-child along every edge also rules out cycles
        for (i, node) in self.nodes.iter().enumerate() {
            if let Some(p) = node.parent {
                if position[p] >= position[i] {
                    return Err(TreeError::MalformedTree("child processed before parent"));
                }
            }
        }
        Ok(())
    }

    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.nodes.len()];
        for (t, &i) in self.temporal_order.iter().enumerate() {
            pos[i] = t;
        }
        pos
    }
}

/// Sum of rewards over the strict descendants of every node, in one
/// bottom-up pass. Entries for leaves are 0.
pub fn tree_returns(tree: &EpisodeTree) -> Result<Vec<f64>, TreeError> {
    let mut ops = 0;
    tree_returns_counted(tree, &mut ops)
}

/// [`tree_returns`] that also counts elementary steps (node visits and
/// child accumulations) into `ops`. Validation is included.
pub fn tree_returns_counted(tree: &EpisodeTree, ops: &mut u64) -> Result<Vec<f64>, TreeError> {
    tree.validate()?;
    *ops += 2 * tree.len() as u64;
    let mut subtree: Vec<f64> = tree.nodes.iter().map(|n| n.reward).collect();
    let mut g = vec![0.0; tree.len()];
    for &i in tree.temporal_order.iter().rev() {
        *ops += 1;
        if let Some([l, r]) = tree.nodes[i].children {
            *ops += 2;
            g[i] = subtree[l] + subtree[r];
            subtree[i] += g[i];
        }
    }
    Ok(g)
}

/// For the node at temporal position `t`, the sum of rewards at positions
/// `t+1..`. Entries are given for every node.
pub fn temporal_returns(tree: &EpisodeTree) -> Result<Vec<f64>, TreeError> {
    tree.validate()?;
    let mut g = vec![0.0; tree.len()];
    let mut suffix = 0.0;
    for &i in tree.temporal_order.iter().rev() {
        g[i] = suffix;
        suffix += tree.nodes[i].reward;
    }
    Ok(g)
}

/// Indices whose rewards the tree return of `node` sums.
pub fn tree_credit_set(tree: &EpisodeTree, node: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack: Vec<usize> = tree.nodes[node].children.map_or(Vec::new(), |c| c.to_vec());
    while let Some(i) = stack.pop() {
        out.push(i);
        if let Some(c) = tree.nodes[i].children {
            stack.extend_from_slice(&c);
        }
    }
    out.sort_unstable();
    out
}

/// Indices whose rewards the temporal return of `node` sums.
pub fn temporal_credit_set(tree: &EpisodeTree, node: usize) -> Vec<usize> {
    let t = tree.temporal_order.iter().position(|&i| i == node).expect("node in order");
    let mut out = tree.temporal_order[t + 1..].to_vec();
    out.sort_unstable();
    out
}

/// Non-leaf nodes whose tree credit set is not contained in their temporal
/// credit set.
pub fn credit_subset_violations(tree: &EpisodeTree) -> Vec<usize> {
    tree.non_leaves()
        .filter(|&i| {
            let temporal = temporal_credit_set(tree, i);
            tree_credit_set(tree, i)
                .iter()
                .any(|j| temporal.binary_search(j).is_err())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardKind {
    /// `−1` per processed node.
    TreeSize,
}

/// Turns a finished solve into an episode, one node per processed B&B node.
pub fn record_episode(report: &SolveReport, reward: RewardKind) -> Result<EpisodeTree, TreeError> {
    if !report.is_complete() {
        return Err(TreeError::IncompleteEpisode);
    }
    let r = match reward {
        RewardKind::TreeSize => -1.0,
    };
    if report.processed_order.len() != report.nodes.len() {
        return Err(TreeError::IncompleteEpisode);
    }
    let nodes = report
        .nodes
        .iter()
        .map(|n| EpisodeNode {
            state: n.id,
            action: match n.status {
                NodeStatus::Branched => n.action.map(|a| a.var),
                _ => None,
            },
            reward: r,
            parent: n.parent,
            children: n.children,
            decision: n.decision.clone(),
        })
        .collect();
    let tree = EpisodeTree {
        nodes,
        temporal_order: report.processed_order.clone(),
    };
    tree.validate()?;
    Ok(tree)
}

/// A finite tree MDP with layered states: transitions from layer `d` only
/// reach layer `d+1`, and the last layer is all leaves, so episodes end by
/// depth `depth_cap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTreeMdp {
    pub p_init: Vec<f64>,
    /// `p_left[s][a][s']`
    pub p_left: Vec<Vec<Vec<f64>>>,
    pub p_right: Vec<Vec<Vec<f64>>>,
    pub reward: Vec<f64>,
    pub leaf: Vec<bool>,
    /// One feature vector per available action of each state.
    pub features: Vec<Vec<FeatureVector>>,
    pub layer: Vec<usize>,
    pub depth_cap: usize,
}

/// Shape parameters for [`SyntheticTreeMdp::random`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticShape {
    pub depth: usize,
    pub states_per_layer: usize,
    pub actions: usize,
    /// Chance that a state above the last layer is a leaf.
    pub leaf_prob: f64,
    /// Entries of each feature vector that are non-zero; the rest stay 0.
    pub active_features: usize,
}

/// Share of each transition row given to its dominant successor.
const FOCUS: f64 = 0.9;

impl SyntheticTreeMdp {
    pub fn n_states(&self) -> usize {
        self.reward.len()
    }

    pub fn random<R: Rng + ?Sized>(shape: SyntheticShape, rng: &mut R) -> Self {
        let SyntheticShape {
            depth,
            states_per_layer: w,
            actions,
            leaf_prob,
            active_features,
        } = shape;
        let n = (depth + 1) * w;
        let layer: Vec<usize> = (0..n).map(|s| s / w).collect();
        let mut leaf: Vec<bool> = layer.iter().map(|&d| d == depth || rng.gen_bool(leaf_prob)).collect();
        // keep each episode from being trivially a single leaf
        if depth > 0 {
            leaf[0] = false;
        }
        let reward = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let simplex = |rng: &mut R, k: usize| -> Vec<f64> {
            let v: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        };
        // most of the mass on one successor per (state, action), so the
        // choice of action matters
        let concentrated = |rng: &mut R, k: usize| -> Vec<f64> {
            let mut v: Vec<f64> = simplex(rng, k).into_iter().map(|x| x * (1.0 - FOCUS)).collect();
            v[rng.gen_range(0..k)] += FOCUS;
            v
        };
        let mut p_left = Vec::with_capacity(n);
        let mut p_right = Vec::with_capacity(n);
        let mut features = Vec::with_capacity(n);
        for s in 0..n {
            let k = if leaf[s] { 0 } else { actions };
            let mut tl = Vec::with_capacity(k);
            let mut tr = Vec::with_capacity(k);
            for _ in 0..k {
                let mut row_l = vec![0.0; n];
                let mut row_r = vec![0.0; n];
                let next = (layer[s] + 1) * w;
                row_l[next..next + w].copy_from_slice(&concentrated(rng, w));
                row_r[next..next + w].copy_from_slice(&concentrated(rng, w));
                tl.push(row_l);
                tr.push(row_r);
            }
            p_left.push(tl);
            p_right.push(tr);
            features.push(
                (0..k)
                    .map(|_| {
                        let mut phi = [0.0; crate::policy::FEATURE_DIM];
                        for x in phi.iter_mut().take(active_features) {
                            *x = rng.gen_range(-1.0..1.0);
                        }
                        phi
                    })
                    .collect(),
            );
        }
        let mut p_init = vec![0.0; n];
        // start in layer 0 but never in a leaf
        let roots: Vec<usize> = (0..w).filter(|&s| !leaf[s]).collect();
        let weights = simplex(rng, roots.len());
        for (s, p) in roots.into_iter().zip(weights) {
            p_init[s] = p;
        }
        SyntheticTreeMdp {
            p_init,
            p_left,
            p_right,
            reward,
            leaf,
            features,
            layer,
            depth_cap: depth,
        }
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        let n = self.n_states();
        let row_ok = |row: &[f64]| row.len() == n && row.iter().all(|p| *p >= 0.0) && (row.iter().sum::<f64>() - 1.0).abs() < 1e-9;
        if !row_ok(&self.p_init) {
            return Err(TreeError::InvalidMdp("initial distribution"));
        }
        if [self.p_left.len(), self.p_right.len(), self.leaf.len(), self.features.len(), self.layer.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(TreeError::InvalidMdp("table sizes"));
        }
        for s in 0..n {
            let k = self.features[s].len();
            if self.leaf[s] {
                if k != 0 {
                    return Err(TreeError::InvalidMdp("leaf with actions"));
                }
                continue;
            }
            if k == 0 || self.p_left[s].len() != k || self.p_right[s].len() != k {
                return Err(TreeError::InvalidMdp("action tables"));
            }
            for a in 0..k {
                for table in [&self.p_left[s][a], &self.p_right[s][a]] {
                    if !row_ok(table) {
                        return Err(TreeError::InvalidMdp("transition row"));
                    }
                    for (t, p) in table.iter().enumerate() {
                        if *p > 0.0 && self.layer[t] <= self.layer[s] {
                            return Err(TreeError::InvalidMdp("transition must go one layer down"));
                        }
                    }
                }
            }
            if self.layer[s] >= self.depth_cap {
                return Err(TreeError::DepthCapExceeded);
            }
        }
        Ok(())
    }

    pub fn action_probs(&self, params: &PolicyParams, s: usize) -> Vec<f64> {
        policy_forward(params, &self.features[s]).probs
    }

    /// Exact expected return `E_{s∼p_init}[V(s)]` including the root reward.
    pub fn exact_value(&self, params: &PolicyParams) -> Result<f64, TreeError> {
        self.validate()?;
        let n = self.n_states();
        let mut v = vec![0.0; n];
        // deepest layer first
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&s| core::cmp::Reverse(self.layer[s]));
        for s in order {
            v[s] = self.reward[s];
            if self.leaf[s] {
                continue;
            }
            let probs = self.action_probs(params, s);
            for (a, pa) in probs.iter().enumerate() {
                let ev: f64 = (0..n)
                    .map(|t| (self.p_left[s][a][t] + self.p_right[s][a][t]) * v[t])
                    .sum();
                v[s] += pa * ev;
            }
        }
        Ok(self.p_init.iter().zip(&v).map(|(p, x)| p * x).sum())
    }

    /// Exact value and its gradient by central differences with step `1e-6`.
    pub fn exact_value_and_gradient(&self, params: &PolicyParams) -> Result<(f64, PolicyGradient), TreeError> {
        const H: f64 = 1e-6;
        let value = self.exact_value(params)?;
        let mut probe = params.clone();
        let mut grad = vec![0.0; params.as_slice().len()];
        for (k, g) in grad.iter_mut().enumerate() {
            let orig = probe.as_slice()[k];
            probe.as_mut_slice()[k] = orig + H;
            let up = self.exact_value(&probe)?;
            probe.as_mut_slice()[k] = orig - H;
            let down = self.exact_value(&probe)?;
            probe.as_mut_slice()[k] = orig;
            *g = (up - down) / (2.0 * H);
        }
        Ok((value, PolicyGradient::from_flat(params.hidden(), grad).expect("same layout")))
    }

    /// Samples one episode, unfolding the tree depth-first, left child first.
    pub fn sample_episode<R: Rng + ?Sized>(&self, params: &PolicyParams, rng: &mut R) -> EpisodeTree {
        let probs: Vec<Vec<f64>> = (0..self.n_states())
            .map(|s| if self.leaf[s] { Vec::new() } else { self.action_probs(params, s) })
            .collect();
        self.sample_with(&probs, rng)
    }

    fn sample_with<R: Rng + ?Sized>(&self, probs: &[Vec<f64>], rng: &mut R) -> EpisodeTree {
        let root = sample_action(&self.p_init, rng);
        let mut nodes = vec![EpisodeNode {
            state: root,
            action: None,
            reward: self.reward[root],
            parent: None,
            children: None,
            decision: None,
        }];
        let mut order = Vec::new();
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            order.push(i);
            let s = nodes[i].state;
            if self.leaf[s] {
                continue;
            }
            let a = sample_action(&probs[s], rng);
            let left = sample_action(&self.p_left[s][a], rng);
            let right = sample_action(&self.p_right[s][a], rng);
            let (l, r) = (nodes.len(), nodes.len() + 1);
            for st in [left, right] {
                nodes.push(EpisodeNode {
                    state: st,
                    action: None,
                    reward: self.reward[st],
                    parent: Some(i),
                    children: None,
                    decision: None,
                });
            }
            nodes[i].action = Some(a);
            nodes[i].children = Some([l, r]);
            stack.push(r);
            stack.push(l);
        }
        EpisodeTree {
            nodes,
            temporal_order: order,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    TreePg,
    TemporalPg,
}

/// Monte-Carlo policy gradient with per-component standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mean: PolicyGradient,
    pub std_err: Vec<f64>,
    pub episodes: usize,
}

impl McEstimate {
    /// Sum of per-component sample variances of a single-episode estimate.
    pub fn total_variance(&self) -> f64 {
        let n = self.episodes as f64;
        self.std_err.iter().map(|se| se * se * n).sum()
    }
}

/// Averages `Σ_i ∇log π(a_i|s_i)·G_i` over `n_episodes` sampled episodes.
///
/// Each episode's estimate is a linear combination of the per-(state,
/// action) score vectors, so only the combination coefficients are
/// accumulated; the covariance of the coefficients gives exact sample
/// variances of every parameter component.
pub fn mc_gradient_estimate<R: Rng + ?Sized>(
    mdp: &SyntheticTreeMdp,
    params: &PolicyParams,
    estimator: Estimator,
    n_episodes: usize,
    rng: &mut R,
) -> Result<McEstimate, TreeError> {
    mdp.validate()?;
    if n_episodes == 0 {
        return Err(TreeError::InvalidMdp("need at least one episode"));
    }
    let mut pairs: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut scores: Vec<PolicyGradient> = Vec::new();
    for s in 0..mdp.n_states() {
        for a in 0..mdp.features[s].len() {
            pairs.insert((s, a), scores.len());
            scores.push(logprob_grad(params, &mdp.features[s], a).1);
        }
    }
    let probs: Vec<Vec<f64>> = (0..mdp.n_states())
        .map(|s| if mdp.leaf[s] { Vec::new() } else { mdp.action_probs(params, s) })
        .collect();

    let k = scores.len();
    let mut sum = vec![0.0; k];
    let mut cross = vec![0.0; k * k];
    let mut coef = vec![0.0; k];
    for _ in 0..n_episodes {
        let ep = mdp.sample_with(&probs, rng);
        let g = match estimator {
            Estimator::TreePg => tree_returns(&ep)?,
            Estimator::TemporalPg => temporal_returns(&ep)?,
        };
        coef.iter_mut().for_each(|c| *c = 0.0);
        for i in ep.non_leaves() {
            let node = &ep.nodes[i];
            let idx = pairs[&(node.state, node.action.expect("non-leaf acts"))];
            coef[idx] += g[i];
        }
        for p in 0..k {
            if coef[p] == 0.0 {
                continue;
            }
            sum[p] += coef[p];
            for q in 0..k {
                cross[p * k + q] += coef[p] * coef[q];
            }
        }
    }

    let n = n_episodes as f64;
    let mean_coef: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let dim = params.as_slice().len();
    let mut mean = PolicyGradient::zeros(params.hidden());
    for (p, score) in scores.iter().enumerate() {
        mean.add_scaled(score, mean_coef[p]);
    }
    // sample covariance of the coefficients, then var(component) = sᵀ Σ s
    let denom = if n_episodes > 1 { n - 1.0 } else { 1.0 };
    let mut cov = vec![0.0; k * k];
    for p in 0..k {
        for q in 0..k {
            cov[p * k + q] = (cross[p * k + q] - n * mean_coef[p] * mean_coef[q]) / denom;
        }
    }
    let std_err = (0..dim)
        .map(|c| {
            let mut var = 0.0;
            for p in 0..k {
                let sp = scores[p].as_slice()[c];
                if sp == 0.0 {
                    continue;
                }
                for q in 0..k {
                    var += sp * cov[p * k + q] * scores[q].as_slice()[c];
                }
            }
            libm::sqrt(var.max(0.0) / n)
        })
        .collect();
    Ok(McEstimate {
        mean,
        std_err,
        episodes: n_episodes,
    })
}

/// Settings for [`gradient_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub mdps: usize,
    pub episodes: usize,
    pub seed: u64,
    pub hidden: usize,
    pub active_features: usize,
    /// Largest allowed `‖mc − exact‖ / ‖exact‖`.
    pub rel_l2_tol: f64,
    /// Allowed distance from the exact gradient in standard errors.
    pub z_tol: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            mdps: 20,
            episodes: 200_000,
            seed: 0,
            hidden: 2,
            active_features: 2,
            rel_l2_tol: 0.05,
            z_tol: 3.0,
        }
    }
}

/// Components whose error is below this are accepted regardless of their
/// standard error; it covers the resolution of the finite-difference
/// gradient.
pub const FD_RESOLUTION: f64 = 1e-7;

/// Smallest exact gradient norm admitted into the suite.
pub const MIN_GRADIENT_NORM: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub mdp: usize,
    pub depth: usize,
    pub estimator: Estimator,
    pub rel_l2: f64,
    pub exact_norm: f64,
    /// Largest `|mc − exact| / se` over components with a positive error.
    pub max_z: f64,
    /// Components outside `z_tol` standard errors.
    pub se_violations: usize,
    pub components: usize,
    /// Summed single-episode variance, a diagnostic only.
    pub total_variance: f64,
    pub passed: bool,
}

/// Compares both Monte-Carlo estimators with the exact gradient on a family
/// of random layered tree MDPs of depths 1 to 4.
pub fn gradient_suite(cfg: &SuiteConfig, mut on_check: impl FnMut(&GradientCheck)) -> Result<Vec<GradientCheck>, TreeError> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = Vec::new();
    for k in 0..cfg.mdps {
        let depth = 1 + k % 4;
        let shape = SyntheticShape {
            depth,
            states_per_layer: 2 + k % 2,
            actions: 2 + (k / 4) % 2,
            leaf_prob: 0.2,
            active_features: cfg.active_features,
        };
        // Relative error is meaningless for a vanishing gradient, so draws
        // with a small exact gradient are replaced before any sampling.
        let (mdp, params, exact) = loop {
            let mdp = SyntheticTreeMdp::random(shape.clone(), &mut rng);
            let params = PolicyParams::random(cfg.hidden, &mut rng);
            let (_, exact) = mdp.exact_value_and_gradient(&params)?;
            if exact.norm() >= MIN_GRADIENT_NORM {
                break (mdp, params, exact);
            }
        };
        let exact_norm = exact.norm();
        for estimator in [Estimator::TreePg, Estimator::TemporalPg] {
            let mc = mc_gradient_estimate(&mdp, &params, estimator, cfg.episodes, &mut rng)?;
            let mut diff = mc.mean.clone();
            diff.add_scaled(&exact, -1.0);
            let mut max_z: f64 = 0.0;
            let mut violations = 0;
            for ((d, se), _) in diff.as_slice().iter().zip(&mc.std_err).zip(exact.as_slice()) {
                let err = libm::fabs(*d);
                if err <= FD_RESOLUTION {
                    continue;
                }
                let z = if *se > 0.0 { err / se } else { f64::INFINITY };
                max_z = max_z.max(z);
                if err > cfg.z_tol * se + FD_RESOLUTION {
                    violations += 1;
                }
            }
            let rel_l2 = if exact_norm > 0.0 { diff.norm() / exact_norm } else { diff.norm() };
            let check = GradientCheck {
                mdp: k,
                depth,
                estimator,
                rel_l2,
                exact_norm,
                max_z,
                se_violations: violations,
                components: diff.as_slice().len(),
                total_variance: mc.total_variance(),
                passed: rel_l2 <= cfg.rel_l2_tol && violations == 0,
            };
            on_check(&check);
            checks.push(check);
        }
    }
    Ok(checks)
}
