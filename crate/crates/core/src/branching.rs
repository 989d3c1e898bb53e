//! Variable selection rules.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bnb::{BranchContext, Side};
use crate::lp::{solve_lp_warm, LpError, LpResult};
use crate::policy::{featurize, greedy_action, policy_forward, sample_action, DecisionRecord, PolicyParams};

/// Floor applied to each side's gain before taking the product score.
pub const SB_EPSILON: f64 = 1e-6;
/// Gain assigned to a child whose LP is infeasible.
pub const SB_INFEASIBLE_GAIN: f64 = 1e7;
pub const DEFAULT_RELIABILITY: usize = 4;

/// Index into `ctx.candidates`, plus an optional record of what a learned
/// rule saw when it chose.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchDecision {
    pub candidate: usize,
    pub record: Option<DecisionRecord>,
}

impl BranchDecision {
    pub fn plain(candidate: usize) -> Self {
        BranchDecision {
            candidate,
            record: None,
        }
    }
}

pub trait Brancher {
    /// Picks one of `ctx.candidates`, which is never empty.
    fn select(&mut self, ctx: &BranchContext<'_>) -> Result<BranchDecision, LpError>;
}

impl<B: Brancher + ?Sized> Brancher for &mut B {
    fn select(&mut self, ctx: &BranchContext<'_>) -> Result<BranchDecision, LpError> {
        (**self).select(ctx)
    }
}

/// Uniform choice from a private seeded stream.
#[derive(Debug, Clone)]
pub struct RandomRule {
    rng: ChaCha8Rng,
}

impl RandomRule {
    pub fn new(seed: u64) -> Self {
        RandomRule {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Brancher for RandomRule {
    fn select(&mut self, ctx: &BranchContext<'_>) -> Result<BranchDecision, LpError> {
        Ok(BranchDecision::plain(self.rng.gen_range(0..ctx.candidates.len())))
    }
}

/// Full strong branching with the product score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StrongRule;

impl Brancher for StrongRule {
    fn select(&mut self, ctx: &BranchContext<'_>) -> Result<BranchDecision, LpError> {
        let labels = strong_branching_labels(ctx)?;
        Ok(BranchDecision::plain(best_label(&labels)))
    }
}

/// Strong branching until a variable has `reliability` realized observations
/// on both sides, pseudocost estimates afterwards. `usize::MAX` means never
/// trust pseudocosts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PseudocostRule {
    pub reliability: usize,
}

impl Default for PseudocostRule {
    fn default() -> Self {
        PseudocostRule {
            reliability: DEFAULT_RELIABILITY,
        }
    }
}

impl Brancher for PseudocostRule {
    fn select(&mut self, ctx: &BranchContext<'_>) -> Result<BranchDecision, LpError> {
        let pc = ctx.pseudocosts;
        let mut best = (f64::NEG_INFINITY, usize::MAX, 0usize);
        for (k, cand) in ctx.candidates.iter().enumerate() {
            let reliable = pc.count(cand.var, Side::Down) >= self.reliability
                && pc.count(cand.var, Side::Up) >= self.reliability;
            let score = if reliable {
                let f = cand.frac();
                let down = pc.estimate(cand.var, Side::Down) * f;
                let up = pc.estimate(cand.var, Side::Up) * (1.0 - f);
                product_score(down, up)
            } else {
                let label = strong_label(ctx, cand.var, cand.value)?;
                label.score
            };
            if score > best.0 || (score == best.0 && cand.var < best.1) {
                best = (score, cand.var, k);
            }
        }
        Ok(BranchDecision::plain(best.2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum PolicyMode {
    Stochastic,
    Greedy,
}

/// Delegates to the policy network and records features for training.
#[derive(Debug, Clone)]
pub struct LearnedRule {
    params: PolicyParams,
    mode: PolicyMode,
    rng: ChaCha8Rng,
    record: bool,
}

impl LearnedRule {
    pub fn new(params: PolicyParams, mode: PolicyMode, seed: u64) -> Self {
        LearnedRule {
            params,
            mode,
            rng: ChaCha8Rng::seed_from_u64(seed),
            record: true,
        }
    }

    /// Skips storing per-node feature snapshots.
    pub fn without_records(mut self) -> Self {
        self.record = false;
        self
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }
}

impl Brancher for LearnedRule {
    fn select(&mut self, ctx: &BranchContext<'_>) -> Result<BranchDecision, LpError> {
        let features = featurize(ctx);
        let fwd = policy_forward(&self.params, &features);
        let chosen = match self.mode {
            PolicyMode::Stochastic => sample_action(&fwd.probs, &mut self.rng),
            PolicyMode::Greedy => greedy_action(&fwd.logits),
        };
        Ok(BranchDecision {
            candidate: chosen,
            record: self.record.then(|| DecisionRecord { features, chosen }),
        })
    }
}

/// Closed set of the built-in rules.
#[derive(Debug, Clone)]
pub enum BranchRule {
    Random(RandomRule),
    Strong(StrongRule),
    Pseudocost(PseudocostRule),
    Learned(LearnedRule),
}

impl BranchRule {
    pub fn random(seed: u64) -> Self {
        BranchRule::Random(RandomRule::new(seed))
    }

    pub fn strong() -> Self {
        BranchRule::Strong(StrongRule)
    }

    pub fn pseudocost() -> Self {
        BranchRule::Pseudocost(PseudocostRule::default())
    }

    pub fn stochastic(params: PolicyParams, seed: u64) -> Self {
        BranchRule::Learned(LearnedRule::new(params, PolicyMode::Stochastic, seed))
    }

    pub fn greedy(params: PolicyParams) -> Self {
        BranchRule::Learned(LearnedRule::new(params, PolicyMode::Greedy, 0))
    }
}

impl Brancher for BranchRule {
    fn select(&mut self, ctx: &BranchContext<'_>) -> Result<BranchDecision, LpError> {
        match self {
            BranchRule::Random(r) => r.select(ctx),
            BranchRule::Strong(r) => r.select(ctx),
            BranchRule::Pseudocost(r) => r.select(ctx),
            BranchRule::Learned(r) => r.select(ctx),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrongLabel {
    pub var: usize,
    pub score: f64,
    pub down_gain: f64,
    pub up_gain: f64,
}

pub fn product_score(down_gain: f64, up_gain: f64) -> f64 {
    down_gain.max(SB_EPSILON) * up_gain.max(SB_EPSILON)
}

/// Solves both child LPs of every candidate at the current node. Works on a
/// private copy of the relaxation, so the search state is untouched.
pub fn strong_branching_labels(ctx: &BranchContext<'_>) -> Result<Vec<StrongLabel>, LpError> {
    ctx.candidates
        .iter()
        .map(|c| strong_label(ctx, c.var, c.value))
        .collect()
}

/// Position in `labels` of the best score, ties to the lowest variable index.
pub fn best_label(labels: &[StrongLabel]) -> usize {
    let mut best = 0;
    for (k, l) in labels.iter().enumerate() {
        let b = &labels[best];
        if l.score > b.score || (l.score == b.score && l.var < b.var) {
            best = k;
        }
    }
    best
}

fn strong_label(ctx: &BranchContext<'_>, var: usize, value: f64) -> Result<StrongLabel, LpError> {
    let mut lp = ctx.relaxation.clone();
    lp.lower.copy_from_slice(ctx.lower);
    lp.upper.copy_from_slice(ctx.upper);

    let gain = |lp: &crate::lp::LpProblem| -> Result<f64, LpError> {
        Ok(match solve_lp_warm(lp, ctx.basis)?.result {
            LpResult::Optimal(sol) => (sol.objective - ctx.lp_objective).max(0.0),
            LpResult::Infeasible => SB_INFEASIBLE_GAIN,
            LpResult::Unbounded => 0.0,
        })
    };

    let saved = lp.upper[var];
    lp.upper[var] = libm::floor(value);
    let down_gain = gain(&lp)?;
    lp.upper[var] = saved;
    lp.lower[var] = libm::ceil(value);
    let up_gain = gain(&lp)?;
    Ok(StrongLabel {
        var,
        score: product_score(down_gain, up_gain),
        down_gain,
        up_gain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnb::{solve, SolveConfig};
    use crate::clock::NoClock;
    use crate::milp::fixtures::counterexample;
    use crate::milp::MilpInstance;
    use crate::sparse::SparseMatrix;
    use alloc::string::String;
    use alloc::vec;

    #[test]
    fn single_candidate_every_rule() {
        let inst = counterexample();
        let mut rules = vec![
            BranchRule::random(3),
            BranchRule::strong(),
            BranchRule::pseudocost(),
            BranchRule::stochastic(PolicyParams::zeros(4), 1),
            BranchRule::greedy(PolicyParams::zeros(4)),
        ];
        for rule in &mut rules {
            let report = solve(&inst, &SolveConfig::best_first(), rule, &NoClock).unwrap();
            assert_eq!(report.nodes[0].action.unwrap().var, 0);
            assert_eq!(report.objective, Some(1.0));
        }
    }

    /// `t_k >= w_k |x_k - 0.5|` with `w = (4, 2)`: each side of x0 moves the
    /// bound by 2, each side of x1 by 1.
    fn two_candidate() -> MilpInstance {
        let trip = [
            (0, 0, 4.0),
            (0, 2, -1.0),
            (1, 0, -4.0),
            (1, 2, -1.0),
            (2, 1, 2.0),
            (2, 3, -1.0),
            (3, 1, -2.0),
            (3, 3, -1.0),
        ];
        MilpInstance {
            name: String::from("two"),
            obj: vec![0.0, 0.0, 1.0, 1.0],
            rows: SparseMatrix::from_triplets(4, 4, &trip).unwrap(),
            rhs: vec![2.0, -2.0, 1.0, -1.0],
            lower: vec![0.0; 4],
            upper: vec![1.0, 1.0, f64::INFINITY, f64::INFINITY],
            int_set: vec![0, 1],
        }
    }

    struct Probe {
        labels: Vec<StrongLabel>,
    }

    impl Brancher for Probe {
        fn select(&mut self, ctx: &BranchContext<'_>) -> Result<BranchDecision, LpError> {
            if self.labels.is_empty() {
                self.labels = strong_branching_labels(ctx)?;
            }
            Ok(BranchDecision::plain(0))
        }
    }

    #[test]
    fn strong_prefers_larger_product() {
        let inst = two_candidate();
        let mut probe = Probe { labels: Vec::new() };
        solve(&inst, &SolveConfig::best_first(), &mut probe, &NoClock).unwrap();
        let l0 = probe.labels[0];
        let l1 = probe.labels[1];
        assert!((l0.down_gain - 2.0).abs() < 1e-9 && (l0.up_gain - 2.0).abs() < 1e-9);
        assert!((l1.down_gain - 1.0).abs() < 1e-9 && (l1.up_gain - 1.0).abs() < 1e-9);
        assert!((l0.score - 4.0).abs() < 1e-8 && (l1.score - 1.0).abs() < 1e-8);
        assert_eq!(best_label(&probe.labels), 0);
    }

    #[test]
    fn both_children_infeasible_scores_m_squared() {
        let s = product_score(SB_INFEASIBLE_GAIN, SB_INFEASIBLE_GAIN);
        assert_eq!(s, 1e14);
    }

    #[test]
    fn random_rule_is_reproducible() {
        let inst = crate::gen::generate(&crate::gen::GenConfig {
            family: crate::gen::FamilyKind::SetCover.enumerable(),
            seed: 11,
        })
        .unwrap();
        let run = || {
            let mut rule = BranchRule::random(99);
            solve(&inst, &SolveConfig::best_first(), &mut rule, &NoClock)
                .unwrap()
                .nodes
                .iter()
                .map(|n| n.action.map(|a| a.var))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn infinite_reliability_matches_strong() {
        for seed in 0..4 {
            let inst = crate::gen::generate(&crate::gen::GenConfig {
                family: crate::gen::FamilyKind::CombAuction.enumerable(),
                seed,
            })
            .unwrap();
            let cfg = SolveConfig::best_first();
            let a = solve(&inst, &cfg, &mut StrongRule, &NoClock).unwrap();
            let mut pc = PseudocostRule {
                reliability: usize::MAX,
            };
            let b = solve(&inst, &cfg, &mut pc, &NoClock).unwrap();
            let actions = |r: &crate::bnb::SolveReport| r.nodes.iter().map(|n| n.action.map(|a| a.var)).collect::<Vec<_>>();
            assert_eq!(actions(&a), actions(&b));
        }
    }
}
