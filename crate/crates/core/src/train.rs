//! REINFORCE over B&B episodes, imitation of strong branching, and
//! validation of branching policies.

use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnb::{solve, BranchContext, SolveConfig, SolveError, SolveReport, SolveStatus};
use crate::branching::{best_label, strong_branching_labels, BranchDecision, BranchRule, Brancher, PolicyMode};
use crate::clock::{Clock, NoClock};
use crate::eval::{geometric_mean, relative_std_pct};
use crate::lp::LpError;
use crate::milp::MilpInstance;
use crate::policy::{
    accumulate_entropy, accumulate_logprob, featurize, greedy_action, policy_forward, DecisionRecord, PolicyGradient, PolicyParams,
    DEFAULT_HIDDEN, PROB_FLOOR,
};
use crate::tree::{record_episode, temporal_returns, tree_returns, RewardKind};

/// How training episodes are solved and credited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Best-first, no objective limit, temporal returns.
    TemporalMdp,
    /// Depth-first left-first, tree returns.
    TreeDfs,
    /// Best-first with the optimum as objective limit, tree returns.
    TreeObjLim,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::TemporalMdp, Regime::TreeDfs, Regime::TreeObjLim];

    pub fn name(self) -> &'static str {
        match self {
            Regime::TemporalMdp => "mdp",
            Regime::TreeDfs => "tmdp-dfs",
            Regime::TreeObjLim => "tmdp-objlim",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Regime::ALL.into_iter().find(|r| r.name() == s)
    }

    pub fn uses_tree_returns(self) -> bool {
        !matches!(self, Regime::TemporalMdp)
    }

    /// Solve settings for one training episode. `optimum` is required for
    /// [`Regime::TreeObjLim`].
    pub fn solve_config(self, optimum: Option<f64>) -> Result<SolveConfig, TrainError> {
        let base = SolveConfig {
            keep_lp_solutions: false,
            ..SolveConfig::default()
        };
        Ok(match self {
            Regime::TemporalMdp => base,
            Regime::TreeDfs => SolveConfig {
                node_selection: crate::bnb::NodeSelection::DepthFirst,
                ..base
            },
            Regime::TreeObjLim => base.with_objective_limit(optimum.ok_or(TrainError::MissingOptimum)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("objective-limit training needs every instance's optimum")]
    MissingOptimum,
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("no episode could be collected for {0} consecutive epochs")]
    PersistentFailure(usize),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainInstance {
    pub instance: MilpInstance,
    /// Known optimal objective, needed for objective-limit episodes.
    pub optimum: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Evaluate every this many epochs (and after the last one).
    pub interval: usize,
    pub seeds: usize,
    /// Runs hitting this cap count as unfinished.
    pub node_limit: Option<usize>,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            interval: 10,
            seeds: 1,
            node_limit: Some(20_000),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub time_limit: Option<Duration>,
    pub entropy_bonus: f64,
    pub learning_rate: f64,
    pub sample_rate: f64,
    pub instances_per_epoch: usize,
    pub regime: Regime,
    pub seed: u64,
    pub hidden: usize,
    /// Episodes larger than this are abandoned and discarded.
    pub episode_node_limit: Option<usize>,
    /// Subtract the batch-mean return before weighting.
    pub baseline: bool,
    pub validation: ValidationConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            time_limit: None,
            entropy_bonus: 0.01,
            learning_rate: 1e-3,
            sample_rate: 0.2,
            instances_per_epoch: 10,
            regime: Regime::TreeObjLim,
            seed: 0,
            hidden: DEFAULT_HIDDEN,
            episode_node_limit: Some(20_000),
            baseline: false,
            validation: ValidationConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.entropy_bonus >= 0.0 && self.entropy_bonus.is_finite()) {
            return Err(TrainError::InvalidConfig("entropy bonus must be finite and >= 0"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::InvalidConfig("learning rate must be positive"));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate <= 1.0) {
            return Err(TrainError::InvalidConfig("sample rate must lie in (0, 1]"));
        }
        if self.instances_per_epoch == 0 || self.hidden == 0 {
            return Err(TrainError::InvalidConfig("instances per epoch and hidden size must be positive"));
        }
        if self.validation.interval == 0 || self.validation.seeds == 0 {
            return Err(TrainError::InvalidConfig("validation interval and seeds must be positive"));
        }
        if self.episode_node_limit == Some(0) {
            return Err(TrainError::InvalidConfig("episode node limit must be positive"));
        }
        Ok(())
    }
}

/// A solve to run with a particular rule.
#[derive(Debug, Clone)]
pub struct Job<'a> {
    pub instance: &'a MilpInstance,
    pub config: SolveConfig,
    pub rule: BranchRule,
}

/// Runs batches of independent solves. Results come back in job order.
pub trait Runner {
    fn run_all(&self, jobs: Vec<Job<'_>>) -> Vec<Result<SolveReport, SolveError>>;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct SerialRunner;

impl Runner for SerialRunner {
    fn run_all(&self, jobs: Vec<Job<'_>>) -> Vec<Result<SolveReport, SolveError>> {
        jobs.into_iter()
            .map(|mut job| solve(job.instance, &job.config, &mut job.rule, &NoClock))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Processed B&B nodes over all collected episodes so far.
    pub samples_cumulative: u64,
    pub episodes: usize,
    pub skipped_episodes: usize,
    pub tuples: usize,
    pub mean_episode_nodes: f64,
    pub loss: f64,
    pub entropy: f64,
    pub validation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainLog {
    /// Validation score of the initial parameters.
    pub initial_validation: Option<f64>,
    pub epochs: Vec<EpochRecord>,
}

impl TrainLog {
    /// `(samples_cumulative, validation)` at every evaluated epoch, starting
    /// with the initial parameters at zero samples.
    pub fn validation_curve(&self) -> Vec<(u64, f64)> {
        let mut curve: Vec<(u64, f64)> = self.initial_validation.map(|v| (0, v)).into_iter().collect();
        curve.extend(
            self.epochs
                .iter()
                .filter_map(|e| e.validation.map(|v| (e.samples_cumulative, v))),
        );
        curve
    }

    pub fn final_validation(&self) -> Option<f64> {
        self.epochs.iter().rev().find_map(|e| e.validation)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Parameters with the best validation score seen.
    pub best: PolicyParams,
    pub last: PolicyParams,
    pub log: TrainLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationResult {
    pub geo_mean_nodes: Option<f64>,
    pub std_pct: Option<f64>,
    /// Node counts per instance, one entry per seed; `None` for runs that
    /// did not finish.
    pub node_counts: Vec<Vec<Option<usize>>>,
    pub unfinished: usize,
}

/// Greedy policy, best-first, no objective limit, whatever the training
/// regime was.
pub fn validate<R: Runner + ?Sized>(
    params: &PolicyParams,
    instances: &[MilpInstance],
    seeds: usize,
    node_limit: Option<usize>,
    runner: &R,
) -> Result<ValidationResult, TrainError> {
    let rule = BranchRule::Learned(crate::branching::LearnedRule::new(params.clone(), PolicyMode::Greedy, 0).without_records());
    evaluate_rule(&rule, instances, seeds, node_limit, runner)
}

/// Shared by policy validation and baseline rules.
pub fn evaluate_rule<R: Runner + ?Sized>(
    rule: &BranchRule,
    instances: &[MilpInstance],
    seeds: usize,
    node_limit: Option<usize>,
    runner: &R,
) -> Result<ValidationResult, TrainError> {
    let mut jobs = Vec::with_capacity(instances.len() * seeds);
    for inst in instances {
        for seed in 0..seeds as u64 {
            let mut rule = rule.clone();
            if let BranchRule::Random(_) = rule {
                rule = BranchRule::random(seed);
            }
            jobs.push(Job {
                instance: inst,
                config: SolveConfig {
                    node_limit,
                    rng_seed: seed,
                    keep_lp_solutions: false,
                    ..SolveConfig::best_first()
                },
                rule,
            });
        }
    }
    let results = runner.run_all(jobs);
    let mut node_counts = vec![Vec::with_capacity(seeds); instances.len()];
    let mut unfinished = 0;
    for (k, res) in results.into_iter().enumerate() {
        let count = match res {
            Ok(report) if report.is_complete() => Some(report.node_count),
            Ok(_) => {
                unfinished += 1;
                None
            }
            Err(SolveError::Lp(_)) => {
                unfinished += 1;
                None
            }
            Err(e) => return Err(e.into()),
        };
        node_counts[k / seeds].push(count);
    }
    // an instance only contributes if all of its seeds finished
    let complete: Vec<&Vec<Option<usize>>> = node_counts.iter().filter(|v| v.iter().all(Option::is_some)).collect();
    let all: Vec<f64> = complete.iter().flat_map(|v| v.iter().map(|c| c.unwrap() as f64)).collect();
    let stds: Vec<f64> = complete
        .iter()
        .filter_map(|v| relative_std_pct(&v.iter().map(|c| c.unwrap() as f64).collect::<Vec<_>>()))
        .collect();
    Ok(ValidationResult {
        geo_mean_nodes: geometric_mean(&all),
        std_pct: (!stds.is_empty()).then(|| stds.iter().sum::<f64>() / stds.len() as f64),
        node_counts,
        unfinished,
    })
}

/// One (state, action, return) tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Tuple {
    pub decision: DecisionRecord,
    pub ret: f64,
}

/// Loss `−(1/n)Σ G·log π(a|s) − λ(1/n)Σ H(π(·|s))` and its gradient.
pub fn batch_loss_and_grad(params: &PolicyParams, tuples: &[Tuple], entropy_bonus: f64) -> (f64, f64, PolicyGradient) {
    let mut grad = PolicyGradient::zeros(params.hidden());
    if tuples.is_empty() {
        return (0.0, 0.0, grad);
    }
    let n = tuples.len() as f64;
    let mut loss = 0.0;
    let mut entropy = 0.0;
    for t in tuples {
        let feats = &t.decision.features;
        let fwd = policy_forward(params, feats);
        let h = fwd.entropy();
        loss -= (t.ret * fwd.log_prob(t.decision.chosen) + entropy_bonus * h) / n;
        entropy += h / n;
        accumulate_logprob(params, feats, &fwd, t.decision.chosen, -t.ret / n, &mut grad);
        if entropy_bonus != 0.0 {
            accumulate_entropy(params, feats, &fwd, -entropy_bonus / n, &mut grad);
        }
    }
    (loss, entropy, grad)
}

/// Draws `min(⌈β·|τ|⌉, #decisions)` tuples without replacement from one
/// recorded episode.
pub fn sample_tuples<R: Rng + ?Sized>(report: &SolveReport, regime: Regime, sample_rate: f64, rng: &mut R) -> Result<Vec<Tuple>, TrainError> {
    let tree = record_episode(report, RewardKind::TreeSize).map_err(|_| SolveError::InvalidConfig("incomplete episode"))?;
    let returns = if regime.uses_tree_returns() {
        tree_returns(&tree)
    } else {
        temporal_returns(&tree)
    }
    .expect("recorded episodes are valid");
    let decided: Vec<usize> = tree.non_leaves().filter(|&i| tree.nodes[i].decision.is_some()).collect();
    let want = libm::ceil(sample_rate * tree.len() as f64) as usize;
    let k = want.min(decided.len());
    Ok(sample_indices(rng, decided.len(), k)
        .into_iter()
        .map(|idx| {
            let i = decided[idx];
            Tuple {
                decision: tree.nodes[i].decision.clone().expect("filtered"),
                ret: returns[i],
            }
        })
        .collect())
}

const MAX_EMPTY_EPOCHS: usize = 5;

/// REINFORCE with entropy bonus. Keeps the parameters that scored best on
/// `valid`; with an empty validation set the last parameters are returned
/// as best.
pub fn train_reinforce<R: Runner + ?Sized, C: Clock + ?Sized>(
    train_set: &[TrainInstance],
    valid: &[MilpInstance],
    cfg: &TrainConfig,
    runner: &R,
    clock: &C,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(TrainError::EmptyTrainSet);
    }
    if cfg.regime == Regime::TreeObjLim && train_set.iter().any(|t| t.optimum.is_none()) {
        return Err(TrainError::MissingOptimum);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = PolicyParams::random(cfg.hidden, &mut rng);
    let started = clock.elapsed();

    let run_validation = |params: &PolicyParams| -> Result<Option<f64>, TrainError> {
        if valid.is_empty() {
            return Ok(None);
        }
        Ok(validate(params, valid, cfg.validation.seeds, cfg.validation.node_limit, runner)?.geo_mean_nodes)
    };
    let mut log = TrainLog {
        initial_validation: run_validation(&params)?,
        epochs: Vec::new(),
    };
    let mut best = (log.initial_validation.unwrap_or(f64::INFINITY), params.clone());
    let mut samples = 0u64;
    let mut empty_streak = 0;

    for epoch in 0..cfg.epochs {
        if cfg.time_limit.is_some_and(|z| clock.elapsed().saturating_sub(started) > z) {
            break;
        }
        let jobs: Vec<Job<'_>> = (0..cfg.instances_per_epoch)
            .map(|_| {
                let t = &train_set[rng.gen_range(0..train_set.len())];
                let mut config = cfg.regime.solve_config(t.optimum)?;
                config.node_limit = cfg.episode_node_limit;
                Ok(Job {
                    instance: &t.instance,
                    config,
                    rule: BranchRule::stochastic(params.clone(), rng.gen()),
                })
            })
            .collect::<Result<_, TrainError>>()?;
        let results = runner.run_all(jobs);

        let mut tuples = Vec::new();
        let mut episodes = 0;
        let mut skipped = 0;
        let mut nodes = 0u64;
        for res in results {
            match res {
                Ok(report) if report.is_complete() && report.status != SolveStatus::NodeLimitReached => {
                    episodes += 1;
                    nodes += report.node_count as u64;
                    tuples.extend(sample_tuples(&report, cfg.regime, cfg.sample_rate, &mut rng)?);
                }
                Ok(_) | Err(SolveError::Lp(LpError::NumericalBreakdown { .. })) => skipped += 1,
                Err(e) => return Err(e.into()),
            }
        }
        if episodes == 0 {
            empty_streak += 1;
            if empty_streak >= MAX_EMPTY_EPOCHS {
                return Err(TrainError::PersistentFailure(empty_streak));
            }
        } else {
            empty_streak = 0;
        }
        samples += nodes;

        if cfg.baseline && !tuples.is_empty() {
            let mean = tuples.iter().map(|t| t.ret).sum::<f64>() / tuples.len() as f64;
            tuples.iter_mut().for_each(|t| t.ret -= mean);
        }
        let (loss, entropy, grad) = batch_loss_and_grad(&params, &tuples, cfg.entropy_bonus);
        params.apply(&grad, -cfg.learning_rate);

        let is_eval = (epoch + 1) % cfg.validation.interval == 0 || epoch + 1 == cfg.epochs;
        let validation = if is_eval { run_validation(&params)? } else { None };
        if let Some(v) = validation {
            if v < best.0 {
                best = (v, params.clone());
            }
        }
        let record = EpochRecord {
            epoch,
            samples_cumulative: samples,
            episodes,
            skipped_episodes: skipped,
            tuples: tuples.len(),
            mean_episode_nodes: if episodes > 0 { nodes as f64 / episodes as f64 } else { 0.0 },
            loss,
            entropy,
            validation,
        };
        on_epoch(&record);
        log.epochs.push(record);
    }
    let best = if valid.is_empty() { params.clone() } else { best.1 };
    Ok(TrainOutcome { best, last: params, log })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImitationConfig {
    /// Nodes per instance at which collection stops.
    pub node_cap_per_instance: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch: usize,
    pub seed: u64,
    pub hidden: usize,
}

impl Default for ImitationConfig {
    fn default() -> Self {
        ImitationConfig {
            node_cap_per_instance: 200,
            epochs: 30,
            learning_rate: 1e-2,
            batch: 32,
            seed: 0,
            hidden: DEFAULT_HIDDEN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImitationLog {
    pub samples: usize,
    /// Mean cross-entropy per epoch, starting with the initial parameters.
    pub cross_entropy: Vec<f64>,
}

/// Strong branching that records features and its own choice.
struct LabelCollector {
    samples: Vec<DecisionRecord>,
}

impl Brancher for LabelCollector {
    fn select(&mut self, ctx: &BranchContext<'_>) -> Result<BranchDecision, LpError> {
        let labels = strong_branching_labels(ctx)?;
        let chosen = best_label(&labels);
        self.samples.push(DecisionRecord {
            features: featurize(ctx),
            chosen,
        });
        Ok(BranchDecision::plain(chosen))
    }
}

/// Solves each instance with strong branching (capped) and returns the
/// (features, expert choice) pairs seen along the way.
pub fn collect_imitation_data(instances: &[MilpInstance], node_cap: usize) -> Result<Vec<DecisionRecord>, TrainError> {
    if node_cap == 0 {
        return Err(TrainError::InvalidConfig("node cap must be positive"));
    }
    let mut collector = LabelCollector { samples: Vec::new() };
    for inst in instances {
        let cfg = SolveConfig {
            node_limit: Some(node_cap),
            keep_lp_solutions: false,
            ..SolveConfig::best_first()
        };
        match solve(inst, &cfg, &mut collector, &NoClock) {
            Ok(_) | Err(SolveError::Lp(LpError::NumericalBreakdown { .. })) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(collector.samples)
}

/// Mean `−log π(label)` over `data`.
pub fn cross_entropy(params: &PolicyParams, data: &[DecisionRecord]) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    data.iter()
        .map(|d| -policy_forward(params, &d.features).log_prob(d.chosen).max(libm::log(PROB_FLOOR)))
        .sum::<f64>()
        / data.len() as f64
}

/// Share of samples where the greedy choice equals the label.
pub fn greedy_accuracy(params: &PolicyParams, data: &[DecisionRecord]) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let hits = data
        .iter()
        .filter(|d| greedy_action(&policy_forward(params, &d.features).logits) == d.chosen)
        .count();
    hits as f64 / data.len() as f64
}

/// Minimises cross-entropy with Adam on shuffled mini-batches.
pub fn fit_imitation(data: &[DecisionRecord], cfg: &ImitationConfig, init: PolicyParams) -> Result<(PolicyParams, ImitationLog), TrainError> {
    if cfg.batch == 0 || !(cfg.learning_rate > 0.0) {
        return Err(TrainError::InvalidConfig("batch and learning rate must be positive"));
    }
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut params = init;
    let dim = params.as_slice().len();
    let (mut m, mut v) = (vec![0.0; dim], vec![0.0; dim]);
    let mut step = 0i32;
    let mut log = ImitationLog {
        samples: data.len(),
        cross_entropy: vec![cross_entropy(&params, data)],
    };
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..cfg.epochs {
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        for chunk in order.chunks(cfg.batch) {
            let mut grad = PolicyGradient::zeros(params.hidden());
            let scale = -1.0 / chunk.len() as f64;
            for &i in chunk {
                let d = &data[i];
                let fwd = policy_forward(&params, &d.features);
                accumulate_logprob(&params, &d.features, &fwd, d.chosen, scale, &mut grad);
            }
            step += 1;
            let (c1, c2) = (1.0 - libm::pow(BETA1, step as f64), 1.0 - libm::pow(BETA2, step as f64));
            let theta = params.as_mut_slice();
            for k in 0..dim {
                let g = grad.as_slice()[k];
                m[k] = BETA1 * m[k] + (1.0 - BETA1) * g;
                v[k] = BETA2 * v[k] + (1.0 - BETA2) * g * g;
                theta[k] -= cfg.learning_rate * (m[k] / c1) / (libm::sqrt(v[k] / c2) + EPS);
            }
        }
        log.cross_entropy.push(cross_entropy(&params, data));
    }
    Ok((params, log))
}

/// Collects strong-branching labels on `instances` and fits a policy to them.
pub fn train_imitation(instances: &[MilpInstance], cfg: &ImitationConfig) -> Result<(PolicyParams, ImitationLog), TrainError> {
    let data = collect_imitation_data(instances, cfg.node_cap_per_instance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = PolicyParams::random(cfg.hidden, &mut rng);
    fit_imitation(&data, cfg, init)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{generate, FamilyKind, GenConfig};
    use crate::policy::{FeatureVector, FEATURE_DIM};

    #[test]
    fn regimes_differ_only_where_expected() {
        let mdp = Regime::TemporalMdp.solve_config(Some(3.0)).unwrap();
        let dfs = Regime::TreeDfs.solve_config(Some(3.0)).unwrap();
        let obj = Regime::TreeObjLim.solve_config(Some(3.0)).unwrap();
        assert_eq!(SolveConfig { node_selection: mdp.node_selection, ..dfs.clone() }, mdp);
        assert_eq!(SolveConfig { objective_limit: None, ..obj.clone() }, mdp);
        assert_ne!(dfs.node_selection, mdp.node_selection);
        assert_eq!(obj.objective_limit, Some(3.0));
        assert!(!Regime::TemporalMdp.uses_tree_returns());
        assert_eq!(Regime::TreeObjLim.solve_config(None), Err(TrainError::MissingOptimum));
    }

    #[test]
    fn zero_params_two_candidates_cross_entropy_is_ln2() {
        let data = vec![DecisionRecord {
            features: vec![[0.3; FEATURE_DIM], [0.7; FEATURE_DIM]],
            chosen: 1,
        }];
        let ce = cross_entropy(&PolicyParams::zeros(DEFAULT_HIDDEN), &data);
        assert!((ce - libm::log(2.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_epochs_keep_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let init = PolicyParams::random(8, &mut rng);
        let cfg = ImitationConfig {
            epochs: 0,
            ..ImitationConfig::default()
        };
        let (p, _) = fit_imitation(&[], &cfg, init.clone()).unwrap();
        assert_eq!(p, init);
    }

    #[test]
    fn separable_labels_are_learned() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut make = |n: usize| -> Vec<DecisionRecord> {
            (0..n)
                .map(|_| {
                    // feature 3 is high on the labelled candidate and low elsewhere
                    let k = rng.gen_range(2..6);
                    let chosen = rng.gen_range(0..k);
                    let features: Vec<FeatureVector> = (0..k)
                        .map(|j| {
                            let mut phi = [0.0; FEATURE_DIM];
                            phi.iter_mut().for_each(|x| *x = rng.gen_range(0.0..1.0));
                            phi[3] = if j == chosen { rng.gen_range(0.6..1.0) } else { rng.gen_range(0.0..0.4) };
                            phi
                        })
                        .collect();
                    DecisionRecord { features, chosen }
                })
                .collect()
        };
        let (train, held_out) = (make(2000), make(500));
        let cfg = ImitationConfig {
            epochs: 60,
            hidden: 8,
            ..ImitationConfig::default()
        };
        let init = PolicyParams::random(8, &mut ChaCha8Rng::seed_from_u64(3));
        let (p, log) = fit_imitation(&train, &cfg, init).unwrap();
        assert!(log.cross_entropy.last().unwrap() < &log.cross_entropy[0]);
        let acc = greedy_accuracy(&p, &held_out);
        assert!(acc >= 0.99, "accuracy {acc}");
    }

    #[test]
    fn deterministic_greedy_validation_has_zero_spread() {
        let inst = generate(&GenConfig {
            family: FamilyKind::SetCover.enumerable(),
            seed: 4,
        })
        .unwrap();
        let params = PolicyParams::random(8, &mut ChaCha8Rng::seed_from_u64(5));
        let res = validate(&params, &[inst], 5, None, &SerialRunner).unwrap();
        assert_eq!(res.std_pct, Some(0.0));
        assert_eq!(res.unfinished, 0);
    }

    #[test]
    fn training_is_reproducible_and_counts_samples() {
        let train: Vec<TrainInstance> = (0..3)
            .map(|s| TrainInstance {
                instance: generate(&GenConfig {
                    family: FamilyKind::SetCover.enumerable(),
                    seed: s,
                })
                .unwrap(),
                optimum: None,
            })
            .collect();
        let cfg = TrainConfig {
            epochs: 4,
            instances_per_epoch: 3,
            regime: Regime::TreeDfs,
            hidden: 8,
            validation: ValidationConfig {
                interval: 2,
                ..ValidationConfig::default()
            },
            ..TrainConfig::default()
        };
        let valid = vec![train[0].instance.clone()];
        let a = train_reinforce(&train, &valid, &cfg, &SerialRunner, &NoClock, |_| {}).unwrap();
        let b = train_reinforce(&train, &valid, &cfg, &SerialRunner, &NoClock, |_| {}).unwrap();
        assert_eq!(a.log, b.log);
        assert_eq!(a.last, b.last);
        let mut prev = 0;
        for e in &a.log.epochs {
            assert!(e.samples_cumulative >= prev);
            prev = e.samples_cumulative;
        }
        assert!(a.log.epochs[1].validation.is_some());
        assert!(a.log.initial_validation.is_some());
    }
}
