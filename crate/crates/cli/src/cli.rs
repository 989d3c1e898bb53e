//! Argument parsing and subcommand implementations.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use branchlearn_core::bnb::{NodeSelection, SolveConfig, SolveStatus};
use branchlearn_core::branching::BranchRule;
use branchlearn_core::gen::{generate, Family, FamilyKind, GenConfig};
use branchlearn_core::milp::MilpInstance;
use branchlearn_core::policy::DEFAULT_HIDDEN;
use branchlearn_core::solve;
use branchlearn_core::train::{
    train_imitation, train_reinforce, EpochRecord, ImitationConfig, Regime, TrainConfig, TrainInstance, ValidationConfig,
};
use branchlearn_core::tree::{gradient_suite, SuiteConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::evaluate::{evaluate, markdown_table, write_runs_csv, write_summary_csv, EvalConfig, Method, MethodSpec, RuleSpec};
use crate::io::{self, Manifest, ManifestEntry, MANIFEST_FORMAT};
use crate::replay::{replay, EpisodeDump, ReplayOutcome};
use crate::runner::{RayonRunner, WallClock};

#[derive(Debug, Parser)]
#[command(name = "branchlearn", version, about = "Branch-and-bound MILP solving and learned branching policies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a directory of benchmark instances plus a manifest.
    Generate(GenerateArgs),
    /// Solve one instance and write a deterministic report.
    Solve(SolveArgs),
    /// Solve every manifest instance to optimality and store the optima.
    PresolveOptima(PresolveArgs),
    /// Train a branching policy with REINFORCE.
    Train(TrainArgs),
    /// Fit a branching policy to strong-branching decisions.
    Imitate(ImitateArgs),
    /// Compare branching rules over an instance directory.
    Evaluate(EvaluateArgs),
    /// Check the Monte-Carlo policy gradients against exact gradients on
    /// synthetic tree MDPs.
    ValidateGradient(GradientArgs),
    /// Re-solve an instance following a recorded episode.
    ReplayEpisode(ReplayArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SizePreset {
    /// Small enough for brute-force enumeration.
    Enumerable,
    /// Trainable in minutes.
    Desk,
    /// The large benchmark sizes.
    Full,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// comb-auction, set-cover, max-indep-set, facility-loc or multi-knapsack.
    #[arg(long)]
    pub family: String,
    #[arg(long, value_enum, default_value = "desk")]
    pub size: SizePreset,
    /// Explicit sizes `A,B` in the family's parameter order; overrides --size.
    #[arg(long, value_parser = parse_dims)]
    pub dims: Option<(usize, usize)>,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Seed of the first instance; instance k uses seed + k.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Selection {
    BestFirst,
    Dfs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// random, strong, pseudocost, policy:<file> or policy-sample:<file>.
    #[arg(long, default_value = "pseudocost")]
    pub brancher: MethodSpec,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "best-first")]
    pub node_selection: Selection,
    #[arg(long, allow_hyphen_values = true)]
    pub objective_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// Seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// JSON report; contains no timing so repeated runs are identical.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dump the episode tree for `replay-episode`.
    #[arg(long)]
    pub episode: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PresolveArgs {
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long, default_value = "pseudocost")]
    pub brancher: MethodSpec,
    /// Seconds per instance.
    #[arg(long)]
    pub time_limit: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RegimeArg {
    Mdp,
    TmdpDfs,
    TmdpObjlim,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Mdp => Regime::TemporalMdp,
            RegimeArg::TmdpDfs => Regime::TreeDfs,
            RegimeArg::TmdpObjlim => Regime::TreeObjLim,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value = "tmdp-objlim")]
    pub regime: RegimeArg,
    #[arg(long)]
    pub train_dir: PathBuf,
    #[arg(long)]
    pub valid_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Seconds of training before stopping early.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub entropy: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.2)]
    pub sample_rate: f64,
    #[arg(long, default_value_t = 10)]
    pub instances_per_epoch: usize,
    #[arg(long, default_value_t = DEFAULT_HIDDEN)]
    pub hidden: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20_000)]
    pub episode_node_limit: usize,
    #[arg(long, default_value_t = 10)]
    pub eval_interval: usize,
    #[arg(long, default_value_t = 1)]
    pub eval_seeds: usize,
    /// Subtract the batch-mean return.
    #[arg(long)]
    pub baseline: bool,
    /// Best-validation parameters.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImitateArgs {
    #[arg(long)]
    pub train_dir: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub node_cap: usize,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = DEFAULT_HIDDEN)]
    pub hidden: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub dir: PathBuf,
    /// Repeatable; `[label=]random|strong|pseudocost|policy:<file>|policy-sample:<file>`.
    #[arg(long = "method", required = true)]
    pub methods: Vec<MethodSpec>,
    #[arg(long, default_value_t = 5)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seconds per solve.
    #[arg(long, default_value_t = 60.0)]
    pub time_limit: f64,
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// Per-run CSV.
    #[arg(long)]
    pub runs: Option<PathBuf>,
    /// Per-method CSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Markdown table; printed to stdout as well.
    #[arg(long)]
    pub markdown: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradientArgs {
    #[arg(long, default_value_t = 20)]
    pub mdps: usize,
    #[arg(long, default_value_t = 200_000)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub episode: PathBuf,
    #[arg(long)]
    pub instance: PathBuf,
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("expected two sizes `A,B`, got {s:?}");
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn seconds(v: Option<f64>) -> anyhow::Result<Option<Duration>> {
    v.map(|s| Duration::try_from_secs_f64(s).with_context(|| format!("invalid duration {s}")))
        .transpose()
}

/// Parses `argv` and runs the command. Errors go to stderr.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

pub fn dispatch(cmd: Command) -> anyhow::Result<ExitCode> {
    match cmd {
        Command::Generate(a) => cmd_generate(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::PresolveOptima(a) => cmd_presolve(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Imitate(a) => cmd_imitate(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::ValidateGradient(a) => cmd_gradient(&a),
        Command::ReplayEpisode(a) => cmd_replay(&a),
    }
}

fn cmd_generate(a: &GenerateArgs) -> anyhow::Result<ExitCode> {
    let kind = FamilyKind::from_name(&a.family).with_context(|| format!("unknown family {:?}", a.family))?;
    let family = match (&a.dims, a.size) {
        (Some((x, y)), _) => Family::with_sizes(kind, *x, *y),
        (None, SizePreset::Enumerable) => kind.enumerable(),
        (None, SizePreset::Desk) => kind.desk(),
        (None, SizePreset::Full) => kind.full_scale(),
    };
    let mut entries = Vec::with_capacity(a.count);
    for k in 0..a.count as u64 {
        let seed = a.seed + k;
        let inst = generate(&GenConfig { family, seed })?;
        let file = format!("{}-{seed:05}.json", kind.name());
        io::write_instance(&a.out.join(&file), &inst)?;
        entries.push(ManifestEntry { file, seed, optimum: None });
    }
    io::write_manifest(
        &a.out,
        &Manifest {
            format: MANIFEST_FORMAT,
            generator: GenConfig { family, seed: a.seed },
            instances: entries,
        },
    )?;
    println!("wrote {} {} instances to {}", a.count, kind.name(), a.out.display());
    Ok(ExitCode::SUCCESS)
}

/// What `solve --out` writes.
#[derive(Debug, Serialize)]
struct SolveSummary<'a> {
    instance: &'a str,
    brancher: &'a str,
    status: SolveStatus,
    #[serde(with = "branchlearn_core::float::option")]
    objective: Option<f64>,
    node_count: usize,
    #[serde(with = "branchlearn_core::float::scalar")]
    glb: f64,
    #[serde(with = "branchlearn_core::float::scalar")]
    gub: f64,
    incumbent: Option<&'a [f64]>,
    config: &'a SolveConfig,
}

fn rule_for(spec: &MethodSpec, seed: u64) -> anyhow::Result<BranchRule> {
    Ok(match &spec.rule {
        RuleSpec::Random => BranchRule::random(seed),
        RuleSpec::Strong => BranchRule::strong(),
        RuleSpec::Pseudocost => BranchRule::pseudocost(),
        RuleSpec::Policy(p) => BranchRule::greedy(io::load_policy(p)?),
        RuleSpec::PolicySample(p) => BranchRule::stochastic(io::load_policy(p)?, seed),
    })
}

fn cmd_solve(a: &SolveArgs) -> anyhow::Result<ExitCode> {
    let inst = io::read_instance(&a.instance)?;
    let mut rule = rule_for(&a.brancher, a.seed)?;
    let cfg = SolveConfig {
        node_selection: match a.node_selection {
            Selection::BestFirst => NodeSelection::BestFirst,
            Selection::Dfs => NodeSelection::DepthFirst,
        },
        objective_limit: a.objective_limit,
        node_limit: a.node_limit,
        time_limit: seconds(a.time_limit)?,
        rng_seed: a.seed,
        keep_lp_solutions: false,
        ..SolveConfig::best_first()
    };
    let report = solve(&inst, &cfg, &mut rule, &WallClock::start())?;
    println!(
        "{}: {:?} objective {} nodes {} ({:.3}s)",
        inst.name,
        report.status,
        report.objective.map_or_else(|| "none".into(), |o| format!("{o}")),
        report.node_count,
        report.wall_time.as_secs_f64()
    );
    if let Some(out) = &a.out {
        io::write_json(
            out,
            &SolveSummary {
                instance: &inst.name,
                brancher: &a.brancher.label,
                status: report.status,
                objective: report.objective,
                node_count: report.node_count,
                glb: report.glb,
                gub: report.gub,
                incumbent: report.incumbent.as_ref().map(|s| s.x.as_slice()),
                config: &report.config,
            },
        )?;
    }
    if let Some(path) = &a.episode {
        let dump = EpisodeDump::from_report(&report).context("only finished solves can be dumped as episodes")?;
        io::write_json(path, &dump)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_presolve(a: &PresolveArgs) -> anyhow::Result<ExitCode> {
    let mut manifest = io::read_manifest(&a.dir)?;
    let instances: Vec<MilpInstance> = manifest
        .instances
        .iter()
        .map(|e| io::read_instance(&a.dir.join(&e.file)))
        .collect::<Result<_, _>>()?;
    let runner = RayonRunner::from_env()?;
    let cfg = SolveConfig {
        time_limit: seconds(a.time_limit)?,
        keep_lp_solutions: false,
        ..SolveConfig::best_first()
    };
    let jobs = instances
        .iter()
        .enumerate()
        .map(|(k, inst)| {
            Ok(branchlearn_core::train::Job {
                instance: inst,
                config: cfg.clone(),
                rule: rule_for(&a.brancher, k as u64)?,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    use branchlearn_core::train::Runner;
    let results = runner.run_all(jobs);
    for (entry, res) in manifest.instances.iter_mut().zip(results) {
        let report = res.with_context(|| entry.file.clone())?;
        if report.status != SolveStatus::Optimal {
            bail!("{}: not solved to optimality ({:?})", entry.file, report.status);
        }
        entry.optimum = report.objective;
    }
    io::write_manifest(&a.dir, &manifest)?;
    println!("stored {} optima in {}", manifest.instances.len(), a.dir.join(io::MANIFEST_NAME).display());
    Ok(ExitCode::SUCCESS)
}

/// Instances of `dir` with manifest optima attached where known.
pub fn load_train_set(dir: &Path) -> anyhow::Result<Vec<TrainInstance>> {
    let manifest = io::read_manifest(dir).ok();
    let files = io::list_instances(dir)?;
    if files.is_empty() {
        bail!("no instances in {}", dir.display());
    }
    files
        .iter()
        .map(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            let optimum = manifest
                .as_ref()
                .and_then(|m| m.instances.iter().find(|e| e.file == name))
                .and_then(|e| e.optimum);
            Ok(TrainInstance {
                instance: io::read_instance(p)?,
                optimum,
            })
        })
        .collect()
}

/// Column layout of the training log CSV. The first row (empty `epoch`)
/// holds the initial validation score.
#[derive(Debug, Serialize)]
pub struct TrainLogRow {
    pub schema: &'static str,
    pub epoch: Option<usize>,
    pub samples_cumulative: u64,
    pub episodes: usize,
    pub skipped_episodes: usize,
    pub tuples: usize,
    pub mean_episode_nodes: Option<f64>,
    pub loss: Option<f64>,
    pub entropy: Option<f64>,
    pub validation: Option<f64>,
}

pub const TRAIN_LOG_SCHEMA: &str = "train-v1";

impl From<&EpochRecord> for TrainLogRow {
    fn from(e: &EpochRecord) -> Self {
        TrainLogRow {
            schema: TRAIN_LOG_SCHEMA,
            epoch: Some(e.epoch),
            samples_cumulative: e.samples_cumulative,
            episodes: e.episodes,
            skipped_episodes: e.skipped_episodes,
            tuples: e.tuples,
            mean_episode_nodes: Some(e.mean_episode_nodes),
            loss: Some(e.loss),
            entropy: Some(e.entropy),
            validation: e.validation,
        }
    }
}

fn cmd_train(a: &TrainArgs) -> anyhow::Result<ExitCode> {
    let train = load_train_set(&a.train_dir)?;
    let valid = match &a.valid_dir {
        Some(d) => io::read_instance_dir(d)?,
        None => Vec::new(),
    };
    let cfg = TrainConfig {
        epochs: a.epochs,
        time_limit: seconds(a.time_limit)?,
        entropy_bonus: a.entropy,
        learning_rate: a.lr,
        sample_rate: a.sample_rate,
        instances_per_epoch: a.instances_per_epoch,
        regime: a.regime.into(),
        seed: a.seed,
        hidden: a.hidden,
        episode_node_limit: Some(a.episode_node_limit),
        baseline: a.baseline,
        validation: ValidationConfig {
            interval: a.eval_interval,
            seeds: a.eval_seeds,
            ..ValidationConfig::default()
        },
    };
    if cfg.regime == Regime::TreeObjLim && train.iter().any(|t| t.optimum.is_none()) {
        bail!("{} regime needs optima; run presolve-optima on {} first", cfg.regime.name(), a.train_dir.display());
    }
    let runner = RayonRunner::from_env()?;
    let outcome = train_reinforce(&train, &valid, &cfg, &runner, &WallClock::start(), |e| {
        if let Some(v) = e.validation {
            eprintln!(
                "epoch {:>4}  samples {:>8}  loss {:>10.3}  entropy {:.3}  validation {v:.1}",
                e.epoch, e.samples_cumulative, e.loss, e.entropy
            );
        }
    })?;
    io::save_policy(&a.out, &outcome.best)?;
    if let Some(path) = &a.log {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.serialize(TrainLogRow {
            schema: TRAIN_LOG_SCHEMA,
            epoch: None,
            samples_cumulative: 0,
            episodes: 0,
            skipped_episodes: 0,
            tuples: 0,
            mean_episode_nodes: None,
            loss: None,
            entropy: None,
            validation: outcome.log.initial_validation,
        })?;
        for e in &outcome.log.epochs {
            w.serialize(TrainLogRow::from(e))?;
        }
        w.flush()?;
    }
    println!(
        "trained {} epochs ({}); validation {:?} -> {:?}; policy in {}",
        outcome.log.epochs.len(),
        cfg.regime.name(),
        outcome.log.initial_validation,
        outcome.log.final_validation(),
        a.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_imitate(a: &ImitateArgs) -> anyhow::Result<ExitCode> {
    let instances = io::read_instance_dir(&a.train_dir)?;
    if instances.is_empty() {
        bail!("no instances in {}", a.train_dir.display());
    }
    let cfg = ImitationConfig {
        node_cap_per_instance: a.node_cap,
        epochs: a.epochs,
        learning_rate: a.lr,
        batch: a.batch,
        seed: a.seed,
        hidden: a.hidden,
    };
    let (params, log) = train_imitation(&instances, &cfg)?;
    io::save_policy(&a.out, &params)?;
    if let Some(path) = &a.log {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["schema", "epoch", "cross_entropy"])?;
        for (k, ce) in log.cross_entropy.iter().enumerate() {
            w.write_record(["imitate-v1", &k.to_string(), &ce.to_string()])?;
        }
        w.flush()?;
    }
    println!(
        "fitted on {} samples; cross-entropy {:?} -> {:?}; policy in {}",
        log.samples,
        log.cross_entropy.first(),
        log.cross_entropy.last(),
        a.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_evaluate(a: &EvaluateArgs) -> anyhow::Result<ExitCode> {
    let instances = io::read_instance_dir(&a.dir)?;
    let methods = a.methods.iter().map(Method::load).collect::<anyhow::Result<Vec<_>>>()?;
    let cfg = EvalConfig {
        seeds: a.seeds,
        seed: a.seed,
        time_limit: seconds(Some(a.time_limit))?,
        node_limit: a.node_limit,
    };
    let report = evaluate(&methods, &instances, &cfg, &RayonRunner::from_env()?)?;
    if let Some(p) = &a.runs {
        write_runs_csv(p, &report.records)?;
    }
    if let Some(p) = &a.summary {
        write_summary_csv(p, &report.summary)?;
    }
    let table = markdown_table(&report.summary);
    if let Some(p) = &a.markdown {
        std::fs::write(p, &table).with_context(|| format!("writing {}", p.display()))?;
    }
    print!("{table}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_gradient(a: &GradientArgs) -> anyhow::Result<ExitCode> {
    let cfg = SuiteConfig {
        mdps: a.mdps,
        episodes: a.episodes,
        seed: a.seed,
        ..SuiteConfig::default()
    };
    let checks = gradient_suite(&cfg, |c| {
        println!(
            "mdp {:>2} depth {} {:<10} rel_l2 {:.4} max_z {:.2} se_violations {}/{}  {}",
            c.mdp,
            c.depth,
            format!("{:?}", c.estimator),
            c.rel_l2,
            c.max_z,
            c.se_violations,
            c.components,
            if c.passed { "pass" } else { "FAIL" }
        );
    })?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!(
        "{} of {} checks passed (tolerance: rel_l2 <= {}, |error| <= {} se)",
        checks.len() - failed,
        checks.len(),
        cfg.rel_l2_tol,
        cfg.z_tol
    );
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_replay(a: &ReplayArgs) -> anyhow::Result<ExitCode> {
    let dump: EpisodeDump = io::read_json(&a.episode)?;
    if dump.format != crate::replay::EPISODE_FORMAT {
        bail!("{}: unsupported episode format {}", a.episode.display(), dump.format);
    }
    let inst = io::read_instance(&a.instance)?;
    if inst.name != dump.instance_name {
        bail!("episode was recorded on {:?}, not {:?}", dump.instance_name, inst.name);
    }
    match replay(&inst, &dump)? {
        ReplayOutcome::Identical { nodes } => {
            println!("replay identical: {nodes} nodes");
            Ok(ExitCode::SUCCESS)
        }
        ReplayOutcome::Diverged { node, detail } => {
            if node == usize::MAX {
                println!("replay diverged: {detail}");
            } else {
                println!("replay diverged at node {node}: {detail}");
            }
            Ok(ExitCode::FAILURE)
        }
    }
}
