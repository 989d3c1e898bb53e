//! Evaluation harness: method specs, cross-product runs, CSV and Markdown
//! reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use anyhow::{bail, Context};
use branchlearn_core::bnb::{SolveConfig, SolveError, SolveStatus};
use branchlearn_core::branching::BranchRule;
use branchlearn_core::eval::{aggregate, EvalSummary, RunRecord, RunStatus};
use branchlearn_core::milp::MilpInstance;
use branchlearn_core::policy::PolicyParams;
use branchlearn_core::train::{Job, Runner};
use serde::Serialize;

use crate::io::load_policy;

/// Version tag written in the `schema` column of run CSVs.
pub const RUNS_SCHEMA: &str = "runs-v1";
pub const SUMMARY_SCHEMA: &str = "summary-v1";

/// Label used for the pseudocost rule in all reports.
pub const PSEUDOCOST_LABEL: &str = "pseudocost (reliability)";

#[derive(Debug, Clone, PartialEq)]
pub enum RuleSpec {
    Random,
    Strong,
    Pseudocost,
    /// Greedy (argmax) learned policy.
    Policy(PathBuf),
    /// Learned policy sampling from its softmax.
    PolicySample(PathBuf),
}

/// A rule spec with the label it is reported under.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub label: String,
    pub rule: RuleSpec,
}

impl FromStr for MethodSpec {
    type Err = anyhow::Error;

    /// `[label=]random|strong|pseudocost|policy:<file>|policy-sample:<file>`
    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (label, body) = match s.split_once('=') {
            Some((l, b)) if !l.contains(':') => (Some(l.trim().to_owned()), b),
            _ => (None, s),
        };
        let rule = match body.split_once(':') {
            None => match body {
                "random" => RuleSpec::Random,
                "strong" => RuleSpec::Strong,
                "pseudocost" => RuleSpec::Pseudocost,
                _ => bail!("unknown method {body:?}; expected random, strong, pseudocost, policy:<file> or policy-sample:<file>"),
            },
            Some(("policy", p)) => RuleSpec::Policy(p.into()),
            Some(("policy-sample", p)) => RuleSpec::PolicySample(p.into()),
            Some((kind, _)) => bail!("unknown method kind {kind:?}"),
        };
        let label = label.unwrap_or_else(|| match &rule {
            RuleSpec::Random => "random".into(),
            RuleSpec::Strong => "strong".into(),
            RuleSpec::Pseudocost => PSEUDOCOST_LABEL.into(),
            RuleSpec::Policy(p) | RuleSpec::PolicySample(p) => p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()),
        });
        if label.is_empty() {
            bail!("empty method label in {s:?}");
        }
        Ok(MethodSpec { label, rule })
    }
}

/// A method ready to run, with any policy file already loaded.
#[derive(Debug, Clone)]
pub struct Method {
    pub label: String,
    kind: MethodKind,
}

#[derive(Debug, Clone)]
enum MethodKind {
    Random,
    Strong,
    Pseudocost,
    Policy(PolicyParams, bool),
}

impl Method {
    pub fn load(spec: &MethodSpec) -> anyhow::Result<Self> {
        let kind = match &spec.rule {
            RuleSpec::Random => MethodKind::Random,
            RuleSpec::Strong => MethodKind::Strong,
            RuleSpec::Pseudocost => MethodKind::Pseudocost,
            RuleSpec::Policy(p) => MethodKind::Policy(load_policy(p)?, false),
            RuleSpec::PolicySample(p) => MethodKind::Policy(load_policy(p)?, true),
        };
        Ok(Method {
            label: spec.label.clone(),
            kind,
        })
    }

    /// The rule for one run. Every source of randomness is derived from
    /// `run_seed`.
    fn rule(&self, run_seed: u64) -> BranchRule {
        match &self.kind {
            MethodKind::Random => BranchRule::random(run_seed),
            MethodKind::Strong => BranchRule::strong(),
            MethodKind::Pseudocost => BranchRule::pseudocost(),
            MethodKind::Policy(p, true) => BranchRule::stochastic(p.clone(), run_seed),
            MethodKind::Policy(p, false) => BranchRule::greedy(p.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub seeds: usize,
    /// Master seed; run `k` uses `seed + k`.
    pub seed: u64,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            seeds: 5,
            seed: 0,
            time_limit: Some(Duration::from_secs(60)),
            node_limit: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub records: Vec<RunRecord>,
    pub summary: EvalSummary,
}

/// Runs every method on every instance under every seed.
pub fn evaluate<R: Runner + ?Sized>(methods: &[Method], instances: &[MilpInstance], cfg: &EvalConfig, runner: &R) -> anyhow::Result<EvalReport> {
    if instances.is_empty() {
        bail!("no instances to evaluate");
    }
    if methods.is_empty() {
        bail!("no methods to evaluate");
    }
    let mut labels: Vec<String> = methods.iter().map(|m| m.label.clone()).collect();
    labels.sort();
    labels.dedup();
    if labels.len() != methods.len() {
        bail!("method labels must be distinct");
    }
    let mut keys = Vec::new();
    let mut jobs = Vec::new();
    for inst in instances {
        for k in 0..cfg.seeds as u64 {
            let run_seed = cfg.seed.wrapping_add(k);
            for m in methods {
                keys.push((inst.name.clone(), run_seed, m.label.clone()));
                jobs.push(Job {
                    instance: inst,
                    config: SolveConfig {
                        rng_seed: run_seed,
                        time_limit: cfg.time_limit,
                        node_limit: cfg.node_limit,
                        keep_lp_solutions: false,
                        ..SolveConfig::best_first()
                    },
                    rule: m.rule(run_seed),
                });
            }
        }
    }
    let results = runner.run_all(jobs);
    let records: Vec<RunRecord> = keys
        .into_iter()
        .zip(results)
        .map(|((instance, seed, method), res)| {
            let (node_count, wall_time_secs, status) = match res {
                Ok(r) => {
                    let status = match r.status {
                        SolveStatus::Optimal | SolveStatus::Infeasible => RunStatus::Finished,
                        SolveStatus::NodeLimitReached | SolveStatus::TimeLimitReached => RunStatus::TimedOut,
                    };
                    (r.node_count, r.wall_time.as_secs_f64(), status)
                }
                Err(SolveError::Lp(_)) | Err(SolveError::Unbounded) => (0, 0.0, RunStatus::Failed),
                Err(e) => return Err(e).with_context(|| format!("{method} on {instance}")),
            };
            Ok(RunRecord {
                instance,
                seed,
                method,
                node_count,
                wall_time_secs,
                status,
            })
        })
        .collect::<anyhow::Result<_>>()?;
    let order: Vec<String> = methods.iter().map(|m| m.label.clone()).collect();
    let summary = aggregate(&records, &order);
    Ok(EvalReport { records, summary })
}

#[derive(Serialize)]
struct RunRow<'a> {
    schema: &'static str,
    instance: &'a str,
    seed: u64,
    method: &'a str,
    node_count: usize,
    wall_time_secs: f64,
    status: RunStatus,
}

pub fn write_runs_csv(path: &Path, records: &[RunRecord]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in records {
        w.serialize(RunRow {
            schema: RUNS_SCHEMA,
            instance: &r.instance,
            seed: r.seed,
            method: &r.method,
            node_count: r.node_count,
            wall_time_secs: r.wall_time_secs,
            status: r.status,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    schema: &'static str,
    method: &'a str,
    geo_mean_nodes: Option<f64>,
    geo_mean_time_secs: Option<f64>,
    std_pct: Option<f64>,
    timeouts: usize,
    failures: usize,
    runs_used: usize,
}

pub fn write_summary_csv(path: &Path, summary: &EvalSummary) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for m in &summary.methods {
        w.serialize(SummaryRow {
            schema: SUMMARY_SCHEMA,
            method: &m.method,
            geo_mean_nodes: m.geo_mean_nodes,
            geo_mean_time_secs: m.geo_mean_time,
            std_pct: m.std_pct,
            timeouts: m.timeouts,
            failures: m.failures,
            runs_used: m.runs_used,
        })?;
    }
    w.flush()?;
    Ok(())
}

fn cell(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.digits$}"))
}

/// One row per method: nodes, time, std% and timeouts.
pub fn markdown_table(summary: &EvalSummary) -> String {
    let mut out = String::from("| method | nodes (geo mean) | time s (geo mean) | std % | timeouts | failures | runs |\n");
    out.push_str("|---|---:|---:|---:|---:|---:|---:|\n");
    for m in &summary.methods {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} |",
            m.method,
            cell(m.geo_mean_nodes, 1),
            cell(m.geo_mean_time, 3),
            cell(m.std_pct, 1),
            m.timeouts,
            m.failures,
            m.runs_used
        );
    }
    let _ = writeln!(out, "\n{} (instance, seed) pairs finished by every method.", summary.complete_pairs.len());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use branchlearn_core::gen::{generate, FamilyKind, GenConfig};
    use branchlearn_core::train::SerialRunner;

    fn spec(s: &str) -> MethodSpec {
        s.parse().unwrap()
    }

    #[test]
    fn parses_method_specs() {
        assert_eq!(spec("random").rule, RuleSpec::Random);
        assert_eq!(spec("pseudocost").label, PSEUDOCOST_LABEL);
        let p = spec("il=policy:out/il.json");
        assert_eq!(p.label, "il");
        assert_eq!(p.rule, RuleSpec::Policy("out/il.json".into()));
        assert_eq!(spec("policy-sample:a/rl.json").label, "rl");
        assert!("bogus".parse::<MethodSpec>().is_err());
        assert!("x:y".parse::<MethodSpec>().is_err());
        assert!("=strong".parse::<MethodSpec>().is_err());
    }

    fn instances(n: u64) -> Vec<MilpInstance> {
        (0..n)
            .map(|seed| {
                generate(&GenConfig {
                    family: FamilyKind::SetCover.enumerable(),
                    seed,
                })
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn strong_branching_is_seed_invariant() {
        let methods = [Method::load(&spec("strong")).unwrap()];
        let cfg = EvalConfig {
            seeds: 3,
            time_limit: None,
            ..Default::default()
        };
        let report = evaluate(&methods, &instances(2), &cfg, &SerialRunner).unwrap();
        assert_eq!(report.records.len(), 6);
        assert_eq!(report.summary.methods[0].std_pct, Some(0.0));
    }

    #[test]
    fn node_limit_counts_as_timeout_and_is_excluded() {
        let methods = [Method::load(&spec("random")).unwrap(), Method::load(&spec("strong")).unwrap()];
        let cfg = EvalConfig {
            seeds: 2,
            time_limit: None,
            node_limit: Some(1),
            ..Default::default()
        };
        let report = evaluate(&methods, &instances(3), &cfg, &SerialRunner).unwrap();
        let timed_out = report.records.iter().filter(|r| r.status == RunStatus::TimedOut).count();
        let total: usize = report.summary.methods.iter().map(|m| m.timeouts).sum();
        assert_eq!(timed_out, total);
        let used = report.summary.methods[0].runs_used;
        assert_eq!(used, report.summary.complete_pairs.len());
        assert_eq!(report.summary.methods[1].runs_used, used);
    }

    #[test]
    fn duplicate_labels_rejected() {
        let methods = [Method::load(&spec("a=random")).unwrap(), Method::load(&spec("a=strong")).unwrap()];
        assert!(evaluate(&methods, &instances(1), &EvalConfig::default(), &SerialRunner).is_err());
    }

    #[test]
    fn csv_has_schema_column() {
        let methods = [Method::load(&spec("random")).unwrap()];
        let report = evaluate(&methods, &instances(1), &EvalConfig::default(), &SerialRunner).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let runs = dir.path().join("runs.csv");
        let summary = dir.path().join("summary.csv");
        write_runs_csv(&runs, &report.records).unwrap();
        write_summary_csv(&summary, &report.summary).unwrap();
        let text = std::fs::read_to_string(&runs).unwrap();
        assert!(text.starts_with("schema,instance,seed,method,node_count,wall_time_secs,status\n"));
        assert_eq!(text.lines().count(), 6);
        assert!(std::fs::read_to_string(&summary).unwrap().contains(SUMMARY_SCHEMA));
        assert!(markdown_table(&report.summary).contains("| random |"));
    }
}
