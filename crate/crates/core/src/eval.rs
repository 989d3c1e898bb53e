//! Aggregation of evaluation runs.
//!
//! Aggregates only use (instance, seed) pairs on which every compared
//! method finished, so a method is never rewarded for timing out on hard
//! instances.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Finished,
    TimedOut,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub seed: u64,
    pub method: String,
    pub node_count: usize,
    pub wall_time_secs: f64,
    pub status: RunStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub geo_mean_nodes: Option<f64>,
    pub geo_mean_time: Option<f64>,
    /// Mean over instances of the across-seed relative std of node counts.
    pub std_pct: Option<f64>,
    pub timeouts: usize,
    pub failures: usize,
    pub runs_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub methods: Vec<MethodSummary>,
    /// (instance, seed) pairs finished by every method.
    pub complete_pairs: Vec<(String, u64)>,
}

/// `exp(mean(ln v))`; `None` when empty or any value is not positive.
pub fn geometric_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() || values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let s: f64 = values.iter().map(|v| libm::log(*v)).sum();
    Some(libm::exp(s / values.len() as f64))
}

/// Population standard deviation as a percentage of the mean.
pub fn relative_std_pct(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return None;
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some(100.0 * libm::sqrt(var) / mean)
}

/// Summarises `records` for `methods` (in the given order) over the
/// pairwise-complete set.
pub fn aggregate(records: &[RunRecord], methods: &[String]) -> EvalSummary {
    let method_set: BTreeSet<&str> = methods.iter().map(String::as_str).collect();
    let mut finished: BTreeMap<(&str, u64), BTreeSet<&str>> = BTreeMap::new();
    for r in records.iter().filter(|r| method_set.contains(r.method.as_str())) {
        let entry = finished.entry((r.instance.as_str(), r.seed)).or_default();
        if r.status == RunStatus::Finished {
            entry.insert(r.method.as_str());
        }
    }
    let complete: BTreeSet<(&str, u64)> = finished
        .iter()
        .filter(|(_, done)| done.len() == method_set.len())
        .map(|(k, _)| *k)
        .collect();

    let summaries = methods
        .iter()
        .map(|m| {
            let mine: Vec<&RunRecord> = records.iter().filter(|r| &r.method == m).collect();
            let used: Vec<&RunRecord> = mine
                .iter()
                .copied()
                .filter(|r| r.status == RunStatus::Finished && complete.contains(&(r.instance.as_str(), r.seed)))
                .collect();
            let nodes: Vec<f64> = used.iter().map(|r| r.node_count as f64).collect();
            let times: Vec<f64> = used.iter().map(|r| r.wall_time_secs).collect();
            let mut per_instance: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
            for r in &used {
                per_instance.entry(r.instance.as_str()).or_default().push(r.node_count as f64);
            }
            let stds: Vec<f64> = per_instance.values().filter_map(|v| relative_std_pct(v)).collect();
            MethodSummary {
                method: m.clone(),
                geo_mean_nodes: geometric_mean(&nodes),
                geo_mean_time: geometric_mean(&times),
                std_pct: (!stds.is_empty()).then(|| stds.iter().sum::<f64>() / stds.len() as f64),
                timeouts: mine.iter().filter(|r| r.status == RunStatus::TimedOut).count(),
                failures: mine.iter().filter(|r| r.status == RunStatus::Failed).count(),
                runs_used: used.len(),
            }
        })
        .collect();
    EvalSummary {
        methods: summaries,
        complete_pairs: complete.into_iter().map(|(i, s)| (String::from(i), s)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(instance: &str, seed: u64, method: &str, nodes: usize, status: RunStatus) -> RunRecord {
        RunRecord {
            instance: instance.into(),
            seed,
            method: method.into(),
            node_count: nodes,
            wall_time_secs: 1.0,
            status,
        }
    }

    #[test]
    fn geometric_means() {
        assert!((geometric_mean(&[8.0, 2.0]).unwrap() - 4.0).abs() < 1e-12);
        assert!((geometric_mean(&[10.0, 1000.0]).unwrap() - 100.0).abs() < 1e-9);
        assert_eq!(geometric_mean(&[]), None);
        assert_eq!(geometric_mean(&[0.0, 1.0]), None);
    }

    #[test]
    fn identical_runs_have_zero_std() {
        assert_eq!(relative_std_pct(&[7.0; 5]), Some(0.0));
    }

    #[test]
    fn timeout_excludes_pair_for_everyone() {
        let methods = vec![String::from("a"), String::from("b")];
        let mut records = Vec::new();
        for seed in 0..5 {
            records.push(rec("A", seed, "a", 10, RunStatus::Finished));
            let status = if seed == 3 { RunStatus::TimedOut } else { RunStatus::Finished };
            records.push(rec("A", seed, "b", 1000, status));
        }
        let s = aggregate(&records, &methods);
        assert_eq!(s.complete_pairs.len(), 4);
        assert_eq!(s.methods[0].runs_used, 4);
        assert_eq!(s.methods[1].runs_used, 4);
        assert_eq!(s.methods[0].timeouts, 0);
        assert_eq!(s.methods[1].timeouts, 1);
        assert!((s.methods[1].geo_mean_nodes.unwrap() - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn missing_method_run_is_incomplete() {
        let methods = vec![String::from("a"), String::from("b")];
        let records = vec![rec("A", 0, "a", 10, RunStatus::Finished)];
        let s = aggregate(&records, &methods);
        assert!(s.complete_pairs.is_empty());
        assert_eq!(s.methods[0].geo_mean_nodes, None);
    }
}
