//! Episode dumps and deterministic replay.

use std::collections::BTreeMap;

use branchlearn_core::bnb::{BranchContext, SolveConfig, SolveError, SolveReport};
use branchlearn_core::branching::{BranchDecision, Brancher};
use branchlearn_core::clock::NoClock;
use branchlearn_core::lp::LpError;
use branchlearn_core::milp::MilpInstance;
use branchlearn_core::solve;
use branchlearn_core::tree::{record_episode, EpisodeTree, RewardKind, TreeError};
use serde::{Deserialize, Serialize};

pub const EPISODE_FORMAT: u32 = 1;

/// A recorded episode together with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeDump {
    pub format: u32,
    pub instance_name: String,
    pub config: SolveConfig,
    pub node_count: usize,
    #[serde(with = "branchlearn_core::float::option")]
    pub objective: Option<f64>,
    pub episode: EpisodeTree,
}

impl EpisodeDump {
    pub fn from_report(report: &SolveReport) -> Result<Self, TreeError> {
        let mut config = report.config.clone();
        // replay never needs wall-clock limits; the node order alone fixes
        // the tree
        config.time_limit = None;
        Ok(EpisodeDump {
            format: EPISODE_FORMAT,
            instance_name: report.instance_name.clone(),
            config,
            node_count: report.node_count,
            objective: report.objective,
            episode: record_episode(report, RewardKind::TreeSize)?,
        })
    }
}

/// Branches on whatever variable the recorded episode branched on at the
/// same node id.
pub struct ReplayRule {
    actions: BTreeMap<usize, usize>,
}

impl ReplayRule {
    pub fn new(episode: &EpisodeTree) -> Self {
        ReplayRule {
            actions: episode.nodes.iter().filter_map(|n| n.action.map(|a| (n.state, a))).collect(),
        }
    }
}

impl Brancher for ReplayRule {
    fn select(&mut self, ctx: &BranchContext<'_>) -> Result<BranchDecision, LpError> {
        let var = self.actions.get(&ctx.node.id).copied();
        let pos = var.and_then(|v| ctx.candidates.iter().position(|c| c.var == v));
        // an out-of-range index makes the solver fail loudly, which is what
        // a diverging replay should do
        Ok(BranchDecision::plain(pos.unwrap_or(ctx.candidates.len())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReplayOutcome {
    Identical { nodes: usize },
    /// First node (in processing order) where the trees differ.
    Diverged { node: usize, detail: String },
}

fn strip(tree: &EpisodeTree) -> EpisodeTree {
    let mut t = tree.clone();
    for n in &mut t.nodes {
        n.decision = None;
    }
    t
}

/// Re-solves `inst` taking the recorded actions and compares the trees.
pub fn replay(inst: &MilpInstance, dump: &EpisodeDump) -> Result<ReplayOutcome, SolveError> {
    let mut rule = ReplayRule::new(&dump.episode);
    let report = match solve(inst, &dump.config, &mut rule, &NoClock) {
        Ok(r) => r,
        Err(SolveError::InvalidDecision { .. }) => {
            return Ok(ReplayOutcome::Diverged {
                node: usize::MAX,
                detail: "recorded branching variable is not a candidate".into(),
            })
        }
        Err(e) => return Err(e),
    };
    let replayed = match record_episode(&report, RewardKind::TreeSize) {
        Ok(t) => strip(&t),
        Err(e) => {
            return Ok(ReplayOutcome::Diverged {
                node: usize::MAX,
                detail: e.to_string(),
            })
        }
    };
    let recorded = strip(&dump.episode);
    if replayed == recorded && report.objective == dump.objective {
        return Ok(ReplayOutcome::Identical { nodes: report.node_count });
    }
    for (k, (&a, &b)) in recorded.temporal_order.iter().zip(&replayed.temporal_order).enumerate() {
        if a != b || recorded.nodes[a] != replayed.nodes[b] {
            return Ok(ReplayOutcome::Diverged {
                node: a,
                detail: format!("processing step {k}: recorded {:?}, replayed {:?}", recorded.nodes[a], replayed.nodes[b]),
            });
        }
    }
    Ok(ReplayOutcome::Diverged {
        node: usize::MAX,
        detail: format!(
            "recorded {} nodes / objective {:?}, replayed {} nodes / objective {:?}",
            recorded.len(),
            dump.objective,
            replayed.len(),
            report.objective
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use branchlearn_core::branching::BranchRule;
    use branchlearn_core::gen::{generate, FamilyKind, GenConfig};

    fn instance() -> MilpInstance {
        generate(&GenConfig {
            family: FamilyKind::CombAuction.enumerable(),
            seed: 5,
        })
        .unwrap()
    }

    #[test]
    fn random_episode_replays_exactly() {
        let inst = instance();
        for cfg in [SolveConfig::best_first(), SolveConfig::dfs()] {
            let report = solve(&inst, &cfg, &mut BranchRule::random(3), &NoClock).unwrap();
            let dump = EpisodeDump::from_report(&report).unwrap();
            assert_eq!(replay(&inst, &dump).unwrap(), ReplayOutcome::Identical { nodes: report.node_count });
        }
    }

    #[test]
    fn tampered_episode_diverges() {
        let inst = instance();
        let report = solve(&inst, &SolveConfig::best_first(), &mut BranchRule::strong(), &NoClock).unwrap();
        let mut dump = EpisodeDump::from_report(&report).unwrap();
        let root = dump.episode.temporal_order[0];
        let Some(var) = dump.episode.nodes[root].action else {
            return;
        };
        dump.episode.nodes[root].action = Some((var + 1) % inst.n_vars());
        assert!(matches!(replay(&inst, &dump).unwrap(), ReplayOutcome::Diverged { .. }));
    }
}
