//! Vanilla branch-and-bound.
//!
//! Every popped node has its LP relaxation solved and is classified as
//! infeasible, pruned (`local_lb ≥ GUB − FEAS_TOL`), integer feasible, or
//! branched into two children. The full tree is kept: each node records
//! the GUB in force when it was processed, its temporal position, the
//! branching action, and (for learned rules) the decision snapshot.
//!
//! Tree size is the number of processed nodes, root and leaves included.
//! Nodes left open when a limit fires are never counted.

use alloc::collections::BinaryHeap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};
use core::time::Duration;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branching::Brancher;
use crate::clock::Clock;
use crate::lp::{solve_lp_warm, Basis, LpError, LpProblem, LpResult};
use crate::milp::{lp_relaxation, MilpError, MilpInstance, MilpSolution};
use crate::policy::{DecisionRecord, InstanceStats};
use crate::tol::{is_integral, FEAS_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeSelection {
    /// Lowest parent bound first, FIFO among ties.
    BestFirst,
    /// Stack order; the child picked by [`ChildOrder`] is processed first.
    DepthFirst,
}

/// Which child of a branching is scheduled ahead of its sibling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChildOrder {
    #[default]
    LeftFirst,
    RightFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub node_selection: NodeSelection,
    #[serde(default)]
    pub child_order: ChildOrder,
    /// Initial GUB. Supplying the optimal value gives ObjLim B&B.
    #[serde(with = "crate::float::option", default)]
    pub objective_limit: Option<f64>,
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    pub rng_seed: u64,
    /// Keep every node's LP solution in the report.
    pub keep_lp_solutions: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            node_selection: NodeSelection::BestFirst,
            child_order: ChildOrder::LeftFirst,
            objective_limit: None,
            node_limit: None,
            time_limit: None,
            rng_seed: 0,
            keep_lp_solutions: true,
        }
    }
}

impl SolveConfig {
    pub fn best_first() -> Self {
        Self::default()
    }

    /// Depth-first, left-first.
    pub fn dfs() -> Self {
        SolveConfig {
            node_selection: NodeSelection::DepthFirst,
            ..Self::default()
        }
    }

    pub fn with_objective_limit(mut self, limit: f64) -> Self {
        self.objective_limit = Some(limit);
        self
    }

    pub fn with_child_order(mut self, order: ChildOrder) -> Self {
        self.child_order = order;
        self
    }

    pub fn with_node_limit(mut self, limit: usize) -> Self {
        self.node_limit = Some(limit);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundChange {
    Upper { var: usize, value: f64 },
    Lower { var: usize, value: f64 },
}

impl BoundChange {
    pub fn var(&self) -> usize {
        match *self {
            BoundChange::Upper { var, .. } | BoundChange::Lower { var, .. } => var,
        }
    }
}

/// Branch on `var` at its fractional LP value: `x ≤ ⌊value⌋ ∨ x ≥ ⌈value⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchAction {
    pub var: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeStatus {
    Open,
    Branched,
    LeafInfeasible,
    LeafPruned,
    LeafIntegerFeasible,
}

impl NodeStatus {
    pub fn is_leaf(self) -> bool {
        matches!(
            self,
            NodeStatus::LeafInfeasible | NodeStatus::LeafPruned | NodeStatus::LeafIntegerFeasible
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub id: usize,
    pub parent: Option<usize>,
    pub is_left_child: bool,
    pub depth: usize,
    /// Branching bounds accumulated from the root, oldest first.
    pub bound_changes: Vec<BoundChange>,
    /// LP bound once processed (`+∞` if infeasible); the parent's bound
    /// while still open.
    #[serde(with = "crate::float::scalar")]
    pub local_lb: f64,
    #[serde(with = "crate::float::scalar")]
    pub gub_at_processing: f64,
    pub lp_solution: Option<Vec<f64>>,
    pub status: NodeStatus,
    /// `[left, right]`
    pub children: Option<[usize; 2]>,
    pub action: Option<BranchAction>,
    pub decision: Option<DecisionRecord>,
    /// Position in the temporal processing sequence.
    pub order: Option<usize>,
}

impl NodeState {
    pub fn root() -> Self {
        NodeState {
            id: 0,
            parent: None,
            is_left_child: false,
            depth: 0,
            bound_changes: Vec::new(),
            local_lb: f64::NEG_INFINITY,
            gub_at_processing: f64::INFINITY,
            lp_solution: None,
            status: NodeStatus::Open,
            children: None,
            action: None,
            decision: None,
            order: None,
        }
    }

    /// Local variable domains: the instance bounds tightened by this node's
    /// branching bounds.
    pub fn local_bounds(&self, inst: &MilpInstance) -> (Vec<f64>, Vec<f64>) {
        let mut lower = inst.lower.clone();
        let mut upper = inst.upper.clone();
        self.apply_bounds(&mut lower, &mut upper);
        (lower, upper)
    }

    pub fn apply_bounds(&self, lower: &mut [f64], upper: &mut [f64]) {
        for change in &self.bound_changes {
            match *change {
                BoundChange::Upper { var, value } => upper[var] = upper[var].min(value),
                BoundChange::Lower { var, value } => lower[var] = lower[var].max(value),
            }
        }
    }

    /// How many branchings on the path from the root fixed a bound of `var`.
    pub fn times_branched_on(&self, var: usize) -> usize {
        self.bound_changes.iter().filter(|c| c.var() == var).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub var: usize,
    pub value: f64,
}

impl Candidate {
    /// Fractional part of the LP value.
    pub fn frac(&self) -> f64 {
        self.value - libm::floor(self.value)
    }
}

/// Integer variables whose LP value is fractional, ascending by index.
pub fn fractional_candidates(x: &[f64], int_set: &[usize]) -> Vec<Candidate> {
    int_set
        .iter()
        .filter(|&&j| !is_integral(x[j]))
        .map(|&j| Candidate { var: j, value: x[j] })
        .collect()
}

/// Children of `parent` under `action`: the left child gets `x ≤ ⌊v⌋`, the
/// right child `x ≥ ⌈v⌉`. GUBs are filled in when the children are
/// processed.
pub fn child_states(parent: &NodeState, action: &BranchAction, left_id: usize, right_id: usize) -> (NodeState, NodeState) {
    let make = |id: usize, change: BoundChange, is_left: bool| {
        let mut bound_changes = parent.bound_changes.clone();
        bound_changes.push(change);
        NodeState {
            id,
            parent: Some(parent.id),
            is_left_child: is_left,
            depth: parent.depth + 1,
            bound_changes,
            local_lb: parent.local_lb,
            gub_at_processing: f64::INFINITY,
            lp_solution: None,
            status: NodeStatus::Open,
            children: None,
            action: None,
            decision: None,
            order: None,
        }
    };
    let left = make(
        left_id,
        BoundChange::Upper {
            var: action.var,
            value: libm::floor(action.value),
        },
        true,
    );
    let right = make(
        right_id,
        BoundChange::Lower {
            var: action.var,
            value: libm::ceil(action.value),
        },
        false,
    );
    (left, right)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Down,
    Up,
}

/// Running means of per-unit objective gain observed on realized branchings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pseudocosts {
    down: Vec<(f64, usize)>,
    up: Vec<(f64, usize)>,
}

impl Pseudocosts {
    pub fn new(n_vars: usize) -> Self {
        Pseudocosts {
            down: vec![(0.0, 0); n_vars],
            up: vec![(0.0, 0); n_vars],
        }
    }

    fn side(&self, side: Side) -> &[(f64, usize)] {
        match side {
            Side::Down => &self.down,
            Side::Up => &self.up,
        }
    }

    pub fn record(&mut self, var: usize, side: Side, gain_per_unit: f64) {
        let slot = match side {
            Side::Down => &mut self.down[var],
            Side::Up => &mut self.up[var],
        };
        slot.0 += gain_per_unit.max(0.0);
        slot.1 += 1;
    }

    pub fn count(&self, var: usize, side: Side) -> usize {
        self.side(side)[var].1
    }

    pub fn mean(&self, var: usize, side: Side) -> Option<f64> {
        let (sum, n) = self.side(side)[var];
        (n > 0).then(|| sum / n as f64)
    }

    /// Mean over all variables with observations on `side`.
    pub fn global_mean(&self, side: Side) -> Option<f64> {
        let (sum, n) = self
            .side(side)
            .iter()
            .filter(|s| s.1 > 0)
            .fold((0.0, 0usize), |acc, s| (acc.0 + s.0 / s.1 as f64, acc.1 + 1));
        (n > 0).then(|| sum / n as f64)
    }

    /// Per-unit gain estimate, falling back to the global mean, then to 1.
    pub fn estimate(&self, var: usize, side: Side) -> f64 {
        self.mean(var, side)
            .or_else(|| self.global_mean(side))
            .unwrap_or(1.0)
    }
}

/// Everything a branching rule may look at for one decision.
pub struct BranchContext<'a> {
    pub instance: &'a MilpInstance,
    pub relaxation: &'a LpProblem,
    pub stats: &'a InstanceStats,
    pub node: &'a NodeState,
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    pub lp_solution: &'a [f64],
    pub lp_objective: f64,
    pub candidates: &'a [Candidate],
    pub pseudocosts: &'a Pseudocosts,
    pub gub: f64,
    /// Optimal basis of this node's LP, for warm-started probing.
    pub basis: Option<&'a Basis>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NodeLimitReached,
    TimeLimitReached,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSnapshot {
    #[serde(with = "crate::float::scalar")]
    pub glb: f64,
    #[serde(with = "crate::float::scalar")]
    pub gub: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub instance_name: String,
    pub status: SolveStatus,
    #[serde(with = "crate::float::option")]
    pub objective: Option<f64>,
    pub incumbent: Option<MilpSolution>,
    pub nodes: Vec<NodeState>,
    pub processed_order: Vec<usize>,
    pub node_count: usize,
    #[serde(with = "crate::float::scalar")]
    pub glb: f64,
    #[serde(with = "crate::float::scalar")]
    pub gub: f64,
    /// GLB/GUB after each processed node.
    pub bound_trace: Vec<BoundSnapshot>,
    pub wall_time: Duration,
    pub config: SolveConfig,
}

impl SolveReport {
    pub fn is_complete(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Infeasible)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Instance(#[from] MilpError),
    #[error("LP breakdown: {0}")]
    Lp(#[from] LpError),
    #[error("LP relaxation is unbounded")]
    Unbounded,
    #[error("branching rule returned candidate {index} of {len}")]
    InvalidDecision { index: usize, len: usize },
    #[error("invalid solve configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy)]
struct OpenKey {
    bound: f64,
    seq: usize,
    id: usize,
}

impl PartialEq for OpenKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for OpenKey {}
impl PartialOrd for OpenKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.seq.cmp(&other.seq))
    }
}

enum OpenSet {
    Heap(BinaryHeap<Reverse<OpenKey>>),
    Stack(Vec<OpenKey>),
}

impl OpenSet {
    fn pop(&mut self) -> Option<OpenKey> {
        match self {
            OpenSet::Heap(h) => h.pop().map(|r| r.0),
            OpenSet::Stack(s) => s.pop(),
        }
    }

    fn push(&mut self, key: OpenKey) {
        match self {
            OpenSet::Heap(h) => h.push(Reverse(key)),
            OpenSet::Stack(s) => s.push(key),
        }
    }

    fn min_bound(&self) -> f64 {
        match self {
            OpenSet::Heap(h) => h.peek().map_or(f64::INFINITY, |r| r.0.bound),
            OpenSet::Stack(s) => s.iter().map(|k| k.bound).fold(f64::INFINITY, f64::min),
        }
    }
}

/// Runs B&B on `inst`, calling `brancher` at every node that needs a split.
pub fn solve<B, C>(inst: &MilpInstance, cfg: &SolveConfig, brancher: &mut B, clock: &C) -> Result<SolveReport, SolveError>
where
    B: Brancher + ?Sized,
    C: Clock + ?Sized,
{
    inst.validate()?;
    if cfg.node_limit == Some(0) {
        return Err(SolveError::InvalidConfig("node limit must be at least 1"));
    }
    if cfg.time_limit == Some(Duration::ZERO) {
        return Err(SolveError::InvalidConfig("time limit must be positive"));
    }
    let started = clock.elapsed();
    let mut relaxation = lp_relaxation(inst);
    let stats = InstanceStats::new(inst);
    let mut pseudocosts = Pseudocosts::new(inst.n_vars());

    let mut nodes = vec![NodeState::root()];
    // warm-start basis handed from a parent to its pending children
    let mut pending_basis: Vec<Option<Basis>> = vec![None];
    let mut open = match cfg.node_selection {
        NodeSelection::BestFirst => OpenSet::Heap(BinaryHeap::new()),
        NodeSelection::DepthFirst => OpenSet::Stack(Vec::new()),
    };
    let mut seq = 0usize;
    open.push(OpenKey {
        bound: f64::NEG_INFINITY,
        seq,
        id: 0,
    });

    let mut gub = cfg.objective_limit.unwrap_or(f64::INFINITY);
    let mut incumbent: Option<MilpSolution> = None;
    let mut processed_order = Vec::new();
    let mut bound_trace = Vec::new();
    let mut status = None;

    while let Some(key) = open.pop() {
        if cfg.node_limit.is_some_and(|limit| processed_order.len() >= limit) {
            open.push(key);
            status = Some(SolveStatus::NodeLimitReached);
            break;
        }
        if cfg
            .time_limit
            .is_some_and(|limit| clock.elapsed().saturating_sub(started) >= limit)
        {
            open.push(key);
            status = Some(SolveStatus::TimeLimitReached);
            break;
        }

        let id = key.id;
        relaxation.lower.copy_from_slice(&inst.lower);
        relaxation.upper.copy_from_slice(&inst.upper);
        nodes[id].apply_bounds(&mut relaxation.lower, &mut relaxation.upper);
        let warm = solve_lp_warm(&relaxation, pending_basis[id].take().as_ref())?;
        let (result, basis) = (warm.result, warm.basis);

        nodes[id].gub_at_processing = gub;
        nodes[id].order = Some(processed_order.len());
        processed_order.push(id);

        match result {
            LpResult::Unbounded => return Err(SolveError::Unbounded),
            LpResult::Infeasible => {
                nodes[id].local_lb = f64::INFINITY;
                nodes[id].status = NodeStatus::LeafInfeasible;
            }
            LpResult::Optimal(sol) => {
                let lb = sol.objective;
                nodes[id].local_lb = lb;
                if let Some(parent) = nodes[id].parent {
                    let p = &nodes[parent];
                    let action = p.action.expect("branched parent has an action");
                    let f = action.value - libm::floor(action.value);
                    let (side, dist) = if nodes[id].is_left_child {
                        (Side::Down, f)
                    } else {
                        (Side::Up, 1.0 - f)
                    };
                    pseudocosts.record(action.var, side, (lb - p.local_lb) / dist);
                }

                let candidates = fractional_candidates(&sol.x, &inst.int_set);
                if lb >= gub - FEAS_TOL {
                    nodes[id].status = NodeStatus::LeafPruned;
                } else if candidates.is_empty() {
                    nodes[id].status = NodeStatus::LeafIntegerFeasible;
                    if lb < gub - FEAS_TOL {
                        gub = lb;
                        let mut x = sol.x.clone();
                        for &j in &inst.int_set {
                            x[j] = libm::round(x[j]);
                        }
                        incumbent = Some(MilpSolution {
                            obj_value: inst.objective_at(&x),
                            x,
                            is_feasible: true,
                        });
                    }
                } else {
                    let ctx = BranchContext {
                        instance: inst,
                        relaxation: &relaxation,
                        stats: &stats,
                        node: &nodes[id],
                        lower: &relaxation.lower,
                        upper: &relaxation.upper,
                        lp_solution: &sol.x,
                        lp_objective: lb,
                        candidates: &candidates,
                        pseudocosts: &pseudocosts,
                        gub,
                        basis: basis.as_ref(),
                    };
                    let decision = brancher.select(&ctx)?;
                    let Some(cand) = candidates.get(decision.candidate) else {
                        return Err(SolveError::InvalidDecision {
                            index: decision.candidate,
                            len: candidates.len(),
                        });
                    };
                    let action = BranchAction {
                        var: cand.var,
                        value: cand.value,
                    };
                    let (left_id, right_id) = (nodes.len(), nodes.len() + 1);
                    let (left, right) = child_states(&nodes[id], &action, left_id, right_id);
                    nodes.push(left);
                    nodes.push(right);
                    pending_basis.push(basis.clone());
                    pending_basis.push(basis);
                    let node = &mut nodes[id];
                    node.status = NodeStatus::Branched;
                    node.children = Some([left_id, right_id]);
                    node.action = Some(action);
                    node.decision = decision.record;

                    let (first, second) = match cfg.child_order {
                        ChildOrder::LeftFirst => (left_id, right_id),
                        ChildOrder::RightFirst => (right_id, left_id),
                    };
                    let mut schedule = |id: usize, open: &mut OpenSet| {
                        seq += 1;
                        open.push(OpenKey { bound: lb, seq, id });
                    };
                    match cfg.node_selection {
                        NodeSelection::BestFirst => {
                            schedule(first, &mut open);
                            schedule(second, &mut open);
                        }
                        NodeSelection::DepthFirst => {
                            schedule(second, &mut open);
                            schedule(first, &mut open);
                        }
                    }
                }
                if cfg.keep_lp_solutions {
                    nodes[id].lp_solution = Some(sol.x);
                }
            }
        }
        bound_trace.push(BoundSnapshot {
            glb: open.min_bound().min(gub),
            gub,
        });
    }

    let status = status.unwrap_or(if gub.is_finite() {
        SolveStatus::Optimal
    } else {
        SolveStatus::Infeasible
    });
    let glb = open.min_bound().min(gub);
    Ok(SolveReport {
        instance_name: inst.name.clone(),
        status,
        objective: gub.is_finite().then_some(gub),
        incumbent,
        node_count: processed_order.len(),
        nodes,
        processed_order,
        glb,
        gub,
        bound_trace,
        wall_time: clock.elapsed().saturating_sub(started),
        config: cfg.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeMode {
    /// GUB must equal the objective limit at every processed node.
    ObjLim,
    /// Every left child must see the same GUB as its parent.
    Dfs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeViolation {
    pub node: usize,
    pub expected: f64,
    pub found: f64,
}

/// Checks the GUB transition property that makes B&B a tree MDP under
/// ObjLim or depth-first left-first processing.
pub fn gub_invariant_probe(report: &SolveReport, mode: ProbeMode) -> Vec<ProbeViolation> {
    let mut violations = Vec::new();
    match mode {
        ProbeMode::ObjLim => {
            let expected = report.config.objective_limit.unwrap_or(f64::INFINITY);
            for &id in &report.processed_order {
                let found = report.nodes[id].gub_at_processing;
                if found != expected {
                    violations.push(ProbeViolation { node: id, expected, found });
                }
            }
        }
        ProbeMode::Dfs => {
            for node in &report.nodes {
                if let (Some([left, _]), Some(_)) = (node.children, node.order) {
                    let child = &report.nodes[left];
                    if child.order.is_some() && child.gub_at_processing != node.gub_at_processing {
                        violations.push(ProbeViolation {
                            node: left,
                            expected: node.gub_at_processing,
                            found: child.gub_at_processing,
                        });
                    }
                }
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branching::{BranchRule, StrongRule};
    use crate::clock::NoClock;
    use crate::milp::fixtures::counterexample;
    use crate::sparse::SparseMatrix;
    use alloc::string::ToString;

    fn child_gubs(report: &SolveReport) -> (f64, f64) {
        let [l, r] = report.nodes[0].children.unwrap();
        (report.nodes[l].gub_at_processing, report.nodes[r].gub_at_processing)
    }

    #[test]
    fn counterexample_left_first_vs_right_first() {
        let inst = counterexample();
        let mut rule = BranchRule::Strong(StrongRule);
        let left = solve(&inst, &SolveConfig::dfs(), &mut rule, &NoClock).unwrap();
        assert_eq!(child_gubs(&left), (f64::INFINITY, f64::INFINITY));
        assert_eq!(left.node_count, 3);
        assert_eq!(left.objective, Some(1.0));

        let cfg = SolveConfig::dfs().with_child_order(ChildOrder::RightFirst);
        let right = solve(&inst, &cfg, &mut rule, &NoClock).unwrap();
        assert_eq!(child_gubs(&right), (1.0, f64::INFINITY));
        assert_eq!(right.objective, Some(1.0));
    }

    #[test]
    fn counterexample_domains() {
        let inst = counterexample();
        let mut root = NodeState::root();
        root.local_lb = 0.6;
        let (l, r) = child_states(&root, &BranchAction { var: 0, value: 0.6 }, 1, 2);
        assert_eq!(l.local_bounds(&inst), (vec![0.0], vec![0.0]));
        assert_eq!(r.local_bounds(&inst), (vec![1.0], vec![10.0]));
    }

    #[test]
    fn existing_bounds_split() {
        let mut inst = counterexample();
        inst.lower[0] = 3.0;
        inst.upper[0] = 7.0;
        let (l, r) = child_states(&NodeState::root(), &BranchAction { var: 0, value: 5.5 }, 1, 2);
        assert_eq!(l.local_bounds(&inst), (vec![3.0], vec![5.0]));
        assert_eq!(r.local_bounds(&inst), (vec![6.0], vec![7.0]));
    }

    #[test]
    fn candidates_ascending_with_tolerance() {
        let c = fractional_candidates(&[0.5, 2.0, 1.3], &[0, 1, 2]);
        assert_eq!(
            c,
            vec![Candidate { var: 0, value: 0.5 }, Candidate { var: 2, value: 1.3 }]
        );
        assert!(fractional_candidates(&[1.0, 2.0], &[0, 1]).is_empty());
        assert!(fractional_candidates(&[2.000_000_4], &[0]).is_empty());
    }

    #[test]
    fn integral_root_is_single_node() {
        let inst = MilpInstance {
            name: "integral".to_string(),
            obj: vec![1.0, 1.0],
            rows: SparseMatrix::from_triplets(1, 2, &[(0, 0, -1.0), (0, 1, -1.0)]).unwrap(),
            rhs: vec![-2.0],
            lower: vec![0.0, 0.0],
            upper: vec![5.0, 5.0],
            int_set: vec![0, 1],
        };
        let report = solve(&inst, &SolveConfig::default(), &mut BranchRule::Strong(StrongRule), &NoClock).unwrap();
        assert_eq!(report.node_count, 1);
        assert_eq!(report.status, SolveStatus::Optimal);
        assert_eq!(report.nodes[0].status, NodeStatus::LeafIntegerFeasible);
        assert_eq!(report.objective, Some(2.0));
    }

    #[test]
    fn right_first_best_first_breaks_left_child_gub() {
        let inst = counterexample();
        let cfg = SolveConfig::best_first().with_child_order(ChildOrder::RightFirst);
        let report = solve(&inst, &cfg, &mut BranchRule::Strong(StrongRule), &NoClock).unwrap();
        let violations = gub_invariant_probe(&report, ProbeMode::Dfs);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].found, 1.0);
    }

    #[test]
    fn node_limit_reports_partial_tree() {
        let inst = counterexample();
        let cfg = SolveConfig::dfs().with_node_limit(2);
        let report = solve(&inst, &cfg, &mut BranchRule::Strong(StrongRule), &NoClock).unwrap();
        assert_eq!(report.status, SolveStatus::NodeLimitReached);
        assert_eq!(report.node_count, 2);
        assert!(!report.is_complete());
        assert_eq!(report.nodes[2].status, NodeStatus::Open);
    }

    #[test]
    fn zero_node_limit_rejected() {
        let cfg = SolveConfig::dfs().with_node_limit(0);
        let err = solve(&counterexample(), &cfg, &mut BranchRule::Strong(StrongRule), &NoClock);
        assert!(matches!(err, Err(SolveError::InvalidConfig(_))));
    }

    #[test]
    fn objlim_prunes_at_the_limit() {
        let inst = counterexample();
        let cfg = SolveConfig::best_first().with_objective_limit(1.0);
        let report = solve(&inst, &cfg, &mut BranchRule::Strong(StrongRule), &NoClock).unwrap();
        assert!(gub_invariant_probe(&report, ProbeMode::ObjLim).is_empty());
        assert_eq!(report.glb, 1.0);
        assert_eq!(report.objective, Some(1.0));
        assert!(report.incumbent.is_none());
    }
}
