//! Seeded generators for the five benchmark families.
//!
//! Maximisation models are stored negated so everything downstream
//! minimises; their names carry a `[max, negated]` suffix. Every generated
//! instance has a known feasible point by construction: all-ones for set
//! covering, all-zeros for the packing families, and a first-fit-decreasing
//! assignment for facility location.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::MilpInstance;
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    CombAuction { items: usize, bids: usize },
    SetCover { items: usize, sets: usize },
    MaxIndepSet { nodes: usize, affinity: usize },
    FacilityLoc { customers: usize, facilities: usize },
    MultiKnapsack { items: usize, knapsacks: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    CombAuction,
    SetCover,
    MaxIndepSet,
    FacilityLoc,
    MultiKnapsack,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 5] = [
        FamilyKind::CombAuction,
        FamilyKind::SetCover,
        FamilyKind::MaxIndepSet,
        FamilyKind::FacilityLoc,
        FamilyKind::MultiKnapsack,
    ];

    /// Default sizes small enough to train on in minutes.
    pub fn desk(self) -> Family {
        match self {
            FamilyKind::CombAuction => Family::CombAuction { items: 30, bids: 150 },
            FamilyKind::SetCover => Family::SetCover { items: 60, sets: 120 },
            FamilyKind::MaxIndepSet => Family::MaxIndepSet { nodes: 80, affinity: 4 },
            FamilyKind::FacilityLoc => Family::FacilityLoc { customers: 12, facilities: 12 },
            FamilyKind::MultiKnapsack => Family::MultiKnapsack { items: 30, knapsacks: 3 },
        }
    }

    /// Training/test sizes of the original benchmark suite.
    pub fn full_scale(self) -> Family {
        match self {
            FamilyKind::CombAuction => Family::CombAuction { items: 100, bids: 500 },
            FamilyKind::SetCover => Family::SetCover { items: 400, sets: 750 },
            FamilyKind::MaxIndepSet => Family::MaxIndepSet { nodes: 500, affinity: 4 },
            FamilyKind::FacilityLoc => Family::FacilityLoc { customers: 35, facilities: 35 },
            FamilyKind::MultiKnapsack => Family::MultiKnapsack { items: 100, knapsacks: 6 },
        }
    }

    /// Sizes whose integer assignment space is at most 2¹⁶, for the
    /// brute-force oracle.
    pub fn enumerable(self) -> Family {
        match self {
            FamilyKind::CombAuction => Family::CombAuction { items: 6, bids: 12 },
            FamilyKind::SetCover => Family::SetCover { items: 8, sets: 12 },
            FamilyKind::MaxIndepSet => Family::MaxIndepSet { nodes: 14, affinity: 2 },
            FamilyKind::FacilityLoc => Family::FacilityLoc { customers: 3, facilities: 3 },
            FamilyKind::MultiKnapsack => Family::MultiKnapsack { items: 6, knapsacks: 2 },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::CombAuction => "comb-auction",
            FamilyKind::SetCover => "set-cover",
            FamilyKind::MaxIndepSet => "max-indep-set",
            FamilyKind::FacilityLoc => "facility-loc",
            FamilyKind::MultiKnapsack => "multi-knapsack",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl Family {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::CombAuction { .. } => FamilyKind::CombAuction,
            Family::SetCover { .. } => FamilyKind::SetCover,
            Family::MaxIndepSet { .. } => FamilyKind::MaxIndepSet,
            Family::FacilityLoc { .. } => FamilyKind::FacilityLoc,
            Family::MultiKnapsack { .. } => FamilyKind::MultiKnapsack,
        }
    }

    /// Rebuilds a family from its kind and the two size parameters in the
    /// order listed for that family.
    pub fn with_sizes(kind: FamilyKind, a: usize, b: usize) -> Family {
        match kind {
            FamilyKind::CombAuction => Family::CombAuction { items: a, bids: b },
            FamilyKind::SetCover => Family::SetCover { items: a, sets: b },
            FamilyKind::MaxIndepSet => Family::MaxIndepSet { nodes: a, affinity: b },
            FamilyKind::FacilityLoc => Family::FacilityLoc { customers: a, facilities: b },
            FamilyKind::MultiKnapsack => Family::MultiKnapsack { items: a, knapsacks: b },
        }
    }

    pub fn sizes(&self) -> (usize, usize) {
        match *self {
            Family::CombAuction { items, bids } => (items, bids),
            Family::SetCover { items, sets } => (items, sets),
            Family::MaxIndepSet { nodes, affinity } => (nodes, affinity),
            Family::FacilityLoc { customers, facilities } => (customers, facilities),
            Family::MultiKnapsack { items, knapsacks } => (items, knapsacks),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    #[serde(flatten)]
    pub family: Family,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(&'static str),
}

pub fn generate(cfg: &GenConfig) -> Result<MilpInstance, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (a, b) = cfg.family.sizes();
    if a == 0 || b == 0 {
        return Err(GenError::InvalidConfig("all size parameters must be at least 1"));
    }
    let inst = match cfg.family {
        Family::SetCover { items, sets } => {
            if sets < 2 {
                return Err(GenError::InvalidConfig("set covering needs at least 2 sets"));
            }
            set_cover(items, sets, cfg.seed, &mut rng)
        }
        Family::CombAuction { items, bids } => comb_auction(items, bids, cfg.seed, &mut rng),
        Family::MaxIndepSet { nodes, affinity } => max_indep_set(nodes, affinity, cfg.seed, &mut rng),
        Family::FacilityLoc {
            customers,
            facilities,
        } => facility_location(customers, facilities, cfg.seed, &mut rng),
        Family::MultiKnapsack { items, knapsacks } => multi_knapsack(items, knapsacks, cfg.seed, &mut rng),
    };
    debug_assert!(inst.validate().is_ok());
    Ok(inst)
}

fn binary_instance(
    name: String,
    obj: Vec<f64>,
    n_rows: usize,
    triplets: &[(usize, usize, f64)],
    rhs: Vec<f64>,
) -> MilpInstance {
    let n = obj.len();
    MilpInstance {
        name,
        rows: SparseMatrix::from_triplets(n_rows, n, triplets).expect("generator indices in range"),
        obj,
        rhs,
        lower: vec![0.0; n],
        upper: vec![1.0; n],
        int_set: (0..n).collect(),
    }
}

/// Coverage density 5%, each element in at least two sets, every set
/// non-empty, unit costs. Rows are `−Σ_{s∋e} x_s ≤ −1`.
fn set_cover(items: usize, sets: usize, seed: u64, rng: &mut ChaCha8Rng) -> MilpInstance {
    const DENSITY: f64 = 0.05;
    let mut entries: BTreeSet<(usize, usize)> = BTreeSet::new();
    let columns: Vec<usize> = (0..sets).collect();
    for e in 0..items {
        for &s in columns.choose_multiple(rng, 2) {
            entries.insert((e, s));
        }
    }
    let mut covered = vec![false; sets];
    for &(_, s) in &entries {
        covered[s] = true;
    }
    for s in 0..sets {
        if !covered[s] {
            entries.insert((rng.gen_range(0..items), s));
        }
    }
    let target = libm::ceil(DENSITY * (items * sets) as f64) as usize;
    while entries.len() < target {
        entries.insert((rng.gen_range(0..items), rng.gen_range(0..sets)));
    }
    let triplets: Vec<(usize, usize, f64)> = entries.iter().map(|&(e, s)| (e, s, -1.0)).collect();
    binary_instance(
        format!("set-cover-{items}x{sets}-s{seed}"),
        vec![1.0; sets],
        items,
        &triplets,
        vec![-1.0; items],
    )
}

/// Item values uniform in [1, 100]; bundle size `1 + Binomial(4, ½)`;
/// price = bundle value × uniform [0.8, 1.5] synergy.
fn comb_auction(items: usize, bids: usize, seed: u64, rng: &mut ChaCha8Rng) -> MilpInstance {
    let values: Vec<f64> = (0..items).map(|_| rng.gen_range(1.0..=100.0)).collect();
    let all_items: Vec<usize> = (0..items).collect();
    let mut triplets = Vec::new();
    let mut obj = Vec::with_capacity(bids);
    for j in 0..bids {
        let extra = (0..4).filter(|_| rng.gen_bool(0.5)).count();
        let size = (1 + extra).min(items);
        let mut bundle: Vec<usize> = all_items.choose_multiple(rng, size).copied().collect();
        bundle.sort_unstable();
        let synergy = rng.gen_range(0.8..=1.5);
        let price: f64 = bundle.iter().map(|&i| values[i]).sum::<f64>() * synergy;
        obj.push(-price);
        for i in bundle {
            triplets.push((i, j, 1.0));
        }
    }
    binary_instance(
        format!("comb-auction-{items}x{bids}-s{seed} [max, negated]"),
        obj,
        items,
        &triplets,
        vec![1.0; items],
    )
}

/// Barabási–Albert graph: an initial clique on `affinity + 1` nodes, then
/// each new node attaches to `affinity` distinct existing nodes with
/// probability proportional to degree.
pub fn barabasi_albert(nodes: usize, affinity: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; nodes]; nodes];
    let core = (affinity + 1).min(nodes);
    for u in 0..core {
        for v in (u + 1)..core {
            adj[u][v] = true;
            adj[v][u] = true;
        }
    }
    let mut degree: Vec<usize> = (0..nodes).map(|u| if u < core { core - 1 } else { 0 }).collect();
    for new in core..nodes {
        let total: usize = degree[..new].iter().sum();
        let mut targets: BTreeSet<usize> = BTreeSet::new();
        while targets.len() < affinity.min(new) {
            let pick = if total == 0 {
                rng.gen_range(0..new)
            } else {
                let mut r = rng.gen_range(0..total);
                let mut chosen = new - 1;
                for (u, &d) in degree[..new].iter().enumerate() {
                    if r < d {
                        chosen = u;
                        break;
                    }
                    r -= d;
                }
                chosen
            };
            targets.insert(pick);
        }
        for t in targets {
            adj[new][t] = true;
            adj[t][new] = true;
            degree[new] += 1;
            degree[t] += 1;
        }
    }
    adj
}

/// Greedy clique cover: scan edges `(u, v)` with `u < v` in lexicographic
/// order; each edge not yet covered is grown into a maximal clique by adding
/// vertices in ascending index order.
pub fn greedy_clique_cover(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut covered = vec![vec![false; n]; n];
    let mut cliques = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if !adj[u][v] || covered[u][v] {
                continue;
            }
            let mut clique = vec![u, v];
            for w in 0..n {
                if w != u && w != v && clique.iter().all(|&c| adj[c][w]) {
                    clique.push(w);
                }
            }
            clique.sort_unstable();
            for (a, &p) in clique.iter().enumerate() {
                for &q in &clique[a + 1..] {
                    covered[p][q] = true;
                    covered[q][p] = true;
                }
            }
            cliques.push(clique);
        }
    }
    cliques
}

fn max_indep_set(nodes: usize, affinity: usize, seed: u64, rng: &mut ChaCha8Rng) -> MilpInstance {
    let adj = barabasi_albert(nodes, affinity, rng);
    let cliques = greedy_clique_cover(&adj);
    let mut triplets = Vec::new();
    for (r, clique) in cliques.iter().enumerate() {
        for &v in clique {
            triplets.push((r, v, 1.0));
        }
    }
    binary_instance(
        format!("max-indep-set-{nodes}a{affinity}-s{seed} [max, negated]"),
        vec![-1.0; nodes],
        cliques.len(),
        &triplets,
        vec![1.0; cliques.len()],
    )
}

/// Places demands first-fit-decreasing; true when every customer fits.
fn first_fit_decreasing(demand: &[f64], capacity: &[f64]) -> bool {
    let mut order: Vec<usize> = (0..demand.len()).collect();
    order.sort_by(|&a, &b| demand[b].total_cmp(&demand[a]).then(a.cmp(&b)));
    let mut left = capacity.to_vec();
    order.iter().all(|&j| match left.iter_mut().find(|c| **c >= demand[j]) {
        Some(c) => {
            *c -= demand[j];
            true
        }
        None => false,
    })
}

/// Variables `x_ij` (facility `i` serves customer `j`) at `i·n + j`, then
/// `y_i` at `m·n + i`. Rows: `Σ_j d_j x_ij − s_i y_i ≤ 0` per facility and
/// `−Σ_i x_ij ≤ −1` per customer.
fn facility_location(customers: usize, facilities: usize, seed: u64, rng: &mut ChaCha8Rng) -> MilpInstance {
    let (n, m) = (customers, facilities);
    let cust: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
    let fac: Vec<(f64, f64)> = (0..m).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
    let demand: Vec<f64> = (0..n).map(|_| rng.gen_range(5..=35) as f64).collect();
    let mut capacity: Vec<f64> = (0..m).map(|_| rng.gen_range(10..=160) as f64).collect();

    let total_demand: f64 = demand.iter().sum();
    let total_cap: f64 = capacity.iter().sum();
    let scale = f64::max(1.0, 1.2 * total_demand / total_cap);
    for c in capacity.iter_mut() {
        *c = libm::ceil(*c * scale);
    }
    while !first_fit_decreasing(&demand, &capacity) {
        for c in capacity.iter_mut() {
            *c = libm::ceil(*c * 1.1);
        }
    }

    let fixed: Vec<f64> = capacity
        .iter()
        .map(|&s| rng.gen_range(0..=90) as f64 + libm::round(100.0 * libm::sqrt(s)))
        .collect();

    let mut obj = vec![0.0; m * n + m];
    for i in 0..m {
        for j in 0..n {
            let dist = libm::hypot(fac[i].0 - cust[j].0, fac[i].1 - cust[j].1);
            obj[i * n + j] = libm::round(10.0 * dist * demand[j]);
        }
        obj[m * n + i] = fixed[i];
    }
    let mut triplets = Vec::new();
    for i in 0..m {
        for j in 0..n {
            triplets.push((i, i * n + j, demand[j]));
            triplets.push((m + j, i * n + j, -1.0));
        }
        triplets.push((i, m * n + i, -capacity[i]));
    }
    let mut rhs = vec![0.0; m];
    rhs.extend(core::iter::repeat(-1.0).take(n));
    binary_instance(
        format!("facility-loc-{n}x{m}-s{seed}"),
        obj,
        m + n,
        &triplets,
        rhs,
    )
}

/// Variables `x_ij` (item `j` in knapsack `i`) at `i·n + j`. Weights and
/// prices uniform in {10..1000}, uncorrelated; capacities `⌊½Σw / m⌋`.
fn multi_knapsack(items: usize, knapsacks: usize, seed: u64, rng: &mut ChaCha8Rng) -> MilpInstance {
    let (n, m) = (items, knapsacks);
    let weight: Vec<f64> = (0..n).map(|_| rng.gen_range(10..=1000) as f64).collect();
    let price: Vec<f64> = (0..n).map(|_| rng.gen_range(10..=1000) as f64).collect();
    let cap = libm::floor(0.5 * weight.iter().sum::<f64>() / m as f64);

    let mut obj = vec![0.0; m * n];
    let mut triplets = Vec::new();
    for i in 0..m {
        for j in 0..n {
            obj[i * n + j] = -price[j];
            triplets.push((i, i * n + j, weight[j]));
            triplets.push((m + j, i * n + j, 1.0));
        }
    }
    let mut rhs = vec![cap; m];
    rhs.extend(core::iter::repeat(1.0).take(n));
    binary_instance(
        format!("multi-knapsack-{n}x{m}-s{seed} [max, negated]"),
        obj,
        m + n,
        &triplets,
        rhs,
    )
}

/// A point known to be feasible for a generated instance of `family`.
pub fn known_feasible_point(inst: &MilpInstance, family: &Family) -> Vec<f64> {
    match *family {
        Family::SetCover { .. } => vec![1.0; inst.n_vars()],
        Family::CombAuction { .. } | Family::MaxIndepSet { .. } | Family::MultiKnapsack { .. } => {
            vec![0.0; inst.n_vars()]
        }
        Family::FacilityLoc {
            customers,
            facilities,
        } => {
            let (n, m) = (customers, facilities);
            let demand: Vec<f64> = (0..n).map(|j| inst.rows.row(0).nth(j).map_or(0.0, |(_, v)| v)).collect();
            let capacity: Vec<f64> = (0..m)
                .map(|i| -inst.rows.row(i).last().map_or(0.0, |(_, v)| v))
                .collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| demand[b].total_cmp(&demand[a]).then(a.cmp(&b)));
            let mut left = capacity;
            let mut x = vec![0.0; m * n + m];
            for j in order {
                if let Some(i) = (0..m).find(|&i| left[i] >= demand[j]) {
                    left[i] -= demand[j];
                    x[i * n + j] = 1.0;
                }
            }
            for i in 0..m {
                x[m * n + i] = 1.0;
            }
            x
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::check_feasible;

    fn gen(family: Family, seed: u64) -> MilpInstance {
        generate(&GenConfig { family, seed }).unwrap()
    }

    #[test]
    fn full_scale_set_cover_shape() {
        let inst = gen(Family::SetCover { items: 400, sets: 750 }, 3);
        assert_eq!(inst.n_rows(), 400);
        assert_eq!(inst.n_vars(), 750);
        assert_eq!(inst.int_set.len(), 750);
    }

    #[test]
    fn full_scale_multi_knapsack_shape() {
        let inst = gen(Family::MultiKnapsack { items: 100, knapsacks: 6 }, 1);
        assert_eq!(inst.n_rows(), 6 + 100);
        assert_eq!(inst.n_vars(), 600);
        assert!(inst.upper.iter().all(|&u| u == 1.0));
    }

    #[test]
    fn small_set_cover_double_coverage() {
        let inst = gen(Family::SetCover { items: 5, sets: 8 }, 0);
        for e in 0..5 {
            assert!(inst.rows.row(e).count() >= 2, "element {e} under-covered");
        }
    }

    #[test]
    fn every_family_has_known_feasible_point() {
        for kind in FamilyKind::ALL {
            for seed in 0..5 {
                let family = kind.desk();
                let inst = gen(family, seed);
                let x = known_feasible_point(&inst, &family);
                assert!(check_feasible(&inst, &x).unwrap().feasible, "{}", inst.name);
            }
        }
    }

    #[test]
    fn seed_determinism() {
        for kind in FamilyKind::ALL {
            assert_eq!(gen(kind.desk(), 11), gen(kind.desk(), 11));
            assert_ne!(gen(kind.desk(), 11), gen(kind.desk(), 12));
        }
    }

    #[test]
    fn clique_cover_covers_every_edge() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let adj = barabasi_albert(60, 4, &mut rng);
        let cliques = greedy_clique_cover(&adj);
        for clique in &cliques {
            for (a, &p) in clique.iter().enumerate() {
                for &q in &clique[a + 1..] {
                    assert!(adj[p][q], "clique member pair not adjacent");
                }
            }
        }
        for u in 0..60 {
            for v in (u + 1)..60 {
                if adj[u][v] {
                    assert!(cliques.iter().any(|c| c.contains(&u) && c.contains(&v)));
                }
            }
        }
    }

    #[test]
    fn zero_size_rejected() {
        let err = generate(&GenConfig {
            family: Family::SetCover { items: 0, sets: 3 },
            seed: 0,
        });
        assert!(err.is_err());
    }
}
