//! LP relaxations: `min cᵀx  s.t.  Ax ≤ b,  l ≤ x ≤ u`.
//!
//! Solved with a dense-tableau, bounded-variable primal simplex. Every row
//! gets a slack; rows violated by the starting point get an artificial
//! variable which Phase 1 drives to zero. Pricing is Dantzig's rule with a
//! Harris-style two-pass ratio test, switching to Bland's rule after a run
//! of degenerate pivots. Each call is a cold solve and fully deterministic.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparse::SparseMatrix;
use crate::tol::{FEAS_TOL, PIVOT_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub obj: Vec<f64>,
    pub rows: SparseMatrix,
    pub rhs: Vec<f64>,
    /// `f64::NEG_INFINITY` for an unbounded-below variable.
    pub lower: Vec<f64>,
    /// `f64::INFINITY` for an unbounded-above variable.
    pub upper: Vec<f64>,
}

impl LpProblem {
    pub fn n_vars(&self) -> usize {
        self.obj.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.n_vars();
        if self.rows.n_cols() != n {
            return Err(LpError::Dimension("constraint matrix columns"));
        }
        if self.rows.n_rows() != self.n_rows() {
            return Err(LpError::Dimension("constraint matrix rows"));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Dimension("bounds"));
        }
        if !self.obj.iter().all(|c| c.is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        if !self.rhs.iter().all(|b| b.is_finite()) {
            return Err(LpError::NonFinite("right-hand side"));
        }
        if !self.rows.is_finite() {
            return Err(LpError::NonFinite("constraint matrix"));
        }
        if self.lower.iter().any(|l| l.is_nan() || *l == f64::INFINITY)
            || self.upper.iter().any(|u| u.is_nan() || *u == f64::NEG_INFINITY)
        {
            return Err(LpError::NonFinite("bounds"));
        }
        Ok(())
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.obj.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LpResult {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpResult {
    pub fn optimal(&self) -> Option<&LpSolution> {
        match self {
            LpResult::Optimal(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpResult::Infeasible)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("dimension mismatch in {0}")]
    Dimension(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("numerical breakdown after {iterations} simplex iterations")]
    NumericalBreakdown { iterations: usize },
}

/// Degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;
/// Basic values and reduced costs are recomputed from scratch this often.
const REFRESH_EVERY: usize = 100;

/// Simplex basis over structural columns `0..n` and slack columns
/// `n..n+m`, used to warm-start a re-solve after bound changes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Basis {
    /// Basic column of every row.
    pub basic: Vec<usize>,
    /// Per column: nonbasic at its upper bound.
    pub at_upper: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarmSolve {
    pub result: LpResult,
    /// Final basis when the solve ended optimal without artificial columns
    /// in the basis.
    pub basis: Option<Basis>,
}

pub fn solve_lp(problem: &LpProblem) -> Result<LpResult, LpError> {
    solve_lp_warm(problem, None).map(|w| w.result)
}

/// Like [`solve_lp`], but first tries a dual simplex from `hint` (typically
/// the optimal basis of a problem differing only in bounds). Falls back to a
/// cold solve when the hint is unusable or the dual pass stalls.
pub fn solve_lp_warm(problem: &LpProblem, hint: Option<&Basis>) -> Result<WarmSolve, LpError> {
    problem.validate()?;
    if problem
        .lower
        .iter()
        .zip(&problem.upper)
        .any(|(l, u)| *l > *u + FEAS_TOL)
    {
        return Ok(WarmSolve {
            result: LpResult::Infeasible,
            basis: None,
        });
    }
    if let Some(hint) = hint {
        if let Some(mut tableau) = Tableau::from_basis(problem, hint) {
            if let Some(result) = tableau.dual_run() {
                let basis = matches!(result, LpResult::Optimal(_)).then(|| tableau.export_basis()).flatten();
                return Ok(WarmSolve { result, basis });
            }
        }
    }
    solve_cold(problem)
}

fn solve_cold(problem: &LpProblem) -> Result<WarmSolve, LpError> {
    let mut tableau = Tableau::new(problem);
    if tableau.n_art > 0 {
        tableau.set_phase_one_costs();
        match tableau.run()? {
            Outcome::Optimal => {}
            Outcome::Unbounded => {
                return Err(LpError::NumericalBreakdown {
                    iterations: tableau.iterations,
                })
            }
        }
        if !tableau.artificials_cleared() {
            return Ok(WarmSolve {
                result: LpResult::Infeasible,
                basis: None,
            });
        }
        tableau.fix_artificials();
    }
    tableau.set_phase_two_costs();
    match tableau.run()? {
        Outcome::Unbounded => Ok(WarmSolve {
            result: LpResult::Unbounded,
            basis: None,
        }),
        Outcome::Optimal => {
            let result = tableau.extract()?;
            Ok(WarmSolve {
                result,
                basis: tableau.export_basis(),
            })
        }
    }
}

enum Outcome {
    Optimal,
    Unbounded,
}

struct Tableau<'a> {
    problem: &'a LpProblem,
    m: usize,
    n: usize,
    n_art: usize,
    ncols: usize,
    /// `B⁻¹·[A | I | -E]`, row-major, `m × ncols`.
    tab: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    val: Vec<f64>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// row index each artificial column belongs to
    art_row: Vec<usize>,
    opt_tol: f64,
    iterations: usize,
    max_iterations: usize,
}

impl<'a> Tableau<'a> {
    fn new(p: &'a LpProblem) -> Self {
        let m = p.n_rows();
        let n = p.n_vars();

        let mut val = vec![0.0; n];
        for j in 0..n {
            val[j] = if p.lower[j].is_finite() {
                p.lower[j]
            } else if p.upper[j].is_finite() {
                p.upper[j]
            } else {
                0.0
            };
        }
        let residual: Vec<f64> = (0..m).map(|i| p.rhs[i] - p.rows.row_dot(i, &val)).collect();
        let art_row: Vec<usize> = (0..m).filter(|&i| residual[i] < 0.0).collect();
        let n_art = art_row.len();
        let ncols = n + m + n_art;

        let mut tab = vec![0.0; m * ncols];
        let mut basis = vec![0; m];
        let mut is_basic = vec![false; ncols];
        let mut lo = vec![0.0; ncols];
        let mut up = vec![f64::INFINITY; ncols];
        lo[..n].copy_from_slice(&p.lower);
        up[..n].copy_from_slice(&p.upper);
        val.resize(ncols, 0.0);

        let mut art_of_row = vec![usize::MAX; m];
        for (k, &i) in art_row.iter().enumerate() {
            art_of_row[i] = n + m + k;
        }
        for i in 0..m {
            let row = &mut tab[i * ncols..(i + 1) * ncols];
            let sign = if art_of_row[i] == usize::MAX { 1.0 } else { -1.0 };
            for (j, a) in p.rows.row(i) {
                row[j] = sign * a;
            }
            row[n + i] = sign;
            if art_of_row[i] == usize::MAX {
                basis[i] = n + i;
                val[n + i] = residual[i];
            } else {
                row[art_of_row[i]] = 1.0;
                basis[i] = art_of_row[i];
                val[art_of_row[i]] = -residual[i];
            }
            is_basic[basis[i]] = true;
        }

        let cmax = p.obj.iter().fold(1.0, |acc, c| f64::max(acc, libm::fabs(*c)));
        Tableau {
            problem: p,
            m,
            n,
            n_art,
            ncols,
            tab,
            lo,
            up,
            val,
            cost: vec![0.0; ncols],
            reduced: vec![0.0; ncols],
            basis,
            is_basic,
            art_row,
            opt_tol: 1e-9 * cmax,
            iterations: 0,
            max_iterations: 50 * (m + ncols) + 10_000,
        }
    }

    /// Tableau for `p` with the given basis factored in and nonbasic columns
    /// at the bounds the basis records. `None` if the basis does not fit or
    /// is singular.
    fn from_basis(p: &'a LpProblem, hint: &Basis) -> Option<Self> {
        let m = p.n_rows();
        let n = p.n_vars();
        let ncols = n + m;
        if hint.basic.len() != m || hint.at_upper.len() != ncols {
            return None;
        }
        let mut is_basic = vec![false; ncols];
        for &q in &hint.basic {
            if q >= ncols || is_basic[q] {
                return None;
            }
            is_basic[q] = true;
        }
        let mut tab = vec![0.0; m * ncols];
        for i in 0..m {
            for (j, a) in p.rows.row(i) {
                tab[i * ncols + j] = a;
            }
            tab[i * ncols + n + i] = 1.0;
        }
        let mut lo = vec![0.0; ncols];
        let mut up = vec![f64::INFINITY; ncols];
        lo[..n].copy_from_slice(&p.lower);
        up[..n].copy_from_slice(&p.upper);
        let val = (0..ncols)
            .map(|j| {
                if hint.at_upper[j] && up[j].is_finite() {
                    up[j]
                } else if lo[j].is_finite() {
                    lo[j]
                } else if up[j].is_finite() {
                    up[j]
                } else {
                    0.0
                }
            })
            .collect();
        let cmax = p.obj.iter().fold(1.0, |acc, c| f64::max(acc, libm::fabs(*c)));
        let mut t = Tableau {
            problem: p,
            m,
            n,
            n_art: 0,
            ncols,
            tab,
            lo,
            up,
            val,
            cost: vec![0.0; ncols],
            reduced: vec![0.0; ncols],
            basis: vec![usize::MAX; m],
            is_basic: vec![false; ncols],
            art_row: Vec::new(),
            opt_tol: 1e-9 * cmax,
            iterations: 0,
            max_iterations: 50 * (m + ncols) + 10_000,
        };
        for &q in &hint.basic {
            let mut best = (usize::MAX, 1e-7);
            for i in 0..m {
                let a = libm::fabs(t.tab[i * ncols + q]);
                if t.basis[i] == usize::MAX && a > best.1 {
                    best = (i, a);
                }
            }
            if best.0 == usize::MAX {
                return None;
            }
            t.pivot(best.0, q);
            t.basis[best.0] = q;
            t.is_basic[q] = true;
        }
        t.set_phase_two_costs();
        // nonbasic boxed columns on the wrong side are flipped; anything else
        // that is dual infeasible rules the warm start out
        for j in 0..ncols {
            if t.is_basic[j] || t.lo[j] == t.up[j] {
                continue;
            }
            let d = t.reduced[j];
            if d < -t.opt_tol && t.val[j] < t.up[j] {
                if !t.up[j].is_finite() {
                    return None;
                }
                t.val[j] = t.up[j];
            } else if d > t.opt_tol && t.val[j] > t.lo[j] {
                if !t.lo[j].is_finite() {
                    return None;
                }
                t.val[j] = t.lo[j];
            }
        }
        t.refresh_values();
        Some(t)
    }

    /// Bounded dual simplex from a dual feasible basis. `None` asks the
    /// caller to fall back to a cold solve.
    fn dual_run(&mut self) -> Option<LpResult> {
        let nc = self.ncols;
        let mut since_refresh = 0;
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return None;
            }
            since_refresh += 1;
            if since_refresh >= REFRESH_EVERY {
                self.refresh_reduced_costs();
                since_refresh = 0;
            }
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let b = self.basis[i];
                let v = self.val[b];
                let viol = if v < self.lo[b] {
                    (self.lo[b] - v) / (1.0 + libm::fabs(self.lo[b]))
                } else if v > self.up[b] {
                    (v - self.up[b]) / (1.0 + libm::fabs(self.up[b]))
                } else {
                    0.0
                };
                if viol > FEAS_TOL && leave.is_none_or(|(_, w)| viol > w) {
                    leave = Some((i, viol));
                }
            }
            let Some((r, _)) = leave else {
                // polish any dual drift with primal pivots, then report
                return match self.run() {
                    Ok(Outcome::Optimal) => self.extract().ok(),
                    _ => None,
                };
            };
            let b = self.basis[r];
            let raise = self.val[b] < self.lo[b];
            // x_b changes by -alpha_rj per unit of x_j
            let mut enter: Option<(usize, f64, f64)> = None;
            for j in 0..nc {
                if self.is_basic[j] || self.lo[j] == self.up[j] {
                    continue;
                }
                let a = self.tab[r * nc + j];
                if libm::fabs(a) < PIVOT_TOL {
                    continue;
                }
                let dir = if raise == (a < 0.0) { 1.0 } else { -1.0 };
                if (dir > 0.0 && self.val[j] >= self.up[j]) || (dir < 0.0 && self.val[j] <= self.lo[j]) {
                    continue;
                }
                let ratio = f64::max(dir * self.reduced[j], 0.0) / libm::fabs(a);
                let better = match enter {
                    None => true,
                    Some((_, br, ba)) => ratio < br - 1e-12 || (ratio <= br + 1e-12 && libm::fabs(a) > ba),
                };
                if better {
                    enter = Some((j, ratio, libm::fabs(a)));
                }
            }
            let Some((q, _, _)) = enter else {
                return Some(LpResult::Infeasible);
            };
            self.val[b] = if raise { self.lo[b] } else { self.up[b] };
            self.pivot(r, q);
            self.is_basic[b] = false;
            self.is_basic[q] = true;
            self.basis[r] = q;
            self.refresh_values();
        }
    }

    fn export_basis(&self) -> Option<Basis> {
        let nm = self.n + self.m;
        if self.basis.iter().any(|&b| b >= nm) {
            return None;
        }
        Some(Basis {
            basic: self.basis.clone(),
            at_upper: (0..nm)
                .map(|j| !self.is_basic[j] && self.up[j].is_finite() && self.val[j] == self.up[j] && self.lo[j] != self.up[j])
                .collect(),
        })
    }

    fn set_phase_one_costs(&mut self) {
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        for k in 0..self.n_art {
            self.cost[self.n + self.m + k] = 1.0;
        }
        self.refresh_reduced_costs();
    }

    fn set_phase_two_costs(&mut self) {
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        self.cost[..self.n].copy_from_slice(&self.problem.obj);
        self.refresh_reduced_costs();
    }

    fn artificials_cleared(&mut self) -> bool {
        self.refresh_values();
        (0..self.n_art).all(|k| {
            let i = self.art_row[k];
            self.val[self.n + self.m + k] <= FEAS_TOL * (1.0 + libm::fabs(self.problem.rhs[i]))
        })
    }

    fn fix_artificials(&mut self) {
        for k in 0..self.n_art {
            let j = self.n + self.m + k;
            self.up[j] = 0.0;
            if !self.is_basic[j] {
                self.val[j] = 0.0;
            }
        }
    }

    fn refresh_reduced_costs(&mut self) {
        let nc = self.ncols;
        self.reduced.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.tab[i * nc..(i + 1) * nc];
            for (d, t) in self.reduced.iter_mut().zip(row) {
                *d -= cb * t;
            }
        }
        for i in 0..self.m {
            self.reduced[self.basis[i]] = 0.0;
        }
    }

    /// Recomputes basic values as `B⁻¹(b − N·x_N)`; the slack block of the
    /// tableau holds `B⁻¹`.
    fn refresh_values(&mut self) {
        let (m, n, nc) = (self.m, self.n, self.ncols);
        let p = self.problem;
        let mut rhs = p.rhs.clone();
        for (i, r) in rhs.iter_mut().enumerate() {
            for (j, a) in p.rows.row(i) {
                if !self.is_basic[j] {
                    *r -= a * self.val[j];
                }
            }
        }
        for i in 0..m {
            let row = &self.tab[i * nc + n..i * nc + n + m];
            let v: f64 = row.iter().zip(&rhs).map(|(b, r)| b * r).sum();
            self.val[self.basis[i]] = v;
        }
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_mag = 0.0;
        for j in 0..self.ncols {
            if self.is_basic[j] || self.lo[j] == self.up[j] {
                continue;
            }
            let d = self.reduced[j];
            let dir = if d < -self.opt_tol && self.val[j] < self.up[j] {
                1.0
            } else if d > self.opt_tol && self.val[j] > self.lo[j] {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if libm::fabs(d) > best_mag {
                best_mag = libm::fabs(d);
                best = Some((j, dir));
            }
        }
        best
    }

    /// Step length limit imposed by row `i` when the entering column moves
    /// in direction `dir`, with bounds relaxed by `slack`.
    fn row_limit(&self, i: usize, alpha: f64, dir: f64, slack: f64) -> Option<f64> {
        let b = self.basis[i];
        let rate = -dir * alpha;
        if rate < 0.0 {
            self.lo[b]
                .is_finite()
                .then(|| f64::max((self.val[b] - self.lo[b] + slack) / -rate, 0.0))
        } else {
            self.up[b]
                .is_finite()
                .then(|| f64::max((self.up[b] - self.val[b] + slack) / rate, 0.0))
        }
    }

    /// Returns the pivot row (None for a bound flip) and the step length, or
    /// `Err(())` when the direction is unbounded.
    fn ratio_test(&self, q: usize, dir: f64, bland: bool) -> Result<(Option<usize>, f64), ()> {
        let nc = self.ncols;
        let flip = self.up[q] - self.lo[q];
        let col = |i: usize| self.tab[i * nc + q];

        let chosen = if bland {
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = col(i);
                if libm::fabs(a) < PIVOT_TOL {
                    continue;
                }
                if let Some(t) = self.row_limit(i, a, dir, 0.0) {
                    let better = match best {
                        None => true,
                        Some((bi, bt)) => {
                            t < bt - 1e-12 || (t <= bt + 1e-12 && self.basis[i] < self.basis[bi])
                        }
                    };
                    if better {
                        best = Some((i, t));
                    }
                }
            }
            best
        } else {
            // Harris: bound the step with relaxed bounds, then take the
            // largest pivot among the rows that block within that bound.
            let mut relaxed = f64::INFINITY;
            for i in 0..self.m {
                let a = col(i);
                if libm::fabs(a) < PIVOT_TOL {
                    continue;
                }
                if let Some(t) = self.row_limit(i, a, dir, FEAS_TOL) {
                    relaxed = f64::min(relaxed, t);
                }
            }
            let mut best: Option<(usize, f64)> = None;
            let mut best_alpha = 0.0;
            if relaxed.is_finite() {
                for i in 0..self.m {
                    let a = col(i);
                    if libm::fabs(a) < PIVOT_TOL {
                        continue;
                    }
                    if let Some(t) = self.row_limit(i, a, dir, 0.0) {
                        if t <= relaxed && libm::fabs(a) > best_alpha {
                            best_alpha = libm::fabs(a);
                            best = Some((i, t));
                        }
                    }
                }
            }
            best
        };

        match chosen {
            Some((_, t)) if flip.is_finite() && flip <= t => Ok((None, flip)),
            Some((i, t)) => Ok((Some(i), t)),
            None if flip.is_finite() => Ok((None, flip)),
            None => Err(()),
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let piv = self.tab[r * nc + q];
        let inv = 1.0 / piv;
        let mut nz: Vec<usize> = Vec::new();
        {
            let row = &mut self.tab[r * nc..(r + 1) * nc];
            for (j, t) in row.iter_mut().enumerate() {
                if *t != 0.0 {
                    *t *= inv;
                    nz.push(j);
                }
            }
            row[q] = 1.0;
        }
        let pivot_row: Vec<f64> = nz.iter().map(|&j| self.tab[r * nc + j]).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tab[i * nc + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.tab[i * nc..(i + 1) * nc];
            for (&j, &p) in nz.iter().zip(&pivot_row) {
                row[j] -= f * p;
            }
            row[q] = 0.0;
        }
        let dq = self.reduced[q];
        if dq != 0.0 {
            for (&j, &p) in nz.iter().zip(&pivot_row) {
                self.reduced[j] -= dq * p;
            }
        }
        self.reduced[q] = 0.0;
    }

    fn run(&mut self) -> Result<Outcome, LpError> {
        let nc = self.ncols;
        let mut bland = false;
        let mut streak = 0;
        let mut since_refresh = 0;
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(LpError::NumericalBreakdown {
                    iterations: self.iterations,
                });
            }
            since_refresh += 1;
            if since_refresh >= REFRESH_EVERY {
                self.refresh_values();
                self.refresh_reduced_costs();
                since_refresh = 0;
            }

            let Some((q, dir)) = self.choose_entering(bland).or_else(|| {
                // confirm optimality against freshly computed reduced costs
                self.refresh_reduced_costs();
                since_refresh = 0;
                self.choose_entering(bland)
            }) else {
                return Ok(Outcome::Optimal);
            };

            let (row, t) = match self.ratio_test(q, dir, bland) {
                Ok(step) => step,
                Err(()) => return Ok(Outcome::Unbounded),
            };

            if t > 1e-12 {
                for i in 0..self.m {
                    let a = self.tab[i * nc + q];
                    if a != 0.0 {
                        self.val[self.basis[i]] -= dir * t * a;
                    }
                }
                streak = 0;
                bland = false;
            } else {
                streak += 1;
                if streak >= DEGENERATE_STREAK {
                    bland = true;
                }
            }

            match row {
                None => {
                    self.val[q] = if dir > 0.0 { self.up[q] } else { self.lo[q] };
                }
                Some(r) => {
                    let leaving = self.basis[r];
                    let rate = -dir * self.tab[r * nc + q];
                    self.val[q] += dir * t;
                    self.val[leaving] = if rate < 0.0 {
                        self.lo[leaving]
                    } else {
                        self.up[leaving]
                    };
                    self.pivot(r, q);
                    self.is_basic[leaving] = false;
                    self.is_basic[q] = true;
                    self.basis[r] = q;
                }
            }
        }
    }

    fn extract(&mut self) -> Result<LpResult, LpError> {
        self.refresh_values();
        let p = self.problem;
        let x: Vec<f64> = (0..self.n)
            .map(|j| self.val[j].clamp(p.lower[j], p.upper[j]))
            .collect();
        for i in 0..self.m {
            let act = p.rows.row_dot(i, &x);
            if act > p.rhs[i] + FEAS_TOL * (1.0 + libm::fabs(p.rhs[i])) {
                return Err(LpError::NumericalBreakdown {
                    iterations: self.iterations,
                });
            }
        }
        let objective = p.objective_at(&x);
        Ok(LpResult::Optimal(LpSolution {
            x,
            objective,
            iterations: self.iterations,
        }))
    }
}
