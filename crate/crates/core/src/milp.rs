//! MILP instances `min cᵀx : Ax ≤ b, l ≤ x ≤ u, x_j ∈ ℤ ∀ j ∈ 𝓘`,
//! feasibility checking and a brute-force enumeration oracle.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{solve_lp, LpError, LpProblem, LpResult};
use crate::sparse::SparseMatrix;
use crate::tol::{FEAS_TOL, INT_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpInstance {
    pub name: String,
    pub obj: Vec<f64>,
    pub rows: SparseMatrix,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Strictly increasing indices of the integer variables.
    pub int_set: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MilpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error("integer index set must be strictly increasing and below n_vars")]
    BadIntSet,
    #[error("integer variable {0} has a fractional bound")]
    FractionalIntBound(usize),
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("integer variable {0} is not finitely bounded")]
    UnboundedInteger(usize),
    #[error("enumeration needs {needed} assignments, cap is {cap}")]
    TooLarge { needed: u128, cap: u64 },
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpSolution {
    #[serde(with = "crate::float::vec")]
    pub x: Vec<f64>,
    pub obj_value: f64,
    pub is_feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    /// Largest residual over rows, bounds and integrality.
    pub max_violation: f64,
}

impl MilpInstance {
    pub fn n_vars(&self) -> usize {
        self.obj.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn validate(&self) -> Result<(), MilpError> {
        let n = self.n_vars();
        if self.rows.n_cols() != n || self.rows.n_rows() != self.n_rows() {
            return Err(MilpError::DimensionMismatch("constraint matrix"));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(MilpError::DimensionMismatch("bounds"));
        }
        if !self.obj.iter().all(|v| v.is_finite()) {
            return Err(MilpError::NonFinite("objective"));
        }
        if !self.rhs.iter().all(|v| v.is_finite()) || !self.rows.is_finite() {
            return Err(MilpError::NonFinite("constraints"));
        }
        if self.int_set.windows(2).any(|w| w[0] >= w[1]) || self.int_set.iter().any(|&j| j >= n) {
            return Err(MilpError::BadIntSet);
        }
        for &j in &self.int_set {
            for b in [self.lower[j], self.upper[j]] {
                if b.is_finite() && libm::floor(b) != b {
                    return Err(MilpError::FractionalIntBound(j));
                }
            }
        }
        Ok(())
    }

    /// Membership mask for the integer set.
    pub fn integer_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_vars()];
        for &j in &self.int_set {
            mask[j] = true;
        }
        mask
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.obj.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// The LP obtained by dropping integrality.
pub fn lp_relaxation(inst: &MilpInstance) -> LpProblem {
    LpProblem {
        obj: inst.obj.clone(),
        rows: inst.rows.clone(),
        rhs: inst.rhs.clone(),
        lower: inst.lower.clone(),
        upper: inst.upper.clone(),
    }
}

pub fn check_feasible(inst: &MilpInstance, x: &[f64]) -> Result<Feasibility, MilpError> {
    if x.len() != inst.n_vars() {
        return Err(MilpError::DimensionMismatch("solution length"));
    }
    let mut bound_viol: f64 = 0.0;
    for i in 0..inst.n_rows() {
        bound_viol = bound_viol.max(inst.rows.row_dot(i, x) - inst.rhs[i]);
    }
    for (j, &v) in x.iter().enumerate() {
        bound_viol = bound_viol.max(inst.lower[j] - v).max(v - inst.upper[j]);
    }
    let int_viol = inst
        .int_set
        .iter()
        .map(|&j| libm::fabs(x[j] - libm::round(x[j])))
        .fold(0.0, f64::max);
    Ok(Feasibility {
        feasible: bound_viol <= FEAS_TOL && int_viol <= INT_TOL,
        max_violation: bound_viol.max(int_viol).max(0.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum BruteForce {
    Solved(MilpSolution),
    NoSolution,
    /// Some integer assignment leaves an unbounded continuous remainder.
    Unbounded,
}

/// Enumerates every integer assignment over the integer variables' bound
/// boxes and, for each, optimises the continuous remainder with the LP
/// solver. No pruning. Pure-integer instances are evaluated directly.
pub fn brute_force_solve(inst: &MilpInstance, enum_cap: u64) -> Result<BruteForce, MilpError> {
    inst.validate()?;
    let mut needed: u128 = 1;
    for &j in &inst.int_set {
        if !inst.lower[j].is_finite() || !inst.upper[j].is_finite() {
            return Err(MilpError::UnboundedInteger(j));
        }
        let width = if inst.upper[j] >= inst.lower[j] {
            (inst.upper[j] - inst.lower[j]) as u128 + 1
        } else {
            return Ok(BruteForce::NoSolution);
        };
        needed = needed.saturating_mul(width);
    }
    if needed > enum_cap as u128 {
        return Err(MilpError::TooLarge {
            needed,
            cap: enum_cap,
        });
    }

    let pure_integer = inst.int_set.len() == inst.n_vars();
    let mut lp = lp_relaxation(inst);
    let mut assignment: Vec<f64> = inst.int_set.iter().map(|&j| inst.lower[j]).collect();
    let mut best: Option<MilpSolution> = None;
    let mut x = inst.lower.clone();

    loop {
        if pure_integer {
            for (k, &j) in inst.int_set.iter().enumerate() {
                x[j] = assignment[k];
            }
            let feasible = (0..inst.n_rows()).all(|i| inst.rows.row_dot(i, &x) <= inst.rhs[i] + FEAS_TOL);
            if feasible {
                let obj = inst.objective_at(&x);
                if best.as_ref().map_or(true, |b| obj < b.obj_value - 1e-9) {
                    best = Some(MilpSolution {
                        x: x.clone(),
                        obj_value: obj,
                        is_feasible: true,
                    });
                }
            }
        } else {
            for (k, &j) in inst.int_set.iter().enumerate() {
                lp.lower[j] = assignment[k];
                lp.upper[j] = assignment[k];
            }
            match solve_lp(&lp)? {
                LpResult::Optimal(s) => {
                    if best.as_ref().map_or(true, |b| s.objective < b.obj_value - 1e-9) {
                        let mut xs = s.x;
                        for (k, &j) in inst.int_set.iter().enumerate() {
                            xs[j] = assignment[k];
                        }
                        best = Some(MilpSolution {
                            obj_value: inst.objective_at(&xs),
                            x: xs,
                            is_feasible: true,
                        });
                    }
                }
                LpResult::Unbounded => return Ok(BruteForce::Unbounded),
                LpResult::Infeasible => {}
            }
        }

        // odometer step
        let mut k = 0;
        loop {
            if k == assignment.len() {
                return Ok(best.map_or(BruteForce::NoSolution, BruteForce::Solved));
            }
            let j = inst.int_set[k];
            if assignment[k] < inst.upper[j] {
                assignment[k] += 1.0;
                break;
            }
            assignment[k] = inst.lower[j];
            k += 1;
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use alloc::string::ToString;

    /// `min x : x ≥ 0.6, x ∈ ℤ, x ∈ [0, 10]`
    pub fn counterexample() -> MilpInstance {
        MilpInstance {
            name: "counterexample".to_string(),
            obj: vec![1.0],
            rows: SparseMatrix::from_triplets(1, 1, &[(0, 0, -1.0)]).unwrap(),
            rhs: vec![-0.6],
            lower: vec![0.0],
            upper: vec![10.0],
            int_set: vec![0],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::counterexample;
    use super::*;

    #[test]
    fn relaxation_keeps_data() {
        let inst = counterexample();
        let lp = lp_relaxation(&inst);
        assert_eq!(lp.obj, inst.obj);
        assert_eq!(lp.rows, inst.rows);
        let s = solve_lp(&lp).unwrap();
        assert!((s.optimal().unwrap().x[0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn counterexample_feasibility() {
        let inst = counterexample();
        assert!(check_feasible(&inst, &[1.0]).unwrap().feasible);
        let f = check_feasible(&inst, &[0.6]).unwrap();
        assert!(!f.feasible);
        assert!((f.max_violation - 0.4).abs() < 1e-12);
        assert_eq!(
            check_feasible(&inst, &[1.0, 2.0]),
            Err(MilpError::DimensionMismatch("solution length"))
        );
    }

    #[test]
    fn counterexample_brute_force() {
        match brute_force_solve(&counterexample(), 1000).unwrap() {
            BruteForce::Solved(s) => {
                assert_eq!(s.x, vec![1.0]);
                assert_eq!(s.obj_value, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pure_lp_matches_solve_lp() {
        let mut inst = counterexample();
        inst.int_set.clear();
        let bf = brute_force_solve(&inst, 1).unwrap();
        let lp = solve_lp(&lp_relaxation(&inst)).unwrap();
        match bf {
            BruteForce::Solved(s) => assert_eq!(s.obj_value, lp.optimal().unwrap().objective),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(
            brute_force_solve(&counterexample(), 10),
            Err(MilpError::TooLarge { needed: 11, .. })
        ));
    }

    #[test]
    fn validation_catches_bad_int_set() {
        let mut inst = counterexample();
        inst.int_set = vec![1];
        assert_eq!(inst.validate(), Err(MilpError::BadIntSet));
        inst.int_set = vec![0];
        inst.upper[0] = 2.5;
        assert_eq!(inst.validate(), Err(MilpError::FractionalIntBound(0)));
    }
}
