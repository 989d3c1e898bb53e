//! Numerical tolerances shared by the LP solver and the B&B engine.

/// Primal feasibility tolerance for rows and bounds.
pub const FEAS_TOL: f64 = 1e-6;
/// Pivot elements smaller than this are never selected.
pub const PIVOT_TOL: f64 = 1e-9;
/// A value within this distance of an integer counts as integral.
pub const INT_TOL: f64 = 1e-6;

/// Fractional part test used for integrality everywhere.
pub fn is_integral(x: f64) -> bool {
    libm::fabs(x - libm::round(x)) <= INT_TOL
}
