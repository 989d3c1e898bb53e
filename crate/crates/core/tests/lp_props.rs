use branchlearn_core::lp::{solve_lp, solve_lp_warm, LpProblem, LpResult};
use branchlearn_core::sparse::SparseMatrix;
use proptest::prelude::*;

fn dense_lp(n: usize, m: usize, data: &[i32], lower: f64, upper: f64) -> LpProblem {
    let obj: Vec<f64> = data[..n].iter().map(|&v| v as f64).collect();
    let mut trip = Vec::new();
    for i in 0..m {
        for j in 0..n {
            trip.push((i, j, data[n + i * n + j] as f64));
        }
    }
    let rhs: Vec<f64> = data[n + m * n..n + m * n + m].iter().map(|&v| v as f64).collect();
    LpProblem {
        obj,
        rows: SparseMatrix::from_triplets(m, n, &trip).unwrap(),
        rhs,
        lower: vec![lower; n],
        upper: vec![upper; n],
    }
}

fn dense_rows(p: &LpProblem) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; p.n_vars()]; p.n_rows()];
    for (i, j, v) in p.rows.triplets() {
        rows[i][j] = v;
    }
    rows
}

/// Solves a 3×3 system by Gaussian elimination; `None` if singular.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in 0..3 {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some([b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2]])
}

/// Minimum over all basic feasible solutions of a bounded 3-variable LP.
fn vertex_oracle(p: &LpProblem) -> Option<f64> {
    assert_eq!(p.n_vars(), 3);
    // every constraint as (a, b) meaning a·x ≤ b
    let mut cons: Vec<([f64; 3], f64)> = dense_rows(p).iter().zip(&p.rhs).map(|(r, &b)| ([r[0], r[1], r[2]], b)).collect();
    for j in 0..3 {
        let mut e = [0.0; 3];
        e[j] = 1.0;
        cons.push((e, p.upper[j]));
        e[j] = -1.0;
        cons.push((e, -p.lower[j]));
    }
    let k = cons.len();
    let mut best: Option<f64> = None;
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                let Some(x) = solve3([cons[a].0, cons[b].0, cons[c].0], [cons[a].1, cons[b].1, cons[c].1]) else {
                    continue;
                };
                let feasible = cons.iter().all(|(row, rhs)| row.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>() <= rhs + 1e-9);
                if feasible {
                    let v = p.objective_at(&x);
                    best = Some(best.map_or(v, |b: f64| b.min(v)));
                }
            }
        }
    }
    best
}

fn small_lp() -> impl Strategy<Value = LpProblem> {
    prop::collection::vec(-9i32..=9, 3 + 12 + 4).prop_map(|d| dense_lp(3, 4, &d, 0.0, 10.0))
}

fn medium_lp() -> impl Strategy<Value = LpProblem> {
    (2usize..7, 1usize..7).prop_flat_map(|(n, m)| {
        prop::collection::vec(-9i32..=9, n + n * m + m).prop_map(move |d| dense_lp(n, m, &d, 0.0, 5.0))
    })
}

fn check_optimal(p: &LpProblem, r: &LpResult) {
    let Some(s) = r.optimal() else { return };
    let rows = dense_rows(p);
    for (row, b) in rows.iter().zip(&p.rhs) {
        let ax: f64 = row.iter().zip(&s.x).map(|(a, x)| a * x).sum();
        assert!(ax <= b + 1e-6, "row violated: {ax} > {b}");
    }
    for j in 0..p.n_vars() {
        assert!(s.x[j] >= p.lower[j] - 1e-6 && s.x[j] <= p.upper[j] + 1e-6);
    }
    let recomputed = p.objective_at(&s.x);
    assert!((recomputed - s.objective).abs() <= 1e-6 * (1.0 + s.objective.abs()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_vertex_enumeration(p in small_lp()) {
        let r = solve_lp(&p).unwrap();
        check_optimal(&p, &r);
        match (vertex_oracle(&p), r.optimal()) {
            (Some(v), Some(s)) => prop_assert!((v - s.objective).abs() <= 1e-7, "oracle {v} vs simplex {}", s.objective),
            (None, None) => prop_assert!(r.is_infeasible()),
            (o, s) => prop_assert!(false, "oracle {o:?} vs simplex {s:?}"),
        }
    }

    #[test]
    fn bitwise_deterministic(p in medium_lp()) {
        let a = solve_lp(&p).unwrap();
        let b = solve_lp(&p).unwrap();
        match (a.optimal(), b.optimal()) {
            (Some(x), Some(y)) => {
                let bx: Vec<u64> = x.x.iter().map(|v| v.to_bits()).collect();
                let by: Vec<u64> = y.x.iter().map(|v| v.to_bits()).collect();
                prop_assert_eq!(bx, by);
            }
            _ => prop_assert_eq!(a.is_infeasible(), b.is_infeasible()),
        }
    }

    #[test]
    fn branching_bounds_never_lower_the_objective(p in medium_lp(), pick in 0usize..16, scale in 1u32..4) {
        // scaled rhs makes fractional vertices likely
        let mut p = p;
        for b in &mut p.rhs {
            *b = *b / scale as f64 + 0.5;
        }
        let parent = solve_lp_warm(&p, None).unwrap();
        let Some(s) = parent.result.optimal() else { return Ok(()) };
        check_optimal(&p, &parent.result);
        let j = pick % p.n_vars();
        for up in [false, true] {
            let mut child = p.clone();
            if up {
                child.lower[j] = s.x[j].ceil();
            } else {
                child.upper[j] = s.x[j].floor();
            }
            if child.lower[j] > child.upper[j] {
                continue;
            }
            let cold = solve_lp(&child).unwrap();
            let warm = solve_lp_warm(&child, parent.basis.as_ref()).unwrap();
            check_optimal(&child, &cold);
            check_optimal(&child, &warm.result);
            match (cold.optimal(), warm.result.optimal()) {
                (Some(c), Some(w)) => {
                    prop_assert!(c.objective >= s.objective - 1e-7);
                    prop_assert!((c.objective - w.objective).abs() <= 1e-7 * (1.0 + c.objective.abs()));
                }
                (None, None) => prop_assert!(cold.is_infeasible() && warm.result.is_infeasible()),
                (c, w) => prop_assert!(false, "cold {c:?} vs warm {w:?}"),
            }
        }
    }
}
