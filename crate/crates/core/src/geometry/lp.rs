//! Small linear programs, solved with `minilp`.

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};

use crate::error::{Error, Result};

fn lp_failure(e: minilp::Error) -> Error {
    Error::ConvergenceFailure(format!("linear program: {e}"))
}

/// Minimal L1 distance from `target` to the convex hull of `points`.
pub(crate) fn hull_residual(points: &[&[f64]], target: &[f64]) -> Result<f64> {
    let k = target.len();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let lambdas: Vec<_> = points.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let slack: Vec<_> = (0..k)
        .map(|_| (lp.add_var(1.0, (0.0, f64::INFINITY)), lp.add_var(1.0, (0.0, f64::INFINITY))))
        .collect();

    let mut total = LinearExpr::empty();
    for &l in &lambdas {
        total.add(l, 1.0);
    }
    lp.add_constraint(total, ComparisonOp::Eq, 1.0);

    for c in 0..k {
        let mut row = LinearExpr::empty();
        for (p, &l) in points.iter().zip(&lambdas) {
            if p[c] != 0.0 {
                row.add(l, p[c]);
            }
        }
        row.add(slack[c].0, 1.0);
        row.add(slack[c].1, -1.0);
        lp.add_constraint(row, ComparisonOp::Eq, target[c]);
    }
    let sol = lp.solve().map_err(lp_failure)?;
    Ok(sol.objective().max(0.0))
}

/// Smallest uniform relaxation `t` such that some belief satisfies
/// `<n_i, p> <= c_i + t * scale_i` for every row, with the point attaining it.
pub(crate) fn min_violation(dim: usize, rows: &[(&[f64], f64, f64)]) -> Result<(f64, Vec<f64>)> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let p: Vec<_> = (0..dim).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));

    let mut total = LinearExpr::empty();
    for &v in &p {
        total.add(v, 1.0);
    }
    lp.add_constraint(total, ComparisonOp::Eq, 1.0);

    for &(normal, offset, scale) in rows {
        let mut row = LinearExpr::empty();
        for (&v, &n) in p.iter().zip(normal) {
            if n != 0.0 {
                row.add(v, n);
            }
        }
        row.add(t, -scale);
        lp.add_constraint(row, ComparisonOp::Le, offset);
    }
    let sol = lp.solve().map_err(lp_failure)?;
    let point = p.iter().map(|&v| sol[v].max(0.0)).collect();
    Ok((sol[t].max(0.0), point))
}
