use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::analysis::kernel::{affine_rank, spanning_vertices};
use crate::analysis::{check_dim, ConvexBody};
use crate::error::{Error, Result};
use crate::geometry::{Belief, BeliefPolytope};
use crate::model::Prior;

/// Behaviour of the value function at a prior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Regime {
    /// `v` is affine on a neighbourhood: small information is worthless.
    Confident,
    /// Several optimal actions: `v` has a kink.
    Undecided,
    /// `v` is twice differentiable with positive definite Hessian.
    Flexible,
    /// None of the above within the configured bands.
    Other,
}

/// Numerical bands used by [`classify_prior_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeConfig {
    /// Radius of the ball that must fit in the confidence set.
    pub confident_radius: f64,
    /// Finite-difference step for the Hessian.
    pub hessian_step: f64,
    /// Smallest eigenvalue counted as positive.
    pub eig_threshold: f64,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        Self {
            confident_radius: 1e-6,
            hessian_step: 1e-3,
            eig_threshold: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Affine dimension of the optimal face.
    pub face_dim: usize,
    pub confidence_set: Option<BeliefPolytope>,
    /// Hessian in reduced chart coordinates `(p_2, ..., p_K)`.
    pub hessian: Option<Vec<Vec<f64>>>,
    pub constants: BTreeMap<String, f64>,
}

/// Central second differences of `v` in the reduced chart
/// `x = (p_2, ..., p_K)`, `p_1 = 1 - sum x`.
///
/// Returns a symmetric `(K-1) x (K-1)` matrix. For two states the single
/// entry is `d^2 v / d p_2^2`.
pub fn numeric_hessian<B: ConvexBody + ?Sized>(
    body: &B,
    prior: &Prior,
    step: f64,
) -> Result<DMatrix<f64>> {
    check_dim(body.dim(), prior.dim())?;
    if !(1e-5..=1e-2).contains(&step) {
        return Err(Error::InvalidInput(format!("Hessian step {step} outside [1e-5, 1e-2]")));
    }
    if prior.belief().min_prob() <= 2.0 * step {
        return Err(Error::BoundaryPrior { step });
    }
    let x0 = prior.belief().chart().to_vec();
    let n = x0.len();
    let f = |dx: &[(usize, f64)]| -> Result<f64> {
        let mut x = x0.clone();
        for &(i, d) in dx {
            x[i] += d;
        }
        Ok(body.value(&Belief::from_chart(&x)?))
    };
    let f0 = f(&[])?;
    let h2 = step * step;
    let mut hess = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        hess[(i, i)] = (f(&[(i, step)])? - 2.0 * f0 + f(&[(i, -step)])?) / h2;
        for j in 0..i {
            let pp = f(&[(i, step), (j, step)])?;
            let pm = f(&[(i, step), (j, -step)])?;
            let mp = f(&[(i, -step), (j, step)])?;
            let mm = f(&[(i, -step), (j, -step)])?;
            let v = (pp - pm - mp + mm) / (4.0 * h2);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

fn eigen_range(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(m.clone());
    let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// [`classify_prior_with`] under the default bands.
pub fn classify_prior<B: ConvexBody + ?Sized>(body: &B, prior: &Prior) -> Result<RegimeReport> {
    classify_prior_with(body, prior, &RegimeConfig::default())
}

/// Undecided when the optimal face has positive dimension; otherwise
/// Confident when a ball around the prior fits in the confidence set;
/// otherwise Flexible when the Hessian is positive definite; otherwise Other.
pub fn classify_prior_with<B: ConvexBody + ?Sized>(
    body: &B,
    prior: &Prior,
    config: &RegimeConfig,
) -> Result<RegimeReport> {
    check_dim(body.dim(), prior.dim())?;
    let mu = prior.belief();
    let face = body.optimal_face(mu);
    let face_dim = affine_rank(&face);
    let confidence_set = body.confidence_set(mu);
    let mut constants = BTreeMap::new();
    let report = |regime, hessian: Option<&DMatrix<f64>>, constants| RegimeReport {
        regime,
        face_dim,
        confidence_set: confidence_set.clone(),
        hessian: hessian.map(|h| h.row_iter().map(|r| r.iter().cloned().collect()).collect()),
        constants,
    };
    if face_dim >= 1 {
        let max_norm = face.iter().map(|a| a.norm()).fold(0.0, f64::max);
        constants.insert("face_max_norm".to_string(), max_norm);
        constants.insert(
            "spanning_vertices".to_string(),
            spanning_vertices(&face).len() as f64,
        );
        return Ok(report(Regime::Undecided, None, constants));
    }
    if body.ball_in_confidence_set(mu, config.confident_radius)? {
        constants.insert("confident_radius".to_string(), config.confident_radius);
        return Ok(report(Regime::Confident, None, constants));
    }
    let hessian = match numeric_hessian(body, prior, config.hessian_step) {
        Ok(h) => h,
        Err(Error::BoundaryPrior { .. }) => return Ok(report(Regime::Other, None, constants)),
        Err(e) => return Err(e),
    };
    let (lo, hi) = eigen_range(&hessian);
    constants.insert("hessian_min_eig".to_string(), lo);
    constants.insert("hessian_max_eig".to_string(), hi);
    let regime = if lo > config.eig_threshold {
        Regime::Flexible
    } else {
        Regime::Other
    };
    Ok(report(regime, Some(&hessian), constants))
}
