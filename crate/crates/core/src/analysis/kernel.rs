use nalgebra::DMatrix;

use crate::analysis::check_dim;
use crate::error::{Error, Result};
use crate::geometry::{dot, sub, Action, ActionSet, SignedMeasure};
use crate::model::Prior;

const RANK_TOL: f64 = 1e-9;

/// SVD of the difference vectors `a_i - a_0`, padded with zero rows so that
/// the right singular vectors span the whole space.
fn difference_svd(points: &[&[f64]]) -> (Vec<f64>, DMatrix<f64>) {
    let k = points[0].len();
    let rows = (points.len() - 1).max(k);
    let mut m = DMatrix::<f64>::zeros(rows, k);
    for (i, p) in points.iter().skip(1).enumerate() {
        for (j, (x, y)) in p.iter().zip(points[0]).enumerate() {
            m[(i, j)] = x - y;
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    (svd.singular_values.iter().cloned().collect(), v_t)
}

fn threshold(singular: &[f64]) -> f64 {
    RANK_TOL * singular.iter().cloned().fold(1.0, f64::max)
}

fn rank_of(points: &[&[f64]]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let (sv, _) = difference_svd(points);
    let t = threshold(&sv);
    sv.iter().filter(|s| **s > t).count()
}

/// Dimension of the affine hull of the points.
pub fn affine_rank(points: &[Action]) -> usize {
    let refs: Vec<&[f64]> = points.iter().map(Action::payoffs).collect();
    rank_of(&refs)
}

/// Vertices chosen greedily, in input order, each raising the affine rank.
pub fn spanning_vertices(face: &[Action]) -> Vec<Action> {
    let mut chosen: Vec<Action> = Vec::new();
    for a in face {
        let mut trial: Vec<&[f64]> = chosen.iter().map(Action::payoffs).collect();
        let before = rank_of(&trial);
        trial.push(a.payoffs());
        if chosen.is_empty() || rank_of(&trial) > before {
            chosen.push(a.clone());
        }
    }
    chosen
}

/// Orthonormal basis of the directions orthogonal to every difference of
/// optimal actions at the prior.
pub fn indifference_kernel(set: &ActionSet, prior: &Prior) -> Result<Vec<SignedMeasure>> {
    check_dim(set.dim(), prior.dim())?;
    let face = set.support(prior.probs()).argmax;
    let k = set.dim();
    if face.len() < 2 {
        return (0..k)
            .map(|i| {
                let mut e = vec![0.0; k];
                e[i] = 1.0;
                SignedMeasure::new(e)
            })
            .collect();
    }
    let refs: Vec<&[f64]> = face.iter().map(Action::payoffs).collect();
    let (sv, v_t) = difference_svd(&refs);
    let t = threshold(&sv);
    (0..k)
        .filter(|&i| sv[i] <= t)
        .map(|i| SignedMeasure::new(v_t.row(i).iter().cloned().collect()))
        .collect()
}

/// `(1/n) max_{t, t' in T} <s, t - t'>` for `n` affinely spanning optimal
/// actions `T` at the prior.
pub fn indifference_seminorm(set: &ActionSet, prior: &Prior, s: &SignedMeasure) -> Result<f64> {
    check_dim(set.dim(), prior.dim())?;
    check_dim(set.dim(), s.dim())?;
    let face = set.support(prior.probs()).argmax;
    if face.len() < 2 {
        return Err(Error::NotUndecided);
    }
    Ok(seminorm_on(&spanning_vertices(&face), s.coords()))
}

pub(crate) fn seminorm_on(spanning: &[Action], s: &[f64]) -> f64 {
    let pairings: Vec<f64> = spanning.iter().map(|t| dot(t.payoffs(), s)).collect();
    let hi = pairings.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = pairings.iter().cloned().fold(f64::INFINITY, f64::min);
    (hi - lo) / spanning.len() as f64
}

/// Largest tangent-space norm of `a' - a` over the vertices `a'`.
pub(crate) fn max_tangent_spread(set: &ActionSet, a: &[f64]) -> f64 {
    set.vertices()
        .iter()
        .map(|v| crate::geometry::norm(&super::tangent_projection(&sub(v.payoffs(), a))))
        .fold(0.0, f64::max)
}
