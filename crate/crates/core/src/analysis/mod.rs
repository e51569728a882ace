//! Value function, value of information and the regime-dependent bounds.
//!
//! Every routine that only needs `v(p)` and the optimal actions is generic
//! over [`ConvexBody`], so the same code serves finite action sets, the
//! quadratic scoring rule and the insurance problem. Confidence sets,
//! indifference kernels and the confident/undecided certificates use the
//! vertex description and take an [`ActionSet`].

mod bounds;
mod grid;
mod kernel;
mod regime;

pub use bounds::{
    confident_bounds, confident_bounds_with_pitch, undecided_bounds, flexible_bounds,
    BoundCertificate, BoundKind,
};
pub use grid::{for_each_grid_point, grid_subdivisions};
pub use kernel::{affine_rank, indifference_kernel, indifference_seminorm, spanning_vertices};
pub use regime::{
    classify_prior, classify_prior_with, numeric_hessian, Regime, RegimeConfig, RegimeReport,
};

use crate::error::{Error, Result};
use crate::geometry::{
    exposed_face, norm, revealed_beliefs, Action, ActionSet, Belief, BeliefPolytope, Halfspace,
    SignedMeasure,
};
use crate::model::{validate_information_structure, InformationStructure, Prior};

/// A compact convex set of payoff vectors, described through its support
/// function on beliefs.
pub trait ConvexBody {
    /// Number of states.
    fn dim(&self) -> usize;

    /// `v(p) = max_{a in A} <p, a>`.
    fn value(&self, p: &Belief) -> f64;

    /// Optimal actions at `p`; a single action where `v` is differentiable.
    fn optimal_face(&self, p: &Belief) -> Vec<Action>;

    /// Whether the tangent ball of `radius` around `p` lies in the
    /// confidence set of `p`.
    fn ball_in_confidence_set(&self, p: &Belief, radius: f64) -> Result<bool>;

    /// The confidence set of `p` when it has a halfspace description.
    fn confidence_set(&self, _p: &Belief) -> Option<BeliefPolytope> {
        None
    }
}

/// Projection of `n` onto the tangent space `{sum x_k = 0}` of the simplex.
pub(crate) fn tangent_projection(n: &[f64]) -> Vec<f64> {
    let mean = n.iter().sum::<f64>() / n.len() as f64;
    n.iter().map(|x| x - mean).collect()
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

impl ConvexBody for ActionSet {
    fn dim(&self) -> usize {
        ActionSet::dim(self)
    }

    fn value(&self, p: &Belief) -> f64 {
        self.support_value(p.probs())
    }

    fn optimal_face(&self, p: &Belief) -> Vec<Action> {
        self.support(p.probs()).argmax
    }

    fn ball_in_confidence_set(&self, p: &Belief, radius: f64) -> Result<bool> {
        let poly = confidence_set(self, &Prior::new(p.clone())?)?;
        Ok(ball_inside(&poly, p, radius))
    }

    fn confidence_set(&self, p: &Belief) -> Option<BeliefPolytope> {
        Prior::new(p.clone())
            .and_then(|prior| confidence_set(self, &prior))
            .ok()
    }
}

/// Whether the tangent ball of `radius` around `p` satisfies every halfspace
/// of `poly` and stays in the simplex.
pub(crate) fn ball_inside(poly: &BeliefPolytope, p: &Belief, radius: f64) -> bool {
    let k = p.dim() as f64;
    if p.min_prob() < radius * (1.0 - 1.0 / k).sqrt() {
        return false;
    }
    poly.halfspaces().iter().all(|h| {
        let reach = norm(&tangent_projection(h.normal.coords()));
        h.excess(p.probs()) + radius * reach <= 0.0
    })
}

/// The quadratic scoring rule body `v(p) = (1 + |p|^2) / 2`.
///
/// Its optimal action at `p` is `1/2 + p - |p|^2 / 2` (componentwise); for
/// two states `v(p) = 1 - p_2 (1 - p_2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticScoringBody {
    dim: usize,
}

impl QuadraticScoringBody {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput(format!("need at least two states, got {dim}")));
        }
        Ok(Self { dim })
    }

    pub fn action(&self, p: &Belief) -> Action {
        let sq: f64 = p.probs().iter().map(|x| x * x).sum();
        Action::new(p.probs().iter().map(|x| 0.5 + x - 0.5 * sq).collect())
            .expect("finite belief gives a finite action")
    }

    /// Finite approximation: the optimal actions at `points` evenly spaced
    /// two-state beliefs.
    pub fn sampled(points: usize) -> Result<ActionSet> {
        if points < 2 {
            return Err(Error::InvalidInput("need at least two sample points".into()));
        }
        let body = Self::new(2)?;
        let actions = (0..points)
            .map(|i| Belief::binary(i as f64 / (points - 1) as f64).map(|p| body.action(&p)))
            .collect::<Result<Vec<_>>>()?;
        ActionSet::from_points(actions)
    }
}

impl ConvexBody for QuadraticScoringBody {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, p: &Belief) -> f64 {
        0.5 * (1.0 + p.probs().iter().map(|x| x * x).sum::<f64>())
    }

    fn optimal_face(&self, p: &Belief) -> Vec<Action> {
        vec![self.action(p)]
    }

    fn ball_in_confidence_set(&self, _p: &Belief, _radius: f64) -> Result<bool> {
        Ok(false)
    }
}

/// `v(p)` for any body.
pub fn value_function<B: ConvexBody + ?Sized>(body: &B, p: &Belief) -> Result<f64> {
    check_dim(body.dim(), p.dim())?;
    Ok(body.value(p))
}

/// The optimal actions at `p`, as the exposed face in direction `p`.
pub fn optimal_actions(set: &ActionSet, p: &Belief) -> Result<ActionSet> {
    exposed_face(set, &SignedMeasure::from(p))
}

/// `E[v(q)] - v(prior)`. The structure must be valid for the prior.
pub fn voi<B: ConvexBody + ?Sized>(
    body: &B,
    prior: &Prior,
    info: &InformationStructure,
) -> Result<f64> {
    check_dim(body.dim(), prior.dim())?;
    validate_information_structure(info, prior)
        .into_result()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(info.expect(|q| body.value(q)) - body.value(prior.belief()))
}

/// Beliefs at which every optimal action at the prior stays optimal.
pub fn confidence_set(set: &ActionSet, prior: &Prior) -> Result<BeliefPolytope> {
    check_dim(set.dim(), prior.dim())?;
    let face = set.support(prior.probs()).argmax;
    let mut poly = BeliefPolytope::simplex(set.dim());
    for a in &face {
        for h in revealed_beliefs(set, a)?.halfspaces() {
            poly.push(Halfspace::new(h.normal.clone(), h.offset)?)?;
        }
    }
    Ok(poly)
}

/// True iff some positively weighted posterior leaves the confidence set.
pub fn is_valuable(set: &ActionSet, prior: &Prior, info: &InformationStructure) -> Result<bool> {
    validate_information_structure(info, prior)
        .into_result()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let poly = confidence_set(set, prior)?;
    Ok(info
        .atoms()
        .iter()
        .any(|a| a.weight > 0.0 && !poly.contains(&a.posterior)))
}
