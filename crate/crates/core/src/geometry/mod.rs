//! Finite-dimensional convex geometry on payoff vectors and beliefs.
//!
//! Payoff vectors (actions) and beliefs live in dual copies of `R^K`. An
//! [`ActionSet`] is stored by its extreme points; the value of a belief is the
//! support function of the set in that direction. Sets of beliefs are kept in
//! halfspace form ([`BeliefPolytope`]) intersected with the simplex.

mod hull;
pub(crate) mod lp;
mod polytope;

pub use hull::hull_reduce;
pub use polytope::{polytope_is_empty, project_onto_polytope, BeliefPolytope, Halfspace, Projection};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_finite(v: &[f64], what: &'static str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::EmptyInput);
    }
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// An unconstrained weighting of the states of nature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignedMeasure(Vec<f64>);

impl SignedMeasure {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_finite(&coords, "signed measure")?;
        Ok(Self(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl From<&Belief> for SignedMeasure {
    fn from(p: &Belief) -> Self {
        Self(p.probs.clone())
    }
}

/// A probability vector over the `K` states.
///
/// Entries down to `-TOL_FEAS` are accepted and clamped to zero; the sum must
/// be one within `TOL_FEAS`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Belief {
    probs: Vec<f64>,
}

impl Belief {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_finite(&probs, "belief")?;
        if probs.len() < 2 {
            return Err(Error::InvalidBelief(format!(
                "need at least two states, got {}",
                probs.len()
            )));
        }
        if let Some(x) = probs.iter().find(|&&x| x < -tol::FEAS) {
            return Err(Error::InvalidBelief(format!("negative probability {x}")));
        }
        let probs: Vec<f64> = probs.into_iter().map(|x| x.max(0.0)).collect();
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tol::FEAS {
            return Err(Error::InvalidBelief(format!("probabilities sum to {total}")));
        }
        Ok(Self { probs })
    }

    /// Two-state belief given the probability of the second state.
    pub fn binary(p2: f64) -> Result<Self> {
        Self::new(vec![1.0 - p2, p2])
    }

    /// Belief from reduced chart coordinates `(p_2, ..., p_K)`.
    pub fn from_chart(x: &[f64]) -> Result<Self> {
        let mut probs = Vec::with_capacity(x.len() + 1);
        probs.push(1.0 - x.iter().sum::<f64>());
        probs.extend_from_slice(x);
        Self::new(probs)
    }

    pub fn uniform(dim: usize) -> Self {
        Self {
            probs: vec![1.0 / dim as f64; dim],
        }
    }

    pub fn vertex(dim: usize, k: usize) -> Self {
        let mut probs = vec![0.0; dim];
        probs[k] = 1.0;
        Self { probs }
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Reduced chart coordinates: the belief without its first entry.
    pub fn chart(&self) -> &[f64] {
        &self.probs[1..]
    }

    pub fn min_prob(&self) -> f64 {
        self.probs.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `self + t (other - self)`.
    pub fn lerp(&self, other: &Belief, t: f64) -> Result<Belief> {
        Belief::new(
            self.probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| a + t * (b - a))
                .collect(),
        )
    }
}

impl<'de> Deserialize<'de> for Belief {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Belief::new(v).map_err(serde::de::Error::custom)
    }
}

/// A payoff vector: expected payoff per state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Action(Vec<f64>);

impl Action {
    pub fn new(payoffs: Vec<f64>) -> Result<Self> {
        check_finite(&payoffs, "action")?;
        Ok(Self(payoffs))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    /// Expected payoff under a weighting of the states.
    pub fn pairing(&self, s: &[f64]) -> f64 {
        dot(&self.0, s)
    }
}

/// Value of the support function and the vertices attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct Support {
    pub value: f64,
    pub argmax: Vec<Action>,
}

/// The closed convex hull of finitely many payoff vectors, stored by its
/// vertices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActionSet {
    vertices: Vec<Action>,
    reduced: bool,
}

impl ActionSet {
    /// Wraps the points without hull reduction.
    pub fn from_points(points: Vec<Action>) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptyInput)?.dim();
        if let Some(bad) = points.iter().find(|a| a.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Self {
            vertices: points,
            reduced: false,
        })
    }

    /// Wraps rows of payoffs and reduces them to extreme points.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let points = rows
            .iter()
            .map(|r| Action::new(r.clone()))
            .collect::<Result<Vec<_>>>()?;
        hull_reduce(points)
    }

    pub(crate) fn reduced_unchecked(vertices: Vec<Action>) -> Self {
        Self {
            vertices,
            reduced: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn vertices(&self) -> &[Action] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    /// Largest Euclidean norm over the set.
    pub fn max_norm(&self) -> f64 {
        self.vertices.iter().map(Action::norm).fold(0.0, f64::max)
    }

    /// Largest absolute payoff entry, used to scale tolerances.
    pub fn payoff_scale(&self) -> f64 {
        self.vertices
            .iter()
            .flat_map(|a| a.payoffs().iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `sigma_A(s) = max_a <s, a>` with every vertex within the face tolerance
    /// of the maximum.
    pub fn support(&self, s: &[f64]) -> Support {
        let values: Vec<f64> = self.vertices.iter().map(|a| a.pairing(s)).collect();
        let value = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let band = tol::face(value);
        let argmax = self
            .vertices
            .iter()
            .zip(&values)
            .filter(|(_, &v)| v >= value - band)
            .map(|(a, _)| a.clone())
            .collect();
        Support { value, argmax }
    }

    /// Value only; skips building the argmax list.
    pub fn support_value(&self, s: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|a| a.pairing(s))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether `a` lies in the convex hull, within `TOL_FEAS` in L1 residual.
    pub fn contains(&self, a: &Action) -> Result<bool> {
        Ok(self.hull_residual(a)? <= tol::FEAS * (1.0 + self.payoff_scale()))
    }

    pub(crate) fn hull_residual(&self, a: &Action) -> Result<f64> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.dim(),
            });
        }
        let pts: Vec<&[f64]> = self.vertices.iter().map(|v| v.payoffs()).collect();
        lp::hull_residual(&pts, a.payoffs())
    }

    /// Centroid of the vertices.
    pub fn centroid(&self) -> Action {
        let k = self.dim();
        let n = self.vertices.len() as f64;
        let mut c = vec![0.0; k];
        for v in &self.vertices {
            for (ci, vi) in c.iter_mut().zip(v.payoffs()) {
                *ci += vi / n;
            }
        }
        Action(c)
    }
}

/// `sigma_A(s)` together with its maximizing vertices.
pub fn support_function(set: &ActionSet, s: &SignedMeasure) -> Result<Support> {
    if s.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: s.dim(),
        });
    }
    Ok(set.support(s.coords()))
}

/// The exposed face `F_A(s)` as a (reduced) action set.
pub fn exposed_face(set: &ActionSet, s: &SignedMeasure) -> Result<ActionSet> {
    let sup = support_function(set, s)?;
    Ok(ActionSet {
        vertices: sup.argmax,
        reduced: set.reduced,
    })
}

/// Beliefs under which `a` is optimal: `N_A(a)` intersected with the simplex.
pub fn revealed_beliefs(set: &ActionSet, a: &Action) -> Result<BeliefPolytope> {
    let residual = set.hull_residual(a)?;
    if residual > tol::FEAS * (1.0 + set.payoff_scale()) {
        return Err(Error::NotMember { residual });
    }
    let mut poly = BeliefPolytope::simplex(set.dim());
    for v in set.vertices() {
        let normal = sub(v.payoffs(), a.payoffs());
        if normal.iter().all(|x| *x == 0.0) {
            continue;
        }
        poly.push(Halfspace::new(SignedMeasure(normal), 0.0)?)?;
    }
    Ok(poly)
}

/// Halfspaces of the normal cone at `a` in the full signed-measure space
/// (no simplex restriction): `<s, a' - a> <= 0` for every vertex `a'`.
pub fn normal_cone(set: &ActionSet, a: &Action) -> Vec<Halfspace> {
    set.vertices()
        .iter()
        .map(|v| Halfspace {
            normal: SignedMeasure(sub(v.payoffs(), a.payoffs())),
            offset: 0.0,
        })
        .collect()
}
