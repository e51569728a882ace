use std::collections::BTreeMap;

use serde::Serialize;

use crate::analysis::grid::{for_each_grid_point, grid_subdivisions};
use crate::analysis::kernel::{max_tangent_spread, seminorm_on, spanning_vertices};
use crate::analysis::regime::{classify_prior, Regime};
use crate::analysis::{check_dim, confidence_set, voi, ConvexBody};
use crate::error::{Error, Result};
use crate::geometry::{dist, dot, sub, Action, ActionSet, Belief, BeliefPolytope};
use crate::model::{InformationStructure, Prior};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    /// Confidence-set bound.
    Confident,
    /// Indifference-seminorm bound at a kink.
    Undecided,
    /// Quadratic bound at a flexible prior.
    Flexible,
}

/// `lower <= voi <= upper`, with the constants that produced the bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCertificate {
    pub kind: BoundKind,
    pub lower: f64,
    pub voi: f64,
    pub upper: f64,
    pub details: BTreeMap<String, f64>,
}

impl BoundCertificate {
    /// Whether the sandwich holds within the certificate tolerance; for the
    /// seminorm bound the inner value must also sit between `lower` and `voi`.
    pub fn holds(&self) -> bool {
        let t = tol::cert(self.voi);
        let outer = self.lower <= self.voi + t && self.voi <= self.upper + t;
        match self.details.get("inner") {
            Some(&inner) => outer && self.lower <= inner + t && inner <= self.voi + t,
            None => outer,
        }
    }

    fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

/// Largest number of grid points visited when minimizing over the simplex.
const GRID_BUDGET: f64 = 6e5;

fn default_pitch(dim: usize) -> f64 {
    let mut n = 1000usize;
    while n > 4 && binomial(n + dim - 1, dim - 1) > GRID_BUDGET {
        n = (n as f64 * 0.9) as usize;
    }
    1.0 / n as f64
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `phi_a(q) = v(q) - v(mu) - <q - mu, a>` for `a` optimal at `mu`.
fn phi(set: &ActionSet, a: &[f64], q: &[f64]) -> f64 {
    set.vertices()
        .iter()
        .map(|v| dot(q, &sub(v.payoffs(), a)))
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0)
}

/// Confidence-set certificate with the default grid pitch.
pub fn confident_bounds(
    set: &ActionSet,
    prior: &Prior,
    info: &InformationStructure,
    epsilon: f64,
) -> Result<BoundCertificate> {
    confident_bounds_with_pitch(set, prior, info, epsilon, None)
}

/// `c_eps P{d(q, C) >= eps} <= VoI <= C_A E[d(q, C)]`, `C` the confidence set.
///
/// `C_A` is the smallest, over the optimal vertices at the prior and their
/// centroid `a`, of `max_{a'} |a - a'|`. `c_eps` is the minimum of `phi_a`
/// (with `a` the centroid) over beliefs at distance at least `eps` from `C`:
/// exact for two states, and for more states a grid minimum lowered by the
/// Lipschitz constant of `phi_a` times the grid covering radius.
pub fn confident_bounds_with_pitch(
    set: &ActionSet,
    prior: &Prior,
    info: &InformationStructure,
    epsilon: f64,
    pitch: Option<f64>,
) -> Result<BoundCertificate> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon {epsilon} must be positive")));
    }
    let value = voi(set, prior, info)?;
    let poly = confidence_set(set, prior)?;
    let face = set.support(prior.probs()).argmax;
    let centroid = ActionSet::from_points(face.clone())?.centroid();

    let spread = |a: &[f64]| {
        set.vertices()
            .iter()
            .map(|v| dist(v.payoffs(), a))
            .fold(0.0, f64::max)
    };
    let big_c = face
        .iter()
        .chain(std::iter::once(&centroid))
        .map(|a| spread(a.payoffs()))
        .fold(f64::INFINITY, f64::min);

    let mut expected_distance = 0.0;
    let mut far = 0.0;
    for atom in info.atoms() {
        let d = poly.distance(&atom.posterior)?;
        expected_distance += atom.weight * d;
        if d >= epsilon {
            far += atom.weight;
        }
    }

    let a = centroid.payoffs();
    let (small_c, used_pitch) = if set.dim() == 2 {
        (min_phi_two_states(set, &poly, a, epsilon)?, 0.0)
    } else {
        let pitch = pitch.unwrap_or_else(|| default_pitch(set.dim()));
        (min_phi_on_grid(set, &poly, prior, a, epsilon, pitch)?, pitch)
    };

    Ok(BoundCertificate {
        kind: BoundKind::Confident,
        lower: small_c * far,
        voi: value,
        upper: big_c * expected_distance,
        details: BTreeMap::new(),
    }
    .detail("epsilon", epsilon)
    .detail("C_A", big_c)
    .detail("c_eps", small_c)
    .detail("expected_distance", expected_distance)
    .detail("far_probability", far)
    .detail("pitch", used_pitch))
}

fn min_phi_two_states(set: &ActionSet, poly: &BeliefPolytope, a: &[f64], eps: f64) -> Result<f64> {
    let (lo, hi) = poly.interval()?.ok_or(Error::EmptyPolytope)?;
    let shift = eps / std::f64::consts::SQRT_2;
    let mut best = f64::INFINITY;
    for x in [lo - shift, hi + shift] {
        if (0.0..=1.0).contains(&x) {
            best = best.min(phi(set, a, Belief::binary(x)?.probs()));
        }
    }
    Ok(if best.is_finite() { best } else { 0.0 })
}

fn min_phi_on_grid(
    set: &ActionSet,
    poly: &BeliefPolytope,
    prior: &Prior,
    a: &[f64],
    eps: f64,
    pitch: f64,
) -> Result<f64> {
    let k = set.dim();
    let n = grid_subdivisions(pitch)?;
    let cover = (k as f64).sqrt() / n as f64;
    let lipschitz = max_tangent_spread(set, a);
    let reach = eps - cover;

    let mut points: Vec<(f64, Vec<f64>)> = Vec::new();
    for_each_grid_point(k, n, |p| points.push((phi(set, a, p), p.to_vec())));
    points.sort_by(|x, y| x.0.total_cmp(&y.0));

    for (value, p) in points {
        if reach > 0.0 && dist(&p, prior.probs()) < reach {
            continue;
        }
        let q = Belief::new(p)?;
        if reach > 0.0 && (poly.contains(&q) || poly.distance(&q)? < reach) {
            continue;
        }
        return Ok((value - lipschitz * cover).max(0.0));
    }
    Ok(0.0)
}

/// Seminorm certificate at an undecided prior:
/// `E[|q - mu|_F] <= VoI_F <= VoI <= max|a| E|q - mu|`, where `VoI_F` uses
/// only the optimal actions at the prior.
pub fn undecided_bounds(
    set: &ActionSet,
    prior: &Prior,
    info: &InformationStructure,
) -> Result<BoundCertificate> {
    check_dim(set.dim(), prior.dim())?;
    let face = set.support(prior.probs()).argmax;
    if face.len() < 2 {
        return Err(Error::NotUndecided);
    }
    let value = voi(set, prior, info)?;
    let face_set = ActionSet::from_points(face.clone())?;
    let inner = voi(&face_set, prior, info)?;
    let spanning: Vec<Action> = spanning_vertices(&face);
    let big_c = set.max_norm();
    let mut lower = 0.0;
    let mut expected_norm = 0.0;
    for atom in info.atoms() {
        let s = sub(atom.posterior.probs(), prior.probs());
        lower += atom.weight * seminorm_on(&spanning, &s);
        expected_norm += atom.weight * crate::geometry::norm(&s);
    }
    Ok(BoundCertificate {
        kind: BoundKind::Undecided,
        lower,
        voi: value,
        upper: big_c * expected_norm,
        details: BTreeMap::new(),
    }
    .detail("inner", inner)
    .detail("C_A", big_c)
    .detail("expected_norm", expected_norm)
    .detail("spanning_vertices", spanning.len() as f64))
}

fn chart_sq(p: &[f64], mu: &[f64]) -> f64 {
    p[1..].iter().zip(&mu[1..]).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Quadratic certificate at a flexible prior:
/// `c E|q - mu|^2 <= VoI <= C E|q - mu|^2` in chart coordinates, with `c`,
/// `C` the extremes of `(v(p) - v(mu) - <p - mu, a>) / |p - mu|^2` over a
/// simplex grid of the given pitch together with the posteriors of `info`.
pub fn flexible_bounds<B: ConvexBody + ?Sized>(
    body: &B,
    prior: &Prior,
    info: &InformationStructure,
    pitch: Option<f64>,
) -> Result<BoundCertificate> {
    let report = classify_prior(body, prior)?;
    if report.regime != Regime::Flexible {
        return Err(Error::NotFlexible(format!("{:?}", report.regime)));
    }
    let value = voi(body, prior, info)?;
    let mu = prior.belief();
    let v_mu = body.value(mu);
    let sharp = body.optimal_face(mu).swap_remove(0);
    let ratio = |p: &Belief| -> Option<f64> {
        let sq = chart_sq(p.probs(), mu.probs());
        if sq <= 1e-14 {
            return None;
        }
        let gap = body.value(p) - v_mu - dot(&sub(p.probs(), mu.probs()), sharp.payoffs());
        Some(gap / sq)
    };

    let pitch = pitch.unwrap_or_else(|| default_pitch(body.dim()));
    let n = grid_subdivisions(pitch)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut failure = None;
    for_each_grid_point(body.dim(), n, |p| {
        match Belief::new(p.to_vec()) {
            Ok(b) => {
                if let Some(g) = ratio(&b) {
                    lo = lo.min(g);
                    hi = hi.max(g);
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let mut expected_sq = 0.0;
    for atom in info.atoms() {
        if let Some(g) = ratio(&atom.posterior) {
            lo = lo.min(g);
            hi = hi.max(g);
        }
        expected_sq += atom.weight * chart_sq(atom.posterior.probs(), mu.probs());
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::DegenerateGrid(format!("no grid point away from the prior at pitch {pitch}")));
    }
    Ok(BoundCertificate {
        kind: BoundKind::Flexible,
        lower: lo * expected_sq,
        voi: value,
        upper: hi * expected_sq,
        details: BTreeMap::new(),
    }
    .detail("c", lo)
    .detail("C", hi)
    .detail("expected_sq", expected_sq)
    .detail("pitch", pitch))
}
