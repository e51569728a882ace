use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, dot, lp, norm, Belief, SignedMeasure};
use crate::tol;

/// The halfspace `<normal, p> <= offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: SignedMeasure,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: SignedMeasure, offset: f64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::NonFinite("halfspace offset"));
        }
        Ok(Self { normal, offset })
    }

    fn scale(&self) -> f64 {
        self.normal.norm().max(1.0)
    }

    /// Signed violation `<normal, p> - offset`.
    pub fn excess(&self, p: &[f64]) -> f64 {
        dot(self.normal.coords(), p) - self.offset
    }
}

/// A convex set of beliefs: the simplex cut by finitely many halfspaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefPolytope {
    dim: usize,
    halfspaces: Vec<Halfspace>,
}

impl BeliefPolytope {
    /// The whole simplex.
    pub fn simplex(dim: usize) -> Self {
        Self {
            dim,
            halfspaces: Vec::new(),
        }
    }

    pub fn new(dim: usize, halfspaces: Vec<Halfspace>) -> Result<Self> {
        let mut poly = Self::simplex(dim);
        for h in halfspaces {
            poly.push(h)?;
        }
        Ok(poly)
    }

    pub fn push(&mut self, h: Halfspace) -> Result<()> {
        if h.normal.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: h.normal.dim(),
            });
        }
        self.halfspaces.push(h);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Explicit halfspaces; the simplex constraints are implicit.
    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn contains(&self, p: &Belief) -> bool {
        p.dim() == self.dim
            && self
                .halfspaces
                .iter()
                .all(|h| h.excess(p.probs()) <= tol::FEAS * h.scale())
    }

    /// For two states, the set as an interval of the second-state
    /// probability; `None` when empty.
    pub fn interval(&self) -> Result<Option<(f64, f64)>> {
        if self.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: self.dim,
            });
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut slack = 0.0f64;
        for h in &self.halfspaces {
            // n0 (1 - x) + n1 x <= c  <=>  (n1 - n0) x <= c - n0
            let n = h.normal.coords();
            let slope = n[1] - n[0];
            let rhs = h.offset - n[0];
            let band = tol::FEAS * h.scale();
            slack = slack.max(band);
            if slope.abs() <= f64::EPSILON * h.scale() {
                if rhs < -band {
                    return Ok(None);
                }
            } else if slope > 0.0 {
                hi = hi.min(rhs / slope);
            } else {
                lo = lo.max(rhs / slope);
            }
        }
        if lo > hi {
            if lo - hi > slack {
                return Ok(None);
            }
            let mid = 0.5 * (lo + hi);
            return Ok(Some((mid, mid)));
        }
        Ok(Some((lo, hi)))
    }

    fn rows(&self) -> Vec<(&[f64], f64, f64)> {
        self.halfspaces
            .iter()
            .map(|h| (h.normal.coords(), h.offset, h.scale()))
            .collect()
    }

    /// Euclidean distance from `q` to the set.
    pub fn distance(&self, q: &Belief) -> Result<f64> {
        if self.contains(q) {
            return Ok(0.0);
        }
        Ok(project_onto_polytope(q, self)?.distance)
    }
}

/// True iff no belief satisfies every halfspace (within `TOL_FEAS`).
pub fn polytope_is_empty(poly: &BeliefPolytope) -> bool {
    if poly.halfspaces.is_empty() {
        return false;
    }
    if poly.dim == 2 {
        return matches!(poly.interval(), Ok(None));
    }
    match lp::min_violation(poly.dim, &poly.rows()) {
        Ok((t, _)) => t > tol::FEAS,
        Err(_) => true,
    }
}

/// Result of a Euclidean projection onto a [`BeliefPolytope`].
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub point: Belief,
    pub distance: f64,
    /// Largest KKT violation at the returned point.
    pub kkt_residual: f64,
}

const KKT_TOL: f64 = 1e-7;

/// Euclidean projection of `q` onto the polytope.
///
/// Two-state polytopes are handled by clamping on their interval; otherwise a
/// primal active-set method solves the projection QP exactly, starting from an
/// LP-feasible point.
pub fn project_onto_polytope(q: &Belief, poly: &BeliefPolytope) -> Result<Projection> {
    if q.dim() != poly.dim {
        return Err(Error::DimensionMismatch {
            expected: poly.dim,
            found: q.dim(),
        });
    }
    if poly.dim == 2 {
        let (lo, hi) = poly.interval()?.ok_or(Error::EmptyPolytope)?;
        let x = q.probs()[1].clamp(lo, hi);
        let point = Belief::binary(x)?;
        return Ok(Projection {
            distance: dist(point.probs(), q.probs()),
            point,
            kkt_residual: 0.0,
        });
    }
    ActiveSetProjection::new(q, poly)?.solve()
}

struct ActiveSetProjection {
    q: Vec<f64>,
    // normalized inequality rows g_i x <= h_i, simplex bounds included
    g: Vec<Vec<f64>>,
    h: Vec<f64>,
    x: Vec<f64>,
}

impl ActiveSetProjection {
    fn new(q: &Belief, poly: &BeliefPolytope) -> Result<Self> {
        let k = poly.dim;
        let (t, x0) = lp::min_violation(k, &poly.rows())?;
        if t > tol::FEAS {
            return Err(Error::EmptyPolytope);
        }
        let mut g = Vec::with_capacity(poly.halfspaces.len() + k);
        let mut h = Vec::with_capacity(poly.halfspaces.len() + k);
        for hs in &poly.halfspaces {
            let n = norm(hs.normal.coords());
            if n == 0.0 {
                continue;
            }
            g.push(hs.normal.coords().iter().map(|c| c / n).collect());
            h.push(hs.offset / n);
        }
        for i in 0..k {
            let mut row = vec![0.0; k];
            row[i] = -1.0;
            g.push(row);
            h.push(0.0);
        }
        Ok(Self {
            q: q.probs().to_vec(),
            g,
            h,
            x: x0,
        })
    }

    /// Constraint matrix of the working set, with the simplex equality first.
    fn matrix(&self, working: &[usize]) -> DMatrix<f64> {
        let k = self.q.len();
        DMatrix::from_fn(working.len() + 1, k, |r, c| {
            if r == 0 {
                1.0
            } else {
                self.g[working[r - 1]][c]
            }
        })
    }

    /// Multipliers `mu` with `x - q + M^T mu` as small as possible.
    fn multipliers(&self, m: &DMatrix<f64>) -> Option<DVector<f64>> {
        let r = DVector::from_iterator(self.q.len(), self.q.iter().zip(&self.x).map(|(q, x)| q - x));
        let gram = m * m.transpose();
        gram.lu().solve(&(m * r))
    }

    fn solve(mut self) -> Result<Projection> {
        let k = self.q.len();
        let mut working: Vec<usize> = Vec::new();
        let max_iter = 50 * (self.g.len() + k);
        for _ in 0..max_iter {
            let m = self.matrix(&working);
            let mu = self
                .multipliers(&m)
                .ok_or_else(|| Error::ConvergenceFailure("singular working set".into()))?;
            let r = DVector::from_iterator(k, self.q.iter().zip(&self.x).map(|(q, x)| q - x));
            let d = &r - m.transpose() * &mu;
            let dn = d.norm();
            if dn <= 1e-14 * (1.0 + norm(&self.x)) {
                // stationary on the working set: drop the most negative multiplier
                let (worst, lambda) = working
                    .iter()
                    .enumerate()
                    .map(|(j, _)| (j, mu[j + 1]))
                    .fold((usize::MAX, 0.0), |acc, (j, l)| if l < acc.1 { (j, l) } else { acc });
                if worst == usize::MAX || lambda >= -1e-12 {
                    return self.finish(&working, &mu);
                }
                working.remove(worst);
                continue;
            }
            let mut step = 1.0;
            let mut blocking = None;
            for (i, (gi, hi)) in self.g.iter().zip(&self.h).enumerate() {
                if working.contains(&i) {
                    continue;
                }
                let gd: f64 = gi.iter().zip(d.iter()).map(|(a, b)| a * b).sum();
                if gd > 1e-14 * dn {
                    let slack = (hi - dot(gi, &self.x)).max(0.0);
                    let alpha = slack / gd;
                    if alpha < step {
                        step = alpha;
                        blocking = Some(i);
                    }
                }
            }
            for (xi, di) in self.x.iter_mut().zip(d.iter()) {
                *xi += step * di;
            }
            if let Some(i) = blocking {
                working.push(i);
            }
        }
        Err(Error::ConvergenceFailure("active-set projection hit its iteration limit".into()))
    }

    fn finish(self, working: &[usize], mu: &DVector<f64>) -> Result<Projection> {
        let k = self.q.len();
        let mut residual = 0.0f64;
        // primal feasibility
        let total: f64 = self.x.iter().sum();
        residual = residual.max((total - 1.0).abs());
        for (gi, hi) in self.g.iter().zip(&self.h) {
            residual = residual.max(dot(gi, &self.x) - hi);
        }
        // stationarity, dual feasibility, complementarity
        let mut station: Vec<f64> = self.x.iter().zip(&self.q).map(|(x, q)| x - q).collect();
        for c in station.iter_mut() {
            *c += mu[0];
        }
        for (j, &i) in working.iter().enumerate() {
            let l = mu[j + 1];
            residual = residual.max(-l);
            residual = residual.max((l * (dot(&self.g[i], &self.x) - self.h[i])).abs());
            for c in 0..k {
                station[c] += l * self.g[i][c];
            }
        }
        residual = residual.max(norm(&station));
        if residual > KKT_TOL {
            return Err(Error::ConvergenceFailure(format!(
                "projection KKT residual {residual:.3e}"
            )));
        }
        let point = Belief::new(self.x)?;
        Ok(Projection {
            distance: dist(point.probs(), &self.q),
            point,
            kkt_residual: residual,
        })
    }
}
