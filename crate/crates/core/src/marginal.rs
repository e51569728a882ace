//! Parameterized families of information and the order of their value as
//! the amount of information `theta` shrinks.
//!
//! All families are two-state. State index 1 plays the role of the
//! "success" state: Brownian drift, the higher Poisson intensity, and the
//! coordinate that binary signals move.

use serde::Serialize;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::analysis::{confidence_set, voi, ConvexBody, QuadraticScoringBody};
use crate::error::{Error, Result};
use crate::geometry::{ActionSet, Belief};
use crate::model::{validate_information_structure, CsvTable, InformationStructure, Prior};
use crate::tol;

/// The shape of a family of signals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum FamilyKind {
    /// Observe `Z ~ N(k theta, theta)` in state `k`.
    Brownian,
    /// Observe a count `N ~ Poisson(rho_k theta)` in state `k`.
    Poisson { rho0: f64, rho1: f64 },
    /// Two equally likely posteriors `mu +- theta^alpha`.
    BinarySplit { alpha: f64 },
}

/// Discretization settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quadrature {
    /// Gauss-Hermite nodes for the Brownian family.
    pub nodes: usize,
    /// Counts `0..n_max` are kept separately; larger counts are lumped.
    pub n_max: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { nodes: 64, n_max: 4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InfoFamily {
    pub kind: FamilyKind,
    pub quadrature: Quadrature,
}

impl InfoFamily {
    pub fn brownian() -> Self {
        Self::new(FamilyKind::Brownian)
    }

    pub fn poisson(rho0: f64, rho1: f64) -> Result<Self> {
        if !(rho0 > 0.0 && rho1 > rho0 && rho1.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "Poisson intensities need rho1 > rho0 > 0, got ({rho0}, {rho1})"
            )));
        }
        Ok(Self::new(FamilyKind::Poisson { rho0, rho1 }))
    }

    pub fn binary_split(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("exponent {alpha} must be positive")));
        }
        Ok(Self::new(FamilyKind::BinarySplit { alpha }))
    }

    fn new(kind: FamilyKind) -> Self {
        Self {
            kind,
            quadrature: Quadrature::default(),
        }
    }

    pub fn with_quadrature(mut self, quadrature: Quadrature) -> Self {
        self.quadrature = quadrature;
        self
    }

    /// Largest `theta` used by [`default_theta_grid`].
    pub fn theta_max(&self) -> f64 {
        match self.kind {
            FamilyKind::BinarySplit { alpha } => 0.1f64.min(0.05f64.powf(1.0 / alpha)),
            _ => 0.1,
        }
    }
}

/// Nodes and weights of the `n`-point Gauss-Hermite rule for the standard
/// normal distribution (Golub-Welsch). Weights sum to one.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one quadrature node".into()));
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| (eig.eigenvalues[j], eig.eigenvectors[(0, j)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    Ok(pairs.into_iter().map(|(z, w)| (z, w / total)).unzip())
}

fn poisson_pmf(lambda: f64, n: usize) -> f64 {
    let log = -lambda + n as f64 * lambda.ln() - (1..=n).map(|i| (i as f64).ln()).sum::<f64>();
    log.exp()
}

fn poisson_tail(lambda: f64, from: usize) -> f64 {
    let mut term = poisson_pmf(lambda, from);
    let mut total = 0.0;
    let mut n = from;
    while term > 0.0 && (term > 1e-18 * total || (n as f64) < lambda) {
        total += term;
        n += 1;
        term *= lambda / n as f64;
        if n > from + 10_000 {
            break;
        }
    }
    total
}

/// Posteriors from per-signal likelihoods: each entry is
/// `(P(signal | state 0), P(signal | state 1))`.
fn from_likelihoods(prior: &Prior, likelihoods: &[(f64, f64)]) -> Result<InformationStructure> {
    let mu = prior.probs()[1];
    let mut pairs = Vec::with_capacity(likelihoods.len());
    for &(l0, l1) in likelihoods {
        let w = mu * l1 + (1.0 - mu) * l0;
        if w > 0.0 {
            pairs.push((Belief::binary(mu * l1 / w)?, w));
        }
    }
    InformationStructure::from_pairs(pairs)
}

/// The structure observed at `theta` by an agent holding `prior`.
pub fn instantiate(family: &InfoFamily, prior: &Prior, theta: f64) -> Result<InformationStructure> {
    if prior.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: prior.dim(),
        });
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidInput(format!("theta {theta} must be positive")));
    }
    let mu = prior.probs()[1];
    let info = match family.kind {
        FamilyKind::BinarySplit { alpha } => {
            let step = theta.powf(alpha);
            if step >= mu.min(1.0 - mu) {
                return Err(Error::ThetaTooLarge { theta });
            }
            InformationStructure::from_pairs(vec![
                (Belief::binary(mu - step)?, 0.5),
                (Belief::binary(mu + step)?, 0.5),
            ])?
        }
        FamilyKind::Poisson { rho0, rho1 } => {
            let n_max = family.quadrature.n_max;
            let (lam0, lam1) = (rho0 * theta, rho1 * theta);
            let mut lik: Vec<(f64, f64)> = (0..n_max)
                .map(|n| (poisson_pmf(lam0, n), poisson_pmf(lam1, n)))
                .collect();
            lik.push((poisson_tail(lam0, n_max), poisson_tail(lam1, n_max)));
            from_likelihoods(prior, &lik)?
        }
        FamilyKind::Brownian => {
            let (nodes, weights) = gauss_hermite(family.quadrature.nodes)?;
            let root = theta.sqrt();
            let raw: Vec<(f64, f64)> = nodes
                .iter()
                .zip(&weights)
                .map(|(z, w)| {
                    (
                        w * (-z * root / 2.0 - theta / 8.0).exp(),
                        w * (z * root / 2.0 - theta / 8.0).exp(),
                    )
                })
                .collect();
            let s0: f64 = raw.iter().map(|l| l.0).sum();
            let s1: f64 = raw.iter().map(|l| l.1).sum();
            let lik: Vec<(f64, f64)> = raw.iter().map(|(a, b)| (a / s0, b / s1)).collect();
            from_likelihoods(prior, &lik)?
        }
    };
    let report = validate_information_structure(&info, prior);
    if report.max_bayes_residual() > tol::BAYES || report.weight_sum_residual.abs() > tol::FEAS {
        return Err(Error::QuadratureResidual(
            report.max_bayes_residual().max(report.weight_sum_residual.abs()),
        ));
    }
    Ok(info)
}

/// Order of the marginal value of information.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum MarginalClass {
    Zero,
    Finite,
    Infinite,
}

impl MarginalClass {
    /// `0`, `1` or `inf`.
    pub fn symbol(&self) -> &'static str {
        match self {
            Self::Zero => "0",
            Self::Finite => "1",
            Self::Infinite => "inf",
        }
    }

    /// Zero above `1 + band`, Finite within, Infinite below `1 - band`.
    pub fn from_slope(slope: f64, band: f64) -> Self {
        if slope > 1.0 + band {
            Self::Zero
        } else if slope < 1.0 - band {
            Self::Infinite
        } else {
            Self::Finite
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginalReport {
    pub theta_grid: Vec<f64>,
    pub voi_values: Vec<f64>,
    /// Log-log slope; absent when fewer than two values are positive.
    pub slope: Option<f64>,
    pub classification: MarginalClass,
}

/// Values at or below this are treated as zero when fitting slopes.
pub const VOI_FLOOR: f64 = 1e-14;

/// Ordinary least-squares slope of `ys` on `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// `points_per_decade * decades + 1` values decreasing geometrically from
/// the family's largest `theta`.
pub fn default_theta_grid(family: &InfoFamily, decades: usize, points_per_decade: usize) -> Vec<f64> {
    let top = family.theta_max();
    let total = decades * points_per_decade;
    (0..=total)
        .map(|i| top * 10f64.powf(-(i as f64) / points_per_decade as f64))
        .collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 4 {
        return Err(Error::DegenerateGrid(format!("{} points, need at least 4", grid.len())));
    }
    if grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::DegenerateGrid("theta values must be positive".into()));
    }
    if grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::DegenerateGrid("theta grid must be decreasing".into()));
    }
    if grid[0] / grid[grid.len() - 1] < 100.0 * (1.0 - 1e-12) {
        return Err(Error::DegenerateGrid("theta grid must span two decades".into()));
    }
    Ok(())
}

/// VoI along the grid and the order of `VoI(theta) / theta` as
/// `theta -> 0`, read from the log-log slope.
pub fn marginal_voi<B: ConvexBody + ?Sized>(
    body: &B,
    prior: &Prior,
    family: &InfoFamily,
    theta_grid: &[f64],
    band: f64,
) -> Result<MarginalReport> {
    check_grid(theta_grid)?;
    let voi_values = theta_grid
        .iter()
        .map(|&t| voi(body, prior, &instantiate(family, prior, t)?))
        .collect::<Result<Vec<f64>>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = theta_grid
        .iter()
        .zip(&voi_values)
        .filter(|(_, v)| **v > VOI_FLOOR)
        .map(|(t, v)| (t.ln(), v.ln()))
        .unzip();
    let slope = least_squares_slope(&xs, &ys);
    let classification = match slope {
        Some(s) => MarginalClass::from_slope(s, band),
        None => MarginalClass::Zero,
    };
    Ok(MarginalReport {
        theta_grid: theta_grid.to_vec(),
        voi_values,
        slope,
        classification,
    })
}

/// Settings for [`classification_grid`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridConfig {
    pub quadrature: Quadrature,
    pub band: f64,
    pub decades: usize,
    pub points_per_decade: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            quadrature: Quadrature::default(),
            band: 0.1,
            decades: 4,
            points_per_decade: 2,
        }
    }
}

/// The three test problems, in column order.
pub const REGIMES: [&str; 3] = ["confident", "undecided", "flexible"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridRow {
    pub family: String,
    pub kind: FamilyKind,
    pub cells: Vec<MarginalReport>,
}

impl GridRow {
    pub fn symbols(&self) -> Vec<&'static str> {
        self.cells.iter().map(|c| c.classification.symbol()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationGrid {
    pub config: GridConfig,
    /// Upper end of the confidence interval at the confident prior.
    pub confident_upper: f64,
    pub rows: Vec<GridRow>,
}

impl ClassificationGrid {
    /// Rows = families, columns = regimes, cells in `{0, 1, inf}`.
    pub fn to_table(&self) -> CsvTable {
        let mut header = vec!["family"];
        header.extend(REGIMES);
        let mut table = CsvTable::new(&header);
        for row in &self.rows {
            let mut cells = vec![row.family.clone()];
            cells.extend(row.symbols().into_iter().map(String::from));
            table.push(cells);
        }
        table
    }
}

/// Decision problem with payoffs `(3,0), (2,2), (0,5/2), (0,0)`.
pub fn kinked_problem() -> ActionSet {
    ActionSet::from_rows(&[
        vec![3.0, 0.0],
        vec![2.0, 2.0],
        vec![0.0, 2.5],
        vec![0.0, 0.0],
    ])
    .expect("fixed payoffs are valid")
}

/// Runs every family against a confident prior (`1/2` on the kinked
/// problem), an undecided prior (`1/3`, its kink) and a flexible prior (`1/2`
/// on the quadratic scoring rule). The two Poisson variants put the belief
/// after one success `0.1` above and below the upper end of the confident
/// prior's confidence interval.
pub fn classification_grid(config: &GridConfig) -> Result<ClassificationGrid> {
    let kinked = kinked_problem();
    let scoring = QuadraticScoringBody::new(2)?;
    let confident = Prior::binary(0.5)?;
    let undecided = Prior::binary(1.0 / 3.0)?;
    let flexible = Prior::binary(0.5)?;

    let (_, upper) = confidence_set(&kinked, &confident)?
        .interval()?
        .ok_or(Error::EmptyPolytope)?;
    let mu = confident.probs()[1];
    let rho_for = |target: f64| (target / (1.0 - target)) * (1.0 - mu) / mu;

    let mut families: Vec<(String, InfoFamily)> = vec![
        ("brownian".into(), InfoFamily::brownian()),
        ("poisson_jump_outside".into(), InfoFamily::poisson(1.0, rho_for(upper + 0.1))?),
        ("poisson_jump_inside".into(), InfoFamily::poisson(1.0, rho_for(upper - 0.1))?),
    ];
    for alpha in [0.25, 0.5, 0.75, 1.0, 2.0] {
        families.push((format!("binary_alpha_{alpha}"), InfoFamily::binary_split(alpha)?));
    }

    let mut rows = Vec::with_capacity(families.len());
    for (name, family) in families {
        let family = family.with_quadrature(config.quadrature);
        let grid = default_theta_grid(&family, config.decades, config.points_per_decade);
        let cells = vec![
            marginal_voi(&kinked, &confident, &family, &grid, config.band)?,
            marginal_voi(&kinked, &undecided, &family, &grid, config.band)?,
            marginal_voi(&scoring, &flexible, &family, &grid, config.band)?,
        ];
        rows.push(GridRow {
            family: name,
            kind: family.kind,
            cells,
        });
    }
    Ok(ClassificationGrid {
        config: *config,
        confident_upper: upper,
        rows,
    })
}
