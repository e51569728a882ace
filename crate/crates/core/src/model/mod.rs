//! Decision problems, priors and information structures.

mod io;

pub use io::{
    fmt_float, load_problem, save_problem, save_results, to_json_string, write_csv, CsvTable,
    ProblemFile,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ActionSet, Belief};
use crate::tol;

/// A finite decision problem: payoff `g(d, k)` of decision `d` in state `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionProblem {
    state_names: Vec<String>,
    decision_names: Vec<String>,
    payoffs: Vec<Vec<f64>>,
}

impl DecisionProblem {
    pub fn new(
        state_names: Vec<String>,
        decision_names: Vec<String>,
        payoffs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let mut problems = Vec::new();
        if state_names.len() < 2 {
            problems.push(format!("need at least 2 states, got {}", state_names.len()));
        }
        if decision_names.is_empty() {
            problems.push("need at least one decision".to_string());
        }
        if payoffs.len() != decision_names.len() {
            problems.push(format!(
                "{} payoff rows for {} decisions",
                payoffs.len(),
                decision_names.len()
            ));
        }
        for (i, row) in payoffs.iter().enumerate() {
            if row.len() != state_names.len() {
                problems.push(format!(
                    "payoff row {i} has {} entries, expected {}",
                    row.len(),
                    state_names.len()
                ));
            }
            if row.iter().any(|x| !x.is_finite()) {
                problems.push(format!("payoff row {i} has a non-finite entry"));
            }
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        Ok(Self {
            state_names,
            decision_names,
            payoffs,
        })
    }

    /// Unnamed problem from payoff rows; states and decisions are numbered.
    pub fn from_payoffs(payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let k = payoffs.first().map_or(0, Vec::len);
        Self::new(
            (1..=k).map(|i| format!("s{i}")).collect(),
            (1..=payoffs.len()).map(|i| format!("d{i}")).collect(),
            payoffs,
        )
    }

    pub fn states(&self) -> &[String] {
        &self.state_names
    }

    pub fn decisions(&self) -> &[String] {
        &self.decision_names
    }

    pub fn payoffs(&self) -> &[Vec<f64>] {
        &self.payoffs
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    /// The action set spanned by the payoff rows, reduced to extreme points.
    pub fn to_action_set(&self) -> Result<ActionSet> {
        ActionSet::from_rows(&self.payoffs)
    }
}

/// A full-support prior belief.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Prior(Belief);

impl Prior {
    pub fn new(belief: Belief) -> Result<Self> {
        if belief.min_prob() < tol::EPS_SUPPORT {
            return Err(Error::InvalidBelief(format!(
                "prior needs full support, smallest probability is {}",
                belief.min_prob()
            )));
        }
        Ok(Self(belief))
    }

    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        Self::new(Belief::new(probs)?)
    }

    pub fn binary(p2: f64) -> Result<Self> {
        Self::new(Belief::binary(p2)?)
    }

    pub fn belief(&self) -> &Belief {
        &self.0
    }

    pub fn probs(&self) -> &[f64] {
        self.0.probs()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

impl AsRef<Belief> for Prior {
    fn as_ref(&self) -> &Belief {
        &self.0
    }
}

/// One posterior of an information structure with its probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub posterior: Belief,
    pub weight: f64,
}

/// A finite distribution over posterior beliefs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InformationStructure {
    atoms: Vec<Atom>,
}

impl InformationStructure {
    /// Structural checks only (nonempty, common dimension, finite weights);
    /// Bayes plausibility is checked by [`validate_information_structure`].
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let dim = atoms.first().ok_or(Error::EmptyInput)?.posterior.dim();
        for a in &atoms {
            if a.posterior.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.posterior.dim(),
                });
            }
            if !a.weight.is_finite() {
                return Err(Error::NonFinite("atom weight"));
            }
        }
        Ok(Self { atoms })
    }

    pub fn from_pairs(pairs: Vec<(Belief, f64)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(posterior, weight)| Atom { posterior, weight })
                .collect(),
        )
    }

    /// The structure revealing nothing: one atom at the prior.
    pub fn null(prior: &Prior) -> Self {
        Self {
            atoms: vec![Atom {
                posterior: prior.belief().clone(),
                weight: 1.0,
            }],
        }
    }

    /// Two equally likely posteriors `prior ± step` for two states.
    pub fn symmetric_split(prior: &Prior, step: f64) -> Result<Self> {
        let p = prior.probs()[1];
        Self::from_pairs(vec![
            (Belief::binary(p - step)?, 0.5),
            (Belief::binary(p + step)?, 0.5),
        ])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].posterior.dim()
    }

    /// `sum_i w_i f(q_i)`.
    pub fn expect(&self, mut f: impl FnMut(&Belief) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.weight * f(&a.posterior)).sum()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for a in &self.atoms {
            for (mi, qi) in m.iter_mut().zip(a.posterior.probs()) {
                *mi += a.weight * qi;
            }
        }
        m
    }
}

/// Outcome of [`validate_information_structure`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `sum_i w_i - 1`.
    pub weight_sum_residual: f64,
    /// `sum_i w_i q_i - prior`, per coordinate.
    pub bayes_residuals: Vec<f64>,
    /// Indices of atoms with a nonpositive weight.
    pub nonpositive_weights: Vec<usize>,
    /// Indices of atoms whose posterior leaves the simplex.
    pub off_simplex: Vec<usize>,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_bayes_residual(&self) -> f64 {
        self.bayes_residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Validation(self.violations))
        }
    }
}

/// Checks weights and Bayes plausibility of `info` against `prior`.
pub fn validate_information_structure(info: &InformationStructure, prior: &Prior) -> ValidationReport {
    let mut violations = Vec::new();
    if info.dim() != prior.dim() {
        violations.push(format!(
            "posterior dimension {} differs from prior dimension {}",
            info.dim(),
            prior.dim()
        ));
        return ValidationReport {
            weight_sum_residual: f64::NAN,
            bayes_residuals: vec![],
            nonpositive_weights: vec![],
            off_simplex: vec![],
            violations,
        };
    }
    let total: f64 = info.atoms.iter().map(|a| a.weight).sum();
    let weight_sum_residual = total - 1.0;
    if weight_sum_residual.abs() > tol::FEAS {
        violations.push(format!("weights sum to {total}, not 1"));
    }
    let nonpositive_weights: Vec<usize> = info
        .atoms
        .iter()
        .enumerate()
        .filter(|(_, a)| a.weight <= 0.0)
        .map(|(i, _)| i)
        .collect();
    for &i in &nonpositive_weights {
        violations.push(format!("atom {i} has nonpositive weight {}", info.atoms[i].weight));
    }
    let off_simplex: Vec<usize> = info
        .atoms
        .iter()
        .enumerate()
        .filter(|(_, a)| {
            let p = a.posterior.probs();
            p.iter().any(|x| *x < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > tol::FEAS
        })
        .map(|(i, _)| i)
        .collect();
    for &i in &off_simplex {
        violations.push(format!("atom {i} posterior is not a probability vector"));
    }
    let bayes_residuals: Vec<f64> = info
        .mean()
        .iter()
        .zip(prior.probs())
        .map(|(m, p)| m - p)
        .collect();
    for (k, r) in bayes_residuals.iter().enumerate() {
        if r.abs() > tol::BAYES {
            violations.push(format!("Bayes residual {r:.3e} in state {k}"));
        }
    }
    ValidationReport {
        weight_sum_residual,
        bayes_residuals,
        nonpositive_weights,
        off_simplex,
        violations,
    }
}

/// Contracts every posterior toward the prior: `q -> prior + mix (q - prior)`.
pub fn garble(info: &InformationStructure, prior: &Prior, mix: f64) -> Result<InformationStructure> {
    if !(0.0..=1.0).contains(&mix) {
        return Err(Error::InvalidInput(format!("mix {mix} outside [0, 1]")));
    }
    validate_information_structure(info, prior)
        .into_result()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let atoms = info
        .atoms
        .iter()
        .map(|a| {
            let probs = a
                .posterior
                .probs()
                .iter()
                .zip(prior.probs())
                .map(|(q, p)| p + mix * (q - p))
                .collect();
            Ok(Atom {
                posterior: Belief::new(probs)?,
                weight: a.weight,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    InformationStructure::new(atoms)
}
