//! Random instances shared by the integration suites.
#![allow(dead_code)]

use rand::Rng;
use voi_core::{Action, ActionSet, Belief, InformationStructure, InsuranceParams, Prior};

/// Full-support belief with every coordinate at least `floor`.
pub fn interior_belief(rng: &mut impl Rng, k: usize, floor: f64) -> Belief {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let scale = 1.0 - floor * k as f64;
    Belief::new(raw.iter().map(|x| floor + scale * x / total).collect()).unwrap()
}

pub fn prior(rng: &mut impl Rng, k: usize) -> Prior {
    Prior::new(interior_belief(rng, k, 0.05)).unwrap()
}

/// Between two and `max_vertices` payoff vectors with coordinates in
/// `[-5, 5]`, rounded to quarters so that ties occur.
pub fn payoff_rows(rng: &mut impl Rng, k: usize, max_vertices: usize) -> Vec<Vec<f64>> {
    let n = rng.gen_range(2..=max_vertices);
    (0..n)
        .map(|_| (0..k).map(|_| (rng.gen_range(-20..=20) as f64) / 4.0).collect())
        .collect()
}

pub fn action_set(rng: &mut impl Rng, k: usize, max_vertices: usize) -> ActionSet {
    ActionSet::from_rows(&payoff_rows(rng, k, max_vertices)).unwrap()
}

/// Largest `t` with `mu + t d` and `mu - t d` both in the simplex.
fn max_step(mu: &[f64], d: &[f64]) -> f64 {
    mu.iter()
        .zip(d)
        .filter(|(_, di)| di.abs() > 0.0)
        .map(|(m, di)| m / di.abs())
        .fold(f64::INFINITY, f64::min)
}

/// Up to `max_atoms` posteriors averaging exactly to the prior, built from
/// symmetric pairs along random tangent directions. The fraction `reach` of
/// the feasible step is drawn log-uniformly from `[1e-3, 1]`.
pub fn information(rng: &mut impl Rng, prior: &Prior, max_atoms: usize) -> InformationStructure {
    let mu = prior.probs();
    let k = mu.len();
    let pairs = rng.gen_range(1..=(max_atoms / 2).max(1));
    let mut atoms = Vec::with_capacity(2 * pairs);
    for _ in 0..pairs {
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = raw.iter().sum::<f64>() / k as f64;
        let d: Vec<f64> = raw.iter().map(|x| x - mean).collect();
        let reach = 10f64.powf(rng.gen_range(-3.0..0.0));
        let t = 0.999 * reach * max_step(mu, &d);
        let w = 1.0 / pairs as f64;
        for sign in [1.0, -1.0] {
            let q: Vec<f64> = mu.iter().zip(&d).map(|(m, di)| (m + sign * t * di).max(0.0)).collect();
            let total: f64 = q.iter().sum();
            let q: Vec<f64> = q.iter().map(|x| x / total).collect();
            atoms.push((Belief::new(q).unwrap(), w / 2.0));
        }
    }
    InformationStructure::from_pairs(atoms).unwrap()
}

/// Two posteriors `mu2 - a` and `mu2 + b` on two states, weighted so that
/// they average to the prior.
pub fn two_atoms(rng: &mut impl Rng, prior: &Prior) -> InformationStructure {
    let mu = prior.probs()[1];
    let lo = rng.gen_range(0.0..mu);
    let hi = rng.gen_range(mu..1.0);
    let w_hi = (mu - lo) / (hi - lo);
    InformationStructure::from_pairs(vec![
        (Belief::binary(lo).unwrap(), 1.0 - w_hi),
        (Belief::binary(hi).unwrap(), w_hi),
    ])
    .unwrap()
}

/// An action set and a prior at which at least two vertices are optimal:
/// one action is shifted by a constant so that it ties with the best one.
pub fn kink_instance(rng: &mut impl Rng, k: usize, max_vertices: usize) -> Option<(ActionSet, Prior)> {
    let prior = prior(rng, k);
    let mut rows = payoff_rows(rng, k, max_vertices.max(3));
    let values: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().zip(prior.probs()).map(|(a, p)| a * p).sum())
        .collect();
    let best = (0..rows.len()).max_by(|&i, &j| values[i].total_cmp(&values[j]))?;
    let other = (0..rows.len()).find(|&i| i != best)?;
    let shift = values[best] - values[other];
    for x in &mut rows[other] {
        *x += shift;
    }
    if rows[other] == rows[best] {
        return None;
    }
    let set = ActionSet::from_rows(&rows).ok()?;
    (set.support(prior.probs()).argmax.len() >= 2).then_some((set, prior))
}

/// Insurance parameters for which the rescaled body is representable and
/// the threshold lies below `0.8`.
pub fn moderate_params(rng: &mut impl Rng) -> InsuranceParams {
    loop {
        let p = InsuranceParams {
            alpha: rng.gen_range(0.1..0.5),
            fee: rng.gen_range(5.0..60.0),
            wealth: rng.gen_range(50.0..200.0),
            risk_aversion: rng.gen_range(0.005..0.05),
        };
        if let Ok(body) = voi_core::InsuranceBody::new(p) {
            if body.threshold().prob < 0.8 {
                return p;
            }
        }
    }
}

/// Any valid parameter draw, including extreme risk aversion and wealth.
pub fn any_params(rng: &mut impl Rng) -> InsuranceParams {
    InsuranceParams {
        alpha: rng.gen_range(0.01..0.99),
        fee: 10f64.powf(rng.gen_range(-1.0..2.5)),
        wealth: 10f64.powf(rng.gen_range(1.0..3.7)),
        risk_aversion: 10f64.powf(rng.gen_range(-3.0..1.3)),
    }
}

pub fn actions(rows: &[Vec<f64>]) -> Vec<Action> {
    rows.iter().map(|r| Action::new(r.clone()).unwrap()).collect()
}
