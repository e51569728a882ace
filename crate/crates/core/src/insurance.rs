//! CARA insurance against the total loss of a good.
//!
//! State 1 is "no loss", state 2 is "loss"; a belief is the probability `q`
//! of a loss. The insuree either stays uninsured or buys an indemnity `I` at
//! premium `alpha I + f`. Utility is `u(w) = 1 - exp(-R w)`.
//!
//! Every expected utility here has the form `1 - D` with a deficit `D > 0`.
//! Deficits are carried as logarithms, since realistic parameters put them
//! far outside double range (`exp(-9200)` and beyond). With
//! `K0 = R f - (1 - alpha) R w0 - ln(1 - alpha) - alpha ln(alpha / (1 - alpha))`:
//!
//! - uninsured: `D0(q) = q + (1 - q) exp(-R w0)`;
//! - optimally insured, `q >= q_hat`: `D(q) = exp(K0) q^alpha (1 - q)^(1 - alpha)`;
//! - below `q_hat` the best indemnity is zero: `D(q) = exp(R f) D0(q)`.

use serde::Serialize;

use crate::analysis::ConvexBody;
use crate::error::{Error, Result};
use crate::geometry::{Action, ActionSet, Belief, BeliefPolytope, Halfspace, SignedMeasure};
use crate::model::CsvTable;
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InsuranceParams {
    /// Proportional loading `alpha` in (0, 1).
    pub alpha: f64,
    /// Fixed fee `f > 0`.
    pub fee: f64,
    /// Value of the good `w0 > 0`.
    pub wealth: f64,
    /// Absolute risk aversion `R > 0`.
    pub risk_aversion: f64,
}

impl Default for InsuranceParams {
    fn default() -> Self {
        Self::reference()
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    a.max(b) + (-(a - b).abs()).exp().ln_1p()
}

/// `ln q` and `ln(1 - q)` for a loss probability.
#[derive(Clone, Copy, Debug)]
struct Logs {
    lq: f64,
    l1q: f64,
}

impl Logs {
    fn from_prob(q: f64) -> Self {
        Self {
            lq: q.ln(),
            l1q: (-q).ln_1p(),
        }
    }

    fn from_log_odds(l: f64) -> Self {
        Self {
            lq: -softplus(-l),
            l1q: -softplus(l),
        }
    }

    fn log_odds(&self) -> f64 {
        self.lq - self.l1q
    }
}

fn check_prob(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("loss probability {q} outside (0, 1)")))
    }
}

fn check_closed_prob(q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::Domain(format!("loss probability {q} outside [0, 1]")))
    }
}

/// The loss probability at which insuring becomes optimal, in both
/// coordinates. `prob` underflows to zero when `log_odds < -745`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Threshold {
    pub log_odds: f64,
    pub prob: f64,
}

impl InsuranceParams {
    pub fn new(alpha: f64, fee: f64, wealth: f64, risk_aversion: f64) -> Result<Self> {
        let p = Self {
            alpha,
            fee,
            wealth,
            risk_aversion,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            problems.push(format!("alpha {} outside (0, 1)", self.alpha));
        }
        for (name, x) in [
            ("fee", self.fee),
            ("wealth", self.wealth),
            ("risk_aversion", self.risk_aversion),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                problems.push(format!("{name} {x} must be positive and finite"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// `alpha = 0.08, f = 10, w0 = 1000, R = 10`.
    pub fn reference() -> Self {
        Self {
            alpha: 0.08,
            fee: 10.0,
            wealth: 1000.0,
            risk_aversion: 10.0,
        }
    }

    /// Moderate parameters under which every quantity is representable
    /// without rescaling: `alpha = 0.3, f = 40, w0 = 100, R = 0.03`.
    pub fn moderate() -> Self {
        Self {
            alpha: 0.3,
            fee: 40.0,
            wealth: 100.0,
            risk_aversion: 0.03,
        }
    }

    /// `P(I) = alpha I + f`.
    pub fn premium(&self, indemnity: f64) -> Result<f64> {
        if indemnity < 0.0 {
            return Err(Error::NegativeIndemnity(indemnity));
        }
        Ok(self.alpha * indemnity + self.fee)
    }

    /// `u(w) = 1 - exp(-R w)`.
    pub fn utility(&self, w: f64) -> f64 {
        -(-self.risk_aversion * w).exp_m1()
    }

    /// `ln(1 - u(w)) = -R w`, exact at any scale.
    pub fn log_disutility(&self, w: f64) -> f64 {
        -self.risk_aversion * w
    }

    fn ra_w(&self) -> f64 {
        self.risk_aversion * self.wealth
    }

    fn odds_loading(&self) -> f64 {
        (self.alpha / (1.0 - self.alpha)).ln()
    }

    /// `K0`, the log-scale of the optimally insured deficit.
    pub fn log_scale(&self) -> f64 {
        let a = self.alpha;
        self.risk_aversion * self.fee - (1.0 - a) * self.ra_w() - (-a).ln_1p() - a * self.odds_loading()
    }

    /// Log-odds of `q_hat`, below which the best indemnity is zero.
    pub fn hat_log_odds(&self) -> f64 {
        self.odds_loading() - self.ra_w()
    }

    fn log_deficit_uninsured(&self, s: Logs) -> f64 {
        logaddexp(s.lq, s.l1q - self.ra_w())
    }

    fn log_deficit_insured(&self, s: Logs) -> f64 {
        if s.log_odds() >= self.hat_log_odds() {
            let a = self.alpha;
            self.log_scale() + a * s.lq + (1.0 - a) * s.l1q
        } else {
            self.risk_aversion * self.fee + self.log_deficit_uninsured(s)
        }
    }

    /// `ln D0(q)`.
    pub fn log_deficit_no_insurance(&self, q: f64) -> Result<f64> {
        check_closed_prob(q)?;
        Ok(self.log_deficit_uninsured(Logs::from_prob(q)))
    }

    /// `ln D(q)` of the best insured position (indemnity clamped at zero).
    pub fn log_deficit_best_insurance(&self, q: f64) -> Result<f64> {
        check_closed_prob(q)?;
        Ok(self.log_deficit_insured(Logs::from_prob(q)))
    }

    /// `ln(1 - v(q))`.
    pub fn log_deficit(&self, q: f64) -> Result<f64> {
        check_closed_prob(q)?;
        let s = Logs::from_prob(q);
        Ok(self.log_deficit_uninsured(s).min(self.log_deficit_insured(s)))
    }

    /// `U0(q) = (1 - q) u(w0) + q u(0)`.
    pub fn expected_utility_no_insurance(&self, q: f64) -> Result<f64> {
        check_prob(q)?;
        Ok(-self.log_deficit_no_insurance(q)?.exp_m1())
    }

    /// `U(q, I) = (1 - q) u(w0 - P(I)) + q u(I - P(I))`.
    pub fn expected_utility(&self, q: f64, indemnity: f64) -> Result<f64> {
        check_prob(q)?;
        let premium = self.premium(indemnity)?;
        let s = Logs::from_prob(q);
        let r = self.risk_aversion;
        let log_d = r * premium + logaddexp(s.lq - r * indemnity, s.l1q - self.ra_w());
        Ok(-log_d.exp_m1())
    }

    /// Stationary point of `I -> U(q, I)`:
    /// `w0 - (1/R) ln((1 - q)/q * alpha/(1 - alpha))`. Negative below `q_hat`.
    pub fn optimal_indemnity(&self, q: f64) -> Result<f64> {
        check_prob(q)?;
        Ok(self.optimal_indemnity_log_odds(Logs::from_prob(q).log_odds()))
    }

    pub fn optimal_indemnity_log_odds(&self, log_odds: f64) -> f64 {
        self.wealth - (self.odds_loading() - log_odds) / self.risk_aversion
    }

    /// `max_{I >= 0} U(q, I) - U0(q)`. Fails with [`Error::Domain`] when the
    /// gap exceeds the double range; [`Self::log_abs_delta`] is always finite.
    pub fn delta(&self, q: f64) -> Result<f64> {
        let (sign, log_abs) = self.log_abs_delta(q)?;
        if log_abs > f64::MAX.ln() {
            return Err(Error::Domain(format!(
                "delta at q = {q} is -exp({log_abs}), outside the double range"
            )));
        }
        Ok(sign * log_abs.exp())
    }

    /// `(sign, ln |delta|)` with `delta = D0 (1 - exp(log_gap))`; the log is
    /// `-inf` where `delta` vanishes.
    pub fn log_abs_delta(&self, q: f64) -> Result<(f64, f64)> {
        check_prob(q)?;
        let s = Logs::from_prob(q);
        let d0 = self.log_deficit_uninsured(s);
        let gap = self.log_deficit_insured(s) - d0;
        let sign = if gap > 0.0 { -1.0 } else { 1.0 };
        let magnitude = if gap > 30.0 {
            gap + (-(-gap).exp()).ln_1p()
        } else {
            gap.exp_m1().abs().ln()
        };
        Ok((sign, d0 + magnitude))
    }

    /// `ln D_insured - ln D0` at the given log-odds; zero exactly at the
    /// threshold, positive below it.
    pub fn log_gap(&self, log_odds: f64) -> f64 {
        let s = Logs::from_log_odds(log_odds);
        self.log_deficit_insured(s) - self.log_deficit_uninsured(s)
    }

    /// `delta` evaluated from log-odds, relative to `D0`: `1 - D/D0`.
    pub fn relative_delta_log_odds(&self, log_odds: f64) -> f64 {
        -self.log_gap(log_odds).exp_m1()
    }

    /// Root of `delta` above `q_hat`, by bisection in log-odds.
    pub fn threshold(&self) -> Result<Threshold> {
        self.validate()?;
        let lo0 = self.hat_log_odds();
        if !(self.log_gap(lo0) > 0.0) {
            return Err(Error::ConvergenceFailure(format!(
                "insuring is not dominated at q_hat (log-odds {lo0})"
            )));
        }
        let mut lo = lo0;
        let mut step = 1.0;
        let mut hi = lo + step;
        while self.log_gap(hi) > 0.0 {
            lo = hi;
            step *= 2.0;
            hi = lo + step;
            if step > 1e12 {
                return Err(Error::ConvergenceFailure("no sign change of delta above q_hat".into()));
            }
        }
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.log_gap(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let log_odds = 0.5 * (lo + hi);
        Ok(Threshold {
            log_odds,
            prob: Logs::from_log_odds(log_odds).lq.exp(),
        })
    }

    /// `v(q) = max{U0(q), max_{I >= 0} U(q, I)}`.
    pub fn value(&self, q: f64) -> Result<f64> {
        Ok(-self.log_deficit(q)?.exp_m1())
    }

    /// Analytic `v''(q)` on the insured branch.
    pub fn value_second_derivative(&self, q: f64) -> Result<f64> {
        check_prob(q)?;
        let a = self.alpha;
        let log_d = self.log_deficit_best_insurance(q)?;
        Ok(a * (1.0 - a) * (log_d - 2.0 * (q.ln() + (-q).ln_1p())).exp())
    }

    /// `ln VoI(eps)` for the equally likely posteriors `q +- eps`;
    /// `-inf` when the value function is affine on `[q - eps, q + eps]`.
    pub fn log_voi_epsilon(&self, q: f64, eps: f64) -> Result<f64> {
        check_prob(q)?;
        if !(eps > 0.0 && eps < q.min(1.0 - q)) {
            return Err(Error::Domain(format!(
                "epsilon {eps} outside (0, min(q, 1 - q)) at q = {q}"
            )));
        }
        let branch = |x: f64| {
            let s = Logs::from_prob(x);
            let (l0, l1) = (self.log_deficit_uninsured(s), self.log_deficit_insured(s));
            (l0 <= l1, l0.min(l1))
        };
        let (u_mid, mid) = branch(q);
        let (u_up, up) = branch(q + eps);
        let (u_dn, dn) = branch(q - eps);
        if u_mid && u_up && u_dn {
            return Ok(f64::NEG_INFINITY);
        }
        let gap = -0.5 * ((up - mid).exp_m1() + (dn - mid).exp_m1());
        if gap <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(mid + gap.ln())
    }

    /// `VoI(eps) = v(q + eps)/2 + v(q - eps)/2 - v(q)`.
    pub fn voi_epsilon(&self, q: f64, eps: f64) -> Result<f64> {
        Ok(self.log_voi_epsilon(q, eps)?.exp())
    }

    /// Money-metric equivalent `-(1/R) ln(1 - VoI)` of a utility gain.
    pub fn monetary_equivalent(&self, voi: f64) -> f64 {
        -(-voi).ln_1p() / self.risk_aversion
    }

    /// Least-squares slope of `ln VoI(eps)` against `ln eps`; `None` when
    /// fewer than two `eps` give a positive value.
    pub fn voi_slope(&self, q: f64, eps: &[f64]) -> Result<Option<f64>> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &e in eps {
            let l = self.log_voi_epsilon(q, e)?;
            if l.is_finite() {
                xs.push(e.ln());
                ys.push(l);
            }
        }
        Ok(crate::marginal::least_squares_slope(&xs, &ys))
    }

    /// `2001` indemnities evenly spaced over `[0, 2 w0]`.
    pub fn default_indemnity_grid(&self) -> Vec<f64> {
        (0..=2000).map(|i| self.wealth * i as f64 / 1000.0).collect()
    }

    /// Payoff vector `(u(w0 - P(I)), u(I - P(I)))` of indemnity `I`.
    pub fn insured_action(&self, indemnity: f64) -> Result<Action> {
        let p = self.premium(indemnity)?;
        Action::new(vec![self.utility(self.wealth - p), self.utility(indemnity - p)])
    }

    pub fn uninsured_action(&self) -> Action {
        Action::new(vec![self.utility(self.wealth), self.utility(0.0)]).expect("finite utilities")
    }
}

/// Convex hull of the uninsured payoff and the insured payoffs over a grid
/// of indemnities.
pub fn insurance_action_set(params: &InsuranceParams, grid: &[f64]) -> Result<ActionSet> {
    params.validate()?;
    if grid.is_empty() || grid[0] != 0.0 {
        return Err(Error::InvalidInput("indemnity grid must start at 0".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("indemnity grid must be increasing".into()));
    }
    let mut points = vec![params.uninsured_action()];
    for &i in grid {
        points.push(params.insured_action(i)?);
    }
    crate::geometry::hull_reduce(points)
}

/// The insurance value function as a two-state body, rescaled by the
/// positive factor `exp(-K0)`: `v~(q) = (v(q) - 1) exp(-K0)`.
///
/// The rescaling keeps insured values of order one; regimes and the sign of
/// curvature are unchanged. Parameters whose uninsured branch would
/// overflow after rescaling are rejected.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InsuranceBody {
    params: InsuranceParams,
    threshold: Threshold,
    log_scale: f64,
}

impl InsuranceBody {
    pub fn new(params: InsuranceParams) -> Result<Self> {
        params.validate()?;
        let log_scale = params.log_scale();
        if -log_scale > 700.0 {
            return Err(Error::Domain(format!(
                "uninsured payoffs exceed double range after rescaling by exp({})",
                -log_scale
            )));
        }
        Ok(Self {
            params,
            threshold: params.threshold()?,
            log_scale,
        })
    }

    pub fn params(&self) -> &InsuranceParams {
        &self.params
    }

    pub fn threshold(&self) -> Threshold {
        self.threshold
    }

    /// `exp(K0)`, the factor mapping this body's values back to utility gaps.
    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    fn rescaled(&self, log_deficit: f64) -> f64 {
        -(log_deficit - self.log_scale).exp()
    }

    fn action_for(&self, no_loss_wealth: f64, loss_wealth: f64) -> Action {
        let p = &self.params;
        Action::new(vec![
            self.rescaled(p.log_disutility(no_loss_wealth)),
            self.rescaled(p.log_disutility(loss_wealth)),
        ])
        .expect("rescaled payoffs are finite")
    }
}

impl ConvexBody for InsuranceBody {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, p: &Belief) -> f64 {
        let s = Logs::from_prob(p.probs()[1]);
        let log_d = self
            .params
            .log_deficit_uninsured(s)
            .min(self.params.log_deficit_insured(s));
        self.rescaled(log_d)
    }

    fn optimal_face(&self, p: &Belief) -> Vec<Action> {
        let par = &self.params;
        let s = Logs::from_prob(p.probs()[1]);
        let d0 = self.rescaled(par.log_deficit_uninsured(s));
        let d1 = self.rescaled(par.log_deficit_insured(s));
        let band = tol::face(d0.max(d1));
        let mut face = Vec::new();
        if d0 >= d1 - band {
            face.push(self.action_for(par.wealth, 0.0));
        }
        if d1 >= d0 - band {
            let i = par.optimal_indemnity_log_odds(s.log_odds()).max(0.0);
            let premium = par.alpha * i + par.fee;
            face.push(self.action_for(par.wealth - premium, i - premium));
        }
        face
    }

    fn ball_in_confidence_set(&self, p: &Belief, radius: f64) -> Result<bool> {
        let q = p.probs()[1];
        let reach = radius / std::f64::consts::SQRT_2;
        let (lo, hi) = (q - reach, q + reach);
        if lo <= 0.0 || hi >= 1.0 {
            return Ok(false);
        }
        let s = Logs::from_prob(hi);
        let par = &self.params;
        Ok(par.log_deficit_uninsured(s) < par.log_deficit_insured(s))
    }

    fn confidence_set(&self, p: &Belief) -> Option<BeliefPolytope> {
        let q = p.probs()[1];
        let star = self.threshold.prob;
        if q > star {
            return None;
        }
        let mut poly = BeliefPolytope::simplex(2);
        let upper = Halfspace::new(SignedMeasure::new(vec![0.0, 1.0]).ok()?, star).ok()?;
        poly.push(upper).ok()?;
        if q == star {
            let lower = Halfspace::new(SignedMeasure::new(vec![0.0, -1.0]).ok()?, -star).ok()?;
            poly.push(lower).ok()?;
        }
        Some(poly)
    }
}

/// Samples of the value function: columns `q, value, log_deficit`.
pub fn value_curve_table(params: &InsuranceParams, points: usize) -> Result<CsvTable> {
    params.validate()?;
    if points < 2 {
        return Err(Error::InvalidInput("need at least two sample points".into()));
    }
    let mut table = CsvTable::new(&["q", "value", "log_deficit"]);
    for i in 0..points {
        let q = i as f64 / (points - 1) as f64;
        table.push_floats(&[q, params.value(q)?, params.log_deficit(q)?]);
    }
    Ok(table)
}

/// Boundary samples of the action set: columns `indemnity, payoff_no_loss,
/// payoff_loss, log_disutility_no_loss, log_disutility_loss`. The first row
/// is the uninsured action, with an empty indemnity.
pub fn action_boundary_table(params: &InsuranceParams, grid: &[f64]) -> Result<CsvTable> {
    params.validate()?;
    let mut table = CsvTable::new(&[
        "indemnity",
        "payoff_no_loss",
        "payoff_loss",
        "log_disutility_no_loss",
        "log_disutility_loss",
    ]);
    let fmt = crate::model::fmt_float;
    let none = params.uninsured_action();
    table.push(vec![
        String::new(),
        fmt(none.payoffs()[0]),
        fmt(none.payoffs()[1]),
        fmt(params.log_disutility(params.wealth)),
        fmt(params.log_disutility(0.0)),
    ]);
    for &i in grid {
        let p = params.premium(i)?;
        let a = params.insured_action(i)?;
        table.push_floats(&[
            i,
            a.payoffs()[0],
            a.payoffs()[1],
            params.log_disutility(params.wealth - p),
            params.log_disutility(i - p),
        ]);
    }
    Ok(table)
}
