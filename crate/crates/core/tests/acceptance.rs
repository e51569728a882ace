//! Acceptance suite. Prints one PASS/FAIL line per criterion, followed by
//! indented details, and exits non-zero when any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voi_core::insurance::insurance_action_set;
use voi_core::marginal::{kinked_problem, ClassificationGrid};
use voi_core::{
    classification_grid, classify_prior, confidence_set, confident_bounds_with_pitch,
    flexible_bounds, is_valuable, revealed_beliefs, undecided_bounds, value_function, voi,
    Action, Belief, BoundCertificate, GridConfig, InformationStructure, InsuranceBody,
    InsuranceParams, Prior, QuadraticScoringBody, Quadrature, Regime,
};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            pass: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, text: impl Into<String>) {
        let text = text.into();
        self.details.push(format!("{} {text}", if ok { "ok  " } else { "FAIL" }));
        self.pass &= ok;
    }

    fn note(&mut self, text: impl Into<String>) {
        self.details.push(format!("note {}", text.into()));
    }

    fn within(&mut self, elapsed: Duration, limit: Duration) {
        self.check(
            elapsed <= limit,
            format!("runtime {:.2} s (limit {} s)", elapsed.as_secs_f64(), limit.as_secs()),
        );
    }
}

fn interval_of(set: &voi_core::ActionSet, payoffs: [f64; 2]) -> Option<(f64, f64)> {
    let a = Action::new(payoffs.to_vec()).ok()?;
    revealed_beliefs(set, &a).ok()?.interval().ok()?
}

fn close_pair(got: Option<(f64, f64)>, want: (f64, f64), tol: f64) -> bool {
    matches!(got, Some((a, b)) if (a - want.0).abs() <= tol && (b - want.1).abs() <= tol)
}

fn kinked_geometry() -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new();
    let set = kinked_problem();
    for (a, want) in [
        ([3.0, 0.0], (0.0, 1.0 / 3.0)),
        ([2.0, 2.0], (1.0 / 3.0, 0.8)),
        ([0.0, 2.5], (0.8, 1.0)),
    ] {
        let got = interval_of(&set, a);
        out.check(close_pair(got, want, 1e-9), format!("{a:?} optimal exactly on {got:?}"));
    }
    let mut regions_ok = true;
    for i in 0..=3000 {
        let p = i as f64 / 3000.0;
        let face = set.support(&[1.0 - p, p]).argmax;
        let has = |x: [f64; 2]| face.iter().any(|a| a.payoffs() == x);
        regions_ok &= has([3.0, 0.0]) == (p <= 1.0 / 3.0 + 1e-12);
        regions_ok &= has([2.0, 2.0]) == ((1.0 / 3.0 - 1e-12..=0.8 + 1e-12).contains(&p));
        regions_ok &= has([0.0, 2.5]) == (p >= 0.8 - 1e-12);
    }
    out.check(regions_ok, "optimal faces on a 3001-point belief grid match the regions");
    let conf = confidence_set(&set, &Prior::binary(0.5).unwrap())
        .and_then(|c| c.interval())
        .ok()
        .flatten();
    out.check(close_pair(conf, (1.0 / 3.0, 0.8), 1e-9), format!("confidence set at 1/2 = {conf:?}"));
    out.within(start.elapsed(), Duration::from_secs(1));
    out
}

fn valuable_equivalence() -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut agree, mut valuable) = (0, 0);
    for i in 0..1000 {
        let k = 2 + i % 3;
        let set = common::action_set(&mut rng, k, 8);
        let prior = common::prior(&mut rng, k);
        let info = common::information(&mut rng, &prior, 6);
        let value = voi(&set, &prior, &info).unwrap();
        let flag = is_valuable(&set, &prior, &info).unwrap();
        agree += usize::from(flag == (value > 1e-9 * set.payoff_scale().max(1.0)));
        valuable += usize::from(flag);
    }
    out.check(agree == 1000, format!("agreement on {agree}/1000 instances"));
    out.note(format!("{valuable} valuable, {} worthless", 1000 - valuable));
    out.within(start.elapsed(), Duration::from_secs(30));
    out
}

fn certificate_constants_reported(c: &BoundCertificate, keys: &[&str]) -> bool {
    keys.iter().all(|k| c.details.get(*k).is_some_and(|v| v.is_finite()))
}

struct SandwichRun {
    held: [usize; 3],
    reported: [usize; 3],
    elapsed: Duration,
}

fn run_sandwiches() -> SandwichRun {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut held = [0; 3];
    let mut reported = [0; 3];

    for i in 0..1000 {
        let k = 2 + i % 3;
        let set = common::action_set(&mut rng, k, 8);
        let prior = common::prior(&mut rng, k);
        let info = common::information(&mut rng, &prior, 6);
        let pitch = [None, Some(0.02), Some(0.05)][k - 2];
        let eps = rng.gen_range(0.005..0.2);
        let c = confident_bounds_with_pitch(&set, &prior, &info, eps, pitch).unwrap();
        held[0] += usize::from(c.holds());
        reported[0] += usize::from(certificate_constants_reported(
            &c,
            &["C_A", "c_eps", "epsilon", "expected_distance", "far_probability", "pitch"],
        ));
    }

    let mut done = 0;
    while done < 1000 {
        let k = 2 + done % 3;
        let Some((set, prior)) = common::kink_instance(&mut rng, k, 8) else {
            continue;
        };
        let info = common::information(&mut rng, &prior, 6);
        let c = undecided_bounds(&set, &prior, &info).unwrap();
        held[1] += usize::from(c.holds());
        reported[1] += usize::from(certificate_constants_reported(&c, &["inner", "C_A", "expected_norm"]));
        done += 1;
    }

    for i in 0..1000 {
        let c = if i % 2 == 0 {
            let k = 2 + (i / 2) % 2;
            let body = QuadraticScoringBody::new(k).unwrap();
            let prior = common::prior(&mut rng, k);
            let info = common::information(&mut rng, &prior, 6);
            flexible_bounds(&body, &prior, &info, Some(0.02)).unwrap()
        } else {
            let body = InsuranceBody::new(common::moderate_params(&mut rng)).unwrap();
            let t = body.threshold().prob;
            let prior = Prior::binary(rng.gen_range((t + 0.02).min(0.9)..0.97)).unwrap();
            let info = common::two_atoms(&mut rng, &prior);
            flexible_bounds(&body, &prior, &info, Some(0.005)).unwrap()
        };
        held[2] += usize::from(c.holds());
        reported[2] += usize::from(certificate_constants_reported(&c, &["c", "C", "expected_sq", "pitch"]));
    }
    SandwichRun {
        held,
        reported,
        elapsed: start.elapsed(),
    }
}

fn sandwiches(run: &SandwichRun) -> Outcome {
    let mut out = Outcome::new();
    let names = [
        "confidence-set bound, K in {2,3,4}",
        "seminorm bound at kink priors",
        "quadratic bound, scoring rule and insurance bodies",
    ];
    for (name, held) in names.iter().zip(run.held) {
        out.check(held == 1000, format!("{name}: {held}/1000 hold"));
    }
    out.within(run.elapsed, Duration::from_secs(120));
    out
}

fn scoring_rule_oracle() -> Outcome {
    let mut out = Outcome::new();
    let body = QuadraticScoringBody::new(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let prior = Prior::binary(rng.gen_range(0.01..0.99)).unwrap();
        let info = common::two_atoms(&mut rng, &prior);
        let mu = prior.probs()[1];
        let variance = info.expect(|q| (q.probs()[1] - mu).powi(2));
        worst = worst.max((voi(&body, &prior, &info).unwrap() - variance).abs());
    }
    out.check(worst <= 1e-10, format!("max |VoI - E[(q - mu)^2]| = {worst:.2e} over 1000 structures"));
    let mut worst_c = 0.0f64;
    for (p, step) in [(0.5, 0.1), (0.3, 0.2), (0.8, 0.05), (0.6, 0.3)] {
        let prior = Prior::binary(p).unwrap();
        let info = InformationStructure::symmetric_split(&prior, step).unwrap();
        let c = flexible_bounds(&body, &prior, &info, None).unwrap();
        worst_c = worst_c.max((c.details["c"] - 1.0).abs()).max((c.details["C"] - 1.0).abs());
    }
    out.check(worst_c <= 1e-6, format!("max |c - 1|, |C - 1| = {worst_c:.2e}"));
    out
}

const EPS: [f64; 7] = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5];

fn admissible(q: f64) -> Vec<f64> {
    EPS.into_iter().filter(|e| *e < q.min(1.0 - q)).collect()
}

fn slope_text(s: Option<f64>) -> String {
    s.map_or("unavailable".to_string(), |s| format!("{s:.4}"))
}

fn insurance_reproduction() -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new();
    let params = InsuranceParams::reference();
    let t = params.threshold().unwrap();
    out.check(
        (t.prob - 0.334).abs() <= 0.002,
        format!("threshold p* = {:e} (log-odds {:.3}), target 0.334 +- 0.002", t.prob, t.log_odds),
    );

    let at = if admissible(t.prob).len() >= 2 {
        params.voi_slope(t.prob, &admissible(t.prob)).unwrap()
    } else {
        None
    };
    out.check(
        at.is_some_and(|s| (0.95..=1.05).contains(&s)),
        format!("slope at p* = {}, target [0.95, 1.05]", slope_text(at)),
    );

    let above = t.prob + 0.1;
    let s = params.voi_slope(above, &admissible(above)).unwrap();
    out.check(
        s.is_some_and(|s| (1.95..=2.05).contains(&s)),
        format!("slope at p* + 0.1 = {}, target [1.95, 2.05]", slope_text(s)),
    );

    let below = t.prob - 0.05;
    let zero = below > 1e-3
        && EPS
            .iter()
            .filter(|e| **e <= 1e-3)
            .all(|&e| params.voi_epsilon(below, e).is_ok_and(|v| v == 0.0));
    out.check(zero, format!("VoI exactly 0 at p* - 0.05 = {below:e} for eps <= 1e-3"));

    let set = insurance_action_set(&params, &params.default_indemnity_grid()).unwrap();
    let worst = (50..=950)
        .map(|i| {
            let q = i as f64 / 1000.0;
            let v = value_function(&set, &Belief::binary(q).unwrap()).unwrap();
            (v - params.value(q).unwrap()).abs()
        })
        .fold(0.0, f64::max);
    out.check(worst <= 1e-3, format!("sampled body sup-norm error on [0.05, 0.95] = {worst:.2e}"));

    let m = InsuranceParams::moderate();
    let tm = m.threshold().unwrap().prob;
    let s_at = m.voi_slope(tm, &admissible(tm)).unwrap();
    let s_up = m.voi_slope(tm + 0.1, &admissible(tm + 0.1)).unwrap();
    let z = EPS.iter().filter(|e| **e <= 1e-3).all(|&e| m.voi_epsilon(tm - 0.05, e).unwrap() == 0.0);
    out.note(format!(
        "moderate parameters (alpha 0.3, f 40, w0 100, R 0.03): p* = {tm:.4}, slopes {} / {}, zero below: {z}",
        slope_text(s_at),
        slope_text(s_up)
    ));
    out.within(start.elapsed(), Duration::from_secs(10));
    out
}

const EXPECTED: [(&str, [&str; 3]); 8] = [
    ("brownian", ["0", "inf", "1"]),
    ("poisson_jump_outside", ["1", "1", "1"]),
    ("poisson_jump_inside", ["0", "1", "1"]),
    ("binary_alpha_0.25", ["0", "inf", "inf"]),
    ("binary_alpha_0.5", ["0", "inf", "1"]),
    ("binary_alpha_0.75", ["0", "inf", "0"]),
    ("binary_alpha_1", ["0", "1", "0"]),
    ("binary_alpha_2", ["0", "0", "0"]),
];

fn grid_matches(grid: &ClassificationGrid, out: &mut Outcome, label: &str) -> bool {
    let mut all = grid.rows.len() == EXPECTED.len();
    for (row, (name, want)) in grid.rows.iter().zip(EXPECTED) {
        let got = row.symbols();
        let ok = row.family == name && got == want;
        all &= ok;
        if !ok || label == "default" {
            let slopes: Vec<String> = row.cells.iter().map(|c| slope_text(c.slope)).collect();
            out.check(ok, format!("{label} {name}: {got:?} (slopes {})", slopes.join(", ")));
        }
    }
    all
}

fn classification_table() -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new();
    let base = GridConfig::default();
    let grid = classification_grid(&base).unwrap();
    let matched = grid_matches(&grid, &mut out, "default");
    let refined = GridConfig {
        quadrature: Quadrature {
            nodes: 2 * base.quadrature.nodes,
            n_max: base.quadrature.n_max + 1,
        },
        ..base
    };
    let stable = grid_matches(&classification_grid(&refined).unwrap(), &mut out, "refined");
    out.check(matched, "all 24 cells match");
    out.check(stable, "unchanged with doubled nodes and one more count");
    out.within(start.elapsed(), Duration::from_secs(60));
    out
}

fn numerical_hygiene() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let (mut clean, mut roots) = (0, 0);
    let mut worst_root = 0.0f64;
    for _ in 0..1000 {
        let p = common::any_params(&mut rng);
        let Ok(t) = p.threshold() else { continue };
        let r = p.relative_delta_log_odds(t.log_odds).abs();
        worst_root = worst_root.max(r);
        roots += usize::from(r <= 1e-10);
        let mut ok = t.log_odds.is_finite() && !t.prob.is_nan();
        for i in 0..=100 {
            let q = i as f64 / 100.0;
            let v = p.value(q).unwrap();
            let l = p.log_deficit(q).unwrap();
            ok &= v.is_finite() && !l.is_nan() && l < f64::INFINITY;
            if (0.02..=0.98).contains(&q) {
                ok &= p.voi_epsilon(q, 0.01).is_ok_and(|x| x.is_finite() && x >= 0.0);
                ok &= p.optimal_indemnity(q).is_ok_and(f64::is_finite);
                ok &= p.log_abs_delta(q).is_ok_and(|(_, l)| l < f64::INFINITY && !l.is_nan());
                ok &= match p.delta(q) {
                    Ok(d) => d.is_finite(),
                    Err(e) => matches!(e, voi_core::Error::Domain(_)),
                };
            }
        }
        clean += usize::from(ok);
    }
    out.check(clean == 1000, format!("{clean}/1000 parameter draws free of NaN and overflow"));
    out.check(roots == 1000, format!("{roots}/1000 thresholds with |delta| <= 1e-10 (worst {worst_root:.1e})"));
    out
}

fn certificate_reporting(run: &SandwichRun) -> Outcome {
    let mut out = Outcome::new();
    let total: usize = run.reported.iter().sum();
    out.check(total == 3000, format!("{total}/3000 certificates report finite constants and pitches"));
    out.check(run.held.iter().sum::<usize>() == 3000, "sandwich validity with the reported constants");
    let scoring = classify_prior(&QuadraticScoringBody::new(2).unwrap(), &Prior::binary(0.5).unwrap())
        .is_ok_and(|r| r.regime == Regime::Flexible);
    out.check(scoring, "scoring rule prior classified flexible");
    out
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("kinked-problem geometry", kinked_geometry()),
        ("valuable iff positive VoI", valuable_equivalence()),
    ];
    let run = run_sandwiches();
    results.push(("bound certificate sandwiches", sandwiches(&run)));
    results.push(("scoring-rule oracle", scoring_rule_oracle()));
    results.push(("insurance reproduction", insurance_reproduction()));
    results.push(("marginal-value classification grid", classification_table()));
    results.push(("insurance numerical hygiene", numerical_hygiene()));
    results.push(("certificates carry their constants", certificate_reporting(&run)));

    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        println!("{} [{}] {name}", if outcome.pass { "PASS" } else { "FAIL" }, i + 1);
        for d in &outcome.details {
            println!("         {d}");
        }
        failed += usize::from(!outcome.pass);
    }
    println!("{}/{} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
