mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use voi_core::model::ProblemFile;
use voi_core::{
    confidence_set, garble, hull_reduce, is_valuable, project_onto_polytope, support_function,
    value_function, voi, Action, ActionSet, Belief, ConvexBody, DecisionProblem, Prior,
    SignedMeasure,
};

fn rows_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..=4).prop_flat_map(|k| {
        prop::collection::vec(prop::collection::vec((-20i32..=20).prop_map(|x| x as f64 / 4.0), k), 2..=8)
    })
}

fn measure_strategy(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, k)
}

fn belief_strategy(k: usize) -> impl Strategy<Value = Belief> {
    prop::collection::vec(0.05f64..1.0, k).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        Belief::new(raw.iter().map(|x| x / total).collect()).unwrap()
    })
}

fn rows_and<T: std::fmt::Debug, S: Strategy<Value = T>>(
    f: impl Fn(usize) -> S + Clone + 'static,
) -> impl Strategy<Value = (Vec<Vec<f64>>, T)> {
    rows_strategy().prop_flat_map(move |rows| {
        let k = rows[0].len();
        (Just(rows), f(k))
    })
}

fn sorted(set: &ActionSet) -> Vec<Vec<f64>> {
    let mut v: Vec<Vec<f64>> = set.vertices().iter().map(|a| a.payoffs().to_vec()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn support_function_is_sublinear(
        (rows, (s, t, lambda)) in rows_and(|k| (measure_strategy(k), measure_strategy(k), 0.0f64..5.0))
    ) {
        let set = ActionSet::from_rows(&rows).unwrap();
        let s = SignedMeasure::new(s).unwrap();
        let t = SignedMeasure::new(t).unwrap();
        let sum = SignedMeasure::new(s.coords().iter().zip(t.coords()).map(|(a, b)| a + b).collect()).unwrap();
        let sig = |m: &SignedMeasure| support_function(&set, m).unwrap().value;
        let slack = 1e-9 * (1.0 + set.payoff_scale());
        prop_assert!(sig(&sum) <= sig(&s) + sig(&t) + slack);
        prop_assert!((sig(&s.scaled(lambda)) - lambda * sig(&s)).abs() <= slack * (1.0 + lambda));
    }

    #[test]
    fn support_function_matches_every_point(
        (rows, s) in rows_and(measure_strategy)
    ) {
        // The support value of the reduced set equals the maximum over the
        // raw payoff vectors, and the argmax attains it.
        let set = ActionSet::from_rows(&rows).unwrap();
        let s = SignedMeasure::new(s).unwrap();
        let sup = support_function(&set, &s).unwrap();
        let brute = rows
            .iter()
            .map(|r| r.iter().zip(s.coords()).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((sup.value - brute).abs() <= 1e-9 * (1.0 + brute.abs()));
        for a in &sup.argmax {
            prop_assert!((a.pairing(s.coords()) - brute).abs() <= 1e-9 * (1.0 + brute.abs()));
        }
    }

    #[test]
    fn subgradient_inequality((rows, (p, q)) in rows_and(|k| (belief_strategy(k), belief_strategy(k)))) {
        let set = ActionSet::from_rows(&rows).unwrap();
        let vp = value_function(&set, &p).unwrap();
        let vq = value_function(&set, &q).unwrap();
        for a in set.optimal_face(&p) {
            let linear = vp + q.probs().iter().zip(p.probs()).zip(a.payoffs()).map(|((x, y), g)| (x - y) * g).sum::<f64>();
            prop_assert!(vq >= linear - 1e-9 * (1.0 + vq.abs()));
        }
    }

    #[test]
    fn hull_reduction_is_idempotent(rows in rows_strategy()) {
        let once = ActionSet::from_rows(&rows).unwrap();
        let twice = hull_reduce(once.vertices().to_vec()).unwrap();
        prop_assert_eq!(sorted(&once), sorted(&twice));
        for r in &rows {
            prop_assert!(once.contains(&Action::new(r.clone()).unwrap()).unwrap());
        }
    }

    #[test]
    fn problem_file_round_trip((rows, prior) in rows_and(belief_strategy)) {
        let k = prior.dim();
        let states: Vec<String> = (0..k).map(|i| format!("s{i}")).collect();
        let decisions: Vec<String> = (0..rows.len()).map(|i| format!("d{i}")).collect();
        let file = ProblemFile {
            problem: DecisionProblem::new(states, decisions, rows).unwrap(),
            prior: Prior::new(prior).unwrap(),
            information: None,
        };
        let back = ProblemFile::parse(&file.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, file);
    }

    #[test]
    fn garbling_never_helps(seed in any::<u64>(), k in 2usize..=4, mix in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = common::action_set(&mut rng, k, 8);
        let prior = common::prior(&mut rng, k);
        let info = common::information(&mut rng, &prior, 6);
        let full = voi(&set, &prior, &info).unwrap();
        let coarse = voi(&set, &prior, &garble(&info, &prior, mix).unwrap()).unwrap();
        prop_assert!(coarse <= full + 1e-9 * (1.0 + set.payoff_scale()));
        prop_assert!(coarse >= -1e-12);
    }

    #[test]
    fn valuable_iff_positive_voi(seed in any::<u64>(), k in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = common::action_set(&mut rng, k, 8);
        let prior = common::prior(&mut rng, k);
        let info = common::information(&mut rng, &prior, 6);
        let value = voi(&set, &prior, &info).unwrap();
        let valuable = is_valuable(&set, &prior, &info).unwrap();
        prop_assert_eq!(valuable, value > 1e-9 * set.payoff_scale().max(1.0), "voi {}", value);
    }

    #[test]
    fn projection_lands_in_the_confidence_set(seed in any::<u64>(), k in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = common::action_set(&mut rng, k, 8);
        let prior = common::prior(&mut rng, k);
        let poly = confidence_set(&set, &prior).unwrap();
        let q = common::interior_belief(&mut rng, k, 0.0);
        let proj = project_onto_polytope(&q, &poly).unwrap();
        prop_assert!(proj.kkt_residual <= 1e-7);
        for h in poly.halfspaces() {
            prop_assert!(h.excess(proj.point.probs()) <= 1e-9);
        }
        // The prior is feasible, so the projection is at least as close.
        let to_prior: f64 = q.probs().iter().zip(prior.probs()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(proj.distance <= to_prior + 1e-9);
        if poly.contains(&q) {
            prop_assert!(proj.distance <= 1e-9);
        }
    }
}
