use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voi_core::{
    confidence_set, hull_reduce, project_onto_polytope, support_function, Action, Belief,
    Prior, SignedMeasure,
};

fn random_actions(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Vec<Action> {
    (0..n)
        .map(|_| Action::new((0..k).map(|_| rng.gen_range(-5.0..5.0)).collect()).unwrap())
        .collect()
}

fn interior(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

fn hull(c: &mut Criterion) {
    let mut group = c.benchmark_group("hull_reduce");
    for (k, n) in [(2, 100), (2, 2000), (3, 50), (4, 50)] {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let points = random_actions(&mut rng, k, n);
        group.bench_with_input(BenchmarkId::new(format!("k{k}"), n), &points, |b, p| {
            b.iter(|| hull_reduce(black_box(p.clone())).unwrap())
        });
    }
    group.finish();
}

fn support(c: &mut Criterion) {
    let mut group = c.benchmark_group("support_function");
    for k in [2, 3, 5] {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let set = hull_reduce(random_actions(&mut rng, k, 40)).unwrap();
        let s = SignedMeasure::new((0..k).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        group.bench_function(BenchmarkId::from_parameter(k), |b| {
            b.iter(|| support_function(&set, black_box(&s)).unwrap())
        });
    }
    group.finish();
}

fn projection(c: &mut Criterion) {
    let mut group = c.benchmark_group("projection");
    for k in [2, 3, 4] {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let set = hull_reduce(random_actions(&mut rng, k, 12)).unwrap();
        let prior = Prior::new(Belief::new(interior(&mut rng, k)).unwrap()).unwrap();
        let poly = confidence_set(&set, &prior).unwrap();
        let q = Belief::new(interior(&mut rng, k)).unwrap();
        group.bench_function(BenchmarkId::from_parameter(k), |b| {
            b.iter(|| project_onto_polytope(black_box(&q), &poly).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, hull, support, projection);
criterion_main!(benches);
