use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use plannerbench_core::geometry::{ProblemDef, Rect, Robot, SpaceKind, State, StateSpace, World};
use plannerbench_core::par::Exec;
use plannerbench_core::planners::nearest_neighbors;
use plannerbench_core::stats::{boxplot_batch, progress_aggregate_with, Series};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn random_states(rng: &mut ChaCha8Rng, n: usize) -> Vec<State> {
    (0..n)
        .map(|_| {
            State::new(
                rng.random_range(0.0..20.0),
                rng.random_range(0.0..10.0),
                rng.random_range(-3.1..3.1),
            )
        })
        .collect()
}

fn geometry(c: &mut Criterion) {
    let world = World::bundled("decoys").unwrap();
    let problem = ProblemDef::builder(
        "decoys",
        StateSpace::new(SpaceKind::SE2, world.bounds),
        world,
        State::new(1.0, 5.0, 0.0),
        State::new(19.0, 5.0, 0.0),
    )
    .robot(Robot::parse("box 0.6 0.3").unwrap())
    .build()
    .unwrap();
    let states = random_states(&mut ChaCha8Rng::seed_from_u64(1), 4096);
    let mut g = c.benchmark_group("clearance_batch");
    for (name, exec) in POLICIES {
        g.bench_function(name, |b| b.iter(|| problem.clearances(black_box(&states), exec)));
    }
    g.finish();
}

fn nearest(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let points = random_states(&mut rng, 4096);
    let queries = random_states(&mut rng, 256);
    let space = StateSpace::new(SpaceKind::SE2, Rect::new(0.0, 0.0, 20.0, 10.0).unwrap());
    let mut g = c.benchmark_group("nearest_batch");
    for (name, exec) in POLICIES {
        g.bench_function(name, |b| {
            b.iter(|| nearest_neighbors(&points, black_box(&queries), &space, exec).unwrap())
        });
    }
    g.finish();
}

fn statistics(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let series: Vec<Series> = (0..50)
        .map(|_| {
            let mut cost = 30.0;
            (1..=1000)
                .map(|i| {
                    cost -= rng.random_range(0.0..0.01);
                    (i as f64 * 0.01, Some(cost))
                })
                .collect()
        })
        .collect();
    let samples: Vec<Vec<Option<f64>>> = (0..64)
        .map(|_| (0..2000).map(|_| Some(rng.random_range(0.0..10.0))).collect())
        .collect();
    let mut g = c.benchmark_group("stats");
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new("progress_aggregate", name), &series, |b, s| {
            b.iter(|| progress_aggregate_with(s, 10.0, 0.01, 5, exec).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("boxplot_batch", name), &samples, |b, s| {
            b.iter(|| boxplot_batch(s, exec))
        });
    }
    g.finish();
}

criterion_group!(benches, geometry, nearest, statistics);
criterion_main!(benches);
