use plannerbench_core::geometry::{Point, Polygon, ProblemDef, Rect, SpaceKind, State, StateSpace, World};
use plannerbench_core::paths::{path_length, shortcut, simplify, smooth, Path};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn problem(world: World, start: State, goal: State) -> ProblemDef {
    ProblemDef::builder("p", StateSpace::new(SpaceKind::R2, world.bounds), world, start, goal)
        .build()
        .unwrap()
}

fn empty(start: State, goal: State) -> ProblemDef {
    problem(World::empty(Rect::new(-1.0, -1.0, 10.0, 10.0).unwrap()), start, goal)
}

fn square(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
    Polygon::new(vec![
        Point::new(x0, y0),
        Point::new(x1, y0),
        Point::new(x1, y1),
        Point::new(x0, y1),
    ])
    .unwrap()
}

#[test]
fn shortcut_corner_over_seeds() {
    let p = empty(State::point(0.0, 0.0), State::point(5.0, 5.0));
    let corner = Path::new(vec![
        State::point(0.0, 0.0),
        State::point(0.0, 5.0),
        State::point(5.0, 5.0),
    ])
    .unwrap();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cut = shortcut(&corner, &p, 200, &mut rng);
        let len = cut.length(&p.space);
        assert!(len <= 7.2, "seed {seed}: {len}");
        assert!(cut.is_valid(&p));
    }
}

#[test]
fn zigzag_simplifies_to_near_straight() {
    let (a, b) = (State::point(0.0, 0.0), State::point(9.0, 9.0));
    let p = empty(a, b);
    let straight = p.space.distance(&a, &b);
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut states = vec![a];
        states.extend((0..20).map(|_| State::point(rng.random_range(0.0..9.0), rng.random_range(0.0..9.0))));
        states.push(b);
        let zig = Path::new(states).unwrap();
        let (out, secs) = simplify(&zig, &p, &mut rng);
        let len = out.length(&p.space);
        assert!(len <= 1.05 * straight, "seed {seed}: {len} vs {straight}");
        assert!(secs >= 0.0);
    }
}

#[test]
fn wedged_corner_is_left_alone() {
    let world = World::new(
        Rect::new(-1.0, -1.0, 10.0, 10.0).unwrap(),
        vec![square(0.5, 0.5, 4.5, 4.5)],
    )
    .unwrap();
    let p = problem(world, State::point(0.0, 0.0), State::point(5.0, 5.0));
    let corner = Path::new(vec![
        State::point(0.0, 0.0),
        State::point(0.0, 5.0),
        State::point(5.0, 5.0),
    ])
    .unwrap();
    assert!(corner.is_valid(&p));
    let mid = State::point(2.5, 2.5);
    assert!(!p.is_state_valid(&mid));
    assert_eq!(smooth(&corner, &p, 3), corner);
}

/// Random obstacle field and a collision-free path grown by rejection.
fn random_case(seed: u64) -> (ProblemDef, Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = Rect::new(0.0, 0.0, 10.0, 10.0).unwrap();
    let obstacles = (0..rng.random_range(1..6))
        .map(|_| {
            let (x, y) = (rng.random_range(0.0..9.0), rng.random_range(0.0..9.0));
            let (w, h) = (rng.random_range(0.3..2.0), rng.random_range(0.3..2.0));
            square(x, y, (x + w).min(10.0), (y + h).min(10.0))
        })
        .collect();
    let world = World::new(bounds, obstacles).unwrap();
    let probe = problem(world.clone(), State::point(0.0, 0.0), State::point(0.0, 0.0));
    let random_valid = |rng: &mut ChaCha8Rng| loop {
        let s = State::point(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
        if probe.is_state_valid(&s) {
            return s;
        }
    };
    let mut states = vec![random_valid(&mut rng)];
    while states.len() < 8 {
        let next = random_valid(&mut rng);
        if probe.check_motion(states.last().unwrap(), &next) {
            states.push(next);
        }
    }
    let p = problem(world, states[0], *states.last().unwrap());
    (p, Path::new(states).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simplify_keeps_validity_and_endpoints(seed in any::<u64>()) {
        let (p, path) = random_case(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (out, _) = simplify(&path, &p, &mut rng);
        prop_assert!(out.is_valid(&p));
        prop_assert!(out.first().bit_eq(path.first()));
        prop_assert!(out.last().bit_eq(path.last()));
        prop_assert!(path_length(&out.states, &p.space) <= path.length(&p.space) + 1e-9);
    }
}
