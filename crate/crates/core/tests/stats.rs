use plannerbench_core::benchlog::RunStatus;
use plannerbench_core::par::Exec;
use plannerbench_core::stats::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * (1.0 + a.abs().max(b.abs()))
}

fn random_samples(rng: &mut ChaCha8Rng) -> Vec<Option<f64>> {
    let n = rng.random_range(1..60);
    let missing = rng.random_range(0.0..0.5);
    (0..n)
        .map(|_| {
            if rng.random_bool(missing) {
                None
            } else if rng.random_bool(0.05) {
                Some(rng.random_range(50.0..500.0))
            } else {
                Some((rng.random_range(0.0..100.0_f64) * 8.0).round() / 8.0)
            }
        })
        .collect()
}

/// Order statistic at fractional rank by explicit bracketing.
fn oracle_quantile(mut v: Vec<f64>, p: f64) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let r = p * (v.len() as f64 - 1.0);
    let k = r as usize;
    if k + 1 >= v.len() {
        return v[v.len() - 1];
    }
    v[k] * (1.0 - (r - k as f64)) + v[k + 1] * (r - k as f64)
}

#[test]
fn boxplot_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let s = random_samples(&mut rng);
        let b = boxplot_stats(&s);
        let data: Vec<f64> = s.iter().flatten().copied().collect();
        assert_eq!(b.n, data.len());
        assert_eq!(b.n_missing, s.len() - data.len());
        if data.is_empty() {
            assert!(b.median.is_none());
            continue;
        }
        let q1 = oracle_quantile(data.clone(), 0.25);
        let med = oracle_quantile(data.clone(), 0.5);
        let q3 = oracle_quantile(data.clone(), 0.75);
        assert!(close(b.q1.unwrap(), q1) && close(b.median.unwrap(), med) && close(b.q3.unwrap(), q3));
        let iqr = q3 - q1;
        let lo = q1 - 1.5 * iqr;
        let hi = q3 + 1.5 * iqr;
        let mut inside = f64::INFINITY;
        let mut inside_hi = f64::NEG_INFINITY;
        let mut outliers = Vec::new();
        for &x in &data {
            if x < lo || x > hi {
                outliers.push(x);
            } else {
                inside = inside.min(x);
                inside_hi = inside_hi.max(x);
            }
        }
        outliers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(b.whisker_low, Some(inside));
        assert_eq!(b.whisker_high, Some(inside_hi));
        assert_eq!(b.outliers, outliers);
        let notch = 1.58 * iqr / (data.len() as f64).sqrt();
        assert!(close(b.notch_low.unwrap(), med - notch) && close(b.notch_high.unwrap(), med + notch));
    }
}

#[test]
fn ecdf_matches_counting_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let s = random_samples(&mut rng);
        let data: Vec<f64> = s.iter().flatten().copied().collect();
        let Ok(points) = ecdf(&s) else {
            assert!(data.is_empty());
            continue;
        };
        let mut distinct = data.clone();
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        distinct.dedup();
        assert_eq!(points.len(), distinct.len());
        for (pt, x) in points.iter().zip(&distinct) {
            let count = data.iter().filter(|v| **v <= *x).count();
            assert_eq!(pt.x, *x);
            assert!(close(pt.f, count as f64 / s.len() as f64));
        }
    }
}

#[test]
fn wilson_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..1000 {
        let n = rng.random_range(1..200usize);
        let k = rng.random_range(0..=n);
        let mut statuses = vec![Some(RunStatus::ExactSolution); k];
        statuses.extend((k..n).map(|i| match i % 3 {
            0 => Some(RunStatus::Timeout),
            1 => Some(RunStatus::ApproximateSolution),
            _ => None,
        }));
        let f = success_fraction(&statuses).unwrap();
        // (k + z²/2)/(n + z²) ± z√n/(n + z²)·√(p̂(1 − p̂) + z²/4n)
        let z: f64 = 1.96;
        let (nf, kf) = (n as f64, k as f64);
        let p = kf / nf;
        let center = (kf + z * z / 2.0) / (nf + z * z);
        let half = z * nf.sqrt() / (nf + z * z) * (p * (1.0 - p) + z * z / (4.0 * nf)).sqrt();
        assert_eq!((f.successes, f.n), (k, n));
        assert!(close(f.fraction, p));
        assert!(
            close(f.low, (center - half).max(0.0)),
            "{k}/{n}: {} vs {}",
            f.low,
            center - half
        );
        assert!(
            close(f.high, (center + half).min(1.0)),
            "{k}/{n}: {} vs {}",
            f.high,
            center + half
        );
    }
}

#[test]
fn regression_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..1000 {
        let versions = ["0.9", "1.0", "1.1", "2.0"];
        let groups: Vec<(String, Vec<Option<f64>>)> = (0..rng.random_range(1..6))
            .map(|_| (versions[rng.random_range(0..4)].to_string(), random_samples(&mut rng)))
            .collect();
        let bars = regression_aggregate(&groups);
        let mut expected = Vec::new();
        for v in versions {
            let data: Vec<f64> = groups
                .iter()
                .filter(|(g, _)| g == v)
                .flat_map(|(_, s)| s.iter().flatten().copied())
                .collect();
            if data.is_empty() {
                continue;
            }
            let n = data.len() as f64;
            let mean = data.iter().sum::<f64>() / n;
            let se = (data.len() > 1)
                .then(|| (data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt());
            expected.push((v, mean, se, data.len()));
        }
        assert_eq!(bars.len(), expected.len());
        for (b, (v, mean, se, n)) in bars.iter().zip(expected) {
            assert_eq!((b.version.as_str(), b.n), (v, n));
            assert!(close(b.mean, mean), "{} vs {mean}", b.mean);
            match (b.std_error, se) {
                (Some(a), Some(e)) => assert!((a - e).abs() <= 1e-9 * (1.0 + e), "{a} vs {e}"),
                (a, e) => assert_eq!(a, e),
            }
        }
    }
}

#[test]
fn two_constant_series_closed_form() {
    let s = vec![vec![(0.0, Some(10.0))], vec![(0.0, Some(20.0))]];
    let a = progress_aggregate(&s, 10.0, DEFAULT_GRID_STEP, 1).unwrap();
    for i in 0..a.grid.len() {
        assert_eq!(a.mean[i], Some(15.0));
        assert!(close(a.ci_high[i].unwrap() - 15.0, 9.8));
        assert!(close(15.0 - a.ci_low[i].unwrap(), 9.8));
    }
    assert_eq!(a.counts_1s[0], 2);
    assert!(a.counts_1s[1..].iter().all(|c| *c == 0));
}

#[test]
fn empty_progress_input_is_all_absent() {
    let a = progress_aggregate(&[], 1.0, 0.1, 5).unwrap();
    assert_eq!(a.grid.len(), 11);
    assert!(a.mean.iter().all(Option::is_none));
    assert_eq!(a.counts_1s, vec![0]);
}

#[test]
fn progress_sequential_and_parallel_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let series: Vec<Series> = (0..30).map(|_| random_series(&mut rng, 5.0)).collect();
    let a = progress_aggregate_with(&series, 5.0, 0.1, 5, Exec::Sequential).unwrap();
    let b = progress_aggregate_with(&series, 5.0, 0.1, 5, Exec::Parallel).unwrap();
    assert_eq!(a, b);
}

fn random_series(rng: &mut ChaCha8Rng, limit: f64) -> Series {
    let first = rng.random_range(0.0..limit);
    let mut cost = rng.random_range(10.0..20.0);
    let mut out = Vec::new();
    let mut t = 0.0;
    while t < limit {
        if t >= first {
            cost -= rng.random_range(0.0..0.5);
            out.push((t, Some(cost)));
        } else {
            out.push((t, None));
        }
        t += rng.random_range(0.05..0.4);
    }
    out
}

fn samples_strategy() -> impl Strategy<Value = Vec<Option<f64>>> {
    prop::collection::vec(prop::option::weighted(0.8, -1e3..1e3f64), 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn box_ordering(s in samples_strategy()) {
        let b = boxplot_stats(&s);
        if b.n > 0 {
            let (q1, m, q3) = (b.q1.unwrap(), b.median.unwrap(), b.q3.unwrap());
            prop_assert!(q1 <= m && m <= q3);
            let data: Vec<f64> = s.iter().flatten().copied().collect();
            let min = data.iter().copied().fold(f64::INFINITY, f64::min);
            let max = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(min <= b.whisker_low.unwrap() && b.whisker_high.unwrap() <= max);
            let kept: Vec<f64> = data.iter().copied().filter(|x| !b.outliers.contains(x)).collect();
            prop_assert_eq!(kept.len() + b.outliers.len(), data.len());
            prop_assert!(kept.iter().all(|x| b.whisker_low.unwrap() <= *x && *x <= b.whisker_high.unwrap()));
        }
    }

    #[test]
    fn ecdf_law(s in samples_strategy()) {
        if let Ok(points) = ecdf(&s) {
            prop_assert!(points.windows(2).all(|w| w[0].x < w[1].x && w[0].f < w[1].f));
            let defined = s.iter().flatten().count();
            prop_assert_eq!(points.last().unwrap().f, defined as f64 / s.len() as f64);
        }
    }

    #[test]
    fn aggregates_are_permutation_invariant(
        (s, shuffled) in samples_strategy().prop_flat_map(|s| (Just(s.clone()), Just(s).prop_shuffle()))
    ) {
        prop_assert_eq!(boxplot_stats(&s), boxplot_stats(&shuffled));
        prop_assert_eq!(ecdf(&s), ecdf(&shuffled));
        let g1 = vec![("1.0".to_string(), s.clone()), ("0.5".to_string(), s.iter().rev().copied().collect())];
        let g2 = vec![("0.5".to_string(), shuffled.iter().rev().copied().collect()), ("1.0".to_string(), shuffled.clone())];
        prop_assert_eq!(regression_aggregate(&g1), regression_aggregate(&g2));
        let status = |v: &[Option<f64>]| -> Vec<Option<RunStatus>> {
            v.iter().map(|x| x.map(|_| RunStatus::ExactSolution)).collect()
        };
        prop_assert_eq!(success_fraction(&status(&s)), success_fraction(&status(&shuffled)));
    }

    #[test]
    fn progress_permutation_and_band(seed in any::<u64>(), runs in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let series: Vec<Series> = (0..runs).map(|_| random_series(&mut rng, 3.0)).collect();
        let mut reversed = series.clone();
        reversed.reverse();
        let a = progress_aggregate(&series, 3.0, 0.1, 5).unwrap();
        prop_assert_eq!(&a, &progress_aggregate(&reversed, 3.0, 0.1, 5).unwrap());
        for i in 0..a.grid.len() {
            if let (Some(lo), Some(m), Some(hi)) = (a.ci_low[i], a.mean[i], a.ci_high[i]) {
                prop_assert!(lo <= m && m <= hi);
            }
            if a.n[i] < 2 {
                prop_assert!(a.ci_low[i].is_none() && a.ci_high[i].is_none());
            }
        }
    }

    #[test]
    fn single_series_reproduces_locf(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_series(&mut rng, 4.0);
        let a = progress_aggregate(std::slice::from_ref(&s), 4.0, 0.1, 1).unwrap();
        for (i, t) in a.grid.iter().enumerate() {
            prop_assert_eq!(a.mean[i], locf(&s, *t));
            prop_assert!(a.ci_low[i].is_none());
        }
    }
}
