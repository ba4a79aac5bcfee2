//! Execution policy for the data-parallel loops (batch geometry queries and
//! statistics aggregation). Without the `parallel` feature every policy
//! runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Order-preserving map.
pub fn map<T, U, F>(exec: Exec, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Order-preserving map over `0..n`.
pub fn map_range<U, F>(exec: Exec, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Index of the minimum key; ties go to the lowest index. NaN keys are skipped.
pub fn argmin_by_key<T, F>(exec: Exec, items: &[T], key: F) -> Option<usize>
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    fn better(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
        if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    }
    let init = (f64::INFINITY, usize::MAX);
    #[cfg(feature = "parallel")]
    let best = if exec.is_parallel() {
        items
            .par_iter()
            .enumerate()
            .filter_map(|(i, t)| {
                let k = key(t);
                (!k.is_nan()).then_some((k, i))
            })
            .reduce(|| init, better)
    } else {
        items
            .iter()
            .enumerate()
            .filter_map(|(i, t)| {
                let k = key(t);
                (!k.is_nan()).then_some((k, i))
            })
            .fold(init, better)
    };
    #[cfg(not(feature = "parallel"))]
    let best = {
        let _ = exec;
        items
            .iter()
            .enumerate()
            .filter_map(|(i, t)| {
                let k = key(t);
                (!k.is_nan()).then_some((k, i))
            })
            .fold(init, better)
    };
    (best.1 != usize::MAX).then_some(best.1)
}
