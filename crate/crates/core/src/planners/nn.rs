use crate::geometry::{State, StateSpace};
use crate::par::{self, Exec};

use super::PlannerError;

/// Index of the closest point to `q`; ties go to the lowest index.
pub fn nearest_neighbor(points: &[State], q: &State, space: &StateSpace) -> Result<usize, PlannerError> {
    nearest_index(points, q, space).ok_or(PlannerError::EmptyPointSet)
}

#[inline]
pub(crate) fn nearest_index(points: &[State], q: &State, space: &StateSpace) -> Option<usize> {
    let mut best = None;
    let mut best_d = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let d = space.distance(p, q);
        if d < best_d {
            best_d = d;
            best = Some(i);
        }
    }
    best
}

/// Batch nearest-neighbor queries, parallel over queries.
pub fn nearest_neighbors(
    points: &[State],
    queries: &[State],
    space: &StateSpace,
    exec: Exec,
) -> Result<Vec<usize>, PlannerError> {
    if points.is_empty() {
        return Err(PlannerError::EmptyPointSet);
    }
    Ok(par::map(exec, queries, |q| {
        nearest_index(points, q, space).expect("points nonempty")
    }))
}

/// Reusable buffer for k-nearest queries.
#[derive(Debug, Default)]
pub(crate) struct KNearest {
    scratch: Vec<(f64, usize)>,
}

impl KNearest {
    /// The `k` closest points ordered by (distance, index), excluding
    /// `skip` when given.
    pub(crate) fn query(
        &mut self,
        points: &[State],
        q: &State,
        space: &StateSpace,
        k: usize,
        skip: Option<usize>,
    ) -> Vec<usize> {
        self.scratch.clear();
        self.scratch.extend(
            points
                .iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != skip)
                .map(|(i, p)| (space.distance(p, q), i)),
        );
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        let k = k.min(self.scratch.len());
        if k == 0 {
            return Vec::new();
        }
        if k < self.scratch.len() {
            self.scratch.select_nth_unstable_by(k - 1, cmp);
            self.scratch.truncate(k);
        }
        self.scratch.sort_unstable_by(cmp);
        self.scratch.iter().map(|&(_, i)| i).collect()
    }
}
