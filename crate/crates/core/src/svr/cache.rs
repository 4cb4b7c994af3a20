//! Least-recently-used cache for kernel matrix rows.
//!
//! The solver repeatedly asks for rows of the n x n kernel matrix while
//! optimizing; a row is n kernel evaluations, so re-deriving hot rows
//! dominates training time once n grows. Slots are indexed by row so the
//! solver can borrow two rows at once without copying; at most `budget`
//! rows are resident and the stalest is evicted when a new one arrives.

pub(crate) struct RowCache {
    budget: usize,
    clock: u64,
    rows: Vec<Option<Vec<f64>>>,
    stamps: Vec<u64>,
    resident: usize,
}

impl RowCache {
    pub(crate) fn new(points: usize, budget: usize) -> Self {
        RowCache {
            budget: budget.max(2), // the solver always works on a pair
            clock: 0,
            rows: vec![None; points],
            stamps: vec![0; points],
            resident: 0,
        }
    }

    /// Make rows `i` and `j` resident and return them. `protect` rows are
    /// exempt from eviction while this call runs.
    pub(crate) fn pair<F>(&mut self, i: usize, j: usize, fill: F) -> (&[f64], &[f64])
    where
        F: Fn(usize) -> Vec<f64>,
    {
        self.ensure(i, j, &fill);
        self.ensure(j, i, &fill);
        let row_i = self.rows[i].as_ref().expect("row i resident");
        let row_j = self.rows[j].as_ref().expect("row j resident");
        (row_i, row_j)
    }

    /// Make row `i` resident and return it.
    pub(crate) fn single<F>(&mut self, i: usize, fill: F) -> &[f64]
    where
        F: Fn(usize) -> Vec<f64>,
    {
        self.ensure(i, i, &fill);
        self.rows[i].as_ref().expect("row resident")
    }

    fn ensure<F>(&mut self, i: usize, protect: usize, fill: &F)
    where
        F: Fn(usize) -> Vec<f64>,
    {
        self.clock += 1;
        if self.rows[i].is_some() {
            self.stamps[i] = self.clock;
            return;
        }
        if self.resident >= self.budget {
            let stalest = self
                .stamps
                .iter()
                .enumerate()
                .filter(|&(t, _)| t != i && t != protect && self.rows[t].is_some())
                .min_by_key(|&(t, &stamp)| (stamp, t))
                .map(|(t, _)| t);
            if let Some(t) = stalest {
                self.rows[t] = None;
                self.resident -= 1;
            }
        }
        self.rows[i] = Some(fill(i));
        self.stamps[i] = self.clock;
        self.resident += 1;
    }

    #[cfg(test)]
    pub(crate) fn resident_rows(&self) -> usize {
        self.resident
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evicts_least_recently_used_row() {
        let mut cache = RowCache::new(8, 2);
        cache.single(0, |i| vec![i as f64]);
        cache.single(1, |i| vec![i as f64]);
        cache.single(0, |_| unreachable!("row 0 is cached"));
        // Row 1 is now the stalest and must be evicted.
        cache.single(2, |i| vec![i as f64]);
        assert_eq!(cache.resident_rows(), 2);
        assert!(cache.rows[1].is_none());
        assert!(cache.rows[0].is_some());
    }

    #[test]
    fn pair_serves_both_rows_even_at_minimum_budget() {
        let mut cache = RowCache::new(4, 0); // clamped to 2
        let (a, b) = cache.pair(1, 3, |i| vec![i as f64; 2]);
        assert_eq!(a, &[1.0, 1.0]);
        assert_eq!(b, &[3.0, 3.0]);
        let (c, d) = cache.pair(2, 2, |i| vec![i as f64; 2]);
        assert_eq!(c, d);
    }
}
