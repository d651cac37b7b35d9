//! Execution policy for the data-parallel loops.
//!
//! With the `parallel` feature (default) [`Exec::Parallel`] runs on the rayon
//! pool; without it both variants run sequentially. Results never depend on
//! the policy: work is split into index ranges whose outputs are collected in
//! index order, and every reduction happens afterwards in that order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// `true` when this policy will actually fan out to worker threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Evaluates `f` on `0..n` and returns the results in index order.
    pub fn map_indices<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Like [`Exec::map_indices`] but the closure may fail; the first error in
    /// index order is returned.
    pub fn try_map_indices<T, F>(self, n: usize, f: F) -> crate::Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> crate::Result<T> + Sync + Send,
    {
        self.map_indices(n, f).into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_policies_agree() {
        let f = |i: usize| (i as f64).sin() * 1e3;
        let a = Exec::Sequential.map_indices(10_000, f);
        let b = Exec::Parallel.map_indices(10_000, f);
        assert_eq!(a, b);
    }
}
