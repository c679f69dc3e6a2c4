//! Execution strategy for the data-parallel loops.
//!
//! Every parallel entry point takes an [`Execution`] and produces output in
//! index order, so results never depend on scheduling. Without the `parallel`
//! feature, [`Execution::Parallel`] runs sequentially.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `jobs == 1` selects sequential execution; anything else parallel.
    pub fn from_jobs(jobs: usize) -> Self {
        if jobs == 1 {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    /// Maps `f` over `0..n`, collecting results in index order.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Fallible variant of [`Execution::map_range`]; the lowest failing index wins.
    pub fn try_map_range<T, E, F>(self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map_range(n, f).into_iter().collect()
    }
}

/// Sizes the global worker pool. `0` keeps the default (one per core).
///
/// Only the first call in a process has any effect.
pub fn configure_threads(jobs: usize) {
    #[cfg(feature = "parallel")]
    if jobs > 1 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_preserve_order() {
        let seq = Execution::Sequential.map_range(1000, |i| i * i);
        let par = Execution::Parallel.map_range(1000, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 999 * 999);
    }

    #[test]
    fn first_error_is_reported() {
        let r: Result<Vec<usize>, usize> =
            Execution::Parallel.try_map_range(100, |i| if i % 30 == 29 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(29));
    }

    #[test]
    fn jobs_mapping() {
        assert_eq!(Execution::from_jobs(1), Execution::Sequential);
        assert_eq!(Execution::from_jobs(0), Execution::Parallel);
        assert_eq!(Execution::from_jobs(8), Execution::Parallel);
    }
}
