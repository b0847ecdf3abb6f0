//! Data-parallel evaluation with a sequential fallback.
//!
//! With the `parallel` feature, work is spread over a rayon pool; without
//! it, or with one job, everything runs on the calling thread. Results are
//! always returned in input order, so callers see identical output for
//! every job count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Items handed to the pool at once by [`Executor::scan_until`].
pub const CHUNK: usize = 64;

pub struct Executor {
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    /// `jobs = None` uses all cores; `Some(1)` is sequential.
    pub fn new(jobs: Option<usize>) -> Self {
        #[cfg(feature = "parallel")]
        {
            let pool = match jobs {
                Some(1) => None,
                _ => rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build().ok(),
            };
            Executor { pool }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = jobs;
            Executor {}
        }
    }

    pub fn sequential() -> Self {
        Self::new(Some(1))
    }

    pub fn is_parallel(&self) -> bool {
        #[cfg(feature = "parallel")]
        {
            self.pool.is_some()
        }
        #[cfg(not(feature = "parallel"))]
        {
            false
        }
    }

    /// Applies `f` to every item, preserving order.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            return pool.install(|| items.par_iter().map(&f).collect());
        }
        items.iter().map(f).collect()
    }

    /// Evaluates `f` over `items` chunk by chunk and returns the results up
    /// to and including the first one accepted by `stop`. Later items of the
    /// final chunk may have been evaluated but are discarded.
    pub fn scan_until<T, R, F, S>(&self, items: impl IntoIterator<Item = T>, f: F, stop: S) -> Vec<R>
    where
        T: Send + Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
        S: Fn(&R) -> bool,
    {
        let mut out = Vec::new();
        let mut items = items.into_iter();
        let size = if self.is_parallel() { CHUNK } else { 1 };
        loop {
            let chunk: Vec<T> = items.by_ref().take(size).collect();
            if chunk.is_empty() {
                return out;
            }
            for r in self.map(&chunk, &f) {
                let done = stop(&r);
                out.push(r);
                if done {
                    return out;
                }
            }
        }
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::new(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_do_not_depend_on_job_count() {
        let seq = Executor::sequential();
        let par = Executor::new(Some(4));
        let xs: Vec<u64> = (0..500).collect();
        assert_eq!(seq.map(&xs, |x| x * x), par.map(&xs, |x| x * x));
        let a = seq.scan_until(0..1000u64, |x| x % 97, |r| *r == 96);
        let b = par.scan_until(0..1000u64, |x| x % 97, |r| *r == 96);
        assert_eq!(a, b);
        assert_eq!(a.len(), 97);
        assert_eq!(seq.scan_until(0..10u64, |x| *x, |_| false).len(), 10);
    }
}
