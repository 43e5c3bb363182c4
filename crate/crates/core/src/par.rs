//! Trial-level parallelism. Each trial owns its state, so a plain indexed map
//! is enough. With the `parallel` feature the map runs on a rayon pool whose
//! size is capped by `GLGP_THREADS`; without it everything runs in order.

use crate::error::{Error, Result};

/// Worker count requested through `GLGP_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("GLGP_THREADS").ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

/// Runs `f(0..count)` in order and collects the results, stopping at the first error.
pub fn map_trials_sequential<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T>,
{
    (0..count).map(|i| f(i).map_err(|e| Error::Trial { trial: i, source: Box::new(e) })).collect()
}

/// Runs `f(0..count)` on a rayon pool. Results come back in index order.
#[cfg(feature = "parallel")]
pub fn map_trials_parallel<T, F>(count: usize, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    let run = || -> Result<Vec<T>> {
        (0..count).into_par_iter().map(|i| f(i).map_err(|e| Error::Trial { trial: i, source: Box::new(e) })).collect()
    };
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// The default map: parallel when the feature is on, honouring `GLGP_THREADS`.
pub fn map_trials<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if thread_cap() == Some(1) {
            return map_trials_sequential(count, f);
        }
        map_trials_parallel(count, thread_cap(), f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_trials_sequential(count, f)
    }
}
