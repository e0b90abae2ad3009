//! Execution policy for the data-parallel loops (raster pixels, Monte Carlo
//! blocks, sweep points).
//!
//! Every parallel loop writes results by index, so output is bit-identical
//! between [`Exec::Sequential`] and [`Exec::Parallel`].

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FRACTAL_OAM_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Rayon work stealing. Falls back to sequential without the `parallel` feature.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Maps `f` over `0..len` and collects in index order.
    pub fn map_indexed<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            _ => (0..len).map(f).collect(),
        }
    }

    /// Fallible variant of [`Exec::map_indexed`]; the first error in index order wins.
    pub fn try_map_indexed<T, E, F>(self, len: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map_indexed(len, f).into_iter().collect()
    }
}

/// Sizes the global rayon pool from [`THREADS_ENV`], if set. Returns the value used.
///
/// Only the first call can take effect; later calls are no-ops.
pub fn init_thread_pool_from_env() -> Option<usize> {
    let threads = std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)?;
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Some(threads)
}
