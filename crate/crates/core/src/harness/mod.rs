//! Experiment batches, verification suites and file formats.

pub mod csv;
pub mod experiment;
pub mod suites;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "OMP_LAB_THREADS";

/// Runs `f` on a pool sized by [`THREADS_ENV`], or on the global pool when the
/// variable is unset or not a positive integer.
pub(crate) fn with_worker_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}
