//! Worker-pool plumbing shared by the enumeration and simulation layers.

use rayon::ThreadPool;

/// Environment variable capping the number of worker threads (`0` = auto).
pub const THREADS_ENV_VAR: &str = "PPILAB_THREADS";

/// Thread cap from `PPILAB_THREADS`; unset, unparsable, or `0` means "let
/// rayon decide".
pub fn env_thread_cap() -> usize {
    std::env::var(THREADS_ENV_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0)
}

/// A dedicated pool with `threads` workers (`0` = rayon default).
///
/// Results must never depend on the worker count: callers split work into
/// fixed-size chunks and merge chunk results in index order.
pub fn build_pool(threads: usize) -> ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("failed to build worker pool")
}
