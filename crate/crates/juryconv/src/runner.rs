//! Parallel trial execution on a shared worker pool.
//!
//! The pool size comes from `JURYCONV_THREADS` when it holds a positive
//! integer, and from the number of available cores otherwise. Results are
//! always returned in trial order, so reports do not depend on scheduling.

use std::sync::OnceLock;

use rayon::prelude::*;
use rayon::ThreadPool;

pub const THREADS_ENV: &str = "JURYCONV_THREADS";

pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(thread_count())
            .thread_name(|i| format!("juryconv-{i}"))
            .build()
            .expect("worker pool")
    })
}

/// Runs `f(0), ..., f(count - 1)` on the pool and collects in index order,
/// stopping at the first error.
pub fn par_trials<T, E, F>(count: u64, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    pool().install(|| (0..count).into_par_iter().map(&f).collect())
}

/// Order-preserving parallel map over a slice.
pub fn par_map<I, T, E, F>(items: &[I], f: F) -> Result<Vec<T>, E>
where
    I: Sync,
    T: Send,
    E: Send,
    F: Fn(&I) -> Result<T, E> + Sync + Send,
{
    pool().install(|| items.par_iter().map(&f).collect())
}
