//! Job-level data parallelism.
//!
//! Monte-Carlo trials and Pareto weight points are independent jobs. With the
//! `parallel` feature (on by default) they fan out over a rayon pool; without
//! it, or with `jobs == 1`, they run in order on the calling thread. Results
//! are always returned in job-index order, so output is identical either way.

/// Evaluates `f(0..n)` and returns the results in index order.
///
/// `jobs == 0` lets rayon pick the thread count.
pub fn map_indexed<T, F>(n: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if jobs == 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    map_parallel(n, jobs, f)
}

#[cfg(feature = "parallel")]
fn map_parallel<T, F>(n: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;

    let run = || (0..n).into_par_iter().map(&f).collect::<Vec<T>>();
    if jobs == 0 {
        return run();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(run),
        Err(e) => {
            log::warn!("falling back to the global rayon pool: {e}");
            run()
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn map_parallel<T, F>(n: usize, _jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Whether this build fans jobs out over threads.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
