//! Data-parallel map with a sequential fallback.
//!
//! Compiled with the `parallel` feature (default) this fans out across the
//! rayon pool; without it the same call sites run sequentially. Results are
//! collected in index order either way, so outputs are identical regardless
//! of feature choice or worker count.

#[cfg(feature = "parallel")]
pub(crate) fn par_collect<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_collect<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).map(f).collect()
}
