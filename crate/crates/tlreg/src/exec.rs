//! Execution strategy for the crate's embarrassingly parallel loops.
//!
//! With the default `parallel` feature the loops run on rayon; without it they
//! run sequentially. Results are collected in index order either way, and every
//! worker derives its randomness from its own index, so both modes produce
//! identical output.

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
