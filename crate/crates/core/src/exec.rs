//! Fan-out helper for the data-parallel hot loops.
//!
//! With the `parallel` feature (on by default) the closure runs under rayon;
//! without it, or when the caller asks for the sequential path explicitly,
//! the loop is a plain iterator.  Results are always collected in index
//! order and reduced sequentially, so outputs are bit-identical in every
//! mode.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn map_indexed<T, F>(n: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}
