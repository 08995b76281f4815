//! Elementwise kernels over sample buffers.
//!
//! Every helper here maps each element independently, so the parallel and
//! sequential builds produce bit-identical output. Reductions (sums, RMS,
//! spectral totals) stay sequential everywhere in the crate to keep float
//! association fixed.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this length the rayon splitter keeps chunks whole; tiny grids would
/// otherwise pay more in scheduling than the map costs.
#[cfg(feature = "parallel")]
const MIN_CHUNK: usize = 4096;

#[cfg(feature = "parallel")]
pub(crate) fn map_mut<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(&mut T) + Sync + Send,
{
    data.par_iter_mut().with_min_len(MIN_CHUNK).for_each(f);
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_mut<T, F>(data: &mut [T], f: F)
where
    F: Fn(&mut T),
{
    data.iter_mut().for_each(f);
}

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed_mut<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    data.par_iter_mut()
        .with_min_len(MIN_CHUNK)
        .enumerate()
        .for_each(|(k, x)| f(k, x));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed_mut<T, F>(data: &mut [T], f: F)
where
    F: Fn(usize, &mut T),
{
    data.iter_mut().enumerate().for_each(|(k, x)| f(k, x));
}

#[cfg(feature = "parallel")]
pub(crate) fn map_collect<A, B, F>(data: &[A], f: F) -> Vec<B>
where
    A: Sync,
    B: Send,
    F: Fn(&A) -> B + Sync + Send,
{
    data.par_iter().with_min_len(MIN_CHUNK).map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_collect<A, B, F>(data: &[A], f: F) -> Vec<B>
where
    F: Fn(&A) -> B,
{
    data.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn zip_map<A, B, C, F>(a: &[A], b: &[B], f: F) -> Vec<C>
where
    A: Sync,
    B: Sync,
    C: Send,
    F: Fn(&A, &B) -> C + Sync + Send,
{
    a.par_iter()
        .zip_eq(b.par_iter())
        .with_min_len(MIN_CHUNK)
        .map(|(x, y)| f(x, y))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn zip_map<A, B, C, F>(a: &[A], b: &[B], f: F) -> Vec<C>
where
    F: Fn(&A, &B) -> C,
{
    a.iter().zip(b.iter()).map(|(x, y)| f(x, y)).collect()
}
