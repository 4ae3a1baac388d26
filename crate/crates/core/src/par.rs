//! Deterministic data-parallel helpers.
//!
//! Per-vertex work may run on the ambient rayon pool; every reduction is then
//! a sequential fold in ascending index order, so results are bit-identical
//! for any worker count.

use rayon::prelude::*;

use crate::scalar::Scalar;

/// Below this many vertices the per-vertex map runs sequentially.
pub const PAR_MIN_VERTICES: usize = 4096;

pub(crate) fn map_indices<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    if n >= PAR_MIN_VERTICES {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Left-to-right sum.
#[inline]
pub(crate) fn ordered_sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| acc + v)
}

/// Sum of `f(x)` over `0..n` with ascending-order combination.
pub(crate) fn sum_indices<T, F>(n: usize, f: F) -> T
where
    T: Scalar,
    F: Fn(usize) -> T + Sync + Send,
{
    if n >= PAR_MIN_VERTICES {
        ordered_sum(map_indices(n, f))
    } else {
        (0..n).fold(T::zero(), |acc, x| acc + f(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_sum_matches_sequential_bits() {
        let n = 3 * PAR_MIN_VERTICES + 17;
        let f = |x: usize| ((x as f64) * 0.37).sin() * 1e-3 + 1.0 / (1.0 + x as f64);
        let seq = (0..n).fold(0.0, |a, x| a + f(x));
        for threads in [1, 3, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let par = pool.install(|| sum_indices(n, f));
            assert_eq!(par.to_bits(), seq.to_bits());
        }
    }
}
