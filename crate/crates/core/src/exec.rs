//! Execution strategy for the per-center kernels.
//!
//! Every kernel in the crate is a loop over ball centers followed by a
//! reduction. With the `parallel` feature the loop runs on rayon; without it
//! (or with [`Strategy::Sequential`]) it is a plain iterator. Reductions are
//! either exact (`max`) or done sequentially over an ordered `Vec`, so both
//! strategies produce bit-identical results regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    /// Falls back to sequential when the crate is built without `parallel`.
    Parallel,
}

impl Default for Strategy {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Strategy::Parallel
        } else {
            Strategy::Sequential
        }
    }
}

impl Strategy {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Strategy::Parallel
    }
}

/// `(0..len).map(f).collect()`, order preserved.
pub(crate) fn map_indices<T, F>(strategy: Strategy, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if strategy.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = strategy;
    (0..len).map(f).collect()
}

/// `items.iter().map(f).collect()`, order preserved.
pub(crate) fn map_slice<S, T, F>(strategy: Strategy, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if strategy.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = strategy;
    items.iter().map(f).collect()
}

/// Runs `visit(center, scratch, acc)` for every center and combines the
/// per-worker accumulators with an elementwise `max`. `acc` starts at zero.
///
/// `f64::max` is exact, commutative and associative on non-NaN input, so the
/// result does not depend on how centers are split across workers.
pub(crate) fn max_accumulate<S, I, F>(strategy: Strategy, centers: usize, len: usize, scratch: I, visit: F) -> Vec<f64>
where
    S: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(usize, &mut S, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if strategy.is_parallel() {
        return (0..centers)
            .into_par_iter()
            .fold(
                || (scratch(), vec![0.0; len]),
                |(mut s, mut acc), c| {
                    visit(c, &mut s, &mut acc);
                    (s, acc)
                },
            )
            .map(|(_, acc)| acc)
            .reduce(
                || vec![0.0; len],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x = x.max(y);
                    }
                    a
                },
            );
    }
    let _ = strategy;
    let mut s = scratch();
    let mut acc = vec![0.0; len];
    for c in 0..centers {
        visit(c, &mut s, &mut acc);
    }
    acc
}
