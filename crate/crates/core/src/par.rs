//! Data-parallel helpers.
//!
//! With the `parallel` feature (default) [`Exec::Parallel`] fans work out over
//! the rayon pool. Without it every call runs sequentially, so results never
//! depend on the feature: all helpers preserve input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Maps `f` over `items`, keeping order.
pub fn map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n`, keeping order.
pub fn map_range<R, F>(exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Index of the maximum of `score(i)` over `0..n`; ties go to the lowest index.
/// `None` scores are skipped.
pub fn argmax_range<F>(exec: Exec, n: usize, score: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> Option<f64> + Sync + Send,
{
    let pick = |a: Option<(usize, f64)>, b: Option<(usize, f64)>| match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            if y.1 > x.1 || (y.1 == x.1 && y.0 < x.0) {
                Some(y)
            } else {
                Some(x)
            }
        }
    };
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n)
            .into_par_iter()
            .map(|i| score(i).map(|s| (i, s)))
            .reduce(|| None, pick);
    }
    let _ = exec;
    (0..n).map(|i| score(i).map(|s| (i, s))).fold(None, pick)
}
