//! Parallel/sequential dispatch for index-based workloads.
//!
//! Without the `parallel` feature every call runs sequentially. Results are
//! always returned in index order, and reductions are only used with
//! associative, order-independent accumulators (integer counts), so the
//! output does not depend on the execution mode.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this mode actually fans out on the current build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub(crate) fn map_indices<T, F>(len: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

pub(crate) fn map_reduce<T, F, R>(
    len: usize,
    exec: Execution,
    map: F,
    identity: fn() -> T,
    reduce: R,
) -> T
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..len).into_par_iter().map(map).reduce(identity, reduce);
    }
    let _ = exec;
    (0..len).map(map).fold(identity(), reduce)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let seq = map_indices(1000, Execution::Sequential, |i| i * i);
        let par = map_indices(1000, Execution::Parallel, |i| i * i);
        assert_eq!(seq, par);
        assert!(seq.windows(2).all(|w| w[0] < w[1]));

        let s = map_reduce(
            1000,
            Execution::Sequential,
            |i| i as u64,
            || 0,
            |a, b| a + b,
        );
        let p = map_reduce(1000, Execution::Parallel, |i| i as u64, || 0, |a, b| a + b);
        assert_eq!(s, 499_500);
        assert_eq!(s, p);
    }
}
