//! Switch between rayon-backed and sequential evaluation of independent work items.
//!
//! The `parallel` cargo feature compiles in the rayon path. Without it every
//! [`Execution`] value runs sequentially, so call sites never need `cfg` gates.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

static GLOBAL: AtomicU8 = AtomicU8::new(1);

impl Execution {
    /// Process-wide default used by the numerical kernels.
    pub fn global() -> Execution {
        match GLOBAL.load(Ordering::Relaxed) {
            0 => Execution::Sequential,
            _ => Execution::Parallel,
        }
    }

    pub fn set_global(mode: Execution) {
        let v = match mode {
            Execution::Sequential => 0,
            Execution::Parallel => 1,
        };
        GLOBAL.store(v, Ordering::Relaxed);
        #[cfg(feature = "parallel")]
        faer::set_global_parallelism(match mode {
            Execution::Sequential => faer::Par::Seq,
            Execution::Parallel => faer::Par::rayon(0),
        });
    }

    /// True when work actually fans out over a thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Map `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Map over `0..n`, preserving order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }
}

/// Configure the rayon pool size. A no-op without the `parallel` feature.
pub fn configure_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let a = Execution::Sequential.map(&xs, |x| x * x);
        let b = Execution::Parallel.map(&xs, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(Execution::Parallel.map_range(5, |i| i + 1), vec![1, 2, 3, 4, 5]);
    }
}
