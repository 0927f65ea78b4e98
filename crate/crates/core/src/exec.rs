//! Data-parallel helpers with a sequential fallback.
//!
//! Every batch loop in the crate goes through [`Execution::map`], which keeps
//! output order equal to input order. Reductions are done by the caller over
//! the returned vector, so rounding is identical in both modes.

/// How batch loops are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise falls
    /// back to sequential iteration.
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this mode will actually run on the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Order-preserving map over a slice.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            if self == Execution::Parallel {
                use rayon::prelude::*;
                return items.par_iter().map(f).collect();
            }
        }
        items.iter().map(f).collect()
    }

    /// Order-preserving map over an integer range.
    pub fn map_range<U, F>(self, range: std::ops::RangeInclusive<i32>, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(i32) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            if self == Execution::Parallel {
                use rayon::prelude::*;
                return range.into_par_iter().map(f).collect();
            }
        }
        range.map(f).collect()
    }
}

impl Execution {
    /// Applies `f` to consecutive mutable chunks of `data`.
    pub fn for_each_chunk_mut<T, F>(self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(&mut [T]) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            if self == Execution::Parallel {
                use rayon::prelude::*;
                data.par_chunks_mut(chunk).for_each(f);
                return;
            }
        }
        data.chunks_mut(chunk).for_each(f);
    }
}
