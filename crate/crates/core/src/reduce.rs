//! Ordered parallel reduction over path indices.
//!
//! Paths are cut into fixed-size chunks independent of the worker count. Each
//! chunk is summed sequentially and chunk results are merged in index order,
//! so the floating-point result is the same for any number of workers.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Result, RuinError};

const CHUNK: usize = 256;

/// First and second moments of a sample.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(mut self, other: Moments) -> Moments {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Standard error of the mean from the unbiased sample variance.
    pub fn stderr(&self) -> f64 {
        let n = self.count as f64;
        let mean = self.mean();
        let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Runs `chunk` over consecutive index ranges covering `0..n` and merges the
/// results in order.
pub(crate) fn ordered_reduce<F>(n: usize, workers: usize, chunk: F) -> Result<Moments>
where
    F: Fn(Range<usize>) -> Moments + Sync,
{
    if workers == 0 {
        return Err(RuinError::InvalidInput("workers must be at least 1".into()));
    }
    let ranges: Vec<Range<usize>> = (0..n)
        .step_by(CHUNK)
        .map(|start| start..(start + CHUNK).min(n))
        .collect();
    let parts: Vec<Moments> = if workers == 1 {
        ranges.into_iter().map(&chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| RuinError::InvalidInput(format!("thread pool: {e}")))?;
        pool.install(|| ranges.into_par_iter().map(&chunk).collect())
    };
    Ok(parts.into_iter().fold(Moments::default(), Moments::merge))
}
