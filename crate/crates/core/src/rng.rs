//! Reproducible, worker-count-independent Monte Carlo sums.
//!
//! Samples are drawn in fixed-size chunks; chunk `c` uses the ChaCha8
//! stream `c` of the seed, and partial statistics are merged in chunk order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleStats {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
}

impl SampleStats {
    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let m2a = self.variance * (self.count.saturating_sub(1)) as f64;
        let m2b = other.variance * (other.count.saturating_sub(1)) as f64;
        let m2 = m2a + m2b + delta * delta * (self.count * other.count) as f64 / n as f64;
        Self {
            count: n,
            mean: self.mean + delta * other.count as f64 / n as f64,
            variance: if n > 1 { m2 / (n - 1) as f64 } else { 0.0 },
        }
    }
}

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Mean and variance of `f` over `samples` draws.
pub fn sample_mean<F>(samples: usize, seed: u64, f: F) -> SampleStats
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<SampleStats> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            let (mut mean, mut m2) = (0.0, 0.0);
            for k in 0..len {
                let x = f(&mut rng);
                let delta = x - mean;
                mean += delta / (k + 1) as f64;
                m2 += delta * (x - mean);
            }
            SampleStats { count: len, mean, variance: if len > 1 { m2 / (len - 1) as f64 } else { 0.0 } }
        })
        .collect();
    parts.into_iter().fold(SampleStats { count: 0, mean: 0.0, variance: 0.0 }, SampleStats::merge)
}
