//! Deterministic, parallel Monte Carlo plumbing.
//!
//! Samples are drawn in fixed-size chunks. Each chunk owns a ChaCha stream keyed by
//! `(seed, key, chunk index)`, so the value of sample `s` depends only on those three
//! numbers. Chunks run on a rayon pool and are reduced in index order, which makes every
//! estimate bit-identical across thread counts.

use std::sync::OnceLock;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

/// Number of samples drawn from one ChaCha stream.
pub const CHUNK: usize = 4096;

/// Default seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x5eed_b0bb_1e5;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "BUBBLETK_THREADS";

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
        {
            builder = builder.num_threads(n);
        }
        builder.build().expect("thread pool")
    })
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stream key for a purpose tag and an unordered index set.
pub fn stream_key(tag: u64, indices: &[usize]) -> u64 {
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    sorted
        .iter()
        .fold(splitmix(tag), |acc, &i| splitmix(acc ^ (i as u64 + 1)))
}

/// Generator for one chunk of one stream.
pub fn chunk_rng(seed: u64, key: u64, chunk: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&key.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(bytes);
    rng.set_stream(chunk);
    rng
}

/// Run `f(rng, len)` for every chunk of `samples` and return the results in chunk order.
pub fn map_chunks<T, F>(samples: usize, seed: u64, key: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    pool().install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let len = CHUNK.min(samples - c * CHUNK);
                let mut rng = chunk_rng(seed, key, c as u64);
                f(&mut rng, len)
            })
            .collect()
    })
}

/// Apply `f` to every item in parallel on the shared pool, preserving order.
pub fn par_map<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync,
{
    pool().install(|| items.par_iter().map(&f).collect())
}

/// Standard Gaussian vector in R^dim.
pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Uniform point on the unit sphere of R^dim.
pub fn on_sphere<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let g = gaussian_vector(rng, dim);
        let norm = g.norm();
        if norm > 1e-300 {
            return g / norm;
        }
    }
}

/// Uniform point in the ball of radius `radius` in R^dim.
pub fn in_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> DVector<f64> {
    let dir = on_sphere(rng, dim);
    let u: f64 = rng.random();
    dir * (radius * u.powf(1.0 / dim as f64))
}

/// Surface area of the unit sphere S^m ⊂ R^{m+1}.
pub fn sphere_area(m: usize) -> f64 {
    let h = (m as f64 + 1.0) / 2.0;
    2.0 * (h * std::f64::consts::PI.ln() - ln_gamma(h)).exp()
}

/// Volume of the unit ball in R^m.
pub fn ball_volume(m: usize) -> f64 {
    if m == 0 {
        return 1.0;
    }
    sphere_area(m - 1) / m as f64
}

/// Running sums for a fixed number of Monte Carlo integrands.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator {
    pub count: usize,
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
}

impl Accumulator {
    pub fn new(width: usize) -> Self {
        Self {
            count: 0,
            sum: vec![0.0; width],
            sum_sq: vec![0.0; width],
        }
    }

    /// Record one sample; entries beyond `values.len()` count as zero.
    pub fn push(&mut self, values: &[f64]) {
        self.count += 1;
        for (k, v) in values.iter().enumerate() {
            self.sum[k] += v;
            self.sum_sq[k] += v * v;
        }
    }

    /// Record one sample that is zero in every entry.
    pub fn push_zero(&mut self) {
        self.count += 1;
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.count += other.count;
        for k in 0..self.sum.len() {
            self.sum[k] += other.sum[k];
            self.sum_sq[k] += other.sum_sq[k];
        }
    }

    /// Merge chunk accumulators in order.
    pub fn merge_all(width: usize, parts: &[Accumulator]) -> Accumulator {
        let mut acc = Accumulator::new(width);
        for p in parts {
            acc.merge(p);
        }
        acc
    }

    /// Sample mean and its standard error for entry `k`, both multiplied by `scale`.
    pub fn estimate(&self, k: usize, scale: f64) -> (f64, f64) {
        if self.count == 0 {
            return (0.0, 0.0);
        }
        let n = self.count as f64;
        let mean = self.sum[k] / n;
        let var = if self.count > 1 {
            ((self.sum_sq[k] / n - mean * mean) * n / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        (mean * scale, (var / n).sqrt() * scale.abs())
    }
}
