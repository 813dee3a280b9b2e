//! Seeded random streams.
//!
//! Every random draw in the crate goes through [`SeededRng`], a ChaCha8
//! stream keyed by a 64-bit seed. ChaCha is counter-based and its output is
//! fixed by the `rand_chacha` crate across platforms, so a seed reproduces the
//! same scenario everywhere. Normals use the Box–Muller transform, consuming
//! exactly two uniforms per draw.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for a named purpose, so adding draws to one
    /// purpose never shifts another.
    pub fn derived(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn standard_normal(&mut self) -> f64 {
        // 1 - u lies in (0, 1], keeping the log finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// `exp(N(mean, variance))`.
    pub fn log_normal(&mut self, mean: f64, variance: f64) -> f64 {
        (mean + variance.sqrt() * self.standard_normal()).exp()
    }

    pub fn index(&mut self, bound: usize) -> usize {
        self.inner.gen_range(0..bound)
    }

    /// `m` distinct indices from `0..n`, in draw order (partial Fisher–Yates).
    pub fn sample_without_replacement(&mut self, n: usize, m: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..m.min(n) {
            let j = i + self.index(n - i);
            pool.swap(i, j);
        }
        pool.truncate(m.min(n));
        pool
    }
}

pub mod streams {
    pub const CANDIDATES: u64 = 1;
    pub const SHADOWING: u64 = 2;
    pub const ANCHOR_PERTURBATION: u64 = 3;
    pub const RANDOM_INIT: u64 = 4;
    pub const EAV_UNCERTAINTY: u64 = 5;
    pub const JAM_UNCERTAINTY: u64 = 6;
    pub const RESTARTS: u64 = 7;
}
