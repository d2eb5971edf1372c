//! Reproducible random streams.
//!
//! Every random quantity is drawn from a ChaCha8 generator seeded with
//! `ChaCha8Rng::seed_from_u64(seed)` and positioned on an explicit stream id
//! (`set_stream`). Trial `t` of a batch with master seed `s` uses stream `t`
//! of seed `s`, so trials can run on any number of workers and still agree
//! with a sequential run.
//!
//! Derived draws:
//! - uniform `[0, 1)`: `(next_u64 >> 11) * 2^-53`;
//! - uniform `(0, 1]`: `((next_u64 >> 11) + 1) * 2^-53`;
//! - normal: Box-Muller on `u1 ∈ (0, 1]`, `u2 ∈ [0, 1)`, returning
//!   `sqrt(-2 ln u1) cos(2π u2)` first and caching `sqrt(-2 ln u1) sin(2π u2)`;
//! - sign: `+1` if the top bit of `next_u64` is clear, else `-1`;
//! - integer below `n`: rejection on `next_u64` above the largest multiple of `n`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Stream id reserved for draws shared by all trials of a batch.
pub const SHARED_STREAM: u64 = u64::MAX;

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Debug)]
pub struct Stream {
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl Stream {
    /// Stream 0 of `seed`.
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            rng,
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_NEG_53
    }

    fn uniform_open_low(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * TWO_POW_NEG_53
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform_open_low();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    pub fn sign(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let limit = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.next_u64();
            if x < limit {
                return x % n;
            }
        }
    }

    /// `k` distinct indices from `[0, n)`, sorted ascending.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut pool = self.shuffled_indices(n, k);
        pool.sort_unstable();
        pool
    }

    /// `k` distinct indices from `[0, n)` in draw order (partial Fisher-Yates).
    pub fn shuffled_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} distinct indices from {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }

    pub fn normal_vector(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.normal()).collect()
    }

    /// A vector of Euclidean norm `radius` in a uniformly random direction.
    pub fn sphere_vector(&mut self, len: usize, radius: f64) -> Vec<f64> {
        loop {
            let v = self.normal_vector(len);
            let norm = crate::linalg::norm2(&v);
            if norm > 0.0 {
                return v.into_iter().map(|x| x * radius / norm).collect();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let a: Vec<u64> = {
            let mut s = Stream::substream(42, 3);
            (0..4).map(|_| s.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut s = Stream::substream(42, 3);
            (0..4).map(|_| s.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut s = Stream::substream(42, 4);
            (0..4).map(|_| s.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn normal_moments() {
        let mut s = Stream::new(1);
        let n = 200_000;
        let xs = s.normal_vector(n);
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.02);
    }

    #[test]
    fn sample_indices_distinct_sorted() {
        let mut s = Stream::new(9);
        for _ in 0..100 {
            let idx = s.sample_indices(20, 7);
            assert_eq!(idx.len(), 7);
            assert!(idx.windows(2).all(|w| w[0] < w[1]));
            assert!(idx.iter().all(|&i| i < 20));
        }
        assert_eq!(s.sample_indices(5, 5), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn below_is_in_range() {
        let mut s = Stream::new(2);
        let mut seen = [false; 6];
        for _ in 0..600 {
            seen[s.below(6) as usize] = true;
        }
        assert!(seen.iter().all(|&x| x));
    }
}
