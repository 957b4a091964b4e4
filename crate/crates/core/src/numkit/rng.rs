//! Seeded random streams.
//!
//! The generator is xoshiro256** with its 256-bit state filled from a
//! SplitMix64 sequence. The SplitMix64 start value is
//! `seed ^ splitmix64_mix(stream_id + 0x9E3779B97F4A7C15)`, so every
//! `(seed, stream_id)` pair names one reproducible sequence of `u64` draws.
//! Floats are taken from the top 53 bits of a draw.

use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Named sub-streams used across the simulator.
pub mod streams {
    pub const SYNTHETIC_CORPUS: u64 = 1;
    pub const VALIDATION_SPLIT: u64 = 2;
    pub const CORRUPTION: u64 = 3;
    pub const PARTITION: u64 = 4;
    pub const POLICY_INIT: u64 = 5;
    pub const SELECTION: u64 = 6;
}

fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn splitmix64_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    splitmix64_mix(*state)
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    state: [u64; 4],
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut sm = seed ^ splitmix64_mix(stream_id.wrapping_add(GOLDEN_GAMMA));
        let mut state = [0u64; 4];
        for word in state.iter_mut() {
            *word = splitmix64_next(&mut sm);
        }
        if state.iter().all(|&w| w == 0) {
            state[0] = GOLDEN_GAMMA;
        }
        RngStream {
            seed,
            stream_id,
            state,
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// An independent stream sharing this stream's seed.
    pub fn substream(&self, stream_id: u64) -> Self {
        RngStream::new(self.seed, stream_id)
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform on `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`.
    pub fn next_f64_nonzero(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)` by Lemire's multiply-and-reject.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Standard normal via Box-Muller; the second variate of each pair is
    /// kept for the next call.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.next_f64_nonzero();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare_normal = Some(r * angle.sin());
        r * angle.cos()
    }

    /// Gamma(shape, 1) by Marsaglia-Tsang; shapes below one use the
    /// `Gamma(a + 1) * U^(1/a)` boost.
    pub fn gamma(&mut self, shape: f64) -> Result<f64> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::invalid(format!("gamma shape must be > 0, got {shape}")));
        }
        if shape < 1.0 {
            let g = self.gamma_ge1(shape + 1.0);
            let u = self.next_f64_nonzero();
            return Ok(g * u.powf(1.0 / shape));
        }
        Ok(self.gamma_ge1(shape))
    }

    fn gamma_ge1(&mut self, shape: f64) -> f64 {
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.normal();
            let v = 1.0 + c * x;
            if v <= 0.0 {
                continue;
            }
            let v = v * v * v;
            let u = self.next_f64_nonzero();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 {
                return d * v;
            }
            if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
                return d * v;
            }
        }
    }

    /// Uniform random permutation of `items` (Fisher-Yates, back to front).
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// `k` distinct indices from `0..n`, uniformly, in draw order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Result<Vec<usize>> {
        if k > n {
            return Err(Error::invalid(format!("cannot sample {k} of {n} indices")));
        }
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        Ok(pool)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_stream_repeat() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RngStream::new(42, 1);
        let mut b = RngStream::new(42, 2);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        assert_ne!(xs, ys);
    }

    // Reference values from an independent script of the same algorithm, so
    // a port of the generator can be checked draw for draw.
    #[test]
    fn first_draws_are_pinned() {
        let mut rng = RngStream::new(0, 0);
        let first: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        assert_eq!(
            first,
            [18110106563157542208, 8650457082529208451, 3032169436225125478]
        );
        let mut rng = RngStream::new(42, 7);
        let first: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        assert_eq!(
            first,
            [2648032583866158101, 15589289955728303254, 4462713342656079091]
        );
    }

    #[test]
    fn unit_draws_in_range() {
        let mut rng = RngStream::new(3, 3);
        for _ in 0..10_000 {
            let u = rng.next_f64();
            assert!((0.0..1.0).contains(&u));
            let v = rng.next_f64_nonzero();
            assert!(v > 0.0 && v <= 1.0);
        }
    }

    #[test]
    fn below_is_in_range_and_covers() {
        let mut rng = RngStream::new(9, 0);
        let mut seen = [false; 7];
        for _ in 0..1000 {
            let k = rng.below(7) as usize;
            seen[k] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn normal_moments() {
        let mut rng = RngStream::new(11, 0);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn gamma_mean_matches_shape() {
        for &shape in &[0.3, 1.0, 2.5, 40.0] {
            let mut rng = RngStream::new(5, 0);
            let n = 100_000;
            let mean = (0..n).map(|_| rng.gamma(shape).unwrap()).sum::<f64>() / n as f64;
            assert!((mean - shape).abs() < 0.03 * shape.max(1.0), "shape {shape}: mean {mean}");
        }
    }

    #[test]
    fn gamma_rejects_bad_shape() {
        let mut rng = RngStream::new(0, 0);
        assert!(rng.gamma(0.0).is_err());
        assert!(rng.gamma(-1.0).is_err());
        assert!(rng.gamma(f64::NAN).is_err());
    }

    #[test]
    fn sample_indices_distinct() {
        let mut rng = RngStream::new(1, 1);
        let mut idx = rng.sample_indices(100, 40).unwrap();
        idx.sort_unstable();
        idx.dedup();
        assert_eq!(idx.len(), 40);
        assert!(rng.sample_indices(3, 4).is_err());
    }
}
