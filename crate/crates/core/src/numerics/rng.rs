use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::math;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded xoshiro256** generator.
///
/// The 256-bit state is filled with four successive SplitMix64 outputs
/// starting from the seed. Reference outputs for seed 0:
///
/// ```text
/// next_u64: 0x99ec5f36cb75f2b4 0xbf6e1f784956452a 0x1a5f849d4933e6e0
///           0x6aa594f1262d2d2c 0xbba5ad4a1f842e59
/// ```
///
/// Uniforms are `(next_u64 >> 11) * 2^-53`, so they lie in `[0, 1)` with 53
/// bits of resolution. Normals use the Box–Muller transform on two uniforms
/// `u1 = 1 - uniform()` (so `u1 ∈ (0, 1]`) and `u2 = uniform()`, producing
/// `sqrt(-2 ln u1) cos(2π u2)` first and caching `sqrt(-2 ln u1) sin(2π u2)`
/// for the next call. All transcendental functions go through `libm`, so the
/// stream is bit-identical on every platform.
#[derive(Debug, Clone, PartialEq)]
pub struct Rng {
    seed: u64,
    state: [u64; 4],
    spare_normal: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let state = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Self {
            seed,
            state,
            spare_normal: None,
        }
    }

    /// Independent generator keyed by `(seed, stream)`.
    ///
    /// Depends only on the seed this generator was created with, never on how
    /// far it has advanced, so substreams are schedule-independent.
    pub fn substream(&self, stream: u64) -> Rng {
        let mut sm = stream ^ GOLDEN.rotate_left(17);
        let mixed = splitmix64(&mut sm);
        Rng::new(self.seed ^ mixed)
    }

    /// Substream keyed by a label (FNV-1a hash of its bytes).
    pub fn substream_named(&self, label: &str) -> Rng {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self.substream(h)
    }

    pub fn seed(&self) -> u64 {
        self.seed
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

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Integer in `0..n` by the multiply-high reduction; `n` must be nonzero.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = math::sqrt(-2.0 * math::ln(u1));
        let theta = TAU * u2;
        self.spare_normal = Some(r * math::sin(theta));
        r * math::cos(theta)
    }

    pub fn uniform_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform()).collect()
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    /// Fisher–Yates shuffle, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_zero_reference_vector() {
        let mut rng = Rng::new(0);
        let got: Vec<u64> = (0..5).map(|_| rng.next_u64()).collect();
        assert_eq!(
            got,
            [
                0x99ec5f36cb75f2b4,
                0xbf6e1f784956452a,
                0x1a5f849d4933e6e0,
                0x6aa594f1262d2d2c,
                0xbba5ad4a1f842e59
            ]
        );
        let mut rng = Rng::new(0);
        assert_eq!(rng.uniform(), 0.6012629994179048);
        assert_eq!(rng.uniform(), 0.7477740925472398);
        assert_eq!(rng.uniform(), 0.10301998939503632);
    }

    #[test]
    fn empty_requests() {
        let mut rng = Rng::new(3);
        assert!(rng.uniform_vec(0).is_empty());
        assert!(rng.normal_vec(0).is_empty());
        let mut none: [u8; 0] = [];
        rng.shuffle(&mut none);
    }

    #[test]
    fn shuffle_is_deterministic_per_seed() {
        let mut a: Vec<u32> = (1..=10).collect();
        let mut b = a.clone();
        Rng::new(11).shuffle(&mut a);
        Rng::new(11).shuffle(&mut b);
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (1..=10).collect::<Vec<_>>());
    }

    #[test]
    fn normal_moments() {
        let mut rng = Rng::new(2024);
        let xs = rng.normal_vec(100_000);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn uniform_stays_in_unit_interval() {
        let mut rng = Rng::new(5);
        assert!(rng.uniform_vec(10_000).iter().all(|u| (0.0..1.0).contains(u)));
    }

    #[test]
    fn substreams_ignore_parent_progress() {
        let parent = Rng::new(9);
        let mut advanced = parent.clone();
        advanced.next_u64();
        assert_eq!(parent.substream(4).next_u64(), advanced.substream(4).next_u64());
        assert_ne!(parent.substream(4).next_u64(), parent.substream(5).next_u64());
        assert_ne!(
            parent.substream_named("split").next_u64(),
            parent.substream_named("init").next_u64()
        );
    }
}
