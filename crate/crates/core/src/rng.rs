//! Path-addressed random streams.
//!
//! Every stochastic component draws from an [`RngStream`] identified by a
//! master seed and an integer path such as `[trial, role]`. The path is hashed
//! into a ChaCha8 key, so a stream's output depends only on `(seed, path)` and
//! never on how many other streams exist or which thread owns them. This is
//! what keeps trial-parallel experiments bit-reproducible across thread counts.

use rand::distr::Open01;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive_key(master_seed: u64, path: &[u64]) -> [u8; 32] {
    let mut state = splitmix64(master_seed);
    for (depth, &index) in path.iter().enumerate() {
        let salt = splitmix64(index ^ (depth as u64 + 1).wrapping_mul(GOLDEN_GAMMA));
        state = splitmix64(state ^ salt);
    }
    // Length is folded in so that [] and [0] differ.
    state = splitmix64(state ^ (path.len() as u64).rotate_left(32));

    let mut key = [0u8; 32];
    let mut word = state;
    for chunk in key.chunks_exact_mut(8) {
        word = splitmix64(word);
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    key
}

/// A deterministic random stream addressed by `(master_seed, path)`.
///
/// The stream counts the variates it hands out through [`uniform`],
/// [`standard_normal`] and [`laplace`], which lets tests audit how many noise
/// draws an algorithm consumed.
///
/// [`uniform`]: RngStream::uniform
/// [`standard_normal`]: RngStream::standard_normal
/// [`laplace`]: RngStream::laplace
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    path: Vec<u64>,
    inner: ChaCha8Rng,
    draws: u64,
}

impl RngStream {
    /// Root stream of a master seed (empty path).
    pub fn new(master_seed: u64) -> Self {
        Self::from_path(master_seed, &[])
    }

    pub fn from_path(master_seed: u64, path: &[u64]) -> Self {
        Self {
            master_seed,
            path: path.to_vec(),
            inner: ChaCha8Rng::from_seed(derive_key(master_seed, path)),
            draws: 0,
        }
    }

    /// Fresh stream whose path extends this one by `index`.
    ///
    /// The child does not depend on how far the parent has been advanced.
    pub fn child(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self::from_path(self.master_seed, &path)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Number of variates drawn so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Uniform draw on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.draws += 1;
        self.inner.sample(Open01)
    }

    /// Standard normal draw (ziggurat).
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.draws += 1;
        self.inner.sample(StandardNormal)
    }

    /// Centered Laplace draw with the given scale, by inverting the CDF.
    #[inline]
    pub fn laplace(&mut self, scale: f64) -> f64 {
        self.draws += 1;
        let u: f64 = self.inner.sample::<f64, _>(Open01) - 0.5;
        -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// The three independent streams a single simulated trial consumes.
///
/// Data, threshold noise and query noise live on separate paths keyed only by
/// the trial index, so two experiments that differ in thresholds or noise
/// scale see the same observations and the same standardized noise for trial
/// `i` (common random numbers).
#[derive(Clone, Debug)]
pub struct TrialStreams {
    pub data: RngStream,
    pub threshold_noise: RngStream,
    pub query_noise: RngStream,
}

impl TrialStreams {
    pub const DATA: u64 = 0;
    pub const THRESHOLD_NOISE: u64 = 1;
    pub const QUERY_NOISE: u64 = 2;

    pub fn new(master_seed: u64, trial: u64) -> Self {
        Self {
            data: RngStream::from_path(master_seed, &[trial, Self::DATA]),
            threshold_noise: RngStream::from_path(master_seed, &[trial, Self::THRESHOLD_NOISE]),
            query_noise: RngStream::from_path(master_seed, &[trial, Self::QUERY_NOISE]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_seed_and_path_reproduce() {
        let mut a = RngStream::from_path(7, &[3, 1]);
        let mut b = RngStream::from_path(7, &[3, 1]);
        for _ in 0..1000 {
            assert_eq!(a.standard_normal().to_bits(), b.standard_normal().to_bits());
            assert_eq!(a.laplace(2.0).to_bits(), b.laplace(2.0).to_bits());
        }
    }

    #[test]
    fn child_ignores_parent_position() {
        let parent = RngStream::new(11);
        let mut advanced = parent.clone();
        for _ in 0..17 {
            advanced.uniform();
        }
        let mut c1 = parent.child(4);
        let mut c2 = advanced.child(4);
        assert_eq!(c1.next_u64(), c2.next_u64());
        assert_eq!(parent.child(4).path(), &[4]);
    }

    #[test]
    fn distinct_paths_differ() {
        let mut a = RngStream::from_path(1, &[]);
        let mut b = RngStream::from_path(1, &[0]);
        let mut c = RngStream::from_path(1, &[0, 0]);
        let (x, y, z) = (a.next_u64(), b.next_u64(), c.next_u64());
        assert!(x != y && y != z && x != z);
    }

    #[test]
    fn distinct_paths_are_uncorrelated() {
        let mut a = RngStream::from_path(2024, &[5, 0]);
        let mut b = RngStream::from_path(2024, &[5, 1]);
        let n = 100_000;
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = a.standard_normal();
            let y = b.standard_normal();
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
        let nf = n as f64;
        let cov = sxy / nf - (sx / nf) * (sy / nf);
        let corr = cov / ((sxx / nf - (sx / nf).powi(2)) * (syy / nf - (sy / nf).powi(2))).sqrt();
        assert!(corr.abs() < 0.01, "correlation {corr}");
    }

    #[test]
    fn draw_counter_tracks_variates() {
        let mut s = RngStream::new(0);
        s.uniform();
        s.standard_normal();
        s.laplace(1.0);
        assert_eq!(s.draws(), 3);
        s.next_u64();
        assert_eq!(s.draws(), 3);
    }

    #[test]
    fn uniform_is_open_interval() {
        let mut s = RngStream::new(9);
        for _ in 0..100_000 {
            let u = s.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }
}
