//! Seedable, stream-indexed random number generation.
//!
//! Every Monte Carlo routine in this crate takes an explicit [`RngStream`].
//! A stream is identified by `(seed, stream_id)` and reproduces exactly the
//! same draw sequence bit for bit on every platform; walker `w` of an
//! experiment conventionally uses `stream_id = w` so that walk-level
//! parallelism cannot perturb results.

use rand::{Error as RandError, RngCore};
use rand_pcg::Pcg64;

/// A reproducible random stream backed by PCG-64.
///
/// Distinct `stream_id`s select distinct PCG increments, giving independent
/// sequences from a common seed without any jump-ahead bookkeeping.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: Pcg64,
}

/// SplitMix64 step, used to spread a 64-bit seed over the 128-bit PCG state.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut s = seed;
        let hi = splitmix64(&mut s) as u128;
        let lo = splitmix64(&mut s) as u128;
        let state = (hi << 64) | lo;
        let mut t = stream_id;
        let inc = splitmix64(&mut t) as u128;
        RngStream { seed, stream_id, rng: Pcg64::new(state, inc) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream with the same seed but a different stream id.
    pub fn substream(&self, stream_id: u64) -> RngStream {
        RngStream::new(self.seed, stream_id)
    }

    /// Standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        use rand::distributions::Distribution;
        rand_distr::StandardNormal.sample(self)
    }

    /// Uniform draw on the half-open angle interval (-pi, pi].
    pub fn uniform_angle(&mut self) -> f64 {
        use rand::Rng;
        // gen::<f64>() is in [0, 1); map so that the left endpoint is open.
        std::f64::consts::PI * (1.0 - 2.0 * self.gen::<f64>())
    }

    /// Uniform draw in [0, 1).
    pub fn uniform01(&mut self) -> f64 {
        use rand::Rng;
        self.gen::<f64>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), RandError> {
        self.rng.try_fill_bytes(dest)
    }
}
