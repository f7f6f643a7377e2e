//! Counter-based random streams.
//!
//! Every Monte Carlo walk owns an independent ChaCha stream keyed by the run
//! seed and the walk index, so results do not depend on how walks are
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Stream selector used to separate unrelated consumers of the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Channel {
    Torsion = 1,
    Capacity = 2,
    Surface = 3,
    Search = 4,
    Sampling = 5,
}

/// The random stream for walk `index` on `channel` under `seed`.
pub fn stream(seed: u64, channel: Channel, index: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(channel as u64).to_le_bytes());
    let mut rng = ChaCha12Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Fills `out` with a uniformly distributed unit vector.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        let mut norm2 = 0.0;
        for v in out.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *v = g;
            norm2 += g * g;
        }
        if norm2 > 1e-300 {
            let inv = 1.0 / norm2.sqrt();
            out.iter_mut().for_each(|v| *v *= inv);
            return;
        }
    }
}
