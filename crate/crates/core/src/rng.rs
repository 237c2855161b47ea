//! Reproducible random streams.
//!
//! Every path owns a fixed set of ChaCha8 streams keyed by
//! `(master seed, path index, purpose)`. Streams never overlap, so paths can
//! run in any order or in parallel and still reproduce bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for inside one path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    /// Common price shock `dz`.
    Dz = 0,
    /// Intrinsic element ξ.
    Xi = 1,
    /// Coupling κ (modulus and, in complex mode, phase).
    Kappa = 2,
    /// Trade-side selection.
    Select = 3,
    /// Post-trade phase scrambling.
    Phase = 4,
    /// Stand-alone sampling outside path simulation.
    Sample = 5,
    /// Random phase of κ in complex-coupling mode.
    KappaPhase = 6,
}

const PURPOSES: u64 = 8;

/// Stream for `purpose` within path `path` of a run seeded by `seed`.
pub fn substream(seed: u64, path: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path.wrapping_mul(PURPOSES).wrapping_add(purpose as u64));
    rng
}
