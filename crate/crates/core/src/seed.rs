//! Sub-seed derivation.
//!
//! `mix(seed, k) = splitmix64(seed + (k + 1) · 0x9E3779B97F4A7C15)` with
//! wrapping arithmetic. Every derived stream (DropEdge layers, Monte Carlo
//! trials, check-suite cases) is seeded this way, so results depend only on
//! the top-level seed and the index, never on thread scheduling or platform.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix(seed: u64, k: u64) -> u64 {
    splitmix64(seed.wrapping_add(k.wrapping_add(1).wrapping_mul(GOLDEN)))
}
