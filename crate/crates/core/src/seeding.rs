//! Deterministic seed derivation.
//!
//! Every random decision in the library (parameter init, epoch shuffles,
//! per-sample dropout, corpus synthesis, auxiliary sampling) draws from a
//! ChaCha stream whose seed is derived from the run seed plus a purpose tag.
//! That makes each consumer independent of the others: adding a draw in one
//! place cannot shift the stream seen by another.

/// splitmix64 step; a good 64-bit mixer with full avalanche.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a sub-seed from a base seed and a list of string tags.
pub fn derive_seed(base: u64, tags: &[&str]) -> u64 {
    let mut state = splitmix64(base);
    for tag in tags {
        for b in tag.bytes() {
            state = splitmix64(state ^ u64::from(b));
        }
        state = splitmix64(state ^ 0xA5A5_A5A5_A5A5_A5A5);
    }
    state
}

/// Derives a sub-seed keyed by numeric coordinates (epoch, step, sample...).
pub fn derive_seed_indexed(base: u64, tag: &str, indices: &[u64]) -> u64 {
    let mut state = derive_seed(base, &[tag]);
    for &i in indices {
        state = splitmix64(state ^ i);
    }
    state
}
