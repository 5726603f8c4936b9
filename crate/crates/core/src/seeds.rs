//! Seed derivation for the crate's RNG streams.
//!
//! Every randomized operation seeds its own ChaCha RNG from a user seed mixed
//! with a fixed domain tag, so that e.g. role sampling and request sampling
//! never share a stream even when the caller passes the same seed to both.
//! The mix is SplitMix64, which is stable across platforms.

pub const DOMAIN_ROLES: u64 = 1;
pub const DOMAIN_SIZES: u64 = 2;
pub const DOMAIN_REQUESTS: u64 = 3;
pub const DOMAIN_AGING: u64 = 4;
pub const DOMAIN_PLACEMENT: u64 = 5;
pub const DOMAIN_TOPOLOGY: u64 = 6;

pub fn derive_seed(base: u64, domain: u64) -> u64 {
    let mut z = base ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
