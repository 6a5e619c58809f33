//! Stable 64-bit hashing for deterministic, platform-independent file selection.
//!
//! `std::hash` is keyed per-process, so anything that must reproduce across runs
//! (partitions, coverage selection) goes through this FNV-1a implementation instead.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over the UTF-8 bytes of `s`.
pub fn stable_hash64(s: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in s.as_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}
