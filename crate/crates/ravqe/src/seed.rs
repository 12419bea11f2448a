//! Deterministic seed derivation.
//!
//! Every piece of randomness in the crate flows from a single master seed
//! through `derive_seed(master, index, label)`: the label is FNV-1a hashed,
//! mixed with the master, and the result run through SplitMix64 twice with
//! the index added in between. Distinct (index, label) pairs give
//! independent streams, and results do not depend on execution order or
//! worker count.

/// Derive a child seed from a master seed, a stream index, and a label.
pub fn derive_seed(master: u64, index: u64, label: &str) -> u64 {
    let salted = splitmix64(master ^ fnv1a(label));
    splitmix64(salted.wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in s.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
