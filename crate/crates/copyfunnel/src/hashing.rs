//! Deterministic 64-bit hashing shared by text fingerprints, the n-gram
//! classifier, and MinHash mixing.
//!
//! Every constant is spelled out so the same values can be reproduced in any
//! language: FNV-1a over UTF-8 bytes, followed by a xor-shift-multiply
//! finalizer, with per-index seeds for the MinHash mixer family.

/// FNV-1a 64-bit offset basis.
pub const FNV64_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
/// FNV-1a 64-bit prime.
pub const FNV64_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Finalizer multipliers (xor-shift-multiply, shift of 33).
pub const FMIX64_C1: u64 = 0xff51_afd7_ed55_8ccd;
pub const FMIX64_C2: u64 = 0xc4ce_b9fe_1a85_ec53;

/// Byte placed between tokens when a multi-token shingle is hashed.
/// Normalized tokens never contain control characters, so the join is
/// unambiguous.
pub const SHINGLE_SEPARATOR: u8 = 0x1f;

/// FNV-1a over a byte string.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV64_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV64_PRIME);
    }
    h
}

/// 64-bit finalizer: xor-shift-multiply with the constants above.
pub fn fmix64(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(FMIX64_C1);
    x ^= x >> 33;
    x = x.wrapping_mul(FMIX64_C2);
    x ^= x >> 33;
    x
}

/// Hash of one shingle: FNV-1a over the tokens joined with
/// [`SHINGLE_SEPARATOR`], then finalized with [`fmix64`].
pub fn shingle_hash<S: AsRef<str>>(tokens: &[S]) -> u64 {
    let mut h = FNV64_OFFSET;
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 {
            h ^= u64::from(SHINGLE_SEPARATOR);
            h = h.wrapping_mul(FNV64_PRIME);
        }
        for &b in tok.as_ref().as_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(FNV64_PRIME);
        }
    }
    fmix64(h)
}

/// Seed of the i-th MinHash mixer.
pub fn mixer_seed(i: usize) -> u64 {
    fmix64(i as u64 + 1)
}

/// Apply mixer `i` to a shingle hash.
pub fn mix(shingle: u64, mixer_index: usize) -> u64 {
    fmix64(shingle ^ mixer_seed(mixer_index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv1a_matches_reference_vectors() {
        // Published FNV-1a test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn fmix64_is_a_bijection_on_samples() {
        // Distinct inputs keep distinct outputs; zero maps to zero.
        assert_eq!(fmix64(0), 0);
        let outs: std::collections::HashSet<u64> = (0u64..1000).map(fmix64).collect();
        assert_eq!(outs.len(), 1000);
    }

    #[test]
    fn shingle_hash_depends_on_token_boundaries() {
        // "ab"+"c" and "a"+"bc" must differ: the separator enforces boundaries.
        assert_ne!(shingle_hash(&["ab", "c"]), shingle_hash(&["a", "bc"]));
        assert_eq!(shingle_hash(&["ab", "c"]), shingle_hash(&["ab", "c"]));
    }

    #[test]
    fn mixers_are_distinct() {
        let h = shingle_hash(&["token"]);
        let m0 = mix(h, 0);
        let m1 = mix(h, 1);
        assert_ne!(m0, m1);
        assert_ne!(mixer_seed(0), mixer_seed(1));
    }
}
