//! Canonical JSON bytes for digesting.
//!
//! UTF-8, lexicographically sorted keys, no insignificant whitespace,
//! lowercase hex in all digest strings. Serialization goes through
//! `serde_json::Value`, whose map is ordered, so any two structurally equal
//! values produce identical bytes.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Canonical bytes of any serializable value.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Vec<u8> {
    let v = serde_json::to_value(value).expect("value serializes to JSON");
    serde_json::to_vec(&v).expect("JSON value serializes to bytes")
}

/// SHA-256 of the canonical bytes.
pub fn canonical_digest<T: Serialize>(value: &T) -> [u8; 32] {
    sha256(&to_canonical_json(value))
}

pub fn sha256(bytes: &[u8]) -> [u8; 32] {
    let mut out = [0u8; 32];
    out.copy_from_slice(&Sha256::digest(bytes));
    out
}

pub fn hex32(digest: &[u8; 32]) -> String {
    hex::encode(digest)
}

/// Parse a 64-character lowercase hex digest.
pub fn parse_hex32(s: &str) -> Result<[u8; 32], String> {
    if s.len() != 64 {
        return Err(format!("digest must be 64 hex chars, got {}", s.len()));
    }
    if s.bytes().any(|b| b.is_ascii_uppercase()) {
        return Err("digest hex must be lowercase".into());
    }
    let bytes = hex::decode(s).map_err(|e| e.to_string())?;
    let mut out = [0u8; 32];
    out.copy_from_slice(&bytes);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Serialize;

    #[derive(Serialize)]
    struct Unordered {
        zebra: u32,
        apple: u32,
        mango: Vec<Inner>,
    }

    #[derive(Serialize)]
    struct Inner {
        y: bool,
        x: bool,
    }

    #[test]
    fn keys_come_out_sorted_and_compact() {
        let v = Unordered {
            zebra: 1,
            apple: 2,
            mango: vec![Inner { y: true, x: false }],
        };
        let bytes = to_canonical_json(&v);
        assert_eq!(
            std::str::from_utf8(&bytes).unwrap(),
            r#"{"apple":2,"mango":[{"x":false,"y":true}],"zebra":1}"#
        );
    }

    #[test]
    fn canonical_bytes_are_stable() {
        let v = Unordered {
            zebra: 9,
            apple: 9,
            mango: vec![],
        };
        assert_eq!(canonical_digest(&v), canonical_digest(&v));
    }

    #[test]
    fn float_representation_round_trips() {
        #[derive(Serialize)]
        struct F {
            x: f64,
        }
        let value = F {
            x: 0.1234567890123456789,
        };
        let bytes = to_canonical_json(&value);
        let parsed: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(to_canonical_json(&parsed), bytes);
    }

    #[test]
    fn hex_parsing_is_strict() {
        let d = [0xabu8; 32];
        let h = hex32(&d);
        assert_eq!(parse_hex32(&h).unwrap(), d);
        assert!(parse_hex32(&h.to_uppercase()).is_err());
        assert!(parse_hex32("ab").is_err());
        assert!(parse_hex32(&"zz".repeat(32)).is_err());
    }
}
