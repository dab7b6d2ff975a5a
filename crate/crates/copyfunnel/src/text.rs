//! Canonical text view.
//!
//! One normalization is shared by text fingerprints, entity flagging, the
//! classifier, and exact digests, so every stage sees the same tokens:
//! NFC-normalize, lowercase, drop punctuation and symbols, split on
//! whitespace.

use unicode_normalization::UnicodeNormalization;

/// Normalize raw text into the canonical token sequence.
///
/// Characters that are neither alphanumeric nor whitespace are removed
/// without splitting the token ("don't" becomes "dont"). Empty tokens are
/// dropped.
pub fn normalize_text(raw: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in raw.nfc() {
        if ch.is_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else if ch.is_alphanumeric() {
            for lower in ch.to_lowercase() {
                current.push(lower);
            }
        }
        // punctuation and symbols are stripped
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Canonical content bytes of a text document: normalized tokens joined
/// with a single space, UTF-8 encoded. This is the digest input for text.
pub fn canonical_text(tokens: &[String]) -> String {
    tokens.join(" ")
}
