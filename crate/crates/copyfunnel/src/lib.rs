//! copyfunnel: staged admission filtering for scraped training corpora.
//!
//! A raw corpus narrows through five fixed stages — access gate, perceptual
//! fingerprints, entity flags, classifier score, registry cross-reference —
//! and every per-document decision lands in a hash-chained provenance
//! ledger that third parties can verify offline. Re-scanning an admitted
//! corpus against a newer registry snapshot covers works registered after
//! ingestion.
//!
//! Each capability has a runnable demo under `examples/`; the `copyfunnel`
//! binary wires the same library calls into subcommands.
//!
//! ```
//! use copyfunnel::fingerprint::{dhash, hamming, pgm, suite};
//!
//! let img = suite::synthetic_image(1, 64, 64);
//! let base = dhash(&pgm::downsample_to_grid(&img).unwrap());
//! let brighter = pgm::adjust_brightness(&img, 10);
//! let shifted = dhash(&pgm::downsample_to_grid(&brighter).unwrap());
//! assert!(hamming(base.bits, shifted.bits) <= 10);
//! ```

pub mod canonical;
pub mod classifier;
pub mod cli;
pub mod entity;
pub mod fingerprint;
pub mod hashing;
pub mod pipeline;
pub mod policy;
pub mod provenance;
pub mod registry;
pub mod text;
pub mod verdict;

pub use pipeline::{run_funnel, FunnelConfig, FunnelInputs};
pub use verdict::{ReasonCode, Stage, StageVerdict, Verdict};
