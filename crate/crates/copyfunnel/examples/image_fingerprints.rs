//! Difference-hash an image, perturb it, and watch the distance stay small.
//!
//! ```bash
//! cargo run --example image_fingerprints
//! ```

use copyfunnel::fingerprint::{dhash, hamming, pgm, suite};

fn main() {
    let original = suite::synthetic_image(7, 64, 64);
    let grid = pgm::downsample_to_grid(&original).unwrap();
    let base = dhash(&grid);
    println!("original 64x64 image, dhash = {}", base.hex());

    for (name, perturbed) in suite::perturbations(&original) {
        let h = dhash(&pgm::downsample_to_grid(&perturbed).unwrap());
        println!(
            "  {name:<14} dhash = {}  hamming = {}",
            h.hex(),
            hamming(base.bits, h.bits)
        );
    }

    // A different image lands far away.
    let other = suite::synthetic_image(8, 64, 64);
    let other_hash = dhash(&pgm::downsample_to_grid(&other).unwrap());
    println!(
        "unrelated image   dhash = {}  hamming = {}",
        other_hash.hex(),
        hamming(base.bits, other_hash.bits)
    );

    // Round-trip through the PGM container.
    let bytes = pgm::write_pgm(&original);
    let reparsed = pgm::parse_pgm(&bytes).unwrap();
    assert_eq!(reparsed, original);
    println!("\nPGM round trip: {} bytes, identical pixels", bytes.len());
}
