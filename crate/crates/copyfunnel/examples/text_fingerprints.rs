//! SimHash and MinHash on near-duplicate text.
//!
//! ```bash
//! cargo run --example text_fingerprints
//! ```

use copyfunnel::fingerprint::{estimate_jaccard, hamming, minhash_from_tokens, simhash};
use copyfunnel::text::normalize_text;

const ORIGINAL: &str = "\
The committee met on Tuesday to review the annual budget. After a long \
discussion of infrastructure costs, the members voted to defer the road \
resurfacing project until spring and to fund the library extension in full.";

const LIGHT_EDIT: &str = "\
The committee met on Wednesday to review the annual budget. After a long \
discussion of infrastructure costs, the members voted to defer the road \
resurfacing project until spring and to fund the library extension in full.";

const UNRELATED: &str = "\
Migrating geese follow magnetic cues and landscape features. Juveniles \
learn routes from older birds, and small navigation errors early in life \
can shift an entire population's wintering grounds over decades.";

fn main() {
    let width = 5;
    let k = 128;
    for (name, text) in [("light edit", LIGHT_EDIT), ("unrelated", UNRELATED)] {
        let a = normalize_text(ORIGINAL);
        let b = normalize_text(text);
        let sim_a = simhash(&a, width).unwrap();
        let sim_b = simhash(&b, width).unwrap();
        let mh_a = minhash_from_tokens(&a, width, k).unwrap();
        let mh_b = minhash_from_tokens(&b, width, k).unwrap();
        println!("original vs {name}:");
        println!(
            "  simhash {} vs {} -> hamming {}",
            sim_a.hex(),
            sim_b.hex(),
            hamming(sim_a.bits, sim_b.bits)
        );
        println!(
            "  minhash estimated Jaccard = {:.3}",
            estimate_jaccard(&mh_a, &mh_b)
        );
    }

    // Identical content, different formatting: one canonical view.
    let shouted = ORIGINAL.to_uppercase();
    let a = simhash(&normalize_text(ORIGINAL), width).unwrap();
    let b = simhash(&normalize_text(&shouted), width).unwrap();
    println!(
        "\nuppercased copy -> hamming {} (normalization unifies case)",
        hamming(a.bits, b.bits)
    );
}
