//! Cross-reference documents against a registry snapshot.
//!
//! ```bash
//! cargo run --example registry_xref
//! ```

use copyfunnel::canonical::sha256;
use copyfunnel::fingerprint::index::dump_index;
use copyfunnel::fingerprint::{minhash_from_tokens, simhash, FingerprintIndex};
use copyfunnel::registry::{
    diff_snapshots, snapshot_from_works, xref_document, DocFingerprints, RegisteredWork,
    XrefParams,
};
use copyfunnel::text::{canonical_text, normalize_text};

fn text_work(work_id: &str, title: &str, body: &str) -> RegisteredWork {
    let tokens = normalize_text(body);
    RegisteredWork {
        work_id: work_id.into(),
        title: title.into(),
        authors: vec!["Example Author".into()],
        exact_digest: sha256(canonical_text(&tokens).as_bytes()),
        image_hashes: vec![],
        text_simhash: simhash(&tokens, 5).ok(),
        minhash: minhash_from_tokens(&tokens, 5, 128).ok(),
        registered_at: "2026-01-10T00:00:00Z".into(),
    }
}

const NOVEL: &str = "\
It was a cold morning on the headland and the lighthouse keeper counted \
the boats as they left the harbour one by one into the grey water, noting \
each name in the ledger his father had kept before him.";

fn main() {
    let works = vec![
        text_work("w-novel", "The Headland", NOVEL),
        text_work("w-other", "Another Work", "entirely different registered content here"),
    ];
    let v1 = snapshot_from_works(1, "2026-01-15T00:00:00Z", works.clone()).unwrap();
    println!("snapshot v{} with {} works", v1.version, v1.work_count());

    let params = XrefParams {
        image_radius: 10,
        simhash_radius: 3,
        minhash_jaccard_threshold: 0.6,
    };

    // An exact copy, a light edit, and an unrelated document.
    let cases = [
        ("exact copy", NOVEL.to_string()),
        ("light edit", NOVEL.replace("cold morning", "chilly morning")),
        (
            "unrelated",
            "a manual for assembling flat pack furniture with an allen key".into(),
        ),
    ];
    for (name, body) in &cases {
        let tokens = normalize_text(body);
        let doc = DocFingerprints {
            exact_digest: Some(sha256(canonical_text(&tokens).as_bytes())),
            text_simhash: simhash(&tokens, 5).ok(),
            minhash: minhash_from_tokens(&tokens, 5, 128).ok(),
            ..Default::default()
        };
        let hits = xref_document(&doc, &v1, &params);
        println!("\n{name}: {} hit(s)", hits.len());
        for hit in hits {
            println!(
                "  {:?} {} strength {:.3}",
                hit.match_kind, hit.work_id, hit.strength
            );
        }
    }

    // Registries advance in versions; the diff names what arrived.
    let mut grown = works;
    grown.push(text_work("w-new", "Late Registration", "a text registered weeks later"));
    let v2 = snapshot_from_works(2, "2026-02-15T00:00:00Z", grown).unwrap();
    let (added, removed) = diff_snapshots(&v1, &v2).unwrap();
    println!("\nv1 -> v2 diff: added {added:?}, removed {removed:?}");

    // Fingerprint dumps are plain JSONL.
    let mut index = FingerprintIndex::new();
    for w in v2.works() {
        if let Some(sh) = &w.text_simhash {
            index.insert(sh.bits, &w.work_id);
        }
    }
    print!("\nsimhash dump:\n{}", dump_index(&index, "SIMHASH"));
}
