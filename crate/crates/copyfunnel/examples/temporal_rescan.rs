//! The exposure window: a work registered after ingestion is caught by
//! re-scanning the admitted manifest against the newer snapshot.
//!
//! ```bash
//! cargo run --example temporal_rescan
//! ```

use std::collections::HashMap;

use copyfunnel::classifier::{train, Label, TrainingExample};
use copyfunnel::entity::{compile_gazetteer, EntityClass, GazetteerEntry};
use copyfunnel::pipeline::{run_funnel, CorpusDoc, FunnelConfig, FunnelInputs, Media, SidecarStore};
use copyfunnel::policy::PriceSchedule;
use copyfunnel::registry::{
    rescan_admitted, snapshot_from_works, DocFingerprints, RegisteredWork, XrefParams,
};

const LATE_WORK: &str = "\
an unpublished manuscript circulated quietly for months before its author \
registered it and every mirror of its text was already in someone's corpus";

fn text_work(work_id: &str, body: &str) -> RegisteredWork {
    let tokens = copyfunnel::text::normalize_text(body);
    RegisteredWork {
        work_id: work_id.into(),
        title: work_id.into(),
        authors: vec![],
        exact_digest: copyfunnel::canonical::sha256(
            copyfunnel::text::canonical_text(&tokens).as_bytes(),
        ),
        image_hashes: vec![],
        text_simhash: copyfunnel::fingerprint::simhash(&tokens, 5).ok(),
        minhash: copyfunnel::fingerprint::minhash_from_tokens(&tokens, 5, 128).ok(),
        registered_at: "2026-04-01T00:00:00Z".into(),
    }
}

fn main() {
    // Snapshot v1 knows one work; the late manuscript is not in it yet.
    let v1 = snapshot_from_works(
        1,
        "2026-01-01T00:00:00Z",
        vec![text_work("w-known", "some long registered text body here")],
    )
    .unwrap();

    let toks = |s: &str| copyfunnel::text::normalize_text(s);
    let model = train(
        &[
            TrainingExample { tokens: toks("registered style words"), label: Label::ProtectedLike },
            TrainingExample { tokens: toks("public style words"), label: Label::PublicLike },
        ],
        3,
        0.5,
    )
    .unwrap();
    let matcher = compile_gazetteer(vec![GazetteerEntry::new(
        "placeholder entry",
        EntityClass::WorkTitle,
        None,
    )
    .unwrap()])
    .unwrap();
    let sidecar = SidecarStore::default();
    let prices = PriceSchedule::default();

    let corpus = vec![
        CorpusDoc {
            doc_id: "mirror-of-manuscript".into(),
            source_url: "https://mirror.example/leak".into(),
            fetched_at: "2026-02-01T00:00:00Z".into(),
            media: Media::Text { text: Some(LATE_WORK.into()), path: None },
        },
        CorpusDoc {
            doc_id: "ordinary-doc".into(),
            source_url: "https://open.example/notes".into(),
            fetched_at: "2026-02-01T00:00:00Z".into(),
            media: Media::Text {
                text: Some("ordinary public notes about hiking trails and weather".into()),
                path: None,
            },
        },
    ];

    let inputs = FunnelInputs {
        sidecar: &sidecar,
        prices: &prices,
        matcher: &matcher,
        model: &model,
        snapshot: &v1,
        media_root: std::path::PathBuf::from("."),
    };
    let config = FunnelConfig::default();
    let output = run_funnel(&corpus, &inputs, &config, None).unwrap();
    println!(
        "under v1 both documents are admitted: {:?}",
        output.manifest.iter().map(|e| e.doc_id.as_str()).collect::<Vec<_>>()
    );

    // Weeks later the manuscript is registered: snapshot v2.
    let mut works: Vec<RegisteredWork> = v1.works().to_vec();
    works.push(text_work("w-manuscript", LATE_WORK));
    let v2 = snapshot_from_works(2, "2026-04-02T00:00:00Z", works).unwrap();

    // Rebuild each admitted document's fingerprints from its ledger record.
    let mut doc_prints = HashMap::new();
    for record in output.ledger.records() {
        let mut prints = DocFingerprints::default();
        if let Some(d) = &record.fingerprints.digest {
            prints.exact_digest = copyfunnel::canonical::parse_hex32(d).ok();
        }
        if let Some(h) = &record.fingerprints.text_simhash {
            prints.text_simhash = u64::from_str_radix(h, 16).ok().map(|bits| {
                copyfunnel::fingerprint::TextSimHash64 { bits, shingle_width: 5 }
            });
        }
        if let Some(mins_hex) = &record.fingerprints.minhash {
            let mins: Option<Vec<u64>> = mins_hex
                .iter()
                .map(|h| u64::from_str_radix(h, 16).ok())
                .collect();
            prints.minhash = mins.map(|mins| copyfunnel::fingerprint::MinHashSignature { mins });
        }
        doc_prints.insert(record.doc_id.clone(), prints);
    }

    let params = XrefParams {
        image_radius: config.image_radius,
        simhash_radius: config.simhash_radius,
        minhash_jaccard_threshold: config.minhash_jaccard_threshold,
    };
    let hits = rescan_admitted(&output.manifest, &doc_prints, &v1, &v2, &params).unwrap();

    println!("\nrescan against v2 (added works only):");
    for (doc_id, hits) in &hits {
        for hit in hits {
            println!(
                "  {doc_id}: {:?} {} strength {:.3}",
                hit.match_kind, hit.work_id, hit.strength
            );
        }
    }
    assert_eq!(hits.len(), 1, "exactly the mirrored manuscript is caught");
    println!("\nthe exposure window closed: the mirror is quarantined for review");
}
