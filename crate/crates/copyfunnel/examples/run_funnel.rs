//! The whole funnel over a small in-memory corpus: gate, fingerprints,
//! entity flags, classifier, cross-reference, ledger, card.
//!
//! ```bash
//! cargo run --example run_funnel
//! ```

use copyfunnel::classifier::{train, Label, TrainingExample};
use copyfunnel::entity::{compile_gazetteer, EntityClass, GazetteerEntry};
use copyfunnel::pipeline::{
    run_funnel, CorpusDoc, FunnelConfig, FunnelInputs, HostSignals, Media, SidecarStore,
};
use copyfunnel::policy::PriceSchedule;
use copyfunnel::provenance::emit_card;
use copyfunnel::registry::{snapshot_from_works, RegisteredWork};

const REGISTERED: &str = "\
the quick silver river ran under the bridge at dawn and the miller counted \
his sacks twice before the carts arrived from the southern villages";

fn text_doc(doc_id: &str, url: &str, body: &str) -> CorpusDoc {
    CorpusDoc {
        doc_id: doc_id.into(),
        source_url: url.into(),
        fetched_at: "2026-03-02T08:00:00Z".into(),
        media: Media::Text {
            text: Some(body.into()),
            path: None,
        },
    }
}

fn main() {
    // Stage state: sidecar signals, prices, gazetteer, classifier, registry.
    let mut sidecar = SidecarStore::default();
    sidecar.robots.insert(
        "walled.example".into(),
        "User-agent: *\nDisallow: /members/".into(),
    );
    sidecar.signals.insert(
        "optout.example".into(),
        HostSignals {
            headers: vec![("tdm-reservation".into(), "1".into())],
            ..Default::default()
        },
    );
    let mut prices = PriceSchedule::default();
    prices.per_domain.insert("paywall.example".into(), 1200);

    let matcher = compile_gazetteer(vec![GazetteerEntry::new(
        "the riverside gazette",
        EntityClass::Publication,
        None,
    )
    .unwrap()])
    .unwrap();

    let toks = |s: &str| copyfunnel::text::normalize_text(s);
    let model = train(
        &[
            TrainingExample {
                tokens: toks("chapter twelve of the serialized romance continued where the duel had paused"),
                label: Label::ProtectedLike,
            },
            TrainingExample {
                tokens: toks("community notes on composting and rain barrels for small gardens"),
                label: Label::PublicLike,
            },
        ],
        3,
        0.5,
    )
    .unwrap();

    let registered_tokens = toks(REGISTERED);
    let snapshot = snapshot_from_works(
        1,
        "2026-02-01T00:00:00Z",
        vec![RegisteredWork {
            work_id: "w-river".into(),
            title: "The Quick Silver River".into(),
            authors: vec!["M. Miller".into()],
            exact_digest: copyfunnel::canonical::sha256(
                copyfunnel::text::canonical_text(&registered_tokens).as_bytes(),
            ),
            image_hashes: vec![],
            text_simhash: copyfunnel::fingerprint::simhash(&registered_tokens, 5).ok(),
            minhash: copyfunnel::fingerprint::minhash_from_tokens(&registered_tokens, 5, 128).ok(),
            registered_at: "2026-01-20T00:00:00Z".into(),
        }],
    )
    .unwrap();

    let corpus = vec![
        text_doc(
            "clean-essay",
            "https://open.example/essay",
            "a plain essay about weather patterns and garden birds in spring",
        ),
        text_doc(
            "robots-blocked",
            "https://walled.example/members/post",
            "members only content that the crawler must not use",
        ),
        text_doc(
            "tdm-reserved",
            "https://optout.example/story",
            "a story from a site that reserved all text and data mining",
        ),
        text_doc(
            "priced",
            "https://paywall.example/feature",
            "a feature article behind a per-request price",
        ),
        text_doc("mirror-copy", "https://mirror.example/rip", REGISTERED),
        text_doc(
            "gazette-mention",
            "https://open.example/media-notes",
            "the riverside gazette wrote about the riverside gazette itself in a retrospective",
        ),
    ];

    let inputs = FunnelInputs {
        sidecar: &sidecar,
        prices: &prices,
        matcher: &matcher,
        model: &model,
        snapshot: &snapshot,
        media_root: std::path::PathBuf::from("."),
    };
    let config = FunnelConfig::default();
    let output = run_funnel(&corpus, &inputs, &config, None).unwrap();

    println!("{}", output.stats.render_table());
    for record in output.ledger.records() {
        let last = record.stage_verdicts.last().unwrap();
        println!(
            "{:<16} {:?} (final stage {:?}: {:?} {})",
            record.doc_id, record.final_verdict, last.stage, last.reason, last.evidence
        );
    }
    println!("\nadmitted manifest: {:?}", output
        .manifest
        .iter()
        .map(|e| e.doc_id.as_str())
        .collect::<Vec<_>>());
    println!("quarantined for review: {:?}", output
        .quarantined
        .iter()
        .map(|e| e.doc_id.as_str())
        .collect::<Vec<_>>());

    let card = emit_card(&output.ledger.to_jsonl(), "demo").unwrap();
    println!("\n{}", copyfunnel::provenance::render_card(&card));
    println!("head digest: {}", output.head_digest_hex());
}
