//! Pipeline-level integration: manifest semantics, ledger ordering, replay
//! from disk, and the rescan-equals-diff-of-full-xrefs oracle.

mod common;

use std::collections::{HashMap, HashSet};

use copyfunnel::pipeline::{replay, run_funnel, FunnelConfig, Media};
use copyfunnel::provenance::emit_card;
use copyfunnel::registry::{rescan_admitted, xref_document, DocFingerprints, XrefParams};
use copyfunnel::verdict::Verdict;

#[test]
fn manifest_holds_exactly_the_admitted_docs() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = common::build_e2e_fixture(dir.path(), 40, 6, 12, 3);
    let mem = common::MemInputs::load(&fixture);
    let out = run_funnel(
        &fixture.corpus_docs,
        &mem.inputs(),
        &FunnelConfig::default(),
        Some(2),
    )
    .unwrap();

    let admitted: HashSet<&str> = out.manifest.iter().map(|e| e.doc_id.as_str()).collect();
    let quarantined: HashSet<&str> = out.quarantined.iter().map(|e| e.doc_id.as_str()).collect();
    let mut record_count = 0usize;
    for record in out.ledger.records() {
        record_count += 1;
        match record.final_verdict {
            Verdict::Admit => {
                assert!(admitted.contains(record.doc_id.as_str()));
                assert!(!quarantined.contains(record.doc_id.as_str()));
            }
            Verdict::Quarantine => {
                assert!(quarantined.contains(record.doc_id.as_str()));
                assert!(!admitted.contains(record.doc_id.as_str()));
            }
            Verdict::Reject => {
                assert!(!admitted.contains(record.doc_id.as_str()));
                assert!(!quarantined.contains(record.doc_id.as_str()));
            }
        }
    }
    // One record per document, in corpus order.
    assert_eq!(record_count, fixture.corpus_docs.len());
    let ledger_ids: Vec<&str> = out.ledger.records().map(|r| r.doc_id.as_str()).collect();
    let corpus_ids: Vec<&str> = fixture
        .corpus_docs
        .iter()
        .map(|d| d.doc_id.as_str())
        .collect();
    assert_eq!(ledger_ids, corpus_ids);

    // Gate rejections truncate the stage list; admitted docs carry all 5.
    for record in out.ledger.records() {
        if record.final_verdict == Verdict::Admit {
            assert_eq!(record.stage_verdicts.len(), 5, "{}", record.doc_id);
        }
        if record.stage_verdicts.len() == 1 {
            assert_eq!(record.stage_verdicts[0].verdict, Verdict::Reject);
        }
    }

    // Stats equal the ledger card.
    let card = emit_card(&out.ledger.to_jsonl(), "x").unwrap();
    assert_eq!(card.admitted, out.stats.admitted);
    assert_eq!(card.rejected, out.stats.rejected);
    assert_eq!(card.quarantined, out.stats.quarantined);
    assert_eq!(card.total_ingested, out.stats.total_documents);
}

#[test]
fn replay_round_trips_a_disk_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = common::build_e2e_fixture(dir.path(), 25, 4, 8, 4);
    let mem = common::MemInputs::load(&fixture);
    let config = FunnelConfig::default();
    let out = run_funnel(&fixture.corpus_docs, &mem.inputs(), &config, None).unwrap();
    let stored = out.ledger.to_jsonl();

    replay(&stored, &fixture.corpus_docs, &mem.inputs(), &config, Some(3)).unwrap();

    // A shingle-width change reshapes every text fingerprint, so the very
    // first text record diverges.
    let mut changed = config.clone();
    changed.shingle_width = 4;
    let err = replay(&stored, &fixture.corpus_docs, &mem.inputs(), &changed, None).unwrap_err();
    assert!(matches!(
        err,
        copyfunnel::pipeline::PipelineError::ReplayMismatch { seq: 0 }
    ));
}

#[test]
fn rescan_equals_fresh_xref_difference() {
    // rescan(S, S') must equal xref(S') minus xref(S) per admitted doc.
    let dir = tempfile::tempdir().unwrap();
    let fixture = common::build_e2e_fixture(dir.path(), 60, 0, 15, 5);
    let mem = common::MemInputs::load(&fixture);
    let config = FunnelConfig::default();
    let out = run_funnel(&fixture.corpus_docs, &mem.inputs(), &config, Some(2)).unwrap();

    // Snapshot v2 adds two works: one equal to an admitted doc, one novel.
    let target = &out.manifest[out.manifest.len() / 3];
    let target_doc = fixture
        .corpus_docs
        .iter()
        .find(|d| d.doc_id == target.doc_id)
        .unwrap();
    let v2_path = common::write_snapshot_v2(&fixture, "late-a", &common::doc_tokens(target_doc));
    let new = copyfunnel::registry::load_snapshot(&v2_path).unwrap();
    let old = &mem.snapshot;

    // Fingerprints of every admitted doc, recomputed from the corpus.
    let mut doc_prints: HashMap<String, DocFingerprints> = HashMap::new();
    for entry in &out.manifest {
        let doc = fixture
            .corpus_docs
            .iter()
            .find(|d| d.doc_id == entry.doc_id)
            .unwrap();
        let prints = match &doc.media {
            Media::Text { .. } => {
                let tokens = common::doc_tokens(doc);
                DocFingerprints {
                    exact_digest: Some(copyfunnel::canonical::sha256(
                        copyfunnel::text::canonical_text(&tokens).as_bytes(),
                    )),
                    text_simhash: copyfunnel::fingerprint::simhash(&tokens, 5).ok(),
                    minhash: copyfunnel::fingerprint::minhash_from_tokens(&tokens, 5, 128).ok(),
                    ..Default::default()
                }
            }
            Media::Image { .. } => DocFingerprints::default(),
        };
        doc_prints.insert(entry.doc_id.clone(), prints);
    }

    let params = XrefParams {
        image_radius: config.image_radius,
        simhash_radius: config.simhash_radius,
        minhash_jaccard_threshold: config.minhash_jaccard_threshold,
    };
    let rescan_hits = rescan_admitted(&out.manifest, &doc_prints, old, &new, &params).unwrap();

    // Oracle: full xref against new minus hits already present against old.
    let mut expected: Vec<(String, Vec<(String, copyfunnel::registry::MatchKind)>)> = Vec::new();
    for entry in &out.manifest {
        let prints = &doc_prints[&entry.doc_id];
        let now: HashSet<(String, copyfunnel::registry::MatchKind)> =
            xref_document(prints, &new, &params)
                .into_iter()
                .map(|h| (h.work_id, h.match_kind))
                .collect();
        let before: HashSet<(String, copyfunnel::registry::MatchKind)> =
            xref_document(prints, old, &params)
                .into_iter()
                .map(|h| (h.work_id, h.match_kind))
                .collect();
        let mut fresh: Vec<_> = now.difference(&before).cloned().collect();
        fresh.sort();
        if !fresh.is_empty() {
            expected.push((entry.doc_id.clone(), fresh));
        }
    }
    expected.sort_by(|a, b| a.0.cmp(&b.0));

    let got: Vec<(String, Vec<(String, copyfunnel::registry::MatchKind)>)> = rescan_hits
        .into_iter()
        .map(|(doc_id, hits)| {
            let mut kinds: Vec<_> = hits
                .into_iter()
                .map(|h| (h.work_id, h.match_kind))
                .collect();
            kinds.sort();
            (doc_id, kinds)
        })
        .collect();
    assert_eq!(got, expected);
    // The planted duplicate is among the results.
    assert!(got.iter().any(|(d, _)| *d == target.doc_id));
}

#[test]
fn search_purpose_admits_noai_hosts() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = common::build_e2e_fixture(dir.path(), 10, 0, 4, 6);
    let mem = common::MemInputs::load(&fixture);

    let mut config = FunnelConfig::default();
    config.purpose = copyfunnel::policy::Purpose::Search;
    let out = run_funnel(&fixture.corpus_docs, &mem.inputs(), &config, Some(1)).unwrap();

    for record in out.ledger.records() {
        let host = record.source_url.split('/').nth(2).unwrap_or("");
        if host == "noai.example" {
            // TRAINING_ONLY reservations never block SEARCH.
            assert_ne!(record.stage_verdicts[0].verdict, Verdict::Reject);
        }
        if host == "reserved.example" || host == "terms.example" {
            // ALL-scoped reservations still do.
            assert_eq!(record.final_verdict, Verdict::Reject);
        }
    }
}
