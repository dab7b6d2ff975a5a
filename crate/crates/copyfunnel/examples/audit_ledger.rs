//! Append records to a hash-chained ledger, verify it, tamper with it,
//! and emit the dataset card.
//!
//! ```bash
//! cargo run --example audit_ledger
//! ```

use copyfunnel::canonical::hex32;
use copyfunnel::policy::{AccessDecision, AccessReason, AccessVerdict};
use copyfunnel::provenance::{
    emit_card, render_card, verify_chain, ChainVerdict, FingerprintSummary, Ledger,
    ProvenanceRecord, RecordKind,
};
use copyfunnel::verdict::{ReasonCode, Stage, StageVerdict, Verdict};

fn record(doc_id: &str, final_verdict: Verdict) -> ProvenanceRecord {
    let stage_verdicts = if final_verdict == Verdict::Reject {
        vec![StageVerdict::new(
            Stage::Gate,
            Verdict::Reject,
            ReasonCode::TdmReserved,
            "host=reserved.example".into(),
        )]
    } else {
        vec![
            StageVerdict::new(Stage::Gate, Verdict::Admit, ReasonCode::Open, String::new()),
            StageVerdict::new(Stage::Fingerprint, Verdict::Admit, ReasonCode::Computed, "text tokens=42".into()),
            StageVerdict::new(Stage::Entity, Verdict::Admit, ReasonCode::NoFlags, "flags=0".into()),
            StageVerdict::new(Stage::Classifier, Verdict::Admit, ReasonCode::ClassifierPass, "score=-0.8412".into()),
            StageVerdict::new(Stage::Xref, Verdict::Admit, ReasonCode::NoMatch, String::new()),
        ]
    };
    ProvenanceRecord {
        doc_id: doc_id.into(),
        source_url: format!("https://host.example/{doc_id}"),
        fetched_at: "2026-03-01T12:00:00Z".into(),
        access_decision: AccessDecision {
            verdict: AccessVerdict::Allow,
            price_micro_units: 0,
            reason: AccessReason::Open,
        },
        stage_verdicts,
        fingerprints: FingerprintSummary::default(),
        snapshot_version: 1,
        final_verdict,
        record_kind: RecordKind::Ingest,
    }
}

fn main() {
    let mut ledger = Ledger::new();
    for (i, verdict) in [Verdict::Admit, Verdict::Admit, Verdict::Reject, Verdict::Admit]
        .iter()
        .enumerate()
    {
        let link = ledger.append(record(&format!("doc{i}"), *verdict)).unwrap();
        println!(
            "seq {} record {} link {}",
            link.seq,
            &link.record_digest[..12],
            &link.link_digest[..12]
        );
    }
    println!("head digest: {}", hex32(&ledger.head_digest()));

    let bytes = ledger.to_jsonl();
    println!("\nverify intact ledger: {:?}", verify_chain(&bytes));

    // Flip one bit in the second record and watch the verifier point at it.
    let mut tampered = bytes.clone();
    let second_line_start = bytes
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == b'\n')
        .map(|(i, _)| i + 1)
        .nth(1)
        .unwrap();
    tampered[second_line_start + 20] ^= 0x01;
    match verify_chain(&tampered) {
        ChainVerdict::FirstBroken { seq } => println!("tampered ledger: first broken seq {seq}"),
        other => println!("unexpected: {other:?}"),
    }

    // Truncation of a whole trailing pair is invisible to the chain alone;
    // the published head digest is what exposes it.
    let lines: Vec<&[u8]> = bytes.split(|&b| b == b'\n').collect();
    let mut truncated: Vec<u8> = lines[..lines.len() - 3].join(&b'\n');
    truncated.push(b'\n');
    let verdict = verify_chain(&truncated);
    println!(
        "truncated ledger verifies: {:?}; head differs from published {}",
        verdict.is_ok(),
        hex32(&ledger.head_digest())
    );

    let card = emit_card(&bytes, "demo-dataset").unwrap();
    println!("\n{}", render_card(&card));
}
