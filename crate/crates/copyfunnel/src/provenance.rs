//! Tamper-evident provenance ledger and dataset cards.
//!
//! Each document decision becomes one canonical-JSON record chained by
//! SHA-256: `link_digest = sha256(prev_digest || record_digest || seq_be)`.
//! The verifier recomputes every digest and byte-compares every stored line
//! against its canonical form, so any single-bit mutation of the file is
//! reported at the first sequence it touches. Truncation of whole trailing
//! pairs is only detectable against the externally published head digest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::{hex32, parse_hex32, sha256, to_canonical_json};
use crate::policy::{split_url, AccessDecision};
use crate::verdict::{StageVerdict, Verdict};

#[derive(Debug, Error)]
pub enum ProvenanceError {
    #[error("record serialization is not canonical")]
    SerializationNoncanonical,
    #[error("chain invalid: first broken seq {0}")]
    ChainInvalid(u64),
    #[error("ledger schema error at seq {seq}: {message}")]
    Schema { seq: u64, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RecordKind {
    Ingest,
    Rescan,
}

/// Hex-encoded fingerprints carried per record so a later rescan can
/// re-cross-reference admitted documents without the original media.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FingerprintSummary {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_dhash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_simhash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minhash: Option<Vec<String>>,
}

/// One per-document decision record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub doc_id: String,
    pub source_url: String,
    pub fetched_at: String,
    pub access_decision: AccessDecision,
    /// Stage order is fixed: gate, fingerprint, entity, classifier, xref.
    /// A terminal rejection truncates the list.
    pub stage_verdicts: Vec<StageVerdict>,
    pub fingerprints: FingerprintSummary,
    pub snapshot_version: u64,
    pub final_verdict: Verdict,
    pub record_kind: RecordKind,
}

/// Chain link over one record. All digests are lowercase hex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditLink {
    pub seq: u64,
    pub record_digest: String,
    pub prev_digest: String,
    pub link_digest: String,
}

pub const ZERO_DIGEST: [u8; 32] = [0u8; 32];

fn link_digest(prev: &[u8; 32], record: &[u8; 32], seq: u64) -> [u8; 32] {
    let mut buf = Vec::with_capacity(72);
    buf.extend_from_slice(prev);
    buf.extend_from_slice(record);
    buf.extend_from_slice(&seq.to_be_bytes());
    sha256(&buf)
}

/// In-memory ledger: ordered (record, link) pairs plus the running head.
#[derive(Debug, Default)]
pub struct Ledger {
    pairs: Vec<(ProvenanceRecord, AuditLink)>,
    head: Option<[u8; 32]>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(ProvenanceRecord, AuditLink)] {
        &self.pairs
    }

    pub fn records(&self) -> impl Iterator<Item = &ProvenanceRecord> {
        self.pairs.iter().map(|(r, _)| r)
    }

    /// Head of the chain; all-zero while the ledger is empty.
    pub fn head_digest(&self) -> [u8; 32] {
        self.head.unwrap_or(ZERO_DIGEST)
    }

    /// Append one record, producing its link. The canonical serialization
    /// is round-trip checked before anything is chained.
    pub fn append(&mut self, record: ProvenanceRecord) -> Result<AuditLink, ProvenanceError> {
        let bytes = to_canonical_json(&record);
        let reparsed: serde_json::Value = serde_json::from_slice(&bytes)
            .map_err(|_| ProvenanceError::SerializationNoncanonical)?;
        if to_canonical_json(&reparsed) != bytes {
            return Err(ProvenanceError::SerializationNoncanonical);
        }
        let seq = self.pairs.len() as u64;
        let prev = self.head_digest();
        let record_digest = sha256(&bytes);
        let link = AuditLink {
            seq,
            record_digest: hex32(&record_digest),
            prev_digest: hex32(&prev),
            link_digest: hex32(&link_digest(&prev, &record_digest, seq)),
        };
        self.head = Some(parse_hex32(&link.link_digest).expect("hex we just wrote"));
        self.pairs.push((record, link.clone()));
        Ok(link)
    }

    /// Serialize as JSONL with alternating record and link lines.
    pub fn to_jsonl(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (record, link) in &self.pairs {
            out.extend_from_slice(&to_canonical_json(record));
            out.push(b'\n');
            out.extend_from_slice(&to_canonical_json(link));
            out.push(b'\n');
        }
        out
    }
}

/// File-backed appender. Each append writes the record and link lines as a
/// single chunk so a crash never leaves half a pair behind.
pub struct LedgerWriter {
    file: std::fs::File,
    ledger: Ledger,
}

impl LedgerWriter {
    pub fn create(path: &Path) -> Result<Self, ProvenanceError> {
        let file = std::fs::File::create(path)?;
        Ok(LedgerWriter {
            file,
            ledger: Ledger::new(),
        })
    }

    pub fn append(&mut self, record: ProvenanceRecord) -> Result<AuditLink, ProvenanceError> {
        let link = self.ledger.append(record)?;
        let (record, link_pair) = self.ledger.pairs.last().expect("just appended");
        let mut chunk = to_canonical_json(record);
        chunk.push(b'\n');
        chunk.extend_from_slice(&to_canonical_json(link_pair));
        chunk.push(b'\n');
        self.file.write_all(&chunk)?;
        self.file.flush()?;
        Ok(link)
    }

    pub fn head_digest(&self) -> [u8; 32] {
        self.ledger.head_digest()
    }

    pub fn into_ledger(self) -> Ledger {
        self.ledger
    }
}

/// Outcome of chain verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainVerdict {
    /// Every pair verified; `head` is `None` for an empty ledger.
    Ok {
        records: u64,
        head: Option<String>,
    },
    FirstBroken {
        seq: u64,
    },
}

impl ChainVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, ChainVerdict::Ok { .. })
    }

    pub fn head_hex(&self) -> String {
        match self {
            ChainVerdict::Ok { head: Some(h), .. } => h.clone(),
            _ => hex32(&ZERO_DIGEST),
        }
    }
}

/// Recompute every digest in a stored ledger and report the lowest
/// inconsistent sequence. Never fails: malformed input is a broken chain,
/// an empty file is an intact empty chain.
pub fn verify_chain(bytes: &[u8]) -> ChainVerdict {
    let mut lines: Vec<&[u8]> = bytes.split(|&b| b == b'\n').collect();
    // A well-formed file ends with a newline, leaving one empty tail.
    if let Some(last) = lines.last() {
        if last.is_empty() {
            lines.pop();
        }
    }
    if lines.is_empty() {
        return ChainVerdict::Ok {
            records: 0,
            head: None,
        };
    }

    let mut prev = ZERO_DIGEST;
    let mut head = None;
    let pair_count = lines.len() / 2;
    for seq in 0..pair_count {
        let record_line = lines[seq * 2];
        let link_line = lines[seq * 2 + 1];
        match verify_pair(record_line, link_line, seq as u64, &prev) {
            Some(link) => {
                prev = link;
                head = Some(hex32(&link));
            }
            None => return ChainVerdict::FirstBroken { seq: seq as u64 },
        }
    }
    if lines.len() % 2 != 0 {
        // Dangling record line without its link.
        return ChainVerdict::FirstBroken {
            seq: pair_count as u64,
        };
    }
    ChainVerdict::Ok {
        records: pair_count as u64,
        head,
    }
}

/// Check one stored pair; returns the link digest when intact.
fn verify_pair(record_line: &[u8], link_line: &[u8], seq: u64, prev: &[u8; 32]) -> Option<[u8; 32]> {
    // Stored bytes must equal their own canonical re-serialization; this
    // catches representational tampering that json parsing would forgive.
    let record_value: serde_json::Value = serde_json::from_slice(record_line).ok()?;
    if to_canonical_json(&record_value) != record_line {
        return None;
    }
    let link_value: serde_json::Value = serde_json::from_slice(link_line).ok()?;
    if to_canonical_json(&link_value) != link_line {
        return None;
    }
    let link: AuditLink = serde_json::from_value(link_value).ok()?;
    if link.seq != seq {
        return None;
    }
    let prev_stored = parse_hex32(&link.prev_digest).ok()?;
    if prev_stored != *prev {
        return None;
    }
    let record_digest = sha256(record_line);
    let record_stored = parse_hex32(&link.record_digest).ok()?;
    if record_stored != record_digest {
        return None;
    }
    let expect_link = link_digest(prev, &record_digest, seq);
    let link_stored = parse_hex32(&link.link_digest).ok()?;
    if link_stored != expect_link {
        return None;
    }
    Some(expect_link)
}

/// Parse a verified ledger into typed records. Call only after
/// [`verify_chain`] returned Ok; schema errors are still reported
/// gracefully.
pub fn parse_records(bytes: &[u8]) -> Result<Vec<(ProvenanceRecord, AuditLink)>, ProvenanceError> {
    let mut out = Vec::new();
    let mut lines = bytes.split(|&b| b == b'\n').peekable();
    let mut seq = 0u64;
    while let Some(record_line) = lines.next() {
        if record_line.is_empty() {
            continue;
        }
        let link_line = lines.next().unwrap_or(b"");
        let record: ProvenanceRecord =
            serde_json::from_slice(record_line).map_err(|e| ProvenanceError::Schema {
                seq,
                message: e.to_string(),
            })?;
        let link: AuditLink =
            serde_json::from_slice(link_line).map_err(|e| ProvenanceError::Schema {
                seq,
                message: e.to_string(),
            })?;
        out.push((record, link));
        seq += 1;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// dataset cards
// ---------------------------------------------------------------------------

/// Aggregate filtering outcomes for one dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceCard {
    pub dataset_id: String,
    pub total_ingested: u64,
    pub admitted: u64,
    pub rejected: u64,
    pub quarantined: u64,
    pub rejection_reasons: BTreeMap<String, u64>,
    pub source_domains: BTreeMap<String, u64>,
    pub snapshot_version: u64,
    pub chain_head_digest: String,
}

/// Fold a verified ledger into a card. Fails with CHAIN_INVALID if the
/// chain does not verify.
pub fn emit_card(bytes: &[u8], dataset_id: &str) -> Result<ProvenanceCard, ProvenanceError> {
    let verdict = verify_chain(bytes);
    let head = match &verdict {
        ChainVerdict::Ok { head, .. } => head.clone().unwrap_or_else(|| hex32(&ZERO_DIGEST)),
        ChainVerdict::FirstBroken { seq } => return Err(ProvenanceError::ChainInvalid(*seq)),
    };

    let mut card = ProvenanceCard {
        dataset_id: dataset_id.to_string(),
        total_ingested: 0,
        admitted: 0,
        rejected: 0,
        quarantined: 0,
        rejection_reasons: BTreeMap::new(),
        source_domains: BTreeMap::new(),
        snapshot_version: 0,
        chain_head_digest: head,
    };
    for (record, _) in parse_records(bytes)? {
        card.total_ingested += 1;
        match record.final_verdict {
            Verdict::Admit => card.admitted += 1,
            Verdict::Quarantine => card.quarantined += 1,
            Verdict::Reject => {
                card.rejected += 1;
                let reason = record
                    .stage_verdicts
                    .iter()
                    .rev()
                    .find(|sv| sv.verdict == Verdict::Reject)
                    .map(|sv| sv.reason.as_str().to_string())
                    .unwrap_or_else(|| "UNKNOWN".to_string());
                *card.rejection_reasons.entry(reason).or_insert(0) += 1;
            }
        }
        let (host, _) = split_url(&record.source_url);
        let domain = if host.is_empty() { "(unknown)".to_string() } else { host };
        *card.source_domains.entry(domain).or_insert(0) += 1;
        card.snapshot_version = card.snapshot_version.max(record.snapshot_version);
    }
    Ok(card)
}

/// Human-readable card rendering.
pub fn render_card(card: &ProvenanceCard) -> String {
    let mut out = String::new();
    out.push_str(&format!("dataset           {}\n", card.dataset_id));
    out.push_str(&format!("total ingested    {}\n", card.total_ingested));
    out.push_str(&format!("admitted          {}\n", card.admitted));
    out.push_str(&format!("rejected          {}\n", card.rejected));
    out.push_str(&format!("quarantined       {}\n", card.quarantined));
    out.push_str(&format!("snapshot version  {}\n", card.snapshot_version));
    if !card.rejection_reasons.is_empty() {
        out.push_str("rejection reasons:\n");
        for (reason, count) in &card.rejection_reasons {
            out.push_str(&format!("  {reason:<24} {count}\n"));
        }
    }
    if !card.source_domains.is_empty() {
        out.push_str("source domains:\n");
        for (domain, count) in &card.source_domains {
            out.push_str(&format!("  {domain:<24} {count}\n"));
        }
    }
    out.push_str(&format!("chain head        {}\n", card.chain_head_digest));
    out
}
