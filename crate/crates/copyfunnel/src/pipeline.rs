//! Funnel orchestration: fixed stage order, terminal rejection, quarantine
//! escalation, deterministic replay.
//!
//! Stage order is gate, fingerprint, entity, classifier, xref. A rejection
//! ends the document's run; a quarantine widens the simhash radius for its
//! xref and routes the item to review export; admission requires that no
//! stage rejected. Every document yields exactly one ledger record, in
//! corpus order, whatever the worker count.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::{hex32, sha256};
use crate::classifier::NGramModel;
use crate::entity::GazetteerMatcher;
use crate::fingerprint::{self, pgm};
use crate::policy::{
    parse_robots, parse_tdm_signals, resolve_access, AccessDecision, AccessReason, AccessVerdict,
    FetchRequest, PriceSchedule, Purpose, TdmSignal,
};
use crate::provenance::{
    FingerprintSummary, Ledger, ProvenanceError, ProvenanceRecord, RecordKind,
};
use crate::registry::{DocFingerprints, ManifestEntry, RegistrySnapshot, XrefParams};
use crate::verdict::{ReasonCode, Stage, StageVerdict, Verdict};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("corpus schema error: {0}")]
    CorpusSchema(String),
    #[error("ledger error: {0}")]
    Ledger(#[from] ProvenanceError),
    #[error("replay mismatch at seq {seq}")]
    ReplayMismatch { seq: u64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

/// Funnel thresholds and radii. Loaded from JSON with every field optional;
/// CLI flags override file values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FunnelConfig {
    pub image_radius: u32,
    pub simhash_radius: u32,
    /// Simhash radius applied to documents under elevated scrutiny
    /// (one step wider than the base radius by default).
    pub quarantine_simhash_radius: u32,
    pub minhash_jaccard_threshold: f64,
    pub classifier_threshold: f64,
    pub entity_flag_threshold: usize,
    pub purpose: Purpose,
    pub shingle_width: usize,
    pub minhash_k: usize,
    pub agent_id: String,
}

impl Default for FunnelConfig {
    fn default() -> Self {
        FunnelConfig {
            image_radius: 10,
            simhash_radius: 3,
            quarantine_simhash_radius: 4,
            minhash_jaccard_threshold: 0.6,
            classifier_threshold: 0.0,
            entity_flag_threshold: 2,
            purpose: Purpose::Training,
            shingle_width: 5,
            minhash_k: 128,
            agent_id: "copyfunnel".into(),
        }
    }
}

impl FunnelConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let err = |m: String| Err(PipelineError::Config(m));
        if self.image_radius > 64 || self.simhash_radius > 64 || self.quarantine_simhash_radius > 64
        {
            return err("radii must be in 0..=64".into());
        }
        if self.quarantine_simhash_radius < self.simhash_radius {
            return err(format!(
                "quarantine_simhash_radius {} below simhash_radius {}",
                self.quarantine_simhash_radius, self.simhash_radius
            ));
        }
        if !self.minhash_jaccard_threshold.is_finite() || !self.classifier_threshold.is_finite() {
            return err("thresholds must be finite".into());
        }
        if self.entity_flag_threshold == 0 {
            return err("entity_flag_threshold must be at least 1".into());
        }
        if self.shingle_width == 0 || self.minhash_k == 0 {
            return err("shingle_width and minhash_k must be positive".into());
        }
        if self.agent_id.is_empty() {
            return err("agent_id must be non-empty".into());
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)?;
        let config: FunnelConfig = serde_json::from_str(&text)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }
}

// ---------------------------------------------------------------------------
// corpus and sidecar inputs
// ---------------------------------------------------------------------------

/// Payload reference of one corpus document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Media {
    Text {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        text: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
    },
    Image {
        path: String,
    },
}

/// One scraped item flowing through the funnel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDoc {
    pub doc_id: String,
    pub source_url: String,
    pub fetched_at: String,
    pub media: Media,
}

/// Parse corpus JSONL, checking doc_id uniqueness and media shape.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusDoc>, PipelineError> {
    let mut docs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: CorpusDoc = serde_json::from_str(line)
            .map_err(|e| PipelineError::CorpusSchema(format!("line {}: {e}", i + 1)))?;
        if doc.doc_id.is_empty() {
            return Err(PipelineError::CorpusSchema(format!(
                "line {}: empty doc_id",
                i + 1
            )));
        }
        if !seen.insert(doc.doc_id.clone()) {
            return Err(PipelineError::CorpusSchema(format!(
                "line {}: duplicate doc_id {:?}",
                i + 1,
                doc.doc_id
            )));
        }
        if let Media::Text { text, path } = &doc.media {
            if text.is_some() == path.is_some() {
                return Err(PipelineError::CorpusSchema(format!(
                    "line {}: TEXT media needs exactly one of text or path",
                    i + 1
                )));
            }
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn load_corpus(path: &Path) -> Result<Vec<CorpusDoc>, PipelineError> {
    let text = std::fs::read_to_string(path)?;
    parse_corpus(&text)
}

/// Captured per-host response headers, head markup, and terms reservation.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct HostSignals {
    pub headers: Vec<(String, String)>,
    pub html_head: String,
    pub terms_reserved: Option<bool>,
}

/// Robots files and TDM signal captures keyed by host, stored alongside the
/// corpus as `<host>.robots.txt` and `<host>.signals.json`.
#[derive(Debug, Clone, Default)]
pub struct SidecarStore {
    pub robots: HashMap<String, String>,
    pub signals: HashMap<String, HostSignals>,
}

impl SidecarStore {
    /// Scan the corpus directory for sidecar files.
    pub fn load(dir: &Path) -> Result<Self, PipelineError> {
        let mut store = SidecarStore::default();
        if !dir.is_dir() {
            return Ok(store);
        }
        for entry in std::fs::read_dir(dir)? {
            let entry = entry?;
            let name = entry.file_name();
            let Some(name) = name.to_str() else { continue };
            if let Some(host) = name.strip_suffix(".robots.txt") {
                store
                    .robots
                    .insert(host.to_string(), std::fs::read_to_string(entry.path())?);
            } else if let Some(host) = name.strip_suffix(".signals.json") {
                let text = std::fs::read_to_string(entry.path())?;
                let signals: HostSignals = serde_json::from_str(&text).map_err(|e| {
                    PipelineError::CorpusSchema(format!("{name}: {e}"))
                })?;
                store.signals.insert(host.to_string(), signals);
            }
        }
        Ok(store)
    }

    pub fn robots_for(&self, host: &str) -> &str {
        self.robots.get(host).map(String::as_str).unwrap_or("")
    }

    /// All TDM signals declared for a host.
    pub fn signals_for(&self, host: &str) -> Vec<TdmSignal> {
        match self.signals.get(host) {
            Some(hs) => {
                let mut signals = parse_tdm_signals(&hs.headers, &hs.html_head);
                if let Some(reserved) = hs.terms_reserved {
                    signals.push(TdmSignal::terms_file(reserved));
                }
                signals
            }
            None => Vec::new(),
        }
    }
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub admit: u64,
    pub reject: u64,
    pub quarantine: u64,
}

/// Run counters. The final-verdict counts always equal the card derived
/// from the ledger.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FunnelStats {
    pub total_documents: u64,
    pub admitted: u64,
    pub rejected: u64,
    pub quarantined: u64,
    pub per_stage: BTreeMap<String, StageCounts>,
    pub wall_seconds: f64,
    pub docs_per_second: f64,
}

impl FunnelStats {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<14} {:>8} {:>8} {:>10}\n",
            "stage", "admit", "reject", "quarantine"
        ));
        for (stage, counts) in &self.per_stage {
            out.push_str(&format!(
                "{:<14} {:>8} {:>8} {:>10}\n",
                stage, counts.admit, counts.reject, counts.quarantine
            ));
        }
        out.push_str(&format!(
            "final: {} admitted, {} rejected, {} quarantined of {} documents\n",
            self.admitted, self.rejected, self.quarantined, self.total_documents
        ));
        out.push_str(&format!(
            "wall: {:.3}s ({:.0} docs/s)\n",
            self.wall_seconds, self.docs_per_second
        ));
        out
    }
}

// ---------------------------------------------------------------------------
// per-document staging
// ---------------------------------------------------------------------------

/// Immutable stage state shared across workers.
pub struct FunnelInputs<'a> {
    pub sidecar: &'a SidecarStore,
    pub prices: &'a PriceSchedule,
    pub matcher: &'a GazetteerMatcher,
    pub model: &'a NGramModel,
    pub snapshot: &'a RegistrySnapshot,
    /// Directory media paths are resolved against.
    pub media_root: PathBuf,
}

struct DocOutcome {
    record: ProvenanceRecord,
}

fn gate_stage(
    doc: &CorpusDoc,
    inputs: &FunnelInputs,
    config: &FunnelConfig,
) -> (StageVerdict, AccessDecision) {
    let parsed = url::Url::parse(&doc.source_url);
    let (host, _path) = crate::policy::split_url(&doc.source_url);
    let open_decision = AccessDecision {
        verdict: AccessVerdict::Allow,
        price_micro_units: 0,
        reason: AccessReason::Open,
    };
    if parsed.is_err() {
        return (
            StageVerdict::new(
                Stage::Gate,
                Verdict::Quarantine,
                ReasonCode::InputError,
                format!("unparseable source_url {:?}", doc.source_url),
            ),
            open_decision,
        );
    }

    let directives = parse_robots(inputs.sidecar.robots_for(&host), &config.agent_id);
    let signals = inputs.sidecar.signals_for(&host);
    let request = FetchRequest {
        url: doc.source_url.clone(),
        agent_id: config.agent_id.clone(),
        purpose: config.purpose,
    };
    let decision = resolve_access(&request, &directives, &signals, inputs.prices);
    let verdict = match decision.verdict {
        AccessVerdict::Allow => StageVerdict::new(
            Stage::Gate,
            Verdict::Admit,
            match decision.reason {
                AccessReason::PurposeExcluded => ReasonCode::PurposeExcluded,
                _ => ReasonCode::Open,
            },
            String::new(),
        ),
        AccessVerdict::Deny => StageVerdict::new(
            Stage::Gate,
            Verdict::Reject,
            match decision.reason {
                AccessReason::RobotsDisallow => ReasonCode::RobotsDisallow,
                _ => ReasonCode::TdmReserved,
            },
            format!("host={host}"),
        ),
        // No payment settlement exists here, so priced content cannot be
        // admitted; the open obligation is recorded in the decision.
        AccessVerdict::Pay => StageVerdict::new(
            Stage::Gate,
            Verdict::Reject,
            ReasonCode::Unpaid,
            format!(
                "host={host} price_micro_units={}",
                decision.price_micro_units
            ),
        ),
    };
    (verdict, decision)
}

/// Text, if any, plus the fingerprint stage verdict and the fingerprints.
struct FingerprintOutcome {
    verdict: StageVerdict,
    prints: DocFingerprints,
    tokens: Option<Vec<String>>,
}

fn fingerprint_stage(
    doc: &CorpusDoc,
    inputs: &FunnelInputs,
    config: &FunnelConfig,
) -> FingerprintOutcome {
    let mut prints = DocFingerprints::default();
    match &doc.media {
        Media::Text { text, path } => {
            let raw = match (text, path) {
                (Some(t), _) => Ok(t.clone()),
                (None, Some(p)) => std::fs::read_to_string(inputs.media_root.join(p))
                    .map_err(|e| format!("{p}: {e}")),
                (None, None) => Err("TEXT media with neither text nor path".into()),
            };
            let raw = match raw {
                Ok(r) => r,
                Err(e) => {
                    return FingerprintOutcome {
                        verdict: StageVerdict::new(
                            Stage::Fingerprint,
                            Verdict::Quarantine,
                            ReasonCode::InputError,
                            e,
                        ),
                        prints,
                        tokens: None,
                    }
                }
            };
            let tokens = crate::text::normalize_text(&raw);
            prints.exact_digest =
                Some(sha256(crate::text::canonical_text(&tokens).as_bytes()));
            let simhash = fingerprint::simhash(&tokens, config.shingle_width);
            let minhash =
                fingerprint::minhash_from_tokens(&tokens, config.shingle_width, config.minhash_k);
            let verdict = match (&simhash, &minhash) {
                (Ok(_), Ok(_)) => StageVerdict::new(
                    Stage::Fingerprint,
                    Verdict::Admit,
                    ReasonCode::Computed,
                    format!("text tokens={}", tokens.len()),
                ),
                _ => StageVerdict::new(
                    Stage::Fingerprint,
                    Verdict::Quarantine,
                    ReasonCode::InsufficientText,
                    format!(
                        "tokens={} shingle_width={}",
                        tokens.len(),
                        config.shingle_width
                    ),
                ),
            };
            prints.text_simhash = simhash.ok();
            prints.minhash = minhash.ok();
            FingerprintOutcome {
                verdict,
                prints,
                tokens: Some(tokens),
            }
        }
        Media::Image { path } => {
            let bytes = match std::fs::read(inputs.media_root.join(path)) {
                Ok(b) => b,
                Err(e) => {
                    return FingerprintOutcome {
                        verdict: StageVerdict::new(
                            Stage::Fingerprint,
                            Verdict::Quarantine,
                            ReasonCode::InputError,
                            format!("{path}: {e}"),
                        ),
                        prints,
                        tokens: None,
                    }
                }
            };
            prints.exact_digest = Some(sha256(&bytes));
            let hashed = pgm::parse_pgm(&bytes)
                .and_then(|img| pgm::downsample_to_grid(&img).map(|g| (img, g)));
            let verdict = match hashed {
                Ok((img, grid)) => {
                    prints.image_hash = Some(fingerprint::dhash(&grid));
                    StageVerdict::new(
                        Stage::Fingerprint,
                        Verdict::Admit,
                        ReasonCode::Computed,
                        format!("image {}x{}", img.width, img.height),
                    )
                }
                Err(e) => StageVerdict::new(
                    Stage::Fingerprint,
                    Verdict::Quarantine,
                    ReasonCode::InputError,
                    e.to_string(),
                ),
            };
            FingerprintOutcome {
                verdict,
                prints,
                tokens: None,
            }
        }
    }
}

fn xref_evidence(hits: &[crate::registry::XrefHit]) -> String {
    const SHOWN: usize = 5;
    let mut parts: Vec<String> = hits
        .iter()
        .take(SHOWN)
        .map(|h| {
            format!(
                "{}:{}:{:.4}",
                serde_json::to_value(h.match_kind)
                    .expect("kind serializes")
                    .as_str()
                    .unwrap_or("?"),
                h.work_id,
                h.strength
            )
        })
        .collect();
    if hits.len() > SHOWN {
        parts.push(format!("+{}", hits.len() - SHOWN));
    }
    parts.join(",")
}

fn summarize(prints: &DocFingerprints) -> FingerprintSummary {
    FingerprintSummary {
        digest: prints.exact_digest.map(|d| hex32(&d)),
        image_dhash: prints.image_hash.map(|h| h.hex()),
        text_simhash: prints.text_simhash.map(|h| h.hex()),
        minhash: prints
            .minhash
            .as_ref()
            .map(|mh| mh.mins.iter().map(|m| format!("{m:016x}")).collect()),
    }
}

/// Run the full stage sequence for one document. Pure given the inputs and
/// the filesystem content behind media paths.
fn process_document(doc: &CorpusDoc, inputs: &FunnelInputs, config: &FunnelConfig) -> DocOutcome {
    let mut stage_verdicts: Vec<StageVerdict> = Vec::with_capacity(5);

    let (gate, access_decision) = gate_stage(doc, inputs, config);
    let gate_rejected = gate.verdict == Verdict::Reject;
    stage_verdicts.push(gate);

    let mut prints = DocFingerprints::default();
    if !gate_rejected {
        let fp = fingerprint_stage(doc, inputs, config);
        stage_verdicts.push(fp.verdict);
        prints = fp.prints;

        // entity stage
        let flags = match &fp.tokens {
            Some(tokens) if !tokens.is_empty() => inputs.matcher.scan_text(tokens),
            _ => Vec::new(),
        };
        let entity_verdict = match &fp.tokens {
            Some(_) => crate::entity::flag_verdict(&flags, config.entity_flag_threshold),
            None => StageVerdict::new(
                Stage::Entity,
                Verdict::Admit,
                ReasonCode::NotApplicable,
                "no text".into(),
            ),
        };
        let mut flagged: Vec<String> = flags
            .iter()
            .filter_map(|f| f.entry.work_id.clone())
            .collect();
        flagged.sort();
        flagged.dedup();
        prints.flagged_work_ids = flagged;
        stage_verdicts.push(entity_verdict);

        // classifier stage
        let classifier_verdict = match &fp.tokens {
            Some(tokens) if tokens.len() >= inputs.model.n => {
                let score = inputs.model.score_total(tokens);
                if score > config.classifier_threshold {
                    StageVerdict::new(
                        Stage::Classifier,
                        Verdict::Reject,
                        ReasonCode::ClassifierScore,
                        format!("score={score:.4}"),
                    )
                } else {
                    StageVerdict::new(
                        Stage::Classifier,
                        Verdict::Admit,
                        ReasonCode::ClassifierPass,
                        format!("score={score:.4}"),
                    )
                }
            }
            Some(tokens) => StageVerdict::new(
                Stage::Classifier,
                Verdict::Quarantine,
                ReasonCode::InsufficientText,
                format!("tokens={} n={}", tokens.len(), inputs.model.n),
            ),
            None => StageVerdict::new(
                Stage::Classifier,
                Verdict::Admit,
                ReasonCode::NotApplicable,
                "no text".into(),
            ),
        };
        let classifier_rejected = classifier_verdict.verdict == Verdict::Reject;
        stage_verdicts.push(classifier_verdict);

        if !classifier_rejected {
            // xref stage; quarantine so far escalates scrutiny
            let elevated = stage_verdicts
                .iter()
                .any(|sv| sv.verdict == Verdict::Quarantine);
            let params = XrefParams {
                image_radius: config.image_radius,
                simhash_radius: if elevated {
                    config.quarantine_simhash_radius
                } else {
                    config.simhash_radius
                },
                minhash_jaccard_threshold: config.minhash_jaccard_threshold,
            };
            let hits = crate::registry::xref_document(&prints, inputs.snapshot, &params);
            let evidence = xref_evidence(&hits);
            let xref_verdict = if hits.iter().any(|h| h.match_kind.is_rejecting()) {
                StageVerdict::new(Stage::Xref, Verdict::Reject, ReasonCode::XrefMatch, evidence)
            } else if !hits.is_empty() {
                StageVerdict::new(
                    Stage::Xref,
                    Verdict::Quarantine,
                    ReasonCode::EntityLink,
                    evidence,
                )
            } else {
                StageVerdict::new(Stage::Xref, Verdict::Admit, ReasonCode::NoMatch, evidence)
            };
            stage_verdicts.push(xref_verdict);
        }
    }

    let final_verdict = stage_verdicts
        .iter()
        .map(|sv| sv.verdict)
        .fold(Verdict::Admit, Verdict::join);

    DocOutcome {
        record: ProvenanceRecord {
            doc_id: doc.doc_id.clone(),
            source_url: doc.source_url.clone(),
            fetched_at: doc.fetched_at.clone(),
            access_decision,
            stage_verdicts,
            fingerprints: summarize(&prints),
            snapshot_version: inputs.snapshot.version,
            final_verdict,
            record_kind: RecordKind::Ingest,
        },
    }
}

// ---------------------------------------------------------------------------
// runs and replay
// ---------------------------------------------------------------------------

pub struct FunnelOutput {
    pub ledger: Ledger,
    pub manifest: Vec<ManifestEntry>,
    pub quarantined: Vec<ManifestEntry>,
    pub stats: FunnelStats,
}

impl FunnelOutput {
    pub fn head_digest_hex(&self) -> String {
        hex32(&self.ledger.head_digest())
    }
}

/// Run the funnel over a corpus. `workers` of `None` uses the available
/// parallelism; ledger order always follows corpus order.
pub fn run_funnel(
    corpus: &[CorpusDoc],
    inputs: &FunnelInputs,
    config: &FunnelConfig,
    workers: Option<usize>,
) -> Result<FunnelOutput, PipelineError> {
    config.validate()?;
    let start = Instant::now();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| PipelineError::Config(format!("worker pool: {e}")))?;
    let outcomes: Vec<DocOutcome> = pool.install(|| {
        corpus
            .par_iter()
            .map(|doc| process_document(doc, inputs, config))
            .collect()
    });

    let mut ledger = Ledger::new();
    let mut manifest = Vec::new();
    let mut quarantined = Vec::new();
    let mut stats = FunnelStats {
        total_documents: corpus.len() as u64,
        ..Default::default()
    };
    for stage in Stage::ORDER {
        stats.per_stage.insert(
            serde_json::to_value(stage)
                .expect("stage serializes")
                .as_str()
                .unwrap_or("?")
                .to_string(),
            StageCounts::default(),
        );
    }

    for outcome in outcomes {
        let record = outcome.record;
        for sv in &record.stage_verdicts {
            let key = serde_json::to_value(sv.stage)
                .expect("stage serializes")
                .as_str()
                .unwrap_or("?")
                .to_string();
            let counts = stats.per_stage.entry(key).or_default();
            match sv.verdict {
                Verdict::Admit => counts.admit += 1,
                Verdict::Reject => counts.reject += 1,
                Verdict::Quarantine => counts.quarantine += 1,
            }
        }
        let final_verdict = record.final_verdict;
        let doc_id = record.doc_id.clone();
        let snapshot_version = record.snapshot_version;
        let link = ledger.append(record)?;
        let entry = ManifestEntry {
            doc_id,
            final_verdict,
            snapshot_version,
            provenance_digest: link.record_digest,
        };
        match final_verdict {
            Verdict::Admit => {
                stats.admitted += 1;
                manifest.push(entry);
            }
            Verdict::Quarantine => {
                stats.quarantined += 1;
                quarantined.push(entry);
            }
            Verdict::Reject => stats.rejected += 1,
        }
    }

    stats.wall_seconds = start.elapsed().as_secs_f64();
    stats.docs_per_second = if stats.wall_seconds > 0.0 {
        stats.total_documents as f64 / stats.wall_seconds
    } else {
        0.0
    };

    Ok(FunnelOutput {
        ledger,
        manifest,
        quarantined,
        stats,
    })
}

/// Re-run the funnel and compare against a stored ledger byte-for-byte.
/// Returns the first diverging sequence on mismatch.
pub fn replay(
    original_ledger: &[u8],
    corpus: &[CorpusDoc],
    inputs: &FunnelInputs,
    config: &FunnelConfig,
    workers: Option<usize>,
) -> Result<(), PipelineError> {
    let output = run_funnel(corpus, inputs, config, workers)?;
    let fresh = output.ledger.to_jsonl();
    if fresh == original_ledger {
        return Ok(());
    }
    let old_lines: Vec<&[u8]> = original_ledger.split(|&b| b == b'\n').collect();
    let new_lines: Vec<&[u8]> = fresh.split(|&b| b == b'\n').collect();
    let mut seq = 0u64;
    for i in 0..old_lines.len().max(new_lines.len()) {
        let old = old_lines.get(i).copied().unwrap_or(b"");
        let new = new_lines.get(i).copied().unwrap_or(b"");
        if old != new {
            seq = (i / 2) as u64;
            break;
        }
    }
    Err(PipelineError::ReplayMismatch { seq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{train, Label, TrainingExample};
    use crate::entity::{compile_gazetteer, EntityClass, GazetteerEntry};
    use crate::registry::snapshot_from_works;

    fn toks(words: &str) -> Vec<String> {
        words.split_whitespace().map(str::to_string).collect()
    }

    pub(crate) fn tiny_model() -> NGramModel {
        train(
            &[
                TrainingExample {
                    tokens: toks("protected phrase from registry body text"),
                    label: Label::ProtectedLike,
                },
                TrainingExample {
                    tokens: toks("ordinary public words in plain style"),
                    label: Label::PublicLike,
                },
            ],
            3,
            0.5,
        )
        .unwrap()
    }

    fn text_doc(id: &str, url: &str, body: &str) -> CorpusDoc {
        CorpusDoc {
            doc_id: id.into(),
            source_url: url.into(),
            fetched_at: "2026-01-01T00:00:00Z".into(),
            media: Media::Text {
                text: Some(body.into()),
                path: None,
            },
        }
    }

    struct Fixture {
        sidecar: SidecarStore,
        prices: PriceSchedule,
        matcher: GazetteerMatcher,
        model: NGramModel,
        snapshot: RegistrySnapshot,
    }

    impl Fixture {
        fn new() -> Self {
            Fixture {
                sidecar: SidecarStore::default(),
                prices: PriceSchedule::default(),
                matcher: compile_gazetteer(vec![GazetteerEntry::new(
                    "the daily bugle",
                    EntityClass::Publication,
                    Some("w-bugle".into()),
                )
                .unwrap()])
                .unwrap(),
                model: tiny_model(),
                snapshot: snapshot_from_works(1, "t", vec![]).unwrap(),
            }
        }

        fn inputs(&self) -> FunnelInputs<'_> {
            FunnelInputs {
                sidecar: &self.sidecar,
                prices: &self.prices,
                matcher: &self.matcher,
                model: &self.model,
                snapshot: &self.snapshot,
                media_root: PathBuf::from("."),
            }
        }
    }

    #[test]
    fn clean_document_is_admitted_with_five_stages() {
        let fixture = Fixture::new();
        let corpus = vec![text_doc(
            "d1",
            "https://open.example/essay",
            "a calm essay about gardens and weather patterns in the north",
        )];
        let out = run_funnel(&corpus, &fixture.inputs(), &FunnelConfig::default(), Some(1))
            .unwrap();
        assert_eq!(out.manifest.len(), 1);
        let record = out.ledger.records().next().unwrap();
        assert_eq!(record.stage_verdicts.len(), 5);
        assert_eq!(record.final_verdict, Verdict::Admit);
        let stages: Vec<Stage> = record.stage_verdicts.iter().map(|sv| sv.stage).collect();
        assert_eq!(stages, Stage::ORDER.to_vec());
    }

    #[test]
    fn tdm_rejection_is_terminal() {
        let mut fixture = Fixture::new();
        fixture.sidecar.signals.insert(
            "reserved.example".into(),
            HostSignals {
                headers: vec![("tdm-reservation".into(), "1".into())],
                ..Default::default()
            },
        );
        let corpus = vec![text_doc(
            "d1",
            "https://reserved.example/a",
            "words words words words words words",
        )];
        let out = run_funnel(&corpus, &fixture.inputs(), &FunnelConfig::default(), Some(1))
            .unwrap();
        assert!(out.manifest.is_empty());
        let record = out.ledger.records().next().unwrap();
        assert_eq!(record.final_verdict, Verdict::Reject);
        assert_eq!(record.stage_verdicts.len(), 1);
        assert_eq!(record.stage_verdicts[0].reason, ReasonCode::TdmReserved);
    }

    #[test]
    fn registered_duplicate_rejected_at_xref() {
        let mut fixture = Fixture::new();
        let body = "the complete registered novel text flows here with many words";
        fixture.snapshot = snapshot_from_works(
            1,
            "t",
            vec![crate::registry::tests::text_work("w1", body)],
        )
        .unwrap();
        let corpus = vec![text_doc("d1", "https://mirror.example/copy", body)];
        let out = run_funnel(&corpus, &fixture.inputs(), &FunnelConfig::default(), Some(1))
            .unwrap();
        let record = out.ledger.records().next().unwrap();
        assert_eq!(record.final_verdict, Verdict::Reject);
        let xref = record.stage_verdicts.last().unwrap();
        assert_eq!(xref.stage, Stage::Xref);
        assert_eq!(xref.reason, ReasonCode::XrefMatch);
        assert!(xref.evidence.contains("EXACT_DIGEST:w1"));
    }

    #[test]
    fn worker_counts_do_not_change_the_head() {
        let fixture = Fixture::new();
        let corpus: Vec<CorpusDoc> = (0..40)
            .map(|i| {
                text_doc(
                    &format!("d{i}"),
                    &format!("https://site{}.example/p{i}", i % 5),
                    &format!("document number {i} about various subjects {i} {i}"),
                )
            })
            .collect();
        let config = FunnelConfig::default();
        let heads: Vec<String> = [Some(1), Some(4), Some(8)]
            .into_iter()
            .map(|w| {
                run_funnel(&corpus, &fixture.inputs(), &config, w)
                    .unwrap()
                    .head_digest_hex()
            })
            .collect();
        assert_eq!(heads[0], heads[1]);
        assert_eq!(heads[1], heads[2]);
    }

    #[test]
    fn replay_detects_config_changes() {
        let fixture = Fixture::new();
        let corpus = vec![
            text_doc("d1", "https://a.example/1", "first document body with words"),
            text_doc("d2", "https://b.example/2", "second document body with words"),
        ];
        let config = FunnelConfig::default();
        let out = run_funnel(&corpus, &fixture.inputs(), &config, Some(1)).unwrap();
        let bytes = out.ledger.to_jsonl();
        replay(&bytes, &corpus, &fixture.inputs(), &config, Some(2)).unwrap();

        let mut changed = config.clone();
        changed.shingle_width = 4;
        let err = replay(&bytes, &corpus, &fixture.inputs(), &changed, Some(1)).unwrap_err();
        assert!(matches!(err, PipelineError::ReplayMismatch { seq: 0 }));

        let mut reordered = corpus.clone();
        reordered.swap(0, 1);
        let err = replay(&bytes, &reordered, &fixture.inputs(), &config, Some(1)).unwrap_err();
        assert!(matches!(err, PipelineError::ReplayMismatch { seq: 0 }));
    }

    #[test]
    fn stats_match_ledger_card() {
        let mut fixture = Fixture::new();
        fixture.sidecar.robots.insert(
            "blocked.example".into(),
            "User-agent: *\nDisallow: /".into(),
        );
        let corpus = vec![
            text_doc("d1", "https://open.example/1", "plain open essay text body here"),
            text_doc("d2", "https://blocked.example/2", "never fetched body"),
            text_doc("d3", "https://open.example/3", "short"),
        ];
        let out = run_funnel(&corpus, &fixture.inputs(), &FunnelConfig::default(), None)
            .unwrap();
        let card =
            crate::provenance::emit_card(&out.ledger.to_jsonl(), "fixture").unwrap();
        assert_eq!(card.admitted, out.stats.admitted);
        assert_eq!(card.rejected, out.stats.rejected);
        assert_eq!(card.quarantined, out.stats.quarantined);
        assert_eq!(card.total_ingested, out.stats.total_documents);
        // d3 has too few tokens for the default shingle width.
        assert_eq!(out.stats.quarantined, 1);
        assert_eq!(out.stats.rejected, 1);
    }

    #[test]
    fn quarantine_widens_simhash_radius() {
        // One document, one registered work planted exactly 4 simhash bits
        // away. At the base radius (3) it slips through; once entity flags
        // quarantine the document, the widened radius (4) catches it.
        let mut fixture = Fixture::new();
        let body = "the daily bugle says the daily bugle still prints daily news for readers";
        let tokens = crate::text::normalize_text(body);
        let doc_sim = crate::fingerprint::simhash(&tokens, 5).unwrap();

        let mut work = crate::registry::tests::text_work("w1", "unrelated registered body");
        work.text_simhash = Some(crate::fingerprint::TextSimHash64 {
            bits: doc_sim.bits ^ 0b1111,
            shingle_width: 5,
        });
        work.minhash = None;
        fixture.snapshot = snapshot_from_works(1, "t", vec![work]).unwrap();

        let corpus = vec![text_doc("d1", "https://a.example/1", body)];

        // Flags below threshold: no escalation, distance 4 > radius 3, the
        // document sails through.
        let mut lax = FunnelConfig::default();
        lax.entity_flag_threshold = 100;
        let out = run_funnel(&corpus, &fixture.inputs(), &lax, Some(1)).unwrap();
        assert_eq!(
            out.ledger.records().next().unwrap().final_verdict,
            Verdict::Admit
        );

        // Default threshold (2): two mentions quarantine the document, the
        // xref radius widens to 4 and the planted work is hit.
        let strict = FunnelConfig::default();
        let out = run_funnel(&corpus, &fixture.inputs(), &strict, Some(1)).unwrap();
        let record = out.ledger.records().next().unwrap();
        assert_eq!(record.final_verdict, Verdict::Reject);
        let xref = record.stage_verdicts.last().unwrap();
        assert_eq!(xref.reason, ReasonCode::XrefMatch);
    }
}
