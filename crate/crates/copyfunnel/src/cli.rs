//! Operator surface: one binary, one subcommand per workflow, stable exit
//! codes.
//!
//! Exit codes: 0 success, 1 validation or schema error, 2 chain
//! verification failure, 3 rescan produced new hits, 4 internal error
//! (including output write failures). Human tables go to stdout, machine
//! output only with `--json`, diagnostics to stderr. Output files are
//! written to a temporary sibling and renamed, never left half-written.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::canonical::{parse_hex32, sha256};
use crate::classifier::{evaluate, train, Label, NGramModel, TrainingExample};
use crate::entity::{compile_gazetteer, load_gazetteer, parse_flag_evidence};
use crate::fingerprint::{self, pgm, ImageHash64, MinHashSignature, TextSimHash64};
use crate::pipeline::{
    load_corpus, run_funnel, FunnelConfig, FunnelInputs, PipelineError, SidecarStore,
};
use crate::policy::{PriceSchedule, Purpose};
use crate::provenance::{
    emit_card, parse_records, render_card, verify_chain, ChainVerdict, Ledger, ProvenanceRecord,
    RecordKind,
};
use crate::registry::{
    load_manifest, load_snapshot, manifest_to_jsonl, rescan_admitted, snapshot_from_works,
    snapshot_to_json, DocFingerprints, RegisteredWork, XrefHit, XrefParams,
};
use crate::text::{canonical_text, normalize_text};
use crate::verdict::{ReasonCode, Stage, StageVerdict, Verdict};

/// Stable process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    Validation,
    ChainBroken,
    RescanHits,
    Internal,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Validation => 1,
            ExitStatus::ChainBroken => 2,
            ExitStatus::RescanHits => 3,
            ExitStatus::Internal => 4,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "copyfunnel",
    version,
    about = "Staged admission filtering for scraped training corpora"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run the admission funnel over a corpus
    Run(RunArgs),
    /// Re-cross-reference an admitted manifest against a newer snapshot
    Rescan(RescanArgs),
    /// Verify a ledger's hash chain
    Audit(AuditArgs),
    /// Emit the provenance card of a ledger
    Card(CardArgs),
    /// Train the classifier from labeled examples
    Train(TrainArgs),
    /// Evaluate a classifier against labeled and benign corpora
    Eval(EvalArgs),
    /// Build a registry snapshot from raw works
    RegistryBuild(RegistryBuildArgs),
    /// Validate a gazetteer file
    GazetteerCheck(GazetteerCheckArgs),
}

#[derive(Args)]
pub struct RunArgs {
    /// Corpus JSONL; `<host>.robots.txt` / `<host>.signals.json` sidecar
    /// files are read from the same directory
    pub corpus: PathBuf,
    /// Registry snapshot JSON
    #[arg(long)]
    pub registry: PathBuf,
    /// Gazetteer JSONL
    #[arg(long)]
    pub gazetteer: PathBuf,
    /// Classifier model JSON
    #[arg(long)]
    pub model: PathBuf,
    /// Price schedule JSON (`{host: micro_units}`)
    #[arg(long)]
    pub prices: PathBuf,
    /// Optional funnel config JSON; flags below override file values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Dataset id for the card and head file (default: corpus file stem)
    #[arg(long)]
    pub dataset_id: Option<String>,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Emit stats as JSON on stdout
    #[arg(long)]
    pub json: bool,
    /// TRAINING or SEARCH
    #[arg(long)]
    pub purpose: Option<String>,
    #[arg(long)]
    pub agent_id: Option<String>,
    #[arg(long)]
    pub image_radius: Option<u32>,
    #[arg(long)]
    pub simhash_radius: Option<u32>,
    #[arg(long)]
    pub quarantine_simhash_radius: Option<u32>,
    #[arg(long)]
    pub minhash_threshold: Option<f64>,
    #[arg(long)]
    pub classifier_threshold: Option<f64>,
    #[arg(long)]
    pub entity_flag_threshold: Option<usize>,
    #[arg(long)]
    pub shingle_width: Option<usize>,
    #[arg(long)]
    pub minhash_k: Option<usize>,
}

#[derive(Args)]
pub struct RescanArgs {
    /// Admitted manifest JSONL from a prior run
    pub manifest: PathBuf,
    #[arg(long)]
    pub old_snapshot: PathBuf,
    #[arg(long)]
    pub new_snapshot: PathBuf,
    /// Ledger backing the manifest (default: ledger.jsonl next to it)
    #[arg(long)]
    pub ledger: Option<PathBuf>,
    /// Optional funnel config JSON for radii and thresholds
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for the report and rescan ledger (default:
    /// alongside the manifest)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct AuditArgs {
    /// Ledger JSONL to verify
    pub ledger: PathBuf,
    /// Optional `.head` file to compare the chain head against
    #[arg(long)]
    pub head: Option<PathBuf>,
}

#[derive(Args)]
pub struct CardArgs {
    /// Ledger JSONL
    pub ledger: PathBuf,
    #[arg(long, default_value = "dataset")]
    pub dataset_id: String,
    /// Emit the card as JSON on stdout
    #[arg(long)]
    pub json: bool,
    /// Also write the card JSON to a file
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Labeled examples JSONL: {"text": ..., "label": "PROTECTED_LIKE"|"PUBLIC_LIKE"}
    #[arg(long)]
    pub examples: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub ngram: usize,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Where to write the model JSON
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Labeled test examples JSONL
    #[arg(long)]
    pub test: PathBuf,
    /// Benign corpus JSONL: {"text": ...}
    #[arg(long)]
    pub benign: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args)]
pub struct RegistryBuildArgs {
    /// Works JSONL: {"work_id", "title", "authors"?, "kind": "TEXT"|"IMAGE",
    /// "text"|"path", "registered_at"?}
    #[arg(long)]
    pub works: PathBuf,
    #[arg(long)]
    pub version: u64,
    #[arg(long, default_value = "1970-01-01T00:00:00Z")]
    pub created_at: String,
    #[arg(long, default_value_t = 5)]
    pub shingle_width: usize,
    #[arg(long, default_value_t = 128)]
    pub minhash_k: usize,
    /// Where to write the snapshot JSON
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct GazetteerCheckArgs {
    /// Gazetteer JSONL to validate
    pub gazetteer: PathBuf,
}

/// Parse argv and dispatch; the binary's whole main.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let status = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Rescan(args) => cmd_rescan(&args),
        Command::Audit(args) => cmd_audit(&args),
        Command::Card(args) => cmd_card(&args),
        Command::Train(args) => cmd_train(&args),
        Command::Eval(args) => cmd_eval(&args),
        Command::RegistryBuild(args) => cmd_registry_build(&args),
        Command::GazetteerCheck(args) => cmd_gazetteer_check(&args),
    };
    status.code()
}

fn fail(status: ExitStatus, message: impl std::fmt::Display) -> ExitStatus {
    eprintln!("error: {message}");
    status
}

/// Write a file by way of a temporary sibling plus rename.
fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("output");
    let tmp = dir.join(format!(".{file_name}.tmp"));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

fn merged_config(args: &RunArgs) -> Result<FunnelConfig, String> {
    let mut config = match &args.config {
        Some(path) => FunnelConfig::load(path).map_err(|e| format!("--config: {e}"))?,
        None => FunnelConfig::default(),
    };
    if let Some(p) = &args.purpose {
        config.purpose = match p.to_ascii_uppercase().as_str() {
            "TRAINING" => Purpose::Training,
            "SEARCH" => Purpose::Search,
            other => return Err(format!("--purpose: unknown purpose {other:?}")),
        };
    }
    if let Some(v) = &args.agent_id {
        config.agent_id = v.clone();
    }
    if let Some(v) = args.image_radius {
        config.image_radius = v;
    }
    if let Some(v) = args.simhash_radius {
        config.simhash_radius = v;
    }
    if let Some(v) = args.quarantine_simhash_radius {
        config.quarantine_simhash_radius = v;
    }
    if let Some(v) = args.minhash_threshold {
        config.minhash_jaccard_threshold = v;
    }
    if let Some(v) = args.classifier_threshold {
        config.classifier_threshold = v;
    }
    if let Some(v) = args.entity_flag_threshold {
        config.entity_flag_threshold = v;
    }
    if let Some(v) = args.shingle_width {
        config.shingle_width = v;
    }
    if let Some(v) = args.minhash_k {
        config.minhash_k = v;
    }
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

pub fn cmd_run(args: &RunArgs) -> ExitStatus {
    let config = match merged_config(args) {
        Ok(c) => c,
        Err(e) => return fail(ExitStatus::Validation, e),
    };
    let corpus = match load_corpus(&args.corpus) {
        Ok(c) => c,
        Err(e) => return fail(ExitStatus::Validation, format!("corpus: {e}")),
    };
    let corpus_dir = args
        .corpus
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let sidecar = match SidecarStore::load(&corpus_dir) {
        Ok(s) => s,
        Err(e) => return fail(ExitStatus::Validation, format!("sidecar: {e}")),
    };
    let prices = match PriceSchedule::load(&args.prices) {
        Ok(p) => p,
        Err(e) => return fail(ExitStatus::Validation, format!("--prices: {e}")),
    };
    let gazetteer = match load_gazetteer(&args.gazetteer) {
        Ok(g) => g,
        Err(e) => return fail(ExitStatus::Validation, format!("--gazetteer: {e}")),
    };
    let matcher = match compile_gazetteer(gazetteer) {
        Ok(m) => m,
        Err(e) => return fail(ExitStatus::Validation, format!("--gazetteer: {e}")),
    };
    let model = match NGramModel::load(&args.model) {
        Ok(m) => m,
        Err(e) => return fail(ExitStatus::Validation, format!("--model: {e}")),
    };
    let snapshot = match load_snapshot(&args.registry) {
        Ok(s) => s,
        Err(e) => return fail(ExitStatus::Validation, format!("--registry: {e}")),
    };

    let inputs = FunnelInputs {
        sidecar: &sidecar,
        prices: &prices,
        matcher: &matcher,
        model: &model,
        snapshot: &snapshot,
        media_root: corpus_dir,
    };
    let output = match run_funnel(&corpus, &inputs, &config, args.workers) {
        Ok(o) => o,
        Err(e @ PipelineError::Config(_)) => return fail(ExitStatus::Validation, e),
        Err(e) => return fail(ExitStatus::Internal, e),
    };

    let dataset_id = args.dataset_id.clone().unwrap_or_else(|| {
        args.corpus
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("dataset")
            .to_string()
    });
    let head_hex = output.head_digest_hex();

    let write_all = || -> std::io::Result<()> {
        std::fs::create_dir_all(&args.out)?;
        atomic_write(&args.out.join("ledger.jsonl"), &output.ledger.to_jsonl())?;
        atomic_write(
            &args.out.join("admitted.manifest.jsonl"),
            manifest_to_jsonl(&output.manifest).as_bytes(),
        )?;
        atomic_write(
            &args.out.join("quarantine.jsonl"),
            manifest_to_jsonl(&output.quarantined).as_bytes(),
        )?;
        let stats_json =
            serde_json::to_string_pretty(&output.stats).expect("stats serialize");
        atomic_write(&args.out.join("stats.json"), stats_json.as_bytes())?;
        atomic_write(
            &args.out.join(format!("{dataset_id}.head")),
            format!("{head_hex}\n").as_bytes(),
        )?;
        Ok(())
    };
    if let Err(e) = write_all() {
        return fail(
            ExitStatus::Internal,
            format!("writing outputs to {}: {e}", args.out.display()),
        );
    }

    if args.json {
        println!(
            "{}",
            serde_json::json!({
                "stats": output.stats,
                "head_digest": head_hex,
                "dataset_id": dataset_id,
            })
        );
    } else {
        print!("{}", output.stats.render_table());
        println!("head digest: {head_hex}");
    }
    ExitStatus::Success
}

// ---------------------------------------------------------------------------
// rescan
// ---------------------------------------------------------------------------

/// Rebuild a document's fingerprints from its ledger record.
fn prints_from_record(
    record: &ProvenanceRecord,
    shingle_width: usize,
) -> Result<DocFingerprints, String> {
    let mut prints = DocFingerprints::default();
    if let Some(digest) = &record.fingerprints.digest {
        prints.exact_digest = Some(parse_hex32(digest)?);
    }
    if let Some(hex) = &record.fingerprints.image_dhash {
        let bits = u64::from_str_radix(hex, 16).map_err(|e| e.to_string())?;
        prints.image_hash = Some(ImageHash64 { bits });
    }
    if let Some(hex) = &record.fingerprints.text_simhash {
        let bits = u64::from_str_radix(hex, 16).map_err(|e| e.to_string())?;
        prints.text_simhash = Some(TextSimHash64 {
            bits,
            shingle_width,
        });
    }
    if let Some(mins_hex) = &record.fingerprints.minhash {
        let mut mins = Vec::with_capacity(mins_hex.len());
        for h in mins_hex {
            mins.push(u64::from_str_radix(h, 16).map_err(|e| e.to_string())?);
        }
        prints.minhash = Some(MinHashSignature { mins });
    }
    for sv in &record.stage_verdicts {
        if sv.stage == Stage::Entity {
            prints.flagged_work_ids = parse_flag_evidence(&sv.evidence);
        }
    }
    Ok(prints)
}

#[derive(Serialize)]
struct RescanReportLine<'a> {
    doc_id: &'a str,
    hits: &'a [XrefHit],
}

pub fn cmd_rescan(args: &RescanArgs) -> ExitStatus {
    let config = match &args.config {
        Some(path) => match FunnelConfig::load(path) {
            Ok(c) => c,
            Err(e) => return fail(ExitStatus::Validation, format!("--config: {e}")),
        },
        None => FunnelConfig::default(),
    };
    let manifest = match load_manifest(&args.manifest) {
        Ok(m) => m,
        Err(e) => return fail(ExitStatus::Validation, format!("manifest: {e}")),
    };
    let manifest_dir = args
        .manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let ledger_path = args
        .ledger
        .clone()
        .unwrap_or_else(|| manifest_dir.join("ledger.jsonl"));
    let ledger_bytes = match std::fs::read(&ledger_path) {
        Ok(b) => b,
        Err(e) => {
            return fail(
                ExitStatus::Validation,
                format!("--ledger: {}: {e}", ledger_path.display()),
            )
        }
    };
    match verify_chain(&ledger_bytes) {
        ChainVerdict::Ok { .. } => {}
        ChainVerdict::FirstBroken { seq } => {
            return fail(
                ExitStatus::ChainBroken,
                format!("ledger chain broken at seq {seq}"),
            )
        }
    }
    let records = match parse_records(&ledger_bytes) {
        Ok(r) => r,
        Err(e) => return fail(ExitStatus::Validation, format!("ledger: {e}")),
    };
    let by_doc: HashMap<&str, &(ProvenanceRecord, crate::provenance::AuditLink)> = records
        .iter()
        .map(|pair| (pair.0.doc_id.as_str(), pair))
        .collect();

    let old = match load_snapshot(&args.old_snapshot) {
        Ok(s) => s,
        Err(e) => return fail(ExitStatus::Validation, format!("--old-snapshot: {e}")),
    };
    let new = match load_snapshot(&args.new_snapshot) {
        Ok(s) => s,
        Err(e) => return fail(ExitStatus::Validation, format!("--new-snapshot: {e}")),
    };

    let mut doc_prints = HashMap::new();
    for entry in &manifest {
        let Some((record, link)) = by_doc.get(entry.doc_id.as_str()) else {
            return fail(
                ExitStatus::Validation,
                format!("manifest doc {:?} not present in the ledger", entry.doc_id),
            );
        };
        if link.record_digest != entry.provenance_digest {
            return fail(
                ExitStatus::Validation,
                format!(
                    "manifest doc {:?} provenance digest does not match the ledger",
                    entry.doc_id
                ),
            );
        }
        match prints_from_record(record, config.shingle_width) {
            Ok(p) => doc_prints.insert(entry.doc_id.clone(), p),
            Err(e) => {
                return fail(
                    ExitStatus::Validation,
                    format!("doc {:?}: bad fingerprints in ledger: {e}", entry.doc_id),
                )
            }
        };
    }

    let params = XrefParams {
        image_radius: config.image_radius,
        simhash_radius: config.simhash_radius,
        minhash_jaccard_threshold: config.minhash_jaccard_threshold,
    };
    let results = match rescan_admitted(&manifest, &doc_prints, &old, &new, &params) {
        Ok(r) => r,
        Err(e) => return fail(ExitStatus::Validation, e),
    };

    // Report and RESCAN provenance records.
    let out_dir = args.out.clone().unwrap_or(manifest_dir);
    let mut report = String::new();
    let mut rescan_ledger = Ledger::new();
    for (doc_id, hits) in &results {
        report.push_str(
            &serde_json::to_string(&RescanReportLine {
                doc_id,
                hits,
            })
            .expect("report line serializes"),
        );
        report.push('\n');
        let (orig, _) = by_doc.get(doc_id.as_str()).expect("doc came from ledger");
        let rejecting = hits.iter().any(|h| h.match_kind.is_rejecting());
        let evidence: Vec<String> = hits
            .iter()
            .map(|h| format!("{:?}:{}:{:.4}", h.match_kind, h.work_id, h.strength))
            .collect();
        let record = ProvenanceRecord {
            doc_id: doc_id.clone(),
            source_url: orig.source_url.clone(),
            fetched_at: orig.fetched_at.clone(),
            access_decision: orig.access_decision,
            stage_verdicts: vec![StageVerdict::new(
                Stage::Xref,
                Verdict::Quarantine,
                if rejecting {
                    ReasonCode::XrefMatch
                } else {
                    ReasonCode::EntityLink
                },
                evidence.join(","),
            )],
            fingerprints: orig.fingerprints.clone(),
            snapshot_version: new.version,
            final_verdict: Verdict::Quarantine,
            record_kind: RecordKind::Rescan,
        };
        if let Err(e) = rescan_ledger.append(record) {
            return fail(ExitStatus::Internal, format!("rescan ledger: {e}"));
        }
    }
    let write_all = || -> std::io::Result<()> {
        std::fs::create_dir_all(&out_dir)?;
        atomic_write(&out_dir.join("rescan.report.jsonl"), report.as_bytes())?;
        atomic_write(
            &out_dir.join("rescan.ledger.jsonl"),
            &rescan_ledger.to_jsonl(),
        )?;
        Ok(())
    };
    if let Err(e) = write_all() {
        return fail(
            ExitStatus::Internal,
            format!("writing rescan outputs to {}: {e}", out_dir.display()),
        );
    }

    println!(
        "rescan: {} of {} admitted documents hit by works added in v{}",
        results.len(),
        manifest.len(),
        new.version
    );
    for (doc_id, hits) in &results {
        println!("  {doc_id}: {} hit(s)", hits.len());
    }
    if results.is_empty() {
        ExitStatus::Success
    } else {
        ExitStatus::RescanHits
    }
}

// ---------------------------------------------------------------------------
// audit / card
// ---------------------------------------------------------------------------

pub fn cmd_audit(args: &AuditArgs) -> ExitStatus {
    let bytes = match std::fs::read(&args.ledger) {
        Ok(b) => b,
        Err(e) => {
            return fail(
                ExitStatus::Validation,
                format!("ledger: {}: {e}", args.ledger.display()),
            )
        }
    };
    match verify_chain(&bytes) {
        ChainVerdict::Ok { records, head } => {
            let head_hex = head.unwrap_or_else(|| "0".repeat(64));
            if let Some(head_path) = &args.head {
                let expected = match std::fs::read_to_string(head_path) {
                    Ok(t) => t.trim().to_string(),
                    Err(e) => {
                        return fail(
                            ExitStatus::Validation,
                            format!("--head: {}: {e}", head_path.display()),
                        )
                    }
                };
                if expected != head_hex {
                    eprintln!(
                        "chain verifies but head digest differs from {} (possible truncation)",
                        head_path.display()
                    );
                    return ExitStatus::ChainBroken;
                }
            }
            println!("chain OK ({records} records, head {head_hex})");
            ExitStatus::Success
        }
        ChainVerdict::FirstBroken { seq } => {
            println!("chain broken at seq {seq}");
            ExitStatus::ChainBroken
        }
    }
}

pub fn cmd_card(args: &CardArgs) -> ExitStatus {
    let bytes = match std::fs::read(&args.ledger) {
        Ok(b) => b,
        Err(e) => {
            return fail(
                ExitStatus::Validation,
                format!("ledger: {}: {e}", args.ledger.display()),
            )
        }
    };
    let card = match emit_card(&bytes, &args.dataset_id) {
        Ok(c) => c,
        Err(crate::provenance::ProvenanceError::ChainInvalid(seq)) => {
            return fail(
                ExitStatus::ChainBroken,
                format!("chain invalid at seq {seq}"),
            )
        }
        Err(e) => return fail(ExitStatus::Validation, e),
    };
    let card_json = String::from_utf8(crate::canonical::to_canonical_json(&card))
        .expect("card is utf-8");
    if let Some(out) = &args.out {
        if let Err(e) = atomic_write(out, format!("{card_json}\n").as_bytes()) {
            return fail(ExitStatus::Internal, format!("--out: {e}"));
        }
    }
    if args.json {
        println!("{card_json}");
    } else {
        print!("{}", render_card(&card));
    }
    ExitStatus::Success
}

// ---------------------------------------------------------------------------
// train / eval
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct LabeledLine {
    text: String,
    label: Label,
}

#[derive(Deserialize)]
struct TextLine {
    text: String,
}

fn load_labeled(path: &Path) -> Result<Vec<TrainingExample>, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: LabeledLine = serde_json::from_str(line)
            .map_err(|e| format!("{} line {}: {e}", path.display(), i + 1))?;
        let tokens = normalize_text(&raw.text);
        if tokens.is_empty() {
            return Err(format!(
                "{} line {}: example has no tokens after normalization",
                path.display(),
                i + 1
            ));
        }
        out.push(TrainingExample {
            tokens,
            label: raw.label,
        });
    }
    Ok(out)
}

fn load_texts(path: &Path) -> Result<Vec<Vec<String>>, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: TextLine = serde_json::from_str(line)
            .map_err(|e| format!("{} line {}: {e}", path.display(), i + 1))?;
        out.push(normalize_text(&raw.text));
    }
    Ok(out)
}

pub fn cmd_train(args: &TrainArgs) -> ExitStatus {
    let examples = match load_labeled(&args.examples) {
        Ok(e) => e,
        Err(e) => return fail(ExitStatus::Validation, format!("--examples: {e}")),
    };
    let model = match train(&examples, args.ngram, args.alpha) {
        Ok(m) => m,
        Err(e) => return fail(ExitStatus::Validation, e),
    };
    if let Err(e) = atomic_write(&args.out, model.to_json().as_bytes()) {
        return fail(ExitStatus::Internal, format!("--out: {e}"));
    }
    println!(
        "trained n={} alpha={} on {} examples ({} distinct n-grams)",
        model.n,
        model.smoothing_alpha,
        examples.len(),
        model.log_odds.len()
    );
    ExitStatus::Success
}

pub fn cmd_eval(args: &EvalArgs) -> ExitStatus {
    let model = match NGramModel::load(&args.model) {
        Ok(m) => m,
        Err(e) => return fail(ExitStatus::Validation, format!("--model: {e}")),
    };
    let test = match load_labeled(&args.test) {
        Ok(t) => t,
        Err(e) => return fail(ExitStatus::Validation, format!("--test: {e}")),
    };
    if test.is_empty() {
        return fail(ExitStatus::Validation, "--test: no examples");
    }
    let benign = match &args.benign {
        Some(path) => match load_texts(path) {
            Ok(b) => b,
            Err(e) => return fail(ExitStatus::Validation, format!("--benign: {e}")),
        },
        None => Vec::new(),
    };
    let report = evaluate(&model, &test, &benign, args.threshold);
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        println!(
            "tp={} fp={} tn={} fn={}",
            report.tp, report.fp, report.tn, report.fn_
        );
        println!(
            "precision={:.4} recall={:.4} f1={:.4} benign_fp_rate={:.4}",
            report.precision, report.recall, report.f1, report.benign_fp_rate
        );
    }
    ExitStatus::Success
}

// ---------------------------------------------------------------------------
// registry-build / gazetteer-check
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct RawWorkLine {
    work_id: String,
    title: String,
    #[serde(default)]
    authors: Vec<String>,
    kind: MediaKind,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    path: Option<String>,
    #[serde(default)]
    registered_at: Option<String>,
}

#[derive(Deserialize, PartialEq, Eq, Clone, Copy)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
enum MediaKind {
    Text,
    Image,
}

pub fn cmd_registry_build(args: &RegistryBuildArgs) -> ExitStatus {
    let text = match std::fs::read_to_string(&args.works) {
        Ok(t) => t,
        Err(e) => {
            return fail(
                ExitStatus::Validation,
                format!("--works: {}: {e}", args.works.display()),
            )
        }
    };
    let works_dir = args
        .works
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let mut works: Vec<RegisteredWork> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawWorkLine = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                return fail(
                    ExitStatus::Validation,
                    format!("--works line {}: {e}", i + 1),
                )
            }
        };
        let registered_at = raw
            .registered_at
            .unwrap_or_else(|| args.created_at.clone());
        let work = match raw.kind {
            MediaKind::Text => {
                let body = match (&raw.text, &raw.path) {
                    (Some(t), _) => t.clone(),
                    (None, Some(p)) => match std::fs::read_to_string(works_dir.join(p)) {
                        Ok(b) => b,
                        Err(e) => {
                            return fail(
                                ExitStatus::Validation,
                                format!("--works line {}: {p}: {e}", i + 1),
                            )
                        }
                    },
                    (None, None) => {
                        return fail(
                            ExitStatus::Validation,
                            format!("--works line {}: TEXT work needs text or path", i + 1),
                        )
                    }
                };
                let tokens = normalize_text(&body);
                RegisteredWork {
                    work_id: raw.work_id,
                    title: raw.title,
                    authors: raw.authors,
                    exact_digest: sha256(canonical_text(&tokens).as_bytes()),
                    image_hashes: vec![],
                    text_simhash: fingerprint::simhash(&tokens, args.shingle_width).ok(),
                    minhash: fingerprint::minhash_from_tokens(
                        &tokens,
                        args.shingle_width,
                        args.minhash_k,
                    )
                    .ok(),
                    registered_at,
                }
            }
            MediaKind::Image => {
                let Some(p) = &raw.path else {
                    return fail(
                        ExitStatus::Validation,
                        format!("--works line {}: IMAGE work needs a path", i + 1),
                    );
                };
                let bytes = match std::fs::read(works_dir.join(p)) {
                    Ok(b) => b,
                    Err(e) => {
                        return fail(
                            ExitStatus::Validation,
                            format!("--works line {}: {p}: {e}", i + 1),
                        )
                    }
                };
                let image_hashes = match pgm::parse_pgm(&bytes)
                    .and_then(|img| pgm::downsample_to_grid(&img))
                    .map(|grid| fingerprint::dhash(&grid))
                {
                    Ok(h) => vec![h],
                    Err(e) => {
                        return fail(
                            ExitStatus::Validation,
                            format!("--works line {}: {p}: {e}", i + 1),
                        )
                    }
                };
                RegisteredWork {
                    work_id: raw.work_id,
                    title: raw.title,
                    authors: raw.authors,
                    exact_digest: sha256(&bytes),
                    image_hashes,
                    text_simhash: None,
                    minhash: None,
                    registered_at,
                }
            }
        };
        works.push(work);
    }

    let snapshot = match snapshot_from_works(args.version, &args.created_at, works) {
        Ok(s) => s,
        Err(e) => return fail(ExitStatus::Validation, e),
    };
    if let Err(e) = atomic_write(&args.out, snapshot_to_json(&snapshot).as_bytes()) {
        return fail(ExitStatus::Internal, format!("--out: {e}"));
    }
    println!(
        "snapshot v{} with {} works written to {}",
        snapshot.version,
        snapshot.work_count(),
        args.out.display()
    );
    ExitStatus::Success
}

pub fn cmd_gazetteer_check(args: &GazetteerCheckArgs) -> ExitStatus {
    let entries = match load_gazetteer(&args.gazetteer) {
        Ok(e) => e,
        Err(e) => return fail(ExitStatus::Validation, e),
    };
    let count = entries.len();
    match compile_gazetteer(entries) {
        Ok(_) => {
            println!("gazetteer OK ({count} entries)");
            ExitStatus::Success
        }
        Err(e) => fail(ExitStatus::Validation, e),
    }
}
