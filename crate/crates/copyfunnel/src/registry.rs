//! Versioned registry of protected works and document cross-referencing.
//!
//! A snapshot is an immutable, versioned set of works carrying exact
//! digests, perceptual fingerprints, and linked entity ids. Documents are
//! cross-referenced by every available identity; re-scanning an admitted
//! corpus against a newer snapshot covers the window between publication
//! and registration.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::parse_hex32;
use crate::fingerprint::{
    estimate_jaccard, FingerprintIndex, ImageHash64, MinHashSignature, TextSimHash64,
};
use crate::verdict::Verdict;

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("snapshot schema error: {0}")]
    Schema(String),
    #[error("malformed digest for work {work_id}: {message}")]
    DigestMalformed { work_id: String, message: String },
    #[error("snapshot versions out of order: old {old} vs new {new}")]
    VersionOrder { old: u64, new: u64 },
    #[error("manifest recorded snapshot version {manifest}, expected {snapshot}")]
    VersionMismatch { manifest: u64, snapshot: u64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One registered work.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisteredWork {
    pub work_id: String,
    pub title: String,
    pub authors: Vec<String>,
    pub exact_digest: [u8; 32],
    pub image_hashes: Vec<ImageHash64>,
    pub text_simhash: Option<TextSimHash64>,
    pub minhash: Option<MinHashSignature>,
    pub registered_at: String,
}

/// Immutable snapshot with prebuilt lookup structures.
#[derive(Debug)]
pub struct RegistrySnapshot {
    pub version: u64,
    pub created_at: String,
    works: Vec<RegisteredWork>,
    by_digest: HashMap<[u8; 32], Vec<String>>,
    image_index: FingerprintIndex,
    simhash_index: FingerprintIndex,
    work_ids: HashSet<String>,
    minhash_works: Vec<(String, MinHashSignature)>,
}

impl RegistrySnapshot {
    pub fn works(&self) -> &[RegisteredWork] {
        &self.works
    }

    pub fn contains_work(&self, work_id: &str) -> bool {
        self.work_ids.contains(work_id)
    }

    pub fn work_count(&self) -> usize {
        self.works.len()
    }
}

/// Build a snapshot from works, validating ids and constructing indexes.
pub fn snapshot_from_works(
    version: u64,
    created_at: &str,
    works: Vec<RegisteredWork>,
) -> Result<RegistrySnapshot, RegistryError> {
    let mut work_ids = HashSet::new();
    for w in &works {
        crate::entity::validate_work_id(&w.work_id)
            .map_err(|m| RegistryError::Schema(format!("work {:?}: {m}", w.work_id)))?;
        if !work_ids.insert(w.work_id.clone()) {
            return Err(RegistryError::Schema(format!(
                "duplicate work_id {:?}",
                w.work_id
            )));
        }
    }
    let mut by_digest: HashMap<[u8; 32], Vec<String>> = HashMap::new();
    let mut image_index = FingerprintIndex::new();
    let mut simhash_index = FingerprintIndex::new();
    let mut minhash_works = Vec::new();
    for w in &works {
        by_digest
            .entry(w.exact_digest)
            .or_default()
            .push(w.work_id.clone());
        for h in &w.image_hashes {
            image_index.insert(h.bits, &w.work_id);
        }
        if let Some(sh) = &w.text_simhash {
            simhash_index.insert(sh.bits, &w.work_id);
        }
        if let Some(mh) = &w.minhash {
            minhash_works.push((w.work_id.clone(), mh.clone()));
        }
    }
    for ids in by_digest.values_mut() {
        ids.sort();
    }
    Ok(RegistrySnapshot {
        version,
        created_at: created_at.to_string(),
        works,
        by_digest,
        image_index,
        simhash_index,
        work_ids,
        minhash_works,
    })
}

// ---------------------------------------------------------------------------
// snapshot file format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SnapshotFile {
    version: u64,
    created_at: String,
    works: Vec<WorkFile>,
}

#[derive(Serialize, Deserialize)]
struct WorkFile {
    work_id: String,
    title: String,
    #[serde(default)]
    authors: Vec<String>,
    exact_digest: String,
    #[serde(default)]
    image_hashes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text_simhash: Option<SimHashFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    minhash: Option<MinHashFile>,
    #[serde(default)]
    registered_at: String,
}

#[derive(Serialize, Deserialize)]
struct SimHashFile {
    bits_hex: String,
    shingle_width: usize,
}

#[derive(Serialize, Deserialize)]
struct MinHashFile {
    mins_hex: Vec<String>,
}

fn parse_hex64(s: &str) -> Result<u64, String> {
    if s.len() != 16 {
        return Err(format!("expected 16 hex chars, got {}", s.len()));
    }
    u64::from_str_radix(s, 16).map_err(|e| e.to_string())
}

/// Parse and index a snapshot file (JSON `{version, created_at, works}`).
pub fn parse_snapshot(text: &str) -> Result<RegistrySnapshot, RegistryError> {
    let file: SnapshotFile = serde_json::from_str(text)
        .map_err(|e| RegistryError::Schema(format!("line {}: {e}", e.line())))?;
    let mut works = Vec::with_capacity(file.works.len());
    for w in file.works {
        let exact_digest =
            parse_hex32(&w.exact_digest).map_err(|message| RegistryError::DigestMalformed {
                work_id: w.work_id.clone(),
                message,
            })?;
        let mut image_hashes = Vec::with_capacity(w.image_hashes.len());
        for h in &w.image_hashes {
            image_hashes.push(ImageHash64 {
                bits: parse_hex64(h).map_err(|message| RegistryError::DigestMalformed {
                    work_id: w.work_id.clone(),
                    message,
                })?,
            });
        }
        let text_simhash = match &w.text_simhash {
            Some(sh) => Some(TextSimHash64 {
                bits: parse_hex64(&sh.bits_hex).map_err(|message| {
                    RegistryError::DigestMalformed {
                        work_id: w.work_id.clone(),
                        message,
                    }
                })?,
                shingle_width: sh.shingle_width,
            }),
            None => None,
        };
        let minhash = match &w.minhash {
            Some(mh) => {
                let mut mins = Vec::with_capacity(mh.mins_hex.len());
                for m in &mh.mins_hex {
                    mins.push(parse_hex64(m).map_err(|message| {
                        RegistryError::DigestMalformed {
                            work_id: w.work_id.clone(),
                            message,
                        }
                    })?);
                }
                Some(MinHashSignature { mins })
            }
            None => None,
        };
        works.push(RegisteredWork {
            work_id: w.work_id,
            title: w.title,
            authors: w.authors,
            exact_digest,
            image_hashes,
            text_simhash,
            minhash,
            registered_at: w.registered_at,
        });
    }
    snapshot_from_works(file.version, &file.created_at, works)
}

pub fn load_snapshot(path: &Path) -> Result<RegistrySnapshot, RegistryError> {
    let text = std::fs::read_to_string(path)?;
    parse_snapshot(&text)
}

/// Serialize a snapshot back to its file form (hex fingerprints, sorted by
/// work_id for stable output).
pub fn snapshot_to_json(snapshot: &RegistrySnapshot) -> String {
    let mut works: Vec<&RegisteredWork> = snapshot.works.iter().collect();
    works.sort_by(|a, b| a.work_id.cmp(&b.work_id));
    let file = SnapshotFile {
        version: snapshot.version,
        created_at: snapshot.created_at.clone(),
        works: works
            .into_iter()
            .map(|w| WorkFile {
                work_id: w.work_id.clone(),
                title: w.title.clone(),
                authors: w.authors.clone(),
                exact_digest: hex::encode(w.exact_digest),
                image_hashes: w.image_hashes.iter().map(|h| h.hex()).collect(),
                text_simhash: w.text_simhash.as_ref().map(|sh| SimHashFile {
                    bits_hex: sh.hex(),
                    shingle_width: sh.shingle_width,
                }),
                minhash: w.minhash.as_ref().map(|mh| MinHashFile {
                    mins_hex: mh.mins.iter().map(|m| format!("{m:016x}")).collect(),
                }),
                registered_at: w.registered_at.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("snapshot serializes")
}

// ---------------------------------------------------------------------------
// cross-referencing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MatchKind {
    ExactDigest,
    ImagePerceptual,
    TextSimhash,
    MinhashJaccard,
    EntityLink,
}

impl MatchKind {
    fn rank(self) -> u8 {
        match self {
            MatchKind::ExactDigest => 0,
            MatchKind::ImagePerceptual => 1,
            MatchKind::TextSimhash => 2,
            MatchKind::MinhashJaccard => 3,
            MatchKind::EntityLink => 4,
        }
    }

    /// Fingerprint-backed kinds reject at the xref stage; entity links only
    /// flag.
    pub fn is_rejecting(self) -> bool {
        self != MatchKind::EntityLink
    }
}

/// One cross-reference hit. Strength is 1.0 for exact digests,
/// `1 - distance/radius` for perceptual matches, the estimated Jaccard for
/// MinHash, and a fixed 0.5 for entity links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XrefHit {
    pub work_id: String,
    pub match_kind: MatchKind,
    pub strength: f64,
}

/// Radii and thresholds in effect for one xref call.
#[derive(Debug, Clone, Copy)]
pub struct XrefParams {
    pub image_radius: u32,
    pub simhash_radius: u32,
    pub minhash_jaccard_threshold: f64,
}

/// Everything the xref stage knows about a document.
#[derive(Debug, Clone, Default)]
pub struct DocFingerprints {
    pub exact_digest: Option<[u8; 32]>,
    pub image_hash: Option<ImageHash64>,
    pub text_simhash: Option<TextSimHash64>,
    pub minhash: Option<MinHashSignature>,
    pub flagged_work_ids: Vec<String>,
}

fn perceptual_strength(distance: u32, radius: u32) -> f64 {
    if radius == 0 {
        1.0
    } else {
        1.0 - f64::from(distance) / f64::from(radius)
    }
}

/// Cross-reference one document against a snapshot. Hits are unioned over
/// match kinds (strongest per work and kind) and ordered strongest first.
pub fn xref_document(
    doc: &DocFingerprints,
    snapshot: &RegistrySnapshot,
    params: &XrefParams,
) -> Vec<XrefHit> {
    let mut best: HashMap<(String, MatchKind), f64> = HashMap::new();
    let mut consider = |work_id: &str, kind: MatchKind, strength: f64| {
        let key = (work_id.to_string(), kind);
        let entry = best.entry(key).or_insert(f64::NEG_INFINITY);
        if strength > *entry {
            *entry = strength;
        }
    };

    if let Some(digest) = &doc.exact_digest {
        if let Some(ids) = snapshot.by_digest.get(digest) {
            for id in ids {
                consider(id, MatchKind::ExactDigest, 1.0);
            }
        }
    }
    if let Some(image) = &doc.image_hash {
        for (id, d) in snapshot.image_index.query_within(image.bits, params.image_radius) {
            consider(&id, MatchKind::ImagePerceptual, perceptual_strength(d, params.image_radius));
        }
    }
    if let Some(sim) = &doc.text_simhash {
        for (id, d) in snapshot.simhash_index.query_within(sim.bits, params.simhash_radius) {
            consider(&id, MatchKind::TextSimhash, perceptual_strength(d, params.simhash_radius));
        }
    }
    if let Some(mh) = &doc.minhash {
        for (id, registered) in &snapshot.minhash_works {
            if registered.k() != mh.k() {
                continue;
            }
            let est = estimate_jaccard(mh, registered);
            if est >= params.minhash_jaccard_threshold {
                consider(id, MatchKind::MinhashJaccard, est);
            }
        }
    }
    for flagged in &doc.flagged_work_ids {
        if snapshot.contains_work(flagged) {
            consider(flagged, MatchKind::EntityLink, 0.5);
        }
    }

    let mut hits: Vec<XrefHit> = best
        .into_iter()
        .map(|((work_id, match_kind), strength)| XrefHit {
            work_id,
            match_kind,
            strength,
        })
        .collect();
    hits.sort_by(|a, b| {
        b.strength
            .partial_cmp(&a.strength)
            .expect("strengths are finite")
            .then(a.match_kind.rank().cmp(&b.match_kind.rank()))
            .then_with(|| a.work_id.cmp(&b.work_id))
    });
    hits
}

/// Work ids added and removed between two snapshots, sorted.
pub fn diff_snapshots(
    old: &RegistrySnapshot,
    new: &RegistrySnapshot,
) -> Result<(Vec<String>, Vec<String>), RegistryError> {
    if old.version >= new.version {
        return Err(RegistryError::VersionOrder {
            old: old.version,
            new: new.version,
        });
    }
    let mut added: Vec<String> = new
        .work_ids
        .difference(&old.work_ids)
        .cloned()
        .collect();
    let mut removed: Vec<String> = old
        .work_ids
        .difference(&new.work_ids)
        .cloned()
        .collect();
    added.sort();
    removed.sort();
    Ok((added, removed))
}

// ---------------------------------------------------------------------------
// admitted manifest and rescans
// ---------------------------------------------------------------------------

/// One line of the admitted manifest: the document, the snapshot version it
/// was admitted under, and the digest of its ledger record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub doc_id: String,
    pub final_verdict: Verdict,
    pub snapshot_version: u64,
    pub provenance_digest: String,
}

pub fn manifest_to_jsonl(entries: &[ManifestEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&serde_json::to_string(e).expect("manifest entry serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, RegistryError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: ManifestEntry = serde_json::from_str(line)
            .map_err(|e| RegistryError::Schema(format!("manifest line {}: {e}", i + 1)))?;
        out.push(entry);
    }
    Ok(out)
}

pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>, RegistryError> {
    let text = std::fs::read_to_string(path)?;
    parse_manifest(&text)
}

/// Re-run xref for every admitted document against only the works added
/// between `old` and `new`; returns newly hit documents sorted by doc_id.
///
/// `doc_prints` maps doc_id to the fingerprints recovered from the ledger.
pub fn rescan_admitted(
    manifest: &[ManifestEntry],
    doc_prints: &HashMap<String, DocFingerprints>,
    old: &RegistrySnapshot,
    new: &RegistrySnapshot,
    params: &XrefParams,
) -> Result<Vec<(String, Vec<XrefHit>)>, RegistryError> {
    for entry in manifest {
        if entry.snapshot_version != old.version {
            return Err(RegistryError::VersionMismatch {
                manifest: entry.snapshot_version,
                snapshot: old.version,
            });
        }
    }
    let (added_ids, _removed) = diff_snapshots(old, new)?;
    if added_ids.is_empty() {
        return Ok(Vec::new());
    }
    let added_set: HashSet<&String> = added_ids.iter().collect();
    let added_works: Vec<RegisteredWork> = new
        .works
        .iter()
        .filter(|w| added_set.contains(&w.work_id))
        .cloned()
        .collect();
    let added_snapshot = snapshot_from_works(new.version, &new.created_at, added_works)?;

    let mut results = Vec::new();
    for entry in manifest {
        if entry.final_verdict != Verdict::Admit {
            continue;
        }
        let Some(prints) = doc_prints.get(&entry.doc_id) else {
            return Err(RegistryError::Schema(format!(
                "document {:?} from the manifest has no ledger fingerprints",
                entry.doc_id
            )));
        };
        let hits = xref_document(prints, &added_snapshot, params);
        if !hits.is_empty() {
            results.push((entry.doc_id.clone(), hits));
        }
    }
    results.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(results)
}
