//! Gazetteer-based entity flagging.
//!
//! Surfaces (author names, publication titles, publisher identifiers, work
//! titles) are matched as whole token sequences against the canonical token
//! view. A flag routes a document to deeper stages; it is never grounds for
//! rejection on its own — a text can discuss a publication without
//! containing any of its content.

use std::collections::HashSet;
use std::path::Path;

use aho_corasick::{AhoCorasick, MatchKind};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::normalize_text;
use crate::verdict::{ReasonCode, Stage, StageVerdict, Verdict};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EntityError {
    #[error("empty gazetteer")]
    EmptyGazetteer,
    #[error("duplicate entry: ({surface}, {class:?})")]
    DuplicateEntry { surface: String, class: EntityClass },
    #[error("gazetteer entry has empty surface after normalization")]
    EmptySurface,
    #[error("gazetteer schema error at line {line}: {message}")]
    Schema { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntityClass {
    Author,
    Publication,
    Publisher,
    WorkTitle,
}

/// One gazetteer surface. The surface is stored normalized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub surface: String,
    pub class: EntityClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub work_id: Option<String>,
}

impl GazetteerEntry {
    /// Normalize an arbitrary surface string into an entry.
    pub fn new(
        surface: &str,
        class: EntityClass,
        work_id: Option<String>,
    ) -> Result<Self, EntityError> {
        let tokens = normalize_text(surface);
        if tokens.is_empty() {
            return Err(EntityError::EmptySurface);
        }
        Ok(GazetteerEntry {
            surface: tokens.join(" "),
            class,
            work_id,
        })
    }
}

/// A matched span. `end_token` is exclusive; the flagged tokens joined with
/// spaces equal the entry surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityFlag {
    pub start_token: usize,
    pub end_token: usize,
    pub entry: GazetteerEntry,
}

/// Compiled multi-pattern matcher over gazetteer surfaces.
#[derive(Debug)]
pub struct GazetteerMatcher {
    entries: Vec<GazetteerEntry>,
    /// Token counts per entry, parallel to `entries`.
    token_lens: Vec<usize>,
    automaton: AhoCorasick,
}

/// Build the matcher. Surfaces must already be normalized (as produced by
/// [`GazetteerEntry::new`] or the gazetteer loader); duplicates per
/// (surface, class) are rejected.
pub fn compile_gazetteer(entries: Vec<GazetteerEntry>) -> Result<GazetteerMatcher, EntityError> {
    if entries.is_empty() {
        return Err(EntityError::EmptyGazetteer);
    }
    let mut seen: HashSet<(String, EntityClass)> = HashSet::new();
    for e in &entries {
        if e.surface.is_empty() {
            return Err(EntityError::EmptySurface);
        }
        if !seen.insert((e.surface.clone(), e.class)) {
            return Err(EntityError::DuplicateEntry {
                surface: e.surface.clone(),
                class: e.class,
            });
        }
    }
    let token_lens = entries
        .iter()
        .map(|e| e.surface.split(' ').count())
        .collect();
    let automaton = AhoCorasick::builder()
        .match_kind(MatchKind::Standard)
        .build(entries.iter().map(|e| e.surface.as_bytes()))
        .map_err(|e| EntityError::Schema {
            line: 0,
            message: format!("automaton build failed: {e}"),
        })?;
    Ok(GazetteerMatcher {
        entries,
        token_lens,
        automaton,
    })
}

impl GazetteerMatcher {
    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    /// Report every whole-token-boundary occurrence of every surface,
    /// sorted by start token (ties by span length, then surface).
    /// Overlapping matches of different entries are all reported.
    pub fn scan_text(&self, tokens: &[String]) -> Vec<EntityFlag> {
        if tokens.is_empty() {
            return Vec::new();
        }
        // Join tokens with single spaces and keep each token's byte offset
        // so automaton matches can be checked against token boundaries.
        let mut joined = String::new();
        let mut starts = Vec::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            if i > 0 {
                joined.push(' ');
            }
            starts.push(joined.len());
            joined.push_str(tok);
        }

        let mut flags = Vec::new();
        for m in self.automaton.find_overlapping_iter(&joined) {
            let start_ok = m.start() == 0 || joined.as_bytes()[m.start() - 1] == b' ';
            let end_ok = m.end() == joined.len() || joined.as_bytes()[m.end()] == b' ';
            if !start_ok || !end_ok {
                continue;
            }
            let entry_idx = m.pattern().as_usize();
            let start_token = starts
                .binary_search(&m.start())
                .expect("boundary-aligned match starts at a token offset");
            flags.push(EntityFlag {
                start_token,
                end_token: start_token + self.token_lens[entry_idx],
                entry: self.entries[entry_idx].clone(),
            });
        }
        flags.sort_by(|a, b| {
            a.start_token
                .cmp(&b.start_token)
                .then(a.end_token.cmp(&b.end_token))
                .then_with(|| a.entry.surface.cmp(&b.entry.surface))
        });
        flags
    }
}

/// Route on flag count. At or above the threshold the document is
/// quarantined for elevated downstream scrutiny; this stage can never
/// reject.
pub fn flag_verdict(flags: &[EntityFlag], threshold: usize) -> StageVerdict {
    assert!(threshold >= 1, "threshold must be at least 1");
    let evidence = flag_evidence(flags);
    if flags.len() >= threshold {
        StageVerdict::new(Stage::Entity, Verdict::Quarantine, ReasonCode::EntityFlags, evidence)
    } else if flags.is_empty() {
        StageVerdict::new(Stage::Entity, Verdict::Admit, ReasonCode::NoFlags, evidence)
    } else {
        StageVerdict::new(Stage::Entity, Verdict::Admit, ReasonCode::EntityFlags, evidence)
    }
}

/// Evidence string carrying the flag count and the sorted, de-duplicated
/// linked work ids: `flags=N` or `flags=N works=a,b`. Parsed back by the
/// rescan path.
pub fn flag_evidence(flags: &[EntityFlag]) -> String {
    let mut works: Vec<&str> = flags
        .iter()
        .filter_map(|f| f.entry.work_id.as_deref())
        .collect();
    works.sort_unstable();
    works.dedup();
    if works.is_empty() {
        format!("flags={}", flags.len())
    } else {
        format!("flags={} works={}", flags.len(), works.join(","))
    }
}

/// Inverse of [`flag_evidence`]: recover linked work ids.
pub fn parse_flag_evidence(evidence: &str) -> Vec<String> {
    evidence
        .split_whitespace()
        .find_map(|part| part.strip_prefix("works="))
        .map(|list| list.split(',').map(str::to_string).collect())
        .unwrap_or_default()
}

/// Load a gazetteer file: JSONL `{surface, class, work_id?}`. Surfaces are
/// normalized on load; duplicates and empty surfaces are schema errors.
pub fn load_gazetteer(path: &Path) -> Result<Vec<GazetteerEntry>, EntityError> {
    let text = std::fs::read_to_string(path).map_err(|e| EntityError::Schema {
        line: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    parse_gazetteer(&text)
}

pub fn parse_gazetteer(text: &str) -> Result<Vec<GazetteerEntry>, EntityError> {
    #[derive(Deserialize)]
    struct RawEntry {
        surface: String,
        class: EntityClass,
        #[serde(default)]
        work_id: Option<String>,
    }

    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawEntry = serde_json::from_str(line).map_err(|e| EntityError::Schema {
            line: i + 1,
            message: e.to_string(),
        })?;
        if let Some(id) = &raw.work_id {
            validate_work_id(id).map_err(|message| EntityError::Schema {
                line: i + 1,
                message,
            })?;
        }
        let entry =
            GazetteerEntry::new(&raw.surface, raw.class, raw.work_id).map_err(|e| {
                EntityError::Schema {
                    line: i + 1,
                    message: e.to_string(),
                }
            })?;
        entries.push(entry);
    }
    Ok(entries)
}

/// Work ids travel inside comma-separated evidence strings, so their
/// character set is restricted at the file boundary.
pub fn validate_work_id(id: &str) -> Result<(), String> {
    if id.is_empty() {
        return Err("work_id must be non-empty".into());
    }
    if !id
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | ':' | '-'))
    {
        return Err(format!(
            "work_id {id:?} may only contain ASCII alphanumerics and . _ : -"
        ));
    }
    Ok(())
}
