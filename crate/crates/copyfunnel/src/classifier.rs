//! Retrainable text scorer: smoothed log-odds over n-gram hashes, with a
//! synthetic-corpus generator and an evaluation harness.
//!
//! The model is a pure function of its training multiset: per-n-gram
//! log-odds with additive smoothing, class prior from example counts.
//! Scores are additive and unknown n-grams contribute nothing, which keeps
//! every reported number reproducible by hand.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hashing::shingle_hash;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("class {0:?} has no training examples")]
    ClassMissing(Label),
    #[error("insufficient text: need at least {need} tokens, got {got}")]
    InsufficientText { need: usize, got: usize },
    #[error("mix_ratio {0} outside (0, 1]")]
    BadRatio(f64),
    #[error("model file error: {0}")]
    ModelFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    ProtectedLike,
    PublicLike,
}

/// One labeled token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub tokens: Vec<String>,
    pub label: Label,
}

/// Smoothed log-odds n-gram model. Positive scores lean PROTECTED_LIKE.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    pub n: usize,
    pub smoothing_alpha: f64,
    pub prior_log_odds: f64,
    pub vocabulary_size: usize,
    pub log_odds: HashMap<u64, f64>,
}

/// Train on a labeled corpus.
///
/// Per n-gram g: `log((c_protected(g)+a)/(T_protected+a·V)) -
/// log((c_public(g)+a)/(T_public+a·V))` where T are per-class n-gram totals
/// and V is the joint distinct n-gram count. The prior is
/// `log(N_protected/N_public)` over example counts.
pub fn train(
    examples: &[TrainingExample],
    n: usize,
    alpha: f64,
) -> Result<NGramModel, ClassifierError> {
    assert!(n > 0, "n must be positive");
    assert!(alpha > 0.0 && alpha.is_finite(), "alpha must be positive");

    let mut protected_counts: HashMap<u64, u64> = HashMap::new();
    let mut public_counts: HashMap<u64, u64> = HashMap::new();
    let mut protected_examples = 0u64;
    let mut public_examples = 0u64;

    for ex in examples {
        let (counts, seen) = match ex.label {
            Label::ProtectedLike => (&mut protected_counts, &mut protected_examples),
            Label::PublicLike => (&mut public_counts, &mut public_examples),
        };
        *seen += 1;
        if ex.tokens.len() >= n {
            for gram in ex.tokens.windows(n) {
                *counts.entry(shingle_hash(gram)).or_insert(0) += 1;
            }
        }
    }

    if protected_examples == 0 {
        return Err(ClassifierError::ClassMissing(Label::ProtectedLike));
    }
    if public_examples == 0 {
        return Err(ClassifierError::ClassMissing(Label::PublicLike));
    }

    let total_protected: u64 = protected_counts.values().sum();
    let total_public: u64 = public_counts.values().sum();
    let vocabulary: std::collections::HashSet<u64> = protected_counts
        .keys()
        .chain(public_counts.keys())
        .copied()
        .collect();
    let v = vocabulary.len().max(1);

    let denom_protected = total_protected as f64 + alpha * v as f64;
    let denom_public = total_public as f64 + alpha * v as f64;
    let mut log_odds = HashMap::with_capacity(vocabulary.len());
    for gram in vocabulary {
        let cp = *protected_counts.get(&gram).unwrap_or(&0) as f64;
        let cq = *public_counts.get(&gram).unwrap_or(&0) as f64;
        let lo = ((cp + alpha) / denom_protected).ln() - ((cq + alpha) / denom_public).ln();
        log_odds.insert(gram, lo);
    }

    Ok(NGramModel {
        n,
        smoothing_alpha: alpha,
        prior_log_odds: (protected_examples as f64 / public_examples as f64).ln(),
        vocabulary_size: v,
        log_odds,
    })
}

impl NGramModel {
    /// Log-odds score of a token sequence; positive means PROTECTED_LIKE.
    /// Unknown n-grams contribute zero.
    pub fn score<S: AsRef<str>>(&self, tokens: &[S]) -> Result<f64, ClassifierError> {
        if tokens.len() < self.n {
            return Err(ClassifierError::InsufficientText {
                need: self.n,
                got: tokens.len(),
            });
        }
        Ok(self.score_total(tokens))
    }

    /// Total scoring used by the evaluation harness and the pipeline: a
    /// sequence too short to contain any n-gram scores prior only.
    pub fn score_total<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        let mut score = self.prior_log_odds;
        if tokens.len() >= self.n {
            for gram in tokens.windows(self.n) {
                if let Some(lo) = self.log_odds.get(&shingle_hash(gram)) {
                    score += lo;
                }
            }
        }
        score
    }
}

/// Synthetic corpus: PROTECTED_LIKE examples splice excerpt tokens into
/// carriers over a contiguous window covering `mix_ratio` of the carrier;
/// PUBLIC_LIKE examples are the untouched carriers. Deterministic per seed.
pub fn generate_synthetic(
    registry_excerpts: &[Vec<String>],
    carrier_texts: &[Vec<String>],
    mix_ratio: f64,
    seed: u64,
) -> Result<Vec<TrainingExample>, ClassifierError> {
    if !(mix_ratio > 0.0 && mix_ratio <= 1.0) {
        return Err(ClassifierError::BadRatio(mix_ratio));
    }
    assert!(!registry_excerpts.is_empty(), "need at least one excerpt");
    assert!(!carrier_texts.is_empty(), "need at least one carrier");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(carrier_texts.len() * 2);
    for carrier in carrier_texts {
        let len = carrier.len().max(1);
        let splice_len = ((mix_ratio * len as f64).ceil() as usize).clamp(1, len);
        let excerpt = &registry_excerpts[rng.random_range(0..registry_excerpts.len())];
        let start = rng.random_range(0..=len - splice_len);

        let mut tokens = Vec::with_capacity(len);
        tokens.extend_from_slice(&carrier[..start.min(carrier.len())]);
        for i in 0..splice_len {
            tokens.push(excerpt[i % excerpt.len()].clone());
        }
        if start + splice_len < carrier.len() {
            tokens.extend_from_slice(&carrier[start + splice_len..]);
        }
        out.push(TrainingExample {
            tokens,
            label: Label::ProtectedLike,
        });
        out.push(TrainingExample {
            tokens: carrier.clone(),
            label: Label::PublicLike,
        });
    }
    Ok(out)
}

/// Confusion counts and derived metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub benign_fp_rate: f64,
}

impl EvalReport {
    /// Derive metrics from raw counts. Zero denominators define the metric
    /// as zero.
    pub fn from_counts(tp: u64, fp: u64, tn: u64, fn_: u64, benign_fp: u64, benign_total: u64) -> Self {
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        EvalReport {
            tp,
            fp,
            tn,
            fn_,
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
            f1: ratio(2 * tp, 2 * tp + fp + fn_),
            benign_fp_rate: ratio(benign_fp, benign_total),
        }
    }
}

/// Score a test set and a disjoint benign corpus at a threshold.
/// A sequence is predicted PROTECTED_LIKE iff its score exceeds the
/// threshold.
pub fn evaluate(
    model: &NGramModel,
    test: &[TrainingExample],
    benign: &[Vec<String>],
    threshold: f64,
) -> EvalReport {
    assert!(!test.is_empty(), "test set must be non-empty");
    let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for ex in test {
        let flagged = model.score_total(&ex.tokens) > threshold;
        match (ex.label, flagged) {
            (Label::ProtectedLike, true) => tp += 1,
            (Label::ProtectedLike, false) => fn_ += 1,
            (Label::PublicLike, true) => fp += 1,
            (Label::PublicLike, false) => tn += 1,
        }
    }
    let benign_fp = benign
        .iter()
        .filter(|toks| model.score_total(toks) > threshold)
        .count() as u64;
    EvalReport::from_counts(tp, fp, tn, fn_, benign_fp, benign.len() as u64)
}

// ---------------------------------------------------------------------------
// model file format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ModelFile {
    n: usize,
    alpha: f64,
    prior: f64,
    entries: Vec<ModelEntry>,
}

#[derive(Serialize, Deserialize)]
struct ModelEntry {
    hash_hex: String,
    log_odds: f64,
}

impl NGramModel {
    /// Serialize as JSON `{n, alpha, prior, entries:[{hash_hex, log_odds}]}`
    /// with entries sorted by hash. The decimal float representation
    /// round-trips exactly.
    pub fn to_json(&self) -> String {
        let mut entries: Vec<ModelEntry> = self
            .log_odds
            .iter()
            .map(|(h, lo)| ModelEntry {
                hash_hex: format!("{h:016x}"),
                log_odds: *lo,
            })
            .collect();
        entries.sort_by(|a, b| a.hash_hex.cmp(&b.hash_hex));
        let file = ModelFile {
            n: self.n,
            alpha: self.smoothing_alpha,
            prior: self.prior_log_odds,
            entries,
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifierError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| ClassifierError::ModelFile(e.to_string()))?;
        if file.n == 0 {
            return Err(ClassifierError::ModelFile("n must be positive".into()));
        }
        if !(file.alpha > 0.0) {
            return Err(ClassifierError::ModelFile("alpha must be positive".into()));
        }
        let mut log_odds = HashMap::with_capacity(file.entries.len());
        for e in &file.entries {
            let hash = u64::from_str_radix(&e.hash_hex, 16)
                .map_err(|err| ClassifierError::ModelFile(format!("bad hash_hex: {err}")))?;
            if !e.log_odds.is_finite() {
                return Err(ClassifierError::ModelFile("non-finite log_odds".into()));
            }
            log_odds.insert(hash, e.log_odds);
        }
        Ok(NGramModel {
            n: file.n,
            smoothing_alpha: file.alpha,
            prior_log_odds: file.prior,
            // The file format carries only what scoring needs; the joint
            // vocabulary size is a training-time quantity.
            vocabulary_size: log_odds.len().max(1),
            log_odds,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ClassifierError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ClassifierError::ModelFile(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
