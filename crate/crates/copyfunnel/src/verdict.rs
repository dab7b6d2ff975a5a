//! Stage and verdict vocabulary shared across the funnel.
//!
//! The verdict lattice is REJECT > QUARANTINE > ADMIT: a rejection is
//! terminal for the document, a quarantine escalates downstream scrutiny
//! and routes the item to human review, an admit lets it continue.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stage {
    Gate,
    Fingerprint,
    Entity,
    Classifier,
    Xref,
}

impl Stage {
    /// Fixed funnel order.
    pub const ORDER: [Stage; 5] = [
        Stage::Gate,
        Stage::Fingerprint,
        Stage::Entity,
        Stage::Classifier,
        Stage::Xref,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Admit,
    Quarantine,
    Reject,
}

impl Verdict {
    /// Lattice join: the worse verdict wins.
    pub fn join(self, other: Verdict) -> Verdict {
        self.max(other)
    }
}

/// Why a stage decided what it decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReasonCode {
    // gate
    RobotsDisallow,
    TdmReserved,
    Unpaid,
    Open,
    PurposeExcluded,
    // shared
    InputError,
    InsufficientText,
    NotApplicable,
    // fingerprint
    Computed,
    // entity
    EntityFlags,
    NoFlags,
    // classifier
    ClassifierScore,
    ClassifierPass,
    // xref
    XrefMatch,
    EntityLink,
    NoMatch,
}

impl ReasonCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReasonCode::RobotsDisallow => "ROBOTS_DISALLOW",
            ReasonCode::TdmReserved => "TDM_RESERVED",
            ReasonCode::Unpaid => "UNPAID",
            ReasonCode::Open => "OPEN",
            ReasonCode::PurposeExcluded => "PURPOSE_EXCLUDED",
            ReasonCode::InputError => "INPUT_ERROR",
            ReasonCode::InsufficientText => "INSUFFICIENT_TEXT",
            ReasonCode::NotApplicable => "NOT_APPLICABLE",
            ReasonCode::Computed => "COMPUTED",
            ReasonCode::EntityFlags => "ENTITY_FLAGS",
            ReasonCode::NoFlags => "NO_FLAGS",
            ReasonCode::ClassifierScore => "CLASSIFIER_SCORE",
            ReasonCode::ClassifierPass => "CLASSIFIER_PASS",
            ReasonCode::XrefMatch => "XREF_MATCH",
            ReasonCode::EntityLink => "ENTITY_LINK",
            ReasonCode::NoMatch => "NO_MATCH",
        }
    }
}

/// One stage's outcome for one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageVerdict {
    pub stage: Stage,
    pub verdict: Verdict,
    pub reason: ReasonCode,
    pub evidence: String,
}

impl StageVerdict {
    pub fn new(stage: Stage, verdict: Verdict, reason: ReasonCode, evidence: String) -> Self {
        debug_assert!(
            !(stage == Stage::Entity && verdict == Verdict::Reject),
            "the entity stage must never reject"
        );
        StageVerdict {
            stage,
            verdict,
            reason,
            evidence,
        }
    }
}
