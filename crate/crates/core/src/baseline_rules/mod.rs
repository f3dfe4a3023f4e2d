//! Deterministic rule-based baseline: runway canonicalization, DATIS fact
//! extraction from a cue table, and METAR contraction lookup.

mod cues;
mod datis;
mod glossary;
mod runway;

pub use cues::{Cue, CueKind, CuePosition, CueTable};
pub use datis::{extract_datis_rule_based, ConditionCodeReport, DatisFacts, DatisRules, ZuluTime};
pub use glossary::{decode_metar_term, Glossary};
pub use runway::{normalize_runway_token, RunwayDesignator, RunwaySet, Side};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("not a runway: {0:?}")]
    NotARunway(String),
    #[error("{0:?} is not in the METAR glossary")]
    NotInGlossary(String),
    #[error("invalid HHMM time {0:?}")]
    BadTime(String),
    #[error("runway condition code {0} outside 0..=6")]
    BadConditionCode(u8),
    #[error("malformed table entry at line {line}")]
    MalformedTable { line: usize },
}
