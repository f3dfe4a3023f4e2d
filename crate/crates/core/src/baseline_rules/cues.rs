use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::RuleError;

const BUILTIN_CUES: &str = include_str!("../../data/datis_cues.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CueKind {
    Arrival,
    Departure,
    Closed,
}

impl FromStr for CueKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ARRIVAL" => Ok(CueKind::Arrival),
            "DEPARTURE" => Ok(CueKind::Departure),
            "CLOSED" => Ok(CueKind::Closed),
            _ => Err(()),
        }
    }
}

impl fmt::Display for CueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CueKind::Arrival => "ARRIVAL",
            CueKind::Departure => "DEPARTURE",
            CueKind::Closed => "CLOSED",
        })
    }
}

/// Where a cue sits relative to the runways it governs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CuePosition {
    /// `DEPG RWY 36R`: governs runway lists later in the clause.
    Before,
    /// `RY 31 APCH IN USE`: governs only the list directly in front of it.
    After,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cue {
    pub words: Vec<String>,
    pub kind: CueKind,
    pub position: CuePosition,
}

/// Cue phrases, kept longest-first so matching is greedy.
#[derive(Debug, Clone, Default)]
pub struct CueTable {
    cues: Vec<Cue>,
}

impl CueTable {
    /// Parses `CUE<TAB>KIND[<TAB>before|after]` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, RuleError> {
        let mut table = CueTable::default();
        for (idx, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let bad = || RuleError::MalformedTable { line: idx + 1 };
            let mut cols = line.split('\t').map(str::trim);
            let phrase = cols.next().filter(|p| !p.is_empty()).ok_or_else(bad)?;
            let kind = cols.next().ok_or_else(bad)?.parse::<CueKind>().map_err(|_| bad())?;
            let position = match cols.next().map(str::to_ascii_lowercase).as_deref() {
                None | Some("") | Some("before") => CuePosition::Before,
                Some("after") => CuePosition::After,
                Some(_) => return Err(bad()),
            };
            table.push(Cue {
                words: phrase.split_whitespace().map(str::to_ascii_uppercase).collect(),
                kind,
                position,
            });
        }
        Ok(table)
    }

    pub fn builtin() -> &'static CueTable {
        static TABLE: OnceLock<CueTable> = OnceLock::new();
        TABLE.get_or_init(|| CueTable::parse(BUILTIN_CUES).expect("bundled cue table parses"))
    }

    pub fn push(&mut self, cue: Cue) {
        let at = self
            .cues
            .iter()
            .position(|c| c.words.len() < cue.words.len())
            .unwrap_or(self.cues.len());
        self.cues.insert(at, cue);
    }

    pub fn cues(&self) -> &[Cue] {
        &self.cues
    }

    /// Cues of one kind in table order, for generators that need phrases.
    pub fn phrases(&self, kind: CueKind, position: CuePosition) -> Vec<String> {
        self.cues
            .iter()
            .filter(|c| c.kind == kind && c.position == position)
            .map(|c| c.words.join(" "))
            .collect()
    }

    /// Longest cue whose words match `tokens` starting at index 0.
    pub(crate) fn match_at(&self, tokens: &[&str]) -> Option<&Cue> {
        self.cues.iter().find(|cue| {
            cue.words.len() <= tokens.len() && cue.words.iter().zip(tokens).all(|(w, t)| w == t)
        })
    }
}
