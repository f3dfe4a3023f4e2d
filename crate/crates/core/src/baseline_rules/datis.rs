use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::cues::{CueKind, CuePosition, CueTable};
use super::runway::{parse_designator_body, RunwayDesignator, RunwaySet};
use super::RuleError;

/// Wall-clock time of day, `HHMM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZuluTime {
    hour: u8,
    minute: u8,
}

impl ZuluTime {
    pub fn new(hour: u8, minute: u8) -> Result<Self, RuleError> {
        if hour > 23 || minute > 59 {
            return Err(RuleError::BadTime(format!("{hour:02}{minute:02}")));
        }
        Ok(Self { hour, minute })
    }

    pub fn hour(&self) -> u8 {
        self.hour
    }

    pub fn minute(&self) -> u8 {
        self.minute
    }

    /// `HHMMZ` form used in DATIS condition reports.
    pub fn zulu(&self) -> String {
        format!("{self}Z")
    }
}

impl fmt::Display for ZuluTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}{:02}", self.hour, self.minute)
    }
}

/// Accepts `HHMM` with an optional trailing `Z`.
impl FromStr for ZuluTime {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let digits = s.strip_suffix(['Z', 'z']).unwrap_or(s);
        if digits.len() != 4 || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(RuleError::BadTime(s.to_string()));
        }
        let hour = digits[..2].parse().unwrap();
        let minute = digits[2..].parse().unwrap();
        ZuluTime::new(hour, minute).map_err(|_| RuleError::BadTime(s.to_string()))
    }
}

impl Serialize for ZuluTime {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ZuluTime {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

/// `RWY 36R CONDITION CODES 5 5 5 AT 1009Z`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConditionCodeReport {
    pub runway: RunwayDesignator,
    pub codes: [u8; 3],
    pub observed_at: ZuluTime,
}

impl ConditionCodeReport {
    pub fn new(runway: RunwayDesignator, codes: [u8; 3], observed_at: ZuluTime) -> Result<Self, RuleError> {
        if let Some(&bad) = codes.iter().find(|&&c| c > 6) {
            return Err(RuleError::BadConditionCode(bad));
        }
        Ok(Self { runway, codes, observed_at })
    }
}

impl fmt::Display for ConditionCodeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.codes;
        write!(f, "RWY {} CONDITION CODES {a} {b} {c} AT {}", self.runway, self.observed_at.zulu())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatisFacts {
    pub arrival: RunwaySet,
    pub departure: RunwaySet,
    pub closed_runways: RunwaySet,
    pub closed_taxiways: Vec<String>,
    pub condition_codes: Vec<ConditionCodeReport>,
}

impl DatisFacts {
    fn add(&mut self, kind: CueKind, runways: impl IntoIterator<Item = RunwayDesignator>) {
        match kind {
            CueKind::Arrival => self.arrival.extend(runways),
            CueKind::Departure => self.departure.extend(runways),
            CueKind::Closed => self.closed_runways.extend(runways),
        }
    }
}

/// Rule-based DATIS reader over a cue table.
#[derive(Debug, Clone)]
pub struct DatisRules<'a> {
    cues: &'a CueTable,
}

impl Default for DatisRules<'static> {
    fn default() -> Self {
        Self { cues: CueTable::builtin() }
    }
}

/// Extract runway activity, closures and condition codes with the built-in cue table.
pub fn extract_datis_rule_based(text: &str) -> DatisFacts {
    DatisRules::default().extract(text)
}

fn condition_code_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?:\b(?:RUNWAY|RWY|RY)\s*)?\b(\d{1,2}[LCR]?)\s+(?:RWY\s+)?CONDITION\s+CODES?\s+(\d)\s*/?\s*(\d)\s*/?\s*(\d)(?:\s+AT\s+(\d{4})\s*Z)?",
        )
        .unwrap()
    })
}

fn token_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[A-Z0-9/]+|[,&;]").unwrap())
}

const RUNWAY_PREFIXES: [&str; 5] = ["RWY", "RY", "RUNWAY", "RWYS", "RUNWAYS"];
const TAXIWAY_PREFIXES: [&str; 4] = ["TWY", "TWYS", "TAXIWAY", "TAXIWAYS"];
const CONNECTORS: [&str; 4] = [",", "AND", "&", "OR"];

#[derive(Debug)]
enum Item {
    Cue { kind: CueKind, position: CuePosition, start: usize, end: usize },
    Runways { runs: Vec<Vec<RunwayDesignator>>, end: usize },
    Taxiways { ids: Vec<String>, start: usize, end: usize },
}

impl<'a> DatisRules<'a> {
    pub fn new(cues: &'a CueTable) -> Self {
        Self { cues }
    }

    pub fn extract(&self, text: &str) -> DatisFacts {
        let mut facts = DatisFacts::default();
        let normalized = text.replace("\\n", "\n").to_ascii_uppercase();
        for clause in split_clauses(&normalized) {
            self.read_clause(clause, &mut facts);
        }
        facts
    }

    fn read_clause(&self, clause: &str, facts: &mut DatisFacts) {
        // Condition reports are lifted out first so their runways never reach
        // the activity lists.
        let stripped = condition_code_re().replace_all(clause, |caps: &regex::Captures<'_>| {
            if let Some(report) = parse_condition_report(caps) {
                facts.condition_codes.push(report);
            }
            " ; "
        });
        let tokens: Vec<&str> = token_re().find_iter(&stripped).map(|m| m.as_str()).collect();
        let items = self.scan(&tokens);
        for (idx, item) in items.iter().enumerate() {
            match item {
                Item::Runways { runs, end } => assign_runways(&items, &tokens, idx, runs, *end, facts),
                Item::Taxiways { ids, start, end } => {
                    let closed_after = matches!(items.get(idx + 1),
                        Some(Item::Cue { kind: CueKind::Closed, start: s, .. }) if s == end);
                    let closed_before = idx > 0
                        && matches!(items[idx - 1],
                            Item::Cue { kind: CueKind::Closed, end: e, .. } if e == *start);
                    if closed_after || closed_before {
                        for id in ids {
                            if !facts.closed_taxiways.contains(id) {
                                facts.closed_taxiways.push(id.clone());
                            }
                        }
                    }
                }
                Item::Cue { .. } => {}
            }
        }
    }

    fn scan(&self, tokens: &[&str]) -> Vec<Item> {
        let mut items = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            if let Some(cue) = self.cues.match_at(&tokens[i..]) {
                let end = i + cue.words.len();
                items.push(Item::Cue { kind: cue.kind, position: cue.position, start: i, end });
                i = end;
                continue;
            }
            let after_cue = matches!(items.last(), Some(Item::Cue { end, .. }) if *end == i);
            let prefixed = RUNWAY_PREFIXES.contains(&tokens[i])
                && tokens.get(i + 1).is_some_and(|t| designator_token(t, true).is_some());
            let bare = after_cue && designator_token(tokens[i], false).is_some();
            if prefixed || bare {
                let (runs, end) = read_runway_list(tokens, i);
                items.push(Item::Runways { runs, end });
                i = end;
                continue;
            }
            if TAXIWAY_PREFIXES.contains(&tokens[i]) && tokens.get(i + 1).is_some_and(|t| taxiway_id(t)) {
                let (ids, end) = read_taxiway_list(tokens, i);
                items.push(Item::Taxiways { ids, start: i, end });
                i = end;
                continue;
            }
            i += 1;
        }
        items
    }
}

fn assign_runways(
    items: &[Item],
    tokens: &[&str],
    idx: usize,
    runs: &[Vec<RunwayDesignator>],
    end: usize,
    facts: &mut DatisFacts,
) {
    let after = match items.get(idx + 1) {
        Some(Item::Cue { kind, position: CuePosition::After, start, .. }) if *start == end => Some(*kind),
        _ => None,
    };
    let before = governing_before_cues(&items[..idx], tokens);
    let all = || runs.iter().flatten().copied();
    match after {
        Some(kind) if before.is_empty() || runs.len() < 2 => facts.add(kind, all()),
        Some(kind) => {
            let (last, rest) = runs.split_last().unwrap();
            facts.add(kind, last.iter().copied());
            for &k in &before {
                facts.add(k, rest.iter().flatten().copied());
            }
        }
        None => {
            for &k in &before {
                facts.add(k, all());
            }
        }
    }
}

/// The nearest `Before` cue, plus any cues chained to it by connectors
/// ("LDG AND DEPG"). Scope stops at an `After` cue.
fn governing_before_cues(items: &[Item], tokens: &[&str]) -> Vec<CueKind> {
    let mut kinds = Vec::new();
    let mut chain_start: Option<usize> = None;
    for item in items.iter().rev() {
        match item {
            Item::Cue { position: CuePosition::After, .. } => break,
            Item::Cue { kind, position: CuePosition::Before, start, end } => match chain_start {
                None => {
                    kinds.push(*kind);
                    chain_start = Some(*start);
                }
                Some(s) if *end == s || (*end + 1 == s && CONNECTORS.contains(&tokens[*end])) => {
                    kinds.push(*kind);
                    chain_start = Some(*start);
                }
                Some(_) => break,
            },
            Item::Runways { .. } | Item::Taxiways { .. } if chain_start.is_some() => break,
            _ => {}
        }
    }
    kinds.sort();
    kinds.dedup();
    kinds
}

/// Reads `RWY 36R, RWY 36C` / `32L, 32R, 36` greedily from `start`. Each run
/// begins at a prefix word; bare continuations extend the current run.
fn read_runway_list(tokens: &[&str], start: usize) -> (Vec<Vec<RunwayDesignator>>, usize) {
    let mut runs: Vec<Vec<RunwayDesignator>> = vec![Vec::new()];
    let mut i = start;
    loop {
        if RUNWAY_PREFIXES.contains(&tokens[i]) {
            if !runs.last().unwrap().is_empty() {
                runs.push(Vec::new());
            }
            i += 1;
            let rwys = designator_token(tokens[i], true).expect("caller checked");
            runs.last_mut().unwrap().extend(rwys);
        } else {
            let rwys = designator_token(tokens[i], false).expect("caller checked");
            runs.last_mut().unwrap().extend(rwys);
        }
        i += 1;
        let Some(&next) = tokens.get(i) else { break };
        let continues_at = |j: usize| {
            let t = *tokens.get(j)?;
            let prefixed = RUNWAY_PREFIXES.contains(&t)
                && tokens.get(j + 1).is_some_and(|n| designator_token(n, true).is_some());
            (prefixed || designator_token(t, false).is_some()).then_some(j)
        };
        let resume = if CONNECTORS.contains(&next) && next != "OR" {
            continues_at(i + 1)
        } else if RUNWAY_PREFIXES.contains(&next) {
            continues_at(i)
        } else {
            None
        };
        match resume {
            Some(j) => i = j,
            None => break,
        }
    }
    (runs, i)
}

fn read_taxiway_list(tokens: &[&str], start: usize) -> (Vec<String>, usize) {
    let mut ids = Vec::new();
    let mut i = start + 1;
    loop {
        ids.push(tokens[i].to_string());
        i += 1;
        let mut j = i;
        if tokens.get(j).is_some_and(|t| CONNECTORS.contains(t)) {
            j += 1;
        }
        if tokens.get(j).is_some_and(|t| TAXIWAY_PREFIXES.contains(t)) {
            j += 1;
        }
        if j > i && tokens.get(j).is_some_and(|t| taxiway_id(t)) {
            i = j;
        } else {
            break;
        }
    }
    (ids, i)
}

fn taxiway_id(token: &str) -> bool {
    let letters = token.bytes().take_while(u8::is_ascii_alphabetic).count();
    let digits = token.len() - letters;
    (1..=2).contains(&letters)
        && digits <= 2
        && token[letters..].bytes().all(|b| b.is_ascii_digit())
        && !CONNECTORS.contains(&token)
}

/// A designator token such as `36R`, or `4L/22R` when `allow_pair` is set.
fn designator_token(token: &str, allow_pair: bool) -> Option<Vec<RunwayDesignator>> {
    if token.contains('/') {
        if !allow_pair {
            return None;
        }
        return token.split('/').map(parse_designator_body).collect();
    }
    parse_designator_body(token).map(|r| vec![r])
}

fn parse_condition_report(caps: &regex::Captures<'_>) -> Option<ConditionCodeReport> {
    let runway = parse_designator_body(&caps[1])?;
    let code = |i: usize| caps[i].parse::<u8>().ok();
    let codes = [code(2)?, code(3)?, code(4)?];
    let observed_at = caps.get(5)?.as_str().parse().ok()?;
    ConditionCodeReport::new(runway, codes, observed_at).ok()
}

/// Clauses end at newlines and at periods followed by whitespace or end of text.
fn split_clauses(text: &str) -> impl Iterator<Item = &str> {
    let bytes = text.as_bytes();
    let mut clauses = Vec::new();
    let mut start = 0;
    for (i, &b) in bytes.iter().enumerate() {
        let ends = match b {
            b'\n' => true,
            b'.' => bytes.get(i + 1).is_none_or(|n| n.is_ascii_whitespace()),
            _ => false,
        };
        if ends {
            clauses.push(&text[start..i]);
            start = i + 1;
        }
    }
    clauses.push(&text[start..]);
    clauses.into_iter().filter(|c| !c.trim().is_empty())
}
