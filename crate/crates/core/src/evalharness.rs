//! Exact-match accuracy scoring, report rendering, and seeded synthetic
//! corpora whose labels are known by construction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baseline_rules::{extract_datis_rule_based, CueKind, CuePosition, CueTable, RunwayDesignator, RunwaySet, ZuluTime};
use crate::corpus::{FieldValue, GoldField, GoldLabel, RawMessage, Source};
use crate::extractors::{ExtractionOutcome, TimelineEntry, TmiReport};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EvalError {
    #[error("value does not fit field {0}")]
    TypeMismatch(GoldField),
    #[error("report has no rows")]
    EmptyReport,
    #[error("unknown report format {0:?}")]
    UnknownFormat(String),
    #[error("noise level {0} outside [0, 1]")]
    InvalidNoise(f64),
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn strip_quotes(s: &str) -> String {
    const QUOTES: &[char] = &['\'', '"', '\u{2018}', '\u{2019}', '\u{201C}', '\u{201D}'];
    let s = s.trim().trim_matches(QUOTES).trim();
    collapse_ws(s.strip_suffix('.').unwrap_or(s))
}

fn canonical_taxiways(ids: &[String]) -> BTreeSet<String> {
    ids.iter().map(|t| t.trim().to_ascii_uppercase()).collect()
}

fn timeline_eq(a: &[TimelineEntry], b: &[TimelineEntry]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.time == y.time && collapse_ws(&x.event) == collapse_ws(&y.event))
}

fn tmi_eq(a: &TmiReport, b: &TmiReport) -> bool {
    a.triggered == b.triggered
        && a.subject.as_deref().map(strip_quotes) == b.subject.as_deref().map(strip_quotes)
        && a.tmis.len() == b.tmis.len()
        && a.tmis.iter().zip(&b.tmis).all(|(x, y)| collapse_ws(x) == collapse_ws(y))
}

/// Exact match after the field's canonicalization: runway and taxiway sets
/// ignore order, timelines and TMI lists compare item by item with trimmed
/// whitespace, text compares with whitespace collapsed.
pub fn score_exact(pred: &FieldValue, gold: &FieldValue, field: GoldField) -> Result<bool, EvalError> {
    if !pred.fits(field) || !gold.fits(field) {
        return Err(EvalError::TypeMismatch(field));
    }
    Ok(match (pred, gold) {
        (FieldValue::Runways(p), FieldValue::Runways(g)) => p == g,
        (FieldValue::Taxiways(p), FieldValue::Taxiways(g)) => canonical_taxiways(p) == canonical_taxiways(g),
        (FieldValue::Timeline(p), FieldValue::Timeline(g)) => timeline_eq(p, g),
        (FieldValue::Tmi(p), FieldValue::Tmi(g)) => tmi_eq(p, g),
        (FieldValue::Text(p), FieldValue::Text(g)) => collapse_ws(p) == collapse_ws(g),
        _ => unreachable!("both values fit the field"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldAccuracy {
    pub method: String,
    pub field: GoldField,
    pub correct: u64,
    pub total: u64,
    pub accuracy: f64,
}

impl FieldAccuracy {
    /// Panics if `total` is zero or `correct > total`.
    pub fn new(method: impl Into<String>, field: GoldField, correct: u64, total: u64) -> Self {
        assert!(total > 0 && correct <= total, "need 0 <= correct <= total, total > 0");
        Self { method: method.into(), field, correct, total, accuracy: correct as f64 / total as f64 }
    }

    /// Integer percent, rounded half-up, computed from the exact ratio.
    pub fn percent(&self) -> u64 {
        (200 * self.correct + self.total) / (2 * self.total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<FieldAccuracy>,
    pub corpus_id: String,
    /// Unix seconds.
    pub generated_at: u64,
    /// Predictions with no gold counterpart; skipped.
    #[serde(default)]
    pub missing_gold: Vec<(String, GoldField)>,
}

impl EvalReport {
    pub fn new(rows: Vec<FieldAccuracy>, corpus_id: impl Into<String>, generated_at: u64) -> Self {
        let mut report = Self { rows: Vec::new(), corpus_id: corpus_id.into(), generated_at, missing_gold: Vec::new() };
        for row in rows {
            report.upsert(row);
        }
        report
    }

    /// Adds a row, replacing any existing row for the same (method, field).
    pub fn upsert(&mut self, row: FieldAccuracy) {
        self.rows.retain(|r| !(r.method == row.method && r.field == row.field));
        self.rows.push(row);
        self.rows.sort_by(|a, b| (&a.method, a.field).cmp(&(&b.method, b.field)));
    }

    /// Folds another report's rows and skipped predictions into this one.
    pub fn merge(&mut self, other: EvalReport) {
        for row in other.rows {
            self.upsert(row);
        }
        self.missing_gold.extend(other.missing_gold);
    }

    pub fn row(&self, method: &str, field: GoldField) -> Option<&FieldAccuracy> {
        self.rows.iter().find(|r| r.method == method && r.field == field)
    }
}

/// Short stable id for a gold set: sha256 over its sorted (message_id, field) keys.
pub fn corpus_id(gold: &[GoldLabel]) -> String {
    let keys: BTreeSet<(&str, GoldField)> = gold.iter().map(|g| (g.message_id.as_str(), g.field)).collect();
    let mut hasher = Sha256::new();
    for (id, field) in keys {
        hasher.update(id.as_bytes());
        hasher.update([0]);
        hasher.update(field.as_str().as_bytes());
        hasher.update(*b"\n");
    }
    hasher.finalize().iter().take(6).map(|b| format!("{b:02x}")).collect()
}

/// Per-field tallies for one method, stamped with the current time.
pub fn evaluate(predictions: &[ExtractionOutcome], gold: &[GoldLabel], method_name: &str) -> EvalReport {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    evaluate_at(predictions, gold, method_name, now)
}

/// [`evaluate`] with an explicit timestamp. Every gold label is scored once:
/// a missing prediction, or one of the wrong type, counts as incorrect. The
/// first prediction per (message, field) wins.
pub fn evaluate_at(predictions: &[ExtractionOutcome], gold: &[GoldLabel], method_name: &str, generated_at: u64) -> EvalReport {
    let mut by_key: BTreeMap<(&str, GoldField), &FieldValue> = BTreeMap::new();
    for p in predictions {
        by_key.entry((p.message_id.as_str(), p.field)).or_insert(&p.value);
    }
    let gold_keys: BTreeSet<(&str, GoldField)> = gold.iter().map(|g| (g.message_id.as_str(), g.field)).collect();
    let missing_gold: Vec<(String, GoldField)> = by_key
        .keys()
        .filter(|k| !gold_keys.contains(*k))
        .map(|(id, field)| (id.to_string(), *field))
        .collect();
    if !missing_gold.is_empty() {
        tracing::warn!(count = missing_gold.len(), "predictions without gold were skipped");
    }

    let mut tallies: BTreeMap<GoldField, (u64, u64)> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for label in gold {
        if !seen.insert((label.message_id.as_str(), label.field)) {
            continue;
        }
        let hit = by_key
            .get(&(label.message_id.as_str(), label.field))
            .is_some_and(|pred| score_exact(pred, &label.value, label.field).unwrap_or(false));
        let tally = tallies.entry(label.field).or_default();
        tally.0 += u64::from(hit);
        tally.1 += 1;
    }
    let rows = tallies
        .into_iter()
        .map(|(field, (correct, total))| FieldAccuracy::new(method_name, field, correct, total))
        .collect();
    let mut report = EvalReport::new(rows, corpus_id(gold), generated_at);
    report.missing_gold = missing_gold;
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    TextTable,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "table" | "text" | "text_table" => Ok(ReportFormat::TextTable),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(EvalError::UnknownFormat(s.to_string())),
        }
    }
}

fn column_title(field: GoldField) -> &'static str {
    match field {
        GoldField::ArrivalRunways => "Accuracy of arrival runway",
        GoldField::DepartureRunways => "Accuracy of departure runway",
        GoldField::ClosedRunways => "Accuracy of closed runways",
        GoldField::ClosedTaxiways => "Accuracy of closed taxiways",
        GoldField::Timeline => "Accuracy of timeline",
        GoldField::TmiReport => "Accuracy of TMI report",
        GoldField::CleanedText => "Accuracy of cleaned text",
        GoldField::MetarMeaning => "Accuracy of METAR meaning",
    }
}

fn render_table(report: &EvalReport) -> String {
    let fields: BTreeSet<GoldField> = report.rows.iter().map(|r| r.field).collect();
    let methods: BTreeSet<&str> = report.rows.iter().map(|r| r.method.as_str()).collect();
    let mut grid: Vec<Vec<String>> = vec![std::iter::once("Method".to_string())
        .chain(fields.iter().map(|f| column_title(*f).to_string()))
        .collect()];
    for method in &methods {
        let mut line = vec![method.to_string()];
        for field in &fields {
            line.push(report.row(method, *field).map_or("-".to_string(), |r| format!("{}%", r.percent())));
        }
        grid.push(line);
    }
    let widths: Vec<usize> =
        (0..grid[0].len()).map(|c| grid.iter().map(|row| row[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &grid {
        let cells: Vec<String> = row.iter().zip(&widths).map(|(cell, w)| format!("{cell:<w$}")).collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
    }
    out
}

fn render_csv(report: &EvalReport) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["method", "field", "correct", "total", "accuracy"]).expect("in-memory write");
    for r in &report.rows {
        writer
            .write_record([
                r.method.clone(),
                r.field.to_string(),
                r.correct.to_string(),
                r.total.to_string(),
                r.accuracy.to_string(),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Text table shows half-up integer percentages; JSON and CSV keep full precision.
pub fn render_report(report: &EvalReport, format: ReportFormat) -> Result<String, EvalError> {
    if report.rows.is_empty() {
        return Err(EvalError::EmptyReport);
    }
    Ok(match format {
        ReportFormat::TextTable => render_table(report),
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        ReportFormat::Csv => render_csv(report),
    })
}

/// Corpus size, seed and per-message perturbation probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub seed: u64,
    pub noise_level: f64,
}

impl SynthSpec {
    pub fn new(n: usize, seed: u64, noise_level: f64) -> Result<Self, EvalError> {
        if !(0.0..=1.0).contains(&noise_level) {
            return Err(EvalError::InvalidNoise(noise_level));
        }
        Ok(Self { n, seed, noise_level })
    }
}

/// Metadata key recording which perturbation, if any, a synthetic message carries.
pub const PERTURBATION_KEY: &str = "perturbation";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    ZeroPadding,
    PrefixSwap,
    LowercaseClause,
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Perturbation::ZeroPadding => "zero_padding",
            Perturbation::PrefixSwap => "prefix_swap",
            Perturbation::LowercaseClause => "lowercase_clause",
        })
    }
}

// Noise draws come from their own stream so a corpus's content and labels
// do not depend on the noise level.
const NOISE_STREAM: u64 = 1;

#[derive(Debug, Clone)]
enum Part {
    Word(String),
    Comma,
    Runway { prefix: Option<&'static str>, rwy: RunwayDesignator, padded: bool },
}

#[derive(Debug, Clone)]
struct Clause {
    parts: Vec<Part>,
    lowercase: bool,
}

impl Clause {
    fn words(text: &str) -> Self {
        Clause { parts: text.split_whitespace().map(|w| Part::Word(w.to_string())).collect(), lowercase: false }
    }

    fn has_runways(&self) -> bool {
        self.parts.iter().any(|p| matches!(p, Part::Runway { .. }))
    }

    fn render(&self) -> String {
        let mut out = String::new();
        for part in &self.parts {
            match part {
                Part::Comma => out.push(','),
                Part::Word(w) => {
                    if !out.is_empty() {
                        out.push(' ');
                    }
                    out.push_str(w);
                }
                Part::Runway { prefix, rwy, padded } => {
                    if !out.is_empty() {
                        out.push(' ');
                    }
                    if let Some(p) = prefix {
                        out.push_str(p);
                        out.push(' ');
                    }
                    if *padded {
                        out.push('0');
                    }
                    out.push_str(&rwy.to_string());
                }
            }
        }
        out.push('.');
        if self.lowercase {
            out.to_lowercase()
        } else {
            out
        }
    }
}

fn sample_runways(rng: &mut ChaCha8Rng, all: &[RunwayDesignator], max: usize) -> Vec<RunwayDesignator> {
    let k = rng.gen_range(1..=max);
    all.choose_multiple(rng, k).copied().collect()
}

/// `RWY 4L, RWY 22 AND 9` style list; the first runway always carries a prefix.
fn runway_list(rng: &mut ChaCha8Rng, runways: &[RunwayDesignator]) -> Vec<Part> {
    let mut parts = Vec::new();
    for (i, rwy) in runways.iter().enumerate() {
        if i > 0 {
            if i + 1 == runways.len() && rng.gen_bool(0.3) {
                parts.push(Part::Word("AND".into()));
            } else {
                parts.push(Part::Comma);
            }
        }
        let prefix = if i == 0 || rng.gen_bool(0.5) { Some(*["RWY", "RY"].choose(rng).unwrap()) } else { None };
        parts.push(Part::Runway { prefix, rwy: *rwy, padded: false });
    }
    parts
}

fn activity_clause(rng: &mut ChaCha8Rng, cues: &CueTable, kind: CueKind, runways: &[RunwayDesignator]) -> Clause {
    let after = cues.phrases(kind, CuePosition::After);
    let mut parts = Vec::new();
    if !after.is_empty() && rng.gen_bool(0.25) {
        parts.extend(runway_list(rng, runways));
        parts.extend(Clause::words(after.choose(rng).unwrap()).parts);
    } else {
        let before = cues.phrases(kind, CuePosition::Before);
        parts.extend(Clause::words(before.choose(rng).unwrap()).parts);
        parts.extend(runway_list(rng, runways));
    }
    Clause { parts, lowercase: false }
}

const WEATHER_CLAUSES: [&str; 6] = [
    "WIND 270 AT 15",
    "VIS 10",
    "SKY CONDITION FEW 250",
    "ALTIMETER 2992",
    "1/8 INCH SLUSH ALL SURFACES",
    "BIRD ACTIVITY VICINITY OF ARPT",
];
const TAXIWAY_LETTERS: &[u8] = b"BCDEFGHJKLMNPQSTUVWYZ";

fn apply_perturbation(rng: &mut ChaCha8Rng, clauses: &mut [Clause]) -> Perturbation {
    let mut padding_targets = Vec::new();
    let mut prefix_targets = Vec::new();
    for (c, clause) in clauses.iter().enumerate() {
        for (p, part) in clause.parts.iter().enumerate() {
            if let Part::Runway { prefix, rwy, .. } = part {
                if rwy.number() < 10 {
                    padding_targets.push((c, p));
                }
                if prefix.is_some() {
                    prefix_targets.push((c, p));
                }
            }
        }
    }
    let lowercase_targets: Vec<usize> = (0..clauses.len()).filter(|&c| clauses[c].has_runways()).collect();
    let mut kinds = vec![Perturbation::PrefixSwap, Perturbation::LowercaseClause];
    if !padding_targets.is_empty() {
        kinds.insert(0, Perturbation::ZeroPadding);
    }
    let kind = *kinds.choose(rng).unwrap();
    match kind {
        Perturbation::ZeroPadding => {
            let (c, p) = *padding_targets.choose(rng).unwrap();
            if let Part::Runway { padded, .. } = &mut clauses[c].parts[p] {
                *padded = true;
            }
        }
        Perturbation::PrefixSwap => {
            let (c, p) = *prefix_targets.choose(rng).unwrap();
            if let Part::Runway { prefix: Some(prefix), .. } = &mut clauses[c].parts[p] {
                *prefix = if *prefix == "RWY" { "RY" } else { "RWY" };
            }
        }
        Perturbation::LowercaseClause => clauses[*lowercase_targets.choose(rng).unwrap()].lowercase = true,
    }
    kind
}

/// Synthetic DATIS messages and their arrival, departure, closed-runway and
/// closed-taxiway labels. Runways are drawn uniformly from all designators;
/// activity phrases come from the built-in cue table. With probability
/// `noise_level` a message carries exactly one label-preserving perturbation,
/// named in its metadata.
pub fn generate_synth_datis(spec: &SynthSpec) -> (Vec<RawMessage>, Vec<GoldLabel>) {
    let cues = CueTable::builtin();
    let all: Vec<RunwayDesignator> = RunwayDesignator::all().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut noise = ChaCha8Rng::seed_from_u64(spec.seed);
    noise.set_stream(NOISE_STREAM);
    let mut messages = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n * 4);

    for i in 0..spec.n {
        let id = format!("synth-{}-{i:04}", spec.seed);
        let airport = format!("K{}", (0..3).map(|_| rng.gen_range(b'A'..=b'Z') as char).collect::<String>());
        let info = rng.gen_range(b'A'..=b'Z') as char;
        let time = ZuluTime::new(rng.gen_range(0..24), rng.gen_range(0..60)).unwrap();
        let mut clauses = vec![Clause::words(&format!("{airport} ATIS INFO {info} {}", time.zulu()))];

        let (mut arrival, mut departure) = (RunwaySet::new(), RunwaySet::new());
        let shape = rng.gen_range(0..10);
        if shape == 0 {
            let runways = sample_runways(&mut rng, &all, 2);
            let mut parts = Clause::words("LDG AND DEPG").parts;
            parts.extend(runway_list(&mut rng, &runways));
            clauses.push(Clause { parts, lowercase: false });
            arrival.extend(runways.iter().copied());
            departure.extend(runways);
        } else {
            // Shape 1 has no arrival clause, shape 2 no departure clause.
            if shape != 1 {
                let runways = sample_runways(&mut rng, &all, 3);
                clauses.push(activity_clause(&mut rng, cues, CueKind::Arrival, &runways));
                arrival.extend(runways);
            }
            if shape != 2 {
                let runways = sample_runways(&mut rng, &all, 3);
                clauses.push(activity_clause(&mut rng, cues, CueKind::Departure, &runways));
                departure.extend(runways);
            }
        }

        for _ in 0..rng.gen_range(1..=2) {
            clauses.push(Clause::words(WEATHER_CLAUSES.choose(&mut rng).unwrap()));
        }

        let mut closed = RunwaySet::new();
        if rng.gen_bool(0.3) {
            let runways = sample_runways(&mut rng, &all, 2);
            let mut parts = runway_list(&mut rng, &runways);
            parts.push(Part::Word(if rng.gen_bool(0.5) { "CLOSED" } else { "CLSD" }.into()));
            clauses.push(Clause { parts, lowercase: false });
            closed.extend(runways);
        }

        let mut taxiways = Vec::new();
        if rng.gen_bool(0.3) {
            let k = rng.gen_range(1..=3);
            let mut parts = vec![Part::Word("TWY".into())];
            for (j, letter) in TAXIWAY_LETTERS.choose_multiple(&mut rng, k).enumerate() {
                let mut twy = (*letter as char).to_string();
                if rng.gen_bool(0.3) {
                    twy.push(char::from(b'0' + rng.gen_range(1..10u8)));
                }
                if j > 0 {
                    parts.push(Part::Comma);
                }
                parts.push(Part::Word(twy.clone()));
                taxiways.push(twy);
            }
            parts.push(Part::Word("CLSD".into()));
            clauses.push(Clause { parts, lowercase: false });
        }

        if rng.gen_bool(0.4) {
            let rwy = *all.choose(&mut rng).unwrap();
            let code = rng.gen_range(0..=6);
            let at = ZuluTime::new(rng.gen_range(0..24), rng.gen_range(0..60)).unwrap();
            clauses.push(Clause::words(&format!("RWY {rwy} CONDITION CODES {code} {code} {code} AT {}", at.zulu())));
        }

        let mut message = RawMessage::new(&id, Source::Datis, "");
        if spec.noise_level > 0.0 && noise.gen_bool(spec.noise_level) {
            let kind = apply_perturbation(&mut noise, &mut clauses);
            message.metadata.insert(PERTURBATION_KEY.into(), kind.to_string());
        }
        message.metadata.insert("airport".into(), airport);
        message.text = clauses.iter().map(Clause::render).collect::<Vec<_>>().join(" ");

        labels.push(GoldLabel { message_id: id.clone(), field: GoldField::ArrivalRunways, value: FieldValue::Runways(arrival) });
        labels.push(GoldLabel { message_id: id.clone(), field: GoldField::DepartureRunways, value: FieldValue::Runways(departure) });
        labels.push(GoldLabel { message_id: id.clone(), field: GoldField::ClosedRunways, value: FieldValue::Runways(closed) });
        labels.push(GoldLabel { message_id: id, field: GoldField::ClosedTaxiways, value: FieldValue::Taxiways(taxiways) });
        messages.push(message);
    }
    (messages, labels)
}

/// Rule-baseline predictions for the four DATIS fields of each message.
pub fn rule_based_predictions(messages: &[RawMessage]) -> Vec<ExtractionOutcome> {
    let mut out = Vec::with_capacity(messages.len() * 4);
    for msg in messages {
        let facts = extract_datis_rule_based(&msg.text);
        for (field, value) in [
            (GoldField::ArrivalRunways, FieldValue::Runways(facts.arrival)),
            (GoldField::DepartureRunways, FieldValue::Runways(facts.departure)),
            (GoldField::ClosedRunways, FieldValue::Runways(facts.closed_runways)),
            (GoldField::ClosedTaxiways, FieldValue::Taxiways(facts.closed_taxiways)),
        ] {
            out.push(ExtractionOutcome {
                message_id: msg.id.clone(),
                field,
                raw_model_text: value.encode(),
                value,
                template_id: "rule_based".into(),
            });
        }
    }
    out
}

/// Gold labels replayed as predictions.
pub fn identity_predictions(gold: &[GoldLabel], method: &str) -> Vec<ExtractionOutcome> {
    gold.iter()
        .map(|g| ExtractionOutcome {
            message_id: g.message_id.clone(),
            field: g.field,
            raw_model_text: g.value.encode(),
            value: g.value.clone(),
            template_id: method.to_string(),
        })
        .collect()
}

const NTML_FACILITIES: [&str; 8] = ["PBI", "ASE", "ZMA", "ZDV", "ZLA", "EWR", "ORD", "ATL"];
const NTML_EVENTS: [&str; 8] = [
    "EAST SPECIALIST ADVISED {f} LOWERED THEIR RATE FROM 28 TO 24",
    "HOLDING ADVISORY ISSUED",
    "ON THE PLANNING WEBINAR, {f} DROPPED TO A 24 RATE",
    "WEST SPECIALIST CONFERENCED WITH THE FACILITIES",
    "GDP PROPOSAL SENT",
    "{f} REQUESTED A GROUND STOP",
    "AFP PUBLISHED AFFECTING {f}",
    "WEST SPECIALIST SPOKE WITH {f} TO DISCUSS THE PLAN",
];

/// Synthetic NTML critiques with `entries` increasing `HHMM:` timestamps.
/// The label is the timeline in text order.
pub fn generate_synth_ntml_timeline(spec: &SynthSpec, entries: usize) -> (Vec<RawMessage>, Vec<GoldLabel>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut messages = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let id = format!("ntml-{}-{i:04}", spec.seed);
        let facility = *NTML_FACILITIES.choose(&mut rng).unwrap();
        let mut minutes: Vec<u16> = (0..24 * 60).collect::<Vec<_>>().choose_multiple(&mut rng, entries).copied().collect();
        minutes.sort_unstable();
        let mut text = format!("{facility} GDP CRITIQUE-");
        let mut timeline = Vec::with_capacity(entries);
        for m in minutes {
            let time = ZuluTime::new((m / 60) as u8, (m % 60) as u8).unwrap();
            let event = NTML_EVENTS.choose(&mut rng).unwrap().replace("{f}", facility);
            text.push_str(&format!(" {time}: {event}...CK"));
            timeline.push(TimelineEntry { time, event });
        }
        messages.push(RawMessage::new(&id, Source::Ntml, text));
        labels.push(GoldLabel { message_id: id, field: GoldField::Timeline, value: FieldValue::Timeline(timeline) });
    }
    (messages, labels)
}

const TMI_TEMPLATES: [&str; 6] = [
    "{m} MIT {a} DEPARTURES VIA {r}",
    "{m} MIT {a} ARRIVALS FROM ZOA VIA {r}",
    "{m} MIT {a} VIA {r} STAR",
    "SUSPEND {r} ARRIVALS",
    "VFR SERVICES CURTAILED",
    "NEGATIVE PRACTICE APPROACHES",
];
const TMI_AIRPORTS: [&str; 7] = ["BUR", "VNY", "SNA", "SAN", "PSP", "LAX", "SMO"];
const TMI_ROUTES: [&str; 7] = ["OROSZ2", "WLKCR4", "HHERO3", "PADRZ2", "PMD", "IVINS", "ROKKR"];

/// Synthetic NTML staffing entries. Roughly half trigger TMIs; the label is
/// the expected report.
pub fn generate_synth_ntml_tmi(spec: &SynthSpec) -> (Vec<RawMessage>, Vec<GoldLabel>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut messages = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let id = format!("tmi-{}-{i:04}", spec.seed);
        let area = (b'A' + rng.gen_range(0..6u8)) as char;
        let (text, report) = if rng.gen_bool(0.5) {
            let subject = format!("ZLA AREA {area} STAFFING TRIGGER SICK LEAVE LOSSES NO OCL CHANGE");
            let tmis: Vec<String> = (0..rng.gen_range(1..=5))
                .map(|_| {
                    TMI_TEMPLATES
                        .choose(&mut rng)
                        .unwrap()
                        .replace("{m}", &(5 * rng.gen_range(2..=6)).to_string())
                        .replace("{a}", TMI_AIRPORTS.choose(&mut rng).unwrap())
                        .replace("{r}", TMI_ROUTES.choose(&mut rng).unwrap())
                })
                .collect();
            let text = format!("{subject} TMIS POSSIBLE: {} CUSTOMER OUTREACH COMPLETED.", tmis.join(" "));
            (text, TmiReport { triggered: true, subject: Some(subject), tmis })
        } else {
            let text = format!("ZLA AREA {area} ROUTINE STATUS. NO STAFFING ISSUES. NORMAL OPERATIONS.");
            (text, TmiReport::not_triggered())
        };
        messages.push(RawMessage::new(&id, Source::Ntml, text));
        labels.push(GoldLabel { message_id: id, field: GoldField::TmiReport, value: FieldValue::Tmi(report) });
    }
    (messages, labels)
}
