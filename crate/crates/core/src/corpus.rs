//! Raw messages, gold labels and instruction-tuning records, plus their
//! line-oriented file formats.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baseline_rules::RunwaySet;
use crate::extractors::{
    parse_runway_list, parse_taxiway_list, parse_timeline_output, parse_tmi_output, render_taxiway_list,
    render_timeline, TimelineEntry, TmiReport,
};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("duplicate message id {0:?}")]
    DuplicateId(String),
    #[error("unknown gold field {0:?}")]
    UnknownField(String),
    #[error("gold label references unknown message {0:?}")]
    DanglingMessageId(String),
    #[error("more than one gold label for ({message_id:?}, {field})")]
    DuplicateLabel { message_id: String, field: GoldField },
    #[error("instruction record {0} has an empty instruction or output")]
    InvalidRecord(usize),
}

impl CorpusError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            CorpusError::FileNotFound(path.to_path_buf())
        } else {
            CorpusError::Io { path: path.to_path_buf(), source }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Source {
    Datis,
    Ntml,
    Transcript,
    MetarCode,
    Document,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMessage {
    pub id: String,
    pub source: Source,
    pub text: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl RawMessage {
    pub fn new(id: impl Into<String>, source: Source, text: impl Into<String>) -> Self {
        Self { id: id.into(), source, text: text.into(), metadata: BTreeMap::new() }
    }

    fn validate(&self, line: usize) -> Result<(), CorpusError> {
        if self.id.is_empty() {
            return Err(CorpusError::MalformedRecord { line, reason: "empty id".into() });
        }
        if self.text.trim().is_empty() {
            return Err(CorpusError::MalformedRecord { line, reason: "empty text".into() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GoldField {
    ArrivalRunways,
    DepartureRunways,
    ClosedRunways,
    ClosedTaxiways,
    Timeline,
    TmiReport,
    CleanedText,
    MetarMeaning,
}

impl GoldField {
    pub const ALL: [GoldField; 8] = [
        GoldField::ArrivalRunways,
        GoldField::DepartureRunways,
        GoldField::ClosedRunways,
        GoldField::ClosedTaxiways,
        GoldField::Timeline,
        GoldField::TmiReport,
        GoldField::CleanedText,
        GoldField::MetarMeaning,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GoldField::ArrivalRunways => "ARRIVAL_RUNWAYS",
            GoldField::DepartureRunways => "DEPARTURE_RUNWAYS",
            GoldField::ClosedRunways => "CLOSED_RUNWAYS",
            GoldField::ClosedTaxiways => "CLOSED_TAXIWAYS",
            GoldField::Timeline => "TIMELINE",
            GoldField::TmiReport => "TMI_REPORT",
            GoldField::CleanedText => "CLEANED_TEXT",
            GoldField::MetarMeaning => "METAR_MEANING",
        }
    }
}

impl fmt::Display for GoldField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GoldField {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GoldField::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| CorpusError::UnknownField(s.to_string()))
    }
}

/// Typed value of a label or prediction. The variant is determined by the field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldValue {
    Runways(RunwaySet),
    Taxiways(Vec<String>),
    Timeline(Vec<TimelineEntry>),
    Tmi(TmiReport),
    Text(String),
}

impl FieldValue {
    /// Parses the shared string encoding used by gold files and predictions.
    pub fn parse(field: GoldField, text: &str) -> Result<Self, String> {
        Ok(match field {
            GoldField::ArrivalRunways | GoldField::DepartureRunways | GoldField::ClosedRunways => {
                FieldValue::Runways(parse_runway_list(text).map_err(|e| e.to_string())?)
            }
            GoldField::ClosedTaxiways => FieldValue::Taxiways(parse_taxiway_list(text)),
            GoldField::Timeline => FieldValue::Timeline(parse_timeline_output(text)),
            GoldField::TmiReport => FieldValue::Tmi(parse_tmi_output(text).map_err(|e| e.to_string())?),
            GoldField::CleanedText | GoldField::MetarMeaning => FieldValue::Text(text.to_string()),
        })
    }

    /// Inverse of [`FieldValue::parse`].
    pub fn encode(&self) -> String {
        match self {
            FieldValue::Runways(set) => set.to_string(),
            FieldValue::Taxiways(ids) => render_taxiway_list(ids),
            FieldValue::Timeline(entries) => render_timeline(entries),
            FieldValue::Tmi(report) => report.to_string(),
            FieldValue::Text(text) => text.clone(),
        }
    }

    pub fn fits(&self, field: GoldField) -> bool {
        matches!(
            (self, field),
            (FieldValue::Runways(_), GoldField::ArrivalRunways | GoldField::DepartureRunways | GoldField::ClosedRunways)
                | (FieldValue::Taxiways(_), GoldField::ClosedTaxiways)
                | (FieldValue::Timeline(_), GoldField::Timeline)
                | (FieldValue::Tmi(_), GoldField::TmiReport)
                | (FieldValue::Text(_), GoldField::CleanedText | GoldField::MetarMeaning)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldLabel {
    pub message_id: String,
    pub field: GoldField,
    pub value: FieldValue,
}

impl GoldLabel {
    pub fn to_record(&self) -> GoldRecord {
        GoldRecord {
            message_id: self.message_id.clone(),
            field: self.field.to_string(),
            value: self.value.encode(),
        }
    }
}

/// On-disk gold line: `{"message_id", "field", "value"}` with string values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldRecord {
    pub message_id: String,
    pub field: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionRecord {
    pub instruction: String,
    pub input: String,
    pub output: String,
}

impl InstructionRecord {
    pub fn new(instruction: impl Into<String>, input: impl Into<String>, output: impl Into<String>) -> Self {
        Self { instruction: instruction.into(), input: input.into(), output: output.into() }
    }

    pub fn is_valid(&self) -> bool {
        !self.instruction.is_empty() && !self.output.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

impl CorpusFormat {
    /// Guess from the file extension; anything but `.csv` is JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

fn open(path: &Path) -> Result<File, CorpusError> {
    File::open(path).map_err(|e| CorpusError::io(path, e))
}

/// Non-blank lines with their 1-based line numbers.
fn jsonl_lines(path: &Path) -> Result<Vec<(usize, String)>, CorpusError> {
    let reader = BufReader::new(open(path)?);
    let mut lines = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if !line.trim().is_empty() {
            lines.push((idx + 1, line));
        }
    }
    Ok(lines)
}

/// Deserialize every non-blank line of a JSONL file.
pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CorpusError> {
    jsonl_lines(path)?
        .into_iter()
        .map(|(line, text)| {
            serde_json::from_str(&text).map_err(|e| CorpusError::MalformedRecord { line, reason: e.to_string() })
        })
        .collect()
}

/// Load messages in file order. Ids must be unique.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<RawMessage>, CorpusError> {
    let messages = match format {
        CorpusFormat::Jsonl => {
            let mut out = Vec::new();
            for (line, text) in jsonl_lines(path)? {
                let msg: RawMessage = serde_json::from_str(&text)
                    .map_err(|e| CorpusError::MalformedRecord { line, reason: e.to_string() })?;
                msg.validate(line)?;
                out.push(msg);
            }
            out
        }
        CorpusFormat::Csv => load_datis_csv(path)?,
    };
    let mut seen = HashSet::new();
    for msg in &messages {
        if !seen.insert(msg.id.as_str()) {
            return Err(CorpusError::DuplicateId(msg.id.clone()));
        }
    }
    Ok(messages)
}

/// CSV ingestion is DATIS-only: `id` and `text` columns are required and every
/// other column becomes metadata.
fn load_datis_csv(path: &Path) -> Result<Vec<RawMessage>, CorpusError> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    let headers = reader
        .headers()
        .map_err(|e| CorpusError::MalformedRecord { line: 1, reason: e.to_string() })?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let (Some(id_col), Some(text_col)) = (column("id"), column("text")) else {
        return Err(CorpusError::MalformedRecord { line: 1, reason: "CSV needs `id` and `text` columns".into() });
    };
    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| CorpusError::MalformedRecord { line, reason: e.to_string() })?;
        let mut msg = RawMessage::new(
            record.get(id_col).unwrap_or_default().trim(),
            Source::Datis,
            record.get(text_col).unwrap_or_default(),
        );
        for (col, name) in headers.iter().enumerate() {
            if col != id_col && col != text_col {
                if let Some(value) = record.get(col).filter(|v| !v.is_empty()) {
                    msg.metadata.insert(name.trim().to_string(), value.to_string());
                }
            }
        }
        msg.validate(line)?;
        out.push(msg);
    }
    Ok(out)
}

/// Load gold labels, parsing each value into its field's typed domain.
pub fn load_gold(path: &Path) -> Result<Vec<GoldLabel>, CorpusError> {
    let mut labels = Vec::new();
    let mut seen = HashSet::new();
    for (line, text) in jsonl_lines(path)? {
        let record: GoldRecord = serde_json::from_str(&text)
            .map_err(|e| CorpusError::MalformedRecord { line, reason: e.to_string() })?;
        let field: GoldField = record.field.parse()?;
        let value = FieldValue::parse(field, &record.value)
            .map_err(|reason| CorpusError::MalformedRecord { line, reason })?;
        if !seen.insert((record.message_id.clone(), field)) {
            return Err(CorpusError::DuplicateLabel { message_id: record.message_id, field });
        }
        labels.push(GoldLabel { message_id: record.message_id, field, value });
    }
    Ok(labels)
}

/// Every label must point at a message in `corpus`.
pub fn check_gold_against(labels: &[GoldLabel], corpus: &[RawMessage]) -> Result<(), CorpusError> {
    let ids: HashSet<&str> = corpus.iter().map(|m| m.id.as_str()).collect();
    match labels.iter().find(|l| !ids.contains(l.message_id.as_str())) {
        Some(dangling) => Err(CorpusError::DanglingMessageId(dangling.message_id.clone())),
        None => Ok(()),
    }
}

/// Serialize any records as JSON lines.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<usize, CorpusError> {
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut out, record).expect("records serialize");
        out.write_all(b"\n").map_err(|e| CorpusError::io(path, e))?;
    }
    out.flush().map_err(|e| CorpusError::io(path, e))?;
    Ok(records.len())
}

pub fn write_corpus(path: &Path, messages: &[RawMessage]) -> Result<usize, CorpusError> {
    write_jsonl(path, messages)
}

pub fn write_gold(path: &Path, labels: &[GoldLabel]) -> Result<usize, CorpusError> {
    let records: Vec<GoldRecord> = labels.iter().map(GoldLabel::to_record).collect();
    write_jsonl(path, &records)
}

/// Write `{"instruction", "input", "output"}` lines. Nothing is written if
/// any record is invalid.
pub fn export_instruction_dataset(records: &[InstructionRecord], path: &Path) -> Result<usize, CorpusError> {
    if let Some(idx) = records.iter().position(|r| !r.is_valid()) {
        return Err(CorpusError::InvalidRecord(idx));
    }
    write_jsonl(path, records)
}

pub fn load_instruction_dataset(path: &Path) -> Result<Vec<InstructionRecord>, CorpusError> {
    let mut out = Vec::new();
    for (line, text) in jsonl_lines(path)? {
        let record: InstructionRecord = serde_json::from_str(&text)
            .map_err(|e| CorpusError::MalformedRecord { line, reason: e.to_string() })?;
        if !record.is_valid() {
            return Err(CorpusError::MalformedRecord { line, reason: "empty instruction or output".into() });
        }
        out.push(record);
    }
    Ok(out)
}
