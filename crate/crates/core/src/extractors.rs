//! LLM-backed extraction pipelines (render, complete, parse) and the pure
//! parsers that turn model text into typed values.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::baseline_rules::{normalize_runway_token, RunwaySet, ZuluTime};
use crate::corpus::{FieldValue, GoldField, RawMessage};
use crate::llm_client::{EndpointConfig, GenerationParams, LlmClient, LlmError};
use crate::prompting::{render, PromptError, RenderedPrompt, TemplateRegistry};

pub const ARRIVAL_LABEL: &str = "Arrival Runways";
pub const DEPARTURE_LABEL: &str = "Departure Runways";
pub const CLOSED_RUNWAYS_LABEL: &str = "Closed Runways";
pub const CLOSED_TAXIWAYS_LABEL: &str = "Closed Taxiways";

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("unparseable runway token {0:?}")]
    UnparseableToken(String),
    #[error("model output has no {0:?} line")]
    MissingAnswerLine(String),
    #[error("answer says yes but lists no numbered items")]
    InconsistentAnswer,
    #[error("template {0:?} has no structured parser for this pipeline")]
    UnsupportedTemplate(String),
    #[error("invalid outcome record: {0}")]
    InvalidRecord(String),
}

const LIST_PREFIXES: [&str; 5] = ["RWY", "RY", "RUNWAY", "RWYS", "RUNWAYS"];

/// `"36R, 36C"` -> {36R, 36C}; `"None"` (any case) -> {}.
pub fn parse_runway_list(text: &str) -> Result<RunwaySet, ExtractError> {
    let mut set = RunwaySet::new();
    let mut pending_prefix: Option<&str> = None;
    for raw in text.split(|c: char| c == ',' || c == ';' || c.is_whitespace()) {
        let token = raw.trim_matches(|c: char| c == '.' || c == '"' || c == '\'');
        if token.is_empty() || token.eq_ignore_ascii_case("none") || token.eq_ignore_ascii_case("and") || token == "&" {
            continue;
        }
        if LIST_PREFIXES.iter().any(|p| token.eq_ignore_ascii_case(p)) {
            pending_prefix = Some(token);
            continue;
        }
        for part in token.split('/') {
            match normalize_runway_token(part) {
                Ok(rwy) => {
                    set.insert(rwy);
                }
                Err(_) => return Err(ExtractError::UnparseableToken(raw.trim().to_string())),
            }
        }
        pending_prefix = None;
    }
    match pending_prefix {
        Some(prefix) => Err(ExtractError::UnparseableToken(prefix.to_string())),
        None => Ok(set),
    }
}

/// `"B, C1"` -> ["B", "C1"]; `"None"` -> []. A leading TWY is dropped.
pub fn parse_taxiway_list(text: &str) -> Vec<String> {
    let mut ids: Vec<String> = Vec::new();
    for raw in text.split(|c: char| c == ',' || c == ';' || c.is_whitespace()) {
        let token = raw.trim_matches(|c: char| c == '.' || c == '"').to_ascii_uppercase();
        if token.is_empty() || matches!(token.as_str(), "NONE" | "AND" | "&" | "TWY" | "TWYS" | "TAXIWAY" | "TAXIWAYS") {
            continue;
        }
        if !ids.contains(&token) {
            ids.push(token);
        }
    }
    ids
}

pub fn render_taxiway_list(ids: &[String]) -> String {
    if ids.is_empty() {
        "None".to_string()
    } else {
        ids.join(", ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub time: ZuluTime,
    pub event: String,
}

fn timeline_line_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(?:[-*\u{2022}]\s*)?(\d{4})Z?\s*:\s*(.*?)\s*$").unwrap())
}

/// Lines shaped `HHMM: event`, optionally bulleted with `-`. Other lines and
/// lines with impossible times are skipped.
pub fn parse_timeline_output(text: &str) -> Vec<TimelineEntry> {
    text.lines()
        .filter_map(|line| {
            let caps = timeline_line_re().captures(line)?;
            let time = caps[1].parse::<ZuluTime>().ok()?;
            let event = caps[2].trim();
            (!event.is_empty()).then(|| TimelineEntry { time, event: event.to_string() })
        })
        .collect()
}

pub fn render_timeline(entries: &[TimelineEntry]) -> String {
    entries.iter().map(|e| format!("{}: {}", e.time, e.event)).collect::<Vec<_>>().join("\n")
}

/// Whether staffing triggered TMIs, what triggered them, and the TMIs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmiReport {
    pub triggered: bool,
    pub subject: Option<String>,
    pub tmis: Vec<String>,
}

impl TmiReport {
    pub fn not_triggered() -> Self {
        Self { triggered: false, subject: None, tmis: Vec::new() }
    }
}

/// Canonical answer text; parses back to the same report.
impl fmt::Display for TmiReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.triggered {
            return f.write_str("No, staffing has not triggered traffic management initiatives (TMIS).");
        }
        f.write_str("Yes, staffing has triggered traffic management initiatives (TMIS).")?;
        if let Some(subject) = &self.subject {
            write!(f, " The triggering subject is '{subject}.'")?;
        }
        f.write_str(" The TMIS are as follows:")?;
        for (i, tmi) in self.tmis.iter().enumerate() {
            write!(f, " {}. {tmi}", i + 1)?;
        }
        Ok(())
    }
}

fn numbered_marker_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?:^|[\s:])(\d{1,2})\.(?:\s|$)").unwrap())
}

const SUBJECT_LEAD: &str = "triggering subject is";
const QUOTES: [char; 6] = ['\'', '"', '\u{2018}', '\u{2019}', '\u{201C}', '\u{201D}'];

pub fn parse_tmi_output(text: &str) -> Result<TmiReport, ExtractError> {
    let text = text.trim();
    let head: String = text.chars().take(4).collect::<String>().to_ascii_lowercase();
    let triggered = head.starts_with("yes") && !head[3..].starts_with(|c: char| c.is_alphanumeric());
    if !triggered {
        return Ok(TmiReport::not_triggered());
    }
    let (subject, list_start) = find_subject(text);
    let region = &text[list_start..];
    let mut markers = Vec::new();
    let mut expected = 1u32;
    for caps in numbered_marker_re().captures_iter(region) {
        if caps[1].parse::<u32>() == Ok(expected) {
            let whole = caps.get(0).unwrap();
            markers.push((caps.get(1).unwrap().start(), whole.end()));
            expected += 1;
        }
    }
    if markers.is_empty() {
        return Err(ExtractError::InconsistentAnswer);
    }
    let tmis = markers
        .iter()
        .enumerate()
        .map(|(i, &(_, body_start))| {
            let body_end = markers.get(i + 1).map_or(region.len(), |&(next, _)| next);
            region[body_start..body_end].trim().trim_end_matches('.').trim_end().to_string()
        })
        .filter(|t| !t.is_empty())
        .collect();
    Ok(TmiReport { triggered, subject, tmis })
}

/// Subject and the byte offset where the numbered list may begin.
fn find_subject(text: &str) -> (Option<String>, usize) {
    let lower = text.to_ascii_lowercase();
    let Some(lead) = lower.find(SUBJECT_LEAD) else {
        return (None, 0);
    };
    let after = lead + SUBJECT_LEAD.len();
    let rest = &text[after..];
    let trimmed = rest.trim_start_matches([' ', ':']);
    let offset = after + (rest.len() - trimmed.len());
    let clean = |s: &str| {
        let s = s.trim().trim_end_matches('.').trim_end();
        (!s.is_empty()).then(|| s.to_string())
    };
    if let Some(open) = trimmed.chars().next().filter(|c| QUOTES.contains(c)) {
        let body = &trimmed[open.len_utf8()..];
        // The closing quote is the first one followed by whitespace,
        // punctuation or end of text, so apostrophes inside words survive.
        let mut chars = body.char_indices().peekable();
        while let Some((idx, c)) = chars.next() {
            let closes = QUOTES.contains(&c)
                && chars.peek().is_none_or(|&(_, n)| n.is_whitespace() || ".,;:".contains(n));
            if closes {
                let end = offset + open.len_utf8() + idx + c.len_utf8();
                return (clean(&body[..idx]), end);
            }
        }
    }
    let end = sentence_end(trimmed);
    (clean(&trimmed[..end]), offset + end)
}

fn sentence_end(text: &str) -> usize {
    let bytes = text.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'.' && bytes.get(i + 1).is_none_or(|n| n.is_ascii_whitespace()) {
            return i + 1;
        }
    }
    text.len()
}

fn labeled_line<'t>(text: &'t str, label: &str) -> Option<&'t str> {
    let label = label.to_ascii_lowercase();
    text.lines().find_map(|line| {
        let stripped = line.trim().trim_start_matches(['-', '*', ' ']);
        let lower = stripped.to_ascii_lowercase();
        let rest = lower.strip_prefix(&label)?;
        let rest = rest.trim_start_matches('*').trim_start();
        rest.starts_with(':').then(|| {
            let start = stripped.len() - rest.len() + 1;
            stripped[start..].trim()
        })
    })
}

/// Reads the two labeled answer lines of the runway template.
pub fn parse_datis_answer(text: &str) -> Result<(RunwaySet, RunwaySet), ExtractError> {
    let line = |label: &str| labeled_line(text, label).ok_or_else(|| ExtractError::MissingAnswerLine(label.into()));
    let arrival = parse_runway_list(line(ARRIVAL_LABEL)?)?;
    let departure = parse_runway_list(line(DEPARTURE_LABEL)?)?;
    Ok((arrival, departure))
}

pub fn parse_closed_runways_answer(text: &str) -> Result<RunwaySet, ExtractError> {
    let line = labeled_line(text, CLOSED_RUNWAYS_LABEL)
        .ok_or_else(|| ExtractError::MissingAnswerLine(CLOSED_RUNWAYS_LABEL.into()))?;
    parse_runway_list(line)
}

pub fn parse_closed_taxiways_answer(text: &str) -> Result<Vec<String>, ExtractError> {
    labeled_line(text, CLOSED_TAXIWAYS_LABEL)
        .map(parse_taxiway_list)
        .ok_or_else(|| ExtractError::MissingAnswerLine(CLOSED_TAXIWAYS_LABEL.into()))
}

/// Trim whitespace and one layer of matching surrounding quotes.
pub fn strip_answer(text: &str) -> String {
    let t = text.trim();
    for (open, close) in [('"', '"'), ('\'', '\''), ('\u{201C}', '\u{201D}')] {
        if let Some(inner) = t.strip_prefix(open).and_then(|s| s.strip_suffix(close)) {
            return inner.trim().to_string();
        }
    }
    t.to_string()
}

/// One extracted field for one message, with the model text it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionOutcome {
    pub message_id: String,
    pub field: GoldField,
    pub value: FieldValue,
    pub raw_model_text: String,
    pub template_id: String,
}

/// JSONL form: `{"message_id", "field", "value", "template_id", "raw_model_text"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub message_id: String,
    pub field: String,
    pub value: String,
    pub template_id: String,
    pub raw_model_text: String,
}

impl ExtractionOutcome {
    pub fn to_record(&self) -> OutcomeRecord {
        OutcomeRecord {
            message_id: self.message_id.clone(),
            field: self.field.to_string(),
            value: self.value.encode(),
            template_id: self.template_id.clone(),
            raw_model_text: self.raw_model_text.clone(),
        }
    }

    pub fn from_record(record: OutcomeRecord) -> Result<Self, ExtractError> {
        let field: GoldField = record.field.parse().map_err(|e: crate::corpus::CorpusError| {
            ExtractError::InvalidRecord(e.to_string())
        })?;
        let value = FieldValue::parse(field, &record.value).map_err(ExtractError::InvalidRecord)?;
        Ok(Self {
            message_id: record.message_id,
            field,
            value,
            raw_model_text: record.raw_model_text,
            template_id: record.template_id,
        })
    }
}

/// Runway answer for one DATIS message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatisAnswer {
    pub arrival: RunwaySet,
    pub departure: RunwaySet,
    pub raw_model_text: String,
}

/// Template-driven extraction against one backend.
#[derive(Debug, Clone)]
pub struct LlmExtractor<'a> {
    pub client: &'a LlmClient,
    pub endpoint: &'a EndpointConfig,
    pub params: GenerationParams,
    pub templates: &'a TemplateRegistry,
}

impl<'a> LlmExtractor<'a> {
    pub fn new(client: &'a LlmClient, endpoint: &'a EndpointConfig, templates: &'a TemplateRegistry) -> Self {
        Self { client, endpoint, params: GenerationParams::default(), templates }
    }

    pub fn prompt(&self, template_id: &str, input: &str) -> Result<RenderedPrompt, ExtractError> {
        Ok(render(self.templates.get_template(template_id)?, input)?)
    }

    fn run(&self, template_id: &str, input: &str) -> Result<String, ExtractError> {
        let prompt = self.prompt(template_id, input)?;
        Ok(self.client.complete(self.endpoint, &self.params, &prompt)?.text)
    }

    pub fn extract_datis(&self, text: &str, template_id: &str) -> Result<DatisAnswer, ExtractError> {
        let raw = self.run(template_id, text)?;
        let (arrival, departure) = parse_datis_answer(&raw)?;
        Ok(DatisAnswer { arrival, departure, raw_model_text: raw })
    }

    pub fn build_timeline(&self, ntml_text: &str) -> Result<Vec<TimelineEntry>, ExtractError> {
        Ok(parse_timeline_output(&self.run("ntml_timeline", ntml_text)?))
    }

    pub fn extract_staffing_tmi(&self, text: &str) -> Result<TmiReport, ExtractError> {
        parse_tmi_output(&self.run("ntml_staffing_tmi", text)?)
    }

    pub fn clean_transcript(&self, text: &str) -> Result<String, ExtractError> {
        Ok(strip_answer(&self.run("transcript_clean", text)?))
    }

    pub fn decode_metar(&self, code: &str) -> Result<String, ExtractError> {
        Ok(self.run("metar_decode", code)?.trim().to_string())
    }

    /// Extract over a corpus with bounded concurrency. Each message yields
    /// its outcomes or its own error; order follows `messages`.
    pub fn extract_corpus(
        &self,
        messages: &[RawMessage],
        task: Task,
        template_id: &str,
        max_in_flight: usize,
    ) -> Vec<(String, Result<Vec<ExtractionOutcome>, ExtractError>)> {
        let mut prompts = Vec::new();
        let mut slots = Vec::new();
        for msg in messages {
            match self.prompt(template_id, &msg.text) {
                Ok(p) => {
                    slots.push(Ok(prompts.len()));
                    prompts.push(p);
                }
                Err(e) => slots.push(Err(e)),
            }
        }
        let mut completions = self
            .client
            .complete_batch(self.endpoint, &self.params, &prompts, max_in_flight)
            .into_iter()
            .map(Some)
            .collect::<Vec<_>>();
        messages
            .iter()
            .zip(slots)
            .map(|(msg, slot)| {
                let result = slot.and_then(|idx| {
                    let completion = completions[idx].take().expect("one completion per prompt")?;
                    task.outcomes(&msg.id, template_id, completion.text)
                });
                (msg.id.clone(), result)
            })
            .collect()
    }
}

/// Which parser turns a completion into outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    DatisRunways,
    DatisClosedRunways,
    DatisClosedTaxiways,
    NtmlTimeline,
    NtmlStaffingTmi,
    CleanTranscript,
    MetarDecode,
}

impl Task {
    /// Task for a built-in template, if that template has a structured parser.
    pub fn for_template(template_id: &str) -> Option<Task> {
        Some(match template_id {
            "datis_arr_dep_runways" => Task::DatisRunways,
            "datis_closed_runways" => Task::DatisClosedRunways,
            "datis_closed_taxiways" => Task::DatisClosedTaxiways,
            "ntml_timeline" => Task::NtmlTimeline,
            "ntml_staffing_tmi" => Task::NtmlStaffingTmi,
            "transcript_clean" => Task::CleanTranscript,
            "metar_decode" => Task::MetarDecode,
            _ => return None,
        })
    }

    /// Fields this task produces, in output order.
    pub fn fields(self) -> &'static [GoldField] {
        match self {
            Task::DatisRunways => &[GoldField::ArrivalRunways, GoldField::DepartureRunways],
            Task::DatisClosedRunways => &[GoldField::ClosedRunways],
            Task::DatisClosedTaxiways => &[GoldField::ClosedTaxiways],
            Task::NtmlTimeline => &[GoldField::Timeline],
            Task::NtmlStaffingTmi => &[GoldField::TmiReport],
            Task::CleanTranscript => &[GoldField::CleanedText],
            Task::MetarDecode => &[GoldField::MetarMeaning],
        }
    }

    /// Model answer text that [`Task::outcomes`] parses back into `values`.
    /// `None` when a required field is missing or has the wrong type.
    pub fn render_answer(self, values: &BTreeMap<GoldField, FieldValue>) -> Option<String> {
        let get = |field: GoldField| values.get(&field).filter(|v| v.fits(field));
        Some(match self {
            Task::DatisRunways => format!(
                "{ARRIVAL_LABEL}: {}\n{DEPARTURE_LABEL}: {}",
                get(GoldField::ArrivalRunways)?.encode(),
                get(GoldField::DepartureRunways)?.encode()
            ),
            Task::DatisClosedRunways => format!("{CLOSED_RUNWAYS_LABEL}: {}", get(GoldField::ClosedRunways)?.encode()),
            Task::DatisClosedTaxiways => format!("{CLOSED_TAXIWAYS_LABEL}: {}", get(GoldField::ClosedTaxiways)?.encode()),
            _ => get(self.fields()[0])?.encode(),
        })
    }

    pub fn outcomes(self, message_id: &str, template_id: &str, raw: String) -> Result<Vec<ExtractionOutcome>, ExtractError> {
        let values: Vec<(GoldField, FieldValue)> = match self {
            Task::DatisRunways => {
                let (arrival, departure) = parse_datis_answer(&raw)?;
                vec![
                    (GoldField::ArrivalRunways, FieldValue::Runways(arrival)),
                    (GoldField::DepartureRunways, FieldValue::Runways(departure)),
                ]
            }
            Task::DatisClosedRunways => {
                vec![(GoldField::ClosedRunways, FieldValue::Runways(parse_closed_runways_answer(&raw)?))]
            }
            Task::DatisClosedTaxiways => {
                vec![(GoldField::ClosedTaxiways, FieldValue::Taxiways(parse_closed_taxiways_answer(&raw)?))]
            }
            Task::NtmlTimeline => vec![(GoldField::Timeline, FieldValue::Timeline(parse_timeline_output(&raw)))],
            Task::NtmlStaffingTmi => vec![(GoldField::TmiReport, FieldValue::Tmi(parse_tmi_output(&raw)?))],
            Task::CleanTranscript => vec![(GoldField::CleanedText, FieldValue::Text(strip_answer(&raw)))],
            Task::MetarDecode => vec![(GoldField::MetarMeaning, FieldValue::Text(raw.trim().to_string()))],
        };
        Ok(values
            .into_iter()
            .map(|(field, value)| ExtractionOutcome {
                message_id: message_id.to_string(),
                field,
                value,
                raw_model_text: raw.clone(),
                template_id: template_id.to_string(),
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline_rules::{decode_metar_term, Glossary};
    use crate::llm_client::{MockFixture, MockRule, ScriptedBackend};
    use proptest::prelude::*;

    fn set(items: &[&str]) -> RunwaySet {
        items.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn rendered_answers_parse_back() {
        let (_, gold) = crate::evalharness::generate_synth_datis(&crate::evalharness::SynthSpec::new(30, 4, 0.0).unwrap());
        let mut by_msg: BTreeMap<&str, BTreeMap<GoldField, FieldValue>> = BTreeMap::new();
        for g in &gold {
            by_msg.entry(g.message_id.as_str()).or_default().insert(g.field, g.value.clone());
        }
        for values in by_msg.values() {
            for task in [Task::DatisRunways, Task::DatisClosedRunways, Task::DatisClosedTaxiways] {
                let answer = task.render_answer(values).unwrap();
                for o in task.outcomes("m", "t", answer).unwrap() {
                    assert_eq!(&o.value, &values[&o.field]);
                }
            }
        }
        assert_eq!(Task::MetarDecode.render_answer(&BTreeMap::new()), None);
    }

    #[test]
    fn runway_lists() {
        assert_eq!(parse_runway_list("36R, 36C").unwrap(), set(&["36R", "36C"]));
        assert_eq!(parse_runway_list("None").unwrap(), RunwaySet::new());
        assert_eq!(parse_runway_list("none").unwrap(), RunwaySet::new());
        assert_eq!(parse_runway_list("32L, 32R, 36").unwrap(), set(&["32L", "32R", "36"]));
        assert_eq!(parse_runway_list("RWY 08L, RY 9 and 27.").unwrap(), set(&["8L", "9", "27"]));
        assert_eq!(parse_runway_list("4L/22R").unwrap(), set(&["4L", "22R"]));
        assert!(matches!(parse_runway_list("36R, banana"), Err(ExtractError::UnparseableToken(t)) if t == "banana"));
        assert!(matches!(parse_runway_list("RWY"), Err(ExtractError::UnparseableToken(_))));
    }

    #[test]
    fn datis_answer_lines() {
        let (a, d) = parse_datis_answer("Arrival Runways: None\nDeparture Runways: 36R, 36C").unwrap();
        assert!(a.is_empty());
        assert_eq!(d, set(&["36R", "36C"]));
        let (a, d) = parse_datis_answer("Sure!\n- **Arrival Runways**: 8L\n- Departure runways: 15L\n").unwrap();
        assert_eq!((a, d), (set(&["8L"]), set(&["15L"])));
        assert!(matches!(
            parse_datis_answer("The arrival runway is 8L and departures use 15L."),
            Err(ExtractError::MissingAnswerLine(_))
        ));
        assert!(matches!(
            parse_datis_answer("Arrival Runways: 8L"),
            Err(ExtractError::MissingAnswerLine(l)) if l == DEPARTURE_LABEL
        ));
    }

    const PBI_TIMELINE_OUTPUT: &str = "1256: East Specialist advised PBI lowered their rate from 28 to 24 for departure banks\n1347: Holding advisory issued\n1415: On the planning webinar, PBI dropped to a 24 rate\n1440: East Specialist conferenced with facilities\n1450: GDP proposal sent";

    #[test]
    fn timeline_pbi_output() {
        let entries = parse_timeline_output(PBI_TIMELINE_OUTPUT);
        let times: Vec<String> = entries.iter().map(|e| e.time.to_string()).collect();
        assert_eq!(times, ["1256", "1347", "1415", "1440", "1450"]);
        assert_eq!(entries[4].event, "GDP proposal sent");
    }

    #[test]
    fn timeline_edge_cases() {
        assert!(parse_timeline_output("").is_empty());
        assert!(parse_timeline_output("2577: bad time").is_empty());
        let dashed = parse_timeline_output("- 1145: TNTMO briefed\nnoise\n* 0930Z: later\n1200:   ");
        assert_eq!(dashed.len(), 2);
        assert_eq!(dashed[0].event, "TNTMO briefed");
        assert_eq!(dashed[1].time.to_string(), "0930");
    }

    const SCT_TMI_OUTPUT: &str = "Yes, staffing has triggered traffic management initiatives (TMIS). The triggering subject is 'SCT BURBANK SECTOR STAFFING TRIGGER SICK LEAVE LOSS COVID RELATED NO OCL CHANGE.' The TMIS are as follows: 1. SUSPEND THRNE 3 ARRIVALS 2. 20 MIT VNY VIA IVINS STAR 3. 20 MIT BUR VIA ROKKR STAR 4. 20 MIT JOSHUA APPROACH ARRIVALS VIA JANNY & KIMMO STARS 5. INTERNAL CFR BUR/SMO/VNY NEGATIVE PRACTICE APPROACHES 6. VFR SERVICES CURTAILED";

    #[test]
    fn tmi_sct_output() {
        let r = parse_tmi_output(SCT_TMI_OUTPUT).unwrap();
        assert!(r.triggered);
        assert_eq!(
            r.subject.as_deref(),
            Some("SCT BURBANK SECTOR STAFFING TRIGGER SICK LEAVE LOSS COVID RELATED NO OCL CHANGE")
        );
        assert_eq!(r.tmis.len(), 6);
        assert_eq!(r.tmis[0], "SUSPEND THRNE 3 ARRIVALS");
        assert_eq!(r.tmis[3], "20 MIT JOSHUA APPROACH ARRIVALS VIA JANNY & KIMMO STARS");
        assert_eq!(r.tmis[5], "VFR SERVICES CURTAILED");
    }

    #[test]
    fn tmi_negative_and_inconsistent() {
        assert_eq!(parse_tmi_output("No, staffing has not triggered TMIS.").unwrap(), TmiReport::not_triggered());
        assert!(matches!(parse_tmi_output("Yes, staffing has triggered TMIS."), Err(ExtractError::InconsistentAnswer)));
        assert_eq!(parse_tmi_output("Yesterday 1. x").unwrap(), TmiReport::not_triggered());
    }

    #[test]
    fn tmi_subject_without_quotes_and_multiline_list() {
        let r = parse_tmi_output(
            "yes. The triggering subject is ZOB AREA 4 STAFFING. TMIS:\n1. 20 MIT CLE ARRIVALS\n2. GROUND STOP DTW.\n",
        )
        .unwrap();
        assert_eq!(r.subject.as_deref(), Some("ZOB AREA 4 STAFFING"));
        assert_eq!(r.tmis, vec!["20 MIT CLE ARRIVALS", "GROUND STOP DTW"]);
    }

    #[test]
    fn tmi_subject_with_apostrophe() {
        let r = parse_tmi_output("Yes. The triggering subject is 'ZDV GA'S SPOTS.' 1. HOLD GA").unwrap();
        assert_eq!(r.subject.as_deref(), Some("ZDV GA'S SPOTS"));
        assert_eq!(r.tmis, vec!["HOLD GA"]);
    }

    #[test]
    fn strip_quotes() {
        assert_eq!(strip_answer("  \"Delta 2501, ground roger.\"\n"), "Delta 2501, ground roger.");
        assert_eq!(strip_answer("plain"), "plain");
    }

    fn mock_extractor_run<T>(fixture: MockFixture, f: impl FnOnce(&LlmExtractor<'_>) -> T) -> T {
        let client = LlmClient::scripted(ScriptedBackend::new(fixture));
        let endpoint = EndpointConfig::new("http://mock.invalid/v1", "aviation-mistral-7b").unwrap();
        let templates = TemplateRegistry::builtin();
        f(&LlmExtractor::new(&client, &endpoint, &templates))
    }

    #[test]
    fn datis_pipeline_with_mock() {
        let fixture = MockFixture {
            completions: vec![
                MockRule::contains("DEPG RWY 36R", "Arrival Runways: None\nDeparture Runways: 36R, 36C"),
                MockRule::contains("ARRIVALS EXPECT", "Arrival Runways: 8L\nDeparture Runways: 15L"),
            ],
            default: Some("I am not sure which runways are in use.".into()),
            ..MockFixture::default()
        };
        mock_extractor_run(fixture, |x| {
            let a = x.extract_datis("DEPG RWY 36R, RWY 36C. 1/8 INCH SLUSH", "datis_arr_dep_runways").unwrap();
            assert_eq!((a.arrival, a.departure), (RunwaySet::new(), set(&["36R", "36C"])));
            let b = x.extract_datis("ARRIVALS EXPECT ILS OR RNAV Y RY 8L. DEPG RY 15L.", "datis_arr_dep_runways").unwrap();
            assert_eq!((b.arrival, b.departure), (set(&["8L"]), set(&["15L"])));
            assert!(matches!(
                x.extract_datis("ATIS INFO C", "datis_arr_dep_runways"),
                Err(ExtractError::MissingAnswerLine(_))
            ));
        });
    }

    #[test]
    fn transcript_fixed_point_with_echo() {
        mock_extractor_run(MockFixture::echo(), |x| {
            let clean = "Delta 2501, ground roger.";
            assert_eq!(x.clean_transcript(clean).unwrap(), clean);
            assert!(matches!(x.clean_transcript("  "), Err(ExtractError::Prompt(PromptError::EmptyInput))));
        });
    }

    #[test]
    fn metar_llm_matches_glossary() {
        let glossary = Glossary::builtin();
        let fixture = MockFixture {
            completions: glossary.iter().map(|(code, exp)| MockRule::equals(code, exp)).collect(),
            ..MockFixture::default()
        };
        mock_extractor_run(fixture, |x| {
            for (code, _) in glossary.iter() {
                assert_eq!(x.decode_metar(code).unwrap(), decode_metar_term(code).unwrap());
            }
            assert_eq!(x.decode_metar("SH").unwrap(), x.decode_metar("SH").unwrap());
        });
    }

    #[test]
    fn benign_ntml_not_triggered() {
        let fixture = MockFixture { default: Some("No, staffing has not triggered TMIS.".into()), ..MockFixture::default() };
        mock_extractor_run(fixture, |x| {
            let r = x.extract_staffing_tmi("ZNY ADVISORY: ROUTINE OPS, NO CONSTRAINTS").unwrap();
            assert!(!r.triggered);
        });
    }

    #[test]
    fn corpus_extraction_keeps_order_and_isolates_errors() {
        use crate::corpus::Source;
        let fixture = MockFixture {
            completions: vec![
                MockRule::contains("LAND RWY 4", "Arrival Runways: 4\nDeparture Runways: None"),
                MockRule::contains("DEPG RWY 9", "Departure Runways: 9"),
            ],
            ..MockFixture::default()
        };
        let messages = vec![
            RawMessage::new("a", Source::Datis, "LAND RWY 4."),
            RawMessage::new("b", Source::Datis, "DEPG RWY 9."),
        ];
        mock_extractor_run(fixture, |x| {
            let results = x.extract_corpus(&messages, Task::DatisRunways, "datis_arr_dep_runways", 2);
            assert_eq!(results[0].0, "a");
            let outcomes = results[0].1.as_ref().unwrap();
            assert_eq!(outcomes.len(), 2);
            assert_eq!(outcomes[0].field, GoldField::ArrivalRunways);
            assert_eq!(outcomes[0].value, FieldValue::Runways(set(&["4"])));
            assert!(matches!(results[1].1, Err(ExtractError::MissingAnswerLine(_))));
        });
    }

    #[test]
    fn outcome_record_round_trip() {
        let outcome = ExtractionOutcome {
            message_id: "m1".into(),
            field: GoldField::DepartureRunways,
            value: FieldValue::Runways(set(&["36C", "36R"])),
            raw_model_text: "Arrival Runways: None\nDeparture Runways: 36R, 36C".into(),
            template_id: "datis_arr_dep_runways".into(),
        };
        let record = outcome.to_record();
        assert_eq!(record.value, "36C, 36R");
        let json = serde_json::to_string(&record).unwrap();
        assert!(json.starts_with("{\"message_id\":\"m1\",\"field\":\"DEPARTURE_RUNWAYS\",\"value\":"));
        assert_eq!(ExtractionOutcome::from_record(record).unwrap(), outcome);
    }

    fn any_runway_set() -> impl Strategy<Value = RunwaySet> {
        proptest::collection::vec(0usize..144, 0..8)
            .prop_map(|idx| idx.into_iter().map(|i| crate::baseline_rules::RunwayDesignator::all().nth(i).unwrap()).collect())
    }

    proptest! {
        #[test]
        fn runway_set_serialization_round_trip(set in any_runway_set()) {
            prop_assert_eq!(parse_runway_list(&set.to_string()).unwrap(), set);
        }

        #[test]
        fn tmi_display_round_trip(
            subject in proptest::option::of("[A-Z][A-Z0-9 /&]{0,30}[A-Z]"),
            tmis in proptest::collection::vec("[A-Z][A-Z0-9 /&]{0,25}[A-Z]", 1..8),
        ) {
            let report = TmiReport { triggered: true, subject, tmis };
            prop_assert_eq!(parse_tmi_output(&report.to_string()).unwrap(), report);
        }

        #[test]
        fn timeline_entries_are_valid(lines in proptest::collection::vec(("[0-9]{4}", "[a-z ]{0,10}"), 0..10)) {
            let text: String = lines.iter().map(|(t, e)| format!("{t}: {e}\n")).collect();
            let parsed = parse_timeline_output(&text);
            let expected: Vec<_> = lines
                .iter()
                .filter(|(t, e)| t[..2].parse::<u8>().unwrap() <= 23 && t[2..].parse::<u8>().unwrap() <= 59 && !e.trim().is_empty())
                .collect();
            prop_assert_eq!(parsed.len(), expected.len());
            for (entry, (t, e)) in parsed.iter().zip(expected) {
                prop_assert_eq!(&entry.time.to_string(), t);
                prop_assert_eq!(&entry.event, e.trim());
            }
        }
    }
}
