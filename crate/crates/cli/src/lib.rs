//! Batch command-line surface over the extraction toolkit.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 backend error.

pub mod config;

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use avtext::baseline_rules::{decode_metar_term, extract_datis_rule_based};
use avtext::corpus::{
    export_instruction_dataset, load_corpus, load_gold, read_jsonl, write_corpus, write_gold, CorpusError,
    CorpusFormat, FieldValue, GoldField, InstructionRecord, RawMessage,
};
use avtext::evalharness::{evaluate_at, generate_synth_datis, render_report, EvalError, ReportFormat, SynthSpec};
use avtext::extractors::{ExtractError, ExtractionOutcome, LlmExtractor, OutcomeRecord, Task};
use avtext::llm_client::{LlmClient, LlmError, MockFixture, ScriptedBackend};
use avtext::prompting::{PromptError, TemplateRegistry};
use avtext::retrieval::{
    assemble_rag_prompt, default_rag_template, embed, index_documents, load_store, ChunkOptions, RetrievalError,
    VectorStore,
};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::{layer, parse_config_file, resolve, CliConfig, ConfigError, ENV_CONFIG};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_BACKEND: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "avtext", version, about = "Structured fact extraction from aviation operational text")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Key-value config file (default: $AVTEXT_CONFIG)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Completion backend base URL, e.g. http://host:8000/v1
    #[arg(long, global = true)]
    url: Option<String>,
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true)]
    embed_url: Option<String>,
    #[arg(long, global = true)]
    embed_model: Option<String>,
    #[arg(long, global = true)]
    temperature: Option<f64>,
    #[arg(long, global = true)]
    top_k: Option<u32>,
    #[arg(long, global = true)]
    max_new_tokens: Option<u32>,
    #[arg(long, global = true)]
    timeout_secs: Option<u64>,
    #[arg(long, global = true)]
    max_retries: Option<u32>,
    /// Concurrent requests during batch extraction
    #[arg(long, global = true)]
    max_in_flight: Option<usize>,
    /// Serve completions and embeddings from a scripted fixture
    #[arg(long, global = true, value_name = "FIXTURE")]
    mock: Option<PathBuf>,
    /// Use the rule-based path; never contact a backend
    #[arg(long, global = true)]
    offline: bool,
    /// Output file (default: stdout); a directory for `gen`
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Append every extraction outcome here for later thumbs up/down review
    #[arg(long, global = true)]
    feedback_log: Option<PathBuf>,
    /// Extra template directory loaded on top of the built-ins
    #[arg(long, global = true)]
    templates_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract structured facts from a corpus
    Extract {
        #[command(subcommand)]
        task: ExtractTask,
    },
    /// Decode terminology
    Decode {
        #[command(subcommand)]
        what: DecodeWhat,
    },
    /// Score predictions against gold labels
    Eval {
        #[command(subcommand)]
        action: EvalAction,
    },
    /// Build or query the document knowledge base
    Kb {
        #[command(subcommand)]
        action: KbAction,
    },
    /// Instruction-tuning datasets
    Dataset {
        #[command(subcommand)]
        action: DatasetAction,
    },
    /// Synthetic labeled corpora
    Gen {
        #[command(subcommand)]
        what: GenWhat,
    },
    /// Prompt templates
    Templates {
        #[command(subcommand)]
        action: TemplatesAction,
    },
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// Corpus file (.jsonl, or .csv for DATIS)
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Override the corpus format (jsonl|csv)
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    template: Option<String>,
}

#[derive(Debug, Subcommand)]
enum ExtractTask {
    /// Runway configuration from DATIS broadcasts
    Datis(CorpusArgs),
    /// Timestamped event timeline from NTML entries
    NtmlTimeline(CorpusArgs),
    /// Numbered traffic management initiatives from NTML entries
    NtmlTmi(CorpusArgs),
    /// Clean up raw ATC transcripts
    CleanTranscript(CorpusArgs),
}

#[derive(Debug, Subcommand)]
enum DecodeWhat {
    /// Expand METAR/TAF codes into plain language
    Metar {
        #[arg(required = true)]
        codes: Vec<String>,
    },
}

#[derive(Debug, Subcommand)]
enum EvalAction {
    /// Per-field exact-match accuracy
    Run {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, default_value = "model")]
        method: String,
        /// table|json|csv
        #[arg(long, default_value = "table")]
        format: String,
    },
}

#[derive(Debug, Subcommand)]
enum KbAction {
    /// Chunk, embed and store documents
    Build {
        /// Directory of .txt/.md documents
        #[arg(long)]
        docs: PathBuf,
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value_t = avtext::retrieval::DEFAULT_CHUNK_TOKENS)]
        chunk_tokens: usize,
        #[arg(long, default_value_t = 0)]
        overlap: usize,
    },
    /// Retrieve passages, optionally answering from them
    Query {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        question: String,
        #[arg(long, default_value_t = avtext::retrieval::DEFAULT_TOP_K)]
        k: usize,
        /// Generate an answer from the retrieved passages
        #[arg(long)]
        answer: bool,
    },
}

#[derive(Debug, Subcommand)]
enum DatasetAction {
    /// Turn a labeled corpus into instruction/input/output records
    Export {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        template: String,
    },
}

#[derive(Debug, Subcommand)]
enum GenWhat {
    /// Labeled DATIS messages from a seeded generator
    SynthDatis {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
}

#[derive(Debug, Subcommand)]
enum TemplatesAction {
    /// List template ids and tasks
    List,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Backend(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Backend(_) => EXIT_BACKEND,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<LlmError> for CliError {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Backend(e.to_string()),
        }
    }
}

impl From<PromptError> for CliError {
    fn from(e: PromptError) -> Self {
        match e {
            PromptError::EmptyInput => CliError::Data(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<ExtractError> for CliError {
    fn from(e: ExtractError) -> Self {
        match e {
            ExtractError::Prompt(p) => p.into(),
            ExtractError::Llm(l) => l.into(),
            ExtractError::UnsupportedTemplate(_) => CliError::Usage(e.to_string()),
            ExtractError::InvalidRecord(_) => CliError::Data(e.to_string()),
            // The model answered, but not in the expected shape.
            _ => CliError::Backend(e.to_string()),
        }
    }
}

impl From<RetrievalError> for CliError {
    fn from(e: RetrievalError) -> Self {
        match e {
            RetrievalError::Llm(l) => l.into(),
            RetrievalError::Prompt(p) => p.into(),
            RetrievalError::InvalidChunking => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::UnknownFormat(_) | EvalError::InvalidNoise(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Run with the process environment and standard streams.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let env = |k: &str| std::env::var(k).ok();
    run_with(argv, &env, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// `argv[0]` is the program name. Diagnostics go to `stderr`.
pub fn run_with<I, S>(argv: I, env: &dyn Fn(&str) -> Option<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = stdout.write_all(shown.as_bytes());
                EXIT_OK
            } else {
                let _ = stderr.write_all(shown.as_bytes());
                EXIT_USAGE
            };
        }
    };
    let mut ctx = Context { stdout, stderr, env, global: &cli.global, config: None };
    match ctx.dispatch(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(ctx.stderr, "avtext: {e}");
            e.code()
        }
    }
}

struct Context<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
    env: &'a dyn Fn(&str) -> Option<String>,
    global: &'a GlobalArgs,
    config: Option<CliConfig>,
}

impl Context<'_> {
    fn dispatch(&mut self, command: &Command) -> Result<(), CliError> {
        self.config = Some(self.resolve_config()?);
        match command {
            Command::Extract { task } => self.extract(task),
            Command::Decode { what: DecodeWhat::Metar { codes } } => self.decode_metar(codes),
            Command::Eval { action: EvalAction::Run { pred, gold, method, format } } => {
                self.eval_run(pred, gold, method, format)
            }
            Command::Kb { action: KbAction::Build { docs, store, chunk_tokens, overlap } } => {
                self.kb_build(docs, store, ChunkOptions { limit: *chunk_tokens, overlap: *overlap })
            }
            Command::Kb { action: KbAction::Query { store, question, k, answer } } => {
                self.kb_query(store, question, *k, *answer)
            }
            Command::Dataset { action: DatasetAction::Export { corpus, gold, template } } => {
                self.dataset_export(corpus, gold, template)
            }
            Command::Gen { what: GenWhat::SynthDatis { n, seed, noise } } => self.gen_synth_datis(*n, *seed, *noise),
            Command::Templates { action: TemplatesAction::List } => self.templates_list(),
        }
    }

    fn resolve_config(&self) -> Result<CliConfig, CliError> {
        let g = self.global;
        let config_path = g.config.clone().or_else(|| (self.env)(ENV_CONFIG).map(PathBuf::from));
        let file = match &config_path {
            Some(path) => parse_config_file(path)?,
            None => BTreeMap::new(),
        };
        let mut flags = BTreeMap::new();
        let mut flag = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                flags.insert(key.to_string(), v);
            }
        };
        flag("llm.url", g.url.clone());
        flag("llm.model", g.model.clone());
        flag("embed.url", g.embed_url.clone());
        flag("embed.model", g.embed_model.clone());
        flag("gen.temperature", g.temperature.map(|v| v.to_string()));
        flag("gen.top_k", g.top_k.map(|v| v.to_string()));
        flag("gen.max_new_tokens", g.max_new_tokens.map(|v| v.to_string()));
        flag("llm.timeout_secs", g.timeout_secs.map(|v| v.to_string()));
        flag("llm.max_retries", g.max_retries.map(|v| v.to_string()));
        flag("max_in_flight", g.max_in_flight.map(|v| v.to_string()));

        let mut paths = BTreeMap::new();
        for (name, path) in [
            ("config", config_path),
            ("mock", g.mock.clone()),
            ("out", g.out.clone()),
            ("feedback_log", g.feedback_log.clone()),
            ("templates_dir", g.templates_dir.clone()),
        ] {
            if let Some(p) = path {
                paths.insert(name.to_string(), p);
            }
        }
        Ok(resolve(&layer(&flags, self.env, &file), paths)?)
    }

    fn config(&self) -> &CliConfig {
        self.config.as_ref().expect("config resolved before dispatch")
    }

    fn client(&self) -> Result<LlmClient, CliError> {
        if self.global.offline {
            return Err(CliError::Usage("this command needs a model backend; drop --offline or use --mock".into()));
        }
        match &self.global.mock {
            Some(path) => {
                let fixture = MockFixture::load(path).map_err(CliError::Data)?;
                Ok(LlmClient::scripted(ScriptedBackend::new(fixture)))
            }
            None => Ok(LlmClient::http()),
        }
    }

    fn templates(&self) -> Result<TemplateRegistry, CliError> {
        let mut registry = TemplateRegistry::builtin();
        if let Some(dir) = &self.global.templates_dir {
            registry.load_dir(dir)?;
        }
        Ok(registry)
    }

    fn emit(&mut self, text: &str) -> Result<(), CliError> {
        match &self.global.out {
            Some(path) => std::fs::write(path, text).map_err(|e| io_error(path, e)),
            None => self.stdout.write_all(text.as_bytes()).map_err(|e| CliError::Data(format!("stdout: {e}"))),
        }
    }

    fn emit_jsonl<T: serde::Serialize>(&mut self, records: &[T]) -> Result<(), CliError> {
        let mut text = String::new();
        for r in records {
            text.push_str(&serde_json::to_string(r).expect("records serialize"));
            text.push('\n');
        }
        self.emit(&text)
    }

    fn warn(&mut self, message: impl std::fmt::Display) {
        let _ = writeln!(self.stderr, "avtext: {message}");
    }

    fn append_feedback(&self, records: &[OutcomeRecord]) -> Result<(), CliError> {
        let Some(path) = &self.global.feedback_log else { return Ok(()) };
        let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| io_error(path, e))?;
        for r in records {
            let line = json!({
                "message_id": r.message_id,
                "field": r.field,
                "value": r.value,
                "template_id": r.template_id,
                "raw_model_text": r.raw_model_text,
                "rating": null,
            });
            writeln!(file, "{line}").map_err(|e| io_error(path, e))?;
        }
        Ok(())
    }

    fn extract(&mut self, task: &ExtractTask) -> Result<(), CliError> {
        let (args, default_template) = match task {
            ExtractTask::Datis(a) => (a, "datis_arr_dep_runways"),
            ExtractTask::NtmlTimeline(a) => (a, "ntml_timeline"),
            ExtractTask::NtmlTmi(a) => (a, "ntml_staffing_tmi"),
            ExtractTask::CleanTranscript(a) => (a, "transcript_clean"),
        };
        let template_id = args.template.as_deref().unwrap_or(default_template);
        let format = match &args.format {
            Some(f) => f.parse::<CorpusFormat>().map_err(CliError::Usage)?,
            None => CorpusFormat::from_path(&args.input),
        };
        let messages = load_corpus(&args.input, format)?;

        let outcomes = if self.global.offline {
            rule_based_outcomes(&messages, template_id)?
        } else {
            self.llm_outcomes(&messages, template_id, matches!(task, ExtractTask::Datis(_)))?
        };
        let records: Vec<OutcomeRecord> = outcomes.iter().map(ExtractionOutcome::to_record).collect();
        self.append_feedback(&records)?;
        self.emit_jsonl(&records)
    }

    fn llm_outcomes(&mut self, messages: &[RawMessage], template_id: &str, datis: bool) -> Result<Vec<ExtractionOutcome>, CliError> {
        let task = Task::for_template(template_id)
            .ok_or_else(|| CliError::Usage(format!("template {template_id:?} has no structured parser")))?;
        let is_datis = matches!(task, Task::DatisRunways | Task::DatisClosedRunways | Task::DatisClosedTaxiways);
        if is_datis != datis {
            return Err(CliError::Usage(format!("template {template_id:?} does not fit this subcommand")));
        }
        let (client, registry) = (self.client()?, self.templates()?);
        let cfg = self.config().clone();
        let mut extractor = LlmExtractor::new(&client, &cfg.endpoint, &registry);
        extractor.params = cfg.params;
        let mut outcomes = Vec::new();
        let mut worst: Option<CliError> = None;
        for (id, result) in extractor.extract_corpus(messages, task, template_id, cfg.max_in_flight) {
            match result {
                Ok(found) => outcomes.extend(found),
                Err(e) => {
                    let e = CliError::from(e);
                    self.warn(format!("{id}: {e}"));
                    if worst.as_ref().is_none_or(|w| e.code() > w.code()) {
                        worst = Some(e);
                    }
                }
            }
        }
        match worst {
            Some(e) if outcomes.is_empty() => Err(e),
            Some(e) => {
                // Keep what succeeded, but signal the failure.
                let records: Vec<OutcomeRecord> = outcomes.iter().map(ExtractionOutcome::to_record).collect();
                self.append_feedback(&records)?;
                self.emit_jsonl(&records)?;
                Err(CliError::from_code(e.code(), "some messages failed; see diagnostics above"))
            }
            None => Ok(outcomes),
        }
    }

    fn decode_metar(&mut self, codes: &[String]) -> Result<(), CliError> {
        let mut lines = String::new();
        if self.global.offline {
            for code in codes {
                let meaning = decode_metar_term(code).map_err(|e| CliError::Data(e.to_string()))?;
                lines.push_str(&meaning);
                lines.push('\n');
            }
        } else {
            let (client, registry) = (self.client()?, self.templates()?);
            let cfg = self.config().clone();
            let mut extractor = LlmExtractor::new(&client, &cfg.endpoint, &registry);
            extractor.params = cfg.params;
            for code in codes {
                lines.push_str(&extractor.decode_metar(code)?);
                lines.push('\n');
            }
        }
        self.emit(&lines)
    }

    fn eval_run(&mut self, pred: &Path, gold: &Path, method: &str, format: &str) -> Result<(), CliError> {
        let format: ReportFormat = format.parse()?;
        let gold = load_gold(gold)?;
        let predictions = read_jsonl::<OutcomeRecord>(pred)?
            .into_iter()
            .map(ExtractionOutcome::from_record)
            .collect::<Result<Vec<_>, _>>()?;
        let generated_at = match (self.env)("SOURCE_DATE_EPOCH") {
            Some(v) => v.parse().map_err(|_| CliError::Usage(format!("SOURCE_DATE_EPOCH={v:?} is not a number")))?,
            None => std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let report = evaluate_at(&predictions, &gold, method, generated_at);
        if !report.missing_gold.is_empty() {
            self.warn(format!("{} predictions had no gold label and were skipped", report.missing_gold.len()));
        }
        let text = render_report(&report, format)?;
        self.emit(&text)
    }

    fn kb_build(&mut self, docs: &Path, store_path: &Path, options: ChunkOptions) -> Result<(), CliError> {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(docs)
            .map_err(|e| io_error(docs, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "txt" || x == "md"))
            .collect();
        entries.sort();
        let mut documents = Vec::new();
        for path in &entries {
            let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            let doc_id = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
            documents.push((doc_id, text));
        }
        if documents.is_empty() {
            return Err(CliError::Data(format!("{}: no .txt or .md documents", docs.display())));
        }
        let mut store = if store_path.exists() { load_store(store_path)? } else { VectorStore::new() };
        let client = self.client()?;
        let cfg = self.config().embed_endpoint.clone();
        let chunks = index_documents(&mut store, &client, &cfg, &documents, options)?;
        store.persist(store_path)?;
        let summary = json!({ "documents": documents.len(), "chunks": chunks, "store_size": store.len() });
        self.emit(&format!("{summary}\n"))
    }

    fn kb_query(&mut self, store_path: &Path, question: &str, k: usize, answer: bool) -> Result<(), CliError> {
        let store = load_store(store_path)?;
        let client = self.client()?;
        let cfg = self.config().clone();
        let query = embed(&client, &cfg.embed_endpoint, &[question.to_string()], store.dim())?
            .pop()
            .ok_or_else(|| CliError::Backend("no embedding returned".into()))?;
        let hits = store.query(&query, k)?;
        if !answer {
            let rows: Vec<_> = hits
                .iter()
                .map(|h| json!({ "doc_id": h.chunk.doc_id, "seq": h.chunk.seq, "score": h.score, "text": h.chunk.text }))
                .collect();
            return self.emit_jsonl(&rows);
        }
        let prompt = assemble_rag_prompt(question, &hits, &default_rag_template())?;
        let completion = client.complete(&cfg.endpoint, &cfg.params, &prompt)?;
        let sources: Vec<String> = hits.iter().map(|h| format!("{}#{}", h.chunk.doc_id, h.chunk.seq)).collect();
        let line = json!({ "question": question, "answer": completion.text.trim(), "sources": sources });
        self.emit(&format!("{line}\n"))
    }

    fn dataset_export(&mut self, corpus: &Path, gold: &Path, template_id: &str) -> Result<(), CliError> {
        let registry = self.templates()?;
        let template = registry.get_template(template_id)?;
        let task = Task::for_template(template_id)
            .ok_or_else(|| CliError::Usage(format!("template {template_id:?} has no answer format")))?;
        let messages = load_corpus(corpus, CorpusFormat::from_path(corpus))?;
        let labels = load_gold(gold)?;
        avtext::corpus::check_gold_against(&labels, &messages)?;
        let mut by_msg: BTreeMap<&str, BTreeMap<GoldField, FieldValue>> = BTreeMap::new();
        for label in &labels {
            by_msg.entry(label.message_id.as_str()).or_default().insert(label.field, label.value.clone());
        }
        let mut records = Vec::new();
        let mut skipped = 0;
        for msg in &messages {
            match by_msg.get(msg.id.as_str()).and_then(|values| task.render_answer(values)) {
                Some(output) => records.push(InstructionRecord::new(&template.instruction, &msg.text, output)),
                None => skipped += 1,
            }
        }
        if skipped > 0 {
            self.warn(format!("{skipped} messages lack labels for {template_id} and were skipped"));
        }
        match &self.global.out {
            Some(path) => {
                export_instruction_dataset(&records, path)?;
                Ok(())
            }
            None => self.emit_jsonl(&records),
        }
    }

    fn gen_synth_datis(&mut self, n: usize, seed: u64, noise: f64) -> Result<(), CliError> {
        let spec = SynthSpec::new(n, seed, noise)?;
        let dir = self
            .global
            .out
            .clone()
            .ok_or_else(|| CliError::Usage("gen synth-datis needs --out <dir>".into()))?;
        std::fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
        let (messages, labels) = generate_synth_datis(&spec);
        write_corpus(&dir.join("corpus.jsonl"), &messages)?;
        write_gold(&dir.join("gold.jsonl"), &labels)?;
        let _ = writeln!(self.stdout, "{}", json!({ "messages": messages.len(), "labels": labels.len(), "dir": dir }));
        Ok(())
    }

    fn templates_list(&mut self) -> Result<(), CliError> {
        let registry = self.templates()?;
        let text: String = registry.list_templates().into_iter().map(|(id, desc)| format!("{id}\t{desc}\n")).collect();
        self.emit(&text)
    }
}

impl CliError {
    fn from_code(code: i32, message: &str) -> Self {
        match code {
            EXIT_USAGE => CliError::Usage(message.into()),
            EXIT_DATA => CliError::Data(message.into()),
            _ => CliError::Backend(message.into()),
        }
    }
}

fn rule_based_outcomes(messages: &[RawMessage], template_id: &str) -> Result<Vec<ExtractionOutcome>, CliError> {
    let fields: &[GoldField] = match template_id {
        "datis_arr_dep_runways" => &[GoldField::ArrivalRunways, GoldField::DepartureRunways],
        "datis_closed_runways" => &[GoldField::ClosedRunways],
        "datis_closed_taxiways" => &[GoldField::ClosedTaxiways],
        _ => return Err(CliError::Usage(format!("no rule-based path for {template_id:?}; drop --offline"))),
    };
    let mut out = Vec::new();
    for msg in messages {
        let facts = extract_datis_rule_based(&msg.text);
        for field in fields {
            let value = match field {
                GoldField::ArrivalRunways => FieldValue::Runways(facts.arrival.clone()),
                GoldField::DepartureRunways => FieldValue::Runways(facts.departure.clone()),
                GoldField::ClosedRunways => FieldValue::Runways(facts.closed_runways.clone()),
                _ => FieldValue::Taxiways(facts.closed_taxiways.clone()),
            };
            out.push(ExtractionOutcome {
                message_id: msg.id.clone(),
                field: *field,
                raw_model_text: String::new(),
                value,
                template_id: "rule_based".into(),
            });
        }
    }
    Ok(out)
}
