//! Knowledge base: token-bounded chunking, embeddings, an exact cosine
//! vector store with binary persistence, and RAG prompt assembly.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::llm_client::{EndpointConfig, LlmClient, LlmError};
use crate::prompting::{render, PromptError, PromptTemplate, RenderedPrompt};

pub const DEFAULT_CHUNK_TOKENS: usize = 500;
pub const DEFAULT_TOP_K: usize = 5;
const NORM_TOLERANCE: f64 = 1e-6;

const STORE_MAGIC: &[u8; 4] = b"AVKB";
const STORE_VERSION: u32 = 1;

const DOCUMENT_QA_TEMPLATE: &str = include_str!("../templates/rag/document_qa.json");

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("document is empty")]
    EmptyDocument,
    #[error("chunk limit must be >= 1 and overlap < limit")]
    InvalidChunking,
    #[error("vector has dimension {got}, store expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector cannot be normalized")]
    ZeroVector,
    #[error("store is empty")]
    EmptyStore,
    #[error("no retrieved context to answer from")]
    NoContext,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt store: {0}")]
    CorruptStore(String),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

/// Splits text into tokens, reported as byte spans into the input.
pub trait Tokenizer: Send + Sync {
    fn spans(&self, text: &str) -> Vec<(usize, usize)>;

    fn tokens<'t>(&self, text: &'t str) -> Vec<&'t str> {
        self.spans(text).into_iter().map(|(s, e)| &text[s..e]).collect()
    }
}

/// Whitespace-delimited words.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceTokenizer;

impl Tokenizer for WhitespaceTokenizer {
    fn spans(&self, text: &str) -> Vec<(usize, usize)> {
        let mut spans = Vec::new();
        let mut start = None;
        for (i, c) in text.char_indices() {
            match (c.is_whitespace(), start) {
                (true, Some(s)) => {
                    spans.push((s, i));
                    start = None;
                }
                (false, None) => start = Some(i),
                _ => {}
            }
        }
        if let Some(s) = start {
            spans.push((s, text.len()));
        }
        spans
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub doc_id: String,
    pub seq: u32,
    pub text: String,
    pub token_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkOptions {
    pub limit: usize,
    pub overlap: usize,
}

impl Default for ChunkOptions {
    fn default() -> Self {
        Self { limit: DEFAULT_CHUNK_TOKENS, overlap: 0 }
    }
}

/// Greedy, non-overlapping chunks of at most `limit` whitespace tokens.
pub fn chunk_document(doc_id: &str, text: &str, limit: usize) -> Result<Vec<Chunk>, RetrievalError> {
    chunk_document_with(doc_id, text, ChunkOptions { limit, overlap: 0 }, &WhitespaceTokenizer)
}

/// Each chunk's text is the source span from its first to its last token, so
/// formatting inside a chunk is preserved.
pub fn chunk_document_with(
    doc_id: &str,
    text: &str,
    options: ChunkOptions,
    tokenizer: &dyn Tokenizer,
) -> Result<Vec<Chunk>, RetrievalError> {
    if options.limit == 0 || options.overlap >= options.limit {
        return Err(RetrievalError::InvalidChunking);
    }
    let spans = tokenizer.spans(text);
    if spans.is_empty() {
        return Err(RetrievalError::EmptyDocument);
    }
    let step = options.limit - options.overlap;
    let mut chunks = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + options.limit).min(spans.len());
        let window = &spans[start..end];
        chunks.push(Chunk {
            doc_id: doc_id.to_string(),
            seq: chunks.len() as u32,
            text: text[window[0].0..window[window.len() - 1].1].to_string(),
            token_count: window.len() as u32,
        });
        if end == spans.len() {
            break;
        }
        start += step;
    }
    Ok(chunks)
}

/// Unit-length embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    /// Normalizes `values` to unit L2 norm. Zero and non-finite vectors are rejected.
    pub fn new(values: Vec<f64>) -> Result<Self, RetrievalError> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(RetrievalError::ZeroVector);
        }
        Ok(Self(values.into_iter().map(|v| v / norm).collect()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        let dot: f64 = self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum();
        dot.clamp(-1.0, 1.0)
    }
}

/// Deterministic feature-hashing embedder used as the mock provider.
#[derive(Debug, Clone, Copy)]
pub struct HashEmbedder {
    dim: usize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self { dim }
    }

    fn bucket(&self, bytes: &[u8]) -> (usize, f64) {
        let digest = Sha256::digest(bytes);
        let idx = u64::from_le_bytes(digest[..8].try_into().unwrap()) % self.dim as u64;
        let sign = if digest[8] & 1 == 0 { 1.0 } else { -1.0 };
        (idx as usize, sign)
    }

    /// Unit vector as plain floats, the shape an embedding backend returns.
    pub fn embed_raw(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for word in text.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
            let (idx, sign) = self.bucket(word.to_lowercase().as_bytes());
            v[idx] += sign;
        }
        if v.iter().all(|x| *x == 0.0) {
            let (idx, _) = self.bucket(text.as_bytes());
            v[idx] = 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| x / norm).collect()
    }

    pub fn embed(&self, text: &str) -> EmbeddingVector {
        EmbeddingVector::new(self.embed_raw(text)).expect("hash embedding is never zero")
    }
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
}

/// Embeds `texts` through the `{base_url}/embeddings` endpoint. When
/// `expected_dim` is set (an existing store), every vector must match it.
pub fn embed(
    client: &LlmClient,
    config: &EndpointConfig,
    texts: &[String],
    expected_dim: Option<usize>,
) -> Result<Vec<EmbeddingVector>, RetrievalError> {
    if texts.is_empty() {
        return Ok(Vec::new());
    }
    let body = json!({ "model": config.model_id, "input": texts });
    let (reply, _) = client.post_json(config, "embeddings", &body)?;
    let parsed: EmbeddingResponse =
        serde_json::from_value(reply).map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
    if parsed.data.len() != texts.len() {
        return Err(LlmError::MalformedResponse(format!(
            "{} embeddings for {} inputs",
            parsed.data.len(),
            texts.len()
        ))
        .into());
    }
    let mut dim = expected_dim;
    parsed
        .data
        .into_iter()
        .map(|d| {
            let expected = *dim.get_or_insert(d.embedding.len());
            if d.embedding.len() != expected {
                return Err(RetrievalError::DimensionMismatch { expected, got: d.embedding.len() });
            }
            EmbeddingVector::new(d.embedding)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalHit {
    pub chunk: Chunk,
    pub score: f64,
}

/// Exact (flat) cosine store keyed by `(doc_id, seq)`. Single writer, many readers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VectorStore {
    dim: Option<usize>,
    entries: BTreeMap<(String, u32), (Chunk, EmbeddingVector)>,
}

impl VectorStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn chunks(&self) -> impl Iterator<Item = &Chunk> {
        self.entries.values().map(|(c, _)| c)
    }

    pub fn vector(&self, doc_id: &str, seq: u32) -> Option<&EmbeddingVector> {
        self.entries.get(&(doc_id.to_string(), seq)).map(|(_, v)| v)
    }

    /// Insert or replace the entry for `(chunk.doc_id, chunk.seq)`. The first
    /// insert fixes the store dimension.
    pub fn upsert(&mut self, chunk: Chunk, vector: EmbeddingVector) -> Result<(), RetrievalError> {
        match self.dim {
            Some(expected) if expected != vector.dim() => {
                return Err(RetrievalError::DimensionMismatch { expected, got: vector.dim() })
            }
            _ => self.dim = Some(vector.dim()),
        }
        self.entries.insert((chunk.doc_id.clone(), chunk.seq), (chunk, vector));
        Ok(())
    }

    /// Top `k` by cosine similarity; ties go to the smaller `(doc_id, seq)`.
    pub fn query(&self, vector: &EmbeddingVector, k: usize) -> Result<Vec<RetrievalHit>, RetrievalError> {
        let Some(expected) = self.dim.filter(|_| !self.entries.is_empty()) else {
            return Err(RetrievalError::EmptyStore);
        };
        if vector.dim() != expected {
            return Err(RetrievalError::DimensionMismatch { expected, got: vector.dim() });
        }
        let mut scored: Vec<(&(String, u32), f64)> =
            self.entries.iter().map(|(key, (_, v))| (key, v.cosine(vector))).collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(scored
            .into_iter()
            .take(k)
            .map(|(key, score)| RetrievalHit { chunk: self.entries[key].0.clone(), score })
            .collect())
    }

    /// Writes to a temporary file next to `path`, then renames over it.
    pub fn persist(&self, path: &Path) -> Result<(), RetrievalError> {
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        {
            let mut out = std::io::BufWriter::new(tmp.as_file_mut());
            out.write_all(STORE_MAGIC)?;
            out.write_all(&STORE_VERSION.to_le_bytes())?;
            out.write_all(&(self.dim.unwrap_or(0) as u32).to_le_bytes())?;
            out.write_all(&(self.entries.len() as u64).to_le_bytes())?;
            for (chunk, vector) in self.entries.values() {
                write_str(&mut out, &chunk.doc_id)?;
                out.write_all(&chunk.seq.to_le_bytes())?;
                out.write_all(&chunk.token_count.to_le_bytes())?;
                write_str(&mut out, &chunk.text)?;
                for v in vector.values() {
                    out.write_all(&v.to_le_bytes())?;
                }
            }
            out.flush()?;
        }
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, RetrievalError> {
        let bytes = std::fs::read(path)?;
        let mut cur = Cursor { bytes: &bytes, pos: 0 };
        if cur.take(4)? != STORE_MAGIC {
            return Err(RetrievalError::CorruptStore("bad magic".into()));
        }
        let version = cur.u32()?;
        if version != STORE_VERSION {
            return Err(RetrievalError::CorruptStore(format!("unsupported version {version}")));
        }
        let dim = cur.u32()? as usize;
        let count = cur.u64()?;
        if dim == 0 && count > 0 {
            return Err(RetrievalError::CorruptStore("entries without a dimension".into()));
        }
        let mut store = VectorStore::new();
        for _ in 0..count {
            let doc_id = cur.string()?;
            let seq = cur.u32()?;
            let token_count = cur.u32()?;
            let text = cur.string()?;
            let mut values = Vec::with_capacity(dim);
            for _ in 0..dim {
                values.push(f64::from_le_bytes(cur.take(8)?.try_into().unwrap()));
            }
            let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > NORM_TOLERANCE {
                return Err(RetrievalError::CorruptStore(format!("vector for {doc_id}#{seq} is not unit length")));
            }
            store.upsert(Chunk { doc_id, seq, text, token_count }, EmbeddingVector(values))?;
        }
        if cur.pos != bytes.len() {
            return Err(RetrievalError::CorruptStore("trailing bytes".into()));
        }
        Ok(store)
    }
}

pub fn load_store(path: &Path) -> Result<VectorStore, RetrievalError> {
    VectorStore::load(path)
}

fn write_str(out: &mut impl Write, s: &str) -> std::io::Result<()> {
    out.write_all(&(s.len() as u32).to_le_bytes())?;
    out.write_all(s.as_bytes())
}

struct Cursor<'b> {
    bytes: &'b [u8],
    pos: usize,
}

impl<'b> Cursor<'b> {
    fn take(&mut self, n: usize) -> Result<&'b [u8], RetrievalError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| RetrievalError::CorruptStore("truncated".into()))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, RetrievalError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, RetrievalError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, RetrievalError> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec()).map_err(|_| RetrievalError::CorruptStore("invalid utf-8".into()))
    }
}

/// Template for document question answering over retrieved context.
pub fn default_rag_template() -> PromptTemplate {
    PromptTemplate::from_json(DOCUMENT_QA_TEMPLATE).expect("bundled template parses")
}

/// Context block of `[doc_id#seq] text` passages in hit order, followed by
/// `Question: ...`.
pub fn rag_input(question: &str, hits: &[RetrievalHit]) -> String {
    let mut input = String::new();
    for hit in hits {
        input.push_str(&format!("[{}#{}] {}\n\n", hit.chunk.doc_id, hit.chunk.seq, hit.chunk.text));
    }
    input.push_str(&format!("Question: {question}"));
    input
}

pub fn assemble_rag_prompt(
    question: &str,
    hits: &[RetrievalHit],
    template: &PromptTemplate,
) -> Result<RenderedPrompt, RetrievalError> {
    if hits.is_empty() {
        return Err(RetrievalError::NoContext);
    }
    Ok(render(template, &rag_input(question, hits))?)
}

/// Chunk, embed and upsert documents. Returns the number of chunks stored.
pub fn index_documents(
    store: &mut VectorStore,
    client: &LlmClient,
    config: &EndpointConfig,
    documents: &[(String, String)],
    options: ChunkOptions,
) -> Result<usize, RetrievalError> {
    let mut stored = 0;
    for (doc_id, text) in documents {
        let chunks = chunk_document_with(doc_id, text, options, &WhitespaceTokenizer)?;
        let texts: Vec<String> = chunks.iter().map(|c| c.text.clone()).collect();
        let vectors = embed(client, config, &texts, store.dim())?;
        for (chunk, vector) in chunks.into_iter().zip(vectors) {
            store.upsert(chunk, vector)?;
            stored += 1;
        }
    }
    Ok(stored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm_client::{MockFixture, MockRule, ScriptedBackend};

    fn words(n: usize) -> String {
        (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ")
    }

    fn unit(values: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(values.to_vec()).unwrap()
    }

    fn chunk(doc: &str, seq: u32, text: &str) -> Chunk {
        Chunk { doc_id: doc.into(), seq, text: text.into(), token_count: text.split_whitespace().count() as u32 }
    }

    #[test]
    fn twelve_hundred_words() {
        let chunks = chunk_document("d", &words(1200), 500).unwrap();
        let counts: Vec<u32> = chunks.iter().map(|c| c.token_count).collect();
        assert_eq!(counts, [500, 500, 200]);
        assert_eq!(chunks.iter().map(|c| c.seq).collect::<Vec<_>>(), [0, 1, 2]);
        assert!(chunks[1].text.starts_with("w500 "));
    }

    #[test]
    fn short_and_empty_documents() {
        let chunks = chunk_document("d", "three word doc", 500).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].token_count, 3);
        assert!(matches!(chunk_document("d", "", 500), Err(RetrievalError::EmptyDocument)));
        assert!(matches!(chunk_document("d", " \n\t", 500), Err(RetrievalError::EmptyDocument)));
        assert!(matches!(chunk_document("d", "x", 0), Err(RetrievalError::InvalidChunking)));
    }

    #[test]
    fn overlap_steps_back() {
        let chunks =
            chunk_document_with("d", &words(10), ChunkOptions { limit: 4, overlap: 1 }, &WhitespaceTokenizer).unwrap();
        let texts: Vec<&str> = chunks.iter().map(|c| c.text.as_str()).collect();
        assert_eq!(texts, ["w0 w1 w2 w3", "w3 w4 w5 w6", "w6 w7 w8 w9"]);
    }

    #[test]
    fn hash_embedder_determinism() {
        let e = HashEmbedder::new(64);
        assert_eq!(e.embed("a"), e.embed("a"));
        let (a, b) = (e.embed("a"), e.embed("b"));
        assert_ne!(a, b);
        for v in [&a, &b] {
            let norm: f64 = v.values().iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn embed_via_mock_backend() {
        let client = LlmClient::scripted(ScriptedBackend::new(MockFixture::default()));
        let cfg = EndpointConfig::new("http://mock.invalid/v1", "hash-embedder").unwrap();
        let texts = vec!["a".to_string(), "a".to_string(), "b".to_string()];
        let vs = embed(&client, &cfg, &texts, None).unwrap();
        assert_eq!(vs[0], vs[1]);
        assert_ne!(vs[0], vs[2]);
        assert_eq!(vs[0], HashEmbedder::new(64).embed("a"));
        assert!(matches!(
            embed(&client, &cfg, &texts, Some(8)),
            Err(RetrievalError::DimensionMismatch { expected: 8, got: 64 })
        ));
    }

    #[test]
    fn upsert_semantics() {
        let mut store = VectorStore::new();
        store.upsert(chunk("d", 0, "old"), unit(&[1.0; 8])).unwrap();
        assert_eq!(store.dim(), Some(8));
        store.upsert(chunk("d", 0, "new"), unit(&[1.0; 8])).unwrap();
        assert_eq!(store.len(), 1);
        assert_eq!(store.chunks().next().unwrap().text, "new");
        assert!(matches!(
            store.upsert(chunk("d", 1, "x"), unit(&[1.0; 4])),
            Err(RetrievalError::DimensionMismatch { expected: 8, got: 4 })
        ));
        assert!(matches!(EmbeddingVector::new(vec![0.0; 3]), Err(RetrievalError::ZeroVector)));
    }

    #[test]
    fn query_scores() {
        let mut store = VectorStore::new();
        store.upsert(chunk("a", 0, "diag"), unit(&[1.0, 1.0])).unwrap();
        store.upsert(chunk("b", 0, "axis"), unit(&[1.0, 0.0])).unwrap();
        let hits = store.query(&unit(&[1.0, 0.0]), 5).unwrap();
        assert_eq!(hits.len(), 2);
        assert_eq!(hits[0].chunk.doc_id, "b");
        assert!((hits[0].score - 1.0).abs() < 1e-6);
        assert!((hits[1].score - 0.5f64.sqrt()).abs() < 1e-6);
        assert!(matches!(VectorStore::new().query(&unit(&[1.0]), 5), Err(RetrievalError::EmptyStore)));
        assert!(matches!(store.query(&unit(&[1.0, 0.0, 0.0]), 5), Err(RetrievalError::DimensionMismatch { .. })));
    }

    #[test]
    fn orthogonal_store() {
        let mut store = VectorStore::new();
        for i in 0..4 {
            let mut v = vec![0.0; 4];
            v[i] = 1.0;
            store.upsert(chunk("e", i as u32, "x"), unit(&v)).unwrap();
        }
        let hits = store.query(&unit(&[0.0, 0.0, 1.0, 0.0]), 4).unwrap();
        assert_eq!(hits[0].chunk.seq, 2);
        assert!((hits[0].score - 1.0).abs() < 1e-6);
        for hit in &hits[1..] {
            assert!(hit.score.abs() < 1e-6);
        }
        // Zero-score ties come back in key order.
        assert_eq!(hits[1..].iter().map(|h| h.chunk.seq).collect::<Vec<_>>(), [0, 1, 3]);
    }

    #[test]
    fn persistence_round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kb.bin");
        let e = HashEmbedder::new(16);
        let mut store = VectorStore::new();
        for (i, text) in ["runway closed", "ground delay program", "miles in trail"].iter().enumerate() {
            store.upsert(chunk("doc", i as u32, text), e.embed(text)).unwrap();
        }
        store.persist(&path).unwrap();
        let loaded = load_store(&path).unwrap();
        assert_eq!(loaded, store);

        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        assert!(matches!(load_store(&path), Err(RetrievalError::CorruptStore(_))));
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(load_store(&path), Err(RetrievalError::CorruptStore(_))));

        VectorStore::new().persist(&path).unwrap();
        let empty = load_store(&path).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.dim(), None);
    }

    #[test]
    fn rag_prompt_layout() {
        let hits = vec![
            RetrievalHit { chunk: chunk("faq", 3, "first passage"), score: 0.9 },
            RetrievalHit { chunk: chunk("guide", 0, "second passage"), score: 0.4 },
        ];
        let prompt = assemble_rag_prompt("What is it?", &hits, &default_rag_template()).unwrap();
        let section = prompt.query_section();
        assert_eq!(section, "[faq#3] first passage\n\n[guide#0] second passage\n\nQuestion: What is it?");
        assert!(matches!(
            assemble_rag_prompt("q", &[], &default_rag_template()),
            Err(RetrievalError::NoContext)
        ));
    }

    #[test]
    fn ftn_question_answered_from_context() {
        let answer = "The FTN is a number assigned to you by the FAA that stays with you throughout the course of your aviation career.";
        let client = LlmClient::scripted(ScriptedBackend::new(MockFixture {
            completions: vec![MockRule::contains("Question: What is the FTN?", answer)],
            ..MockFixture::default()
        }));
        let cfg = EndpointConfig::new("http://mock.invalid/v1", "m").unwrap();
        let mut store = VectorStore::new();
        let docs = vec![
            ("iacra.txt".to_string(), format!("{answer} Your FTN is assigned after you register in IACRA.")),
            ("weather.txt".to_string(), "METAR SH means shower".to_string()),
        ];
        index_documents(&mut store, &client, &cfg, &docs, ChunkOptions::default()).unwrap();
        let q = embed(&client, &cfg, &["What is the FTN?".to_string()], store.dim()).unwrap().remove(0);
        let hits = store.query(&q, DEFAULT_TOP_K).unwrap();
        assert_eq!(hits[0].chunk.doc_id, "iacra.txt");
        let prompt = assemble_rag_prompt("What is the FTN?", &hits, &default_rag_template()).unwrap();
        let out = client.complete(&cfg, &Default::default(), &prompt).unwrap();
        assert!(out.text.contains("assigned to you by the FAA"));
    }
}
