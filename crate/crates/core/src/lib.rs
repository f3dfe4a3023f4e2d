//! Structured fact extraction from aviation operational text (DATIS, NTML,
//! METAR, voice transcripts).
//!
//! * [`baseline_rules`]: deterministic DATIS reader and METAR glossary
//! * [`prompting`]: `### Instruction / ### Input / ### Output` templates
//! * [`llm_client`]: completion backend contract, retries, scripted mock
//! * [`extractors`]: render/complete/parse pipelines and output parsers
//! * [`retrieval`]: chunking, embeddings, cosine store, RAG prompts
//! * [`evalharness`]: accuracy scoring and synthetic labeled corpora
//! * [`corpus`]: message, gold label and instruction dataset files

pub mod baseline_rules;
pub mod corpus;
pub mod evalharness;
pub mod extractors;
pub mod llm_client;
pub mod prompting;
pub mod retrieval;
