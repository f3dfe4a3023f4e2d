use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::RuleError;

const BUILTIN_GLOSSARY: &str = include_str!("../../data/metar_glossary.tsv");

/// METAR contraction glossary. Keys are stored upper-case.
#[derive(Debug, Clone, Default)]
pub struct Glossary {
    entries: BTreeMap<String, String>,
}

impl Glossary {
    /// Parses `CODE<TAB>Expansion` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, RuleError> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (code, expansion) = line
                .split_once('\t')
                .ok_or(RuleError::MalformedTable { line: idx + 1 })?;
            let (code, expansion) = (code.trim(), expansion.trim());
            if code.is_empty() || expansion.is_empty() {
                return Err(RuleError::MalformedTable { line: idx + 1 });
            }
            entries.insert(code.to_ascii_uppercase(), expansion.to_string());
        }
        Ok(Self { entries })
    }

    /// The shipped glossary, parsed once.
    pub fn builtin() -> &'static Glossary {
        static GLOSSARY: OnceLock<Glossary> = OnceLock::new();
        GLOSSARY.get_or_init(|| Glossary::parse(BUILTIN_GLOSSARY).expect("bundled glossary parses"))
    }

    pub fn lookup(&self, code: &str) -> Result<&str, RuleError> {
        self.entries
            .get(&code.trim().to_ascii_uppercase())
            .map(String::as_str)
            .ok_or_else(|| RuleError::NotInGlossary(code.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Expand a METAR abbreviation using the built-in glossary (case-insensitive).
pub fn decode_metar_term(code: &str) -> Result<String, RuleError> {
    Glossary::builtin().lookup(code).map(str::to_string)
}
