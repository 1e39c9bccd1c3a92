//! Corpus files: one JSON sentence record per line.
//!
//! The canonical writer emits keys in sorted order with no insignificant
//! whitespace, so reading and rewriting a canonical file is byte-identical.

use std::collections::BTreeMap;
use std::path::Path;

use morphdis_core::{Analysis, AnnotatedToken, Corpus, FeatureBundle, FeatureSchema, Sentence, Split};
use serde::{Deserialize, Serialize};

use crate::{read_text, write_text, Error, Result};

// Field order is alphabetical so serialization is key-sorted.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisRecord {
    pub diac: String,
    pub feats: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gloss: Option<String>,
    pub lex: String,
}

impl From<&Analysis> for AnalysisRecord {
    fn from(a: &Analysis) -> Self {
        AnalysisRecord {
            diac: a.diac.clone(),
            feats: a.features.0.clone(),
            gloss: a.gloss.clone(),
            lex: a.lex.clone(),
        }
    }
}

impl From<AnalysisRecord> for Analysis {
    fn from(r: AnalysisRecord) -> Self {
        Analysis {
            features: FeatureBundle(r.feats),
            lex: r.lex,
            diac: r.diac,
            gloss: r.gloss,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TokenRecord {
    analysis: AnalysisRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coda: Option<String>,
    raw: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SentenceRecord {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
    tokens: Vec<TokenRecord>,
}

fn record(s: &Sentence) -> SentenceRecord {
    SentenceRecord {
        id: s.id.clone(),
        provenance: s.provenance.clone(),
        tokens: s
            .tokens
            .iter()
            .map(|t| TokenRecord {
                analysis: (&t.analysis).into(),
                coda: t.coda.clone(),
                raw: t.raw.clone(),
            })
            .collect(),
    }
}

pub fn sentence_to_line(s: &Sentence) -> String {
    serde_json::to_string(&record(s)).expect("corpus records serialize")
}

pub fn corpus_to_string(corpus: &Corpus) -> String {
    let mut out = String::new();
    for s in &corpus.sentences {
        out.push_str(&sentence_to_line(s));
        out.push('\n');
    }
    out
}

pub fn write_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    write_text(path, &corpus_to_string(corpus))
}

/// Parses corpus text, validating every sentence against `schema`.
///
/// Blank lines are skipped. Errors carry the 1-based line number.
pub fn parse_corpus(text: &str, schema: &FeatureSchema, split: Split, origin: &str) -> Result<Corpus> {
    let mut sentences = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SentenceRecord = serde_json::from_str(line).map_err(|e| Error::Format {
            origin: origin.into(),
            line: line_no,
            reason: e.to_string(),
        })?;
        let sentence = Sentence {
            id: rec.id,
            provenance: rec.provenance,
            tokens: rec
                .tokens
                .into_iter()
                .map(|t| AnnotatedToken {
                    raw: t.raw,
                    coda: t.coda,
                    analysis: t.analysis.into(),
                })
                .collect(),
        };
        let data = |source| Error::Data {
            origin: origin.into(),
            line: line_no,
            source,
        };
        sentence.validate(schema).map_err(data)?;
        if !seen.insert(sentence.id.clone()) {
            return Err(data(morphdis_core::Error::InvalidArgument(format!(
                "duplicate sentence id {:?}",
                sentence.id
            ))));
        }
        sentences.push(sentence);
    }
    Ok(Corpus::new(schema.variant(), split, sentences))
}

pub fn read_corpus(path: &Path, schema: &FeatureSchema, split: Split) -> Result<Corpus> {
    parse_corpus(&read_text(path)?, schema, split, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemas;

    const LINE: &str = r#"{"id":"s1","tokens":[{"analysis":{"diac":"kataba","feats":{"pos":"verb"},"lex":"katab"},"raw":"ktb"}]}"#;

    #[test]
    fn canonical_line_round_trips() {
        let schema = schemas::builtin("msa").unwrap();
        let text = format!("{LINE}\n");
        let c = parse_corpus(&text, &schema, Split::Train, "t").unwrap();
        assert_eq!(c.token_count(), 1);
        assert_eq!(corpus_to_string(&c), text);
    }

    #[test]
    fn empty_text_is_an_empty_corpus() {
        let schema = schemas::builtin("msa").unwrap();
        let c = parse_corpus("", &schema, Split::Dev, "t").unwrap();
        assert!(c.is_empty());
        assert_eq!(c.split, Split::Dev);
    }

    #[test]
    fn errors_cite_lines() {
        let schema = schemas::builtin("msa").unwrap();
        let bad = LINE.replace("verb", "banana").replace("s1", "s3");
        let text = format!("{LINE}\n{}\n{bad}\n", LINE.replace("s1", "s2"));
        match parse_corpus(&text, &schema, Split::Train, "t") {
            Err(Error::Data { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_corpus("{\"id\":", &schema, Split::Train, "t") {
            Err(Error::Format { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        let dup = format!("{LINE}\n{LINE}\n");
        assert!(matches!(
            parse_corpus(&dup, &schema, Split::Train, "t"),
            Err(Error::Data { line: 2, .. })
        ));
    }
}
