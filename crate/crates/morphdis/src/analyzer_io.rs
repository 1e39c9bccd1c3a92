//! Analyzer database files.
//!
//! A header record `{backoff, entries, format_version, provenance, variant}`
//! is followed by one `{analyses, word}` record per form, forms sorted.

use std::collections::BTreeMap;
use std::path::Path;

use morphdis_core::{AnalyzerDb, BackoffPolicy, FeatureSchema};
use serde::{Deserialize, Serialize};

use crate::corpus_io::AnalysisRecord;
use crate::{read_text, write_text, Error, Result};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    backoff: BackoffPolicy,
    entries: usize,
    format_version: u64,
    provenance: String,
    variant: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryRecord {
    analyses: Vec<AnalysisRecord>,
    word: String,
}

pub fn analyzer_to_string(db: &AnalyzerDb) -> String {
    let header = Header {
        backoff: db.backoff(),
        entries: db.len(),
        format_version: FORMAT_VERSION,
        provenance: db.provenance().into(),
        variant: db.variant().into(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for (word, analyses) in db.entries() {
        let rec = EntryRecord {
            analyses: analyses.iter().map(AnalysisRecord::from).collect(),
            word: word.clone(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("entry serializes"));
        out.push('\n');
    }
    out
}

pub fn save_analyzer(path: &Path, db: &AnalyzerDb) -> Result<()> {
    write_text(path, &analyzer_to_string(db))
}

pub fn parse_analyzer(text: &str, origin: &str) -> Result<AnalyzerDb> {
    let format = |line: usize, reason: String| Error::Format {
        origin: origin.into(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| format(1, "missing header record".into()))?;
    let raw: serde_json::Value =
        serde_json::from_str(first).map_err(|e| format(1, e.to_string()))?;
    let version = raw
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| format(1, "header lacks an integer format_version".into()))?;
    if version > FORMAT_VERSION {
        return Err(Error::Version {
            origin: origin.into(),
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let header: Header = serde_json::from_value(raw).map_err(|e| format(1, e.to_string()))?;

    let mut entries = BTreeMap::new();
    let mut last: Option<String> = None;
    for (i, line) in lines {
        let rec: EntryRecord = serde_json::from_str(line).map_err(|e| format(i + 1, e.to_string()))?;
        if last.as_ref().is_some_and(|l| *l >= rec.word) {
            return Err(format(i + 1, format!("form {:?} out of order", rec.word)));
        }
        last = Some(rec.word.clone());
        entries.insert(
            rec.word,
            rec.analyses.into_iter().map(Into::into).collect(),
        );
    }
    if entries.len() != header.entries {
        return Err(format(
            entries.len() + 2,
            format!(
                "truncated: header announces {} forms, found {}",
                header.entries,
                entries.len()
            ),
        ));
    }
    Ok(AnalyzerDb::from_parts(
        header.variant,
        header.backoff,
        header.provenance,
        entries,
    ))
}

/// Loads a database and, when `schema` is given, checks its variant and
/// every analysis against it.
pub fn load_analyzer(path: &Path, schema: Option<&FeatureSchema>) -> Result<AnalyzerDb> {
    let origin = path.display().to_string();
    let db = parse_analyzer(&read_text(path)?, &origin)?;
    if let Some(schema) = schema {
        if db.variant() != schema.variant() {
            return Err(Error::Data {
                origin,
                line: 1,
                source: morphdis_core::Error::SchemaMismatch(format!(
                    "analyzer for {:?}, schema is {:?}",
                    db.variant(),
                    schema.variant()
                )),
            });
        }
        db.validate(schema).map_err(|source| Error::Data {
            origin,
            line: 0,
            source,
        })?;
    }
    Ok(db)
}
