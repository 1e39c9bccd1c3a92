//! Per-token distribution interchange files.
//!
//! One record per sentence:
//! `{"id", "tokens": [{"feats": {feature: {value: p}}, "raw", "unfactored"?: {tag: p}}]}`.
//! Probabilities are written in scientific notation with ten significant digits.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use morphdis_core::{Corpus, FeatureDistribution, FeatureSchema};
use serde::Deserialize;

use crate::{read_text, write_text, Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TokenRecord {
    feats: BTreeMap<String, BTreeMap<String, f64>>,
    raw: String,
    #[serde(default)]
    unfactored: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SentenceRecord {
    id: String,
    tokens: Vec<TokenRecord>,
}

fn key(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn write_probs(out: &mut String, dist: &BTreeMap<String, f64>) {
    out.push('{');
    for (i, (k, p)) in dist.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{}:{:.9e}", key(k), p);
    }
    out.push('}');
}

pub fn distributions_to_string(corpus: &Corpus, dists: &[Vec<FeatureDistribution>]) -> Result<String> {
    if corpus.sentences.len() != dists.len() {
        return Err(morphdis_core::Error::Alignment(format!(
            "{} sentences vs {} distribution lists",
            corpus.sentences.len(),
            dists.len()
        ))
        .into());
    }
    let mut out = String::new();
    for (s, ds) in corpus.sentences.iter().zip(dists) {
        if s.tokens.len() != ds.len() {
            return Err(morphdis_core::Error::Alignment(format!(
                "sentence {:?}: {} tokens vs {} distributions",
                s.id,
                s.tokens.len(),
                ds.len()
            ))
            .into());
        }
        let _ = write!(out, "{{\"id\":{},\"tokens\":[", key(&s.id));
        for (i, (t, d)) in s.tokens.iter().zip(ds).enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("{\"feats\":{");
            for (j, (f, dist)) in d.per_feature.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&key(f));
                out.push(':');
                write_probs(&mut out, dist);
            }
            let _ = write!(out, "}},\"raw\":{}", key(&t.raw));
            if let Some(u) = &d.unfactored {
                out.push_str(",\"unfactored\":");
                write_probs(&mut out, u);
            }
            out.push('}');
        }
        out.push_str("]}\n");
    }
    Ok(out)
}

pub fn write_distributions(path: &Path, corpus: &Corpus, dists: &[Vec<FeatureDistribution>]) -> Result<()> {
    write_text(path, &distributions_to_string(corpus, dists)?)
}

/// Parses an interchange file aligned with `corpus`, validating and
/// renormalizing every distribution.
pub fn parse_distributions(
    text: &str,
    origin: &str,
    schema: &FeatureSchema,
    corpus: &Corpus,
) -> Result<Vec<Vec<FeatureDistribution>>> {
    let mut out = Vec::with_capacity(corpus.sentences.len());
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    for sentence in &corpus.sentences {
        let data = |line: usize, source| Error::Data {
            origin: origin.into(),
            line,
            source,
        };
        let Some((i, line)) = lines.next() else {
            return Err(data(
                text.lines().count() + 1,
                morphdis_core::Error::Alignment(format!(
                    "no distributions for sentence {:?}",
                    sentence.id
                )),
            ));
        };
        let line_no = i + 1;
        let rec: SentenceRecord = serde_json::from_str(line).map_err(|e| Error::Format {
            origin: origin.into(),
            line: line_no,
            reason: e.to_string(),
        })?;
        let misaligned = |msg: String| data(line_no, morphdis_core::Error::Alignment(msg));
        if rec.id != sentence.id {
            return Err(misaligned(format!(
                "sentence id {:?}, corpus has {:?}",
                rec.id, sentence.id
            )));
        }
        if rec.tokens.len() != sentence.tokens.len() {
            return Err(misaligned(format!(
                "sentence {:?}: {} distributions for {} tokens",
                rec.id,
                rec.tokens.len(),
                sentence.tokens.len()
            )));
        }
        let mut dists = Vec::with_capacity(rec.tokens.len());
        for (t, gold) in rec.tokens.into_iter().zip(&sentence.tokens) {
            if t.raw != gold.raw {
                return Err(misaligned(format!(
                    "sentence {:?}: token {:?}, corpus has {:?}",
                    rec.id, t.raw, gold.raw
                )));
            }
            let mut d = FeatureDistribution {
                per_feature: t.feats,
                unfactored: t.unfactored,
            };
            d.normalize(schema).map_err(|e| data(line_no, e))?;
            dists.push(d);
        }
        out.push(dists);
    }
    if let Some((i, _)) = lines.next() {
        return Err(Error::Data {
            origin: origin.into(),
            line: i + 1,
            source: morphdis_core::Error::Alignment("more records than corpus sentences".into()),
        });
    }
    Ok(out)
}

pub fn load_external_distributions(
    path: &Path,
    schema: &FeatureSchema,
    corpus: &Corpus,
) -> Result<Vec<Vec<FeatureDistribution>>> {
    parse_distributions(&read_text(path)?, &path.display().to_string(), schema, corpus)
}
