//! Out-of-context morphological analyzer: word form to the set of its
//! possible analyses.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Analysis, Corpus};
use crate::error::Error;
use crate::schema::FeatureSchema;
use crate::Result;

/// What the disambiguator does for a word the analyzer does not know.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BackoffPolicy {
    /// Keep the taggers' own predictions.
    #[default]
    KeepPredictions,
    /// Build an analysis from the predictions and flag it as a backoff.
    SynthesizeFromPredictions,
}

/// Result of an analyzer lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lookup<'a> {
    Found(&'a [Analysis]),
    NoAnalysis,
}

impl<'a> Lookup<'a> {
    pub fn analyses(self) -> Option<&'a [Analysis]> {
        match self {
            Lookup::Found(a) => Some(a),
            Lookup::NoAnalysis => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzerStats {
    pub forms: usize,
    pub analyses: usize,
    pub max_per_form: usize,
}

impl AnalyzerStats {
    pub fn mean_per_form(&self) -> f64 {
        if self.forms == 0 {
            0.0
        } else {
            self.analyses as f64 / self.forms as f64
        }
    }
}

/// Immutable word form to analyses map.
///
/// Each entry is deduplicated and sorted by [`Analysis::canonical_key`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzerDb {
    variant: String,
    backoff: BackoffPolicy,
    provenance: String,
    entries: BTreeMap<String, Vec<Analysis>>,
}

impl AnalyzerDb {
    /// Builds a database from externally produced entries, validating each
    /// analysis against `schema`.
    pub fn from_entries<I>(
        schema: &FeatureSchema,
        backoff: BackoffPolicy,
        provenance: impl Into<String>,
        entries: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<Analysis>)>,
    {
        let mut map: BTreeMap<String, Vec<Analysis>> = BTreeMap::new();
        for (word, analyses) in entries {
            if word.is_empty() {
                return Err(Error::InvalidArgument("empty word form in analyzer entry".into()));
            }
            for a in &analyses {
                schema.validate_bundle(&a.features)?;
            }
            map.entry(word).or_default().extend(analyses);
        }
        for list in map.values_mut() {
            canonicalize(list);
        }
        Ok(AnalyzerDb {
            variant: schema.variant().into(),
            backoff,
            provenance: provenance.into(),
            entries: map,
        })
    }

    /// Collects, per raw form, the distinct gold analyses seen in `train`.
    pub fn compile(train: &Corpus) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut map: BTreeMap<String, Vec<Analysis>> = BTreeMap::new();
        for tok in train.tokens() {
            map.entry(tok.raw.clone())
                .or_default()
                .push(tok.analysis.clone());
        }
        for list in map.values_mut() {
            canonicalize(list);
        }
        Ok(AnalyzerDb {
            variant: train.variant.clone(),
            backoff: BackoffPolicy::KeepPredictions,
            provenance: "compiled-from-train".into(),
            entries: map,
        })
    }

    /// Rebuilds a database from already-validated parts, as read from disk.
    pub fn from_parts(
        variant: impl Into<String>,
        backoff: BackoffPolicy,
        provenance: impl Into<String>,
        entries: BTreeMap<String, Vec<Analysis>>,
    ) -> Self {
        let mut entries = entries;
        for list in entries.values_mut() {
            canonicalize(list);
        }
        AnalyzerDb {
            variant: variant.into(),
            backoff,
            provenance: provenance.into(),
            entries,
        }
    }

    pub fn with_backoff(mut self, backoff: BackoffPolicy) -> Self {
        self.backoff = backoff;
        self
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn analyze(&self, word: &str) -> Lookup<'_> {
        match self.entries.get(word) {
            Some(list) => Lookup::Found(list),
            None => Lookup::NoAnalysis,
        }
    }

    pub fn variant(&self) -> &str {
        &self.variant
    }

    pub fn backoff(&self) -> BackoffPolicy {
        self.backoff
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn entries(&self) -> &BTreeMap<String, Vec<Analysis>> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn stats(&self) -> AnalyzerStats {
        AnalyzerStats {
            forms: self.entries.len(),
            analyses: self.entries.values().map(Vec::len).sum(),
            max_per_form: self.entries.values().map(Vec::len).max().unwrap_or(0),
        }
    }

    pub fn validate(&self, schema: &FeatureSchema) -> Result<()> {
        for (word, list) in &self.entries {
            for a in list {
                schema
                    .validate_bundle(&a.features)
                    .map_err(|e| Error::Schema(format!("entry {word:?}: {e}")))?;
            }
        }
        Ok(())
    }
}

fn canonicalize(list: &mut Vec<Analysis>) {
    list.sort_by_cached_key(Analysis::canonical_key);
    list.dedup_by(|a, b| a.canonical_key() == b.canonical_key());
}
