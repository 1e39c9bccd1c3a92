//! Per-token probability distributions over feature values, from the
//! built-in contextual classifier or an external producer.
//!
//! A [`TaggerModel`] is either factored (one classifier per schema feature)
//! or unfactored (one classifier over whole tag strings). Both expose the
//! same [`FeatureDistribution`] output: unfactored models also fill the
//! per-feature field with marginals so downstream code never needs to know
//! which kind produced a distribution.

pub mod features;
pub mod perceptron;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Analysis, Corpus, Sentence};
use crate::error::Error;
use crate::schema::{FeatureBundle, FeatureSchema};
use crate::Result;

pub use features::FeatureConfig;
pub use perceptron::Classifier;

use perceptron::{argmax, FeatureIndex, Trainer};

/// Largest deviation from 1 a probability vector may show before it is rejected.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-4;

/// Name of the single classifier of an unfactored model.
pub const UNFACTORED_CLASSIFIER: &str = "unfactored";

/// Placeholder core tag when the schema has no `pos` feature.
const NO_CORE_TAG: &str = "-";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TaggerKind {
    Factored,
    Unfactored,
}

impl core::str::FromStr for TaggerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "factored" => Ok(TaggerKind::Factored),
            "unfactored" => Ok(TaggerKind::Unfactored),
            _ => Err(Error::InvalidArgument(format!("unknown tagger kind {s:?}"))),
        }
    }
}

/// Probability of every feature value (and optionally every whole tag) for one token.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureDistribution {
    pub per_feature: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unfactored: Option<BTreeMap<String, f64>>,
}

fn best_entry(dist: &BTreeMap<String, f64>) -> Option<&str> {
    let mut best: Option<(&str, f64)> = None;
    for (k, &p) in dist {
        if best.is_none_or(|(_, bp)| p > bp) {
            best = Some((k, p));
        }
    }
    best.map(|(k, _)| k)
}

impl FeatureDistribution {
    /// Most probable value of `feature`; ties go to the smallest value.
    pub fn argmax(&self, feature: &str) -> Option<&str> {
        self.per_feature.get(feature).and_then(best_entry)
    }

    pub fn argmax_unfactored(&self) -> Option<&str> {
        self.unfactored.as_ref().and_then(best_entry)
    }

    pub fn probability(&self, feature: &str, value: &str) -> f64 {
        self.per_feature
            .get(feature)
            .and_then(|d| d.get(value))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn unfactored_probability(&self, tag: &str) -> Option<f64> {
        self.unfactored
            .as_ref()
            .map(|d| d.get(tag).copied().unwrap_or(0.0))
    }

    /// Hard prediction used for retagging.
    ///
    /// When an unfactored distribution is present its best tag is parsed;
    /// otherwise each feature takes its own argmax, defaulting when absent.
    pub fn argmax_bundle(&self, schema: &FeatureSchema) -> Result<FeatureBundle> {
        if let Some(tag) = self.argmax_unfactored() {
            return schema.parse_tag_str(tag);
        }
        let mut bundle = FeatureBundle::new();
        for def in schema.features() {
            let v = self.argmax(&def.name).unwrap_or(&def.default);
            if !def.contains(v) {
                return Err(Error::value(&def.name, v));
            }
            bundle.insert(def.name.clone(), v);
        }
        Ok(bundle)
    }

    /// Checks keys and ranges against `schema` and rescales every vector to sum to 1.
    ///
    /// Per-feature vectors must already sum to 1 within
    /// [`NORMALIZATION_TOLERANCE`]. Unfactored lists may be top-k truncated,
    /// so they only need a positive sum no larger than 1 plus the tolerance.
    pub fn normalize(&mut self, schema: &FeatureSchema) -> Result<()> {
        for (feature, dist) in self.per_feature.iter_mut() {
            let def = schema
                .feature(feature)
                .ok_or_else(|| Error::UnknownFeature(feature.clone()))?;
            for (value, &p) in dist.iter() {
                if !def.contains(value) {
                    return Err(Error::value(feature, value));
                }
                check_probability(feature, p)?;
            }
            let sum: f64 = dist.values().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(Error::Normalization(format!(
                    "feature {feature:?} sums to {sum}"
                )));
            }
            dist.values_mut().for_each(|p| *p /= sum);
        }
        if let Some(dist) = self.unfactored.as_mut() {
            for (tag, &p) in dist.iter() {
                schema.parse_tag_str(tag)?;
                check_probability("unfactored", p)?;
            }
            let sum: f64 = dist.values().sum();
            if !(sum > 0.0) || sum > 1.0 + NORMALIZATION_TOLERANCE {
                return Err(Error::Normalization(format!("unfactored tags sum to {sum}")));
            }
            dist.values_mut().for_each(|p| *p /= sum);
        }
        Ok(())
    }
}

fn check_probability(what: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Normalization(format!(
            "{what}: probability {p} outside [0, 1]"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub epochs: usize,
    pub seed: u64,
    pub source_corpora: Vec<String>,
    /// Reference to the model training continued from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    pub train_accuracy: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tune_accuracy: Vec<f64>,
    /// 1-based epoch whose parameters were kept.
    pub selected_epoch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedClassifier {
    pub name: String,
    pub classifier: Classifier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggerModel {
    pub kind: TaggerKind,
    pub schema_variant: String,
    pub features: FeatureConfig,
    pub classifiers: Vec<NamedClassifier>,
    pub meta: TrainingMeta,
}

#[derive(Debug, Clone)]
pub struct TrainConfig<'a> {
    pub epochs: usize,
    pub seed: u64,
    pub init: Option<&'a TaggerModel>,
    /// Recorded in the model as the reference to `init`.
    pub init_ref: Option<String>,
    pub source: String,
    pub features: FeatureConfig,
}

impl Default for TrainConfig<'_> {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            seed: crate::DEFAULT_SEED,
            init: None,
            init_ref: None,
            source: String::new(),
            features: FeatureConfig::default(),
        }
    }
}

impl TaggerModel {
    /// Label space of the unfactored classifier, or of the named feature classifier.
    pub fn labels(&self, name: &str) -> Option<&[String]> {
        self.classifiers
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.classifier.labels())
    }

    fn check_schema(&self, schema: &FeatureSchema) -> Result<()> {
        if self.schema_variant != schema.variant() {
            return Err(Error::SchemaMismatch(format!(
                "model trained for {:?}, schema is {:?}",
                self.schema_variant,
                schema.variant()
            )));
        }
        Ok(())
    }

    pub fn predict(
        &self,
        schema: &FeatureSchema,
        forms: &[&str],
    ) -> Result<Vec<FeatureDistribution>> {
        Predictor::new(self, schema, None)?.sentence(forms)
    }

    /// Predicts every sentence; `top_k` truncates unfactored lists.
    pub fn predict_corpus(
        &self,
        schema: &FeatureSchema,
        corpus: &Corpus,
        top_k: Option<usize>,
    ) -> Result<Vec<Vec<FeatureDistribution>>> {
        let p = Predictor::new(self, schema, top_k)?;
        corpus
            .sentences
            .iter()
            .map(|s| {
                let forms: Vec<&str> = s.forms().collect();
                p.sentence(&forms)
            })
            .collect()
    }
}

/// Replaces every gold analysis with the tagger's argmax bundle
/// (lemma and diacritized form set to the raw form).
pub fn tag_corpus(
    schema: &FeatureSchema,
    corpus: &Corpus,
    distributions: &[Vec<FeatureDistribution>],
) -> Result<Corpus> {
    if distributions.len() != corpus.sentences.len() {
        return Err(Error::Alignment(format!(
            "{} sentences vs {} distribution lists",
            corpus.sentences.len(),
            distributions.len()
        )));
    }
    let mut out = corpus.clone();
    for (s, dists) in out.sentences.iter_mut().zip(distributions) {
        if s.tokens.len() != dists.len() {
            return Err(Error::Alignment(format!(
                "sentence {:?}: {} tokens vs {} distributions",
                s.id,
                s.tokens.len(),
                dists.len()
            )));
        }
        for (tok, d) in s.tokens.iter_mut().zip(dists) {
            tok.analysis = Analysis::new(d.argmax_bundle(schema)?, tok.raw.clone(), tok.raw.clone());
        }
    }
    Ok(out)
}

struct Predictor<'m> {
    model: &'m TaggerModel,
    /// Parsed bundle of every unfactored label.
    label_bundles: Vec<FeatureBundle>,
    top_k: Option<usize>,
}

impl<'m> Predictor<'m> {
    fn new(model: &'m TaggerModel, schema: &FeatureSchema, top_k: Option<usize>) -> Result<Self> {
        model.check_schema(schema)?;
        let label_bundles = match model.kind {
            TaggerKind::Factored => Vec::new(),
            TaggerKind::Unfactored => model.classifiers[0]
                .classifier
                .labels()
                .iter()
                .map(|l| schema.parse_tag_str(l))
                .collect::<Result<_>>()?,
        };
        Ok(Predictor {
            model,
            label_bundles,
            top_k,
        })
    }

    fn sentence(&self, forms: &[&str]) -> Result<Vec<FeatureDistribution>> {
        let statics = self.model.features.static_features(forms);
        let mut prev = String::from(features::SENTENCE_START);
        let mut out = Vec::with_capacity(forms.len());
        for mut feats in statics {
            feats.push(features::previous_tag_feature(&prev));
            let dist = match self.model.kind {
                TaggerKind::Factored => {
                    let mut d = FeatureDistribution::default();
                    let mut core = String::from(NO_CORE_TAG);
                    for nc in &self.model.classifiers {
                        let probs = nc.classifier.probabilities(&feats);
                        let labels = nc.classifier.labels();
                        if nc.name == "pos" {
                            core = labels[argmax(&probs)].clone();
                        }
                        d.per_feature.insert(
                            nc.name.clone(),
                            labels.iter().cloned().zip(probs).collect(),
                        );
                    }
                    prev = core;
                    d
                }
                TaggerKind::Unfactored => {
                    let classifier = &self.model.classifiers[0].classifier;
                    let probs = classifier.probabilities(&feats);
                    let best = argmax(&probs);
                    prev = self.label_bundles[best]
                        .get("pos")
                        .unwrap_or(NO_CORE_TAG)
                        .to_string();
                    self.unfactored(classifier.labels(), probs)
                }
            };
            out.push(dist);
        }
        Ok(out)
    }

    fn unfactored(&self, labels: &[String], probs: Vec<f64>) -> FeatureDistribution {
        let mut ranked: Vec<(usize, f64)> = probs.into_iter().enumerate().collect();
        if let Some(k) = self.top_k {
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            ranked.truncate(k.max(1));
            let z: f64 = ranked.iter().map(|r| r.1).sum();
            ranked.iter_mut().for_each(|r| r.1 /= z);
        }
        let mut per_feature: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for &(i, p) in &ranked {
            for (f, v) in self.label_bundles[i].iter() {
                *per_feature
                    .entry(f.to_string())
                    .or_default()
                    .entry(v.to_string())
                    .or_insert(0.0) += p;
            }
        }
        FeatureDistribution {
            per_feature,
            unfactored: Some(ranked.iter().map(|&(i, p)| (labels[i].clone(), p)).collect()),
        }
    }
}

/// Gold label of every token for each classifier of a model of `kind`.
fn gold_labels(
    schema: &FeatureSchema,
    kind: TaggerKind,
    sentence: &Sentence,
) -> Result<Vec<Vec<String>>> {
    sentence
        .tokens
        .iter()
        .map(|t| match kind {
            TaggerKind::Factored => {
                let full = schema.fill_defaults(&t.analysis.features)?;
                Ok(schema
                    .names()
                    .map(|n| full.get(n).unwrap_or_default().to_string())
                    .collect())
            }
            TaggerKind::Unfactored => {
                Ok([schema.serialize_unfactored(&t.analysis.features)?.0].to_vec())
            }
        })
        .collect()
}

/// Trains a tagger, optionally continuing from `config.init`.
///
/// When `tune` is given, the epoch with the best tune-set exact-match
/// accuracy is kept (earliest on ties); otherwise the last epoch is.
pub fn train(
    corpus: &Corpus,
    schema: &FeatureSchema,
    kind: TaggerKind,
    config: &TrainConfig<'_>,
    tune: Option<&Corpus>,
) -> Result<TaggerModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if config.epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be at least 1".into()));
    }
    if corpus.variant != schema.variant() {
        return Err(Error::SchemaMismatch(format!(
            "corpus variant {:?} vs schema {:?}",
            corpus.variant,
            schema.variant()
        )));
    }
    if let Some(init) = config.init {
        init.check_schema(schema)?;
        if init.kind != kind {
            return Err(Error::SchemaMismatch(format!(
                "cannot continue a {:?} model as {:?}",
                init.kind, kind
            )));
        }
    }

    let names: Vec<String> = match kind {
        TaggerKind::Factored => schema.names().map(String::from).collect(),
        TaggerKind::Unfactored => [String::from(UNFACTORED_CLASSIFIER)].to_vec(),
    };
    let pos_slot = match kind {
        TaggerKind::Factored => names.iter().position(|n| n == "pos"),
        TaggerKind::Unfactored => None,
    };

    let gold: Vec<Vec<Vec<String>>> = corpus
        .sentences
        .iter()
        .map(|s| gold_labels(schema, kind, s))
        .collect::<Result<_>>()?;
    let statics: Vec<Vec<Vec<String>>> = corpus
        .sentences
        .iter()
        .map(|s| {
            let forms: Vec<&str> = s.forms().collect();
            config.features.static_features(&forms)
        })
        .collect();

    let mut index = FeatureIndex::default();
    let mut trainers: Vec<Trainer> = names
        .iter()
        .enumerate()
        .map(|(slot, name)| {
            let mut labels: BTreeSet<String> = gold
                .iter()
                .flat_map(|s| s.iter().map(|t| t[slot].clone()))
                .collect();
            let init = config.init.and_then(|m| {
                m.classifiers
                    .iter()
                    .find(|c| &c.name == name)
                    .map(|c| &c.classifier)
            });
            if let Some(c) = init {
                labels.extend(c.labels().iter().cloned());
            }
            Trainer::new(labels.into_iter().collect(), init, &mut index)
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..corpus.sentences.len()).collect();
    let mut meta = TrainingMeta {
        epochs: config.epochs,
        seed: config.seed,
        source_corpora: [config.source.clone()].to_vec(),
        init: config.init_ref.clone(),
        ..TrainingMeta::default()
    };
    if let Some(init) = config.init {
        let mut sources = init.meta.source_corpora.clone();
        sources.append(&mut meta.source_corpora);
        meta.source_corpora = sources;
    }

    let mut best: Option<(f64, Vec<NamedClassifier>)> = None;
    let mut last = Vec::new();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut correct = 0usize;
        let mut total = 0usize;
        for &si in &order {
            let mut prev = String::from(features::SENTENCE_START);
            for (ti, stat) in statics[si].iter().enumerate() {
                let mut ids = index.intern_all(stat);
                ids.push(index.intern(&features::previous_tag_feature(&prev)));
                let mut all_right = true;
                for (slot, trainer) in trainers.iter_mut().enumerate() {
                    let truth = trainer
                        .label_id(&gold[si][ti][slot])
                        .expect("gold label in space");
                    all_right &= trainer.learn(truth, &ids) == truth;
                }
                // the previous tag feature sees gold tags during training
                prev = match (kind, pos_slot) {
                    (TaggerKind::Factored, Some(p)) => gold[si][ti][p].clone(),
                    (TaggerKind::Factored, None) => String::from(NO_CORE_TAG),
                    (TaggerKind::Unfactored, _) => gold[si][ti][0]
                        .split(crate::schema::TAG_SEPARATOR)
                        .nth(schema.position("pos").unwrap_or(usize::MAX))
                        .unwrap_or(NO_CORE_TAG)
                        .to_string(),
                };
                correct += all_right as usize;
                total += 1;
            }
        }
        meta.train_accuracy.push(correct as f64 / total as f64);

        let snapshot: Vec<NamedClassifier> = names
            .iter()
            .zip(&trainers)
            .map(|(n, t)| NamedClassifier {
                name: n.clone(),
                classifier: t.averaged(&index),
            })
            .collect();
        if let Some(tune) = tune {
            let candidate = TaggerModel {
                kind,
                schema_variant: schema.variant().into(),
                features: config.features.clone(),
                classifiers: snapshot,
                meta: TrainingMeta::default(),
            };
            let acc = exact_match_accuracy(&candidate, schema, tune)?;
            meta.tune_accuracy.push(acc);
            if best.as_ref().is_none_or(|(b, _)| acc > *b) {
                meta.selected_epoch = epoch + 1;
                best = Some((acc, candidate.classifiers));
            }
        } else {
            meta.selected_epoch = epoch + 1;
            last = snapshot;
        }
    }
    let classifiers = match best {
        Some((_, c)) => c,
        None => last,
    };
    Ok(TaggerModel {
        kind,
        schema_variant: schema.variant().into(),
        features: config.features.clone(),
        classifiers,
        meta,
    })
}

/// Share of tokens whose argmax bundle equals the default-filled gold bundle.
pub fn exact_match_accuracy(
    model: &TaggerModel,
    schema: &FeatureSchema,
    corpus: &Corpus,
) -> Result<f64> {
    let dists = model.predict_corpus(schema, corpus, None)?;
    let mut correct = 0usize;
    let mut total = 0usize;
    for (s, ds) in corpus.sentences.iter().zip(&dists) {
        for (t, d) in s.tokens.iter().zip(ds) {
            let gold = schema.fill_defaults(&t.analysis.features)?;
            correct += (d.argmax_bundle(schema)? == gold) as usize;
            total += 1;
        }
    }
    Ok(if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    })
}
