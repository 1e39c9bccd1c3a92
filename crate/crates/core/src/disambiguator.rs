//! Retagging with a morphological analyzer.
//!
//! Each analyzer candidate is scored by how many features agree with the
//! taggers' hard predictions. Ties are broken by a weighted sum of the
//! candidate's unfactored tag probability and the product of its per-feature
//! tag probabilities, both from unigram counts over the training split, and
//! finally by the candidate's canonical key.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::analyzer::{AnalyzerDb, BackoffPolicy, Lookup};
use crate::corpus::{Analysis, Corpus, Sentence};
use crate::error::Error;
use crate::schema::{FeatureBundle, FeatureSchema};
use crate::tagger::FeatureDistribution;
use crate::Result;

pub const DEFAULT_SMOOTHING: f64 = 1e-6;

/// Tag frequencies of a training split.
///
/// Probabilities use additive smoothing with pseudo-count
/// `epsilon * total / |space|`, i.e. `(c/N + epsilon/|space|) / (1 + epsilon)`,
/// which sums to one over each closed space and is never zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnigramModel {
    pub variant: String,
    pub unfactored_counts: BTreeMap<String, u64>,
    pub per_feature_counts: BTreeMap<String, BTreeMap<String, u64>>,
    pub total_tokens: u64,
    pub smoothing_epsilon: f64,
    /// Size of each feature's closed value set.
    pub feature_spaces: BTreeMap<String, u64>,
    /// Number of expressible unfactored tags.
    pub unfactored_space: f64,
}

impl UnigramModel {
    pub fn from_corpus(corpus: &Corpus, schema: &FeatureSchema, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "smoothing epsilon must be positive, got {epsilon}"
            )));
        }
        let mut unfactored_counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut per_feature_counts: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        let mut total = 0u64;
        for tok in corpus.tokens() {
            let full = schema.fill_defaults(&tok.analysis.features)?;
            let tag = schema.serialize_unfactored(&full)?;
            *unfactored_counts.entry(tag.0).or_insert(0) += 1;
            for (f, v) in full.iter() {
                *per_feature_counts
                    .entry(f.into())
                    .or_default()
                    .entry(v.into())
                    .or_insert(0) += 1;
            }
            total += 1;
        }
        Ok(UnigramModel {
            variant: schema.variant().into(),
            unfactored_counts,
            per_feature_counts,
            total_tokens: total,
            smoothing_epsilon: epsilon,
            feature_spaces: schema
                .features()
                .iter()
                .map(|f| (f.name.clone(), f.values.len() as u64))
                .collect(),
            unfactored_space: schema.tag_space_size() as f64,
        })
    }

    fn smoothed(&self, count: u64, space: f64) -> f64 {
        if self.total_tokens == 0 {
            return 1.0 / space;
        }
        let rel = count as f64 / self.total_tokens as f64;
        (rel + self.smoothing_epsilon / space) / (1.0 + self.smoothing_epsilon)
    }

    pub fn unfactored_probability(&self, tag: &str) -> f64 {
        let c = self.unfactored_counts.get(tag).copied().unwrap_or(0);
        self.smoothed(c, self.unfactored_space)
    }

    pub fn feature_probability(&self, feature: &str, value: &str) -> f64 {
        let c = self
            .per_feature_counts
            .get(feature)
            .and_then(|m| m.get(value))
            .copied()
            .unwrap_or(0);
        let space = self.feature_spaces.get(feature).copied().unwrap_or(1) as f64;
        self.smoothed(c, space)
    }

    /// Smallest probability an unseen unfactored tag can get.
    pub fn unfactored_floor(&self) -> f64 {
        self.smoothed(0, self.unfactored_space)
    }

    pub fn feature_floor(&self, feature: &str) -> f64 {
        let space = self.feature_spaces.get(feature).copied().unwrap_or(1) as f64;
        self.smoothed(0, space)
    }
}

/// Where tie-break probabilities come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbabilitySource {
    /// Unigram model of the training split.
    #[default]
    Unigram,
    /// The taggers' own contextual distributions. Factored output without an
    /// unfactored list uses the per-feature product for both terms.
    Classifier,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TieBreakConfig {
    pub unfactored_weight: f64,
    pub product_weight: f64,
    pub source: ProbabilitySource,
}

impl Default for TieBreakConfig {
    fn default() -> Self {
        TieBreakConfig {
            unfactored_weight: 0.5,
            product_weight: 0.5,
            source: ProbabilitySource::Unigram,
        }
    }
}

/// Number of schema features on which the two bundles agree, after default filling.
pub fn match_count(
    prediction: &FeatureBundle,
    candidate: &FeatureBundle,
    schema: &FeatureSchema,
) -> Result<usize> {
    let p = schema
        .fill_defaults(prediction)
        .map_err(|e| Error::SchemaMismatch(format!("prediction: {e}")))?;
    let c = schema
        .fill_defaults(candidate)
        .map_err(|e| Error::SchemaMismatch(format!("candidate: {e}")))?;
    Ok(schema.names().filter(|n| p.get(n) == c.get(n)).count())
}

/// Weighted sum of the unfactored tag probability and the product of the
/// per-feature probabilities of `candidate`, from unigram counts.
pub fn tie_break_score(
    candidate: &Analysis,
    unigrams: &UnigramModel,
    schema: &FeatureSchema,
    config: &TieBreakConfig,
) -> Result<f64> {
    let full = schema.fill_defaults(&candidate.features)?;
    let tag = schema.serialize_unfactored(&full)?;
    let p_tag = unigrams.unfactored_probability(tag.as_str());
    let product: f64 = full
        .iter()
        .map(|(f, v)| unigrams.feature_probability(f, v))
        .product();
    Ok(config.unfactored_weight * p_tag + config.product_weight * product)
}

fn classifier_tie_break_score(
    candidate: &Analysis,
    dist: &FeatureDistribution,
    schema: &FeatureSchema,
    config: &TieBreakConfig,
) -> Result<f64> {
    let full = schema.fill_defaults(&candidate.features)?;
    // features the distribution says nothing about contribute a factor of 1
    let product: f64 = full
        .iter()
        .filter(|(f, _)| dist.per_feature.contains_key(*f))
        .map(|(f, v)| dist.probability(f, v))
        .product();
    let p_tag = match dist.unfactored.as_ref() {
        Some(_) => {
            let tag = schema.serialize_unfactored(&full)?;
            dist.unfactored_probability(tag.as_str()).unwrap_or(0.0)
        }
        None => product,
    };
    Ok(config.unfactored_weight * p_tag + config.product_weight * product)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub analysis: Analysis,
    pub match_count: usize,
    pub tie_score: f64,
    /// 0 for the selected candidate.
    pub final_rank: usize,
}

/// Total order: match count desc, tie score desc, canonical key asc.
fn compare(a: &(usize, f64, String), b: &(usize, f64, String)) -> Ordering {
    b.0.cmp(&a.0)
        .then_with(|| b.1.total_cmp(&a.1))
        .then_with(|| a.2.cmp(&b.2))
}

fn rank_with<F>(
    prediction: &FeatureBundle,
    candidates: &[Analysis],
    schema: &FeatureSchema,
    mut score: F,
) -> Result<Vec<RankedCandidate>>
where
    F: FnMut(&Analysis) -> Result<f64>,
{
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let mut keyed: Vec<((usize, f64, String), &Analysis)> = candidates
        .iter()
        .map(|a| {
            Ok((
                (
                    match_count(prediction, &a.features, schema)?,
                    score(a)?,
                    a.canonical_key(),
                ),
                a,
            ))
        })
        .collect::<Result<_>>()?;
    keyed.sort_by(|x, y| compare(&x.0, &y.0));
    Ok(keyed
        .into_iter()
        .enumerate()
        .map(|(rank, ((m, s, _), a))| RankedCandidate {
            analysis: a.clone(),
            match_count: m,
            tie_score: s,
            final_rank: rank,
        })
        .collect())
}

/// Orders analyzer candidates against a hard prediction.
pub fn rank_analyses(
    prediction: &FeatureBundle,
    candidates: &[Analysis],
    unigrams: &UnigramModel,
    schema: &FeatureSchema,
    config: &TieBreakConfig,
) -> Result<Vec<RankedCandidate>> {
    rank_with(prediction, candidates, schema, |a| {
        tie_break_score(a, unigrams, schema, config)
    })
}

/// How a token's output analysis was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    /// Top-ranked analyzer candidate.
    Analyzer,
    /// No analyzer entry; taggers' prediction kept.
    KeptPrediction,
    /// No analyzer entry; analysis synthesized from the prediction and flagged.
    Synthesized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disambiguated {
    pub analysis: Analysis,
    pub resolution: Resolution,
    pub prediction: FeatureBundle,
    /// Every ranked candidate, when tracing.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<RankedCandidate>,
}

impl Disambiguated {
    pub fn is_backoff(&self) -> bool {
        self.resolution != Resolution::Analyzer
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DisambiguationConfig {
    pub tie_break: TieBreakConfig,
    pub trace: bool,
}

pub fn disambiguate_sentence(
    sentence: &Sentence,
    distributions: &[FeatureDistribution],
    db: &AnalyzerDb,
    unigrams: &UnigramModel,
    schema: &FeatureSchema,
    config: &DisambiguationConfig,
) -> Result<Vec<Disambiguated>> {
    if sentence.tokens.len() != distributions.len() {
        return Err(Error::Alignment(format!(
            "sentence {:?}: {} tokens vs {} distributions",
            sentence.id,
            sentence.tokens.len(),
            distributions.len()
        )));
    }
    sentence
        .tokens
        .iter()
        .zip(distributions)
        .map(|(tok, dist)| {
            let prediction = dist.argmax_bundle(schema)?;
            match db.analyze(&tok.raw) {
                Lookup::Found(candidates) => {
                    let ranked = match config.tie_break.source {
                        ProbabilitySource::Unigram => rank_analyses(
                            &prediction,
                            candidates,
                            unigrams,
                            schema,
                            &config.tie_break,
                        )?,
                        ProbabilitySource::Classifier => {
                            rank_with(&prediction, candidates, schema, |a| {
                                classifier_tie_break_score(a, dist, schema, &config.tie_break)
                            })?
                        }
                    };
                    Ok(Disambiguated {
                        analysis: ranked[0].analysis.clone(),
                        resolution: Resolution::Analyzer,
                        prediction,
                        candidates: if config.trace { ranked } else { Vec::new() },
                    })
                }
                Lookup::NoAnalysis => Ok(Disambiguated {
                    analysis: Analysis::new(prediction.clone(), tok.raw.clone(), tok.raw.clone()),
                    resolution: match db.backoff() {
                        BackoffPolicy::KeepPredictions => Resolution::KeptPrediction,
                        BackoffPolicy::SynthesizeFromPredictions => Resolution::Synthesized,
                    },
                    prediction,
                    candidates: Vec::new(),
                }),
            }
        })
        .collect()
}

/// Disambiguates every sentence and returns a corpus whose analyses are the
/// selected predictions, with the per-token records.
pub fn disambiguate_corpus(
    corpus: &Corpus,
    distributions: &[Vec<FeatureDistribution>],
    db: &AnalyzerDb,
    unigrams: &UnigramModel,
    schema: &FeatureSchema,
    config: &DisambiguationConfig,
) -> Result<(Corpus, Vec<Vec<Disambiguated>>)> {
    if corpus.sentences.len() != distributions.len() {
        return Err(Error::Alignment(format!(
            "{} sentences vs {} distribution lists",
            corpus.sentences.len(),
            distributions.len()
        )));
    }
    let mut out = corpus.clone();
    let mut records = Vec::with_capacity(corpus.sentences.len());
    for (s, d) in out.sentences.iter_mut().zip(distributions) {
        let res = disambiguate_sentence(s, d, db, unigrams, schema, config)?;
        for (tok, r) in s.tokens.iter_mut().zip(&res) {
            tok.analysis = r.analysis.clone();
        }
        records.push(res);
    }
    Ok((out, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotatedToken, Split};
    use crate::schema::tests::{msa_like, toy_schema};
    use alloc::string::ToString;
    use alloc::vec;

    fn bundle(pairs: &[(&str, &str)]) -> FeatureBundle {
        pairs.iter().copied().collect()
    }

    fn train_corpus() -> Corpus {
        let toks = [
            ("a", bundle(&[("pos", "noun")])),
            ("b", bundle(&[("pos", "noun")])),
            ("c", bundle(&[("pos", "verb"), ("per", "3")])),
            ("d", bundle(&[("pos", "adj"), ("gen", "f")])),
        ];
        Corpus::new(
            "toy",
            Split::Train,
            vec![Sentence::new(
                "s",
                toks.iter()
                    .map(|(w, b)| AnnotatedToken::new(*w, Analysis::new(b.clone(), *w, *w)))
                    .collect(),
            )],
        )
    }

    #[test]
    fn match_count_counts_agreeing_features() {
        let s = toy_schema();
        let a = bundle(&[("pos", "noun"), ("gen", "m")]);
        assert_eq!(match_count(&a, &a, &s).unwrap(), 16);
        let b = bundle(&[("pos", "verb"), ("gen", "m")]);
        assert_eq!(match_count(&a, &b, &s).unwrap(), 15);
        let m = msa_like();
        assert_eq!(match_count(&a, &b, &m).unwrap(), 13);
        let three = bundle(&[("pos", "verb"), ("gen", "f"), ("cas", "n")]);
        assert_eq!(match_count(&FeatureBundle::new(), &three, &s).unwrap(), 13);
        let bad = bundle(&[("pos", "banana")]);
        assert!(matches!(
            match_count(&bad, &a, &s),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn unigram_probabilities_normalize() {
        let s = toy_schema();
        let u = UnigramModel::from_corpus(&train_corpus(), &s, DEFAULT_SMOOTHING).unwrap();
        for def in s.features() {
            let total: f64 = def
                .values
                .iter()
                .map(|v| u.feature_probability(&def.name, v))
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "{}", def.name);
        }
        assert!((u.feature_probability("pos", "noun") - (0.5 + 1e-6 / 4.0) / (1.0 + 1e-6)).abs() < 1e-15);
    }

    #[test]
    fn unseen_candidate_scores_at_the_floor() {
        let s = toy_schema();
        let u = UnigramModel::from_corpus(&train_corpus(), &s, DEFAULT_SMOOTHING).unwrap();
        let unseen = Analysis::new(
            bundle(&[
                ("pos", "prep"),
                ("per", "1"),
                ("gen", "f"),
                ("num", "d"),
                ("asp", "1"),
                ("vox", "1"),
                ("mod", "1"),
                ("stt", "c"),
                ("cas", "g"),
                ("prc3", "na"),
                ("prc2", "wi_conj"),
                ("prc1", "b_prep"),
                ("prc0", "na"),
                ("enc0", "3ms_poss"),
                ("enc1", "na"),
                ("enc2", "na"),
            ]),
            "x",
            "x",
        );
        let score = tie_break_score(&unseen, &u, &s, &TieBreakConfig::default()).unwrap();
        let product: f64 = s.names().map(|f| u.feature_floor(f)).product();
        let expect = 0.5 * u.unfactored_floor() + 0.5 * product;
        assert!((score - expect).abs() <= 1e-12 * expect.max(1e-300));
        assert!(score > 0.0 && score < 1.0);
    }

    #[test]
    fn identical_bundles_score_identically() {
        let s = toy_schema();
        let u = UnigramModel::from_corpus(&train_corpus(), &s, DEFAULT_SMOOTHING).unwrap();
        let a = Analysis::new(bundle(&[("pos", "noun")]), "x", "x");
        let b = Analysis::new(bundle(&[("pos", "noun")]), "y", "z");
        let cfg = TieBreakConfig::default();
        assert_eq!(
            tie_break_score(&a, &u, &s, &cfg).unwrap(),
            tie_break_score(&b, &u, &s, &cfg).unwrap()
        );
    }

    #[test]
    fn ranking_keys_in_order() {
        let s = toy_schema();
        let u = UnigramModel::from_corpus(&train_corpus(), &s, DEFAULT_SMOOTHING).unwrap();
        let cfg = TieBreakConfig::default();
        let pred = bundle(&[("pos", "adj"), ("gen", "f")]);
        // rare but closer beats frequent but farther
        let close = Analysis::new(bundle(&[("pos", "adj"), ("gen", "f")]), "c", "c");
        let far = Analysis::new(bundle(&[("pos", "noun")]), "f", "f");
        let r = rank_analyses(&pred, &[far.clone(), close.clone()], &u, &s, &cfg).unwrap();
        assert_eq!(r[0].analysis, close);
        assert_eq!(r[0].final_rank, 0);
        assert_eq!(r[1].final_rank, 1);

        // equal match counts: frequency decides
        let pred = bundle(&[("pos", "prep")]);
        let noun = Analysis::new(bundle(&[("pos", "noun")]), "n", "n");
        let verb = Analysis::new(bundle(&[("pos", "verb")]), "v", "v");
        let r = rank_analyses(&pred, &[verb.clone(), noun.clone()], &u, &s, &cfg).unwrap();
        assert_eq!(r[0].match_count, r[1].match_count);
        assert_eq!(r[0].analysis, noun);

        // identical bundles: canonical key decides
        let x = Analysis::new(bundle(&[("pos", "noun")]), "b", "b");
        let y = Analysis::new(bundle(&[("pos", "noun")]), "a", "a");
        let r = rank_analyses(&pred, &[x, y.clone()], &u, &s, &cfg).unwrap();
        assert_eq!(r[0].analysis, y);

        assert_eq!(
            rank_analyses(&pred, &[], &u, &s, &cfg),
            Err(Error::EmptyCandidates)
        );
    }

    #[test]
    fn backoff_modes() {
        let s = toy_schema();
        let train = train_corpus();
        let u = UnigramModel::from_corpus(&train, &s, DEFAULT_SMOOTHING).unwrap();
        let db = AnalyzerDb::compile(&train).unwrap();
        let sent = Sentence::new(
            "t",
            vec![
                AnnotatedToken::new("a", Analysis::new(FeatureBundle::new(), "a", "a")),
                AnnotatedToken::new("zz", Analysis::new(FeatureBundle::new(), "zz", "zz")),
            ],
        );
        let mut d = FeatureDistribution::default();
        d.per_feature
            .insert("pos".into(), BTreeMap::from([("verb".to_string(), 1.0)]));
        let dists = vec![d.clone(), d];
        let cfg = DisambiguationConfig::default();
        let out = disambiguate_sentence(&sent, &dists, &db, &u, &s, &cfg).unwrap();
        assert_eq!(out[0].resolution, Resolution::Analyzer);
        assert_eq!(out[0].analysis.features.get("pos"), Some("noun"));
        assert_eq!(out[1].resolution, Resolution::KeptPrediction);
        assert_eq!(out[1].analysis.features, out[1].prediction);
        assert_eq!(out[1].analysis.lex, "zz");

        let db = db.with_backoff(BackoffPolicy::SynthesizeFromPredictions);
        let out = disambiguate_sentence(&sent, &dists, &db, &u, &s, &cfg).unwrap();
        assert_eq!(out[1].resolution, Resolution::Synthesized);
        assert!(out[1].is_backoff());

        assert!(matches!(
            disambiguate_sentence(&sent, &dists[..1], &db, &u, &s, &cfg),
            Err(Error::Alignment(_))
        ));
    }

    #[test]
    fn classifier_source_uses_distributions() {
        let s = toy_schema();
        let train = train_corpus();
        let u = UnigramModel::from_corpus(&train, &s, DEFAULT_SMOOTHING).unwrap();
        let noun = Analysis::new(bundle(&[("pos", "noun")]), "n", "n");
        let verb = Analysis::new(bundle(&[("pos", "verb")]), "v", "v");
        let db = AnalyzerDb::from_entries(
            &s,
            BackoffPolicy::KeepPredictions,
            "t",
            vec![("w".to_string(), vec![noun, verb.clone()])],
        )
        .unwrap();
        let sent = Sentence::new(
            "t",
            vec![AnnotatedToken::new("w", Analysis::new(FeatureBundle::new(), "w", "w"))],
        );
        // prediction adj matches neither on pos; classifier prefers verb over noun
        let mut d = FeatureDistribution::default();
        d.per_feature.insert(
            "pos".into(),
            BTreeMap::from([
                ("adj".to_string(), 0.5),
                ("verb".to_string(), 0.3),
                ("noun".to_string(), 0.2),
            ]),
        );
        let cfg = DisambiguationConfig {
            tie_break: TieBreakConfig {
                source: ProbabilitySource::Classifier,
                ..TieBreakConfig::default()
            },
            trace: true,
        };
        let out = disambiguate_sentence(&sent, &[d], &db, &u, &s, &cfg).unwrap();
        assert_eq!(out[0].analysis, verb);
        assert_eq!(out[0].candidates.len(), 2);
    }
}
