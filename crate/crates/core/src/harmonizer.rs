//! Cross-dialect harmonization for merged and continued training.
//!
//! Three steps bring analyses from different annotation projects into the
//! target variant's value space: drop features the variants do not share,
//! remove vowels from the form segment of proclitic values (`wa_conj` and
//! `wi_conj` both become `w_conj`), and rewrite per-POS default values to the
//! target's conventions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analyzer::AnalyzerDb;
use crate::corpus::{Analysis, Corpus, Split};
use crate::error::Error;
use crate::schema::{FeatureBundle, FeatureSchema, PROCLITIC_FEATURES};
use crate::Result;

pub const DEFAULT_DROPPED: [&str; 6] = ["stt", "cas", "mod", "vox", "enc1", "enc2"];

const VOWELS: [char; 5] = ['a', 'e', 'i', 'o', 'u'];

/// Rewrites `feature` from `from` to `to` on analyses whose pos is `pos`
/// (`"*"` matches any pos).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemapRule {
    pub pos: String,
    pub feature: String,
    pub from: String,
    pub to: String,
}

impl RemapRule {
    fn applies(&self, pos: &str, feature: &str, value: &str) -> bool {
        (self.pos == "*" || self.pos == pos) && self.feature == feature && self.from == value
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmonizationConfig {
    pub target_variant: String,
    pub dropped_features: BTreeSet<String>,
    pub proclitic_vowel_strip: bool,
    /// Explicit proclitic value rewrites, checked before vowel stripping.
    #[serde(default)]
    pub proclitic_overrides: BTreeMap<String, String>,
    /// Per source variant default-value rewrites.
    #[serde(default)]
    pub default_remap: BTreeMap<String, Vec<RemapRule>>,
}

impl Default for HarmonizationConfig {
    fn default() -> Self {
        let overrides = [
            ("wa_conj", "w_conj"),
            ("wi_conj", "w_conj"),
            ("fa_conj", "f_conj"),
            ("fi_conj", "f_conj"),
            ("bi_prep", "b_prep"),
            ("li_prep", "l_prep"),
            ("ka_prep", "k_prep"),
            ("fi_prep", "f_prep"),
            ("wa_prep", "w_prep"),
        ];
        HarmonizationConfig {
            target_variant: "lev".into(),
            dropped_features: DEFAULT_DROPPED.iter().map(|s| String::from(*s)).collect(),
            proclitic_vowel_strip: true,
            proclitic_overrides: overrides
                .iter()
                .map(|(a, b)| (String::from(*a), String::from(*b)))
                .collect(),
            default_remap: BTreeMap::new(),
        }
    }
}

/// Removes `a e i o u` from the form segment (before the first `_`) of a
/// proclitic value; the tag segment is left untouched.
pub fn strip_proclitic_vowels(value: &str) -> String {
    match value.split_once('_') {
        Some((form, tag)) => {
            let mut out: String = form.chars().filter(|c| !VOWELS.contains(c)).collect();
            out.push('_');
            out.push_str(tag);
            out
        }
        None => value.into(),
    }
}

/// Validated harmonization setup bound to its target schema.
#[derive(Debug, Clone)]
pub struct Harmonizer {
    config: HarmonizationConfig,
    reduced: FeatureSchema,
}

impl Harmonizer {
    pub fn new(config: HarmonizationConfig, target: &FeatureSchema) -> Result<Self> {
        if target.variant() != config.target_variant {
            return Err(Error::SchemaMismatch(format!(
                "config targets {:?}, schema is {:?}",
                config.target_variant,
                target.variant()
            )));
        }
        for f in &config.dropped_features {
            if !target.has_feature(f) {
                return Err(Error::UnknownFeature(f.clone()));
            }
        }
        let kept: Vec<&str> = target
            .names()
            .filter(|n| !config.dropped_features.contains(*n))
            .collect();
        let reduced = target.project(&kept, format!("{}-harmonized", target.variant()))?;

        for (from, to) in &config.proclitic_overrides {
            if !PROCLITIC_FEATURES.iter().any(|f| {
                reduced
                    .feature(f)
                    .is_some_and(|d| d.contains(to))
            }) {
                return Err(Error::schema(format!(
                    "proclitic override {from:?} -> {to:?} targets no valid value"
                )));
            }
        }
        for (source, rules) in &config.default_remap {
            for r in rules {
                let def = reduced.feature(&r.feature).ok_or_else(|| {
                    Error::schema(format!(
                        "remap rule for {source:?} names feature {:?} outside the harmonized set",
                        r.feature
                    ))
                })?;
                if !def.contains(&r.to) {
                    return Err(Error::value(&r.feature, &r.to));
                }
                // a rule whose output feeds another rule would break idempotence
                if rules.iter().any(|o| {
                    o.feature == r.feature
                        && o.from == r.to
                        && o.from != o.to
                        && (o.pos == "*" || r.pos == "*" || o.pos == r.pos)
                }) {
                    return Err(Error::schema(format!(
                        "remap rules for {source:?} chain on {}={:?}",
                        r.feature, r.to
                    )));
                }
            }
        }
        Ok(Harmonizer { config, reduced })
    }

    /// Schema every harmonized analysis validates under.
    pub fn reduced_schema(&self) -> &FeatureSchema {
        &self.reduced
    }

    pub fn config(&self) -> &HarmonizationConfig {
        &self.config
    }

    fn proclitic(&self, value: &str) -> String {
        if let Some(v) = self.config.proclitic_overrides.get(value) {
            return v.clone();
        }
        if self.config.proclitic_vowel_strip {
            strip_proclitic_vowels(value)
        } else {
            value.into()
        }
    }

    pub fn harmonize_analysis(&self, analysis: &Analysis, source_variant: &str) -> Result<Analysis> {
        let mut features: FeatureBundle = analysis
            .features
            .iter()
            .filter(|(f, _)| !self.config.dropped_features.contains(*f))
            .collect();
        for f in PROCLITIC_FEATURES {
            if let Some(v) = features.get(f) {
                let nv = self.proclitic(v);
                features.insert(f, nv);
            }
        }
        let pos = String::from(features.get("pos").unwrap_or(""));
        if let Some(rules) = self.config.default_remap.get(source_variant) {
            let snapshot: Vec<(String, String)> = features
                .iter()
                .map(|(f, v)| (String::from(f), String::from(v)))
                .collect();
            for (f, v) in snapshot {
                if let Some(r) = rules.iter().find(|r| r.applies(&pos, &f, &v)) {
                    features.insert(f, r.to.clone());
                }
            }
        }
        for (f, v) in features.iter() {
            let def = self
                .reduced
                .feature(f)
                .ok_or_else(|| Error::UnknownFeature(f.into()))?;
            if !def.contains(v) {
                return Err(Error::Remap {
                    pos: pos.clone(),
                    feature: f.into(),
                    value: v.into(),
                });
            }
        }
        Ok(Analysis {
            features,
            ..analysis.clone()
        })
    }

    /// Harmonizes every analysis; sentences keep their ids and are tagged
    /// with `source_variant` as provenance unless already tagged.
    pub fn harmonize_corpus(&self, corpus: &Corpus, source_variant: &str) -> Result<Corpus> {
        let mut out = Corpus::new(self.reduced.variant(), corpus.split, Vec::new());
        for s in &corpus.sentences {
            let mut s = s.clone();
            for tok in s.tokens.iter_mut() {
                tok.analysis = self.harmonize_analysis(&tok.analysis, source_variant)?;
            }
            s.provenance.get_or_insert_with(|| source_variant.into());
            out.sentences.push(s);
        }
        Ok(out)
    }

    /// Harmonizes every analyzer entry; readings that become identical merge.
    pub fn harmonize_analyzer(&self, db: &AnalyzerDb, source_variant: &str) -> Result<AnalyzerDb> {
        let mut entries = BTreeMap::new();
        for (word, analyses) in db.entries() {
            let list = analyses
                .iter()
                .map(|a| self.harmonize_analysis(a, source_variant))
                .collect::<Result<Vec<_>>>()?;
            entries.insert(word.clone(), list);
        }
        Ok(AnalyzerDb::from_parts(
            self.reduced.variant(),
            db.backoff(),
            format!("{} (harmonized)", db.provenance()),
            entries,
        ))
    }

    fn merge(&self, corpora: &[(&Corpus, &str)], seed: u64) -> Result<Corpus> {
        let mut sentences = Vec::new();
        for (i, (corpus, variant)) in corpora.iter().enumerate() {
            let h = self.harmonize_corpus(corpus, variant)?;
            sentences.extend(h.sentences.into_iter().map(|mut s| {
                s.id = format!("{i}-{variant}:{}", s.id);
                s
            }));
        }
        sentences.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Ok(Corpus::new(self.reduced.variant(), Split::Train, sentences))
    }

    /// Harmonizes and concatenates at least two corpora, then shuffles the
    /// sentences with `seed`.
    pub fn build_merged(&self, corpora: &[(&Corpus, &str)], seed: u64) -> Result<Corpus> {
        if corpora.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "merging needs at least 2 corpora, got {}",
                corpora.len()
            )));
        }
        self.merge(corpora, seed)
    }

    /// Stage 1 is the merged high-resource data; stage 2 the harmonized
    /// low-resource corpus.
    pub fn build_stages(
        &self,
        high_resource: &[(&Corpus, &str)],
        low_resource: (&Corpus, &str),
        seed: u64,
    ) -> Result<(Corpus, Corpus)> {
        if high_resource.is_empty() {
            return Err(Error::InvalidArgument("no high-resource corpora".into()));
        }
        let stage1 = self.merge(high_resource, seed)?;
        let stage2 = self.harmonize_corpus(low_resource.0, low_resource.1)?;
        Ok((stage1, stage2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotatedToken, Sentence};
    use crate::schema::tests::toy_schema;
    use crate::schema::ALL_TAGS_10;
    use alloc::string::ToString;
    use alloc::vec;

    /// Default config minus overrides whose targets the toy schema lacks.
    fn toy_config() -> HarmonizationConfig {
        let mut c = HarmonizationConfig::default();
        c.proclitic_overrides
            .retain(|_, to| to.as_str() == "w_conj" || to.as_str() == "b_prep");
        c
    }

    fn lev_toy() -> FeatureSchema {
        let s = toy_schema();
        FeatureSchema::new("lev", "1", s.features().to_vec()).unwrap()
    }

    fn harmonizer() -> Harmonizer {
        Harmonizer::new(toy_config(), &lev_toy()).unwrap()
    }

    #[test]
    fn conjunction_proclitics_collapse() {
        assert_eq!(strip_proclitic_vowels("wa_conj"), "w_conj");
        assert_eq!(strip_proclitic_vowels("wi_conj"), "w_conj");
        assert_eq!(strip_proclitic_vowels("Al_det"), "Al_det");
        assert_eq!(strip_proclitic_vowels("0"), "0");
        assert_eq!(strip_proclitic_vowels("bi_prep_a"), "b_prep_a");
    }

    #[test]
    fn drops_and_strips() {
        let h = harmonizer();
        let a = Analysis::new(
            [("pos", "noun"), ("cas", "n"), ("prc2", "wa_conj"), ("prc1", "bi_prep")]
                .into_iter()
                .collect(),
            "x",
            "x",
        );
        let out = h.harmonize_analysis(&a, "msa").unwrap();
        assert_eq!(out.features.get("cas"), None);
        assert_eq!(out.features.get("prc2"), Some("w_conj"));
        assert_eq!(out.features.get("prc1"), Some("b_prep"));
        let names: Vec<&str> = h.reduced_schema().names().collect();
        assert_eq!(names, ALL_TAGS_10);
        assert_eq!(h.harmonize_analysis(&out, "lev").unwrap(), out);
    }

    #[test]
    fn remap_rules_apply_per_source() {
        let mut cfg = toy_config();
        cfg.default_remap.insert(
            "egy".into(),
            vec![RemapRule {
                pos: "verb".into(),
                feature: "gen".into(),
                from: "na".into(),
                to: "m".into(),
            }],
        );
        let h = Harmonizer::new(cfg, &lev_toy()).unwrap();
        let a = Analysis::new([("pos", "verb"), ("gen", "na")].into_iter().collect(), "x", "x");
        assert_eq!(
            h.harmonize_analysis(&a, "egy").unwrap().features.get("gen"),
            Some("m")
        );
        assert_eq!(
            h.harmonize_analysis(&a, "msa").unwrap().features.get("gen"),
            Some("na")
        );
    }

    #[test]
    fn chained_rules_rejected() {
        let mut cfg = toy_config();
        let rule = |from: &str, to: &str| RemapRule {
            pos: "*".into(),
            feature: "gen".into(),
            from: from.into(),
            to: to.into(),
        };
        cfg.default_remap
            .insert("egy".into(), vec![rule("na", "m"), rule("m", "f")]);
        assert!(Harmonizer::new(cfg, &lev_toy()).is_err());
    }

    #[test]
    fn unmappable_value_is_a_remap_error() {
        let h = harmonizer();
        // prc1 value with no vowel-free counterpart in the toy schema
        let a = Analysis::new([("prc1", "na_x")].into_iter().collect(), "x", "x");
        assert!(matches!(
            h.harmonize_analysis(&a, "msa"),
            Err(Error::Remap { .. })
        ));
    }

    fn corpus(n: usize, prefix: &str) -> Corpus {
        Corpus::new(
            "x",
            Split::Train,
            (0..n)
                .map(|i| {
                    Sentence::new(
                        i.to_string(),
                        vec![AnnotatedToken::new(
                            prefix,
                            Analysis::new(
                                [("pos", "noun"), ("stt", "d")].into_iter().collect(),
                                "l",
                                "d",
                            ),
                        )],
                    )
                })
                .collect(),
        )
    }

    #[test]
    fn merge_conserves_and_is_deterministic() {
        let h = harmonizer();
        let a = corpus(10, "a");
        let b = corpus(20, "b");
        let m1 = h.build_merged(&[(&a, "msa"), (&b, "egy")], 5).unwrap();
        let m2 = h.build_merged(&[(&a, "msa"), (&b, "egy")], 5).unwrap();
        assert_eq!(m1.sentences.len(), 30);
        assert_eq!(m1, m2);
        assert_eq!(m1.token_count(), a.token_count() + b.token_count());
        assert!(m1.validate(h.reduced_schema()).is_ok());
        assert!(h.build_merged(&[(&a, "msa")], 5).is_err());
        let prov: BTreeSet<_> = m1.sentences.iter().map(|s| s.provenance.clone()).collect();
        assert_eq!(prov.len(), 2);
    }

    #[test]
    fn stages_are_disjoint() {
        let h = harmonizer();
        let a = corpus(5, "a");
        let b = corpus(5, "b");
        let low = corpus(3, "l");
        let (s1, s2) = h.build_stages(&[(&a, "msa"), (&b, "glf")], (&low, "lev"), 1).unwrap();
        let ids1: BTreeSet<_> = s1.sentences.iter().map(|s| s.id.clone()).collect();
        assert!(s2.sentences.iter().all(|s| !ids1.contains(&s.id)));
        assert_eq!(s2.token_count(), low.token_count());
    }
}
