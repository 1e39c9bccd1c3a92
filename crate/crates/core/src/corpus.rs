//! Annotated corpora, diacritic stripping, learning-curve sampling and OOV
//! bookkeeping.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::schema::{FeatureBundle, FeatureSchema, UnfactoredTag};
use crate::Result;

/// Placeholder for a lemma or diacritized form the source did not provide.
pub const UNKNOWN: &str = "UNK";

/// Fathatan, dammatan, kasratan, fatha, damma, kasra, shadda, sukun.
pub const ARABIC_DIACRITICS: [char; 8] = [
    '\u{064B}', '\u{064C}', '\u{064D}', '\u{064E}', '\u{064F}', '\u{0650}', '\u{0651}', '\u{0652}',
];

/// One full morphosyntactic reading of a word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Analysis {
    pub features: FeatureBundle,
    pub lex: String,
    pub diac: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gloss: Option<String>,
}

impl Analysis {
    pub fn new(features: FeatureBundle, lex: impl Into<String>, diac: impl Into<String>) -> Self {
        let lex = lex.into();
        let diac = diac.into();
        Analysis {
            features,
            lex: if lex.is_empty() { UNKNOWN.into() } else { lex },
            diac: if diac.is_empty() { UNKNOWN.into() } else { diac },
            gloss: None,
        }
    }

    /// Deterministic text form of the whole reading; used as the last ranking key.
    pub fn canonical_key(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.features.iter() {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\u{1f}');
        }
        out.push('\u{1e}');
        out.push_str(&self.lex);
        out.push('\u{1e}');
        out.push_str(&self.diac);
        out.push('\u{1e}');
        if let Some(g) = &self.gloss {
            out.push_str(g);
        }
        out
    }

    pub fn unfactored(&self, schema: &FeatureSchema) -> Result<UnfactoredTag> {
        schema.serialize_unfactored(&self.features)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedToken {
    pub raw: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coda: Option<String>,
    pub analysis: Analysis,
}

impl AnnotatedToken {
    pub fn new(raw: impl Into<String>, analysis: Analysis) -> Self {
        AnnotatedToken {
            raw: raw.into(),
            coda: None,
            analysis,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub tokens: Vec<AnnotatedToken>,
    /// Source corpus of the sentence after merging.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl Sentence {
    pub fn new(id: impl Into<String>, tokens: Vec<AnnotatedToken>) -> Self {
        Sentence {
            id: id.into(),
            tokens,
            provenance: None,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn validate(&self, schema: &FeatureSchema) -> Result<()> {
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.raw.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "sentence {:?} token {i}: empty raw form",
                    self.id
                )));
            }
            schema.validate_bundle(&tok.analysis.features)?;
        }
        Ok(())
    }

    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.raw.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Split {
    Train,
    Tune,
    Dev,
    Test,
}

impl core::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TRAIN" => Ok(Split::Train),
            "TUNE" => Ok(Split::Tune),
            "DEV" => Ok(Split::Dev),
            "TEST" => Ok(Split::Test),
            _ => Err(Error::InvalidArgument(format!("unknown split {s:?}"))),
        }
    }
}

/// Sentences of one split, all annotated under the same schema variant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub variant: String,
    pub split: Split,
    pub sentences: Vec<Sentence>,
}

impl Corpus {
    pub fn new(variant: impl Into<String>, split: Split, sentences: Vec<Sentence>) -> Self {
        Corpus {
            variant: variant.into(),
            split,
            sentences,
        }
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.token_count() == 0
    }

    pub fn tokens(&self) -> impl Iterator<Item = &AnnotatedToken> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }

    pub fn forms(&self) -> BTreeSet<&str> {
        self.tokens().map(|t| t.raw.as_str()).collect()
    }

    /// Validates every token and checks sentence ids are unique.
    ///
    /// Errors carry the offending sentence index.
    pub fn validate(&self, schema: &FeatureSchema) -> core::result::Result<(), (usize, Error)> {
        let mut seen = BTreeSet::new();
        for (i, s) in self.sentences.iter().enumerate() {
            if !seen.insert(s.id.as_str()) {
                return Err((
                    i,
                    Error::InvalidArgument(format!("duplicate sentence id {:?}", s.id)),
                ));
            }
            s.validate(schema).map_err(|e| (i, e))?;
        }
        Ok(())
    }
}

/// Removes every character in `diacritics` from `text`.
pub fn strip_diacritics(text: &str, diacritics: &[char]) -> String {
    text.chars().filter(|c| !diacritics.contains(c)).collect()
}

/// Applies [`strip_diacritics`] to every raw form (and CODA form) in place.
pub fn strip_corpus_diacritics(corpus: &mut Corpus, diacritics: &[char]) {
    for tok in corpus.sentences.iter_mut().flat_map(|s| s.tokens.iter_mut()) {
        tok.raw = strip_diacritics(&tok.raw, diacritics);
        if let Some(c) = tok.coda.as_mut() {
            *c = strip_diacritics(c, diacritics);
        }
    }
}

/// Nested training samples for a learning curve.
///
/// Sentences are shuffled once; each sample is the shortest shuffled prefix
/// holding at least `budget` tokens, so larger samples contain smaller ones.
pub fn sample_learning_curve(train: &Corpus, sizes: &[usize], seed: u64) -> Result<Vec<Corpus>> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "sample sizes must be strictly increasing: {sizes:?}"
        )));
    }
    let mut order: Vec<usize> = (0..train.sentences.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut out = Vec::with_capacity(sizes.len());
    let mut taken = 0usize;
    let mut tokens = 0usize;
    for &budget in sizes {
        while tokens < budget && taken < order.len() {
            tokens += train.sentences[order[taken]].len();
            taken += 1;
        }
        let sentences = order[..taken]
            .iter()
            .map(|&i| train.sentences[i].clone())
            .collect();
        out.push(Corpus::new(train.variant.clone(), train.split, sentences));
    }
    Ok(out)
}

/// Raw forms occurring in `eval` but never in `train`.
pub fn oov_vocabulary(train: &Corpus, eval: &Corpus) -> BTreeSet<String> {
    let known = train.forms();
    eval.tokens()
        .map(|t| t.raw.as_str())
        .filter(|f| !known.contains(f))
        .map(String::from)
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    pub(crate) fn analysis(pairs: &[(&str, &str)], lex: &str) -> Analysis {
        Analysis::new(pairs.iter().copied().collect(), lex, lex)
    }

    pub(crate) fn corpus_from_forms(sentences: &[&[&str]]) -> Corpus {
        let sentences = sentences
            .iter()
            .enumerate()
            .map(|(i, forms)| {
                Sentence::new(
                    i.to_string(),
                    forms
                        .iter()
                        .map(|f| AnnotatedToken::new(*f, analysis(&[("pos", "noun")], f)))
                        .collect(),
                )
            })
            .collect();
        Corpus::new("toy", Split::Train, sentences)
    }

    #[test]
    fn strip_latin_vowels() {
        assert_eq!(strip_diacritics("kataba", &['a', 'i', 'u']), "ktb");
        assert_eq!(strip_diacritics("ktb", &['a', 'i', 'u']), "ktb");
        assert_eq!(strip_diacritics("", &['a']), "");
    }

    #[test]
    fn strip_arabic_marks() {
        // kataba with fatha on each consonant
        let text = "\u{0643}\u{064E}\u{062A}\u{064E}\u{0628}\u{064E}";
        assert_eq!(
            strip_diacritics(text, &ARABIC_DIACRITICS),
            "\u{0643}\u{062A}\u{0628}"
        );
    }

    #[test]
    fn oov_set_difference() {
        let train = corpus_from_forms(&[&["a", "b"]]);
        let eval = corpus_from_forms(&[&["b", "c"]]);
        assert_eq!(oov_vocabulary(&train, &eval), BTreeSet::from(["c".to_string()]));
        assert!(oov_vocabulary(&train, &corpus_from_forms(&[&["a"]])).is_empty());
        let disjoint = corpus_from_forms(&[&["x", "y"]]);
        assert_eq!(oov_vocabulary(&train, &disjoint).len(), 2);
    }

    #[test]
    fn sizes_must_increase() {
        let c = corpus_from_forms(&[&["a"]]);
        assert!(sample_learning_curve(&c, &[100, 50], 1).is_err());
        assert!(sample_learning_curve(&c, &[50, 50], 1).is_err());
    }

    #[test]
    fn saturated_budget_returns_everything() {
        let c = corpus_from_forms(&[&["a", "b"], &["c"]]);
        let s = sample_learning_curve(&c, &[1000], 3).unwrap();
        assert_eq!(s[0].token_count(), 3);
    }

    #[test]
    fn sample_replays_seeded_shuffle() {
        let ten: &[&str] = &["w"; 10];
        let c = corpus_from_forms(&vec![ten; 100]);
        let samples = sample_learning_curve(&c, &[50, 100], 7).unwrap();
        assert_eq!(samples[0].token_count(), 50);
        assert_eq!(samples[1].token_count(), 100);

        // independent replay of the shuffle
        let mut order: Vec<usize> = (0..100).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(7));
        let ids = |c: &Corpus| c.sentences.iter().map(|s| s.id.clone()).collect::<Vec<_>>();
        let expect: Vec<String> = order[..10].iter().map(|i| i.to_string()).collect();
        assert_eq!(ids(&samples[1]), expect);
        assert_eq!(ids(&samples[0]), expect[..5].to_vec());
    }

    #[test]
    fn duplicate_ids_are_reported() {
        let mut c = corpus_from_forms(&[&["a"], &["b"]]);
        c.sentences[1].id = "0".into();
        let schema = crate::schema::tests::toy_schema();
        assert_eq!(c.validate(&schema).unwrap_err().0, 1);
    }
}
