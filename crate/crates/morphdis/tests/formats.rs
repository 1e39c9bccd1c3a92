use std::collections::BTreeMap;

use morphdis::analyzer_io::{analyzer_to_string, parse_analyzer};
use morphdis::corpus_io::{corpus_to_string, parse_corpus};
use morphdis::dist_io::{distributions_to_string, parse_distributions};
use morphdis::schemas;
use morphdis_core::{
    Analysis, AnalyzerDb, AnnotatedToken, BackoffPolicy, Corpus, FeatureBundle,
    FeatureDistribution, FeatureSchema, Sentence, Split,
};
use proptest::prelude::*;
use proptest::sample::Index;

fn lev() -> FeatureSchema {
    schemas::builtin("lev").unwrap()
}

fn bundle(schema: &FeatureSchema, picks: &[Option<Index>]) -> FeatureBundle {
    schema
        .features()
        .iter()
        .zip(picks)
        .filter_map(|(d, p)| {
            p.as_ref()
                .map(|i| (d.name.clone(), d.values.iter().nth(i.index(d.values.len())).unwrap().clone()))
        })
        .collect()
}

fn analysis_strategy() -> impl Strategy<Value = Analysis> {
    (
        prop::collection::vec(prop::option::of(any::<Index>()), 16),
        "[a-zA-Z$*~]{1,8}",
        "\\PC{0,10}",
        prop::option::of("[ a-z]{0,12}"),
    )
        .prop_map(|(picks, lex, diac, gloss)| {
            let mut a = Analysis::new(bundle(&lev(), &picks), lex, diac);
            a.gloss = gloss;
            a
        })
}

fn sentence_strategy() -> impl Strategy<Value = Sentence> {
    (
        "[a-z0-9-]{1,8}",
        prop::option::of("[a-z]{2,4}"),
        prop::collection::vec(("\\PC{1,6}", analysis_strategy()), 1..8),
    )
        .prop_map(|(id, prov, toks)| {
            let mut s = Sentence::new(
                id,
                toks.into_iter().map(|(raw, a)| AnnotatedToken::new(raw, a)).collect(),
            );
            s.provenance = prov;
            s
        })
}

fn dedup_ids(mut sentences: Vec<Sentence>) -> Vec<Sentence> {
    for (i, s) in sentences.iter_mut().enumerate() {
        s.id = format!("{i}-{}", s.id);
    }
    sentences
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn corpus_text_round_trips(sentences in prop::collection::vec(sentence_strategy(), 0..6)) {
        let schema = lev();
        let corpus = Corpus::new("lev", Split::Dev, dedup_ids(sentences));
        let text = corpus_to_string(&corpus);
        let back = parse_corpus(&text, &schema, Split::Dev, "mem").unwrap();
        prop_assert_eq!(&back, &corpus);
        prop_assert_eq!(corpus_to_string(&back), text);
    }

    #[test]
    fn analyzer_text_round_trips(
        entries in prop::collection::btree_map("\\PC{1,6}", prop::collection::vec(analysis_strategy(), 1..4), 0..10),
        synth in any::<bool>(),
    ) {
        let schema = lev();
        let backoff = if synth { BackoffPolicy::SynthesizeFromPredictions } else { BackoffPolicy::KeepPredictions };
        let db = AnalyzerDb::from_entries(&schema, backoff, "prop", entries).unwrap();
        let back = parse_analyzer(&analyzer_to_string(&db), "mem").unwrap();
        prop_assert_eq!(back, db);
    }

    #[test]
    fn distributions_round_trip_within_print_precision(
        sentence in sentence_strategy(),
        weights in prop::collection::vec(0.01f64..1.0, 64),
        with_unfactored in any::<bool>(),
    ) {
        let schema = lev();
        let corpus = Corpus::new("lev", Split::Dev, vec![sentence]);
        let dists: Vec<FeatureDistribution> = corpus.sentences[0]
            .tokens
            .iter()
            .enumerate()
            .map(|(t, tok)| {
                let mut d = FeatureDistribution::default();
                for (k, def) in schema.features().iter().enumerate() {
                    let w: Vec<f64> = def.values.iter().enumerate().map(|(j, _)| weights[(t + k + j) % 64]).collect();
                    let s: f64 = w.iter().sum();
                    d.per_feature.insert(
                        def.name.clone(),
                        def.values.iter().cloned().zip(w.into_iter().map(|x| x / s)).collect(),
                    );
                }
                if with_unfactored {
                    let tag = schema.serialize_unfactored(&tok.analysis.features).unwrap();
                    d.unfactored = Some(BTreeMap::from([(tag.0, weights[t % 64].min(1.0))]));
                }
                d
            })
            .collect();
        let text = distributions_to_string(&corpus, std::slice::from_ref(&dists)).unwrap();
        let back = parse_distributions(&text, "mem", &schema, &corpus).unwrap();
        for (a, b) in dists.iter().zip(&back[0]) {
            for (f, m) in &a.per_feature {
                for (v, p) in m {
                    prop_assert!((p - b.per_feature[f][v]).abs() < 1e-8);
                }
            }
            // truncated lists are rescaled to sum to one
            if let Some(u) = &b.unfactored {
                prop_assert!((u.values().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn corpus_parser_never_panics(text in "\\PC{0,200}") {
        let _ = parse_corpus(&text, &lev(), Split::Dev, "fuzz");
    }

    #[test]
    fn analyzer_parser_never_panics(text in "\\PC{0,200}") {
        let _ = parse_analyzer(&text, "fuzz");
    }
}
