use std::collections::{BTreeMap, BTreeSet};

use morphdis_core::disambiguator::{rank_analyses, TieBreakConfig, DEFAULT_SMOOTHING};
use morphdis_core::eval::{
    accuracy, chi2_1df_survival, exact_binomial_two_sided, mcnemar_from_counts, Slice, Subset,
    EXACT_MCNEMAR_BELOW,
};
use morphdis_core::harmonizer::{HarmonizationConfig, Harmonizer};
use morphdis_core::corpus::sample_learning_curve;
use morphdis_core::{
    Analysis, AnnotatedToken, Corpus, FeatureBundle, FeatureDef, FeatureSchema, Sentence, Split,
    UnigramModel,
};
use proptest::prelude::*;
use proptest::sample::Index;

fn schema() -> FeatureSchema {
    FeatureSchema::new(
        "toy",
        "test",
        vec![
            FeatureDef::new("pos", ["noun", "verb", "adj", "prep"], "noun"),
            FeatureDef::new("gen", ["m", "f", "na"], "na"),
            FeatureDef::new("num", ["s", "p", "na"], "na"),
            FeatureDef::new("cas", ["n", "a", "g", "na"], "na"),
            FeatureDef::new("prc2", ["0", "wa_conj", "wi_conj", "w_conj", "na"], "0"),
            FeatureDef::new("prc1", ["0", "bi_prep", "b_prep"], "0"),
            FeatureDef::new("enc0", ["0", "3ms_poss"], "0"),
        ],
    )
    .unwrap()
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

fn bundles(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Vec<Option<Index>>>> {
    prop::collection::vec(prop::collection::vec(prop::option::of(any::<Index>()), 7), n)
}

fn corpus(schema: &FeatureSchema, picks: &[Vec<Option<Index>>], lens: &[usize]) -> Corpus {
    let mut it = picks.iter().enumerate();
    let mut sentences = Vec::new();
    for (s, &len) in lens.iter().enumerate() {
        let toks: Vec<AnnotatedToken> = it
            .by_ref()
            .take(len)
            .map(|(i, p)| AnnotatedToken::new(format!("w{}", i % 7), Analysis::new(bundle(schema, p), "l", "d")))
            .collect();
        if toks.is_empty() {
            break;
        }
        sentences.push(Sentence::new(format!("s{s}"), toks));
    }
    Corpus::new(schema.variant(), Split::Train, sentences)
}

fn harmonizer() -> Harmonizer {
    let mut config = HarmonizationConfig {
        target_variant: "toy".into(),
        dropped_features: BTreeSet::from(["cas".to_string()]),
        ..HarmonizationConfig::default()
    };
    config
        .proclitic_overrides
        .retain(|_, to| to == "w_conj" || to == "b_prep");
    Harmonizer::new(config, &schema()).unwrap()
}

proptest! {
    #[test]
    fn unfactored_tags_round_trip(picks in bundles(1..2)) {
        let s = schema();
        let b = bundle(&s, &picks[0]);
        let tag = s.serialize_unfactored(&b).unwrap();
        prop_assert_eq!(s.parse_unfactored(&tag).unwrap(), s.fill_defaults(&b).unwrap());
    }

    #[test]
    fn learning_curve_samples_nest(
        lens in prop::collection::vec(1usize..12, 5..60),
        mut sizes in prop::collection::btree_set(1usize..400, 1..6),
        seed in any::<u64>(),
    ) {
        let s = schema();
        let total: usize = lens.iter().sum();
        let picks = vec![vec![None; 7]; total];
        let c = corpus(&s, &picks, &lens);
        sizes.retain(|&n| n > 0);
        let sizes: Vec<usize> = sizes.into_iter().collect();
        let samples = sample_learning_curve(&c, &sizes, seed).unwrap();
        for w in samples.windows(2) {
            let a: BTreeSet<&str> = w[0].sentences.iter().map(|x| x.id.as_str()).collect();
            let b: BTreeSet<&str> = w[1].sentences.iter().map(|x| x.id.as_str()).collect();
            prop_assert!(a.is_subset(&b));
        }
        for (sample, &n) in samples.iter().zip(&sizes) {
            prop_assert!(sample.token_count() >= n.min(c.token_count()));
        }
        prop_assert_eq!(samples, sample_learning_curve(&c, &sizes, seed).unwrap());
    }

    #[test]
    fn ranking_ignores_candidate_order(
        train in bundles(20..60),
        pred in bundles(1..2),
        cands in bundles(1..20),
        rotate in any::<Index>(),
    ) {
        let s = schema();
        let c = corpus(&s, &train, &[train.len()]);
        let unigrams = UnigramModel::from_corpus(&c, &s, DEFAULT_SMOOTHING).unwrap();
        let prediction = bundle(&s, &pred[0]);
        let mut candidates: Vec<Analysis> = cands
            .iter()
            .enumerate()
            .map(|(i, p)| Analysis::new(bundle(&s, p), format!("l{}", i % 3), "d"))
            .collect();
        let config = TieBreakConfig::default();
        let a = rank_analyses(&prediction, &candidates, &unigrams, &s, &config).unwrap();
        let k = rotate.index(candidates.len());
        candidates.rotate_left(k);
        let b = rank_analyses(&prediction, &candidates, &unigrams, &s, &config).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.len(), candidates.len());
        let best = a.iter().map(|r| r.match_count).max().unwrap();
        prop_assert_eq!(a[0].match_count, best);
        for w in a.windows(2) {
            prop_assert!(w[0].match_count >= w[1].match_count);
        }
    }

    #[test]
    fn mcnemar_is_symmetric(b in 0u64..200, c in 0u64..200) {
        let x = mcnemar_from_counts(b, c, 0.05, EXACT_MCNEMAR_BELOW);
        let y = mcnemar_from_counts(c, b, 0.05, EXACT_MCNEMAR_BELOW);
        prop_assert_eq!(x.p_value, y.p_value);
        prop_assert_eq!(x.significant, y.significant);
        prop_assert!((0.0..=1.0).contains(&x.p_value));
    }

    #[test]
    fn fixing_a_token_never_lowers_accuracy(gold in bundles(1..40), noise in bundles(1..40), fix in any::<Index>()) {
        let s = schema();
        let n = gold.len().min(noise.len());
        let g = corpus(&s, &gold[..n], &[n]);
        let mut p = corpus(&s, &noise[..n], &[n]);
        let all = Subset::all_tags(&s);
        let before = accuracy(&p, &g, &s, &all, Slice::All, None).unwrap().accuracy;
        let pos = accuracy(&p, &g, &s, &Subset::pos(), Slice::All, None).unwrap().accuracy;
        prop_assert!(pos >= before);
        let i = fix.index(n);
        p.sentences[0].tokens[i] = g.sentences[0].tokens[i].clone();
        let after = accuracy(&p, &g, &s, &all, Slice::All, None).unwrap().accuracy;
        prop_assert!(after >= before);
    }

    #[test]
    fn harmonization_is_idempotent(picks in bundles(1..2)) {
        let h = harmonizer();
        let a = Analysis::new(bundle(&schema(), &picks[0]), "l", "d");
        let once = h.harmonize_analysis(&a, "egy").unwrap();
        h.reduced_schema().validate_bundle(&once.features).unwrap();
        prop_assert_eq!(h.harmonize_analysis(&once, "egy").unwrap(), once);
    }
}

#[test]
fn exact_and_asymptotic_tests_agree_near_the_switch() {
    for n in 24..=26u64 {
        for b in 0..=n {
            let exact = exact_binomial_two_sided(b.min(n - b), n);
            let diff = (b as f64 - (n - b) as f64).abs();
            let stat = (diff - 1.0).max(0.0).powi(2) / n as f64;
            let chi = chi2_1df_survival(stat);
            assert!((exact - chi).abs() < 0.01, "n={n} b={b}: {exact} vs {chi}");
        }
    }
}

#[test]
fn harmonized_conjunctions_merge() {
    let h = harmonizer();
    let mut seen = BTreeMap::new();
    for v in ["wa_conj", "wi_conj", "w_conj"] {
        let mut b = FeatureBundle::new();
        b.insert("prc2", v);
        let out = h.harmonize_analysis(&Analysis::new(b, "l", "d"), "egy").unwrap();
        seen.insert(v, out.features.get("prc2").unwrap().to_string());
    }
    assert!(seen.values().all(|v| v == "w_conj"), "{seen:?}");
}
