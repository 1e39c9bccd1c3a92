//! Seeded synthetic corpora with an oracle analyzer.
//!
//! Forms are built from consonantal roots plus affixes that encode overt
//! features (gender, number, person, aspect, clitics) the same way for every
//! variant, so corpora generated for different schemas share morphology.
//! Case, state, mood and voice are not marked on the surface; a form's
//! alternative analyses differ in those features (or in POS within its word
//! class) and the corpus picks among them from context.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analyzer::{AnalyzerDb, BackoffPolicy};
use crate::corpus::{Analysis, AnnotatedToken, Corpus, Sentence, Split};
use crate::error::Error;
use crate::schema::{FeatureBundle, FeatureSchema};
use crate::{Result, DEFAULT_SEED};

/// Buckwalter short vowels and tanween; stripping them from `diac` gives the raw form.
pub const BUCKWALTER_DIACRITICS: [char; 8] = ['a', 'i', 'u', 'o', '~', 'F', 'N', 'K'];

/// Provenance string of the generated analyzer.
pub const ORACLE_PROVENANCE: &str = "synthetic-oracle";

const STEM_LETTERS: [char; 14] = [
    'd', 'D', 'T', 'r', 'z', 'S', 'q', 'g', 'x', 'j', 'Z', '*', 'v', 'Y',
];
const NOMINAL_POS: [&str; 3] = ["noun", "adj", "noun_prop"];
const PARTICLE_POS: [&str; 8] = [
    "prep", "conj", "part", "part_neg", "conj_sub", "adv", "pron", "pron_dem",
];
const CONJ: [&str; 3] = ["wa_conj", "wi_conj", "w_conj"];
const CONJ_F: [&str; 3] = ["fa_conj", "fi_conj", "f_conj"];
const PREPS: [[&str; 2]; 3] = [["bi_prep", "b_prep"], ["li_prep", "l_prep"], ["ka_prep", "k_prep"]];
const FUT: [&str; 6] = ["sa_fut", "s_fut", "Ha_fut", "H_fut", "ha_fut", "h_fut"];
const POSS: [(&str, &str); 6] = [
    ("3ms_poss", "h"),
    ("3fs_poss", "hA"),
    ("2ms_poss", "k"),
    ("1s_poss", "y"),
    ("1p_poss", "nA"),
    ("3mp_poss", "hm"),
];
const DOBJ: [(&str, &str); 4] = [
    ("3ms_dobj", "h"),
    ("3fs_dobj", "hA"),
    ("1s_dobj", "ny"),
    ("3mp_dobj", "hm"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub vocab_size: usize,
    /// Mean number of analyses per form; 1.0 makes every form unambiguous.
    pub ambiguity_rate: f64,
    pub mean_sentence_len: usize,
    /// Sentence lengths are uniform in `mean ± spread`.
    pub sentence_len_spread: usize,
    pub token_budget: usize,
    pub seed: u64,
    /// TRAIN, TUNE, DEV, TEST shares of the sentences.
    pub split_ratios: [f64; 4],
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            vocab_size: 5000,
            ambiguity_rate: 3.0,
            mean_sentence_len: 10,
            sentence_len_spread: 5,
            token_budget: 20_000,
            seed: DEFAULT_SEED,
            split_ratios: [0.7, 0.1, 0.1, 0.1],
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("synthetic spec: {m}")));
        if self.vocab_size == 0 {
            return bad("vocab_size must be positive");
        }
        if !(self.ambiguity_rate >= 1.0 && self.ambiguity_rate.is_finite()) {
            return bad("ambiguity_rate must be at least 1");
        }
        if self.mean_sentence_len == 0 || self.sentence_len_spread >= self.mean_sentence_len {
            return bad("need 0 <= spread < mean sentence length");
        }
        if self.sentence_count() < 4 {
            return bad("token budget too small for four splits");
        }
        if self.split_ratios.iter().any(|r| !(*r > 0.0))
            || libm::fabs(self.split_ratios.iter().sum::<f64>() - 1.0) > 1e-9
        {
            return bad("split ratios must be positive and sum to 1");
        }
        Ok(())
    }

    pub fn sentence_count(&self) -> usize {
        if self.mean_sentence_len == 0 {
            return 0;
        }
        libm::round(self.token_budget as f64 / self.mean_sentence_len as f64) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub train: Corpus,
    pub tune: Corpus,
    pub dev: Corpus,
    pub test: Corpus,
    /// Every form with its full analysis set.
    pub analyzer: AnalyzerDb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Nominal,
    Verb,
    Particle,
}

#[derive(Debug, Clone)]
struct Entry {
    form: String,
    class: Class,
    analyses: Vec<Analysis>,
}

/// Segment of a clitic value as written: the part before `_` without short vowels.
fn clitic_surface(value: &str) -> String {
    value
        .split('_')
        .next()
        .unwrap_or("")
        .chars()
        .filter(|c| !matches!(c, 'a' | 'e' | 'i' | 'o' | 'u'))
        .collect()
}

fn vocalize(root: &str, vowel: char) -> String {
    let n = root.chars().count();
    let mut out = String::new();
    for (i, c) in root.chars().enumerate() {
        out.push(c);
        if i + 1 < n {
            out.push(if i == 0 { vowel } else { 'a' });
        }
    }
    out
}

fn case_ending(cas: &str, stt: &str) -> &'static str {
    match (cas, stt == "i") {
        ("n", false) => "u",
        ("a", false) => "a",
        ("g", false) => "i",
        ("n", true) => "N",
        ("a", true) => "F",
        ("g", true) => "K",
        _ => "",
    }
}

fn mood_ending(mod_: &str) -> &'static str {
    match mod_ {
        "i" => "u",
        "s" => "a",
        "j" => "o",
        _ => "",
    }
}

/// Surface pieces of one inflected word.
#[derive(Debug, Clone, Default)]
struct Word {
    features: BTreeMap<&'static str, String>,
    prefix: String,
    root: String,
    suffix: String,
    enclitic: String,
}

struct Generator<'a> {
    schema: &'a FeatureSchema,
    rng: ChaCha8Rng,
}

impl<'a> Generator<'a> {
    fn has_value(&self, feature: &str, value: &str) -> bool {
        self.schema
            .feature(feature)
            .is_some_and(|f| f.contains(value))
    }

    /// Random schema-valid choice among `options`, if any is valid.
    fn choose(&mut self, feature: &str, options: &[&str]) -> Option<String> {
        let valid: Vec<&str> = options
            .iter()
            .copied()
            .filter(|v| self.has_value(feature, v))
            .collect();
        valid.choose(&mut self.rng).map(|v| v.to_string())
    }

    fn coin(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    /// Bundle over the schema: requested values when valid, defaults otherwise.
    fn realize(&self, features: &BTreeMap<&'static str, String>) -> FeatureBundle {
        self.schema
            .features()
            .iter()
            .map(|def| {
                let value = match features.get(def.name.as_str()) {
                    Some(v) if def.contains(v) => v.clone(),
                    _ => def.default.clone(),
                };
                (def.name.clone(), value)
            })
            .collect()
    }

    fn proclitics(&mut self, w: &mut Word, prep: bool, det: bool, fut: bool) {
        let mut prefix = String::new();
        if self.coin(0.2) {
            let opts: &[&str] = if self.coin(0.75) { &CONJ } else { &CONJ_F };
            if let Some(v) = self.choose("prc2", opts) {
                prefix.push_str(&clitic_surface(&v));
                w.features.insert("prc2", v);
            }
        }
        if prep {
            let i = self.rng.gen_range(0..PREPS.len());
            if let Some(v) = self.choose("prc1", &PREPS[i]) {
                prefix.push_str(&clitic_surface(&v));
                w.features.insert("prc1", v);
            }
        } else if fut {
            if let Some(v) = self.choose("prc1", &FUT) {
                prefix.push_str(&clitic_surface(&v));
                w.features.insert("prc1", v);
            }
        }
        if det && self.has_value("prc0", "Al_det") {
            prefix.push_str("Al");
            w.features.insert("prc0", "Al_det".into());
        }
        w.prefix = prefix + &w.prefix;
    }

    fn nominal(&mut self, root: &str) -> Word {
        let mut w = Word {
            root: root.into(),
            ..Word::default()
        };
        let gen = if self.coin(0.6) { "m" } else { "f" };
        let num = match self.rng.gen_range(0..10) {
            0 => "d",
            1..=3 => "p",
            _ => "s",
        };
        w.suffix = match (gen, num) {
            ("m", "s") => "",
            ("f", "s") => "p",
            ("m", "d") => "An",
            ("f", "d") => "tAn",
            ("m", _) => "wn",
            _ => "At",
        }
        .into();
        w.features.insert("gen", gen.into());
        w.features.insert("num", num.into());
        let prep = self.coin(0.25);
        let det = self.coin(0.3);
        self.proclitics(&mut w, prep, det, false);
        if !det && self.coin(0.2) {
            let (v, s) = POSS[self.rng.gen_range(0..POSS.len())];
            if self.has_value("enc0", v) {
                w.features.insert("enc0", v.into());
                w.enclitic = s.into();
            }
        }
        if prep {
            w.features.insert("cas", "g".into());
        }
        if det {
            w.features.insert("stt", "d".into());
        } else if w.features.contains_key("enc0") {
            w.features.insert("stt", "c".into());
        }
        w
    }

    fn verb(&mut self, root: &str) -> Word {
        let mut w = Word {
            root: root.into(),
            ..Word::default()
        };
        let asp = match self.rng.gen_range(0..10) {
            0 => "c",
            1..=4 => "i",
            _ => "p",
        };
        let (per, gen, num, pre, suf) = match asp {
            "p" => *[
                ("3", "m", "s", "", ""),
                ("3", "f", "s", "", "t"),
                ("3", "m", "p", "", "wA"),
                ("3", "f", "p", "", "n"),
                ("1", "m", "s", "", "tw"),
                ("2", "m", "s", "", "tk"),
                ("1", "m", "p", "", "nA"),
            ]
            .choose(&mut self.rng)
            .expect("non-empty"),
            "i" => *[
                ("3", "m", "s", "y", ""),
                ("3", "f", "s", "t", ""),
                ("2", "m", "s", "t", ""),
                ("3", "m", "p", "y", "wn"),
                ("3", "f", "p", "y", "n"),
                ("1", "m", "s", "A", ""),
                ("1", "m", "p", "n", ""),
            ]
            .choose(&mut self.rng)
            .expect("non-empty"),
            _ => *[
                ("2", "m", "s", "A", ""),
                ("2", "f", "s", "A", "y"),
                ("2", "m", "p", "A", "wA"),
            ]
            .choose(&mut self.rng)
            .expect("non-empty"),
        };
        for (f, v) in [("per", per), ("gen", gen), ("num", num), ("asp", asp)] {
            w.features.insert(f, v.into());
        }
        w.features.insert("vox", "a".into());
        if asp == "i" {
            w.features.insert("mod", "i".into());
        }
        w.prefix = pre.into();
        w.suffix = suf.into();
        let fut = asp == "i" && self.coin(0.2);
        self.proclitics(&mut w, false, false, fut);
        if self.coin(0.2) {
            let (v, s) = DOBJ[self.rng.gen_range(0..DOBJ.len())];
            if self.has_value("enc0", v) {
                w.features.insert("enc0", v.into());
                w.enclitic = s.into();
            }
        }
        if asp != "c" && self.coin(0.08) && self.has_value("enc1", "$_neg") {
            w.features.insert("enc1", "$_neg".into());
            w.enclitic.push('$');
        }
        w
    }

    fn particle(&mut self, root: &str, pos: &str) -> Word {
        let mut w = Word {
            root: root.into(),
            ..Word::default()
        };
        w.features.insert("pos", pos.into());
        if self.coin(0.3) {
            if let Some(v) = self.choose("prc2", &CONJ) {
                w.prefix = clitic_surface(&v);
                w.features.insert("prc2", v);
            }
        }
        w
    }

    fn raw(w: &Word) -> String {
        format!("{}{}{}{}", w.prefix, w.root, w.suffix, w.enclitic)
    }

    fn analysis(&self, w: &Word, class: Class) -> Analysis {
        let bundle = self.realize(&w.features);
        let get = |f: &str| bundle.get(f).unwrap_or("");
        let (first, ending) = match class {
            Class::Nominal => ('a', case_ending(get("cas"), get("stt"))),
            Class::Verb => (
                if get("vox") == "p" { 'u' } else { 'a' },
                mood_ending(get("mod")),
            ),
            Class::Particle => ('a', ""),
        };
        let stem = vocalize(&w.root, first);
        let diac = format!("{}{}{}{}{}", w.prefix, stem, w.suffix, ending, w.enclitic);
        Analysis::new(bundle, vocalize(&w.root, 'a'), diac)
    }

    /// Every variation of the covert features and POS allowed for `w`.
    fn alternatives(&self, w: &Word, class: Class) -> Vec<Word> {
        let mut out = Vec::new();
        let vary = |base: &Word, f: &'static str, vals: &[&str], out: &mut Vec<Word>| {
            let prev: Vec<Word> = core::mem::take(out);
            let seeds = if prev.is_empty() {
                alloc::vec![base.clone()]
            } else {
                prev
            };
            for s in seeds {
                for v in vals {
                    let mut n = s.clone();
                    n.features.insert(f, (*v).into());
                    out.push(n);
                }
            }
        };
        match class {
            Class::Nominal => {
                vary(w, "pos", &NOMINAL_POS, &mut out);
                if !w.features.contains_key("cas") {
                    vary(w, "cas", &["n", "a", "g"], &mut out);
                }
                if !w.features.contains_key("stt") {
                    vary(w, "stt", &["i", "c"], &mut out);
                }
            }
            Class::Verb => {
                if w.features["asp"] != "c" {
                    vary(w, "vox", &["a", "p"], &mut out);
                }
                if w.features["asp"] == "i" {
                    vary(w, "mod", &["i", "s", "j"], &mut out);
                    if w.prefix.ends_with('t') && w.suffix.is_empty() {
                        let prev: Vec<Word> = core::mem::take(&mut out);
                        for s in prev {
                            for (per, gen) in [("3", "f"), ("2", "m")] {
                                let mut n = s.clone();
                                n.features.insert("per", per.into());
                                n.features.insert("gen", gen.into());
                                out.push(n);
                            }
                        }
                    }
                }
                if out.is_empty() {
                    out.push(w.clone());
                }
            }
            Class::Particle => vary(w, "pos", &PARTICLE_POS, &mut out),
        }
        out
    }
}

fn analyses_per_form(rng: &mut ChaCha8Rng, rate: f64) -> usize {
    let extra = rate - 1.0;
    let whole = libm::floor(extra) as usize;
    let frac = extra - whole as f64;
    1 + rng.gen_range(0..=2 * whole) + usize::from(frac > 0.0 && rng.gen_bool(frac))
}

fn build_vocabulary(g: &mut Generator<'_>, spec: &SyntheticSpec) -> Result<Vec<Entry>> {
    let mut entries: Vec<Entry> = Vec::with_capacity(spec.vocab_size);
    let mut forms: BTreeSet<String> = BTreeSet::new();
    let mut roots: BTreeSet<String> = BTreeSet::new();
    let mut attempts = 0usize;
    while entries.len() < spec.vocab_size {
        attempts += 1;
        if attempts > spec.vocab_size.saturating_mul(50) + 1000 {
            return Err(Error::InvalidArgument(format!(
                "could not build {} distinct forms",
                spec.vocab_size
            )));
        }
        let class = match g.rng.gen_range(0..100) {
            0..=54 => Class::Nominal,
            55..=87 => Class::Verb,
            _ => Class::Particle,
        };
        let len = match class {
            Class::Particle => 2,
            _ if g.coin(0.8) => 3,
            _ => 4,
        };
        let root: String = (0..len)
            .map(|_| STEM_LETTERS[g.rng.gen_range(0..STEM_LETTERS.len())])
            .collect();
        if !roots.insert(root.clone()) {
            continue;
        }
        let lexeme_pos = match class {
            Class::Nominal => match g.rng.gen_range(0..20) {
                0..=11 => "noun",
                12..=16 => "adj",
                _ => "noun_prop",
            },
            Class::Verb => "verb",
            Class::Particle => PARTICLE_POS[g.rng.gen_range(0..PARTICLE_POS.len())],
        };
        let n_forms = match class {
            Class::Particle => g.rng.gen_range(1..=2),
            _ => g.rng.gen_range(1..=6),
        };
        for _ in 0..n_forms {
            if entries.len() == spec.vocab_size {
                break;
            }
            let mut w = match class {
                Class::Nominal => g.nominal(&root),
                Class::Verb => g.verb(&root),
                Class::Particle => g.particle(&root, lexeme_pos),
            };
            w.features.insert("pos", lexeme_pos.into());
            if class == Class::Nominal {
                for (f, v) in [("cas", "n"), ("stt", "i")] {
                    if !w.features.contains_key(f) {
                        w.features.insert(f, v.into());
                    }
                }
            }
            let form = Generator::raw(&w);
            if !forms.insert(form.clone()) {
                continue;
            }
            let base = g.analysis(&w, class);
            let mut keys = BTreeSet::from([base.canonical_key()]);
            let mut analyses = alloc::vec![base];
            let k = analyses_per_form(&mut g.rng, spec.ambiguity_rate);
            if k > 1 {
                let mut alts = g.alternatives(&w, class);
                alts.shuffle(&mut g.rng);
                for alt in alts {
                    if analyses.len() == k {
                        break;
                    }
                    let a = g.analysis(&alt, class);
                    if keys.insert(a.canonical_key()) {
                        analyses.push(a);
                    }
                }
            }
            entries.push(Entry {
                form,
                class,
                analyses,
            });
        }
    }
    Ok(entries)
}

fn zipf(n: usize) -> Option<WeightedIndex<f64>> {
    WeightedIndex::new((0..n).map(|r| 1.0 / (r as f64 + 1.0))).ok()
}

fn next_class(rng: &mut ChaCha8Rng, prev: Option<(Class, &Analysis)>) -> Class {
    let w: [u32; 3] = match prev {
        None => [45, 35, 20],
        Some((Class::Nominal, _)) => [40, 20, 40],
        Some((Class::Verb, _)) => [60, 5, 35],
        Some((Class::Particle, a)) => match a.features.get("pos") {
            Some("prep") => [95, 0, 5],
            Some("part_neg") => [10, 85, 5],
            _ => [60, 30, 10],
        },
    };
    let r = rng.gen_range(0..w.iter().sum::<u32>());
    if r < w[0] {
        Class::Nominal
    } else if r < w[0] + w[1] {
        Class::Verb
    } else {
        Class::Particle
    }
}

/// Relative weight of `a` (the `rank`-th analysis of its form) after `prev`.
fn context_weight(rank: usize, class: Class, a: &Analysis, prev: Option<(Class, &Analysis)>) -> f64 {
    let mut w = 1.0 / (rank as f64 + 1.0);
    let f = |x: &Analysis, name: &str| x.features.get(name).map(String::from);
    let prev_pos = prev.and_then(|(_, p)| f(p, "pos"));
    match class {
        Class::Nominal => {
            let preferred = match prev {
                None => "n".to_string(),
                Some((Class::Verb, _)) => "a".into(),
                Some((Class::Particle, p)) if f(p, "pos").as_deref() == Some("prep") => "g".into(),
                Some((Class::Particle, _)) => "n".into(),
                Some((Class::Nominal, p)) => {
                    if f(p, "stt").as_deref() == Some("c") {
                        "g".into()
                    } else {
                        f(p, "cas").unwrap_or_else(|| "n".into())
                    }
                }
            };
            if f(a, "cas").as_deref() == Some(preferred.as_str()) {
                w *= 8.0;
            }
            let after_nominal = matches!(prev, Some((Class::Nominal, _)));
            match f(a, "pos").as_deref() {
                Some("adj") if after_nominal => w *= 4.0,
                Some("noun") if !after_nominal => w *= 4.0,
                _ => {}
            }
            if f(a, "stt").as_deref() == Some("c") && !after_nominal {
                w *= 2.0;
            }
        }
        Class::Verb => {
            let mood = match prev_pos.as_deref() {
                Some("part_neg") => "j",
                Some("conj_sub") => "s",
                _ => "i",
            };
            if f(a, "mod").as_deref() == Some(mood) {
                w *= 8.0;
            }
            if f(a, "vox").as_deref() == Some("a") {
                w *= 4.0;
            }
            if f(a, "per").as_deref() == Some("3") {
                w *= 2.0;
            }
        }
        Class::Particle => {
            let liked = match prev {
                Some((Class::Verb, _)) => "prep",
                Some((Class::Nominal, _)) => "conj",
                _ => "part",
            };
            if f(a, "pos").as_deref() == Some(liked) {
                w *= 4.0;
            }
        }
    }
    w
}

/// Generates TRAIN/TUNE/DEV/TEST corpora over `schema` plus the oracle analyzer.
pub fn generate_synthetic(spec: &SyntheticSpec, schema: &FeatureSchema) -> Result<SyntheticData> {
    spec.validate()?;
    let mut g = Generator {
        schema,
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
    };
    let entries = build_vocabulary(&mut g, spec)?;

    let mut pools: [Vec<usize>; 3] = Default::default();
    for (i, e) in entries.iter().enumerate() {
        pools[e.class as usize].push(i);
    }
    let samplers: Vec<Option<WeightedIndex<f64>>> = pools.iter().map(|p| zipf(p.len())).collect();

    let n_sentences = spec.sentence_count();
    let lo = spec.mean_sentence_len - spec.sentence_len_spread;
    let hi = spec.mean_sentence_len + spec.sentence_len_spread;
    let mut rng = g.rng;
    let mut sentences = Vec::with_capacity(n_sentences);
    for s in 0..n_sentences {
        let len = rng.gen_range(lo..=hi);
        let mut tokens: Vec<AnnotatedToken> = Vec::with_capacity(len);
        let mut prev: Option<(Class, usize)> = None;
        for _ in 0..len {
            let prev_ref = prev.map(|(c, t)| (c, &tokens[t].analysis));
            let mut class = next_class(&mut rng, prev_ref);
            // fall back to any non-empty class when the schema-sized vocabulary lacks one
            while samplers[class as usize].is_none() {
                class = match class {
                    Class::Nominal => Class::Verb,
                    Class::Verb => Class::Particle,
                    Class::Particle => Class::Nominal,
                };
            }
            let pool = &pools[class as usize];
            let entry = &entries[pool[samplers[class as usize]
                .as_ref()
                .expect("checked")
                .sample(&mut rng)]];
            let weights: Vec<f64> = entry
                .analyses
                .iter()
                .enumerate()
                .map(|(r, a)| context_weight(r, class, a, prev_ref))
                .collect();
            let pick = WeightedIndex::new(&weights)
                .map_err(|e| Error::InvalidArgument(format!("analysis weights: {e}")))?
                .sample(&mut rng);
            tokens.push(AnnotatedToken::new(
                entry.form.clone(),
                entry.analyses[pick].clone(),
            ));
            prev = Some((class, tokens.len() - 1));
        }
        sentences.push(Sentence::new(format!("syn-{:06}", s + 1), tokens));
    }

    let n = sentences.len();
    let mut cuts = [0usize; 4];
    let mut acc = 0.0;
    for (i, r) in spec.split_ratios.iter().enumerate().take(3) {
        acc += r;
        cuts[i] = (libm::round(acc * n as f64) as usize).clamp(i + 1, n - (3 - i));
    }
    cuts[3] = n;
    for i in 1..3 {
        cuts[i] = cuts[i].max(cuts[i - 1] + 1);
    }
    let mut rest = sentences;
    let test = rest.split_off(cuts[2]);
    let dev = rest.split_off(cuts[1]);
    let tune = rest.split_off(cuts[0]);
    let train = rest;
    let variant = schema.variant();

    let analyzer = AnalyzerDb::from_entries(
        schema,
        BackoffPolicy::KeepPredictions,
        ORACLE_PROVENANCE,
        entries.into_iter().map(|e| (e.form, e.analyses)),
    )?;
    Ok(SyntheticData {
        train: Corpus::new(variant, Split::Train, train),
        tune: Corpus::new(variant, Split::Tune, tune),
        dev: Corpus::new(variant, Split::Dev, dev),
        test: Corpus::new(variant, Split::Test, test),
        analyzer,
    })
}
