//! Accuracy metrics, error statistics and McNemar significance.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{oov_vocabulary, Corpus};
use crate::error::Error;
use crate::schema::{FeatureSchema, ALL_TAGS_10};
use crate::Result;

/// Critical value of the chi-squared distribution with one degree of freedom at 0.05.
pub const CHI2_1DF_CRITICAL_05: f64 = 3.841;

/// `b + c` below which McNemar uses the exact binomial test.
pub const EXACT_MCNEMAR_BELOW: u64 = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slice {
    All,
    Oov,
}

impl core::str::FromStr for Slice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Slice::All),
            "oov" => Ok(Slice::Oov),
            _ => Err(Error::InvalidArgument(format!("unknown slice {s:?}"))),
        }
    }
}

/// Named feature subset used for exact-match accuracy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subset {
    pub name: String,
    pub features: Vec<String>,
}

impl Subset {
    pub fn pos() -> Self {
        Subset {
            name: "pos".into(),
            features: ["pos".to_string()].to_vec(),
        }
    }

    /// Every feature of the schema.
    pub fn all_tags(schema: &FeatureSchema) -> Self {
        Subset {
            name: "all".into(),
            features: schema.names().map(String::from).collect(),
        }
    }

    pub fn all_tags_10() -> Self {
        Subset {
            name: "all10".into(),
            features: ALL_TAGS_10.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Feature set matching earlier published systems for `variant`:
    /// all features for msa, the ten shared features for glf, and everything
    /// but the second and third enclitics for egy and lev.
    pub fn all_tags_star(variant: &str, schema: &FeatureSchema) -> Result<Self> {
        let features: Vec<String> = match variant {
            "glf" => ALL_TAGS_10.iter().map(|s| s.to_string()).collect(),
            "egy" | "lev" => schema
                .names()
                .filter(|n| *n != "enc1" && *n != "enc2")
                .map(String::from)
                .collect(),
            "msa" => schema.names().map(String::from).collect(),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "no ALL TAGS* definition for variant {other:?}"
                )))
            }
        };
        Ok(Subset {
            name: format!("all-star:{variant}"),
            features,
        })
    }

    /// Parses `pos`, `all`, `all10` or `all-star:<variant>`.
    pub fn parse(spec: &str, schema: &FeatureSchema) -> Result<Self> {
        match spec {
            "pos" => Ok(Subset::pos()),
            "all" => Ok(Subset::all_tags(schema)),
            "all10" => Ok(Subset::all_tags_10()),
            s => match s.strip_prefix("all-star:") {
                Some(v) => Subset::all_tags_star(v, schema),
                None => Err(Error::InvalidArgument(format!("unknown subset {spec:?}"))),
            },
        }
    }

    /// Keeps only the features `schema` declares.
    pub fn restricted_to(&self, schema: &FeatureSchema) -> Subset {
        Subset {
            name: self.name.clone(),
            features: self
                .features
                .iter()
                .filter(|f| schema.has_feature(f))
                .cloned()
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metric: String,
    pub subset: Vec<String>,
    pub slice: Slice,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
}

fn check_aligned(pred: &Corpus, gold: &Corpus) -> Result<()> {
    if pred.sentences.len() != gold.sentences.len() {
        return Err(Error::Alignment(format!(
            "{} predicted vs {} gold sentences",
            pred.sentences.len(),
            gold.sentences.len()
        )));
    }
    for (p, g) in pred.sentences.iter().zip(&gold.sentences) {
        if p.tokens.len() != g.tokens.len() {
            return Err(Error::Alignment(format!(
                "sentence {:?}: {} predicted vs {} gold tokens",
                g.id,
                p.tokens.len(),
                g.tokens.len()
            )));
        }
        if let Some((pt, gt)) = p.tokens.iter().zip(&g.tokens).find(|(a, b)| a.raw != b.raw) {
            return Err(Error::Alignment(format!(
                "sentence {:?}: token {:?} vs gold {:?}",
                g.id, pt.raw, gt.raw
            )));
        }
    }
    Ok(())
}

fn check_subset(subset: &[String], schema: &FeatureSchema) -> Result<()> {
    match subset.iter().find(|f| !schema.has_feature(f)) {
        Some(f) => Err(Error::UnknownFeature(f.clone())),
        None => Ok(()),
    }
}

/// Per-token correctness under `subset`, in corpus order.
pub fn token_correctness(
    pred: &Corpus,
    gold: &Corpus,
    schema: &FeatureSchema,
    subset: &[String],
) -> Result<Vec<bool>> {
    check_aligned(pred, gold)?;
    check_subset(subset, schema)?;
    Ok(pred
        .tokens()
        .zip(gold.tokens())
        .map(|(p, g)| {
            subset.iter().all(|f| {
                schema.value_of(&p.analysis.features, f) == schema.value_of(&g.analysis.features, f)
            })
        })
        .collect())
}

/// Mask of tokens inside `slice`.
pub fn slice_mask(gold: &Corpus, slice: Slice, train_ref: Option<&Corpus>) -> Result<Vec<bool>> {
    match slice {
        Slice::All => Ok(alloc::vec![true; gold.token_count()]),
        Slice::Oov => {
            let train = train_ref.ok_or_else(|| {
                Error::InvalidArgument("the OOV slice needs a training reference".into())
            })?;
            let oov = oov_vocabulary(train, gold);
            Ok(gold.tokens().map(|t| oov.contains(&t.raw)).collect())
        }
    }
}

/// Exact-match accuracy over `subset` on the tokens of `slice`.
pub fn accuracy(
    pred: &Corpus,
    gold: &Corpus,
    schema: &FeatureSchema,
    subset: &Subset,
    slice: Slice,
    train_ref: Option<&Corpus>,
) -> Result<EvalReport> {
    let correct = token_correctness(pred, gold, schema, &subset.features)?;
    let mask = slice_mask(gold, slice, train_ref)?;
    let total = mask.iter().filter(|m| **m).count();
    let right = correct.iter().zip(&mask).filter(|(c, m)| **c && **m).count();
    Ok(EvalReport {
        metric: subset.name.clone(),
        subset: subset.features.clone(),
        slice,
        total,
        correct: right,
        accuracy: if total == 0 {
            0.0
        } else {
            right as f64 / total as f64
        },
    })
}

/// Share of `eval` tokens whose gold unfactored tag never occurs in `train`.
pub fn unseen_tag_rate(eval: &Corpus, train: &Corpus, schema: &FeatureSchema) -> Result<f64> {
    let seen: BTreeSet<String> = train
        .tokens()
        .map(|t| schema.serialize_unfactored(&t.analysis.features).map(|u| u.0))
        .collect::<Result<_>>()?;
    let mut unseen = 0usize;
    let mut total = 0usize;
    for t in eval.tokens() {
        let tag = schema.serialize_unfactored(&t.analysis.features)?;
        unseen += (!seen.contains(&tag.0)) as usize;
        total += 1;
    }
    Ok(if total == 0 {
        0.0
    } else {
        unseen as f64 / total as f64
    })
}

/// POS value to coarse category (nominal, verb, particle, other).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryMap(pub BTreeMap<String, String>);

impl CategoryMap {
    pub const FALLBACK: &'static str = "other";

    pub fn category<'a>(&'a self, pos: &str) -> &'a str {
        self.0.get(pos).map_or(Self::FALLBACK, String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub subset: Vec<String>,
    pub per_feature_error_counts: BTreeMap<String, usize>,
    pub total_error_tokens: usize,
    pub mean_failures_per_error: f64,
    /// Gold category to predicted category counts over POS errors.
    pub pos_confusion: BTreeMap<String, BTreeMap<String, usize>>,
}

impl ErrorStats {
    /// Share of erroneous tokens with `feature` wrong, in percent.
    pub fn percentage(&self, feature: &str) -> f64 {
        if self.total_error_tokens == 0 {
            return 0.0;
        }
        let c = self.per_feature_error_counts.get(feature).copied().unwrap_or(0);
        100.0 * c as f64 / self.total_error_tokens as f64
    }

    pub fn confusion(&self, gold: &str, pred: &str) -> usize {
        self.pos_confusion
            .get(gold)
            .and_then(|m| m.get(pred))
            .copied()
            .unwrap_or(0)
    }
}

/// Which features fail, and how many at once, on tokens wrong under `subset`.
pub fn feature_error_stats(
    pred: &Corpus,
    gold: &Corpus,
    schema: &FeatureSchema,
    subset: &Subset,
    categories: &CategoryMap,
) -> Result<ErrorStats> {
    check_aligned(pred, gold)?;
    check_subset(&subset.features, schema)?;
    let mut counts: BTreeMap<String, usize> =
        subset.features.iter().map(|f| (f.clone(), 0)).collect();
    let mut errors = 0usize;
    let mut failures = 0usize;
    let mut confusion: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for (p, g) in pred.tokens().zip(gold.tokens()) {
        let wrong: Vec<&String> = subset
            .features
            .iter()
            .filter(|f| {
                schema.value_of(&p.analysis.features, f) != schema.value_of(&g.analysis.features, f)
            })
            .collect();
        if wrong.is_empty() {
            continue;
        }
        errors += 1;
        failures += wrong.len();
        for f in &wrong {
            *counts.get_mut(*f).expect("subset feature") += 1;
        }
        if wrong.iter().any(|f| f.as_str() == "pos") {
            let gp = schema.value_of(&g.analysis.features, "pos").unwrap_or_default();
            let pp = schema.value_of(&p.analysis.features, "pos").unwrap_or_default();
            *confusion
                .entry(categories.category(gp).into())
                .or_default()
                .entry(categories.category(pp).into())
                .or_insert(0) += 1;
        }
    }
    Ok(ErrorStats {
        subset: subset.features.clone(),
        per_feature_error_counts: counts,
        total_error_tokens: errors,
        mean_failures_per_error: if errors == 0 {
            0.0
        } else {
            failures as f64 / errors as f64
        },
        pos_confusion: confusion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    /// First system right, second wrong.
    pub b: u64,
    /// First system wrong, second right.
    pub c: u64,
    /// Continuity-corrected chi-squared statistic; absent for the exact test.
    pub statistic: Option<f64>,
    pub p_value: f64,
    pub exact: bool,
    pub significant: bool,
}

fn ln_choose(n: u64, k: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// Two-sided exact binomial p-value for `k` successes out of `n` at 1/2.
pub fn exact_binomial_two_sided(k: u64, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let k = k.min(n - k);
    let ln_half_n = n as f64 * libm::log(0.5);
    let tail: f64 = (0..=k)
        .map(|i| libm::exp(ln_choose(n, i) + ln_half_n))
        .sum();
    (2.0 * tail).min(1.0)
}

/// Upper tail of the chi-squared distribution with one degree of freedom.
pub fn chi2_1df_survival(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        libm::erfc(libm::sqrt(x / 2.0))
    }
}

/// McNemar's test on paired per-token correctness.
pub fn mcnemar(correct_a: &[bool], correct_b: &[bool], alpha: f64) -> Result<McNemarResult> {
    mcnemar_with_threshold(correct_a, correct_b, alpha, EXACT_MCNEMAR_BELOW)
}

pub fn mcnemar_with_threshold(
    correct_a: &[bool],
    correct_b: &[bool],
    alpha: f64,
    exact_below: u64,
) -> Result<McNemarResult> {
    if correct_a.len() != correct_b.len() {
        return Err(Error::LengthMismatch(correct_a.len(), correct_b.len()));
    }
    let mut b = 0u64;
    let mut c = 0u64;
    for (&x, &y) in correct_a.iter().zip(correct_b) {
        match (x, y) {
            (true, false) => b += 1,
            (false, true) => c += 1,
            _ => {}
        }
    }
    Ok(mcnemar_from_counts(b, c, alpha, exact_below))
}

pub fn mcnemar_from_counts(b: u64, c: u64, alpha: f64, exact_below: u64) -> McNemarResult {
    let n = b + c;
    let (statistic, p_value, exact) = if n < exact_below {
        (None, exact_binomial_two_sided(b.min(c), n), true)
    } else {
        let diff = (b as f64 - c as f64).abs() - 1.0;
        let stat = diff.max(0.0) * diff.max(0.0) / n as f64;
        (Some(stat), chi2_1df_survival(stat), false)
    };
    McNemarResult {
        b,
        c,
        statistic,
        p_value,
        exact,
        significant: p_value < alpha,
    }
}

/// One (training size, system) result with its per-token correctness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveCell {
    pub size: usize,
    pub system: String,
    pub report: EvalReport,
    pub correct: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEntry {
    pub size: usize,
    pub system: String,
    pub accuracy: f64,
    pub best: bool,
    /// Not significantly different from the best cell.
    pub indistinguishable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub metric: String,
    pub slice: Slice,
    pub sizes: Vec<usize>,
    pub systems: Vec<String>,
    pub entries: Vec<CurveEntry>,
}

impl CurveTable {
    pub fn entry(&self, size: usize, system: &str) -> Option<&CurveEntry> {
        self.entries
            .iter()
            .find(|e| e.size == size && e.system == system)
    }

    /// Aligned text: `*` marks the best cells, `_` cells indistinguishable from the best.
    pub fn render_text(&self) -> String {
        let width = self
            .systems
            .iter()
            .map(|s| s.len())
            .max()
            .unwrap_or(0)
            .max(9);
        let mut out = String::new();
        let _ = write!(out, "{:>8}", "size");
        for s in &self.systems {
            let _ = write!(out, "  {s:>width$}");
        }
        out.push('\n');
        for &size in &self.sizes {
            let _ = write!(out, "{size:>8}");
            for s in &self.systems {
                let cell = match self.entry(size, s) {
                    Some(e) => {
                        let mark = if e.best {
                            "*"
                        } else if e.indistinguishable {
                            "_"
                        } else {
                            " "
                        };
                        format!("{:.2}{mark}", 100.0 * e.accuracy)
                    }
                    None => "-".into(),
                };
                let _ = write!(out, "  {cell:>width$}");
            }
            out.push('\n');
        }
        out
    }
}

/// Sizes x systems table; every maximum is flagged best, and cells whose
/// McNemar test against the first best cell is not significant are flagged
/// indistinguishable.
pub fn learning_curve_report(cells: &[CurveCell], alpha: f64) -> Result<CurveTable> {
    let first = cells
        .first()
        .ok_or_else(|| Error::InvalidArgument("no learning-curve cells".into()))?;
    for c in cells {
        if c.report.metric != first.report.metric
            || c.report.subset != first.report.subset
            || c.report.slice != first.report.slice
        {
            return Err(Error::InconsistentMetric(format!(
                "{} ({:?}) vs {} ({:?})",
                first.report.metric, first.report.slice, c.report.metric, c.report.slice
            )));
        }
    }
    let sizes: Vec<usize> = cells
        .iter()
        .map(|c| c.size)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut systems: Vec<String> = Vec::new();
    for c in cells {
        if !systems.contains(&c.system) {
            systems.push(c.system.clone());
        }
    }
    let max = cells
        .iter()
        .map(|c| c.report.accuracy)
        .fold(f64::NEG_INFINITY, f64::max);
    let best = cells
        .iter()
        .filter(|c| c.report.accuracy == max)
        .min_by_key(|c| {
            (
                sizes.iter().position(|s| *s == c.size),
                systems.iter().position(|s| *s == c.system),
            )
        })
        .expect("non-empty");
    let mut entries = Vec::with_capacity(cells.len());
    for c in cells {
        let is_best = c.report.accuracy == max;
        let indistinguishable = if is_best {
            true
        } else {
            !mcnemar(&best.correct, &c.correct, alpha)?.significant
        };
        entries.push(CurveEntry {
            size: c.size,
            system: c.system.clone(),
            accuracy: c.report.accuracy,
            best: is_best,
            indistinguishable,
        });
    }
    Ok(CurveTable {
        metric: first.report.metric.clone(),
        slice: first.report.slice,
        sizes,
        systems,
        entries,
    })
}
