//! Learning-curve experiments: sample, train, optionally retag, evaluate.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use morphdis_core::corpus::sample_learning_curve;
use morphdis_core::disambiguator::{
    disambiguate_corpus, Disambiguated, DisambiguationConfig, DEFAULT_SMOOTHING,
};
use morphdis_core::eval::{
    accuracy, feature_error_stats, learning_curve_report, token_correctness, CategoryMap,
    CurveCell, CurveTable, ErrorStats, EvalReport, Slice, Subset,
};
use morphdis_core::harmonizer::{HarmonizationConfig, Harmonizer};
use morphdis_core::tagger::{tag_corpus, train, TrainConfig};
use morphdis_core::{
    AnalyzerDb, Corpus, FeatureDistribution, FeatureSchema, Split, TaggerKind, TaggerModel,
    UnigramModel, DEFAULT_SEED,
};
use serde::{Deserialize, Serialize};

use crate::analyzer_io::load_analyzer;
use crate::config::{default_categories, load_harmonization};
use crate::corpus_io::{read_corpus, write_corpus};
use crate::dist_io::load_external_distributions;
use crate::{save_json, schemas, write_text, Error, Result};

pub const STAGE1_MODEL: &str = "models/stage1.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strategy {
    /// Target-variant data only.
    Single,
    /// Harmonized high-resource corpora plus the target sample in one training set.
    Merged,
    /// Train on the harmonized high-resource corpora, then continue on the target sample.
    Continued,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SINGLE" => Ok(Strategy::Single),
            "MERGED" => Ok(Strategy::Merged),
            "CONTINUED" => Ok(Strategy::Continued),
            _ => Err(Error::Usage(format!("unknown strategy {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPaths {
    pub train: PathBuf,
    pub tune: PathBuf,
    pub dev: PathBuf,
    pub test: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analyzer: Option<PathBuf>,
    /// Interchange file aligned with DEV, evaluated as the `external` system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_distributions: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighResourcePath {
    pub variant: String,
    /// Built-in schema name or schema file.
    pub schema: String,
    pub train: PathBuf,
}

fn default_epochs() -> usize {
    10
}

fn default_alpha() -> f64 {
    0.05
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub variant: String,
    /// Built-in schema name or schema file.
    pub schema: String,
    pub kind: TaggerKind,
    pub use_analyzer: bool,
    pub sizes: Vec<usize>,
    pub strategy: Strategy,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    pub paths: ExperimentPaths,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub high_resource: Vec<HighResourcePath>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonization: Option<PathBuf>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Usage(format!(
                "sizes must be non-empty and strictly increasing: {:?}",
                self.sizes
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Usage("epochs must be at least 1".into()));
        }
        if self.strategy != Strategy::Single && self.high_resource.is_empty() {
            return Err(Error::Usage(format!(
                "{:?} needs high-resource corpora",
                self.strategy
            )));
        }
        if self.use_analyzer != self.paths.analyzer.is_some() {
            return Err(Error::Usage(
                "an analyzer path is required exactly when use_analyzer is set".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Usage(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Everything an experiment reads, already loaded.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub schema: FeatureSchema,
    pub train: Corpus,
    pub tune: Corpus,
    pub dev: Corpus,
    pub test: Corpus,
    pub analyzer: Option<AnalyzerDb>,
    /// Corpus and source variant name.
    pub high_resource: Vec<(Corpus, String)>,
    pub harmonization: HarmonizationConfig,
    pub external_dev: Option<Vec<Vec<FeatureDistribution>>>,
    pub categories: CategoryMap,
}

impl ExperimentData {
    pub fn load(spec: &ExperimentSpec) -> Result<Self> {
        let schema = schemas::resolve(&spec.schema).map_err(Error::stage("schema"))?;
        if schema.variant() != spec.variant {
            return Err(Error::Usage(format!(
                "schema {:?} is for variant {:?}, spec says {:?}",
                spec.schema,
                schema.variant(),
                spec.variant
            )));
        }
        let p = &spec.paths;
        let read = |path: &Path, split: Split, what: &str| {
            read_corpus(path, &schema, split).map_err(Error::stage(format!("{what} corpus")))
        };
        let train = read(&p.train, Split::Train, "train")?;
        let tune = read(&p.tune, Split::Tune, "tune")?;
        let dev = read(&p.dev, Split::Dev, "dev")?;
        let test = read(&p.test, Split::Test, "test")?;
        let analyzer = p
            .analyzer
            .as_deref()
            .map(|a| load_analyzer(a, Some(&schema)).map_err(Error::stage("analyzer")))
            .transpose()?;
        let mut high_resource = Vec::new();
        for hr in &spec.high_resource {
            let s = schemas::resolve(&hr.schema)
                .map_err(Error::stage(format!("{} schema", hr.variant)))?;
            let c = read_corpus(&hr.train, &s, Split::Train)
                .map_err(Error::stage(format!("{} corpus", hr.variant)))?;
            high_resource.push((c, hr.variant.clone()));
        }
        let mut harmonization = load_harmonization(spec.harmonization.as_deref())
            .map_err(Error::stage("harmonization config"))?;
        if spec.harmonization.is_none() {
            harmonization.target_variant = spec.variant.clone();
        }
        let external_dev = p
            .external_distributions
            .as_deref()
            .map(|d| {
                load_external_distributions(d, &schema, &dev)
                    .map_err(Error::stage("external distributions"))
            })
            .transpose()?;
        Ok(ExperimentData {
            schema,
            train,
            tune,
            dev,
            test,
            analyzer,
            high_resource,
            harmonization,
            external_dev,
            categories: default_categories(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Training budget; absent for externally produced predictions.
    pub size: Option<usize>,
    pub split: Split,
    pub system: String,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub size: Option<usize>,
    pub split: Split,
    pub system: String,
    pub stats: ErrorStats,
}

/// Tokens resolved without an analyzer entry, overall and on the OOV slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackoffRow {
    pub size: Option<usize>,
    pub split: Split,
    pub system: String,
    pub tokens: usize,
    pub backoff_tokens: usize,
    pub oov_tokens: usize,
    pub oov_backoff_tokens: usize,
}

impl BackoffRow {
    fn new(
        size: Option<usize>,
        split: Split,
        system: &str,
        gold: &Corpus,
        records: &[Vec<Disambiguated>],
        oov_ref: &Corpus,
    ) -> Self {
        let seen = oov_ref.forms();
        let mut row = BackoffRow {
            size,
            split,
            system: system.into(),
            tokens: 0,
            backoff_tokens: 0,
            oov_tokens: 0,
            oov_backoff_tokens: 0,
        };
        for (tok, rec) in gold.tokens().zip(records.iter().flatten()) {
            let oov = !seen.contains(tok.raw.as_str());
            row.tokens += 1;
            row.oov_tokens += usize::from(oov);
            if rec.is_backoff() {
                row.backoff_tokens += 1;
                row.oov_backoff_tokens += usize::from(oov);
            }
        }
        row
    }

    pub fn share(&self) -> f64 {
        ratio(self.backoff_tokens, self.tokens)
    }

    pub fn oov_share(&self) -> f64 {
        ratio(self.oov_backoff_tokens, self.oov_tokens)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reports {
    pub rows: Vec<ReportRow>,
    pub errors: Vec<ErrorRow>,
    #[serde(default)]
    pub backoff: Vec<BackoffRow>,
    /// DEV learning curves, one per metric.
    pub curves: Vec<CurveTable>,
}

impl Reports {
    pub fn find(&self, size: Option<usize>, split: Split, system: &str, metric: &str, slice: Slice) -> Option<&EvalReport> {
        self.rows
            .iter()
            .find(|r| {
                r.size == size
                    && r.split == split
                    && r.system == system
                    && r.report.metric == metric
                    && r.report.slice == slice
            })
            .map(|r| &r.report)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.curves {
            out.push_str(&format!("DEV {} ({:?})\n", c.metric, c.slice));
            out.push_str(&c.render_text());
            out.push('\n');
        }
        for b in &self.backoff {
            out.push_str(&format!(
                "backoff {:?} {:?} {}: {:.2}% of tokens, {:.2}% of OOV tokens\n",
                b.size,
                b.split,
                b.system,
                100.0 * b.share(),
                100.0 * b.oov_share()
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct GridOutput {
    pub reports: Reports,
    /// Relative artifact path and model.
    pub models: Vec<(String, TaggerModel)>,
    /// Relative artifact path and predicted corpus.
    pub predictions: Vec<(String, Corpus)>,
}

fn kind_name(kind: TaggerKind) -> &'static str {
    match kind {
        TaggerKind::Factored => "factored",
        TaggerKind::Unfactored => "unfactored",
    }
}

fn subsets(schema: &FeatureSchema, variant: &str) -> Vec<Subset> {
    let mut out = vec![Subset::pos(), Subset::all_tags(schema)];
    let ten = Subset::all_tags_10();
    if ten.features.iter().all(|f| schema.has_feature(f)) {
        out.push(ten);
    }
    if let Ok(star) = Subset::all_tags_star(variant, schema) {
        if star.features.iter().all(|f| schema.has_feature(f)) {
            out.push(star);
        }
    }
    out
}

struct Evaluator<'a> {
    schema: &'a FeatureSchema,
    subsets: Vec<Subset>,
    /// OOV is measured against the target-variant training sample.
    oov_ref: &'a Corpus,
    categories: &'a CategoryMap,
}

impl Evaluator<'_> {
    #[allow(clippy::too_many_arguments)]
    fn evaluate(
        &self,
        size: Option<usize>,
        split: Split,
        system: &str,
        pred: &Corpus,
        gold: &Corpus,
        reports: &mut Reports,
        cells: &mut Vec<(String, CurveCell)>,
    ) -> Result<()> {
        for subset in &self.subsets {
            for slice in [Slice::All, Slice::Oov] {
                let report = accuracy(pred, gold, self.schema, subset, slice, Some(self.oov_ref))?;
                if split == Split::Dev && slice == Slice::All {
                    if let Some(size) = size {
                        cells.push((
                            subset.name.clone(),
                            CurveCell {
                                size,
                                system: system.into(),
                                report: report.clone(),
                                correct: token_correctness(pred, gold, self.schema, &subset.features)?,
                            },
                        ));
                    }
                }
                reports.rows.push(ReportRow {
                    size,
                    split,
                    system: system.into(),
                    report,
                });
            }
        }
        let all = Subset::all_tags(self.schema);
        reports.errors.push(ErrorRow {
            size,
            split,
            system: system.into(),
            stats: feature_error_stats(pred, gold, self.schema, &all, self.categories)?,
        });
        Ok(())
    }
}

/// Runs every training size of `spec` on already loaded data.
pub fn run_grid(spec: &ExperimentSpec, data: &ExperimentData) -> Result<GridOutput> {
    spec.validate()?;
    let variant = spec.variant.as_str();
    let harmonizer = match spec.strategy {
        Strategy::Single => None,
        _ => Some(
            Harmonizer::new(data.harmonization.clone(), &data.schema)
                .map_err(|e| Error::stage("harmonization")(e.into()))?,
        ),
    };
    let harmonize = |c: &Corpus| -> Result<Corpus> {
        match &harmonizer {
            Some(h) => Ok(h.harmonize_corpus(c, variant)?),
            None => Ok(c.clone()),
        }
    };
    let schema = harmonizer
        .as_ref()
        .map_or(&data.schema, |h| h.reduced_schema());
    let tune = harmonize(&data.tune).map_err(Error::stage("harmonizing tune"))?;
    let dev = harmonize(&data.dev).map_err(Error::stage("harmonizing dev"))?;
    let test = harmonize(&data.test).map_err(Error::stage("harmonizing test"))?;
    let analyzer = match (&data.analyzer, &harmonizer) {
        (Some(db), Some(h)) => Some(
            h.harmonize_analyzer(db, variant)
                .map_err(|e| Error::stage("harmonizing analyzer")(e.into()))?,
        ),
        (db, _) => db.clone(),
    };
    let high: Vec<(&Corpus, &str)> = data
        .high_resource
        .iter()
        .map(|(c, v)| (c, v.as_str()))
        .collect();

    let samples = sample_learning_curve(&data.train, &spec.sizes, spec.seed)
        .map_err(|e| Error::stage("sampling")(e.into()))?;
    let mut out = GridOutput {
        reports: Reports {
            rows: Vec::new(),
            errors: Vec::new(),
            backoff: Vec::new(),
            curves: Vec::new(),
        },
        models: Vec::new(),
        predictions: Vec::new(),
    };

    let stage1 = match (&harmonizer, spec.strategy) {
        (Some(h), Strategy::Continued) => {
            let (stage1, _) = h
                .build_stages(&high, (&samples[0], variant), spec.seed)
                .map_err(|e| Error::stage("building stage 1")(e.into()))?;
            let config = TrainConfig {
                epochs: spec.epochs,
                seed: spec.seed,
                source: format!(
                    "stage1:{}",
                    high.iter().map(|(_, v)| *v).collect::<Vec<_>>().join("+")
                ),
                ..TrainConfig::default()
            };
            let model = train(&stage1, schema, spec.kind, &config, Some(&tune))
                .map_err(|e| Error::stage("training stage 1")(e.into()))?;
            out.models.push((STAGE1_MODEL.into(), model.clone()));
            Some(model)
        }
        _ => None,
    };

    let system = kind_name(spec.kind);
    let morph_system = format!("{system}+morph");
    let mut cells: Vec<(String, CurveCell)> = Vec::new();
    for (size, sample) in spec.sizes.iter().copied().zip(&samples) {
        let stage = |what: &str| Error::stage(format!("size {size}: {what}"));
        let target = harmonize(sample).map_err(stage("harmonizing sample"))?;
        let train_set = match (&harmonizer, spec.strategy) {
            (Some(h), Strategy::Merged) => {
                let mut all = high.clone();
                all.push((sample, variant));
                h.build_merged(&all, spec.seed)
                    .map_err(|e| stage("merging")(e.into()))?
            }
            _ => target.clone(),
        };
        let config = TrainConfig {
            epochs: spec.epochs,
            seed: spec.seed,
            init: stage1.as_ref(),
            init_ref: stage1.as_ref().map(|_| STAGE1_MODEL.to_string()),
            source: format!("{variant}:{size}"),
            ..TrainConfig::default()
        };
        let model = train(&train_set, schema, spec.kind, &config, Some(&tune))
            .map_err(|e| stage("training")(e.into()))?;
        let unigrams = UnigramModel::from_corpus(&train_set, schema, DEFAULT_SMOOTHING)
            .map_err(|e| stage("unigrams")(e.into()))?;
        let evaluator = Evaluator {
            schema,
            subsets: subsets(schema, variant),
            oov_ref: &target,
            categories: &data.categories,
        };
        for (split, gold) in [(Split::Dev, &dev), (Split::Test, &test)] {
            let dists = model
                .predict_corpus(schema, gold, None)
                .map_err(|e| stage("predicting")(e.into()))?;
            let raw = tag_corpus(schema, gold, &dists).map_err(|e| stage("tagging")(e.into()))?;
            let mut systems = vec![(system.to_string(), raw)];
            if let Some(db) = &analyzer {
                let (morph, records) = disambiguate_corpus(
                    gold,
                    &dists,
                    db,
                    &unigrams,
                    schema,
                    &DisambiguationConfig::default(),
                )
                .map_err(|e| stage("disambiguating")(e.into()))?;
                out.reports.backoff.push(BackoffRow::new(
                    Some(size),
                    split,
                    &morph_system,
                    gold,
                    &records,
                    &target,
                ));
                systems.push((morph_system.clone(), morph));
            }
            for (name, pred) in systems {
                evaluator
                    .evaluate(Some(size), split, &name, &pred, gold, &mut out.reports, &mut cells)
                    .map_err(stage("evaluating"))?;
                out.predictions.push((
                    format!("predictions/{size}-{}-{name}.jsonl", split_name(split)),
                    pred,
                ));
            }
        }
        out.models.push((format!("models/{size}.json"), model));
    }

    if let Some(dists) = &data.external_dev {
        if harmonizer.is_some() {
            return Err(Error::Usage(
                "external distributions are only supported with the SINGLE strategy".into(),
            ));
        }
        let stage = Error::stage("external distributions");
        let evaluator = Evaluator {
            schema,
            subsets: subsets(schema, variant),
            oov_ref: samples.last().expect("at least one size"),
            categories: &data.categories,
        };
        let raw = tag_corpus(schema, &dev, dists).map_err(|e| stage(e.into()))?;
        let mut systems = vec![("external".to_string(), raw)];
        if let Some(db) = &analyzer {
            let unigrams = UnigramModel::from_corpus(&data.train, schema, DEFAULT_SMOOTHING)?;
            let (morph, records) = disambiguate_corpus(
                &dev,
                dists,
                db,
                &unigrams,
                schema,
                &DisambiguationConfig::default(),
            )?;
            out.reports.backoff.push(BackoffRow::new(
                None,
                Split::Dev,
                "external+morph",
                &dev,
                &records,
                evaluator.oov_ref,
            ));
            systems.push(("external+morph".into(), morph));
        }
        for (name, pred) in systems {
            evaluator.evaluate(None, Split::Dev, &name, &pred, &dev, &mut out.reports, &mut cells)?;
            out.predictions.push((format!("predictions/dev-{name}.jsonl"), pred));
        }
    }

    let mut metrics: Vec<String> = Vec::new();
    for (m, _) in &cells {
        if !metrics.contains(m) {
            metrics.push(m.clone());
        }
    }
    for m in metrics {
        let group: Vec<CurveCell> = cells
            .iter()
            .filter(|(n, _)| *n == m)
            .map(|(_, c)| c.clone())
            .collect();
        out.reports.curves.push(learning_curve_report(&group, spec.alpha)?);
    }
    Ok(out)
}

fn split_name(split: Split) -> &'static str {
    match split {
        Split::Train => "train",
        Split::Tune => "tune",
        Split::Dev => "dev",
        Split::Test => "test",
    }
}

/// Creates a fresh `run-<seconds>[-n]` directory under `out_dir`.
pub fn create_run_dir(out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    for n in 0.. {
        let name = if n == 0 {
            format!("run-{secs}")
        } else {
            format!("run-{secs}-{n}")
        };
        let dir = out_dir.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(source) => return Err(Error::Io { path: dir, source }),
        }
    }
    unreachable!("unbounded search")
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub dir: PathBuf,
    pub reports: Reports,
}

/// Loads the spec's inputs, runs the grid and writes every artifact to a new
/// run directory under `out_dir`.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunResult> {
    spec.validate()?;
    let data = ExperimentData::load(spec)?;
    let output = run_grid(spec, &data)?;
    let dir = create_run_dir(out_dir)?;
    save_json(&dir.join("spec.json"), spec)?;
    for (rel, model) in &output.models {
        save_json(&dir.join(rel), model)?;
    }
    for (rel, corpus) in &output.predictions {
        write_corpus(&dir.join(rel), corpus)?;
    }
    save_json(&dir.join("reports.json"), &output.reports)?;
    write_text(&dir.join("report.txt"), &output.reports.render_text())?;
    Ok(RunResult {
        dir,
        reports: output.reports,
    })
}
