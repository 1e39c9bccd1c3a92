use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use morphdis::analyzer_io::{load_analyzer, save_analyzer};
use morphdis::config::{load_categories, load_harmonization, parse_sizes};
use morphdis::corpus_io::{read_corpus, write_corpus};
use morphdis::dist_io::{load_external_distributions, write_distributions};
use morphdis::experiment::{run_experiment, ExperimentSpec};
use morphdis::{load_json, save_json, schemas, Error, Result};
use morphdis_core::corpus::{oov_vocabulary, sample_learning_curve};
use morphdis_core::disambiguator::{
    disambiguate_corpus, DisambiguationConfig, ProbabilitySource, DEFAULT_SMOOTHING,
};
use morphdis_core::eval::{
    accuracy, feature_error_stats, learning_curve_report, mcnemar, token_correctness, CurveCell,
    Slice, Subset,
};
use morphdis_core::harmonizer::Harmonizer;
use morphdis_core::synth::{generate_synthetic, SyntheticSpec};
use morphdis_core::tagger::{tag_corpus, train, TrainConfig};
use morphdis_core::{
    AnalyzerDb, BackoffPolicy, Corpus, FeatureSchema, Split, TaggerKind, TaggerModel,
    UnigramModel, DEFAULT_SEED,
};

#[derive(Parser)]
#[command(name = "morphdis", version, about = "Morphosyntactic tagging and analyzer-based disambiguation")]
struct Cli {
    /// Built-in schema (msa, glf, egy, lev) or schema file
    #[arg(long, global = true)]
    schema: Option<String>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate, sample and inspect corpora
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Build and query analyzer databases
    #[command(subcommand)]
    Analyzer(AnalyzerCmd),
    /// Train taggers and export distributions
    #[command(subcommand)]
    Tagger(TaggerCmd),
    /// Retag predictions with an analyzer
    Disambiguate(DisambiguateArgs),
    /// Harmonize, merge and stage corpora across variants
    #[command(subcommand)]
    Harmonize(HarmonizeCmd),
    /// Accuracy, error analysis and significance
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Run experiment specs
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Generate a synthetic corpus with an oracle analyzer
    Synth(SynthArgs),
}

#[derive(Subcommand)]
enum CorpusCmd {
    Validate {
        path: PathBuf,
    },
    /// Nested learning-curve samples, written as sample-<size>.jsonl
    Sample {
        path: PathBuf,
        #[arg(long)]
        sizes: String,
    },
    /// Forms of EVAL never seen in TRAIN, one per line
    Oov {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        eval: PathBuf,
    },
}

#[derive(Subcommand)]
enum AnalyzerCmd {
    /// Collect every gold analysis of each training form
    Compile {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "keep")]
        backoff: String,
    },
    Query {
        #[arg(long)]
        db: PathBuf,
        words: Vec<String>,
    },
    Stats {
        #[arg(long)]
        db: PathBuf,
    },
}

#[derive(Subcommand)]
enum TaggerCmd {
    Train {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        tune: Option<PathBuf>,
        #[arg(long, default_value = "factored")]
        kind: String,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        /// Model to continue training from
        #[arg(long)]
        init: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write per-token distributions in the interchange format
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Accuracy of the argmax predictions before any retagging
    EvalRaw {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        train: Option<PathBuf>,
    },
    /// Tag frequency model used for tie-breaking
    Unigrams {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct DisambiguateArgs {
    /// Tagger model; distributions are predicted on the fly
    #[arg(long, conflicts_with = "distributions")]
    model: Option<PathBuf>,
    /// Interchange file aligned with --in
    #[arg(long)]
    distributions: Option<PathBuf>,
    #[arg(long)]
    analyzer: PathBuf,
    #[arg(long)]
    unigrams: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Per-token audit log of the ranked candidates
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Take tie-break probabilities from the tagger instead of unigrams
    #[arg(long)]
    classifier_probabilities: bool,
}

#[derive(Args)]
struct HarmonizeOpts {
    /// Harmonization config; the bundled default when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target variant schema
    #[arg(long, default_value = "lev")]
    target: String,
}

#[derive(Subcommand)]
enum HarmonizeCmd {
    Apply {
        #[command(flatten)]
        opts: HarmonizeOpts,
        /// Source corpus as VARIANT=PATH (built-in schema of VARIANT)
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        out: PathBuf,
    },
    Merge {
        #[command(flatten)]
        opts: HarmonizeOpts,
        #[arg(long = "in", required = true)]
        inputs: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write stage1.jsonl (merged high-resource) and stage2.jsonl (target)
    Stage {
        #[command(flatten)]
        opts: HarmonizeOpts,
        #[arg(long, required = true)]
        high: Vec<String>,
        #[arg(long)]
        low: String,
    },
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    /// pos, all, all10 or all-star:<variant>
    #[arg(long, default_value = "all")]
    subset: String,
}

#[derive(Subcommand)]
enum EvalCmd {
    Accuracy {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value = "all")]
        slice: String,
        /// Training corpus defining the OOV slice
        #[arg(long)]
        train: Option<PathBuf>,
    },
    Errors {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        categories: Option<PathBuf>,
    },
    /// McNemar's test between two prediction files
    Significance {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred_a: PathBuf,
        #[arg(long)]
        pred_b: PathBuf,
        #[arg(long, default_value = "all")]
        subset: String,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Learning-curve table from SIZE,SYSTEM,PATH cells
    Curve {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long = "cell", required = true)]
        cells: Vec<String>,
        #[arg(long, default_value = "all")]
        subset: String,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    Run {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 5000)]
    vocab: usize,
    #[arg(long, default_value_t = 3.0)]
    ambiguity: f64,
    #[arg(long, default_value_t = 20_000)]
    budget: usize,
    #[arg(long, default_value_t = 10)]
    mean_len: usize,
    #[arg(long, default_value_t = 5)]
    spread: usize,
}

fn schema(cli: &Cli) -> Result<FeatureSchema> {
    let spec = cli
        .schema
        .as_deref()
        .ok_or_else(|| Error::Usage("--schema is required for this command".into()))?;
    schemas::resolve(spec)
}

fn println(text: impl AsRef<str>) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", text.as_ref()).map_err(|source| Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn slice(s: &str) -> Result<Slice> {
    s.parse().map_err(|e: morphdis_core::Error| Error::Usage(e.to_string()))
}

fn subset(s: &str, schema: &FeatureSchema) -> Result<Subset> {
    Subset::parse(s, schema).map_err(|e| Error::Usage(e.to_string()))
}

/// `VARIANT=PATH`, read under the built-in schema of VARIANT.
fn variant_corpus(arg: &str) -> Result<(Corpus, String)> {
    let (variant, path) = arg
        .split_once('=')
        .ok_or_else(|| Error::Usage(format!("expected VARIANT=PATH, got {arg:?}")))?;
    let schema = schemas::resolve(variant)?;
    Ok((read_corpus(Path::new(path), &schema, Split::Train)?, variant.into()))
}

fn harmonizer(opts: &HarmonizeOpts) -> Result<Harmonizer> {
    let target = schemas::resolve(&opts.target)?;
    let mut config = load_harmonization(opts.config.as_deref())?;
    if opts.config.is_none() {
        config.target_variant = target.variant().into();
    }
    Ok(Harmonizer::new(config, &target)?)
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Corpus(cmd) => {
            let schema = schema(&cli)?;
            match cmd {
                CorpusCmd::Validate { path } => {
                    let c = read_corpus(path, &schema, Split::Train)?;
                    println(format!(
                        "ok: {} sentences, {} tokens",
                        c.sentences.len(),
                        c.token_count()
                    ))
                }
                CorpusCmd::Sample { path, sizes } => {
                    let sizes = parse_sizes(sizes)?;
                    let c = read_corpus(path, &schema, Split::Train)?;
                    let samples = sample_learning_curve(&c, &sizes, cli.seed)?;
                    for (size, s) in sizes.iter().zip(&samples) {
                        let out = cli.out_dir.join(format!("sample-{size}.jsonl"));
                        write_corpus(&out, s)?;
                        println(format!("{}\t{}", out.display(), s.token_count()))?;
                    }
                    Ok(())
                }
                CorpusCmd::Oov { train, eval } => {
                    let t = read_corpus(train, &schema, Split::Train)?;
                    let e = read_corpus(eval, &schema, Split::Dev)?;
                    for form in oov_vocabulary(&t, &e) {
                        println(form)?;
                    }
                    Ok(())
                }
            }
        }
        Command::Analyzer(cmd) => match cmd {
            AnalyzerCmd::Compile {
                train,
                out,
                backoff,
            } => {
                let schema = schema(&cli)?;
                let backoff = match backoff.as_str() {
                    "keep" => BackoffPolicy::KeepPredictions,
                    "synthesize" => BackoffPolicy::SynthesizeFromPredictions,
                    b => return Err(Error::Usage(format!("unknown backoff {b:?}"))),
                };
                let c = read_corpus(train, &schema, Split::Train)?;
                let db = AnalyzerDb::compile(&c)?.with_backoff(backoff);
                save_analyzer(out, &db)?;
                println(format!("{} forms", db.len()))
            }
            AnalyzerCmd::Query { db, words } => {
                let db = load_analyzer(db, None)?;
                for w in words {
                    let found = db.analyze(w).analyses().unwrap_or(&[]);
                    println(format!(
                        "{}",
                        serde_json::json!({ "word": w, "analyses": found })
                    ))?;
                }
                Ok(())
            }
            AnalyzerCmd::Stats { db } => {
                let db = load_analyzer(db, None)?;
                let s = db.stats();
                println(json(&serde_json::json!({
                    "variant": db.variant(),
                    "provenance": db.provenance(),
                    "backoff": db.backoff(),
                    "forms": s.forms,
                    "analyses": s.analyses,
                    "max_per_form": s.max_per_form,
                    "mean_per_form": s.mean_per_form(),
                })))
            }
        },
        Command::Tagger(cmd) => {
            let schema = schema(&cli)?;
            match cmd {
                TaggerCmd::Train {
                    train: train_path,
                    tune,
                    kind,
                    epochs,
                    init,
                    out,
                } => {
                    let kind: TaggerKind = kind
                        .parse()
                        .map_err(|e: morphdis_core::Error| Error::Usage(e.to_string()))?;
                    let corpus = read_corpus(train_path, &schema, Split::Train)?;
                    let tune = tune
                        .as_deref()
                        .map(|t| read_corpus(t, &schema, Split::Tune))
                        .transpose()?;
                    let init_model: Option<TaggerModel> =
                        init.as_deref().map(load_json).transpose()?;
                    let config = TrainConfig {
                        epochs: *epochs,
                        seed: cli.seed,
                        init: init_model.as_ref(),
                        init_ref: init.as_ref().map(|p| p.display().to_string()),
                        source: train_path.display().to_string(),
                        ..TrainConfig::default()
                    };
                    let model = train(&corpus, &schema, kind, &config, tune.as_ref())?;
                    save_json(out, &model)?;
                    println(format!(
                        "selected epoch {} of {}",
                        model.meta.selected_epoch, model.meta.epochs
                    ))
                }
                TaggerCmd::Predict {
                    model,
                    input,
                    top_k,
                    out,
                } => {
                    let model: TaggerModel = load_json(model)?;
                    let corpus = read_corpus(input, &schema, Split::Dev)?;
                    let dists = model.predict_corpus(&schema, &corpus, *top_k)?;
                    write_distributions(out, &corpus, &dists)
                }
                TaggerCmd::EvalRaw {
                    model,
                    input,
                    train: train_ref,
                } => {
                    let model: TaggerModel = load_json(model)?;
                    let gold = read_corpus(input, &schema, Split::Dev)?;
                    let train_ref = train_ref
                        .as_deref()
                        .map(|t| read_corpus(t, &schema, Split::Train))
                        .transpose()?;
                    let dists = model.predict_corpus(&schema, &gold, None)?;
                    let pred = tag_corpus(&schema, &gold, &dists)?;
                    let mut reports = Vec::new();
                    for s in [Subset::pos(), Subset::all_tags(&schema)] {
                        reports.push(accuracy(&pred, &gold, &schema, &s, Slice::All, None)?);
                        if let Some(t) = &train_ref {
                            reports.push(accuracy(&pred, &gold, &schema, &s, Slice::Oov, Some(t))?);
                        }
                    }
                    println(json(&reports))
                }
                TaggerCmd::Unigrams { train, out } => {
                    let c = read_corpus(train, &schema, Split::Train)?;
                    save_json(out, &UnigramModel::from_corpus(&c, &schema, DEFAULT_SMOOTHING)?)
                }
            }
        }
        Command::Disambiguate(args) => {
            let schema = schema(&cli)?;
            let corpus = read_corpus(&args.input, &schema, Split::Dev)?;
            let dists = match (&args.model, &args.distributions) {
                (Some(m), None) => {
                    let model: TaggerModel = load_json(m)?;
                    model.predict_corpus(&schema, &corpus, None)?
                }
                (None, Some(d)) => load_external_distributions(d, &schema, &corpus)?,
                _ => {
                    return Err(Error::Usage(
                        "give exactly one of --model and --distributions".into(),
                    ))
                }
            };
            let db = load_analyzer(&args.analyzer, Some(&schema))?;
            let unigrams: UnigramModel = load_json(&args.unigrams)?;
            let mut config = DisambiguationConfig {
                trace: args.trace.is_some(),
                ..DisambiguationConfig::default()
            };
            if args.classifier_probabilities {
                config.tie_break.source = ProbabilitySource::Classifier;
            }
            let (out, records) = disambiguate_corpus(&corpus, &dists, &db, &unigrams, &schema, &config)?;
            write_corpus(&args.out, &out)?;
            if let Some(trace) = &args.trace {
                let mut text = String::new();
                for (s, recs) in corpus.sentences.iter().zip(&records) {
                    for (i, r) in recs.iter().enumerate() {
                        let line = serde_json::json!({
                            "sentence": s.id,
                            "token": i,
                            "raw": s.tokens[i].raw,
                            "resolution": r.resolution,
                            "prediction": r.prediction,
                            "candidates": r.candidates.iter().map(|c| serde_json::json!({
                                "analysis": c.analysis,
                                "match_count": c.match_count,
                                "tie_score": c.tie_score,
                                "rank": c.final_rank,
                            })).collect::<Vec<_>>(),
                        });
                        text.push_str(&line.to_string());
                        text.push('\n');
                    }
                }
                std::fs::write(trace, text).map_err(|source| Error::Io {
                    path: trace.clone(),
                    source,
                })?;
            }
            let backoff = records.iter().flatten().filter(|r| r.is_backoff()).count();
            println(format!(
                "{} tokens, {} without analyzer entry",
                out.token_count(),
                backoff
            ))
        }
        Command::Harmonize(cmd) => match cmd {
            HarmonizeCmd::Apply { opts, input, out } => {
                let h = harmonizer(opts)?;
                let (c, variant) = variant_corpus(input)?;
                write_corpus(out, &h.harmonize_corpus(&c, &variant)?)
            }
            HarmonizeCmd::Merge { opts, inputs, out } => {
                let h = harmonizer(opts)?;
                let loaded = inputs
                    .iter()
                    .map(|i| variant_corpus(i))
                    .collect::<Result<Vec<_>>>()?;
                let refs: Vec<(&Corpus, &str)> =
                    loaded.iter().map(|(c, v)| (c, v.as_str())).collect();
                write_corpus(out, &h.build_merged(&refs, cli.seed)?)
            }
            HarmonizeCmd::Stage { opts, high, low } => {
                let h = harmonizer(opts)?;
                let high = high
                    .iter()
                    .map(|i| variant_corpus(i))
                    .collect::<Result<Vec<_>>>()?;
                let refs: Vec<(&Corpus, &str)> =
                    high.iter().map(|(c, v)| (c, v.as_str())).collect();
                let (lc, lv) = variant_corpus(low)?;
                let (s1, s2) = h.build_stages(&refs, (&lc, &lv), cli.seed)?;
                write_corpus(&cli.out_dir.join("stage1.jsonl"), &s1)?;
                write_corpus(&cli.out_dir.join("stage2.jsonl"), &s2)?;
                std::fs::write(
                    cli.out_dir.join("harmonized-schema.json"),
                    json(h.reduced_schema()),
                )
                .map_err(|source| Error::Io {
                    path: cli.out_dir.join("harmonized-schema.json"),
                    source,
                })
            }
        },
        Command::Eval(cmd) => {
            let schema = schema(&cli)?;
            match cmd {
                EvalCmd::Accuracy {
                    pair,
                    slice: sl,
                    train,
                } => {
                    let pred = read_corpus(&pair.pred, &schema, Split::Dev)?;
                    let gold = read_corpus(&pair.gold, &schema, Split::Dev)?;
                    let train = train
                        .as_deref()
                        .map(|t| read_corpus(t, &schema, Split::Train))
                        .transpose()?;
                    let sl = slice(sl)?;
                    if sl == Slice::Oov && train.is_none() {
                        return Err(Error::Usage("--slice oov needs --train".into()));
                    }
                    let r = accuracy(&pred, &gold, &schema, &subset(&pair.subset, &schema)?, sl, train.as_ref())?;
                    println(json(&r))
                }
                EvalCmd::Errors { pair, categories } => {
                    let pred = read_corpus(&pair.pred, &schema, Split::Dev)?;
                    let gold = read_corpus(&pair.gold, &schema, Split::Dev)?;
                    let cats = load_categories(categories.as_deref())?;
                    let s = feature_error_stats(&pred, &gold, &schema, &subset(&pair.subset, &schema)?, &cats)?;
                    println(json(&s))
                }
                EvalCmd::Significance {
                    gold,
                    pred_a,
                    pred_b,
                    subset: sub,
                    alpha,
                } => {
                    let gold = read_corpus(gold, &schema, Split::Dev)?;
                    let sub = subset(sub, &schema)?;
                    let a = read_corpus(pred_a, &schema, Split::Dev)?;
                    let b = read_corpus(pred_b, &schema, Split::Dev)?;
                    let ca = token_correctness(&a, &gold, &schema, &sub.features)?;
                    let cb = token_correctness(&b, &gold, &schema, &sub.features)?;
                    println(json(&mcnemar(&ca, &cb, *alpha)?))
                }
                EvalCmd::Curve {
                    gold,
                    cells,
                    subset: sub,
                    alpha,
                } => {
                    let gold = read_corpus(gold, &schema, Split::Dev)?;
                    let sub = subset(sub, &schema)?;
                    let mut out = Vec::new();
                    for cell in cells {
                        let parts: Vec<&str> = cell.splitn(3, ',').collect();
                        let [size, system, path] = parts[..] else {
                            return Err(Error::Usage(format!(
                                "expected SIZE,SYSTEM,PATH, got {cell:?}"
                            )));
                        };
                        let size: usize = size
                            .parse()
                            .map_err(|_| Error::Usage(format!("bad size in {cell:?}")))?;
                        let pred = read_corpus(Path::new(path), &schema, Split::Dev)?;
                        out.push(CurveCell {
                            size,
                            system: system.into(),
                            report: accuracy(&pred, &gold, &schema, &sub, Slice::All, None)?,
                            correct: token_correctness(&pred, &gold, &schema, &sub.features)?,
                        });
                    }
                    let table = learning_curve_report(&out, *alpha)?;
                    println(table.render_text())
                }
            }
        }
        Command::Experiment(ExperimentCmd::Run { spec }) => {
            let spec: ExperimentSpec = load_json(spec)?;
            let result = run_experiment(&spec, &cli.out_dir)?;
            println(result.dir.display().to_string())
        }
        Command::Synth(args) => {
            let schema = schema(&cli)?;
            let spec = SyntheticSpec {
                vocab_size: args.vocab,
                ambiguity_rate: args.ambiguity,
                mean_sentence_len: args.mean_len,
                sentence_len_spread: args.spread,
                token_budget: args.budget,
                seed: cli.seed,
                ..SyntheticSpec::default()
            };
            spec.validate().map_err(|e| Error::Usage(e.to_string()))?;
            let data = generate_synthetic(&spec, &schema)?;
            let dir = &cli.out_dir;
            for (name, c) in [
                ("train", &data.train),
                ("tune", &data.tune),
                ("dev", &data.dev),
                ("test", &data.test),
            ] {
                write_corpus(&dir.join(format!("{name}.jsonl")), c)?;
            }
            save_analyzer(&dir.join("analyzer.db"), &data.analyzer)?;
            save_json(&dir.join("synth.json"), &spec)?;
            println(format!(
                "{} train / {} tune / {} dev / {} test tokens, {} forms",
                data.train.token_count(),
                data.tune.token_count(),
                data.dev.token_count(),
                data.test.token_count(),
                data.analyzer.len()
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(3),
    }
}
