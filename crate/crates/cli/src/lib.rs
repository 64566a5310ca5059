//! The `botscope` command line.
//!
//! Every subcommand reads and writes plain files (JSON, JSON-lines, CSV), so a
//! full run is a chain of invocations:
//!
//! ```text
//! botscope datasets synth --out corpus
//! botscope train --data corpus --out model.json
//! botscope calibrate --model model.json --data calib --out calibration.json
//! botscope score --model model.json --calibration calibration.json --input payloads.jsonl --out scores.jsonl
//! botscope analyze casestudy --groups shib.jsonl,floki.jsonl --scores scores.jsonl --out analysis
//! ```
//!
//! All randomness flows from `--seed` (default 42). The resolved settings of
//! every run are printed to stderr as one JSON line.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use botscope::analysis::{self, SeriesStore, Unit};
use botscope::casestudy::{generate_case_study, CaseStudySpec};
use botscope::corpus::{
    load_dataset, read_jsonl, read_payloads, save_dataset, synthesize_corpus, write_jsonl,
    CorpusSpec, Label, LabeledDataset, TweetRecord,
};
use botscope::ensemble::{train_esc, Calibration, EscModel, ScoreReport, DEFAULT_PRIOR};
use botscope::features::default_registry;
use botscope::forest::{cross_validate, ForestParams};
use botscope::lite::{select_training_sets, SelectionWeights};
use botscope_service::{ServiceConfig, ServiceError, SystemClock};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] botscope::Error),
    #[error(transparent)]
    Service(#[from] ServiceError),
}

impl CliError {
    /// 1 for file system trouble, 2 for bad invocations, 3 for invalid data,
    /// 4 for artifacts from mismatched versions.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Core(botscope::Error::Io { .. }) => 1,
            CliError::Core(botscope::Error::VersionMismatch { .. }) => 4,
            CliError::Core(_) | CliError::Service(_) => 3,
        }
    }

    pub fn category(&self) -> &'static str {
        match self.exit_code() {
            1 => "io",
            2 => "usage",
            4 => "version",
            _ => "data",
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "botscope",
    version,
    about = "Social bot detection: train, score, serve and analyze"
)]
struct Cli {
    /// TOML file with defaults for seed, trees, max_depth, folds, prior, thresholds and weights.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice (default 42).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trees per forest (default 100).
    #[arg(long, global = true)]
    trees: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
enum Command {
    /// Generate, inspect or export datasets.
    #[command(subcommand)]
    Datasets(DatasetsCmd),
    /// Train the ensemble on one or more labeled dataset directories.
    Train(TrainArgs),
    /// Fit CAP tables for a trained model on labeled data.
    Calibrate(CalibrateArgs),
    /// Choose training sets for the metadata-only model and train it.
    SelectLite(SelectLiteArgs),
    /// Score account payloads.
    Score(ScoreArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Case-study statistics and threshold validation.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Score payloads and append the results to per-account time series.
    Probe(ProbeArgs),
}

#[derive(Debug, Subcommand, Serialize)]
enum DatasetsCmd {
    /// Synthesize a labeled corpus into a directory.
    Synth(SynthArgs),
    /// Load and validate a dataset directory, printing a summary.
    Load(LoadArgs),
    /// Generate the cashtag case-study groups.
    Casestudy(CasestudyArgs),
}

#[derive(Debug, Args, Serialize)]
struct SynthArgs {
    /// Corpus TOML; the shipped fixture when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct LoadArgs {
    #[arg(long)]
    dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct CasestudyArgs {
    /// Case-study TOML; the shipped three-group fixture when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Corpus TOML supplying archetype parameters.
    #[arg(long)]
    corpus_spec: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct TrainArgs {
    #[arg(long, required = true, value_delimiter = ',')]
    data: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Also write a cross-validation report for a single pooled forest.
    #[arg(long)]
    cv_report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CalibrateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, required = true, value_delimiter = ',')]
    data: Vec<PathBuf>,
    /// Assumed bot prevalence (default 0.15).
    #[arg(long)]
    prior: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SelectLiteArgs {
    #[arg(long, required = true, value_delimiter = ',')]
    candidates: Vec<PathBuf>,
    #[arg(long)]
    holdout: PathBuf,
    /// Trained ensemble whose scores the lite model should agree with.
    #[arg(long)]
    reference: PathBuf,
    /// Weights for cv accuracy, holdout AUC and consistency (default 1,1,1).
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
    /// CSV with one row per evaluated subset.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ScoreArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// JSON-lines of account payloads.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ServeArgs {
    /// Service TOML; `BOTSCOPE_*` environment variables override it.
    #[arg(long)]
    service_config: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
enum AnalyzeCmd {
    /// Compare cashtag groups: sample counts, threshold sweeps, distributions.
    Casestudy(AnalyzeCaseArgs),
    /// Accuracy, precision, recall and F1 of scores against labels.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum UnitArg {
    Tweet,
    Account,
}

#[derive(Debug, Args, Serialize)]
struct AnalyzeCaseArgs {
    /// Tweet JSON-lines files, one per group; the group is named after the file.
    #[arg(long, required = true, value_delimiter = ',')]
    groups: Vec<PathBuf>,
    /// Score reports covering every author.
    #[arg(long)]
    scores: PathBuf,
    /// Thresholds for the sweep (default 0.5,0.7).
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    /// Keep accounts whose tweets are mostly in this language.
    #[arg(long, default_value = "en")]
    language: String,
    /// Skip the language filter.
    #[arg(long)]
    all_languages: bool,
    #[arg(long, value_enum, default_value = "tweet")]
    unit: UnitArg,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ValidateArgs {
    #[arg(long)]
    scores: PathBuf,
    /// Dataset directory holding the labels.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ProbeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Series store (JSON-lines), created when missing.
    #[arg(long)]
    store: PathBuf,
}

/// Defaults read from `--config`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDefaults {
    seed: Option<u64>,
    trees: Option<usize>,
    max_depth: Option<usize>,
    folds: Option<usize>,
    prior: Option<f64>,
    thresholds: Option<Vec<f64>>,
    weights: Option<Vec<f64>>,
}

/// Settings after applying flags over the config file over built-in defaults.
#[derive(Debug, Clone, Serialize)]
struct Resolved {
    seed: u64,
    forest: ForestParams,
    folds: usize,
    prior: f64,
    thresholds: Vec<f64>,
    weights: [f64; 3],
}

fn resolve(cli: &Cli) -> Result<Resolved> {
    let file: FileDefaults = match &cli.config {
        Some(path) => toml::from_str(&read_text(path)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        None => FileDefaults::default(),
    };
    let forest_default = ForestParams::default();
    let flag_prior = match &cli.command {
        Command::Calibrate(a) => a.prior,
        _ => None,
    };
    let flag_thresholds = match &cli.command {
        Command::Analyze(AnalyzeCmd::Casestudy(a)) => a.thresholds.clone(),
        Command::Analyze(AnalyzeCmd::Validate(a)) => a.thresholds.clone(),
        _ => None,
    };
    let flag_weights = match &cli.command {
        Command::SelectLite(a) => a.weights.clone(),
        _ => None,
    };
    let weights = flag_weights
        .or(file.weights)
        .unwrap_or_else(|| SelectionWeights::default().0.to_vec());
    let weights: [f64; 3] = weights
        .try_into()
        .map_err(|w: Vec<f64>| CliError::Usage(format!("expected 3 weights, got {}", w.len())))?;
    let prior = flag_prior.or(file.prior).unwrap_or(DEFAULT_PRIOR);
    if !(prior > 0.0 && prior < 1.0) {
        return Err(CliError::Usage(format!(
            "prior {prior} must lie strictly between 0 and 1"
        )));
    }
    Ok(Resolved {
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        forest: ForestParams {
            n_trees: cli.trees.or(file.trees).unwrap_or(forest_default.n_trees),
            max_depth: file.max_depth.unwrap_or(forest_default.max_depth),
            ..forest_default
        },
        folds: file.folds.unwrap_or(5),
        prior,
        thresholds: flag_thresholds
            .or(file.thresholds)
            .unwrap_or_else(|| analysis::DEFAULT_THRESHOLDS.to_vec()),
        weights,
    })
}

/// Parses `argv` (including the program name) and runs it. Returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error ({}): {e}", e.category());
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let settings = resolve(cli)?;
    eprintln!(
        "{}",
        json!({ "command": cli.command, "config": cli.config, "resolved": settings })
    );
    match &cli.command {
        Command::Datasets(DatasetsCmd::Synth(a)) => synth(a, &settings),
        Command::Datasets(DatasetsCmd::Load(a)) => load(a),
        Command::Datasets(DatasetsCmd::Casestudy(a)) => casestudy(a, &settings),
        Command::Train(a) => train(a, &settings),
        Command::Calibrate(a) => calibrate(a, &settings),
        Command::SelectLite(a) => select_lite(a, &settings),
        Command::Score(a) => score(a),
        Command::Serve(a) => serve(a),
        Command::Analyze(AnalyzeCmd::Casestudy(a)) => analyze_casestudy(a, &settings),
        Command::Analyze(AnalyzeCmd::Validate(a)) => analyze_validate(a, &settings),
        Command::Probe(a) => probe(a),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("outputs serialize");
    text.push('\n');
    write_text(path, &text)
}

fn dataset_name(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

fn load_all(dirs: &[PathBuf]) -> Result<Vec<LabeledDataset>> {
    dirs.iter()
        .map(|d| Ok(load_dataset(d, &dataset_name(d))?))
        .collect()
}

fn load_model(path: &Path) -> Result<EscModel> {
    Ok(EscModel::from_json(&read_text(path)?)?)
}

fn corpus_spec(path: Option<&Path>) -> Result<CorpusSpec> {
    match path {
        Some(p) => Ok(CorpusSpec::from_toml_str(&read_text(p)?)?),
        None => Ok(CorpusSpec::fixture()),
    }
}

fn summary(ds: &LabeledDataset) -> serde_json::Value {
    let mut classes: BTreeMap<String, usize> = BTreeMap::new();
    for r in ds.records() {
        if let Some(c) = r.effective_class() {
            *classes.entry(c.to_string()).or_default() += 1;
        }
    }
    json!({ "name": ds.name(), "accounts": ds.len(), "bots": ds.bots(), "humans": ds.humans(), "bot_classes": classes })
}

fn synth(a: &SynthArgs, s: &Resolved) -> Result<()> {
    let spec = corpus_spec(a.spec.as_deref())?;
    let ds = synthesize_corpus(&spec, s.seed)?;
    save_dataset(&ds, &a.out)?;
    println!("{}", summary(&ds));
    Ok(())
}

fn load(a: &LoadArgs) -> Result<()> {
    let ds = load_dataset(&a.dir, &dataset_name(&a.dir))?;
    println!("{}", summary(&ds));
    Ok(())
}

fn casestudy(a: &CasestudyArgs, s: &Resolved) -> Result<()> {
    let spec = match &a.spec {
        Some(p) => CaseStudySpec::from_toml_str(&read_text(p)?)?,
        None => CaseStudySpec::fixture(),
    };
    let corpus = corpus_spec(a.corpus_spec.as_deref())?;
    let groups = generate_case_study(&spec, &corpus, s.seed)?;
    std::fs::create_dir_all(&a.out).map_err(|source| CliError::Io {
        path: a.out.clone(),
        source,
    })?;
    for g in &groups {
        let tag = g.cashtag.to_lowercase();
        write_jsonl(&a.out.join(format!("{tag}.jsonl")), &g.tweets)?;
        let authors = LabeledDataset::new(format!("{tag}-accounts"), g.accounts.clone())?;
        save_dataset(&authors, &a.out.join(format!("{tag}-accounts")))?;
        println!("{}", json!({ "group": g.cashtag, "expected": g.expected }));
    }
    Ok(())
}

fn train(a: &TrainArgs, s: &Resolved) -> Result<()> {
    let datasets = load_all(&a.data)?;
    let registry = default_registry();
    let model = train_esc(&datasets, &registry, &s.forest, s.seed)?;
    write_text(&a.out, &(model.to_json() + "\n"))?;
    if let Some(path) = &a.cv_report {
        let records: Vec<_> = datasets.iter().flat_map(|d| d.records()).collect();
        let vectors = botscope::ensemble::extract_records(&records, &registry)?;
        let rows: Vec<_> = vectors
            .into_iter()
            .zip(records.iter().map(|r| r.label))
            .collect();
        let report = cross_validate(&rows, &s.forest, s.folds, s.seed)?;
        write_json(path, &report)?;
        println!(
            "{}",
            json!({ "cv_auc": report.auc, "folds": report.n_folds })
        );
    }
    println!(
        "{}",
        json!({ "model_version": model.model_version, "classes": model.class_list })
    );
    Ok(())
}

fn calibrate(a: &CalibrateArgs, s: &Resolved) -> Result<()> {
    let model = load_model(&a.model)?;
    let datasets = load_all(&a.data)?;
    let calibration = Calibration::fit(&model, &datasets, s.prior)?;
    write_text(&a.out, &(calibration.to_json() + "\n"))?;
    println!(
        "{}",
        json!({ "calibration_version": calibration.version, "model_version": model.model_version })
    );
    Ok(())
}

fn select_lite(a: &SelectLiteArgs, s: &Resolved) -> Result<()> {
    let candidates = load_all(&a.candidates)?;
    let holdout = load_dataset(&a.holdout, &dataset_name(&a.holdout))?;
    let reference = load_model(&a.reference)?;
    let model = select_training_sets(
        &candidates,
        &holdout,
        &reference,
        SelectionWeights(s.weights),
        &default_registry(),
        &s.forest,
        s.seed,
    )?;
    write_text(&a.out, &(model.to_json() + "\n"))?;
    if let Some(report) = &a.report {
        write_text(report, &model.selection_csv())?;
    }
    println!(
        "{}",
        json!({ "lite_model_version": model.model_version, "selected": model.selected_datasets })
    );
    Ok(())
}

fn score(a: &ScoreArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let calibration = match &a.calibration {
        Some(p) => {
            let c = Calibration::from_json(&read_text(p)?)?;
            c.check_model(&model)?;
            Some(c)
        }
        None => None,
    };
    let payloads = read_payloads(&a.input)?;
    let reports = payloads
        .iter()
        .map(|p| {
            p.validate()?;
            let r = model.score_account(p)?;
            match &calibration {
                Some(c) => r.calibrate(c),
                None => Ok(r),
            }
        })
        .collect::<botscope::Result<Vec<_>>>()?;
    write_jsonl(&a.out, &reports)?;
    println!(
        "{}",
        json!({ "scored": reports.len(), "model_version": model.model_version })
    );
    Ok(())
}

fn serve(a: &ServeArgs) -> Result<()> {
    let config = match &a.service_config {
        Some(p) => ServiceConfig::load(p)?,
        None => ServiceConfig::default(),
    }
    .with_env(std::env::vars())?;
    eprintln!("{}", json!({ "service": config }));
    let state = Arc::new(botscope_service::state_from_config(&config, SystemClock)?);
    let runtime = tokio::runtime::Runtime::new().map_err(|source| CliError::Io {
        path: PathBuf::from("<runtime>"),
        source,
    })?;
    runtime.block_on(botscope_service::serve(state, &config.bind))?;
    Ok(())
}

/// Reads score reports and insists they all come from one model.
fn read_scores(path: &Path) -> Result<(HashMap<String, ScoreReport>, String)> {
    let reports: Vec<ScoreReport> = read_jsonl(path)?;
    let versions: BTreeSet<&str> = reports.iter().map(|r| r.model_version.as_str()).collect();
    if versions.len() > 1 {
        let mut it = versions.iter();
        return Err(botscope::Error::VersionMismatch {
            expected: it.next().unwrap().to_string(),
            found: it.next().unwrap().to_string(),
        }
        .into());
    }
    let version = versions.into_iter().next().unwrap_or_default().to_string();
    Ok((
        reports
            .into_iter()
            .map(|r| (r.user.user_id.clone(), r))
            .collect(),
        version,
    ))
}

fn analyze_casestudy(a: &AnalyzeCaseArgs, s: &Resolved) -> Result<()> {
    let (scores, model_version) = read_scores(&a.scores)?;
    let language = (!a.all_languages).then_some(a.language.as_str());
    let unit = match a.unit {
        UnitArg::Tweet => Unit::Tweet,
        UnitArg::Account => Unit::Account,
    };
    let mut samples = Vec::new();
    let mut profiles = BTreeMap::new();
    for path in &a.groups {
        let name = path
            .file_stem()
            .map(|n| n.to_string_lossy().to_uppercase())
            .unwrap_or_default();
        let tweets: Vec<TweetRecord> = read_jsonl(path)?;
        profiles.insert(name.clone(), analysis::language_profile(&tweets));
        samples.push(analysis::build_sample(&name, &tweets, &scores, language)?);
    }
    let counts: Vec<_> = samples
        .iter()
        .map(|s| json!({ "group": s.group_name, "counts": s.counts() }))
        .collect();
    let sweep = analysis::threshold_sweep(&samples, &s.thresholds, unit)?;
    let plot = analysis::plot_data(&samples, a.bins, unit)?;

    std::fs::create_dir_all(&a.out).map_err(|source| CliError::Io {
        path: a.out.clone(),
        source,
    })?;
    analysis::write_samples(&a.out.join("samples.jsonl"), &samples)?;
    write_json(
        &a.out.join("counts.json"),
        &json!({ "model_version": model_version, "language": language, "groups": counts, "language_profiles": profiles }),
    )?;
    write_json(
        &a.out.join("thresholds.json"),
        &json!({ "model_version": model_version, "reports": sweep }),
    )?;
    write_text(&a.out.join("thresholds.csv"), &analysis::sweep_csv(&sweep)?)?;
    write_json(
        &a.out.join("distributions.json"),
        &json!({ "model_version": model_version, "plot": plot }),
    )?;
    for c in counts {
        println!("{c}");
    }
    Ok(())
}

fn analyze_validate(a: &ValidateArgs, s: &Resolved) -> Result<()> {
    let (scores, model_version) = read_scores(&a.scores)?;
    let ds = load_dataset(&a.data, &dataset_name(&a.data))?;
    let labeled = ds
        .records()
        .iter()
        .map(|r| {
            scores
                .get(r.user_id())
                .map(|rep| (rep.raw_overall(), r.label))
                .ok_or_else(|| botscope::Error::MissingScore(r.user_id().to_string()))
        })
        .collect::<botscope::Result<Vec<(f64, Label)>>>()?;
    let rows = analysis::threshold_validation(&labeled, &s.thresholds)?;
    write_json(
        &a.out,
        &json!({ "model_version": model_version, "rows": rows }),
    )?;
    for r in &rows {
        println!("{}", json!(r));
    }
    Ok(())
}

fn probe(a: &ProbeArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let mut store = SeriesStore::open(&a.store)?;
    for p in read_payloads(&a.input)? {
        p.validate()?;
        let report = model.score_account(&p)?;
        let series = store.record_probe(
            &p.user.user_id,
            p.probe_time,
            report.raw_overall(),
            &model.model_version,
        )?;
        println!(
            "{}",
            json!({ "user_id": series.user_id, "points": series.len(), "raw_score": report.raw_overall() })
        );
    }
    Ok(())
}
