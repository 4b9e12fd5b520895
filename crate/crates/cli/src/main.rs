//! `mlp`: featurize, cluster and grade open-response math solutions.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 malformed input, 3 model failure.

mod config;
mod error;

use std::collections::BTreeMap;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mlp_core::eval::{run_experiment, synth_generate, EvalMethod, ExperimentConfig, SyntheticSpec};
use mlp_core::expr::{canonical_key, feature_key, tokenize_solution};
use mlp_core::io::{import_csv, load_dataset, load_json, to_json_bytes, write_atomic, DatasetFile};
use mlp_core::{analyze_with_progress, prepare, Analysis, AnalysisParams, Method, Prepared, SimplificationLevel};

use config::Config;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "mlp", version, about = "Cluster and grade open-response math solutions")]
struct Cli {
    /// TOML file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split solution texts into expressions and print their canonical keys.
    Parse {
        texts: Vec<String>,
        /// arithmetic_only or full
        #[arg(long)]
        level: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the vocabulary and each solution's expression keys.
    Featurize {
        #[command(flatten)]
        input: Input,
    },
    /// Cluster solutions and choose representatives; writes the analysis.
    Cluster {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// List the representatives the instructor has to grade.
    Reps {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Propagate representative grades to every solution.
    Grade {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        model: ModelArgs,
        /// JSON object mapping representative ids to grades.
        #[arg(long)]
        grades: Option<PathBuf>,
    },
    /// Expected grade after each expression of one solution (MLP-B only).
    Feedback {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        grades: Option<PathBuf>,
        #[arg(long)]
        solution: Option<String>,
        /// Alert when the expected grade drops below g_max - epsilon.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// MAE of each method against ground-truth grades.
    Eval(EvalArgs),
    /// Similarity graph with clusters and representatives.
    ExportGraph {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        model: ModelArgs,
        /// Keep edges with similarity at or above this value, in (0, 1].
        #[arg(long)]
        threshold: Option<f64>,
        /// Label nodes with propagated grades instead of dataset grades.
        #[arg(long)]
        grades: Option<PathBuf>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        host: Option<String>,
        #[arg(long)]
        port: Option<u16>,
    },
}

#[derive(Debug, Args)]
struct Input {
    /// Dataset JSON, or CSV with columns id,body[,grade].
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Write here (atomically) instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Analysis written by `mlp cluster`; skips re-clustering.
    #[arg(long)]
    analysis: Option<PathBuf>,
    /// sc, ap or bayes
    #[arg(long)]
    method: Option<String>,
    /// Cluster count (spectral clustering).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Gibbs sweeps (MLP-B).
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    input: Input,
    /// Evaluate on a planted-cluster corpus instead of --dataset.
    #[arg(long)]
    synthetic: bool,
    /// Comma-separated: rs, sc, ap, bayes.
    #[arg(long)]
    methods: Option<String>,
    /// Cluster counts for RS and spectral clustering, as A..B.
    #[arg(long)]
    k_range: Option<String>,
    /// Comma-separated seeds.
    #[arg(long)]
    seeds: Option<String>,
    /// Random sub-sampling trials per cell.
    #[arg(long)]
    rs_trials: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Record wall-clock time per cell (reports stop being reproducible).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    v: Option<usize>,
    #[arg(long)]
    k_star: Option<usize>,
    #[arg(long)]
    overlap: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    synth_seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Parse { texts, level, output } => {
            let level = parse_level(level.or(cfg.level.clone()))?;
            emit(output.or(cfg.output.clone()).as_deref(), &to_json_bytes(&parse_texts(&texts, level)?))
        }
        Command::Featurize { input } => {
            let (ds, filtered) = load(&input, &cfg)?;
            let prep = prepare(&ds)?;
            emit(output(&input, &cfg), &to_json_bytes(&Featurized::new(&ds, filtered, &prep)))
        }
        Command::Cluster { input, model } => {
            let (ds, _) = load(&input, &cfg)?;
            let prep = prepare(&ds)?;
            let analysis = obtain_analysis(&prep, &model, &cfg)?;
            emit(output(&input, &cfg), &to_json_bytes(&analysis))
        }
        Command::Reps { input, model } => {
            let (ds, _) = load(&input, &cfg)?;
            let prep = prepare(&ds)?;
            let analysis = obtain_analysis(&prep, &model, &cfg)?;
            emit(output(&input, &cfg), &to_json_bytes(&analysis.representative_entries(&ds)))
        }
        Command::Grade { input, model, grades } => {
            let (ds, _) = load(&input, &cfg)?;
            let prep = prepare(&ds)?;
            let analysis = obtain_analysis(&prep, &model, &cfg)?;
            let by_id = load_grades(grades.or(cfg.grades.clone()))?;
            let report = analysis.grade(&prep, &by_id)?;
            emit(output(&input, &cfg), &to_json_bytes(&report))
        }
        Command::Feedback { input, model, grades, solution, epsilon } => {
            let (ds, _) = load(&input, &cfg)?;
            let prep = prepare(&ds)?;
            let analysis = obtain_analysis(&prep, &model, &cfg)?;
            let by_id = load_grades(grades.or(cfg.grades.clone()))?;
            let id = solution.or(cfg.solution.clone()).ok_or_else(|| missing("--solution"))?;
            let eps = epsilon.or(cfg.epsilon).unwrap_or(AnalysisParams::default().epsilon);
            let trace = analysis
                .feedback(&prep, &id, &by_id, eps)?
                .ok_or_else(|| CliError::Model("feedback traces need an MLP-B analysis (--method bayes)".into()))?;
            emit(output(&input, &cfg), &to_json_bytes(&trace))
        }
        Command::Eval(args) => eval(args, &cfg),
        Command::ExportGraph { input, model, threshold, grades } => {
            let (ds, _) = load(&input, &cfg)?;
            let prep = prepare(&ds)?;
            let analysis = obtain_analysis(&prep, &model, &cfg)?;
            let threshold = threshold.or(cfg.threshold).ok_or_else(|| missing("--threshold"))?;
            let node_grades: Vec<Option<f64>> = match grades.or(cfg.grades.clone()) {
                Some(p) => {
                    let by_id = load_grades(Some(p))?;
                    analysis.grade(&prep, &by_id)?.solutions.iter().map(|s| Some(s.grade)).collect()
                }
                None => ds.solutions.iter().map(|s| s.grade).collect(),
            };
            let graph = analysis.graph(&prep, &node_grades, threshold)?;
            emit(output(&input, &cfg), &to_json_bytes(&graph))
        }
        Command::Serve { host, port } => {
            let host = host.or(cfg.host.clone()).unwrap_or_else(|| "127.0.0.1".into());
            let ip: IpAddr = host.parse().map_err(|_| CliError::Schema(format!("invalid host `{host}`")))?;
            let addr = SocketAddr::new(ip, port.or(cfg.port).unwrap_or(8080));
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
            rt.block_on(mlp_service::serve(addr)).map_err(|e| CliError::Io(format!("{addr}: {e}")))
        }
    }
}

fn missing(flag: &str) -> CliError {
    CliError::Schema(format!("{flag} is required (flag or config file)"))
}

fn output<'a>(input: &'a Input, cfg: &'a Config) -> Option<&'a Path> {
    input.output.as_deref().or(cfg.output.as_deref())
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => Ok(write_atomic(p, bytes)?),
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn parse_level(s: Option<String>) -> Result<SimplificationLevel, CliError> {
    s.map(|s| s.parse().map_err(CliError::Schema)).transpose().map(Option::unwrap_or_default)
}

fn load(input: &Input, cfg: &Config) -> Result<(DatasetFile, Vec<String>), CliError> {
    let path = input.dataset.as_deref().or(cfg.dataset.as_deref()).ok_or_else(|| missing("--dataset"))?;
    let loaded = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let file = std::fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
        let text = String::from_utf8(to_json_bytes(&import_csv(file, stem)?)).expect("JSON is UTF-8");
        mlp_core::io::parse_dataset(&text)?
    } else {
        load_dataset(path)?
    };
    if !loaded.filtered.is_empty() {
        log::info!("filtered {} blank solutions: {}", loaded.filtered.len(), loaded.filtered.join(", "));
    }
    Ok((loaded.dataset, loaded.filtered))
}

fn load_grades(path: Option<PathBuf>) -> Result<BTreeMap<String, f64>, CliError> {
    let path = path.ok_or_else(|| missing("--grades"))?;
    Ok(load_json(&path)?)
}

fn analysis_params(model: &ModelArgs, cfg: &Config) -> Result<AnalysisParams, CliError> {
    let method: Method = match model.method.clone().or(cfg.method.clone()) {
        Some(m) => m.parse().map_err(CliError::Schema)?,
        None => Method::Ap,
    };
    let mut gibbs = cfg.gibbs.clone().unwrap_or_default();
    if let Some(it) = model.iterations.or(cfg.iterations) {
        gibbs.iterations = it;
    }
    if let Some(b) = model.burn_in.or(cfg.burn_in) {
        gibbs.burn_in = b;
    }
    Ok(AnalysisParams {
        method,
        k: model.k.or(cfg.k),
        seed: model.seed.or(cfg.seed).unwrap_or(0),
        ap: cfg.ap.clone().unwrap_or_default(),
        gibbs,
        epsilon: cfg.epsilon.unwrap_or(AnalysisParams::default().epsilon),
    })
}

/// Loads `--analysis` when given (checking it belongs to this dataset),
/// otherwise clusters from scratch.
fn obtain_analysis(prep: &Prepared, model: &ModelArgs, cfg: &Config) -> Result<Analysis, CliError> {
    if let Some(path) = model.analysis.as_deref().or(cfg.analysis.as_deref()) {
        let a: Analysis = load_json(path)?;
        if a.ids != prep.ids {
            return Err(CliError::Schema(format!("{}: solution ids differ from the dataset", path.display())));
        }
        return Ok(a);
    }
    let params = analysis_params(model, cfg)?;
    let mut next_report = 0;
    Ok(analyze_with_progress(prep, &params, |done, total| {
        if done >= next_report {
            log::info!("gibbs sweep {done}/{total}");
            next_report = done + (total / 10).max(1);
        }
    })?)
}

#[derive(Debug, Serialize)]
struct Segment {
    segment: String,
    key: String,
    /// False when the segment did not parse and was kept as opaque text.
    parsed: bool,
}

fn parse_texts(texts: &[String], level: SimplificationLevel) -> Result<Vec<Vec<Segment>>, CliError> {
    texts
        .iter()
        .map(|t| {
            let segs = tokenize_solution(t).map_err(|_| CliError::Schema(format!("no expression in `{t}`")))?;
            Ok(segs
                .into_iter()
                .map(|s| Segment { parsed: canonical_key(&s, level).is_ok(), key: feature_key(&s, level), segment: s })
                .collect())
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct Featurized<'a> {
    question_id: &'a str,
    filtered: Vec<String>,
    vocabulary: &'a [String],
    solutions: Vec<FeaturizedSolution<'a>>,
}

#[derive(Debug, Serialize)]
struct FeaturizedSolution<'a> {
    id: &'a str,
    /// Keys in order of appearance.
    keys: &'a [String],
    /// Vocabulary rows present, ascending.
    rows: Vec<usize>,
}

impl<'a> Featurized<'a> {
    fn new(ds: &'a DatasetFile, filtered: Vec<String>, prep: &'a Prepared) -> Self {
        Self {
            question_id: &ds.question_id,
            filtered,
            vocabulary: &prep.y.vocabulary,
            solutions: prep
                .solutions
                .iter()
                .map(|s| FeaturizedSolution { id: &s.learner_id, keys: &s.keys, rows: s.distinct.iter().copied().collect() })
                .collect(),
        }
    }
}

fn parse_k_range(s: &str) -> Result<RangeInclusive<usize>, CliError> {
    let bad = || CliError::Schema(format!("invalid --k-range `{s}` (expected A..B)"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    Ok(a.trim().parse().map_err(|_| bad())?..=b.trim().parse().map_err(|_| bad())?)
}

fn parse_list<T: std::str::FromStr>(s: &str, flag: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse().map_err(|_| CliError::Schema(format!("invalid {flag} entry `{x}`"))))
        .collect()
}

fn eval(args: EvalArgs, cfg: &Config) -> Result<(), CliError> {
    let (name, dataset) = if args.synthetic || cfg.synthetic.unwrap_or(false) {
        let d = SyntheticSpec::default();
        let spec = SyntheticSpec {
            n: args.n.or(cfg.n).unwrap_or(d.n),
            v: args.v.or(cfg.v).unwrap_or(d.v),
            k_star: args.k_star.or(cfg.k_star).unwrap_or(d.k_star),
            overlap: args.overlap.or(cfg.overlap).unwrap_or(d.overlap),
            noise: args.noise.or(cfg.noise).unwrap_or(d.noise),
            seed: args.synth_seed.or(cfg.synth_seed).unwrap_or(d.seed),
            ..d
        };
        ("planted".to_string(), synth_generate(&spec)?.dataset)
    } else {
        let (ds, _) = load(&args.input, cfg)?;
        (ds.question_id.clone(), ds)
    };
    let truth = dataset.true_grades().ok_or(mlp_core::eval::EvalError::MissingTruth)?;
    let prep = prepare(&dataset)?;

    let mut exp = ExperimentConfig::default();
    if let Some(m) = args.methods.or(cfg.methods.clone()) {
        exp.methods = parse_list::<EvalMethod>(&m, "--methods")?;
    }
    if let Some(r) = args.k_range.or(cfg.k_range.clone()) {
        exp.k_range = parse_k_range(&r)?;
    }
    if let Some(s) = args.seeds.or(cfg.seeds.clone()) {
        exp.seeds = parse_list(&s, "--seeds")?;
    }
    if let Some(t) = args.rs_trials.or(cfg.rs_trials) {
        exp.rs_trials = t;
    }
    exp.timing = args.timing || cfg.timing.unwrap_or(false);
    if let Some(ap) = &cfg.ap {
        exp.ap = ap.clone();
    }
    if let Some(g) = &cfg.gibbs {
        exp.gibbs = g.clone();
    }
    if let Some(it) = args.iterations.or(cfg.iterations) {
        exp.gibbs.iterations = it;
    }
    if let Some(b) = args.burn_in.or(cfg.burn_in) {
        exp.gibbs.burn_in = b;
    }

    let report = run_experiment(&name, &prep, &truth, &exp)?;
    let format = match (args.format, cfg.format.as_deref()) {
        (Some(f), _) => f,
        (None, Some(s)) => Format::from_str(s, true).map_err(|_| CliError::Schema(format!("invalid format `{s}`")))?,
        (None, None) => Format::Text,
    };
    let body = match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
        Format::Text => report.to_text(),
    };
    emit(output(&args.input, cfg), body.as_bytes())
}
