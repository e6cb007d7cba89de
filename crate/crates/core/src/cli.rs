//! Command-line interface.
//!
//! Exit codes: 0 on success, 2 for input errors, 3 for numerical failures
//! (non-convergence, singular sandwich matrices).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{decisions_fingerprint, generate_truth, run_benchmark, ScenarioFile, ScenarioSpec, DECISIONS};
use crate::error::{Error, Result};
use crate::estimator::GridSpec;
use crate::graph::{export_dot, ThresholdPolicy};
use crate::io::{self, TruthDocument};
use crate::model::{default_labels, BinaryDataset, ParameterSet, SimilarityMatrix};
use crate::sampler::{sample, SamplerConfig, SamplerMethod};
use crate::selection::{fit_model, EstimatorKind, FitConfig, Tuning, SCHEMA_VERSION};

#[derive(Debug, Parser)]
#[command(name = "ising-simreg", version, about = "Ising similarity regression for multivariate binary data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the model and write estimates, intervals and a run log.
    Fit(FitArgs),
    /// Simulate a dataset from generator settings or a truth file.
    Simulate(SimulateArgs),
    /// Run the Monte Carlo scenarios of a TOML file.
    Benchmark(BenchmarkArgs),
    /// Cross-validation curve over the lambda grid.
    Cv(FitArgs),
    /// Write the thresholded interaction graph of a fit as DOT.
    ExportGraph(ExportArgs),
    /// Similarity matrix utilities.
    #[command(subcommand)]
    Similarity(SimilarityCommand),
}

#[derive(Debug, Subcommand)]
pub enum SimilarityCommand {
    /// Build similarity matrices from an attribute table and schema.
    Build(BuildArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Precomputed p × p similarity matrix CSV; labeled by file stem.
    #[arg(long = "matrix", value_name = "CSV")]
    pub matrices: Vec<PathBuf>,
    /// Attribute table; needs --schema.
    #[arg(long, value_name = "CSV")]
    pub attributes: Option<PathBuf>,
    /// TOML schema of the attribute table.
    #[arg(long, value_name = "TOML")]
    pub schema: Option<PathBuf>,
    /// Edge list CSV of response identifiers; labeled by file stem.
    #[arg(long = "edges", value_name = "CSV")]
    pub edges: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PenaltyArg {
    Adaptive,
    Lasso,
    None,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TuneArg {
    Cv,
    Aic,
    Bic,
    Fixed,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// n × p CSV of 0/1 responses with a header of response labels.
    #[arg(long, value_name = "CSV")]
    pub responses: PathBuf,
    #[command(flatten)]
    pub sources: SourceArgs,
    #[arg(long, value_enum, default_value = "adaptive")]
    pub penalty: PenaltyArg,
    /// Oracle support: comma-separated similarity labels or 0-based indices.
    #[arg(long, value_name = "LIST")]
    pub support: Option<String>,
    #[arg(long, value_enum, default_value = "cv")]
    pub tune: TuneArg,
    /// Penalty level for --tune fixed.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grid length and ratio of smallest to largest lambda.
    #[arg(long, value_name = "LEN,RATIO", value_parser = parse_grid)]
    pub lambda_grid: Option<GridSpec>,
    /// Pick the largest lambda within one standard error of the CV optimum.
    #[arg(long)]
    pub one_se: bool,
    /// Skip sandwich intervals.
    #[arg(long)]
    pub no_inference: bool,
    #[arg(long, short, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    Auto,
    Exact,
    Gibbs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Truth JSON with parameters and similarity matrices; replaces the
    /// generator settings.
    #[arg(long, value_name = "JSON")]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[arg(long, default_value_t = 25)]
    pub p: usize,
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    #[arg(long, default_value_t = 5)]
    pub k0: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    pub sampler: SamplerArg,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long, short, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    /// TOML file of `[[scenario]]` tables.
    #[arg(long, value_name = "TOML")]
    pub scenarios: PathBuf,
    /// Overrides the replicate count of every scenario.
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long, short, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    /// Result JSON written by `fit`.
    #[arg(long, value_name = "JSON")]
    pub fit: PathBuf,
    #[command(flatten)]
    pub sources: SourceArgs,
    /// `median`, `none` or a number; edges strictly above are kept.
    #[arg(long, default_value = "median")]
    pub threshold: ThresholdPolicy,
    /// Attribute table column used to color nodes; needs --attributes.
    #[arg(long, value_name = "COLUMN")]
    pub color_by: Option<String>,
    #[arg(long, short, value_name = "DOT")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    #[arg(long, value_name = "CSV")]
    pub attributes: PathBuf,
    #[arg(long, value_name = "TOML")]
    pub schema: PathBuf,
    /// Responses CSV whose header fixes the node order; defaults to table order.
    #[arg(long, value_name = "CSV")]
    pub responses: Option<PathBuf>,
    #[arg(long, short, value_name = "DIR")]
    pub out: PathBuf,
}

fn parse_grid(s: &str) -> std::result::Result<GridSpec, String> {
    let (len, ratio) = s.split_once(',').ok_or_else(|| format!("expected LEN,RATIO, got {s:?}"))?;
    let grid = GridSpec {
        len: len.trim().parse().map_err(|e| format!("grid length: {e}"))?,
        ratio: ratio.trim().parse().map_err(|e| format!("grid ratio: {e}"))?,
    };
    grid.validate().map_err(|e| e.to_string())?;
    Ok(grid)
}

/// Outcome of a successful command.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Status {
    /// Outputs were written but a fit did not converge or inference failed.
    pub numerical_failure: bool,
}

pub fn exit_code(result: &Result<Status>) -> u8 {
    match result {
        Ok(s) if s.numerical_failure => 3,
        Ok(_) => 0,
        Err(e) if e.is_input_error() => 2,
        Err(_) => 3,
    }
}

pub fn run(cli: Cli) -> Result<Status> {
    let invocation: Vec<String> = std::env::args().collect();
    match cli.command {
        Command::Fit(args) => cmd_fit(&args, &invocation),
        Command::Cv(args) => cmd_cv(&args, &invocation),
        Command::Simulate(args) => cmd_simulate(&args, &invocation),
        Command::Benchmark(args) => cmd_benchmark(&args, &invocation),
        Command::ExportGraph(args) => cmd_export_graph(&args),
        Command::Similarity(SimilarityCommand::Build(args)) => cmd_similarity_build(&args),
    }
}

/// Run log: timestamp and invocation, then the decisions in effect and
/// free-form notes. Timestamps live only here, never in result files.
struct RunLog {
    text: String,
}

impl RunLog {
    fn new(invocation: &[String]) -> Self {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let mut text = String::new();
        writeln!(text, "timestamp_unix: {secs}").unwrap();
        writeln!(text, "command: {}", invocation.join(" ")).unwrap();
        writeln!(text, "package_version: {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(text, "schema_version: {SCHEMA_VERSION}").unwrap();
        writeln!(text, "decisions_fingerprint: {}", decisions_fingerprint()).unwrap();
        for d in DECISIONS {
            writeln!(text, "decision: {d}").unwrap();
        }
        Self { text }
    }

    fn note(&mut self, msg: impl AsRef<str>) {
        log::info!("{}", msg.as_ref());
        writeln!(self.text, "note: {}", msg.as_ref()).unwrap();
    }

    fn config<T: serde::Serialize>(&mut self, name: &str, value: &T) {
        let json = serde_json::to_string(value).unwrap_or_default();
        writeln!(self.text, "{name}: {json}").unwrap();
    }

    fn write(&self, dir: &Path) -> Result<()> {
        io::write_string(&dir.join("run.log"), &self.text)
    }
}

/// Similarity matrices from all sources, in the order attributes, matrices,
/// edge lists.
pub fn load_sources(sources: &SourceArgs, labels: &[String]) -> Result<Vec<SimilarityMatrix>> {
    let mut sims = Vec::new();
    match (&sources.attributes, &sources.schema) {
        (Some(table), Some(schema)) => sims.extend(io::read_attributes(table, &io::read_schema(schema)?, labels)?),
        (None, None) => {}
        _ => return Err(Error::InvalidInput("--attributes and --schema must be given together".into())),
    }
    for path in &sources.matrices {
        sims.push(io::read_matrix(path, None, Some(labels))?);
    }
    for path in &sources.edges {
        sims.push(io::read_edge_list(path, labels, None)?);
    }
    let mut seen = HashMap::new();
    for s in &sims {
        if seen.insert(s.label().to_string(), ()).is_some() {
            return Err(Error::InvalidInput(format!("two similarity sources are labeled {:?}", s.label())));
        }
    }
    Ok(sims)
}

fn parse_support(list: &str, sims: &[SimilarityMatrix]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let k = match sims.iter().position(|s| s.label() == tok) {
            Some(k) => k,
            None => tok
                .parse::<usize>()
                .ok()
                .filter(|&k| k < sims.len())
                .ok_or_else(|| Error::InvalidInput(format!("support entry {tok:?} is neither a similarity label nor an index below {}", sims.len())))?,
        };
        out.push(k);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn fit_config(args: &FitArgs, sims: &[SimilarityMatrix]) -> Result<FitConfig> {
    let estimator = match args.penalty {
        PenaltyArg::Adaptive => EstimatorKind::Adaptive,
        PenaltyArg::Lasso => EstimatorKind::Lasso,
        PenaltyArg::None => EstimatorKind::Unregularized,
        PenaltyArg::Oracle => EstimatorKind::Oracle,
    };
    let oracle_support = match (estimator, &args.support) {
        (EstimatorKind::Oracle, None) => return Err(Error::InvalidInput("--penalty oracle requires --support".into())),
        (_, Some(list)) => Some(parse_support(list, sims)?),
        (_, None) => None,
    };
    let tuning = match args.tune {
        TuneArg::Cv => Tuning::Cv,
        TuneArg::Aic => Tuning::Aic,
        TuneArg::Bic => Tuning::Bic,
        TuneArg::Fixed => Tuning::Fixed,
    };
    if tuning == Tuning::Fixed && args.lambda.is_none() {
        return Err(Error::InvalidInput("--tune fixed requires --lambda".into()));
    }
    Ok(FitConfig {
        estimator,
        oracle_support,
        tuning,
        folds: args.folds,
        one_se: args.one_se,
        fixed_lambda: args.lambda,
        grid: args.lambda_grid.unwrap_or_default(),
        seed: args.seed,
        inference: !args.no_inference,
        ..FitConfig::default()
    })
}

fn load_fit_inputs(args: &FitArgs) -> Result<(BinaryDataset, Vec<SimilarityMatrix>)> {
    let data = io::read_responses(&args.responses)?;
    let sims = load_sources(&args.sources, data.labels())?;
    if sims.is_empty() {
        return Err(Error::InvalidInput("at least one similarity source required".into()));
    }
    Ok((data, sims))
}

fn cmd_fit(args: &FitArgs, invocation: &[String]) -> Result<Status> {
    let (data, sims) = load_fit_inputs(args)?;
    let config = fit_config(args, &sims)?;
    let mut log = RunLog::new(invocation);
    log.config("config", &config);
    let result = fit_model(&data, &sims, &config)?;
    for m in &result.diagnostics.messages {
        log.note(m);
    }
    let mut status = Status::default();
    if !result.diagnostics.converged {
        status.numerical_failure = true;
    }
    if let Some(e) = &result.inference_error {
        log.note(format!("inference failed: {e}"));
        status.numerical_failure = true;
    }
    io::write_json(&args.out.join("fit.json"), &result)?;
    io::write_coefficients(&args.out.join("coefficients.csv"), &result)?;
    log.write(&args.out)?;
    Ok(status)
}

fn cmd_cv(args: &FitArgs, invocation: &[String]) -> Result<Status> {
    let (data, sims) = load_fit_inputs(args)?;
    let mut config = fit_config(args, &sims)?;
    if !matches!(config.estimator, EstimatorKind::Adaptive | EstimatorKind::Lasso) {
        return Err(Error::InvalidInput("cv needs a penalized estimator (--penalty adaptive or lasso)".into()));
    }
    config.tuning = Tuning::Cv;
    config.inference = false;
    let mut log = RunLog::new(invocation);
    log.config("config", &config);
    let result = fit_model(&data, &sims, &config)?;
    let curve = result.cv.as_ref().ok_or_else(|| Error::Numerical("cross-validation produced no curve".into()))?;
    let sizes = result.path.as_ref().map(|p| p.active_sizes.clone()).unwrap_or_default();
    let mut csv = String::from("lambda,mean,se,active\n");
    for (l, lambda) in curve.lambdas.iter().enumerate() {
        let size = sizes.get(l).map_or(String::new(), |s| s.to_string());
        writeln!(csv, "{lambda},{},{},{size}", curve.mean[l], curve.se[l]).unwrap();
    }
    for m in &result.diagnostics.messages {
        log.note(m);
    }
    log.note(format!("selected lambda {}", result.lambda.unwrap_or(f64::NAN)));
    io::write_json(&args.out.join("cv.json"), &result)?;
    io::write_string(&args.out.join("cv.csv"), &csv)?;
    log.write(&args.out)?;
    Ok(Status::default())
}

fn cmd_simulate(args: &SimulateArgs, invocation: &[String]) -> Result<Status> {
    let mut log = RunLog::new(invocation);
    let (params, sims): (ParameterSet, Vec<SimilarityMatrix>) = match &args.truth {
        Some(path) => {
            let doc: TruthDocument = io::read_json(path)?;
            (doc.params, doc.similarity)
        }
        None => {
            let spec = ScenarioSpec {
                name: "simulate".into(),
                n: args.n,
                p: args.p,
                k: args.k,
                k0: args.k0,
                seed: args.seed,
                replicates: 1,
                folds: 2,
                ..ScenarioSpec::default()
            };
            let t = generate_truth(&spec)?;
            (t.truth.params, t.sims)
        }
    };
    let p = params.p();
    let mut sampler = match args.sampler {
        SamplerArg::Auto => SamplerConfig::auto(p, args.seed),
        SamplerArg::Exact => SamplerConfig::exact(args.seed),
        SamplerArg::Gibbs => SamplerConfig::gibbs(args.seed),
    };
    if args.sampler == SamplerArg::Auto && sampler.method == SamplerMethod::Gibbs {
        log.note(format!("p = {p} exceeds the exact enumeration cap; sampling with Gibbs"));
    }
    if let Some(b) = args.burn_in {
        sampler.burn_in = b;
    }
    if let Some(t) = args.thin {
        sampler.thin = t;
    }
    log.config("sampler", &sampler);
    let labels = default_labels(p);
    let raw = sample(args.n, &params, &sims, &sampler)?;
    let data = BinaryDataset::with_labels(raw.n(), raw.p(), raw.raw().to_vec(), labels.clone())?;

    io::write_responses(&args.out.join("responses.csv"), &data)?;
    for s in &sims {
        io::write_matrix(&args.out.join(format!("{}.csv", s.label())), s, &labels)?;
    }
    let doc = TruthDocument {
        schema_version: SCHEMA_VERSION,
        seed: args.seed,
        n: args.n,
        response_labels: labels,
        support: params.active_set(),
        params,
        sampler: Some(sampler),
        similarity: sims,
    };
    io::write_json(&args.out.join("truth.json"), &doc)?;
    log.write(&args.out)?;
    Ok(Status::default())
}

fn cmd_benchmark(args: &BenchmarkArgs, invocation: &[String]) -> Result<Status> {
    let file: ScenarioFile = io::read_toml(&args.scenarios)?;
    let mut log = RunLog::new(invocation);
    for mut spec in file.scenario {
        if let Some(r) = args.replicates {
            spec.replicates = r;
        }
        log.config(&format!("scenario {}", spec.name), &spec);
        let report = run_benchmark(&spec)?;
        for s in &report.summary {
            if s.failures > 0 {
                log.note(format!("{}: {} failed replicates for {}", spec.name, s.failures, s.estimator.name()));
            }
        }
        io::write_json(&args.out.join(format!("{}.json", spec.name)), &report)?;
        io::write_benchmark_summary(&args.out.join(format!("{}.csv", spec.name)), &report)?;
    }
    log.write(&args.out)?;
    Ok(Status::default())
}

fn cmd_export_graph(args: &ExportArgs) -> Result<Status> {
    let result: crate::selection::FitResult = io::read_json(&args.fit)?;
    let labels = &result.response_labels;
    let loaded = load_sources(&args.sources, labels)?;
    let sims = result
        .similarity_labels
        .iter()
        .map(|l| {
            loaded
                .iter()
                .find(|s| s.label() == l)
                .cloned()
                .ok_or_else(|| Error::InvalidInput(format!("missing similarity input {l:?} needed to rebuild the interaction matrix")))
        })
        .collect::<Result<Vec<_>>>()?;
    let theta = result.theta(&sims)?;
    let categories = match (&args.color_by, &args.sources.attributes) {
        (Some(col), Some(table)) => {
            let id_col = match &args.sources.schema {
                Some(s) => io::read_schema(s)?.id_column,
                None => None,
            };
            Some(io::read_categories(table, id_col.as_deref(), col, labels)?)
        }
        (Some(_), None) => return Err(Error::InvalidInput("--color-by needs --attributes".into())),
        _ => None,
    };
    let g = export_dot(&theta, labels, categories.as_deref(), args.threshold)?;
    io::write_string(&args.out, &g.dot)?;
    Ok(Status::default())
}

fn cmd_similarity_build(args: &BuildArgs) -> Result<Status> {
    let schema = io::read_schema(&args.schema)?;
    let labels = match &args.responses {
        Some(r) => io::read_responses(r)?.labels().to_vec(),
        None => io::read_ids(&args.attributes, schema.id_column.as_deref())?,
    };
    let sims = io::read_attributes(&args.attributes, &schema, &labels)?;
    for s in &sims {
        io::write_matrix(&args.out.join(format!("{}.csv", s.label())), s, &labels)?;
    }
    Ok(Status::default())
}
