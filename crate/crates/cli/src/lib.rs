//! `honad`: generate clickstreams, mine rules, build graphs and detect change points.

pub mod bench;
pub mod pipeline;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hon_anomaly::corpus::{load_corpus, Corpus};
use hon_anomaly::detector::{
    detect, DetectionMode, DetectorConfig, DistanceSeries, Representation,
};
use hon_anomaly::distances::{distance, MetricKind, SpectralParams};
use hon_anomaly::hon_graph::{build_graph, HonGraph};
use hon_anomaly::rule_miner::{MinerConfig, RuleMiner, RuleSet, Strategy};
use hon_anomaly::synthgen::{self, GridSpec, ScenarioConfig};

use crate::bench::BenchConfig;
use crate::pipeline::PipelineConfig;

pub const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    "\ncorpus format 1\nrule format 1\ngraph format 1\nreport format 1"
);

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: hon_anomaly::Error,
    },

    #[error(transparent)]
    Data(#[from] hon_anomaly::Error),

    #[error("{0}")]
    Assertion(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::File { .. } | CliError::Data(_) => 2,
            CliError::Assertion(_) => 3,
        }
    }

    pub(crate) fn file(path: &Path, source: impl Into<hon_anomaly::Error>) -> Self {
        CliError::File {
            path: path.to_owned(),
            source: source.into(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "honad", version = VERSION, about = "Higher-order network anomaly detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic clickstream corpus and its ground truth
    Generate(GenerateArgs),
    /// Mine, build graphs, measure distances and detect change points
    Pipeline(PipelineArgs),
    /// Mine the rules of one window
    Mine(MineArgs),
    /// Build a graph from a rule file
    Graph(GraphArgs),
    /// Distance between two graph files
    Distance(DistanceArgs),
    /// Run change-point detection on a distance series
    Detect(DetectArgs),
    /// Compare the lazy and exhaustive miners
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Grid side length (pages = side^2)
    #[arg(long, default_value_t = 10)]
    pub side: usize,

    #[arg(long, default_value_t = 1000)]
    pub users: usize,

    /// Moves per user per window
    #[arg(long, default_value_t = 100)]
    pub steps: usize,

    #[arg(long, default_value_t = 10)]
    pub windows_per_regime: usize,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Corpus output path; ground truth goes to `<out>.truth`
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RepresentationArg {
    Fon,
    Hon,
}

impl From<RepresentationArg> for Representation {
    fn from(r: RepresentationArg) -> Self {
        match r {
            RepresentationArg::Fon => Representation::Fon,
            RepresentationArg::Hon => Representation::Hon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Running,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Lazy,
    Exhaustive,
}

fn parse_metric(s: &str) -> Result<MetricKind, String> {
    s.parse().map_err(|e: hon_anomaly::distances::DistanceError| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct MinerArgs {
    #[arg(long, default_value_t = 1)]
    pub min_support: u64,

    /// Cap on rule order (unbounded by default)
    #[arg(long)]
    pub max_order: Option<usize>,

    /// Collapse consecutive repeated entities while reading
    #[arg(long)]
    pub dedupe: bool,
}

impl MinerArgs {
    fn config(&self) -> CliResult<MinerConfig> {
        let cfg = MinerConfig {
            min_support: self.min_support,
            max_order: self.max_order,
            table_budget: None,
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct DetectorArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Running)]
    pub mode: ModeArg,

    /// Fixed-mode threshold
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,

    /// Number of previous values in the running baseline
    #[arg(long, default_value_t = 10)]
    pub window_k: usize,

    /// Flag when d > mean + sigma * std
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,

    #[arg(long, default_value_t = 1e-12)]
    pub sigma_floor: f64,
}

impl DetectorArgs {
    fn config(&self) -> CliResult<DetectorConfig> {
        let cfg = DetectorConfig {
            mode: match self.mode {
                ModeArg::Running => DetectionMode::Running,
                ModeArg::Fixed => DetectionMode::Fixed,
            },
            fixed_threshold: self.threshold,
            window_k: self.window_k,
            sigma_multiplier: self.sigma,
            sigma_floor: self.sigma_floor,
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpectralArgs {
    /// Leading Laplacian eigenvalues compared by the spectral metric
    #[arg(long)]
    pub num_eigenvalues: Option<usize>,

    #[arg(long, default_value_t = 1e-10)]
    pub power_tol: f64,

    #[arg(long, default_value_t = 10_000)]
    pub power_max_steps: usize,
}

impl SpectralArgs {
    fn params(&self) -> CliResult<SpectralParams> {
        let p = SpectralParams {
            num_eigenvalues: self.num_eigenvalues,
            power_iteration_tol: self.power_tol,
            power_iteration_max_steps: self.power_max_steps,
        };
        p.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(p)
    }
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub input: PathBuf,

    #[arg(long, value_enum, default_value_t = RepresentationArg::Hon)]
    pub representation: RepresentationArg,

    /// Comma-separated metrics
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_metric,
        default_value = "weight,mcs,modality,entropy,spectral"
    )]
    pub metrics: Vec<MetricKind>,

    #[command(flatten)]
    pub miner: MinerArgs,

    #[command(flatten)]
    pub detector: DetectorArgs,

    #[command(flatten)]
    pub spectral: SpectralArgs,

    /// Ground-truth file; enables evaluation output
    #[arg(long)]
    pub truth: Option<PathBuf>,

    /// Count a flag within this many windows of a boundary as a detection
    #[arg(long, default_value_t = 0)]
    pub slack: usize,

    /// Skip writing per-window graph files
    #[arg(long)]
    pub no_graphs: bool,

    #[arg(long, default_value_t = 1)]
    pub jobs: usize,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[arg(long)]
    pub input: PathBuf,

    /// Window index to mine
    #[arg(long, default_value_t = 1)]
    pub window: usize,

    #[arg(long, value_enum, default_value_t = StrategyArg::Lazy)]
    pub strategy: StrategyArg,

    #[command(flatten)]
    pub miner: MinerArgs,

    /// Rule file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long)]
    pub rules: PathBuf,

    /// Graph file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[arg(long, value_parser = parse_metric)]
    pub metric: MetricKind,

    #[command(flatten)]
    pub spectral: SpectralArgs,

    pub first: PathBuf,

    pub second: PathBuf,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Series CSV with columns t,d,reason
    #[arg(long)]
    pub series: PathBuf,

    #[arg(long, value_parser = parse_metric, default_value = "weight")]
    pub metric: MetricKind,

    #[arg(long, value_enum, default_value_t = RepresentationArg::Hon)]
    pub representation: RepresentationArg,

    #[command(flatten)]
    pub detector: DetectorArgs,

    /// Report CSV (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Corpus to benchmark; a planted cyclic corpus is used when absent
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Window index of the input corpus
    #[arg(long, default_value_t = 1)]
    pub window: usize,

    /// Dependency order of the planted cyclic corpus
    #[arg(long, default_value_t = 6)]
    pub planted_order: usize,

    /// Passes over the planted cycle per trajectory
    #[arg(long, default_value_t = 16)]
    pub planted_repetitions: usize,

    /// Maximum orders for the exhaustive miner
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
    pub max_orders: Vec<usize>,

    #[arg(long, default_value_t = 1)]
    pub min_support: u64,

    /// Abort an exhaustive run after this many materialized observations
    #[arg(long)]
    pub budget: Option<u64>,

    /// Report CSV (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.exit_code() == 0 { 0 } else { 1 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("honad: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Generate(a) => cmd_generate(a),
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::Mine(a) => cmd_mine(a),
        Command::Graph(a) => cmd_graph(a),
        Command::Distance(a) => cmd_distance(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::file(p, e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub(crate) fn read_corpus(path: &Path, dedupe: bool) -> CliResult<Corpus> {
    load_corpus(path, dedupe).map_err(|e| CliError::file(path, e))
}

pub fn cmd_generate(a: GenerateArgs) -> CliResult<()> {
    let grid = GridSpec::new(a.side).map_err(|e| CliError::Usage(e.to_string()))?;
    let cfg = ScenarioConfig {
        grid,
        n_users: a.users,
        steps_per_user: a.steps,
        windows_per_regime: a.windows_per_regime,
        seed: a.seed,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let truth = synthgen::generate(&cfg, &a.out).map_err(|e| CliError::file(&a.out, e))?;
    let windows = cfg.total_windows();
    let clicks = windows * cfg.n_users * cfg.steps_per_user;
    let entities = windows * cfg.n_users * (cfg.steps_per_user + 1);
    println!(
        "windows={windows} clicks={clicks} L={entities} N={} boundaries={}",
        grid.pages(),
        truth.boundaries.len()
    );
    Ok(())
}

pub fn cmd_pipeline(a: PipelineArgs) -> CliResult<()> {
    if a.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    if a.metrics.is_empty() {
        return Err(CliError::Usage("at least one metric is required".into()));
    }
    let cfg = PipelineConfig {
        input: a.input,
        representation: a.representation.into(),
        metrics: a.metrics,
        miner: a.miner.config()?,
        dedupe: a.miner.dedupe,
        detector: a.detector.config()?,
        spectral: a.spectral.params()?,
        truth: a.truth,
        slack: a.slack,
        write_graphs: !a.no_graphs,
        jobs: a.jobs,
        out_dir: a.out,
    };
    let outcome = pipeline::run_pipeline(&cfg)?;
    for report in &outcome.reports {
        println!(
            "{} {}: flagged {:?}",
            report.representation,
            report.metric,
            report.flagged_windows()
        );
    }
    if let Some(eval) = &outcome.evaluation {
        for s in &eval.summaries {
            println!(
                "{} {}: precision={:.3} recall={:.3}",
                s.representation, s.metric, s.precision, s.recall
            );
        }
    }
    Ok(())
}

pub fn cmd_mine(a: MineArgs) -> CliResult<()> {
    let mut cfg = a.miner.config()?;
    let strategy = match a.strategy {
        StrategyArg::Lazy => Strategy::Lazy,
        StrategyArg::Exhaustive => Strategy::Exhaustive,
    };
    if strategy == Strategy::Exhaustive && cfg.max_order.is_none() {
        return Err(CliError::Usage("--strategy exhaustive needs --max-order".into()));
    }
    cfg.table_budget = None;
    let corpus = read_corpus(&a.input, a.miner.dedupe)?;
    let window = corpus.window(a.window).ok_or_else(|| {
        CliError::Usage(format!("window {} is not in {}", a.window, a.input.display()))
    })?;
    let outcome = RuleMiner::new(window, cfg, strategy).run()?;
    outcome.rules.write(output(a.out.as_deref())?)?;
    let s = outcome.stats;
    eprintln!(
        "rules={} max_order={} observations={} tests={} prunes={} table_entries={}",
        outcome.rules.len(),
        outcome.rules.max_order_found(),
        s.observations_materialized,
        s.divergence_tests,
        s.prunes_by_bound,
        s.peak_table_entries
    );
    Ok(())
}

fn read_rules(path: &Path) -> CliResult<RuleSet> {
    let file = File::open(path).map_err(|e| CliError::file(path, e))?;
    RuleSet::parse(file).map_err(|e| CliError::file(path, e))
}

fn read_graph(path: &Path) -> CliResult<HonGraph> {
    let file = File::open(path).map_err(|e| CliError::file(path, e))?;
    HonGraph::parse(file).map_err(|e| CliError::file(path, e))
}

pub fn cmd_graph(a: GraphArgs) -> CliResult<()> {
    let rules = read_rules(&a.rules)?;
    let graph = build_graph(&rules).map_err(|e| CliError::file(&a.rules, e))?;
    graph.write(output(a.out.as_deref())?)?;
    Ok(())
}

pub fn cmd_distance(a: DistanceArgs) -> CliResult<()> {
    let params = a.spectral.params()?;
    let g = read_graph(&a.first)?;
    let h = read_graph(&a.second)?;
    let d = distance(a.metric, &g, &h, &params)
        .map_err(|e| CliError::Data(hon_anomaly::Error::Argument(e.to_string())))?;
    println!("{d}");
    Ok(())
}

pub fn cmd_detect(a: DetectArgs) -> CliResult<()> {
    let cfg = a.detector.config()?;
    let file = File::open(&a.series).map_err(|e| CliError::file(&a.series, e))?;
    let series = DistanceSeries::read_csv(file, a.metric, a.representation.into())
        .map_err(|e| CliError::file(&a.series, e))?;
    let report = detect(&series, &cfg)?;
    report.write_csv(output(a.out.as_deref())?)?;
    if let Some(path) = &a.json {
        report.write_json(BufWriter::new(
            File::create(path).map_err(|e| CliError::file(path, e))?,
        ))?;
    }
    eprintln!("flagged {:?}", report.flagged_windows());
    Ok(())
}

pub fn cmd_bench(a: BenchArgs) -> CliResult<()> {
    if a.max_orders.is_empty() || a.max_orders.contains(&0) {
        return Err(CliError::Usage("--max-orders needs positive orders".into()));
    }
    let cfg = BenchConfig {
        max_orders: a.max_orders,
        min_support: a.min_support,
        budget: a.budget,
    };
    let corpus = match &a.input {
        Some(path) => read_corpus(path, false)?,
        None => synthgen::planted::cyclic_corpus(&synthgen::planted::CyclicSpec {
            order: a.planted_order,
            repetitions: a.planted_repetitions,
            ..Default::default()
        })
        .map_err(|e| CliError::Usage(e.to_string()))?,
    };
    let window = corpus
        .window(a.window)
        .ok_or_else(|| CliError::Usage(format!("window {} is not in the corpus", a.window)))?;
    let report = bench::run_bench(window, &cfg)?;
    report.write_csv(output(a.out.as_deref())?)?;
    if let Some(mismatch) = report.mismatches().first() {
        return Err(CliError::Assertion(format!(
            "exhaustive miner at max order {} disagrees with the lazy miner",
            mismatch.requested_max_order.unwrap_or(0)
        )));
    }
    Ok(())
}
