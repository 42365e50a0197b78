//! End-to-end run: windows to graphs to distance series to reports.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use hon_anomaly::corpus::Corpus;
use hon_anomaly::detector::{
    detect, AnomalyReport, DetectorConfig, DistanceSeries, Representation,
};
use hon_anomaly::distances::{
    distance, laplacian_spectrum, spectral_distance_from_spectra, MetricKind, SpectralParams,
};
use hon_anomaly::hon_graph::{build_graph, HonGraph};
use hon_anomaly::rule_miner::{mine_rules_plus, MinerConfig};
use hon_anomaly::synthgen::{AnomalyClass, GroundTruth};

use crate::{read_corpus, CliError, CliResult};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub representation: Representation,
    pub metrics: Vec<MetricKind>,
    pub miner: MinerConfig,
    pub dedupe: bool,
    pub detector: DetectorConfig,
    pub spectral: SpectralParams,
    pub truth: Option<PathBuf>,
    pub slack: usize,
    pub write_graphs: bool,
    pub jobs: usize,
    pub out_dir: PathBuf,
}

#[derive(Debug)]
pub struct PipelineOutcome {
    /// Index of the first window; graph `i` belongs to window `first_window + i`.
    pub first_window: usize,
    pub graphs: Vec<HonGraph>,
    pub series: Vec<DistanceSeries>,
    pub reports: Vec<AnomalyReport>,
    pub evaluation: Option<Evaluation>,
}

/// Mining settings for a representation: first-order networks use bigrams only.
pub fn effective_miner(representation: Representation, miner: &MinerConfig) -> MinerConfig {
    match representation {
        Representation::Fon => MinerConfig {
            max_order: Some(1),
            ..miner.clone()
        },
        Representation::Hon => miner.clone(),
    }
}

/// One graph per window, in window order.
pub fn build_graphs(
    corpus: &Corpus,
    representation: Representation,
    miner: &MinerConfig,
) -> hon_anomaly::Result<Vec<HonGraph>> {
    let cfg = effective_miner(representation, miner);
    corpus
        .windows()
        .par_iter()
        .map(|w| {
            let (rules, _) = mine_rules_plus(w, &cfg)?;
            if rules.is_empty() {
                return Ok(HonGraph::default());
            }
            build_graph(&rules)
        })
        .collect()
}

/// Distances between consecutive graphs, computed in parallel.
pub fn series_for(
    graphs: &[HonGraph],
    metric: MetricKind,
    representation: Representation,
    params: &SpectralParams,
) -> hon_anomaly::Result<DistanceSeries> {
    if graphs.len() < 2 {
        return Err(hon_anomaly::Error::Argument(format!(
            "need at least 2 windows, got {}",
            graphs.len()
        )));
    }
    let results = if metric == MetricKind::Spectral {
        let spectra: Vec<Vec<f64>> = graphs.par_iter().map(laplacian_spectrum).collect();
        spectra
            .par_windows(2)
            .map(|p| spectral_distance_from_spectra(&p[0], &p[1], params.num_eigenvalues))
            .collect()
    } else {
        graphs
            .par_windows(2)
            .map(|p| distance(metric, &p[0], &p[1], params))
            .collect()
    };
    Ok(DistanceSeries::from_results(metric, representation, results))
}

/// Mining, graphs, series and reports without touching the file system.
pub fn analyze(
    corpus: &Corpus,
    representation: Representation,
    metrics: &[MetricKind],
    miner: &MinerConfig,
    detector: &DetectorConfig,
    spectral: &SpectralParams,
) -> hon_anomaly::Result<PipelineOutcome> {
    if corpus.windows().len() < 2 {
        return Err(hon_anomaly::Error::Argument(format!(
            "the pipeline needs at least 2 windows, got {}",
            corpus.windows().len()
        )));
    }
    let graphs = build_graphs(corpus, representation, miner)?;
    let first_window = corpus.windows()[0].index();
    let mut series = Vec::with_capacity(metrics.len());
    let mut reports = Vec::with_capacity(metrics.len());
    for &metric in metrics {
        let mut s = series_for(&graphs, metric, representation, spectral)?;
        for e in &mut s.entries {
            e.t += first_window - 1;
        }
        reports.push(detect(&s, detector)?);
        series.push(s);
    }
    Ok(PipelineOutcome {
        first_window,
        graphs,
        series,
        reports,
        evaluation: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryResult {
    pub metric: String,
    pub representation: Representation,
    pub window: usize,
    pub class: String,
    pub d: Option<f64>,
    pub z: Option<f64>,
    pub detected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub metric: String,
    pub representation: Representation,
    pub boundaries: usize,
    pub detected: usize,
    pub flagged: usize,
    pub true_flags: usize,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub boundaries: Vec<BoundaryResult>,
    pub summaries: Vec<MetricSummary>,
}

impl Evaluation {
    pub fn boundary(&self, metric: MetricKind, window: usize) -> Option<&BoundaryResult> {
        self.boundaries
            .iter()
            .find(|b| b.metric == metric.name() && b.window == window)
    }
}

/// Scores reports against ground truth. A boundary is detected when a flag
/// falls within `slack` windows of it; precision counts flags near any boundary.
pub fn evaluate(reports: &[AnomalyReport], truth: &GroundTruth, slack: usize) -> Evaluation {
    let near = |t: usize, b: usize| t.abs_diff(b) <= slack;
    let mut boundaries = Vec::new();
    let mut summaries = Vec::new();
    for report in reports {
        let flags = report.flagged_windows();
        let mut detected = 0;
        for b in &truth.boundaries {
            let rec = report.record(b.window);
            let hit = flags.iter().any(|&t| near(t, b.window));
            detected += usize::from(hit);
            boundaries.push(BoundaryResult {
                metric: report.metric.clone(),
                representation: report.representation,
                window: b.window,
                class: b.class.name().to_owned(),
                d: rec.and_then(|r| r.d),
                z: rec.and_then(|r| r.z),
                detected: hit,
            });
        }
        let true_flags = flags
            .iter()
            .filter(|&&t| truth.boundaries.iter().any(|b| near(t, b.window)))
            .count();
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        summaries.push(MetricSummary {
            metric: report.metric.clone(),
            representation: report.representation,
            boundaries: truth.boundaries.len(),
            detected,
            flagged: flags.len(),
            true_flags,
            precision: ratio(true_flags, flags.len()),
            recall: ratio(detected, truth.boundaries.len()),
        });
    }
    Evaluation {
        boundaries,
        summaries,
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| CliError::file(path, e))?,
    ))
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in rows {
        w.serialize(row)
            .map_err(|e| CliError::file(path, hon_anomaly::Error::from(e)))?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the pipeline with a `jobs`-thread pool and writes every artifact.
pub fn run_pipeline(cfg: &PipelineConfig) -> CliResult<PipelineOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} threads: {e}", cfg.jobs)))?;
    let corpus = read_corpus(&cfg.input, cfg.dedupe)?;
    let truth = match &cfg.truth {
        Some(path) => {
            let file = File::open(path).map_err(|e| CliError::file(path, e))?;
            Some(GroundTruth::parse(file).map_err(|e| CliError::file(path, e))?)
        }
        None => None,
    };
    let mut outcome = pool.install(|| {
        analyze(
            &corpus,
            cfg.representation,
            &cfg.metrics,
            &cfg.miner,
            &cfg.detector,
            &cfg.spectral,
        )
    })?;

    fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError::file(&cfg.out_dir, e))?;
    if cfg.write_graphs {
        let dir = cfg.out_dir.join("graphs");
        fs::create_dir_all(&dir).map_err(|e| CliError::file(&dir, e))?;
        for (i, g) in outcome.graphs.iter().enumerate() {
            let path = dir.join(format!("window_{:05}.txt", outcome.first_window + i));
            g.write(create(&path)?)
                .map_err(|e| CliError::file(&path, e))?;
        }
    }
    for (series, report) in outcome.series.iter().zip(&outcome.reports) {
        let name = series.metric.name();
        let path = cfg.out_dir.join(format!("series_{name}.csv"));
        series.write_csv(create(&path)?).map_err(|e| CliError::file(&path, e))?;
        let path = cfg.out_dir.join(format!("report_{name}.csv"));
        report.write_csv(create(&path)?).map_err(|e| CliError::file(&path, e))?;
        let path = cfg.out_dir.join(format!("report_{name}.json"));
        report.write_json(create(&path)?).map_err(|e| CliError::file(&path, e))?;
    }
    if let Some(truth) = truth {
        let eval = evaluate(&outcome.reports, &truth, cfg.slack);
        write_rows(&cfg.out_dir.join("evaluation.csv"), &eval.boundaries)?;
        write_rows(&cfg.out_dir.join("evaluation_summary.csv"), &eval.summaries)?;
        outcome.evaluation = Some(eval);
    }
    let mut skipped = 0;
    for s in &outcome.series {
        skipped += s.entries.len() - s.usable_count();
    }
    if skipped > 0 {
        let mut err = std::io::stderr().lock();
        let _ = writeln!(err, "warning: {skipped} distance values were skipped");
    }
    Ok(outcome)
}

/// Whether a boundary class is one a first-order view cannot see.
pub fn fon_invisible(class: &str) -> bool {
    class
        .parse::<AnomalyClass>()
        .map(AnomalyClass::is_fon_invisible)
        .unwrap_or(false)
}
