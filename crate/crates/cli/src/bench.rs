//! Lazy versus exhaustive mining on the same window.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use hon_anomaly::corpus::Window;
use hon_anomaly::rule_miner::{MinerConfig, MinerStats, RuleMiner, RuleSet, Strategy};
use hon_anomaly::Error;

use crate::CliResult;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub max_orders: Vec<usize>,
    pub min_support: u64,
    /// Observation budget for exhaustive runs; exceeding it yields a DNF row.
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: &'static str,
    pub requested_max_order: Option<usize>,
    pub status: &'static str,
    pub max_order_found: Option<usize>,
    pub wall_ms: f64,
    pub observations_materialized: Option<u64>,
    pub peak_table_entries: Option<u64>,
    pub peak_rss_kb: Option<u64>,
    pub divergence_tests: Option<u64>,
    pub prunes_by_bound: Option<u64>,
    pub rules: Option<usize>,
    /// `order:count` pairs separated by `;`.
    pub rules_by_order: String,
    /// Rule-set equality with the lazy run, when the comparison applies.
    pub matches_lazy: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn lazy(&self) -> &BenchRow {
        &self.rows[0]
    }

    pub fn exhaustive(&self, max_order: usize) -> Option<&BenchRow> {
        self.rows[1..]
            .iter()
            .find(|r| r.requested_max_order == Some(max_order))
    }

    pub fn mismatches(&self) -> Vec<&BenchRow> {
        self.rows
            .iter()
            .filter(|r| r.matches_lazy == Some(false))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row).map_err(Error::from)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Resets the kernel's peak-RSS counter where supported.
fn reset_peak_rss() {
    let _ = std::fs::write("/proc/self/clear_refs", "5");
}

/// Peak resident set size in kB, where the platform exposes it.
pub fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmHWM:"))
        .and_then(|v| v.trim().trim_end_matches("kB").trim().parse().ok())
}

fn histogram(rules: &RuleSet) -> String {
    rules
        .order_histogram()
        .iter()
        .map(|(k, n)| format!("{k}:{n}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn row(
    algorithm: &'static str,
    requested: Option<usize>,
    elapsed_ms: f64,
    result: &hon_anomaly::Result<(RuleSet, MinerStats)>,
) -> BenchRow {
    match result {
        Ok((rules, s)) => BenchRow {
            algorithm,
            requested_max_order: requested,
            status: "ok",
            max_order_found: Some(rules.max_order_found()),
            wall_ms: elapsed_ms,
            observations_materialized: Some(s.observations_materialized),
            peak_table_entries: Some(s.peak_table_entries),
            peak_rss_kb: peak_rss_kb(),
            divergence_tests: Some(s.divergence_tests),
            prunes_by_bound: Some(s.prunes_by_bound),
            rules: Some(rules.len()),
            rules_by_order: histogram(rules),
            matches_lazy: None,
        },
        Err(_) => BenchRow {
            algorithm,
            requested_max_order: requested,
            status: "dnf",
            max_order_found: None,
            wall_ms: elapsed_ms,
            observations_materialized: None,
            peak_table_entries: None,
            peak_rss_kb: peak_rss_kb(),
            divergence_tests: None,
            prunes_by_bound: None,
            rules: None,
            rules_by_order: String::new(),
            matches_lazy: None,
        },
    }
}

fn timed(
    window: &Window,
    cfg: MinerConfig,
    strategy: Strategy,
) -> (f64, hon_anomaly::Result<(RuleSet, MinerStats)>) {
    reset_peak_rss();
    let start = Instant::now();
    let out = RuleMiner::new(window, cfg, strategy)
        .run()
        .map(|o| (o.rules, o.stats));
    (start.elapsed().as_secs_f64() * 1e3, out)
}

/// One unbounded lazy run, then one exhaustive run per requested order.
///
/// Exhaustive runs whose order limit reaches the lazy run's deepest rule must
/// return the same rule set. Budget overruns become DNF rows; other errors
/// abort.
pub fn run_bench(window: &Window, cfg: &BenchConfig) -> CliResult<BenchReport> {
    let lazy_cfg = MinerConfig {
        min_support: cfg.min_support,
        ..Default::default()
    };
    let (ms, lazy) = timed(window, lazy_cfg, Strategy::Lazy);
    let lazy = lazy?;
    let mut rows = vec![row(Strategy::Lazy.name(), None, ms, &Ok(lazy.clone()))];
    let found = lazy.0.max_order_found();

    for &max_order in &cfg.max_orders {
        let mc = MinerConfig {
            min_support: cfg.min_support,
            max_order: Some(max_order),
            table_budget: cfg.budget,
        };
        let (ms, result) = timed(window, mc, Strategy::Exhaustive);
        if let Err(e) = &result {
            if !matches!(e, Error::BudgetExceeded { .. }) {
                return Err(result.expect_err("error").into());
            }
        }
        let mut r = row(Strategy::Exhaustive.name(), Some(max_order), ms, &result);
        if let Ok((rules, _)) = &result {
            if max_order >= found {
                r.matches_lazy = Some(*rules == lazy.0);
            }
        }
        rows.push(r);
    }
    Ok(BenchReport { rows })
}
