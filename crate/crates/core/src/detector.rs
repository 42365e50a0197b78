//! Change-point detection on a series of consecutive graph distances.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distances::{distance, DistanceError, MetricKind, SpectralParams};
use crate::error::{Error, Result};
use crate::hon_graph::HonGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Fon,
    Hon,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::Fon => "fon",
            Representation::Hon => "hon",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fon" => Ok(Representation::Fon),
            "hon" => Ok(Representation::Hon),
            other => Err(Error::Argument(format!("unknown representation `{other}`"))),
        }
    }
}

/// `d_t` for one window, or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesEntry {
    pub t: usize,
    pub value: std::result::Result<f64, String>,
}

impl SeriesEntry {
    pub fn usable(&self) -> Option<f64> {
        self.value.as_ref().ok().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSeries {
    pub metric: MetricKind,
    pub representation: Representation,
    pub entries: Vec<SeriesEntry>,
}

#[derive(Serialize, Deserialize)]
struct SeriesRow {
    t: usize,
    d: Option<f64>,
    reason: Option<String>,
}

impl DistanceSeries {
    /// Wraps per-pair results; the first entry is `t = 2`.
    pub fn from_results(
        metric: MetricKind,
        representation: Representation,
        results: Vec<std::result::Result<f64, DistanceError>>,
    ) -> Self {
        let entries = results
            .into_iter()
            .enumerate()
            .map(|(i, r)| SeriesEntry {
                t: i + 2,
                value: r.map_err(|e| e.to_string()),
            })
            .collect();
        DistanceSeries {
            metric,
            representation,
            entries,
        }
    }

    pub fn values(&self) -> Vec<Option<f64>> {
        self.entries.iter().map(SeriesEntry::usable).collect()
    }

    pub fn usable_count(&self) -> usize {
        self.entries.iter().filter(|e| e.value.is_ok()).count()
    }

    /// `t,d,reason` with `d` empty on skipped rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for e in &self.entries {
            w.serialize(SeriesRow {
                t: e.t,
                d: e.usable(),
                reason: e.value.as_ref().err().cloned(),
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(
        reader: R,
        metric: MetricKind,
        representation: Representation,
    ) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut entries = Vec::new();
        for (i, row) in r.deserialize::<SeriesRow>().enumerate() {
            let row = row?;
            let value = match (row.d, row.reason) {
                (Some(d), _) if d.is_finite() && d >= 0.0 => Ok(d),
                (Some(d), _) => {
                    return Err(Error::parse(i + 2, format!("distance {d} is not a finite non-negative value")))
                }
                (None, reason) => Err(reason.unwrap_or_else(|| "skipped".into())),
            };
            entries.push(SeriesEntry { t: row.t, value });
        }
        Ok(DistanceSeries {
            metric,
            representation,
            entries,
        })
    }
}

/// `d_t = D(G_{t-1}, G_t)` for every consecutive pair; graph `i` is window `i + 1`.
///
/// Metric failures become skipped entries carrying the error text.
pub fn distance_series(
    graphs: &[HonGraph],
    metric: MetricKind,
    representation: Representation,
    params: &SpectralParams,
) -> Result<DistanceSeries> {
    if graphs.len() < 2 {
        return Err(Error::Argument(format!(
            "a distance series needs at least 2 graphs, got {}",
            graphs.len()
        )));
    }
    params.validate().map_err(|e| Error::Argument(e.to_string()))?;
    let results = graphs
        .windows(2)
        .map(|pair| distance(metric, &pair[0], &pair[1], params))
        .collect();
    Ok(DistanceSeries::from_results(metric, representation, results))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionMode {
    /// Flag `d_t > fixed_threshold`.
    Fixed,
    /// Flag `d_t > mean + sigma_multiplier * sigma` over the previous `window_k` values.
    Running,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub mode: DetectionMode,
    pub fixed_threshold: f64,
    pub window_k: usize,
    pub sigma_multiplier: f64,
    pub sigma_floor: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            mode: DetectionMode::Running,
            fixed_threshold: 0.0,
            window_k: 10,
            sigma_multiplier: 2.0,
            sigma_floor: 1e-12,
        }
    }
}

impl DetectorConfig {
    pub fn fixed(threshold: f64) -> Self {
        DetectorConfig {
            mode: DetectionMode::Fixed,
            fixed_threshold: threshold,
            ..Default::default()
        }
    }

    pub fn running(window_k: usize, sigma_multiplier: f64) -> Self {
        DetectorConfig {
            window_k,
            sigma_multiplier,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == DetectionMode::Running && self.window_k < 2 {
            return Err(Error::Argument("window_k must be at least 2".into()));
        }
        if self.sigma_floor.is_nan() || self.sigma_floor <= 0.0 {
            return Err(Error::Argument("sigma_floor must be positive".into()));
        }
        if !self.sigma_multiplier.is_finite() || !self.fixed_threshold.is_finite() {
            return Err(Error::Argument("thresholds must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyRecord {
    pub t: usize,
    pub d: Option<f64>,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub z: Option<f64>,
    pub flagged: bool,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub metric: String,
    pub representation: Representation,
    pub records: Vec<AnomalyRecord>,
}

impl AnomalyReport {
    pub fn flagged_windows(&self) -> Vec<usize> {
        self.records.iter().filter(|r| r.flagged).map(|r| r.t).collect()
    }

    pub fn record(&self, t: usize) -> Option<&AnomalyRecord> {
        self.records.iter().find(|r| r.t == t)
    }

    /// `t,d,mean,std,z,flagged,reason`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }
}

/// Minimum number of baseline values before a point can be flagged.
pub const MIN_BASELINE: usize = 2;

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Scores every entry against the previous `window_k` usable values.
///
/// Statistics never include `d_t` itself and skipped entries neither update
/// them nor get flagged. In running mode a point needs at least
/// [`MIN_BASELINE`] earlier values to be flagged; the first usable value only
/// seeds the statistics.
pub fn detect(series: &DistanceSeries, config: &DetectorConfig) -> Result<AnomalyReport> {
    config.validate()?;
    if config.mode == DetectionMode::Running && series.usable_count() < config.window_k + 1 {
        return Err(Error::Argument(format!(
            "running detection with window_k = {} needs {} usable entries, got {}",
            config.window_k,
            config.window_k + 1,
            series.usable_count()
        )));
    }
    let mut history: Vec<f64> = Vec::new();
    let mut records = Vec::with_capacity(series.entries.len());
    for entry in &series.entries {
        let Some(d) = entry.usable() else {
            records.push(AnomalyRecord {
                t: entry.t,
                d: None,
                mean: None,
                std: None,
                z: None,
                flagged: false,
                reason: entry.value.as_ref().err().cloned(),
            });
            continue;
        };
        let baseline = &history[history.len().saturating_sub(config.window_k)..];
        let (mean, std, z, above) = if baseline.is_empty() {
            (None, None, None, false)
        } else {
            let (mean, std) = mean_std(baseline);
            let sigma = std.max(config.sigma_floor);
            let z = (d - mean) / sigma;
            let above = baseline.len() >= MIN_BASELINE && d > mean + config.sigma_multiplier * sigma;
            (Some(mean), Some(std), Some(z), above)
        };
        let flagged = match config.mode {
            DetectionMode::Fixed => d > config.fixed_threshold,
            DetectionMode::Running => above,
        };
        records.push(AnomalyRecord {
            t: entry.t,
            d: Some(d),
            mean,
            std,
            z,
            flagged,
            reason: None,
        });
        history.push(d);
    }
    Ok(AnomalyReport {
        metric: series.metric.name().to_owned(),
        representation: series.representation,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: &[f64]) -> DistanceSeries {
        DistanceSeries::from_results(
            MetricKind::Weight,
            Representation::Hon,
            values.iter().map(|&v| Ok(v)).collect(),
        )
    }

    #[test]
    fn constant_history_spike() {
        let r = detect(&series(&[1., 1., 1., 1., 1., 5.]), &DetectorConfig::running(5, 2.0)).unwrap();
        assert_eq!(r.flagged_windows(), vec![7]);
        assert!(r.record(7).unwrap().z.unwrap() > 1e9);
    }

    #[test]
    fn flat_series_has_no_flags() {
        let r = detect(&series(&[0.3; 20]), &DetectorConfig::default()).unwrap();
        assert!(r.flagged_windows().is_empty());
    }

    #[test]
    fn alternating_then_spike() {
        let r = detect(
            &series(&[1., 2., 1., 2., 1., 2., 9.]),
            &DetectorConfig::running(5, 2.0),
        )
        .unwrap();
        assert_eq!(r.flagged_windows(), vec![8]);
        let last = r.record(8).unwrap();
        assert!((last.mean.unwrap() - 1.6).abs() < 1e-12);
        assert!((last.std.unwrap() - 0.4899).abs() < 1e-4);
    }

    #[test]
    fn first_entry_seeds_only() {
        let r = detect(&series(&[5., 1., 1., 1.]), &DetectorConfig::running(2, 2.0)).unwrap();
        let first = r.record(2).unwrap();
        assert!(!first.flagged);
        assert_eq!(first.mean, None);
    }

    #[test]
    fn skipped_entries_are_kept_and_ignored() {
        let mut s = series(&[1., 1., 1., 1.]);
        s.entries.insert(
            2,
            SeriesEntry {
                t: 0,
                value: Err("empty".into()),
            },
        );
        for (i, e) in s.entries.iter_mut().enumerate() {
            e.t = i + 2;
        }
        let r = detect(&s, &DetectorConfig::running(3, 2.0)).unwrap();
        assert_eq!(r.records.len(), 5);
        let skipped = r.record(4).unwrap();
        assert!(!skipped.flagged);
        assert_eq!(skipped.reason.as_deref(), Some("empty"));
        assert_eq!(r.record(5).unwrap().mean, Some(1.0));
    }

    #[test]
    fn too_few_entries() {
        assert!(detect(&series(&[1., 2.]), &DetectorConfig::running(5, 2.0)).is_err());
        assert!(detect(&series(&[1., 2.]), &DetectorConfig::running(1, 2.0)).is_err());
    }

    #[test]
    fn fixed_mode() {
        let r = detect(&series(&[0.1, 0.5, 0.2]), &DetectorConfig::fixed(0.3)).unwrap();
        assert_eq!(r.flagged_windows(), vec![3]);
    }

    #[test]
    fn series_from_graphs() {
        use crate::hon_graph::HonNode;
        let mk = |w: f64| {
            HonGraph::from_edges([(
                HonNode::parse_canonical("a").unwrap(),
                HonNode::parse_canonical("b").unwrap(),
                w,
            )])
            .unwrap()
        };
        let (g, h) = (mk(2.0), mk(1.0));
        let s = distance_series(
            &[g.clone(), g, h.clone(), h],
            MetricKind::Weight,
            Representation::Hon,
            &SpectralParams::default(),
        )
        .unwrap();
        assert_eq!(s.values(), vec![Some(0.0), Some(0.5), Some(0.0)]);
        assert_eq!(s.entries[0].t, 2);
        assert!(distance_series(&[mk(1.0)], MetricKind::Weight, Representation::Hon, &SpectralParams::default()).is_err());
    }

    #[test]
    fn csv_layouts() {
        let mut s = series(&[0.5, 0.25]);
        s.entries[1].value = Err("graphs share no edges".into());
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "t,d,reason\n2,0.5,\n3,,graphs share no edges\n"
        );
        let back = DistanceSeries::read_csv(buf.as_slice(), s.metric, s.representation).unwrap();
        assert_eq!(back, s);

        let r = detect(&s, &DetectorConfig::fixed(0.1)).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,d,mean,std,z,flagged,reason\n2,0.5,,,,true,\n"), "{text}");
        let mut json = Vec::new();
        r.write_json(&mut json).unwrap();
        let parsed: AnomalyReport = serde_json::from_slice(&json).unwrap();
        assert_eq!(parsed, r);
    }
}
