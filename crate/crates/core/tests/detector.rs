use hon_anomaly::detector::{
    detect, DetectorConfig, DistanceSeries, Representation, SeriesEntry, MIN_BASELINE,
};
use hon_anomaly::distances::MetricKind;
use proptest::prelude::*;

fn series(values: &[Option<f64>]) -> DistanceSeries {
    DistanceSeries {
        metric: MetricKind::Weight,
        representation: Representation::Hon,
        entries: values
            .iter()
            .enumerate()
            .map(|(i, v)| SeriesEntry {
                t: i + 2,
                value: v.ok_or_else(|| "skipped".to_owned()),
            })
            .collect(),
    }
}

fn values() -> impl Strategy<Value = Vec<Option<f64>>> {
    prop::collection::vec(prop::option::weighted(0.9, 0.0f64..1.0), 12..60)
}

/// Flags recomputed from scratch for each point.
fn naive_flags(values: &[Option<f64>], k: usize, m: f64) -> Vec<usize> {
    let mut flags = Vec::new();
    for (i, v) in values.iter().enumerate() {
        let Some(d) = v else { continue };
        let prev: Vec<f64> = values[..i].iter().flatten().copied().collect();
        let base = &prev[prev.len().saturating_sub(k)..];
        if base.len() < MIN_BASELINE {
            continue;
        }
        let n = base.len() as f64;
        let mean = base.iter().sum::<f64>() / n;
        let std = (base.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        if *d > mean + m * std.max(1e-12) {
            flags.push(i + 2);
        }
    }
    flags
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn running_flags_match_naive_recomputation(v in values(), k in 2usize..12, m in 0.5f64..4.0) {
        let s = series(&v);
        prop_assume!(s.usable_count() > k);
        let r = detect(&s, &DetectorConfig::running(k, m)).unwrap();
        prop_assert_eq!(r.flagged_windows(), naive_flags(&v, k, m));
    }

    #[test]
    fn scale_invariance(v in values(), c in 0.01f64..100.0) {
        let s = series(&v);
        prop_assume!(s.usable_count() > 10);
        let scaled: Vec<Option<f64>> = v.iter().map(|x| x.map(|x| x * c)).collect();
        let cfg = DetectorConfig::default();
        let a = detect(&s, &cfg).unwrap();
        let b = detect(&series(&scaled), &cfg).unwrap();
        for (x, y) in a.records.iter().zip(&b.records) {
            match (x.z, y.z) {
                (Some(p), Some(q)) => {
                    // skip near-ties, where rounding may flip the comparison
                    let margin = (p - cfg.sigma_multiplier).abs();
                    if x.std.unwrap() > 1e-9 && margin > 1e-6 {
                        prop_assert!((p - q).abs() < 1e-6 * p.abs().max(1.0));
                        prop_assert_eq!(x.flagged, y.flagged);
                    }
                }
                (p, q) => prop_assert_eq!(p.is_none(), q.is_none()),
            }
        }
    }

    #[test]
    fn causality(v in values(), cut in 0usize..60) {
        let s = series(&v);
        prop_assume!(s.usable_count() > 10);
        let cfg = DetectorConfig::default();
        let full = detect(&s, &cfg).unwrap();
        let keep = cut.min(v.len());
        let prefix = series(&v[..keep]);
        if let Ok(part) = detect(&prefix, &cfg) {
            prop_assert_eq!(&full.records[..keep], &part.records[..]);
        }
        // changing the future never changes the past
        let mut altered = v.clone();
        for x in altered.iter_mut().skip(keep) {
            *x = x.map(|x| x * 7.0 + 1.0);
        }
        let other = detect(&series(&altered), &cfg).unwrap();
        prop_assert_eq!(&full.records[..keep], &other.records[..keep]);
    }

    #[test]
    fn fixed_mode_is_monotone(v in values(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = (a.min(b), a.max(b));
        let s = series(&v);
        let flo = detect(&s, &DetectorConfig::fixed(lo)).unwrap().flagged_windows();
        let fhi = detect(&s, &DetectorConfig::fixed(hi)).unwrap().flagged_windows();
        prop_assert!(fhi.iter().all(|t| flo.contains(t)));
        let expected: Vec<usize> = v
            .iter()
            .enumerate()
            .filter(|(_, x)| x.is_some_and(|x| x > hi))
            .map(|(i, _)| i + 2)
            .collect();
        prop_assert_eq!(fhi, expected);
    }

    #[test]
    fn series_csv_round_trips(v in values()) {
        let s = series(&v);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = DistanceSeries::read_csv(buf.as_slice(), MetricKind::Weight, Representation::Hon).unwrap();
        prop_assert_eq!(back, s);
    }
}

#[test]
fn short_series_is_rejected_in_running_mode() {
    let s = series(&[Some(0.1); 10]);
    assert!(detect(&s, &DetectorConfig::default()).is_err());
    assert!(detect(&s, &DetectorConfig::running(9, 2.0)).is_ok());
    assert!(detect(&s, &DetectorConfig::fixed(0.5)).is_ok());
}
