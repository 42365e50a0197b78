//! Empirical checks of a generated scenario against its configured rules.

#![allow(dead_code)]

use hon_anomaly::corpus::Corpus;
use hon_anomaly::synthgen::{regime_table, GridSpec, RegimeRule, ScenarioConfig};

#[derive(Debug, Clone)]
pub struct RuleCheck {
    pub regime: usize,
    pub trigger: Vec<u8>,
    pub expected: f64,
    pub n: u64,
    pub observed: f64,
    pub se: f64,
}

impl RuleCheck {
    pub fn ok(&self) -> bool {
        self.n > 0 && (self.observed - self.expected).abs() <= 3.0 * self.se
    }
}

#[derive(Debug, Clone)]
pub struct SplitCheck {
    pub window: usize,
    pub page: usize,
    pub before: (u64, u64),
    pub after: (u64, u64),
}

impl SplitCheck {
    fn rate((right, n): (u64, u64)) -> f64 {
        right as f64 / n as f64
    }

    pub fn se(&self) -> f64 {
        let v = |c: (u64, u64)| {
            let p = Self::rate(c);
            p * (1.0 - p) / c.1 as f64
        };
        (v(self.before) + v(self.after)).sqrt()
    }

    pub fn diff(&self) -> f64 {
        Self::rate(self.after) - Self::rate(self.before)
    }

    pub fn ok(&self) -> bool {
        self.before.1 > 0 && self.after.1 > 0 && self.diff().abs() <= 3.0 * self.se()
    }
}

fn pages_of(corpus: &Corpus, window: usize) -> Vec<Vec<usize>> {
    let w = corpus.window(window).expect("window present");
    w.trajectories()
        .iter()
        .map(|t| {
            t.steps
                .iter()
                .map(|&e| corpus.vocab().label(e).parse().expect("numeric page label"))
                .collect()
        })
        .collect()
}

/// Index of the rule in force after `history`: longest matching trigger.
fn in_force(rules: &[(Vec<usize>, f64)], history: &[usize]) -> Option<usize> {
    rules
        .iter()
        .enumerate()
        .filter(|(_, (trigger, _))| history.ends_with(trigger))
        .max_by_key(|(_, (trigger, _))| trigger.len())
        .map(|(i, _)| i)
}

/// One check per configured rule and regime, plus one pooled check per regime
/// (empty trigger) for moves where no rule applies.
pub fn rule_checks(corpus: &Corpus, cfg: &ScenarioConfig) -> Vec<RuleCheck> {
    let grid: GridSpec = cfg.grid;
    let mut out = Vec::new();
    for regime in regime_table() {
        let rules: Vec<(Vec<usize>, f64)> = regime
            .rules
            .iter()
            .map(|r: &RegimeRule| (r.pages(&grid), r.p_right))
            .collect();
        let mut counts = vec![(0u64, 0u64); rules.len() + 1];
        for t in 1..=cfg.total_windows() {
            if cfg.regime_of(t) != regime.index {
                continue;
            }
            for path in pages_of(corpus, t) {
                for i in 0..path.len() - 1 {
                    let slot = in_force(&rules, &path[..=i]).unwrap_or(rules.len());
                    counts[slot].1 += 1;
                    if path[i + 1] == grid.right(path[i]) {
                        counts[slot].0 += 1;
                    }
                }
            }
        }
        let triggers = regime
            .rules
            .iter()
            .map(|r| (r.trigger.clone(), r.p_right))
            .chain([(Vec::new(), 0.5)]);
        for ((trigger, expected), (right, n)) in triggers.zip(counts) {
            out.push(RuleCheck {
                regime: regime.index,
                trigger,
                expected,
                n,
                observed: if n == 0 { f64::NAN } else { right as f64 / n as f64 },
                se: (expected * (1.0 - expected) / n as f64).sqrt(),
            });
        }
    }
    out
}

/// First-order right-move split of `page` over all windows of `regime`.
fn split(corpus: &Corpus, cfg: &ScenarioConfig, regime: usize, page: usize) -> (u64, u64) {
    let (mut right, mut n) = (0, 0);
    for t in 1..=cfg.total_windows() {
        if cfg.regime_of(t) != regime {
            continue;
        }
        for path in pages_of(corpus, t) {
            for pair in path.windows(2).filter(|p| p[0] == page) {
                n += 1;
                right += u64::from(pair[1] == cfg.grid.right(page));
            }
        }
    }
    (right, n)
}

/// For each first-order-invisible boundary, the pages whose rules changed,
/// compared between the regimes on either side.
pub fn complementarity_checks(corpus: &Corpus, cfg: &ScenarioConfig) -> Vec<SplitCheck> {
    let table = regime_table();
    let mut out = Vec::new();
    for b in cfg.ground_truth().boundaries {
        if !b.class.is_fon_invisible() {
            continue;
        }
        let (prev, next) = (&table[b.regime - 2], &table[b.regime - 1]);
        let mut pages: Vec<usize> = next
            .rules
            .iter()
            .filter(|r| !prev.rules.contains(r))
            .map(|r| *r.pages(&cfg.grid).last().expect("non-empty trigger"))
            .collect();
        pages.sort_unstable();
        pages.dedup();
        for page in pages {
            out.push(SplitCheck {
                window: b.window,
                page,
                before: split(corpus, cfg, prev.index, page),
                after: split(corpus, cfg, next.index, page),
            });
        }
    }
    out
}
