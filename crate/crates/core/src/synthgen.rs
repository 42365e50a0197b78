//! Synthetic web clickstreams with known change points.
//!
//! Pages sit on a wrapping `side x side` grid and users only move right or
//! down. The run is split into eleven regimes of `windows_per_regime`
//! windows each; every regime switches on, flips or adds a set of
//! dependency rules of first, second or third order. Several regimes are
//! built so that aggregate page-to-page traffic stays put while the
//! conditional traffic changes.

pub mod planted;

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Name written into generated headers for the random number generator.
pub const RNG_NAME: &str = "chacha8";

pub const REGIME_COUNT: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub side: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { side: 10 }
    }
}

impl GridSpec {
    pub fn new(side: usize) -> Result<Self> {
        // Regime triggers reference rows and columns up to 9.
        if side < 10 {
            return Err(Error::Argument(format!("grid side must be at least 10, got {side}")));
        }
        Ok(GridSpec { side })
    }

    pub fn pages(&self) -> usize {
        self.side * self.side
    }

    pub fn page(&self, row: usize, col: usize) -> usize {
        row * self.side + col
    }

    pub fn right(&self, page: usize) -> usize {
        let (r, c) = (page / self.side, page % self.side);
        self.page(r, (c + 1) % self.side)
    }

    pub fn down(&self, page: usize) -> usize {
        let (r, c) = (page / self.side, page % self.side);
        self.page((r + 1) % self.side, c)
    }

    /// Zero-padded row-major label: `00`..`99` on the default grid.
    pub fn label(&self, page: usize) -> String {
        let width = (self.pages() - 1).to_string().len();
        format!("{page:0width$}")
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.pages()).map(|p| self.label(p)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AnomalyClass {
    First,
    Second,
    Third,
    Complementary,
    Mixed,
}

impl AnomalyClass {
    pub fn name(self) -> &'static str {
        match self {
            AnomalyClass::First => "first",
            AnomalyClass::Second => "second",
            AnomalyClass::Third => "third",
            AnomalyClass::Complementary => "complementary",
            AnomalyClass::Mixed => "mixed",
        }
    }

    /// Boundaries a first-order view cannot see by construction.
    pub fn is_fon_invisible(self) -> bool {
        matches!(self, AnomalyClass::Complementary | AnomalyClass::Mixed)
    }
}

impl fmt::Display for AnomalyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnomalyClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "first" => AnomalyClass::First,
            "second" => AnomalyClass::Second,
            "third" => AnomalyClass::Third,
            "complementary" => AnomalyClass::Complementary,
            "mixed" => AnomalyClass::Mixed,
            other => return Err(Error::Argument(format!("unknown anomaly class `{other}`"))),
        })
    }
}

/// A page path given as two-digit `row col` codes of the 10x10 layout,
/// oldest first. `[27, 28]` means "came from row 2 col 7 to row 2 col 8".
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeRule {
    pub trigger: Vec<u8>,
    pub p_right: f64,
}

impl RegimeRule {
    fn new(trigger: &[u8], p_right: f64) -> Self {
        RegimeRule {
            trigger: trigger.to_vec(),
            p_right,
        }
    }

    pub fn order(&self) -> usize {
        self.trigger.len()
    }

    /// Trigger as page indices on `grid`.
    pub fn pages(&self, grid: &GridSpec) -> Vec<usize> {
        self.trigger
            .iter()
            .map(|&code| grid.page((code / 10) as usize, (code % 10) as usize))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Regime {
    /// 1-based.
    pub index: usize,
    pub rules: Vec<RegimeRule>,
    /// Class of the change that starts this regime; `None` for the first.
    pub class: Option<AnomalyClass>,
}

/// The eleven cumulative regimes.
pub fn regime_table() -> Vec<Regime> {
    let r = RegimeRule::new;
    let mut active: Vec<RegimeRule> = Vec::new();
    let mut out = vec![Regime {
        index: 1,
        rules: Vec::new(),
        class: None,
    }];
    let mut push = |active: &Vec<RegimeRule>, class| {
        let index = out.len() + 1;
        out.push(Regime {
            index,
            rules: active.clone(),
            class: Some(class),
        });
    };
    let set = |active: &mut Vec<RegimeRule>, trigger: &[u8], p: f64| {
        match active.iter_mut().find(|x| x.trigger == trigger) {
            Some(rule) => rule.p_right = p,
            None => active.push(r(trigger, p)),
        }
    };

    // 2: first-order rules.
    for page in [0u8, 3, 6] {
        set(&mut active, &[page], 0.9);
    }
    push(&active, AnomalyClass::First);
    // 3: flipped.
    for page in [0u8, 3, 6] {
        set(&mut active, &[page], 0.1);
    }
    push(&active, AnomalyClass::First);
    // 4: second order.
    set(&mut active, &[27, 28], 0.9);
    push(&active, AnomalyClass::Second);
    // 5, 6: complementary second order.
    let pairs2: [(&[u8], &[u8]); 2] = [(&[30, 31], &[21, 31]), (&[34, 35], &[25, 35])];
    for (right, down) in pairs2 {
        set(&mut active, right, 0.9);
        set(&mut active, down, 0.1);
    }
    push(&active, AnomalyClass::Complementary);
    for (right, down) in pairs2 {
        set(&mut active, right, 0.1);
        set(&mut active, down, 0.9);
    }
    push(&active, AnomalyClass::Complementary);
    // 7: third order.
    set(&mut active, &[61, 71, 81], 0.9);
    push(&active, AnomalyClass::Third);
    // 8, 9: complementary third order.
    let pairs3: [(&[u8], &[u8]); 2] = [(&[64, 74, 84], &[73, 74, 84]), (&[67, 77, 87], &[76, 77, 87])];
    for (right, down) in pairs3 {
        set(&mut active, right, 0.9);
        set(&mut active, down, 0.1);
    }
    push(&active, AnomalyClass::Complementary);
    for (right, down) in pairs3 {
        set(&mut active, right, 0.1);
        set(&mut active, down, 0.9);
    }
    push(&active, AnomalyClass::Complementary);
    // 10, 11: third order offset by a first-order rule on the same page.
    set(&mut active, &[39, 49, 59], 0.9);
    set(&mut active, &[59], 11.0 / 30.0);
    push(&active, AnomalyClass::Mixed);
    set(&mut active, &[39, 49, 59], 0.1);
    set(&mut active, &[59], 19.0 / 30.0);
    push(&active, AnomalyClass::Mixed);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub grid: GridSpec,
    pub n_users: usize,
    pub steps_per_user: usize,
    pub windows_per_regime: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            grid: GridSpec::default(),
            n_users: 1000,
            steps_per_user: 100,
            windows_per_regime: 10,
            seed: 42,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        GridSpec::new(self.grid.side)?;
        if self.n_users == 0 || self.steps_per_user == 0 || self.windows_per_regime == 0 {
            return Err(Error::Argument(
                "users, steps and windows per regime must all be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn total_windows(&self) -> usize {
        REGIME_COUNT * self.windows_per_regime
    }

    /// Regime (1-based) active in window `t` (1-based).
    pub fn regime_of(&self, t: usize) -> usize {
        (t - 1) / self.windows_per_regime + 1
    }

    pub fn ground_truth(&self) -> GroundTruth {
        let boundaries = regime_table()
            .into_iter()
            .filter_map(|regime| {
                regime.class.map(|class| Boundary {
                    window: (regime.index - 1) * self.windows_per_regime + 1,
                    regime: regime.index,
                    class,
                })
            })
            .collect();
        GroundTruth { boundaries }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Boundary {
    /// First window of the new regime.
    pub window: usize,
    pub regime: usize,
    pub class: AnomalyClass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub boundaries: Vec<Boundary>,
}

impl GroundTruth {
    /// `<boundary-window> <anomaly-class>` per line.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for b in &self.boundaries {
            writeln!(out, "{} {}", b.window, b.class)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Regime numbers are assigned by position: the first boundary starts regime 2.
    pub fn parse<R: Read>(reader: R) -> Result<GroundTruth> {
        let mut boundaries = Vec::new();
        for (n, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_ascii_whitespace().collect();
            let [window, class] = fields.as_slice() else {
                return Err(Error::parse(n + 1, "expected `<window> <class>`"));
            };
            let window: usize = window
                .parse()
                .map_err(|_| Error::parse(n + 1, format!("bad window `{window}`")))?;
            let class = class
                .parse()
                .map_err(|e: Error| Error::parse(n + 1, e.to_string()))?;
            boundaries.push(Boundary {
                window,
                regime: boundaries.len() + 2,
                class,
            });
        }
        Ok(GroundTruth { boundaries })
    }
}

/// Per-regime lookup of `p_right` by trigger.
struct RuleLookup {
    first: Vec<Option<f64>>,
    second: HashMap<(usize, usize), f64>,
    third: HashMap<(usize, usize, usize), f64>,
}

impl RuleLookup {
    fn new(grid: &GridSpec, rules: &[RegimeRule]) -> Self {
        let mut lookup = RuleLookup {
            first: vec![None; grid.pages()],
            second: HashMap::new(),
            third: HashMap::new(),
        };
        for rule in rules {
            match rule.pages(grid).as_slice() {
                [a] => lookup.first[*a] = Some(rule.p_right),
                [a, b] => {
                    lookup.second.insert((*a, *b), rule.p_right);
                }
                [a, b, c] => {
                    lookup.third.insert((*a, *b, *c), rule.p_right);
                }
                _ => unreachable!("regime rules are first to third order"),
            }
        }
        lookup
    }

    /// Highest-order match wins; 0.5 when nothing matches.
    fn p_right(&self, history: &[usize]) -> f64 {
        let n = history.len();
        let cur = history[n - 1];
        if n >= 3 {
            if let Some(&p) = self.third.get(&(history[n - 3], history[n - 2], cur)) {
                return p;
            }
        }
        if n >= 2 {
            if let Some(&p) = self.second.get(&(history[n - 2], cur)) {
                return p;
            }
        }
        self.first[cur].unwrap_or(0.5)
    }
}

/// Writes the scenario corpus to `out` and returns its ground truth.
///
/// Each user starts every window on a uniformly drawn page and makes
/// `steps_per_user` moves, so every trajectory has `steps_per_user + 1` pages.
pub fn generate_to<W: Write>(config: &ScenarioConfig, out: W) -> Result<GroundTruth> {
    config.validate()?;
    let grid = config.grid;
    let labels = grid.labels();
    let lookups: Vec<RuleLookup> = regime_table()
        .iter()
        .map(|r| RuleLookup::new(&grid, &r.rules))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = BufWriter::new(out);
    writeln!(
        out,
        "# synthetic clickstream side={} users={} steps={} windows_per_regime={} rng={} seed={}",
        grid.side, config.n_users, config.steps_per_user, config.windows_per_regime, RNG_NAME, config.seed
    )?;
    let mut path = Vec::with_capacity(config.steps_per_user + 1);
    let mut line = String::new();
    for t in 1..=config.total_windows() {
        let lookup = &lookups[config.regime_of(t) - 1];
        for user in 0..config.n_users {
            path.clear();
            path.push(rng.random_range(0..grid.pages()));
            for _ in 0..config.steps_per_user {
                let cur = *path.last().expect("non-empty");
                let p = lookup.p_right(&path);
                let next = if rng.random::<f64>() < p {
                    grid.right(cur)
                } else {
                    grid.down(cur)
                };
                path.push(next);
            }
            line.clear();
            line.push_str(&format!("{t} u{user}"));
            for &page in &path {
                line.push(' ');
                line.push_str(&labels[page]);
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
    }
    out.flush()?;
    Ok(config.ground_truth())
}

/// Writes the corpus to `path` and the ground truth next to it as
/// `<path>.truth`, returning the ground truth.
pub fn generate(config: &ScenarioConfig, path: impl AsRef<Path>) -> Result<GroundTruth> {
    let path = path.as_ref();
    let truth = generate_to(config, File::create(path)?)?;
    truth.write(BufWriter::new(File::create(truth_path(path))?))?;
    Ok(truth)
}

/// Companion ground-truth path for a corpus file.
pub fn truth_path(corpus: &Path) -> std::path::PathBuf {
    let mut name = corpus.as_os_str().to_owned();
    name.push(".truth");
    name.into()
}
