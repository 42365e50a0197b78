//! Variable-order dependency rule extraction.
//!
//! Rules are grown one preceding step at a time. An extended context is
//! accepted when the KL divergence (base 2) between its next-step
//! distribution and the distribution of the last accepted context on the
//! same branch exceeds the dynamic threshold
//!
//! ```text
//! threshold = order_ext / log2(1 + support_ext)
//! ```
//!
//! Two strategies share the growing procedure:
//!
//! * [`Strategy::Lazy`] builds first-order observations only, then derives
//!   higher-order observations on demand from a position index (every
//!   occurrence of `[s_{t-k-1}, .., s_t]` sits at an occurrence of
//!   `[s_{t-k}, .., s_t]`). A branch stops as soon as the largest divergence
//!   any extension could reach, `-log2(min P)`, falls below the smallest
//!   threshold an extension can face. No order limit is needed.
//! * [`Strategy::Exhaustive`] counts every n-gram up to a fixed maximum
//!   order before growing and never prunes. It is the reference the lazy
//!   strategy is checked against.

use std::borrow::Borrow;
use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Read, Write};
use std::sync::Arc;

use crate::corpus::{Entity, EntityId, Vocabulary, Window};
use crate::error::{Error, Result};

/// A conditioning path, oldest entity first. Its order is its length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextPath(Vec<EntityId>);

impl ContextPath {
    pub fn new(entities: Vec<EntityId>) -> Self {
        assert!(!entities.is_empty(), "context path needs at least one entity");
        ContextPath(entities)
    }

    pub fn single(entity: EntityId) -> Self {
        ContextPath(vec![entity])
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn entities(&self) -> &[EntityId] {
        &self.0
    }

    /// The most recent entity.
    pub fn last(&self) -> EntityId {
        *self.0.last().expect("non-empty")
    }

    /// The order-(k-1) path obtained by dropping the oldest entity.
    pub fn suffix(&self) -> Option<ContextPath> {
        (self.0.len() > 1).then(|| ContextPath(self.0[1..].to_vec()))
    }

    /// Prepends one older entity.
    pub fn extended(&self, preceding: EntityId) -> ContextPath {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(preceding);
        v.extend_from_slice(&self.0);
        ContextPath(v)
    }

    pub fn labels<'v>(&self, vocab: &'v Vocabulary) -> Vec<&'v str> {
        self.0.iter().map(|&e| vocab.label(e)).collect()
    }
}

impl Borrow<[EntityId]> for ContextPath {
    fn borrow(&self) -> &[EntityId] {
        &self.0
    }
}

/// Next-step counts of one context.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NextStepDistribution {
    counts: BTreeMap<EntityId, u64>,
    support: u64,
}

impl NextStepDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (EntityId, u64)>) -> Self {
        let mut d = Self::new();
        for (e, c) in counts {
            d.add(e, c);
        }
        d
    }

    pub fn add(&mut self, next: EntityId, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(next).or_insert(0) += count;
        self.support += count;
    }

    pub fn increment(&mut self, next: EntityId) {
        self.add(next, 1);
    }

    pub fn support(&self) -> u64 {
        self.support
    }

    pub fn counts(&self) -> &BTreeMap<EntityId, u64> {
        &self.counts
    }

    pub fn count(&self, next: EntityId) -> u64 {
        self.counts.get(&next).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn probability(&self, next: EntityId) -> f64 {
        if self.support == 0 {
            return 0.0;
        }
        self.count(next) as f64 / self.support as f64
    }

    pub fn probabilities(&self) -> impl Iterator<Item = (EntityId, f64)> + '_ {
        let s = self.support as f64;
        self.counts.iter().map(move |(&e, &c)| (e, c as f64 / s))
    }

    pub fn min_probability(&self) -> Option<f64> {
        let min = self.counts.values().copied().min()?;
        Some(min as f64 / self.support as f64)
    }
}

/// `sum_i P_ext(i) * log2(P_ext(i) / P(i))`.
///
/// Every outcome of `ext` must have positive probability in `base`; mined
/// extensions satisfy this because their observations are a subset of the
/// base path's observations.
pub fn kl_divergence(ext: &NextStepDistribution, base: &NextStepDistribution) -> Result<f64> {
    let mut total = 0.0;
    for (e, p) in ext.probabilities() {
        let q = base.probability(e);
        if q <= 0.0 {
            return Err(Error::Invariant(format!(
                "outcome {e:?} of the extended distribution is absent from the base distribution"
            )));
        }
        total += p * (p / q).log2();
    }
    // Rounding can leave a tiny negative residue for identical distributions.
    Ok(total.max(0.0))
}

/// `order_ext / log2(1 + support_ext)`.
pub fn dynamic_threshold(order_ext: usize, support_ext: u64) -> Result<f64> {
    if support_ext == 0 {
        return Err(Error::Argument("support of an observed path is at least 1".into()));
    }
    if order_ext == 0 {
        return Err(Error::Argument("order starts at 1".into()));
    }
    Ok(order_ext as f64 / (1.0 + support_ext as f64).log2())
}

/// Largest divergence any extension can reach against `d`: `-log2(min P)`.
pub fn divergence_upper_bound(d: &NextStepDistribution) -> f64 {
    match d.min_probability() {
        Some(p) => (-p.log2()).max(0.0),
        None => 0.0,
    }
}

/// True when no extension of the current path can pass the significance test.
///
/// `valid` is the distribution extensions are compared against and
/// `current_support` the support of the path being extended, which bounds
/// the support of every extension from above and therefore gives the
/// smallest threshold any of them can face.
pub fn should_prune(valid: &NextStepDistribution, order_ext: usize, current_support: u64) -> bool {
    match dynamic_threshold(order_ext, current_support) {
        Ok(threshold) => divergence_upper_bound(valid) < threshold,
        Err(_) => true,
    }
}

/// One indexed occurrence: the trajectory ordinal within the window and the
/// offset of the context's last entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Position {
    pub trajectory: u32,
    pub offset: u32,
}

/// Counts, next-step distributions and the position index for one window.
#[derive(Debug, Default)]
pub struct ObservationStore {
    distributions: HashMap<ContextPath, NextStepDistribution>,
    positions: HashMap<ContextPath, Vec<Position>>,
    extensions: HashMap<ContextPath, Vec<ContextPath>>,
    materialized: u64,
    budget: Option<u64>,
}

impl ObservationStore {
    /// All first-order observations with their positions.
    pub fn first_order(window: &Window) -> Self {
        let mut store = ObservationStore::default();
        for (ti, traj) in window.trajectories().iter().enumerate() {
            for (i, pair) in traj.steps.windows(2).enumerate() {
                let ctx = &pair[..1];
                store.materialized += 1;
                match store.distributions.get_mut(ctx) {
                    Some(d) => d.increment(pair[1]),
                    None => {
                        let mut d = NextStepDistribution::new();
                        d.increment(pair[1]);
                        store.distributions.insert(ContextPath(ctx.to_vec()), d);
                    }
                }
                let pos = Position {
                    trajectory: ti as u32,
                    offset: i as u32,
                };
                match store.positions.get_mut(ctx) {
                    Some(p) => p.push(pos),
                    None => {
                        store.positions.insert(ContextPath(ctx.to_vec()), vec![pos]);
                    }
                }
            }
        }
        store
    }

    /// Every n-gram with context order up to `max_order`, counted by a direct
    /// scan of the raw trajectories. Positions are not indexed.
    pub fn exhaustive(
        window: &Window,
        max_order: usize,
        min_support: u64,
        budget: Option<u64>,
    ) -> Result<Self> {
        let mut store = ObservationStore {
            budget,
            ..Default::default()
        };
        for traj in window.trajectories() {
            let steps = &traj.steps;
            for i in 0..steps.len().saturating_sub(1) {
                let next = steps[i + 1];
                for k in 1..=max_order.min(i + 1) {
                    let ctx = &steps[i + 1 - k..=i];
                    store.materialized += 1;
                    match store.distributions.get_mut(ctx) {
                        Some(d) => d.increment(next),
                        None => {
                            let mut d = NextStepDistribution::new();
                            d.increment(next);
                            store.distributions.insert(ContextPath(ctx.to_vec()), d);
                        }
                    }
                }
                store.check_budget()?;
            }
        }
        store
            .distributions
            .retain(|ctx, d| ctx.order() == 1 || d.support() >= min_support);
        let mut links: HashMap<ContextPath, Vec<ContextPath>> = HashMap::new();
        for ctx in store.distributions.keys() {
            if let Some(parent) = ctx.suffix() {
                links.entry(parent).or_default().push(ctx.clone());
            }
        }
        for children in links.values_mut() {
            children.sort();
        }
        // Paths at the order limit were never extended; the others get an
        // entry even when they have no children.
        for ctx in store.distributions.keys() {
            if ctx.order() < max_order {
                links.entry(ctx.clone()).or_default();
            }
        }
        store.extensions = links;
        Ok(store)
    }

    fn check_budget(&self) -> Result<()> {
        match self.budget {
            Some(budget) if self.materialized > budget => Err(Error::BudgetExceeded { budget }),
            _ => Ok(()),
        }
    }

    pub fn distribution(&self, path: &[EntityId]) -> Option<&NextStepDistribution> {
        self.distributions.get(path)
    }

    pub fn positions(&self, path: &[EntityId]) -> Option<&[Position]> {
        self.positions.get(path).map(Vec::as_slice)
    }

    /// Extensions materialized so far for `path`, if it has been extended.
    pub fn extensions(&self, path: &[EntityId]) -> Option<&[ContextPath]> {
        self.extensions.get(path).map(Vec::as_slice)
    }

    pub fn paths(&self) -> impl Iterator<Item = (&ContextPath, &NextStepDistribution)> {
        self.distributions.iter()
    }

    /// n-gram occurrences counted so far.
    pub fn observations_materialized(&self) -> u64 {
        self.materialized
    }

    /// Distribution cells plus position-index entries currently held.
    pub fn table_entries(&self) -> u64 {
        let cells: usize = self.distributions.values().map(NextStepDistribution::len).sum();
        let positions: usize = self.positions.values().map(Vec::len).sum();
        (cells + positions) as u64
    }

    /// Derives the order-(k+1) extensions of `path` from its cached positions.
    ///
    /// For each position the entity `order` steps before the context's last
    /// entity becomes the new oldest entity and the entity after it is the
    /// next step. Occurrences at the start of a trajectory have no preceding
    /// entity and are skipped. Extensions below `min_support` are dropped.
    /// Repeated calls return the cached result.
    pub fn extend_observations(
        &mut self,
        path: &ContextPath,
        window: &Window,
        min_support: u64,
    ) -> Result<Vec<ContextPath>> {
        if let Some(done) = self.extensions.get(path) {
            return Ok(done.clone());
        }
        let Some(positions) = self.positions.get(path) else {
            return Err(Error::Invariant(format!(
                "path {:?} has no position index",
                path.entities()
            )));
        };
        let k = path.order();
        let trajectories = window.trajectories();
        let mut grouped: BTreeMap<EntityId, (NextStepDistribution, Vec<Position>)> =
            BTreeMap::new();
        let mut visited = 0u64;
        for &pos in positions {
            let offset = pos.offset as usize;
            if offset < k {
                continue;
            }
            let steps = &trajectories[pos.trajectory as usize].steps;
            let (prev, next) = (steps[offset - k], steps[offset + 1]);
            let slot = grouped.entry(prev).or_default();
            slot.0.increment(next);
            slot.1.push(pos);
            visited += 1;
        }
        self.materialized += visited;
        self.check_budget()?;

        let mut children = Vec::with_capacity(grouped.len());
        for (prev, (dist, poss)) in grouped {
            if dist.support() < min_support {
                continue;
            }
            let ext = path.extended(prev);
            self.distributions.insert(ext.clone(), dist);
            self.positions.insert(ext.clone(), poss);
            children.push(ext);
        }
        children.sort();
        self.extensions.insert(path.clone(), children.clone());
        Ok(children)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Lazy observation construction with bound-based pruning.
    Lazy,
    /// Eager counting up to `max_order`, no pruning.
    Exhaustive,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Lazy => "lazy",
            Strategy::Exhaustive => "exhaustive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinerConfig {
    pub min_support: u64,
    /// Required by the exhaustive strategy; caps the lazy strategy when set.
    pub max_order: Option<usize>,
    /// Abort once this many n-gram occurrences have been materialized.
    pub table_budget: Option<u64>,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            min_support: 1,
            max_order: None,
            table_budget: None,
        }
    }
}

impl MinerConfig {
    pub fn with_max_order(max_order: usize) -> Self {
        MinerConfig {
            max_order: Some(max_order),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_support == 0 {
            return Err(Error::Argument("min_support must be at least 1".into()));
        }
        if self.max_order == Some(0) {
            return Err(Error::Argument("max_order must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MinerStats {
    pub observations_materialized: u64,
    pub divergence_tests: u64,
    pub prunes_by_bound: u64,
    pub peak_table_entries: u64,
}

/// A branch stopped by the divergence bound.
#[derive(Debug, Clone, PartialEq)]
pub struct PruneEvent {
    pub valid: ContextPath,
    pub current: ContextPath,
    pub order_ext: usize,
    pub bound: f64,
    pub threshold: f64,
}

/// One significance test performed while growing.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceTest {
    pub valid: ContextPath,
    pub extension: ContextPath,
    pub divergence: f64,
    pub threshold: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, Default)]
pub struct MiningTrace {
    pub pruned: Vec<PruneEvent>,
    pub tests: Vec<DivergenceTest>,
}

/// Accepted rules of one window: context path to next-step counts.
///
/// Every observed first-order path is present, and the order-(k-1) suffix of
/// every rule is itself a rule.
#[derive(Debug, Clone)]
pub struct RuleSet {
    rules: BTreeMap<ContextPath, NextStepDistribution>,
    vocab: Arc<Vocabulary>,
}

impl RuleSet {
    pub fn new(vocab: Arc<Vocabulary>) -> Self {
        RuleSet {
            rules: BTreeMap::new(),
            vocab,
        }
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn insert(&mut self, context: ContextPath, dist: NextStepDistribution) {
        self.rules.insert(context, dist);
    }

    pub fn get(&self, context: &[EntityId]) -> Option<&NextStepDistribution> {
        self.rules.get(context)
    }

    pub fn contains(&self, context: &[EntityId]) -> bool {
        self.rules.contains_key(context)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ContextPath, &NextStepDistribution)> {
        self.rules.iter()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Rule count per order (`R_k`).
    pub fn order_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for ctx in self.rules.keys() {
            *h.entry(ctx.order()).or_insert(0) += 1;
        }
        h
    }

    pub fn max_order_found(&self) -> usize {
        self.rules.keys().map(ContextPath::order).max().unwrap_or(0)
    }

    /// Rules keyed by entity labels, independent of the id assignment.
    pub fn labelled(&self) -> BTreeMap<Vec<String>, BTreeMap<String, u64>> {
        self.rules
            .iter()
            .map(|(ctx, d)| {
                let key = ctx.labels(&self.vocab).into_iter().map(str::to_owned).collect();
                let counts = d
                    .counts()
                    .iter()
                    .map(|(&e, &c)| (self.vocab.label(e).to_owned(), c))
                    .collect();
                (key, counts)
            })
            .collect()
    }

    /// Checks that every rule's suffix is also a rule.
    pub fn check_suffix_closed(&self) -> Result<()> {
        for ctx in self.rules.keys() {
            if let Some(s) = ctx.suffix() {
                if !self.rules.contains_key(&s) {
                    return Err(Error::Structure(format!(
                        "rule `{}` lacks its suffix rule `{}`",
                        ctx.labels(&self.vocab).join("|"),
                        s.labels(&self.vocab).join("|")
                    )));
                }
            }
        }
        Ok(())
    }

    /// One rule per line, `e1|e2|..|ek -> next:count ...`, sorted.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let mut lines: Vec<String> = self
            .rules
            .iter()
            .map(|(ctx, d)| {
                let mut nexts: Vec<(&str, u64)> = d
                    .counts()
                    .iter()
                    .map(|(&e, &c)| (self.vocab.label(e), c))
                    .collect();
                nexts.sort();
                let rhs: Vec<String> = nexts.iter().map(|(e, c)| format!("{e}:{c}")).collect();
                format!("{} -> {}", ctx.labels(&self.vocab).join("|"), rhs.join(" "))
            })
            .collect();
        lines.sort();
        for line in lines {
            writeln!(out, "{line}")?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`RuleSet::write`] into a fresh vocabulary.
    pub fn parse<R: Read>(reader: R) -> Result<RuleSet> {
        let mut vocab = Vocabulary::new();
        let mut rules = BTreeMap::new();
        for (n, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = n + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let Some((lhs, rhs)) = line.split_once(" -> ") else {
                return Err(Error::parse(line_no, "expected `<context> -> <next>:<count> ...`"));
            };
            let mut ctx = Vec::new();
            for label in lhs.trim().split('|') {
                let e = Entity::new(label).map_err(|e| Error::parse(line_no, e.to_string()))?;
                ctx.push(vocab.intern(e));
            }
            let mut dist = NextStepDistribution::new();
            for tok in rhs.split_ascii_whitespace() {
                let Some((label, count)) = tok.rsplit_once(':') else {
                    return Err(Error::parse(line_no, format!("bad next-step token `{tok}`")));
                };
                let count: u64 = count
                    .parse()
                    .ok()
                    .filter(|&c| c > 0)
                    .ok_or_else(|| Error::parse(line_no, format!("bad count in `{tok}`")))?;
                let e = Entity::new(label).map_err(|e| Error::parse(line_no, e.to_string()))?;
                dist.add(vocab.intern(e), count);
            }
            if dist.is_empty() {
                return Err(Error::parse(line_no, "rule has no next steps"));
            }
            rules.insert(ContextPath(ctx), dist);
        }
        Ok(RuleSet {
            rules,
            vocab: Arc::new(vocab),
        })
    }
}

impl PartialEq for RuleSet {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.vocab, &other.vocab) {
            self.rules == other.rules
        } else {
            self.labelled() == other.labelled()
        }
    }
}

/// Result of a mining run with the store kept for inspection.
#[derive(Debug)]
pub struct MiningOutcome {
    pub rules: RuleSet,
    pub stats: MinerStats,
    pub trace: Option<MiningTrace>,
    pub store: ObservationStore,
}

/// Grows rules for one window.
pub struct RuleMiner<'w> {
    window: &'w Window,
    config: MinerConfig,
    strategy: Strategy,
    trace: Option<MiningTrace>,
}

impl<'w> RuleMiner<'w> {
    pub fn new(window: &'w Window, config: MinerConfig, strategy: Strategy) -> Self {
        RuleMiner {
            window,
            config,
            strategy,
            trace: None,
        }
    }

    /// Record every prune and divergence test.
    pub fn traced(mut self) -> Self {
        self.trace = Some(MiningTrace::default());
        self
    }

    pub fn run(mut self) -> Result<MiningOutcome> {
        self.config.validate()?;
        if self.window.is_empty() {
            return Err(Error::Argument(format!(
                "window {} has no trajectories",
                self.window.index()
            )));
        }
        let min_support = self.config.min_support;
        let mut store = match self.strategy {
            Strategy::Lazy => {
                let mut s = ObservationStore::first_order(self.window);
                s.budget = self.config.table_budget;
                s.check_budget()?;
                s
            }
            Strategy::Exhaustive => {
                let Some(max_order) = self.config.max_order else {
                    return Err(Error::Argument(
                        "the exhaustive strategy needs a maximum order".into(),
                    ));
                };
                ObservationStore::exhaustive(
                    self.window,
                    max_order,
                    min_support,
                    self.config.table_budget,
                )?
            }
        };

        let mut rules = RuleSet::new(Arc::clone(self.window.vocab()));
        let mut stats = MinerStats::default();
        let mut roots: Vec<ContextPath> = store
            .paths()
            .filter(|(ctx, _)| ctx.order() == 1)
            .map(|(ctx, _)| ctx.clone())
            .collect();
        roots.sort();
        for root in &roots {
            let d = store.distribution(root.entities()).expect("root stored").clone();
            rules.insert(root.clone(), d);
        }

        // (valid, current) pairs still to grow.
        let mut stack: Vec<(ContextPath, ContextPath)> =
            roots.iter().rev().map(|r| (r.clone(), r.clone())).collect();
        while let Some((valid, current)) = stack.pop() {
            let order = current.order();
            if self.config.max_order.is_some_and(|m| order >= m) {
                continue;
            }
            if self.strategy == Strategy::Lazy {
                let valid_d = store.distribution(valid.entities()).expect("valid stored");
                let support = store
                    .distribution(current.entities())
                    .expect("current stored")
                    .support();
                if should_prune(valid_d, order + 1, support) {
                    stats.prunes_by_bound += 1;
                    if let Some(trace) = self.trace.as_mut() {
                        trace.pruned.push(PruneEvent {
                            valid: valid.clone(),
                            current: current.clone(),
                            order_ext: order + 1,
                            bound: divergence_upper_bound(valid_d),
                            threshold: dynamic_threshold(order + 1, support)?,
                        });
                    }
                    continue;
                }
            }
            let extensions = match self.strategy {
                Strategy::Lazy => store.extend_observations(&current, self.window, min_support)?,
                Strategy::Exhaustive => store
                    .extensions(current.entities())
                    .map(<[ContextPath]>::to_vec)
                    .unwrap_or_default(),
            };
            for ext in extensions.into_iter().rev() {
                let ext_d = store.distribution(ext.entities()).expect("extension stored");
                let valid_d = store.distribution(valid.entities()).expect("valid stored");
                let divergence = kl_divergence(ext_d, valid_d)?;
                let threshold = dynamic_threshold(order + 1, ext_d.support())?;
                let accepted = divergence > threshold;
                stats.divergence_tests += 1;
                if let Some(trace) = self.trace.as_mut() {
                    trace.tests.push(DivergenceTest {
                        valid: valid.clone(),
                        extension: ext.clone(),
                        divergence,
                        threshold,
                        accepted,
                    });
                }
                if accepted {
                    accept_with_suffixes(&mut rules, &store, &ext)?;
                    stack.push((ext.clone(), ext));
                } else {
                    stack.push((valid.clone(), ext));
                }
            }
        }

        stats.observations_materialized = store.observations_materialized();
        stats.peak_table_entries = store.table_entries();
        Ok(MiningOutcome {
            rules,
            stats,
            trace: self.trace,
            store,
        })
    }
}

fn accept_with_suffixes(
    rules: &mut RuleSet,
    store: &ObservationStore,
    ext: &ContextPath,
) -> Result<()> {
    let entities = ext.entities();
    for start in 0..entities.len() {
        let ctx = &entities[start..];
        if rules.contains(ctx) {
            // Suffixes of an existing rule are already present.
            break;
        }
        let d = store.distribution(ctx).ok_or_else(|| {
            Error::Invariant(format!("suffix {ctx:?} of an accepted rule was never observed"))
        })?;
        rules.insert(ContextPath(ctx.to_vec()), d.clone());
    }
    Ok(())
}

/// Lazy, pruned mining with no order limit unless `config.max_order` is set.
pub fn mine_rules_plus(window: &Window, config: &MinerConfig) -> Result<(RuleSet, MinerStats)> {
    let out = RuleMiner::new(window, config.clone(), Strategy::Lazy).run()?;
    Ok((out.rules, out.stats))
}

/// Exhaustive mining up to `config.max_order`.
pub fn mine_rules_baseline(window: &Window, config: &MinerConfig) -> Result<(RuleSet, MinerStats)> {
    let out = RuleMiner::new(window, config.clone(), Strategy::Exhaustive).run()?;
    Ok((out.rules, out.stats))
}
