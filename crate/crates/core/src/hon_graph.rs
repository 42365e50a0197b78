//! Higher-order network construction from mined rules.
//!
//! Each accepted context `[s_1, .., s_k]` becomes a node for entity `s_k`
//! carrying the older entities as its context. Observations that also match
//! a longer accepted rule are routed through that rule's node and subtracted
//! from the shorter one, so every transition contributes weight exactly once.
//! With first-order rules only, the result is the ordinary first-order
//! network.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};

use crate::corpus::{Entity, EntityId};
use crate::error::{Error, Result};
use crate::rule_miner::RuleSet;

/// An entity observed under a given history, oldest context entity first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HonNode {
    entity: Entity,
    context: Vec<Entity>,
    name: String,
}

impl HonNode {
    pub fn new(entity: Entity, context: Vec<Entity>) -> Self {
        let mut name = entity.as_str().to_owned();
        if !context.is_empty() {
            name.push('|');
            let newest_first: Vec<&str> = context.iter().rev().map(Entity::as_str).collect();
            name.push_str(&newest_first.join("."));
        }
        HonNode {
            entity,
            context,
            name,
        }
    }

    pub fn first_order(entity: Entity) -> Self {
        HonNode::new(entity, Vec::new())
    }

    pub fn entity(&self) -> &Entity {
        &self.entity
    }

    pub fn context(&self) -> &[Entity] {
        &self.context
    }

    pub fn order(&self) -> usize {
        self.context.len() + 1
    }

    /// `entity|c_{k-1}.c_{k-2}...`, or the bare entity for an empty context.
    pub fn canonical_name(&self) -> &str {
        &self.name
    }

    /// Inverse of [`HonNode::canonical_name`]. Context entities containing
    /// `.` cannot be told apart from two entities and are split.
    pub fn parse_canonical(name: &str) -> Result<HonNode> {
        let (entity, context) = match name.split_once('|') {
            Some((e, rest)) => {
                let mut ctx = rest
                    .split('.')
                    .map(Entity::new)
                    .collect::<Result<Vec<_>>>()?;
                ctx.reverse();
                (e, ctx)
            }
            None => (name, Vec::new()),
        };
        Ok(HonNode::new(Entity::new(entity)?, context))
    }
}

impl Ord for HonNode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.name
            .cmp(&other.name)
            .then_with(|| self.entity.cmp(&other.entity))
            .then_with(|| self.context.cmp(&other.context))
    }
}

impl PartialOrd for HonNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for HonNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Weighted directed graph over [`HonNode`]s. Weights are transition counts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HonGraph {
    nodes: BTreeSet<HonNode>,
    edges: BTreeMap<(HonNode, HonNode), f64>,
}

impl HonGraph {
    /// Builds a graph from edges, summing duplicates. Weights must be
    /// positive and finite.
    pub fn from_edges(edges: impl IntoIterator<Item = (HonNode, HonNode, f64)>) -> Result<Self> {
        let mut g = HonGraph::default();
        for (u, v, w) in edges {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Argument(format!("edge {u} -> {v} has weight {w}")));
            }
            g.add_edge(u, v, w);
        }
        Ok(g)
    }

    fn add_edge(&mut self, u: HonNode, v: HonNode, w: f64) {
        self.nodes.insert(u.clone());
        self.nodes.insert(v.clone());
        *self.edges.entry((u, v)).or_insert(0.0) += w;
    }

    pub fn nodes(&self) -> &BTreeSet<HonNode> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<(HonNode, HonNode), f64> {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn weight(&self, u: &HonNode, v: &HonNode) -> f64 {
        self.edges
            .get(&(u.clone(), v.clone()))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.values().sum()
    }

    /// Collapses every node to its entity and sums parallel edges.
    pub fn fon_projection(&self) -> BTreeMap<(Entity, Entity), f64> {
        let mut out = BTreeMap::new();
        for ((u, v), &w) in &self.edges {
            *out.entry((u.entity.clone(), v.entity.clone())).or_insert(0.0) += w;
        }
        out
    }

    /// `<source> <target> <weight>` per edge, lines sorted.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let mut lines: Vec<String> = self
            .edges
            .iter()
            .map(|((u, v), w)| format!("{} {} {}", u.name, v.name, w))
            .collect();
        lines.sort();
        for line in lines {
            writeln!(out, "{line}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn parse<R: Read>(reader: R) -> Result<HonGraph> {
        let mut g = HonGraph::default();
        for (n, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = n + 1;
            let line = line?;
            let fields: Vec<&str> = line.split_ascii_whitespace().collect();
            match fields.as_slice() {
                [] => continue,
                [u, v, w] => {
                    let wrap = |e: Error| Error::parse(line_no, e.to_string());
                    let u = HonNode::parse_canonical(u).map_err(wrap)?;
                    let v = HonNode::parse_canonical(v).map_err(wrap)?;
                    let w: f64 = w
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("bad weight `{w}`")))?;
                    if !(w.is_finite() && w > 0.0) {
                        return Err(Error::parse(line_no, "weights must be positive"));
                    }
                    g.add_edge(u, v, w);
                }
                _ => return Err(Error::parse(line_no, "expected `<source> <target> <weight>`")),
            }
        }
        Ok(g)
    }
}

/// Wires a suffix-closed rule set into a graph.
pub fn build_graph(rules: &RuleSet) -> Result<HonGraph> {
    if rules.is_empty() {
        return Err(Error::Argument("cannot build a graph from an empty rule set".into()));
    }
    rules.check_suffix_closed()?;
    let vocab = rules.vocab();

    // Next-step counts not claimed by a longer rule.
    let mut residual: HashMap<&[EntityId], BTreeMap<EntityId, u64>> = rules
        .iter()
        .map(|(ctx, d)| (ctx.entities(), d.counts().clone()))
        .collect();
    for (ctx, d) in rules.iter() {
        let Some(parent) = ctx.entities().get(1..).filter(|p| !p.is_empty()) else {
            continue;
        };
        let counts = residual.get_mut(parent).expect("suffix closure checked");
        for (e, &c) in d.counts() {
            let slot = counts.get_mut(e).ok_or_else(|| {
                Error::Invariant(format!("rule {:?} predicts an outcome its suffix lacks", ctx))
            })?;
            *slot = slot.checked_sub(c).ok_or_else(|| {
                Error::Invariant(format!("rule {:?} outweighs its suffix", ctx))
            })?;
        }
    }

    let node_for = |ctx: &[EntityId]| -> HonNode {
        let (last, older) = ctx.split_last().expect("non-empty");
        HonNode::new(
            vocab.entity(*last).clone(),
            older.iter().map(|&e| vocab.entity(e).clone()).collect(),
        )
    };

    let mut graph = HonGraph::default();
    let mut probe: Vec<EntityId> = Vec::new();
    for (ctx, _) in rules.iter() {
        let ctx = ctx.entities();
        let counts = &residual[ctx];
        if counts.values().all(|&c| c == 0) {
            continue;
        }
        let source = node_for(ctx);
        for (&next, &count) in counts {
            if count == 0 {
                continue;
            }
            let mut target_ctx: &[EntityId] = &[];
            for start in 0..ctx.len() {
                probe.clear();
                probe.extend_from_slice(&ctx[start..]);
                probe.push(next);
                if rules.contains(&probe) {
                    target_ctx = &ctx[start..];
                    break;
                }
            }
            let target = HonNode::new(
                vocab.entity(next).clone(),
                target_ctx.iter().map(|&e| vocab.entity(e).clone()).collect(),
            );
            graph.add_edge(source.clone(), target, count as f64);
        }
    }
    Ok(graph)
}

/// Union of both node sets ordered by canonical name.
pub fn node_union(g: &HonGraph, h: &HonGraph) -> Vec<HonNode> {
    g.nodes.union(&h.nodes).cloned().collect()
}
