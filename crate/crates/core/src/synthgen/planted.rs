//! Small corpora with planted dependencies of known order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, CorpusBuilder};
use crate::error::{Error, Result};

/// Parameters of a random variable-order Markov source.
#[derive(Debug, Clone, PartialEq)]
pub struct VomParams {
    pub entities: usize,
    pub total_steps: usize,
    /// Highest order of planted rules (1 plants none beyond the base chain).
    pub max_planted_order: usize,
    pub rules_per_order: usize,
}

impl VomParams {
    /// Draws parameters within 5..=50 entities and 2k..=20k steps.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        VomParams {
            entities: rng.random_range(5..=50),
            total_steps: rng.random_range(2_000..=20_000),
            max_planted_order: rng.random_range(1..=5),
            rules_per_order: rng.random_range(1..=4),
        }
    }
}

/// A planted context (labels, oldest first) and its next-step weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedRule {
    pub context: Vec<String>,
    pub next: Vec<(String, f64)>,
}

#[derive(Debug)]
pub struct PlantedCorpus {
    pub corpus: Corpus,
    pub rules: Vec<PlantedRule>,
}

/// Next entity and its unnormalized weight.
type Weighted = (usize, f64);

fn label(e: usize) -> String {
    format!("e{e}")
}

fn draw(rng: &mut ChaCha8Rng, options: &[(usize, f64)]) -> usize {
    let total: f64 = options.iter().map(|o| o.1).sum();
    let mut x = rng.random::<f64>() * total;
    for &(e, w) in options {
        if x < w {
            return e;
        }
        x -= w;
    }
    options.last().expect("non-empty").0
}

/// One window of trajectories from a sparse first-order chain overlaid with
/// skewed higher-order rules whose contexts are paths of the chain.
pub fn vom_corpus(params: &VomParams, seed: u64) -> Result<PlantedCorpus> {
    if params.entities < 2 || params.total_steps < 2 || params.max_planted_order == 0 {
        return Err(Error::Argument("planted corpus needs 2+ entities, 2+ steps, order 1+".into()));
    }
    let n = params.entities;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entities: Vec<usize> = (0..n).collect();

    let base: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|_| {
            let fan = rng.random_range(2..=4.min(n));
            let mut targets = entities.clone();
            targets.shuffle(&mut rng);
            targets[..fan]
                .iter()
                .map(|&t| (t, rng.random_range(0.2..1.0)))
                .collect()
        })
        .collect();

    let mut planted: Vec<(Vec<usize>, Vec<Weighted>)> = Vec::new();
    for order in 1..=params.max_planted_order {
        for _ in 0..params.rules_per_order {
            let mut ctx = vec![rng.random_range(0..n)];
            while ctx.len() < order {
                let cur = *ctx.last().expect("non-empty");
                ctx.push(draw(&mut rng, &base[cur]));
            }
            let cur = *ctx.last().expect("non-empty");
            let favoured = rng.random_range(0..base[cur].len());
            let next = base[cur]
                .iter()
                .enumerate()
                .map(|(i, &(t, _))| (t, if i == favoured { 0.85 } else { 0.15 / base[cur].len() as f64 }))
                .collect();
            planted.retain(|(c, _)| *c != ctx);
            planted.push((ctx, next));
        }
    }
    planted.sort_by_key(|(c, _)| std::cmp::Reverse(c.len()));

    let mut builder = CorpusBuilder::new();
    let mut written = 0;
    let mut traj = 0;
    while written < params.total_steps {
        let len = rng
            .random_range(10..=300)
            .min(params.total_steps - written)
            .max(2);
        let mut path = vec![rng.random_range(0..n)];
        while path.len() < len {
            let cur = *path.last().expect("non-empty");
            let options = planted
                .iter()
                .find(|(c, _)| path.ends_with(c))
                .map(|(_, next)| next.as_slice())
                .unwrap_or(&base[cur]);
            path.push(draw(&mut rng, options));
        }
        written += path.len();
        builder.push(1, &format!("t{traj}"), path.iter().map(|&e| label(e)))?;
        traj += 1;
    }
    let rules = planted
        .into_iter()
        .map(|(ctx, next)| PlantedRule {
            context: ctx.into_iter().map(label).collect(),
            next: next.into_iter().map(|(e, w)| (label(e), w)).collect(),
        })
        .collect();
    Ok(PlantedCorpus {
        corpus: builder.build()?,
        rules,
    })
}

/// Routes `p_i x_1 .. x_{order-1} q_i` traversed in a fixed cycle.
///
/// After `x_{order-1}` the next entity is determined only by `p_i`, which
/// lies `order` steps back, so the deepest dependency has exactly `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicSpec {
    pub order: usize,
    pub routes: usize,
    /// Passes over the full cycle per trajectory.
    pub repetitions: usize,
    pub trajectories: usize,
}

impl Default for CyclicSpec {
    fn default() -> Self {
        CyclicSpec {
            order: 6,
            routes: 4,
            repetitions: 16,
            trajectories: 8,
        }
    }
}

pub fn cyclic_corpus(spec: &CyclicSpec) -> Result<Corpus> {
    if spec.order < 2 || spec.routes < 2 || spec.repetitions == 0 || spec.trajectories == 0 {
        return Err(Error::Argument(
            "cyclic corpus needs order >= 2, routes >= 2 and at least one pass".into(),
        ));
    }
    let route = |i: usize| -> Vec<String> {
        let mut r = vec![format!("p{i}")];
        r.extend((1..spec.order).map(|j| format!("x{j}")));
        r.push(format!("q{i}"));
        r
    };
    let mut builder = CorpusBuilder::new();
    for t in 0..spec.trajectories {
        let mut steps = Vec::new();
        for pass in 0..spec.repetitions * spec.routes {
            steps.extend(route((t + pass) % spec.routes));
        }
        builder.push(1, &format!("c{t}"), steps)?;
    }
    builder.build()
}
