//! Windowed trajectory corpora.
//!
//! A corpus file holds one trajectory per line:
//!
//! ```text
//! <window-index> <trajectory-id> <entity> <entity> ...
//! ```
//!
//! Fields are separated by ASCII whitespace. Blank lines and lines starting
//! with `#` are ignored. Entities are interned into a corpus-wide
//! [`Vocabulary`] so that every window of a corpus shares one id space.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

/// An opaque entity label: a page, port or landmark id.
///
/// Labels are non-empty and contain neither whitespace nor `|`, which is
/// reserved as the separator in higher-order node names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Entity(String);

impl Entity {
    pub fn new(label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::Argument("entity label is empty".into()));
        }
        if label.contains('|') {
            return Err(Error::Argument(format!(
                "entity label `{label}` contains reserved `|`"
            )));
        }
        if label.chars().any(char::is_whitespace) {
            return Err(Error::Argument(format!(
                "entity label `{label}` contains whitespace"
            )));
        }
        Ok(Entity(label))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Dense id of an interned [`Entity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId(pub u32);

/// Interning table shared by all windows of a corpus.
#[derive(Debug, Default, Clone)]
pub struct Vocabulary {
    labels: Vec<Entity>,
    ids: HashMap<Entity, EntityId>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, entity: Entity) -> EntityId {
        if let Some(&id) = self.ids.get(&entity) {
            return id;
        }
        let id = EntityId(self.labels.len() as u32);
        self.labels.push(entity.clone());
        self.ids.insert(entity, id);
        id
    }

    pub fn get(&self, label: &str) -> Option<EntityId> {
        // Entity is a thin String wrapper; build a probe without validation.
        self.ids.get(&Entity(label.to_owned())).copied()
    }

    pub fn label(&self, id: EntityId) -> &str {
        self.labels[id.0 as usize].as_str()
    }

    pub fn entity(&self, id: EntityId) -> &Entity {
        &self.labels[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub id: String,
    pub steps: Vec<EntityId>,
}

/// One time window: the trajectories observed during interval `index`.
#[derive(Debug, Clone)]
pub struct Window {
    index: usize,
    trajectories: Vec<Trajectory>,
    vocab: Arc<Vocabulary>,
}

impl Window {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Number of transitions (steps that have a successor) in the window.
    pub fn transition_count(&self) -> u64 {
        self.trajectories
            .iter()
            .map(|t| t.steps.len().saturating_sub(1) as u64)
            .sum()
    }
}

/// Size figures of the raw data: `L` total steps and `N` unique entities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorpusStats {
    pub total_steps: u64,
    pub unique_entities: usize,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    windows: Vec<Window>,
    stats: CorpusStats,
    vocab: Arc<Vocabulary>,
}

impl Corpus {
    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn stats(&self) -> CorpusStats {
        self.stats
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn window(&self, index: usize) -> Option<&Window> {
        self.windows.iter().find(|w| w.index == index)
    }

    /// Parses the line format described in the module docs.
    pub fn parse<R: Read>(reader: R, dedupe: bool) -> Result<Corpus> {
        let mut builder = CorpusBuilder::new().dedupe(dedupe);
        let reader = BufReader::new(reader);
        for (n, line) in reader.lines().enumerate() {
            let line_no = n + 1;
            let line = line?;
            let trimmed = line.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.split_ascii_whitespace();
            let (Some(window), Some(id)) = (fields.next(), fields.next()) else {
                return Err(Error::parse(line_no, "expected `<window> <id> <entity>...`"));
            };
            let window: usize = window
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad window index `{window}`")))?;
            let steps: Vec<&str> = fields.collect();
            if steps.is_empty() {
                return Err(Error::parse(line_no, "trajectory has no entities"));
            }
            builder
                .push(window, id, steps)
                .map_err(|e| match e {
                    Error::Argument(msg) => Error::parse(line_no, msg),
                    other => other,
                })?;
        }
        builder.build()
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for window in &self.windows {
            for traj in &window.trajectories {
                write!(out, "{} {}", window.index, traj.id)?;
                for &step in &traj.steps {
                    write!(out, " {}", self.vocab.label(step))?;
                }
                writeln!(out)?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Reads a corpus file. With `dedupe`, consecutive repeated entities inside a
/// trajectory are collapsed to one.
pub fn load_corpus(path: impl AsRef<Path>, dedupe: bool) -> Result<Corpus> {
    let file = std::fs::File::open(path)?;
    Corpus::parse(file, dedupe)
}

/// Collapses runs of equal consecutive items.
pub fn dedupe_consecutive<T: PartialEq + Clone>(steps: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(steps.len());
    for s in steps {
        if out.last() != Some(s) {
            out.push(s.clone());
        }
    }
    out
}

/// Incremental corpus construction.
#[derive(Debug, Default)]
pub struct CorpusBuilder {
    vocab: Vocabulary,
    windows: BTreeMap<usize, Vec<Trajectory>>,
    dedupe: bool,
}

impl CorpusBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dedupe(mut self, on: bool) -> Self {
        self.dedupe = on;
        self
    }

    pub fn push<I, S>(&mut self, window: usize, id: &str, steps: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if window == 0 {
            return Err(Error::Argument("window indices start at 1".into()));
        }
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(Error::Argument(format!("bad trajectory id `{id}`")));
        }
        let mut ids = Vec::new();
        for s in steps {
            let entity = Entity::new(s.as_ref())?;
            ids.push(self.vocab.intern(entity));
        }
        if ids.is_empty() {
            return Err(Error::Argument(format!("trajectory `{id}` has no steps")));
        }
        if self.dedupe {
            ids = dedupe_consecutive(&ids);
        }
        self.windows.entry(window).or_default().push(Trajectory {
            id: id.to_owned(),
            steps: ids,
        });
        Ok(())
    }

    pub fn build(self) -> Result<Corpus> {
        let mut prev: Option<usize> = None;
        for &index in self.windows.keys() {
            if let Some(p) = prev {
                if index != p + 1 {
                    return Err(Error::Structure(format!(
                        "window indices are not contiguous: {p} is followed by {index}"
                    )));
                }
            }
            prev = Some(index);
        }
        let vocab = Arc::new(self.vocab);
        let total_steps = self
            .windows
            .values()
            .flatten()
            .map(|t| t.steps.len() as u64)
            .sum();
        let windows = self
            .windows
            .into_iter()
            .map(|(index, trajectories)| Window {
                index,
                trajectories,
                vocab: Arc::clone(&vocab),
            })
            .collect();
        Ok(Corpus {
            windows,
            stats: CorpusStats {
                total_steps,
                unique_entities: vocab.len(),
            },
            vocab,
        })
    }
}

/// A named geographic reference point used for discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct Landmark {
    pub label: Entity,
    /// Latitude and longitude in degrees.
    pub position: (f64, f64),
}

/// Reads `<label> <lat> <lon>` lines. Labels must be unique.
pub fn parse_landmarks<R: Read>(reader: R) -> Result<Vec<Landmark>> {
    let mut out: Vec<Landmark> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (n, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_ascii_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(line_no, "expected `<label> <lat> <lon>`"));
        }
        let label = Entity::new(fields[0]).map_err(|e| Error::parse(line_no, e.to_string()))?;
        let coord = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(line_no, format!("bad coordinate `{s}`")))
        };
        let position = (coord(fields[1])?, coord(fields[2])?);
        if !seen.insert(label.clone()) {
            return Err(Error::parse(line_no, format!("duplicate landmark `{label}`")));
        }
        out.push(Landmark { label, position });
    }
    Ok(out)
}

const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Great-circle distance in kilometres between two (lat, lon) points in degrees.
pub fn haversine_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lon1) = (a.0.to_radians(), a.1.to_radians());
    let (lat2, lon2) = (b.0.to_radians(), b.1.to_radians());
    let dlat = lat2 - lat1;
    let dlon = lon2 - lon1;
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Maps each point to its nearest landmark and collapses consecutive repeats.
///
/// Ties go to the lexicographically smallest label.
pub fn discretize(points: &[(f64, f64)], landmarks: &[Landmark]) -> Result<Vec<Entity>> {
    if landmarks.is_empty() {
        return Err(Error::Argument("landmark set is empty".into()));
    }
    let mut labels = Vec::with_capacity(points.len());
    for &p in points {
        if !(p.0.is_finite() && p.1.is_finite()) {
            return Err(Error::Argument(format!("non-finite coordinate {p:?}")));
        }
        let mut best: Option<(f64, &Landmark)> = None;
        for lm in landmarks {
            let d = haversine_km(p, lm.position);
            best = match best {
                None => Some((d, lm)),
                Some((bd, bl)) if d < bd || (d == bd && lm.label < bl.label) => Some((d, lm)),
                keep => keep,
            };
        }
        labels.push(best.expect("landmarks non-empty").1.label.clone());
    }
    Ok(dedupe_consecutive(&labels))
}
