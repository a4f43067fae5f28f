//! Replay driver wiring the topological map to the place categorizer.
//!
//! Each record goes through the topological map; a winner transition emits
//! the departed node's object vector, which is immediately used to train the
//! categorizer. Every sequence builds its own topological map while the
//! categorizer is shared across all of them.

use std::collections::BTreeMap;
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::SequenceFile;
use crate::metrics::{evaluate, EvalReport};
use crate::olarfdssom::{ClusterId, OlarfdssomConfig, SomMap};
use crate::semmap::{NodeId, ObjectEvidence, Position, SemmapConfig, TopoMap};
use crate::snapshot::Shared;

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetRecord {
    pub position: Position,
    pub evidence: ObjectEvidence,
    /// Ground-truth place category, used only for evaluation.
    pub label: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub semmap: SemmapConfig,
    pub som: OlarfdssomConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.semmap.validate()?;
        self.som.validate()
    }
}

/// Categorizer training triggered by a record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Training {
    pub source_node: NodeId,
    /// Cluster that absorbed (or was created for) the emitted vector.
    pub cluster: ClusterId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogEntry {
    pub node: NodeId,
    pub created: bool,
    pub training: Option<Training>,
}

/// One replayed sequence: its own topological map and per-record log.
#[derive(Clone, Debug)]
pub struct SequenceRun {
    pub id: String,
    pub topo: TopoMap,
    pub log: Vec<LogEntry>,
    pub labels: Vec<Option<String>>,
}

impl SequenceRun {
    /// Ground truth of each node: the majority label of the records it won,
    /// ties broken by the earliest such record.
    pub fn node_truths(&self) -> BTreeMap<NodeId, String> {
        let mut tallies: BTreeMap<NodeId, BTreeMap<&str, (usize, usize)>> = BTreeMap::new();
        for (i, (entry, label)) in self.log.iter().zip(&self.labels).enumerate() {
            if let Some(label) = label {
                let slot = tallies
                    .entry(entry.node)
                    .or_default()
                    .entry(label.as_str())
                    .or_insert((0, i));
                slot.0 += 1;
            }
        }
        tallies
            .into_iter()
            .filter_map(|(node, counts)| {
                counts
                    .into_iter()
                    .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
                    .map(|(label, _)| (node, label.to_string()))
            })
            .collect()
    }

    pub fn has_labels(&self) -> bool {
        self.labels.iter().any(Option::is_some)
    }

    pub fn trainings(&self) -> usize {
        self.log.iter().filter(|e| e.training.is_some()).count()
    }
}

/// Node-level and record-level scores for one assignment snapshot.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelReports {
    pub node: EvalReport,
    pub frame: EvalReport,
}

/// Scores the given sequences under their node assignments, pooling all
/// items. Returns `None` when no labeled record is covered.
pub fn evaluate_runs<'a>(
    runs: impl IntoIterator<Item = (&'a SequenceRun, &'a BTreeMap<NodeId, ClusterId>)>,
) -> Result<Option<LevelReports>> {
    let (mut node_pred, mut node_truth) = (Vec::new(), Vec::new());
    let (mut frame_pred, mut frame_truth) = (Vec::new(), Vec::new());
    for (run, assignment) in runs {
        for (node, truth) in run.node_truths() {
            if let Some(&c) = assignment.get(&node) {
                node_pred.push(c);
                node_truth.push(truth);
            }
        }
        for (entry, label) in run.log.iter().zip(&run.labels) {
            if let (Some(label), Some(&c)) = (label, assignment.get(&entry.node)) {
                frame_pred.push(c);
                frame_truth.push(label.clone());
            }
        }
    }
    if node_pred.is_empty() {
        return Ok(None);
    }
    Ok(Some(LevelReports {
        node: evaluate(&node_pred, &node_truth)?,
        frame: evaluate(&frame_pred, &frame_truth)?,
    }))
}

#[derive(Clone, Debug)]
pub struct RunState {
    pub som: SomMap,
    pub sequences: Vec<SequenceRun>,
    pub emissions: usize,
    semmap_config: SemmapConfig,
}

impl RunState {
    pub fn new(config: &PipelineConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            som: SomMap::new(config.som.clone(), config.semmap.n_objects)?,
            sequences: Vec::new(),
            emissions: 0,
            semmap_config: config.semmap.clone(),
        })
    }

    /// Starts a fresh topological map; later steps feed it.
    pub fn begin_sequence(&mut self, id: impl Into<String>) -> Result<()> {
        self.sequences.push(SequenceRun {
            id: id.into(),
            topo: TopoMap::new(self.semmap_config.clone())?,
            log: Vec::new(),
            labels: Vec::new(),
        });
        Ok(())
    }

    pub fn current(&self) -> Option<&SequenceRun> {
        self.sequences.last()
    }

    pub fn step(&mut self, record: &DatasetRecord) -> Result<&LogEntry> {
        if self.sequences.is_empty() {
            self.begin_sequence("0")?;
        }
        let run = self.sequences.last_mut().expect("sequence exists");
        let outcome = run.topo.process_sample(record.position, &record.evidence)?;
        let training = match outcome.emission {
            Some(em) => {
                let trained = self.som.train(&em.vector)?;
                self.emissions += 1;
                Some(Training {
                    source_node: em.source_node,
                    cluster: trained.winner,
                })
            }
            None => None,
        };
        run.log.push(LogEntry {
            node: outcome.winner,
            created: outcome.created,
            training,
        });
        run.labels.push(record.label.clone());
        Ok(run.log.last().expect("just pushed"))
    }

    /// Current cluster of every node of sequence `index`.
    pub fn categorize_nodes(&self, index: usize) -> Result<BTreeMap<NodeId, ClusterId>> {
        let run = self
            .sequences
            .get(index)
            .ok_or_else(|| Error::InvalidConfig(format!("no sequence {index}")))?;
        categorize(&run.topo, &self.som)
    }

    pub fn categorize_all(&self) -> Result<Vec<BTreeMap<NodeId, ClusterId>>> {
        (0..self.sequences.len()).map(|i| self.categorize_nodes(i)).collect()
    }
}

/// Assigns every node of `topo` to the cluster of its object vector.
pub fn categorize(topo: &TopoMap, som: &SomMap) -> Result<BTreeMap<NodeId, ClusterId>> {
    topo.nodes()
        .iter()
        .map(|n| som.cluster(n.objects()).map(|c| (n.id(), c)))
        .collect()
}

/// Categorization of all sequences trained so far, taken after one sequence
/// finished.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    /// Position in the training order of the sequence that just finished.
    pub after: usize,
    /// Per trained sequence (in training order); `None` while nothing has been
    /// learned yet.
    pub assignments: Option<Vec<BTreeMap<NodeId, ClusterId>>>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub state: RunState,
    /// Sequence indices into the input slice, in training order.
    pub order: Vec<usize>,
    pub checkpoints: Vec<Checkpoint>,
}

impl RunOutcome {
    /// Scores of one trained sequence (position `k` in training order) right
    /// after its own training and after all training.
    pub fn overtime(&self, k: usize) -> Result<(Option<LevelReports>, Option<LevelReports>)> {
        let run = &self.state.sequences[k];
        let score = |cp: &Checkpoint| -> Result<Option<LevelReports>> {
            match &cp.assignments {
                Some(a) => evaluate_runs([(run, &a[k])]),
                None => Ok(None),
            }
        };
        let mid = score(&self.checkpoints[k])?;
        let last = score(self.checkpoints.last().expect("at least one checkpoint"))?;
        Ok((mid, last))
    }

    /// Final scores pooled over every sequence.
    pub fn final_report(&self) -> Result<Option<LevelReports>> {
        match &self.checkpoints.last().and_then(|c| c.assignments.as_ref()) {
            Some(a) => evaluate_runs(self.state.sequences.iter().zip(a.iter())),
            None => Ok(None),
        }
    }
}

/// Seeded permutation of `0..n`.
pub fn shuffled_order(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

/// Trains on `sequences` in `order`, checkpointing the categorization of all
/// sequences seen so far after each one.
pub fn run_sequences(sequences: &[SequenceFile], config: &PipelineConfig, order: &[usize]) -> Result<RunOutcome> {
    if sequences.is_empty() {
        return Err(Error::InvalidConfig("no sequences to run".into()));
    }
    let mut state = RunState::new(config)?;
    let mut checkpoints = Vec::with_capacity(order.len());
    for (k, &i) in order.iter().enumerate() {
        let seq = sequences
            .get(i)
            .ok_or_else(|| Error::InvalidConfig(format!("order references sequence {i}")))?;
        if seq.object_names.len() != config.semmap.n_objects {
            return Err(Error::DimensionMismatch {
                expected: config.semmap.n_objects,
                got: seq.object_names.len(),
            });
        }
        state.begin_sequence(seq.id.clone().unwrap_or_else(|| i.to_string()))?;
        for record in &seq.records {
            state.step(record)?;
        }
        let assignments = match state.categorize_all() {
            Ok(a) => Some(a),
            Err(Error::NoCategories) => None,
            Err(e) => return Err(e),
        };
        checkpoints.push(Checkpoint { after: k, assignments });
    }
    Ok(RunOutcome {
        state,
        order: order.to_vec(),
        checkpoints,
    })
}

/// Ingestion and categorization that may run on different threads. Records
/// are serialized through an internal lock; queries work on a consistent
/// snapshot of both maps.
#[derive(Debug)]
pub struct LiveSession {
    topo: Shared<TopoMap>,
    som: Shared<SomMap>,
    writer: Mutex<usize>,
}

impl LiveSession {
    pub fn new(config: &PipelineConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            topo: Shared::new(TopoMap::new(config.semmap.clone())?),
            som: Shared::new(SomMap::new(config.som.clone(), config.semmap.n_objects)?),
            writer: Mutex::new(0),
        })
    }

    /// Feeds one record; returns whether the categorizer was trained.
    pub fn step(&self, record: &DatasetRecord) -> Result<bool> {
        let mut trainings = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let outcome = self
            .topo
            .update(|t| t.process_sample(record.position, &record.evidence))?;
        if let Some(em) = outcome.emission {
            self.som.update(|s| s.train(&em.vector))?;
            *trainings += 1;
            return Ok(true);
        }
        Ok(false)
    }

    pub fn trainings(&self) -> usize {
        *self.writer.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn topo_snapshot(&self) -> std::sync::Arc<TopoMap> {
        self.topo.snapshot()
    }

    pub fn som_snapshot(&self) -> std::sync::Arc<SomMap> {
        self.som.snapshot()
    }

    pub fn categorize_nodes(&self) -> Result<BTreeMap<NodeId, ClusterId>> {
        let topo = self.topo.snapshot();
        let som = self.som.snapshot();
        categorize(&topo, &som)
    }
}
