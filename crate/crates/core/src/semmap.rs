//! Incremental topological map of visited places.
//!
//! Each incoming position either wins an existing node (whose center drifts
//! toward it and whose object evidence grows) or spawns a new node. Graph
//! edges record traversals between consecutive winners. Whenever the winner
//! changes, the object vector of the node being left is emitted so the place
//! categorizer can train on it.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Agent position on the horizontal plane, in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::NonFinitePosition { x, y });
        }
        Ok(Self { x, y })
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Per-object recognition certainties, each in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectEvidence(Vec<f64>);

impl ObjectEvidence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::CertaintyOutOfRange { index, value });
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SemmapConfig {
    /// Minimum winner activation for a sample to be absorbed by an existing node.
    pub activation_threshold: f64,
    /// Center learning rate.
    pub learning_rate: f64,
    /// Upper limit of the evidence accumulator.
    pub summation_limit: f64,
    pub n_objects: usize,
}

impl Default for SemmapConfig {
    fn default() -> Self {
        Self {
            activation_threshold: 0.5539,
            learning_rate: 0.0139,
            summation_limit: 5.0,
            n_objects: 18,
        }
    }
}

impl SemmapConfig {
    pub fn validate(&self) -> Result<()> {
        let at = self.activation_threshold;
        if !(at > 0.0 && at <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "semmap activation threshold {at} not in (0, 1]"
            )));
        }
        let e = self.learning_rate;
        if !(e > 0.0 && e < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "semmap learning rate {e} not in (0, 1)"
            )));
        }
        let st = self.summation_limit;
        if !(st > 0.0 && st.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "summation limit {st} must be positive"
            )));
        }
        if self.n_objects == 0 {
            return Err(Error::InvalidConfig("n_objects must be positive".into()));
        }
        Ok(())
    }

    /// Largest sample-to-center distance that still reaches the activation
    /// threshold.
    pub fn reach(&self) -> f64 {
        1.0 / self.activation_threshold - 1.0
    }
}

/// Radial activation of a node centered at `center` for position `p`.
pub fn node_activation(p: &Position, center: &Position) -> f64 {
    1.0 / (1.0 + p.distance(center))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapNode {
    id: NodeId,
    center: Position,
    phi: Vec<f64>,
    objects: Vec<f64>,
}

impl MapNode {
    /// New node at `center` whose accumulator starts at `evidence`, clamped to
    /// `[0, summation_limit]`.
    pub fn new(id: NodeId, center: Position, evidence: &ObjectEvidence, summation_limit: f64) -> Self {
        let phi = evidence
            .as_slice()
            .iter()
            .map(|r| r.clamp(0.0, summation_limit))
            .collect();
        let mut node = Self {
            id,
            center,
            phi,
            objects: Vec::new(),
        };
        node.recompute_objects(summation_limit);
        node
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn center(&self) -> Position {
        self.center
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn objects(&self) -> &[f64] {
        &self.objects
    }

    /// Adds `evidence` into the capped accumulator and refreshes the object
    /// vector.
    pub fn accumulate_evidence(&mut self, evidence: &ObjectEvidence, summation_limit: f64) -> Result<()> {
        if evidence.len() != self.phi.len() {
            return Err(Error::DimensionMismatch {
                expected: self.phi.len(),
                got: evidence.len(),
            });
        }
        for (acc, r) in self.phi.iter_mut().zip(evidence.as_slice()) {
            *acc = (*acc + r).min(summation_limit);
        }
        self.recompute_objects(summation_limit);
        Ok(())
    }

    /// `objects[i] = log_{1+s_t}(1 + phi[i])`.
    pub fn recompute_objects(&mut self, summation_limit: f64) {
        let denom = summation_limit.ln_1p();
        self.objects = self.phi.iter().map(|phi| phi.ln_1p() / denom).collect();
    }

    pub fn update_center(&mut self, p: &Position, learning_rate: f64) {
        self.center.x += learning_rate * (p.x - self.center.x);
        self.center.y += learning_rate * (p.y - self.center.y);
    }
}

/// Object vector of the node the agent just left.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingEmission {
    pub source_node: NodeId,
    pub vector: Vec<f64>,
}

/// What one call to [`TopoMap::process_sample`] did.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleOutcome {
    pub winner: NodeId,
    pub created: bool,
    pub emission: Option<TrainingEmission>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopoMap {
    config: SemmapConfig,
    nodes: Vec<MapNode>,
    edges: BTreeSet<(NodeId, NodeId)>,
    last_winner: Option<NodeId>,
}

impl TopoMap {
    pub fn new(config: SemmapConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            nodes: Vec::new(),
            edges: BTreeSet::new(),
            last_winner: None,
        })
    }

    pub fn config(&self) -> &SemmapConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[MapNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Option<&MapNode> {
        self.nodes.get(id.0 as usize)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Undirected edges, each stored as `(low id, high id)`.
    pub fn edges(&self) -> &BTreeSet<(NodeId, NodeId)> {
        &self.edges
    }

    pub fn last_winner(&self) -> Option<NodeId> {
        self.last_winner
    }

    /// Most active node for `p`; ties go to the lowest id.
    pub fn find_winner(&self, p: &Position) -> Option<(NodeId, f64)> {
        let mut best: Option<(NodeId, f64)> = None;
        for node in &self.nodes {
            let act = node_activation(p, &node.center);
            if best.is_none_or(|(_, b)| act > b) {
                best = Some((node.id, act));
            }
        }
        best
    }

    fn connect(&mut self, a: NodeId, b: NodeId) {
        if a != b {
            self.edges.insert((a.min(b), a.max(b)));
        }
    }

    fn emit(&self, id: NodeId) -> TrainingEmission {
        TrainingEmission {
            source_node: id,
            vector: self.nodes[id.0 as usize].objects.clone(),
        }
    }

    pub fn process_sample(&mut self, p: Position, evidence: &ObjectEvidence) -> Result<SampleOutcome> {
        if evidence.len() != self.config.n_objects {
            return Err(Error::DimensionMismatch {
                expected: self.config.n_objects,
                got: evidence.len(),
            });
        }
        let st = self.config.summation_limit;
        let winner = self
            .find_winner(&p)
            .filter(|&(_, act)| act >= self.config.activation_threshold);

        match winner {
            None => {
                let id = NodeId(self.nodes.len() as u32);
                self.nodes.push(MapNode::new(id, p, evidence, st));
                let emission = self.last_winner.map(|u| {
                    self.connect(id, u);
                    self.emit(u)
                });
                self.last_winner = Some(id);
                Ok(SampleOutcome {
                    winner: id,
                    created: true,
                    emission,
                })
            }
            Some((s, _)) => {
                let e = self.config.learning_rate;
                let node = &mut self.nodes[s.0 as usize];
                node.accumulate_evidence(evidence, st)?;
                node.update_center(&p, e);
                let emission = match self.last_winner {
                    Some(u) if u != s => {
                        self.connect(s, u);
                        Some(self.emit(u))
                    }
                    _ => None,
                };
                self.last_winner = Some(s);
                Ok(SampleOutcome {
                    winner: s,
                    created: false,
                    emission,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(x: f64, y: f64) -> Position {
        Position::new(x, y).unwrap()
    }

    fn cfg(n: usize) -> SemmapConfig {
        SemmapConfig {
            n_objects: n,
            ..SemmapConfig::default()
        }
    }

    fn map_with_nodes(centers: &[(f64, f64)]) -> TopoMap {
        let mut map = TopoMap::new(cfg(1)).unwrap();
        for (i, &(x, y)) in centers.iter().enumerate() {
            map.nodes
                .push(MapNode::new(NodeId(i as u32), pos(x, y), &ObjectEvidence::zeros(1), 5.0));
        }
        map
    }

    #[test]
    fn activation_examples() {
        assert_eq!(node_activation(&pos(0.0, 0.0), &pos(0.0, 0.0)), 1.0);
        assert!((node_activation(&pos(3.0, 4.0), &pos(0.0, 0.0)) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(node_activation(&pos(1.0, 1.0), &pos(1.0, 2.0)), 0.5);
    }

    #[test]
    fn winner_on_empty_map_is_none() {
        let map = TopoMap::new(cfg(1)).unwrap();
        assert_eq!(map.find_winner(&pos(1.0, 2.0)), None);
    }

    #[test]
    fn winner_is_nearest() {
        let map = map_with_nodes(&[(0.0, 0.0), (10.0, 10.0)]);
        assert_eq!(map.find_winner(&pos(1.0, 0.0)), Some((NodeId(0), 0.5)));
    }

    #[test]
    fn winner_tie_goes_to_lowest_id() {
        let map = map_with_nodes(&[(0.0, 0.0), (2.0, 0.0)]);
        assert_eq!(map.find_winner(&pos(1.0, 0.0)), Some((NodeId(0), 0.5)));
        let map = map_with_nodes(&[(2.0, 0.0), (0.0, 0.0)]);
        assert_eq!(map.find_winner(&pos(1.0, 0.0)), Some((NodeId(0), 0.5)));
    }

    #[test]
    fn accumulation_caps_at_limit() {
        let mut node = MapNode::new(NodeId(0), pos(0.0, 0.0), &ObjectEvidence::zeros(2), 5.0);
        node.phi = vec![4.7, 0.0];
        node.accumulate_evidence(&ObjectEvidence::new(vec![0.6, 0.0]).unwrap(), 5.0)
            .unwrap();
        assert_eq!(node.phi(), &[5.0, 0.0]);
        assert_eq!(node.objects()[0], 1.0);
        assert_eq!(node.objects()[1], 0.0);
    }

    #[test]
    fn accumulation_rejects_wrong_dimension() {
        let mut node = MapNode::new(NodeId(0), pos(0.0, 0.0), &ObjectEvidence::zeros(2), 5.0);
        let err = node
            .accumulate_evidence(&ObjectEvidence::zeros(3), 5.0)
            .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, got: 3 }));
    }

    #[test]
    fn object_vector_log_scale() {
        let mut node = MapNode::new(NodeId(0), pos(0.0, 0.0), &ObjectEvidence::zeros(3), 5.0);
        node.phi = vec![0.0, 5.0, 2.0];
        node.recompute_objects(5.0);
        assert_eq!(node.objects()[0], 0.0);
        assert!((node.objects()[1] - 1.0).abs() < 1e-15);
        // log(3)/log(6) evaluated at 30 digits: 0.613147192765458413...
        assert!((node.objects()[2] - 0.613_147_192_765_458_4).abs() < 1e-15);
    }

    #[test]
    fn center_update_examples() {
        let mut node = MapNode::new(NodeId(0), pos(0.0, 0.0), &ObjectEvidence::zeros(1), 5.0);
        node.update_center(&pos(1.0, 1.0), 0.0139);
        assert!((node.center().x - 0.0139).abs() < 1e-15);
        assert!((node.center().y - 0.0139).abs() < 1e-15);

        let mut node = MapNode::new(NodeId(0), pos(3.0, 3.0), &ObjectEvidence::zeros(1), 5.0);
        node.update_center(&pos(3.0, 3.0), 0.3);
        assert_eq!(node.center(), pos(3.0, 3.0));

        let mut node = MapNode::new(NodeId(0), pos(2.0, 0.0), &ObjectEvidence::zeros(1), 5.0);
        node.update_center(&pos(0.0, 0.0), 0.5);
        assert_eq!(node.center(), pos(1.0, 0.0));
    }

    #[test]
    fn first_sample_bootstraps_without_emission() {
        let mut map = TopoMap::new(cfg(2)).unwrap();
        let out = map.process_sample(pos(0.0, 0.0), &ObjectEvidence::zeros(2)).unwrap();
        assert!(out.created);
        assert_eq!(out.emission, None);
        assert_eq!(map.len(), 1);
        assert_eq!(map.nodes()[0].center(), pos(0.0, 0.0));
        assert!(map.edges().is_empty());
    }

    #[test]
    fn far_sample_creates_connected_node_and_emits_previous() {
        let mut map = TopoMap::new(cfg(2)).unwrap();
        let r = ObjectEvidence::new(vec![1.0, 0.5]).unwrap();
        map.process_sample(pos(0.0, 0.0), &r).unwrap();
        let before = map.nodes()[0].objects().to_vec();
        let out = map
            .process_sample(pos(100.0, 100.0), &ObjectEvidence::zeros(2))
            .unwrap();
        assert!(out.created);
        assert_eq!(out.winner, NodeId(1));
        let em = out.emission.unwrap();
        assert_eq!(em.source_node, NodeId(0));
        assert_eq!(em.vector, before);
        assert!(map.edges().contains(&(NodeId(0), NodeId(1))));
        assert_eq!(map.last_winner(), Some(NodeId(1)));
    }

    #[test]
    fn repeated_winner_adapts_without_emission() {
        let mut map = TopoMap::new(cfg(1)).unwrap();
        let r = ObjectEvidence::new(vec![0.5]).unwrap();
        map.process_sample(pos(0.0, 0.0), &r).unwrap();
        let a = map.process_sample(pos(0.1, 0.0), &r).unwrap();
        let b = map.process_sample(pos(0.1, 0.0), &r).unwrap();
        assert_eq!(a.emission, None);
        assert_eq!(b.emission, None);
        assert_eq!(map.len(), 1);
        assert!(map.edges().is_empty());
        assert!((map.nodes()[0].phi()[0] - 1.5).abs() < 1e-15);
        assert!(map.nodes()[0].center().x > 0.0);
    }

    #[test]
    fn returning_to_old_node_connects_and_emits() {
        let mut map = TopoMap::new(cfg(1)).unwrap();
        let r = ObjectEvidence::zeros(1);
        map.process_sample(pos(0.0, 0.0), &r).unwrap();
        map.process_sample(pos(5.0, 0.0), &r).unwrap();
        let out = map.process_sample(pos(0.0, 0.0), &r).unwrap();
        assert!(!out.created);
        assert_eq!(out.winner, NodeId(0));
        assert_eq!(out.emission.unwrap().source_node, NodeId(1));
        assert_eq!(map.edges().len(), 1);
    }

    #[test]
    fn sample_dimension_checked() {
        let mut map = TopoMap::new(cfg(3)).unwrap();
        let err = map
            .process_sample(pos(0.0, 0.0), &ObjectEvidence::zeros(2))
            .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn evidence_and_position_validation() {
        assert!(matches!(
            ObjectEvidence::new(vec![0.2, 1.2]),
            Err(Error::CertaintyOutOfRange { index: 1, .. })
        ));
        assert!(ObjectEvidence::new(vec![f64::NAN]).is_err());
        assert!(Position::new(f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SemmapConfig::default().validate().is_ok());
        let bad = SemmapConfig {
            learning_rate: 1.0,
            ..SemmapConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SemmapConfig {
            n_objects: 0,
            ..SemmapConfig::default()
        };
        assert!(TopoMap::new(bad).is_err());
    }
}
