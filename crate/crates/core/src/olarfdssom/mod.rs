//! Online growing self-organizing map for subspace clustering of place
//! descriptors.
//!
//! Every node keeps a prototype, a running average of per-dimension
//! distances and a relevance vector derived from it, so each cluster weights
//! the input dimensions it finds stable. Nodes are inserted when no node is
//! active enough and pruned periodically when they win too rarely. Unlike the
//! batch variant, surviving nodes keep their win counts across prunes, so a
//! category not seen for a long time is not forgotten.

mod state;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use state::FloatFormat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClusterId(pub u64);

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OlarfdssomConfig {
    /// Winner activation below which a new node is inserted.
    pub activation_threshold: f64,
    /// Fraction of `max_competitions` a node must win to survive a prune.
    pub lowest_win_fraction: f64,
    /// Scales the moving-average rate of the distance vectors.
    pub relevance_rate: f64,
    /// Competitions between prune checks.
    pub max_competitions: u32,
    pub winner_rate: f64,
    pub neighbor_rate: f64,
    pub relevance_smoothness: f64,
    pub connection_threshold: f64,
    pub max_nodes: usize,
    pub epsilon: f64,
}

impl Default for OlarfdssomConfig {
    fn default() -> Self {
        Self::preset_a()
    }
}

impl OlarfdssomConfig {
    /// Final configuration used for most experiments.
    pub fn preset_a() -> Self {
        Self {
            activation_threshold: 0.9879,
            lowest_win_fraction: 0.1914,
            relevance_rate: 0.0163,
            max_competitions: 34,
            winner_rate: 0.0118,
            neighbor_rate: 0.0076,
            relevance_smoothness: 0.0781,
            connection_threshold: 0.0301,
            max_nodes: 40,
            epsilon: 1e-9,
        }
    }

    /// Configuration tuned for the pairwise comparison experiment.
    pub fn preset_b() -> Self {
        Self {
            activation_threshold: 0.9668,
            lowest_win_fraction: 0.1414,
            relevance_rate: 0.0532,
            max_competitions: 89,
            winner_rate: 0.0436,
            neighbor_rate: 0.0109,
            relevance_smoothness: 0.0453,
            connection_threshold: 0.1108,
            ..Self::preset_a()
        }
    }

    /// Win count below which a node is removed at a prune.
    pub fn survival_threshold(&self) -> f64 {
        self.lowest_win_fraction * f64::from(self.max_competitions)
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} = {v} not in (0, 1)")))
            }
        };
        open_unit("activation threshold", self.activation_threshold)?;
        open_unit("lowest win fraction", self.lowest_win_fraction)?;
        open_unit("relevance rate", self.relevance_rate)?;
        open_unit("winner rate", self.winner_rate)?;
        if !(self.neighbor_rate > 0.0 && self.neighbor_rate <= self.winner_rate) {
            return Err(Error::InvalidConfig(format!(
                "neighbor rate {} not in (0, winner rate {}]",
                self.neighbor_rate, self.winner_rate
            )));
        }
        if self.max_competitions < 1 {
            return Err(Error::InvalidConfig("max competitions must be >= 1".into()));
        }
        if !(self.relevance_smoothness > 0.0 && self.relevance_smoothness.is_finite()) {
            return Err(Error::InvalidConfig("relevance smoothness must be positive".into()));
        }
        if !(self.connection_threshold >= 0.0 && self.connection_threshold.is_finite()) {
            return Err(Error::InvalidConfig("connection threshold must be >= 0".into()));
        }
        if self.max_nodes < 1 {
            return Err(Error::InvalidConfig("max nodes must be >= 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig("epsilon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SomNode {
    pub id: ClusterId,
    pub center: Vec<f64>,
    pub delta: Vec<f64>,
    pub relevance: Vec<f64>,
    pub wins: f64,
}

impl SomNode {
    pub fn new(id: ClusterId, x: &[f64], wins: f64) -> Self {
        Self {
            id,
            center: x.to_vec(),
            delta: vec![0.0; x.len()],
            relevance: vec![1.0; x.len()],
            wins,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.center.len() {
            return Err(Error::DimensionMismatch {
                expected: self.center.len(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `sqrt(sum_i relevance_i * (x_i - center_i)^2)`
    pub fn weighted_distance(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.weighted_distance_unchecked(x))
    }

    fn weighted_distance_unchecked(&self, x: &[f64]) -> f64 {
        self.relevance
            .iter()
            .zip(x.iter().zip(&self.center))
            .map(|(w, (xi, ci))| w * (xi - ci) * (xi - ci))
            .sum::<f64>()
            .sqrt()
    }

    /// Activation in `[0, 1)`; equals `sum(relevance) / (sum(relevance) + distance + epsilon)`.
    pub fn activation(&self, x: &[f64], epsilon: f64) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.activation_unchecked(x, epsilon))
    }

    fn activation_unchecked(&self, x: &[f64], epsilon: f64) -> f64 {
        let mass: f64 = self.relevance.iter().sum();
        mass / (mass + self.weighted_distance_unchecked(x) + epsilon)
    }

    /// Moves distance statistics, relevances and center toward `x` with rate
    /// `rate`.
    fn adapt(&mut self, x: &[f64], rate: f64, relevance_rate: f64, smoothness: f64) {
        let avg_rate = relevance_rate * rate;
        for ((d, c), xi) in self.delta.iter_mut().zip(&self.center).zip(x) {
            *d = (1.0 - avg_rate) * *d + avg_rate * (xi - c).abs();
        }
        self.relevance = relevance_from_delta(&self.delta, smoothness);
        for (c, xi) in self.center.iter_mut().zip(x) {
            *c += rate * (xi - *c);
        }
    }
}

/// Logistic ramp from distance statistics to relevances: dimensions with
/// below-average spread approach 1, above-average approach 0. A flat `delta`
/// yields all ones.
pub fn relevance_from_delta(delta: &[f64], smoothness: f64) -> Vec<f64> {
    let (min, max) = delta
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    if delta.is_empty() || !(max > min) {
        return vec![1.0; delta.len()];
    }
    let mean = delta.iter().sum::<f64>() / delta.len() as f64;
    let scale = smoothness * (max - min);
    delta
        .iter()
        .map(|d| 1.0 / (1.0 + ((d - mean) / scale).exp()))
        .collect()
}

/// Whether two relevance vectors are close enough to be neighbors: their
/// mean absolute difference is below `threshold`.
pub fn relevances_connect(a: &[f64], b: &[f64], threshold: f64) -> bool {
    let total: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    total < threshold * a.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    /// Node that absorbed the pattern, or the node created for it.
    pub winner: ClusterId,
    /// Winner activation before any insertion; `None` when the map was empty.
    pub activation: Option<f64>,
    pub created: bool,
    /// Nodes removed by a prune triggered at the end of this call.
    pub removed: Vec<ClusterId>,
    pub pruned: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SomMap {
    config: OlarfdssomConfig,
    dim: usize,
    nodes: Vec<SomNode>,
    connections: BTreeSet<(ClusterId, ClusterId)>,
    nwins: u64,
    next_id: u64,
    prunes: u64,
}

impl SomMap {
    pub fn new(config: OlarfdssomConfig, dim: usize) -> Result<Self> {
        config.validate()?;
        if dim == 0 {
            return Err(Error::InvalidConfig("input dimension must be positive".into()));
        }
        Ok(Self {
            config,
            dim,
            nodes: Vec::new(),
            connections: BTreeSet::new(),
            nwins: 0,
            next_id: 0,
            prunes: 0,
        })
    }

    pub fn config(&self) -> &OlarfdssomConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[SomNode] {
        &self.nodes
    }

    pub fn node(&self, id: ClusterId) -> Option<&SomNode> {
        self.index_of(id).map(|i| &self.nodes[i])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn connections(&self) -> &BTreeSet<(ClusterId, ClusterId)> {
        &self.connections
    }

    /// Competitions since the last prune.
    pub fn nwins(&self) -> u64 {
        self.nwins
    }

    /// Number of prune events so far.
    pub fn prune_count(&self) -> u64 {
        self.prunes
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    fn index_of(&self, id: ClusterId) -> Option<usize> {
        // nodes stay sorted by id: ids are issued increasingly and removal
        // preserves order
        self.nodes.binary_search_by_key(&id, |n| n.id).ok()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::CertaintyOutOfRange { index, value });
        }
        Ok(())
    }

    /// Most active node for `x`; ties go to the lowest id.
    pub fn find_winner(&self, x: &[f64]) -> Result<(ClusterId, f64)> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let eps = self.config.epsilon;
        let mut best: Option<(ClusterId, f64)> = None;
        for node in &self.nodes {
            let act = node.activation_unchecked(x, eps);
            if best.is_none_or(|(_, b)| act > b) {
                best = Some((node.id, act));
            }
        }
        best.ok_or(Error::NoCategories)
    }

    /// Assigns `x` to a cluster without touching the map.
    pub fn cluster(&self, x: &[f64]) -> Result<ClusterId> {
        self.find_winner(x).map(|(id, _)| id)
    }

    fn neighbors_of(&self, id: ClusterId) -> Vec<ClusterId> {
        self.connections
            .iter()
            .filter_map(|&(a, b)| {
                if a == id {
                    Some(b)
                } else if b == id {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Adapts the winner with the winner rate, its neighbors with the
    /// neighbor rate, and counts a win.
    pub fn adapt(&mut self, winner: ClusterId, x: &[f64]) -> Result<()> {
        self.check_input(x)?;
        let wi = self.index_of(winner).ok_or(Error::NoCategories)?;
        let cfg = &self.config;
        let (beta, s) = (cfg.relevance_rate, cfg.relevance_smoothness);
        let (eb, en) = (cfg.winner_rate, cfg.neighbor_rate);
        for nb in self.neighbors_of(winner) {
            if let Some(ni) = self.index_of(nb) {
                self.nodes[ni].adapt(x, en, beta, s);
            }
        }
        let node = &mut self.nodes[wi];
        node.adapt(x, eb, beta, s);
        node.wins += 1.0;
        Ok(())
    }

    fn connect_new(&mut self, id: ClusterId) {
        let Some(i) = self.index_of(id) else { return };
        let c = self.config.connection_threshold;
        let fresh = &self.nodes[i].relevance;
        let linked: Vec<ClusterId> = self
            .nodes
            .iter()
            .filter(|n| n.id != id && relevances_connect(fresh, &n.relevance, c))
            .map(|n| n.id)
            .collect();
        for other in linked {
            self.connections.insert((id.min(other), id.max(other)));
        }
    }

    /// Rebuilds every connection from the current relevance vectors.
    pub fn update_connections(&mut self) {
        let c = self.config.connection_threshold;
        self.connections.clear();
        for (i, a) in self.nodes.iter().enumerate() {
            for b in &self.nodes[i + 1..] {
                if relevances_connect(&a.relevance, &b.relevance, c) {
                    self.connections.insert((a.id, b.id));
                }
            }
        }
    }

    /// Runs the periodic removal once `max_competitions` competitions have
    /// accumulated. Survivors keep their win counts.
    pub fn maybe_prune(&mut self) -> Option<Vec<ClusterId>> {
        if self.nwins < u64::from(self.config.max_competitions) {
            return None;
        }
        let threshold = self.config.survival_threshold();
        let removed: Vec<ClusterId> = self
            .nodes
            .iter()
            .filter(|n| n.wins < threshold)
            .map(|n| n.id)
            .collect();
        self.nodes.retain(|n| n.wins >= threshold);
        self.update_connections();
        self.nwins = 0;
        self.prunes += 1;
        Some(removed)
    }

    fn insert(&mut self, x: &[f64], wins: f64) -> ClusterId {
        let id = ClusterId(self.next_id);
        self.next_id += 1;
        self.nodes.push(SomNode::new(id, x, wins));
        id
    }

    /// One online self-organization step on pattern `x`.
    pub fn train(&mut self, x: &[f64]) -> Result<TrainOutcome> {
        self.check_input(x)?;
        let (winner, activation, created) = if self.nodes.is_empty() {
            (self.insert(x, 0.0), None, true)
        } else {
            let (s, act) = self.find_winner(x)?;
            if act < self.config.activation_threshold && self.nodes.len() < self.config.max_nodes {
                let wins = self.config.lowest_win_fraction * self.nwins as f64;
                let id = self.insert(x, wins);
                self.connect_new(id);
                (id, Some(act), true)
            } else {
                self.adapt(s, x)?;
                (s, Some(act), false)
            }
        };
        let pruned = self.maybe_prune();
        self.nwins += 1;
        Ok(TrainOutcome {
            winner,
            activation,
            created,
            pruned: pruned.is_some(),
            removed: pruned.unwrap_or_default(),
        })
    }

    pub(crate) fn from_parts(
        config: OlarfdssomConfig,
        dim: usize,
        nodes: Vec<SomNode>,
        connections: BTreeSet<(ClusterId, ClusterId)>,
        nwins: u64,
        next_id: u64,
        prunes: u64,
    ) -> Result<Self> {
        config.validate()?;
        let mut ids: Vec<ClusterId> = nodes.iter().map(|n| n.id).collect();
        ids.sort();
        ids.dedup();
        if ids.len() != nodes.len() {
            return Err(Error::InvalidConfig("duplicate node ids".into()));
        }
        let mut map = Self {
            config,
            dim,
            nodes,
            connections,
            nwins,
            next_id,
            prunes,
        };
        map.nodes.sort_by_key(|n| n.id);
        if map.nodes.iter().any(|n| n.center.len() != dim || n.delta.len() != dim || n.relevance.len() != dim) {
            return Err(Error::InvalidConfig("node vector length differs from map dimension".into()));
        }
        if map.nodes.last().is_some_and(|n| n.id.0 >= next_id) {
            return Err(Error::InvalidConfig("next id must exceed every node id".into()));
        }
        if map
            .connections
            .iter()
            .any(|&(a, b)| a >= b || map.index_of(a).is_none() || map.index_of(b).is_none())
        {
            return Err(Error::InvalidConfig("connection references a missing node".into()));
        }
        Ok(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(center: Vec<f64>, relevance: Vec<f64>) -> SomNode {
        let n = center.len();
        SomNode {
            id: ClusterId(0),
            center,
            delta: vec![0.0; n],
            relevance,
            wins: 0.0,
        }
    }

    fn small_cfg() -> OlarfdssomConfig {
        OlarfdssomConfig {
            max_nodes: 10,
            ..OlarfdssomConfig::default()
        }
    }

    #[test]
    fn weighted_distance_examples() {
        let n = node(vec![0.3, 0.7], vec![0.2, 0.9]);
        assert_eq!(n.weighted_distance(&[0.3, 0.7]).unwrap(), 0.0);
        let n = node(vec![0.0, 0.0], vec![0.0, 0.0]);
        assert_eq!(n.weighted_distance(&[1.0, 1.0]).unwrap(), 0.0);
        let n = node(vec![0.0, 0.0], vec![0.25, 1.0]);
        assert_eq!(n.weighted_distance(&[1.0, 0.0]).unwrap(), 0.5);
        assert!(matches!(
            n.weighted_distance(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn activation_examples() {
        let n = node(vec![0.5; 18], vec![1.0; 18]);
        assert!((n.activation(&[0.5; 18], 1e-9).unwrap() - 1.0).abs() < 1e-9);
        let n = node(vec![0.5; 3], vec![0.0; 3]);
        assert_eq!(n.activation(&[0.1; 3], 1e-9).unwrap(), 0.0);
        // weighted distance exactly 2 with relevance mass 2
        let n = node(vec![0.0, 0.0], vec![1.0, 1.0]);
        let x = [2.0f64.sqrt(), 2.0f64.sqrt()];
        assert!((n.weighted_distance(&x).unwrap() - 2.0).abs() < 1e-12);
        assert!((n.activation(&x, 1e-300).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn relevance_ramp_example() {
        // frozen from a 30-digit evaluation of the logistic ramp
        let w = relevance_from_delta(&[0.4, 0.0], 0.0781);
        assert!((w[0] - 0.001_655_411_866_559_541).abs() < 1e-15);
        assert!((w[1] - 0.998_344_588_133_440_5).abs() < 1e-15);
        assert_eq!(relevance_from_delta(&[0.2, 0.2, 0.2], 0.0781), vec![1.0; 3]);
        assert_eq!(relevance_from_delta(&[0.0; 4], 0.0781), vec![1.0; 4]);
    }

    #[test]
    fn unit_rate_average_is_exact_distance() {
        let mut n = node(vec![0.25, 0.875], vec![1.0, 1.0]);
        n.adapt(&[0.75, 0.375], 1.0, 1.0, 0.1);
        assert_eq!(n.delta, vec![0.5, 0.5]);
        assert_eq!(n.center, vec![0.75, 0.375]);
    }

    #[test]
    fn repeated_identical_input_keeps_full_relevance() {
        let mut n = node(vec![0.4; 3], vec![1.0; 3]);
        for _ in 0..100 {
            n.adapt(&[0.4; 3], 0.5, 0.5, 0.0781);
        }
        assert_eq!(n.delta, vec![0.0; 3]);
        assert_eq!(n.relevance, vec![1.0; 3]);
    }

    #[test]
    fn survival_threshold_config_a() {
        let cfg = OlarfdssomConfig::preset_a();
        let t = cfg.survival_threshold();
        assert!((t - 6.5076).abs() < 1e-12);
        assert!(7.0 >= t && 6.0 < t);
    }

    #[test]
    fn prune_removes_rare_winners_and_keeps_counts() {
        let mut map = SomMap::new(small_cfg(), 2).unwrap();
        map.insert(&[0.0, 0.0], 7.0);
        map.insert(&[1.0, 1.0], 6.0);
        map.insert(&[0.5, 0.5], 10.0);
        map.nwins = 20;
        assert_eq!(map.maybe_prune(), None);
        map.nwins = 34;
        let removed = map.maybe_prune().unwrap();
        assert_eq!(removed, vec![ClusterId(1)]);
        assert_eq!(map.len(), 2);
        assert_eq!(map.node(ClusterId(0)).unwrap().wins, 7.0);
        assert_eq!(map.node(ClusterId(2)).unwrap().wins, 10.0);
        assert_eq!(map.nwins(), 0);
    }

    #[test]
    fn prune_with_all_survivors_only_resets_counter() {
        let mut map = SomMap::new(small_cfg(), 2).unwrap();
        map.insert(&[0.0, 0.0], 7.0);
        map.insert(&[1.0, 1.0], 9.0);
        map.update_connections();
        let before = (map.nodes.clone(), map.connections.clone());
        map.nwins = 40;
        assert_eq!(map.maybe_prune(), Some(vec![]));
        assert_eq!((map.nodes.clone(), map.connections.clone()), before);
        assert_eq!(map.nwins(), 0);
    }

    #[test]
    fn first_pattern_bootstraps() {
        let mut map = SomMap::new(small_cfg(), 3).unwrap();
        let out = map.train(&[0.1, 0.2, 0.3]).unwrap();
        assert!(out.created);
        assert_eq!(out.activation, None);
        let n = &map.nodes()[0];
        assert_eq!(n.center, vec![0.1, 0.2, 0.3]);
        assert_eq!(n.relevance, vec![1.0; 3]);
        assert_eq!(n.delta, vec![0.0; 3]);
        assert_eq!(n.wins, 0.0);
        assert_eq!(map.nwins(), 1);
    }

    #[test]
    fn distant_pattern_creates_node_with_head_start() {
        let mut map = SomMap::new(small_cfg(), 2).unwrap();
        map.train(&[0.0, 0.0]).unwrap();
        map.train(&[0.0, 0.0]).unwrap();
        map.train(&[0.0, 0.0]).unwrap();
        assert_eq!(map.nwins(), 3);
        let out = map.train(&[1.0, 1.0]).unwrap();
        assert!(out.created);
        let created = map.node(out.winner).unwrap();
        assert_eq!(created.wins, 0.1914 * 3.0);
        assert_eq!(map.node(ClusterId(0)).unwrap().wins, 2.0);
    }

    #[test]
    fn full_map_adapts_instead_of_growing() {
        let cfg = OlarfdssomConfig {
            max_nodes: 1,
            ..OlarfdssomConfig::default()
        };
        let mut map = SomMap::new(cfg, 2).unwrap();
        map.train(&[0.0, 0.0]).unwrap();
        let out = map.train(&[1.0, 1.0]).unwrap();
        assert!(!out.created);
        assert!(out.activation.unwrap() < 0.9879);
        assert_eq!(map.len(), 1);
        assert_eq!(map.nodes()[0].wins, 1.0);
        assert!(map.nodes()[0].center[0] > 0.0);
    }

    #[test]
    fn winner_examples() {
        let mut map = SomMap::new(small_cfg(), 2).unwrap();
        assert!(matches!(map.find_winner(&[0.0, 0.0]), Err(Error::NoCategories)));
        map.insert(&[0.2, 0.2], 0.0);
        assert_eq!(map.find_winner(&[0.9, 0.9]).unwrap().0, ClusterId(0));
        map.insert(&[0.9, 0.1], 0.0);
        map.insert(&[0.9, 0.1], 0.0);
        assert_eq!(map.cluster(&[0.9, 0.1]).unwrap(), ClusterId(1));
        assert_eq!(map.cluster(&[0.2, 0.2]).unwrap(), ClusterId(0));
    }

    #[test]
    fn cluster_is_read_only() {
        let mut map = SomMap::new(small_cfg(), 2).unwrap();
        for x in [[0.0, 0.0], [1.0, 1.0], [0.1, 0.0], [0.9, 1.0]] {
            map.train(&x).unwrap();
        }
        let before = map.clone();
        let a = map.cluster(&[0.05, 0.0]).unwrap();
        let b = map.cluster(&[0.05, 0.0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(map, before);
    }

    #[test]
    fn connection_rule_examples() {
        assert!(!relevances_connect(&[0.5, 0.5], &[0.5, 0.5], 0.0));
        assert!(relevances_connect(&[0.3, 0.8], &[0.3, 0.8], 1e-9));
        let a = vec![0.5; 18];
        let b = vec![0.53; 18];
        // sum of differences 0.54 vs 18 * 0.0301 = 0.5418
        assert!(relevances_connect(&a, &b, 0.0301));
        assert!(!relevances_connect(&a, &[0.5302; 18], 0.0301));
    }

    #[test]
    fn zero_threshold_never_connects() {
        let cfg = OlarfdssomConfig {
            connection_threshold: 0.0,
            ..small_cfg()
        };
        let mut map = SomMap::new(cfg, 2).unwrap();
        for x in [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]] {
            map.train(&x).unwrap();
        }
        assert!(map.len() > 1);
        assert!(map.connections().is_empty());
    }

    #[test]
    fn neighbors_move_slower_than_winner() {
        let cfg = OlarfdssomConfig {
            connection_threshold: 0.5,
            ..small_cfg()
        };
        let mut map = SomMap::new(cfg, 2).unwrap();
        map.train(&[0.0, 0.0]).unwrap();
        map.train(&[1.0, 1.0]).unwrap();
        assert_eq!(map.connections().len(), 1);
        map.adapt(ClusterId(0), &[0.5, 0.5]).unwrap();
        let w = map.node(ClusterId(0)).unwrap().center[0];
        let n = 1.0 - map.node(ClusterId(1)).unwrap().center[0];
        assert!((w - 0.5 * 0.0118).abs() < 1e-15);
        assert!((n - 0.5 * 0.0076).abs() < 1e-15);
        assert_eq!(map.node(ClusterId(1)).unwrap().wins, 0.1914);
    }

    #[test]
    fn train_rejects_bad_patterns() {
        let mut map = SomMap::new(small_cfg(), 2).unwrap();
        assert!(matches!(map.train(&[0.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(map.train(&[0.0, 1.5]), Err(Error::CertaintyOutOfRange { .. })));
    }

    #[test]
    fn counter_after_prune_is_one() {
        let cfg = OlarfdssomConfig {
            max_competitions: 5,
            ..small_cfg()
        };
        let mut map = SomMap::new(cfg, 2).unwrap();
        for _ in 0..5 {
            map.train(&[0.3, 0.3]).unwrap();
        }
        assert_eq!(map.nwins(), 5);
        let out = map.train(&[0.3, 0.3]).unwrap();
        assert!(out.pruned);
        assert_eq!(map.nwins(), 1);
        assert_eq!(map.prune_count(), 1);
    }

    #[test]
    fn config_validation() {
        assert!(OlarfdssomConfig::preset_a().validate().is_ok());
        assert!(OlarfdssomConfig::preset_b().validate().is_ok());
        let bad = OlarfdssomConfig {
            neighbor_rate: 0.05,
            ..OlarfdssomConfig::preset_a()
        };
        assert!(bad.validate().is_err());
        assert!(SomMap::new(OlarfdssomConfig::default(), 0).is_err());
    }
}
