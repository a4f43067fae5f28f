//! Synthetic multi-room trajectories with per-category object signatures.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::SequenceFile;
use crate::pipeline::DatasetRecord;
use crate::semmap::{ObjectEvidence, Position};

/// Object names recognized in the reference experiments.
pub const DEFAULT_OBJECTS: [&str; 18] = [
    "window_shade",
    "bookcase",
    "electric_fan",
    "couch",
    "washbasin",
    "soap_dispenser",
    "toilet_seat",
    "photocopier",
    "monitor",
    "desktop_computer",
    "desk",
    "table",
    "chair",
    "banister",
    "microwave_oven",
    "stove",
    "dishwasher",
    "toaster",
];

/// Axis-aligned rectangle labeled with a place category.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub category: String,
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Room {
    pub fn contains(&self, p: &Position) -> bool {
        p.x >= self.min[0] && p.x <= self.max[0] && p.y >= self.min[1] && p.y <= self.max[1]
    }

    /// Euclidean distance from `p` to the rectangle (0 inside).
    pub fn distance(&self, p: &Position) -> f64 {
        let dx = (self.min[0] - p.x).max(0.0).max(p.x - self.max[0]);
        let dy = (self.min[1] - p.y).max(0.0).max(p.y - self.max[1]);
        dx.hypot(dy)
    }

    fn overlaps(&self, other: &Room) -> bool {
        self.min[0] < other.max[0]
            && other.min[0] < self.max[0]
            && self.min[1] < other.max[1]
            && other.min[1] < self.max[1]
    }
}

fn default_laps() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    #[serde(default)]
    pub sequence_id: Option<String>,
    pub object_names: Vec<String>,
    pub rooms: Vec<Room>,
    /// Mean certainty per object, keyed by category.
    pub signatures: BTreeMap<String, Vec<f64>>,
    /// Half-width of the uniform noise added to each certainty.
    pub noise: f64,
    pub waypoints: Vec<[f64; 2]>,
    pub samples_per_leg: usize,
    #[serde(default = "default_laps")]
    pub laps: usize,
    /// Half-width of the uniform jitter added to positions.
    #[serde(default)]
    pub position_noise: f64,
    /// Width of the zone near room boundaries where signatures blend.
    #[serde(default)]
    pub smear: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.object_names.len();
        if n == 0 {
            return Err(Error::Synth("no objects".into()));
        }
        if self.rooms.is_empty() {
            return Err(Error::Synth("no rooms".into()));
        }
        for (i, a) in self.rooms.iter().enumerate() {
            if !(a.min[0] < a.max[0] && a.min[1] < a.max[1]) {
                return Err(Error::Synth(format!("room {i} has empty extent")));
            }
            if let Some(j) = self.rooms[i + 1..].iter().position(|b| a.overlaps(b)) {
                return Err(Error::Synth(format!("rooms {i} and {} overlap", i + 1 + j)));
            }
            let sig = self
                .signatures
                .get(&a.category)
                .ok_or_else(|| Error::Synth(format!("no signature for category {:?}", a.category)))?;
            if sig.len() != n {
                return Err(Error::Synth(format!(
                    "signature of {:?} has {} values for {n} objects",
                    a.category,
                    sig.len()
                )));
            }
            if sig.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Synth(format!("signature of {:?} outside [0, 1]", a.category)));
            }
            if a.category.is_empty() || a.category.chars().any(char::is_whitespace) {
                return Err(Error::Synth(format!("category {:?} must be a single token", a.category)));
            }
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::Synth("noise must lie in [0, 1]".into()));
        }
        if !(self.position_noise >= 0.0 && self.position_noise.is_finite()) {
            return Err(Error::Synth("position noise must be >= 0".into()));
        }
        if !(self.smear >= 0.0 && self.smear.is_finite()) {
            return Err(Error::Synth("smear must be >= 0".into()));
        }
        if self.waypoints.len() < 2 {
            return Err(Error::Synth("need at least two waypoints".into()));
        }
        if self.samples_per_leg == 0 || self.laps == 0 {
            return Err(Error::Synth("samples per leg and laps must be positive".into()));
        }
        for (i, w) in self.waypoints.iter().enumerate() {
            let p = Position::new(w[0], w[1]).map_err(|e| Error::Synth(e.to_string()))?;
            if !self.rooms.iter().any(|r| r.contains(&p)) {
                return Err(Error::Synth(format!("waypoint {i} ({}, {}) is outside all rooms", w[0], w[1])));
            }
        }
        Ok(())
    }

    fn room_of(&self, p: &Position) -> &Room {
        self.rooms
            .iter()
            .find(|r| r.contains(p))
            .unwrap_or_else(|| {
                self.rooms
                    .iter()
                    .min_by(|a, b| a.distance(p).total_cmp(&b.distance(p)))
                    .expect("validated non-empty")
            })
    }

    fn mean_signature(&self, p: &Position, home: &Room) -> Vec<f64> {
        let own = &self.signatures[&home.category];
        if self.smear <= 0.0 {
            return own.clone();
        }
        let mut acc = vec![0.0; own.len()];
        let mut total = 0.0;
        for room in &self.rooms {
            let d = if room == home { 0.0 } else { room.distance(p) };
            let w = (1.0 - d / self.smear).max(0.0);
            if w > 0.0 {
                total += w;
                for (a, s) in acc.iter_mut().zip(&self.signatures[&room.category]) {
                    *a += w * s;
                }
            }
        }
        acc.iter().map(|a| a / total).collect()
    }

    /// Noise-free positions along the path, in visiting order.
    pub fn path(&self) -> Vec<Position> {
        let mut pts = Vec::new();
        for _ in 0..self.laps {
            for leg in self.waypoints.windows(2) {
                let (a, b) = (leg[0], leg[1]);
                for j in 0..self.samples_per_leg {
                    let t = j as f64 / self.samples_per_leg as f64;
                    pts.push(Position {
                        x: a[0] + t * (b[0] - a[0]),
                        y: a[1] + t * (b[1] - a[1]),
                    });
                }
            }
        }
        let last = self.waypoints[self.waypoints.len() - 1];
        pts.push(Position { x: last[0], y: last[1] });
        pts
    }
}

/// Walks the waypoints and draws labeled evidence from the room under each
/// sample. Deterministic per seed.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<SequenceFile> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = Vec::new();
    for ideal in spec.path() {
        let p = if spec.position_noise > 0.0 {
            let j = spec.position_noise;
            Position {
                x: ideal.x + rng.gen_range(-j..=j),
                y: ideal.y + rng.gen_range(-j..=j),
            }
        } else {
            ideal
        };
        let room = spec.room_of(&p);
        let values = spec
            .mean_signature(&p, room)
            .into_iter()
            .map(|s| {
                if spec.noise > 0.0 {
                    (s + rng.gen_range(-spec.noise..=spec.noise)).clamp(0.0, 1.0)
                } else {
                    s
                }
            })
            .collect();
        records.push(DatasetRecord {
            position: p,
            evidence: ObjectEvidence::new(values)?,
            label: Some(room.category.clone()),
        });
    }
    Ok(SequenceFile {
        id: spec.sequence_id.clone(),
        object_names: spec.object_names.clone(),
        records,
    })
}

/// Signature with `level` on objects `3k, 3k+1, 3k+2` and zero elsewhere;
/// distinct `k` give orthogonal signatures.
pub fn block_signature(k: usize, n_objects: usize, level: f64) -> Vec<f64> {
    (0..n_objects)
        .map(|i| if i / 3 == k { level } else { 0.0 })
        .collect()
}

fn default_names() -> Vec<String> {
    DEFAULT_OBJECTS.iter().map(|s| s.to_string()).collect()
}

/// Square loop through four quadrant rooms with distinct categories.
pub fn loop_corridor(laps: usize, seed: u64) -> SynthSpec {
    let cats = ["office", "kitchen", "corridor", "printer_area"];
    let quads = [([0.0, 0.0], [5.0, 5.0]), ([5.0, 0.0], [10.0, 5.0]), ([5.0, 5.0], [10.0, 10.0]), ([0.0, 5.0], [5.0, 10.0])];
    SynthSpec {
        sequence_id: Some("loop4".into()),
        object_names: default_names(),
        rooms: cats
            .iter()
            .zip(quads)
            .map(|(c, (min, max))| Room {
                category: c.to_string(),
                min,
                max,
            })
            .collect(),
        signatures: cats
            .iter()
            .enumerate()
            .map(|(k, c)| (c.to_string(), block_signature(k, 18, 0.8)))
            .collect(),
        noise: 0.05,
        waypoints: vec![[2.0, 2.0], [8.0, 2.0], [8.0, 8.0], [2.0, 8.0], [2.0, 2.0]],
        samples_per_leg: 60,
        laps,
        position_noise: 0.05,
        smear: 0.0,
        seed,
    }
}

pub const FIVE_ROOM_CATEGORIES: [&str; 5] = ["office", "kitchen", "corridor", "bathroom", "printer_area"];

/// Row of five rooms with orthogonal signatures, visited in `order` (room
/// indices, left to right being 0..5) with a return leg inside each room.
pub fn five_rooms(order: [usize; 5], noise: f64, laps: usize, seed: u64) -> SynthSpec {
    let rooms: Vec<Room> = (0..5)
        .map(|k| Room {
            category: FIVE_ROOM_CATEGORIES[k].to_string(),
            min: [4.0 * k as f64, 0.0],
            max: [4.0 * (k + 1) as f64, 4.0],
        })
        .collect();
    let mut waypoints = Vec::new();
    for &k in &order {
        let x0 = 4.0 * k as f64;
        waypoints.push([x0 + 1.0, 1.0]);
        waypoints.push([x0 + 3.0, 1.0]);
        waypoints.push([x0 + 3.0, 3.0]);
        waypoints.push([x0 + 1.0, 3.0]);
    }
    waypoints.push(waypoints[0]);
    SynthSpec {
        sequence_id: Some(format!("rooms5-{}", order.map(|k| k.to_string()).join(""))),
        object_names: default_names(),
        rooms,
        signatures: FIVE_ROOM_CATEGORIES
            .iter()
            .enumerate()
            .map(|(k, c)| (c.to_string(), block_signature(k, 18, 0.8)))
            .collect(),
        noise,
        waypoints,
        samples_per_leg: 20,
        laps,
        position_noise: 0.0,
        smear: 0.0,
        seed,
    }
}

/// Built-in specs addressable by name from the command line.
pub fn demo(name: &str, seed: u64) -> Option<SynthSpec> {
    match name {
        "loop4" => Some(loop_corridor(3, seed)),
        "rooms5" => Some(five_rooms([0, 1, 2, 3, 4], 0.05, 2, seed)),
        "rooms5-shuffled" => Some(five_rooms([3, 0, 4, 1, 2], 0.05, 2, seed)),
        _ => None,
    }
}

pub const DEMO_NAMES: [&str; 3] = ["loop4", "rooms5", "rooms5-shuffled"];
