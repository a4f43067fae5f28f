//! Text checkpoint of a [`SomMap`].
//!
//! ```text
//! olarfdssom-state 1
//! floats decimal
//! dim 2
//! nwins 5
//! next_id 3
//! prunes 0
//! config activation_threshold 0.9879
//! ...
//! node 0 wins 4.000000
//! center 0.100000 0.200000
//! delta 0.000000 0.000000
//! relevance 1.000000 1.000000
//! connection 0 2
//! ```
//!
//! Config values are always written losslessly. With `floats decimal`, node
//! vectors and win counts use 6 decimals and are lossy; `floats hex` writes
//! hexadecimal floats and reloads bit-exactly.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use super::{ClusterId, OlarfdssomConfig, SomMap, SomNode};
use crate::error::{Error, Result};
use crate::hexfloat;

const MAGIC: &str = "olarfdssom-state";
const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FloatFormat {
    #[default]
    Decimal,
    Hex,
}

impl FloatFormat {
    fn name(self) -> &'static str {
        match self {
            FloatFormat::Decimal => "decimal",
            FloatFormat::Hex => "hex",
        }
    }

    fn write(self, v: f64) -> String {
        match self {
            FloatFormat::Decimal => format!("{v:.6}"),
            FloatFormat::Hex => hexfloat::format(v),
        }
    }

    fn write_exact(self, v: f64) -> String {
        match self {
            FloatFormat::Decimal => format!("{v}"),
            FloatFormat::Hex => hexfloat::format(v),
        }
    }

    fn read(self, s: &str) -> Option<f64> {
        match self {
            FloatFormat::Decimal => s.parse().ok(),
            FloatFormat::Hex => hexfloat::parse(s),
        }
    }
}

impl FromStr for FloatFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decimal" => Ok(FloatFormat::Decimal),
            "hex" => Ok(FloatFormat::Hex),
            other => Err(Error::InvalidConfig(format!("unknown float format {other:?}"))),
        }
    }
}

impl SomMap {
    pub fn to_state_string(&self, floats: FloatFormat) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(out, "{MAGIC} {VERSION}");
        let _ = writeln!(out, "floats {}", floats.name());
        let _ = writeln!(out, "dim {}", self.dim);
        let _ = writeln!(out, "nwins {}", self.nwins);
        let _ = writeln!(out, "next_id {}", self.next_id);
        let _ = writeln!(out, "prunes {}", self.prunes);
        let reals = [
            ("activation_threshold", c.activation_threshold),
            ("lowest_win_fraction", c.lowest_win_fraction),
            ("relevance_rate", c.relevance_rate),
            ("winner_rate", c.winner_rate),
            ("neighbor_rate", c.neighbor_rate),
            ("relevance_smoothness", c.relevance_smoothness),
            ("connection_threshold", c.connection_threshold),
            ("epsilon", c.epsilon),
        ];
        for (name, v) in reals {
            let _ = writeln!(out, "config {name} {}", floats.write_exact(v));
        }
        let _ = writeln!(out, "config max_competitions {}", c.max_competitions);
        let _ = writeln!(out, "config max_nodes {}", c.max_nodes);
        let vector = |out: &mut String, tag: &str, v: &[f64]| {
            out.push_str(tag);
            for x in v {
                out.push(' ');
                out.push_str(&floats.write(*x));
            }
            out.push('\n');
        };
        for n in &self.nodes {
            let _ = writeln!(out, "node {} wins {}", n.id, floats.write(n.wins));
            vector(&mut out, "center", &n.center);
            vector(&mut out, "delta", &n.delta);
            vector(&mut out, "relevance", &n.relevance);
        }
        for (a, b) in &self.connections {
            let _ = writeln!(out, "connection {a} {b}");
        }
        out
    }

    pub fn from_state_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let (ln, magic) = lines.next().ok_or_else(|| Error::parse(1, "empty state document"))?;
        match magic.split_whitespace().collect::<Vec<_>>().as_slice() {
            [m, v] if *m == MAGIC => {
                if v.parse::<u32>().ok() != Some(VERSION) {
                    return Err(Error::parse(ln, format!("unsupported state version {v}")));
                }
            }
            _ => return Err(Error::parse(ln, "missing olarfdssom-state header")),
        }

        let mut floats = FloatFormat::Decimal;
        let mut dim = None;
        let mut nwins = 0u64;
        let mut next_id = None;
        let mut prunes = 0u64;
        let mut config = OlarfdssomConfig::default();
        let mut nodes: Vec<SomNode> = Vec::new();
        let mut connections = BTreeSet::new();

        fn int<T: FromStr>(ln: usize, s: Option<&str>) -> Result<T> {
            s.and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(ln, "expected an integer"))
        }

        for (ln, line) in lines {
            let mut tok = line.split_whitespace();
            let key = tok.next().unwrap_or_default();
            let real = |s: Option<&str>| -> Result<f64> {
                s.and_then(|s| floats.read(s))
                    .ok_or_else(|| Error::parse(ln, "expected a number"))
            };
            match key {
                "floats" => {
                    floats = tok
                        .next()
                        .unwrap_or_default()
                        .parse()
                        .map_err(|e: Error| Error::parse(ln, e.to_string()))?
                }
                "dim" => dim = Some(int(ln, tok.next())?),
                "nwins" => nwins = int(ln, tok.next())?,
                "next_id" => next_id = Some(int(ln, tok.next())?),
                "prunes" => prunes = int(ln, tok.next())?,
                "config" => {
                    let name = tok.next().unwrap_or_default();
                    let value = tok.next();
                    match name {
                        "activation_threshold" => config.activation_threshold = real(value)?,
                        "lowest_win_fraction" => config.lowest_win_fraction = real(value)?,
                        "relevance_rate" => config.relevance_rate = real(value)?,
                        "winner_rate" => config.winner_rate = real(value)?,
                        "neighbor_rate" => config.neighbor_rate = real(value)?,
                        "relevance_smoothness" => config.relevance_smoothness = real(value)?,
                        "connection_threshold" => config.connection_threshold = real(value)?,
                        "epsilon" => config.epsilon = real(value)?,
                        "max_competitions" => config.max_competitions = int(ln, value)?,
                        "max_nodes" => config.max_nodes = int(ln, value)?,
                        other => return Err(Error::parse(ln, format!("unknown config key {other:?}"))),
                    }
                }
                "node" => {
                    let id = ClusterId(int(ln, tok.next())?);
                    if tok.next() != Some("wins") {
                        return Err(Error::parse(ln, "expected `node <id> wins <count>`"));
                    }
                    let wins = real(tok.next())?;
                    nodes.push(SomNode {
                        id,
                        center: Vec::new(),
                        delta: Vec::new(),
                        relevance: Vec::new(),
                        wins,
                    });
                }
                "center" | "delta" | "relevance" => {
                    let node = nodes
                        .last_mut()
                        .ok_or_else(|| Error::parse(ln, format!("{key} before any node")))?;
                    let values = tok.map(|t| real(Some(t))).collect::<Result<Vec<f64>>>()?;
                    match key {
                        "center" => node.center = values,
                        "delta" => node.delta = values,
                        _ => node.relevance = values,
                    }
                }
                "connection" => {
                    let a = ClusterId(int(ln, tok.next())?);
                    let b = ClusterId(int(ln, tok.next())?);
                    connections.insert((a.min(b), a.max(b)));
                }
                other => return Err(Error::parse(ln, format!("unknown record {other:?}"))),
            }
        }

        let dim = dim.ok_or_else(|| Error::parse(0, "missing dim"))?;
        let next_id = next_id.unwrap_or_else(|| nodes.iter().map(|n| n.id.0 + 1).max().unwrap_or(0));
        SomMap::from_parts(config, dim, nodes, connections, nwins, next_id, prunes)
    }
}
