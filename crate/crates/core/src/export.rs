//! Topological map exports.
//!
//! The text form has one `node <id> <x> <y> <o_1> ... <o_n> [cluster <cid>]`
//! line per node followed by one `edge <id_a> <id_b>` line per edge, floats
//! printed with six decimals. The DOT form carries the same content for graph
//! viewers (`neato -n` honors the pinned positions).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::olarfdssom::ClusterId;
use crate::semmap::{NodeId, TopoMap};

#[derive(Clone, Debug, PartialEq)]
pub struct NodeRecord {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    pub objects: Vec<f64>,
    pub cluster: Option<ClusterId>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct GraphDocument {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<(NodeId, NodeId)>,
}

impl GraphDocument {
    pub fn from_map(map: &TopoMap, clusters: Option<&BTreeMap<NodeId, ClusterId>>) -> Self {
        let nodes = map
            .nodes()
            .iter()
            .map(|n| NodeRecord {
                id: n.id(),
                x: n.center().x,
                y: n.center().y,
                objects: n.objects().to_vec(),
                cluster: clusters.and_then(|c| c.get(&n.id()).copied()),
            })
            .collect();
        Self {
            nodes,
            edges: map.edges().iter().copied().collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let _ = write!(out, "node {} {:.6} {:.6}", n.id, n.x, n.y);
            for o in &n.objects {
                let _ = write!(out, " {o:.6}");
            }
            if let Some(c) = n.cluster {
                let _ = write!(out, " cluster {c}");
            }
            out.push('\n');
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "edge {a} {b}");
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph topomap {\n");
        for n in &self.nodes {
            let _ = write!(out, "  n{} [pos=\"{:.6},{:.6}!\"", n.id, n.x, n.y);
            match n.cluster {
                Some(c) => {
                    let _ = write!(out, ", label=\"{}\", cluster=\"{c}\", colorscheme=set312, color={}", n.id, c.0 % 12 + 1);
                }
                None => {
                    let _ = write!(out, ", label=\"{}\"", n.id);
                }
            }
            out.push_str("];\n");
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  n{a} -- n{b};");
        }
        out.push_str("}\n");
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut doc = GraphDocument::default();
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            let tok: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<f64>().map_err(|_| Error::parse(ln, format!("bad number {s:?}")));
            let id = |s: &str| s.parse::<u32>().map(NodeId).map_err(|_| Error::parse(ln, format!("bad node id {s:?}")));
            match tok.first().copied() {
                None => continue,
                Some("node") if tok.len() >= 4 => {
                    let (body, cluster) = match tok.len().checked_sub(2).map(|k| tok[k]) {
                        Some("cluster") => {
                            let c = tok[tok.len() - 1]
                                .parse::<u64>()
                                .map_err(|_| Error::parse(ln, "bad cluster id"))?;
                            (&tok[..tok.len() - 2], Some(ClusterId(c)))
                        }
                        _ => (&tok[..], None),
                    };
                    doc.nodes.push(NodeRecord {
                        id: id(body[1])?,
                        x: num(body[2])?,
                        y: num(body[3])?,
                        objects: body[4..].iter().map(|s| num(s)).collect::<Result<_>>()?,
                        cluster,
                    });
                }
                Some("edge") if tok.len() == 3 => doc.edges.push((id(tok[1])?, id(tok[2])?)),
                Some(_) => return Err(Error::parse(ln, "expected a node or edge record")),
            }
        }
        Ok(doc)
    }
}
