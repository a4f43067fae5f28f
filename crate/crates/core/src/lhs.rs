//! Latin Hypercube parameter plans and the replay-based search over them.
//!
//! Each parameter range is split into `k` equal-width strata (densities are
//! uniform, so equal width means equal probability). Every stratum receives
//! exactly one draw, and strata are shuffled independently per dimension.
//! Integer parameters are rounded when a row is turned into a configuration;
//! the stored draws themselves stay continuous.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::SequenceFile;
use crate::metrics::EvalReport;
use crate::pipeline::{run_sequences, PipelineConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub integer_valued: bool,
}

impl ParamRange {
    pub fn new(name: &str, min: f64, max: f64) -> Self {
        Self {
            name: name.into(),
            min,
            max,
            integer_valued: false,
        }
    }

    pub fn integer(name: &str, min: f64, max: f64) -> Self {
        Self {
            integer_valued: true,
            ..Self::new(name, min, max)
        }
    }

    /// Index of the equal-width stratum holding `v` when the range is split
    /// into `k` strata.
    pub fn stratum(&self, v: f64, k: usize) -> usize {
        let t = (v - self.min) / (self.max - self.min);
        ((t * k as f64).floor().max(0.0) as usize).min(k - 1)
    }
}

/// Searched ranges. The neighbor rate is drawn over the winner rate's full
/// span and capped at the row's winner rate when materialized.
pub fn search_ranges() -> Vec<ParamRange> {
    vec![
        ParamRange::new("at", 0.8, 0.999),
        ParamRange::new("lp", 0.01, 0.2),
        ParamRange::new("beta", 0.001, 0.1),
        ParamRange::integer("maxcomp", 5.0, 150.0),
        ParamRange::new("eb", 0.001, 0.2),
        ParamRange::new("en", 0.0001, 0.2),
        ParamRange::new("s", 0.01, 0.1),
        ParamRange::new("c", 0.0, 0.5),
        ParamRange::integer("st", 2.0, 15.0),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct LhsPlan {
    pub ranges: Vec<ParamRange>,
    /// `k` rows of continuous draws, one column per range.
    pub draws: Vec<Vec<f64>>,
}

pub fn sample(ranges: &[ParamRange], k: usize, seed: u64) -> Result<LhsPlan> {
    if k == 0 {
        return Err(Error::InvalidConfig("LHS needs at least one sample".into()));
    }
    if let Some(r) = ranges.iter().find(|r| !(r.min < r.max) || !r.min.is_finite() || !r.max.is_finite()) {
        return Err(Error::InvalidConfig(format!("range {} is empty", r.name)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = vec![vec![0.0; ranges.len()]; k];
    for (j, range) in ranges.iter().enumerate() {
        let mut strata: Vec<usize> = (0..k).collect();
        strata.shuffle(&mut rng);
        let width = range.max - range.min;
        for (row, &s) in draws.iter_mut().zip(&strata) {
            // rounding at a stratum edge can spill into the neighbor; redraw
            row[j] = loop {
                let u: f64 = rng.gen();
                let v = range.min + (s as f64 + u) / k as f64 * width;
                if range.stratum(v, k) == s && v <= range.max {
                    break v;
                }
            };
        }
    }
    Ok(LhsPlan {
        ranges: ranges.to_vec(),
        draws,
    })
}

impl LhsPlan {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Row `i` with integer parameters rounded.
    pub fn values(&self, i: usize) -> Vec<f64> {
        self.draws[i]
            .iter()
            .zip(&self.ranges)
            .map(|(&v, r)| if r.integer_valued { v.round() } else { v })
            .collect()
    }

    /// Applies row `i` on top of `base`. Unknown names are an error.
    pub fn config(&self, i: usize, base: &PipelineConfig) -> Result<PipelineConfig> {
        let mut cfg = base.clone();
        for (r, v) in self.ranges.iter().zip(self.values(i)) {
            match r.name.as_str() {
                "at" => cfg.som.activation_threshold = v,
                "lp" => cfg.som.lowest_win_fraction = v,
                "beta" => cfg.som.relevance_rate = v,
                "maxcomp" => cfg.som.max_competitions = v as u32,
                "eb" => cfg.som.winner_rate = v,
                "en" => cfg.som.neighbor_rate = v,
                "s" => cfg.som.relevance_smoothness = v,
                "c" => cfg.som.connection_threshold = v,
                "st" => cfg.semmap.summation_limit = v,
                "nmax" => cfg.som.max_nodes = v as usize,
                other => return Err(Error::InvalidConfig(format!("unknown parameter {other:?}"))),
            }
        }
        cfg.som.neighbor_rate = cfg.som.neighbor_rate.min(cfg.som.winner_rate);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Tab-separated table: header of parameter names, one row per sample.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.ranges.iter().map(|r| r.name.as_str()).collect();
        let _ = writeln!(out, "sample\t{}", names.join("\t"));
        for i in 0..self.len() {
            let _ = write!(out, "{i}");
            for (v, r) in self.values(i).iter().zip(&self.ranges) {
                if r.integer_valued {
                    let _ = write!(out, "\t{v}");
                } else {
                    let _ = write!(out, "\t{v:.6}");
                }
            }
            out.push('\n');
        }
        out
    }

    /// Reads a plan table; the values are taken as already materialized.
    pub fn from_tsv(text: &str, ranges: &[ParamRange]) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty plan"))?;
        let names: Vec<&str> = header.split('\t').skip(1).collect();
        let cols = names
            .iter()
            .map(|n| {
                ranges
                    .iter()
                    .find(|r| r.name == *n)
                    .cloned()
                    .ok_or_else(|| Error::parse(1, format!("unknown parameter column {n:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut draws = Vec::new();
        for (i, line) in lines {
            let row = line
                .split('\t')
                .skip(1)
                .map(|t| t.trim().parse::<f64>().map_err(|_| Error::parse(i + 1, format!("bad value {t:?}"))))
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != cols.len() {
                return Err(Error::parse(i + 1, "row width differs from header"));
            }
            draws.push(row);
        }
        Ok(Self { ranges: cols, draws })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub sample: usize,
    pub values: Vec<f64>,
    pub report: EvalReport,
}

/// How each configuration is replayed and scored.
#[derive(Clone, Debug)]
pub struct SearchProtocol {
    pub base: PipelineConfig,
    /// Training order of the corpus sequences.
    pub order: Vec<usize>,
    /// Score record-level assignments instead of node-level ones.
    pub frame_level: bool,
}

/// Replays the corpus under every plan row (in parallel) and ranks rows by
/// clustering error, then accuracy, then sample index.
pub fn search(plan: &LhsPlan, corpus: &[SequenceFile], protocol: &SearchProtocol) -> Result<Vec<SearchResult>> {
    if plan.is_empty() {
        return Err(Error::InvalidConfig("empty plan".into()));
    }
    let mut results = (0..plan.len())
        .into_par_iter()
        .map(|i| {
            let cfg = plan.config(i, &protocol.base)?;
            let outcome = run_sequences(corpus, &cfg, &protocol.order)?;
            let reports = outcome
                .final_report()?
                .ok_or_else(|| Error::InvalidConfig("corpus has no labeled records to score".into()))?;
            let report = if protocol.frame_level { reports.frame } else { reports.node };
            Ok(SearchResult {
                sample: i,
                values: plan.values(i),
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rank(&mut results);
    Ok(results)
}

pub fn rank(results: &mut [SearchResult]) {
    results.sort_by(|a, b| {
        a.report
            .clustering_error
            .total_cmp(&b.report.clustering_error)
            .then(b.report.accuracy.total_cmp(&a.report.accuracy))
            .then(a.sample.cmp(&b.sample))
    });
}

pub fn results_tsv(ranges: &[ParamRange], results: &[SearchResult]) -> String {
    let mut out = String::new();
    let names: Vec<&str> = ranges.iter().map(|r| r.name.as_str()).collect();
    let _ = writeln!(
        out,
        "rank\tsample\t{}\tce\taccuracy\tclusters\tcategories",
        names.join("\t")
    );
    for (rank, r) in results.iter().enumerate() {
        let _ = write!(out, "{}\t{}", rank + 1, r.sample);
        for v in &r.values {
            let _ = write!(out, "\t{v:.6}");
        }
        let _ = writeln!(
            out,
            "\t{:.6}\t{:.6}\t{}\t{}",
            r.report.clustering_error, r.report.accuracy, r.report.n_clusters, r.report.n_categories
        );
    }
    out
}

/// Spread of the outcome across the range of one parameter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamSpread {
    pub name: String,
    /// Max minus min of the mean clustering error over equal-count bins of
    /// the parameter.
    pub ce_spread: f64,
    pub accuracy_spread: f64,
    /// Among the three parameters with the largest `ce_spread`.
    pub dominant: bool,
}

/// Parameters previously found to matter most: the categorizer's activation
/// threshold, max competitions and lowest win fraction.
pub const EXPECTED_DOMINANT: [&str; 3] = ["at", "maxcomp", "lp"];

pub fn sensitivity(ranges: &[ParamRange], results: &[SearchResult], bins: usize) -> Vec<ParamSpread> {
    let bins = bins.clamp(1, results.len().max(1));
    let mut spreads: Vec<ParamSpread> = ranges
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let mut sorted: Vec<&SearchResult> = results.iter().collect();
            sorted.sort_by(|a, b| a.values[j].total_cmp(&b.values[j]).then(a.sample.cmp(&b.sample)));
            let (mut ce, mut acc) = (Vec::new(), Vec::new());
            for b in 0..bins {
                let lo = b * sorted.len() / bins;
                let hi = (b + 1) * sorted.len() / bins;
                if hi > lo {
                    let chunk = &sorted[lo..hi];
                    let n = chunk.len() as f64;
                    ce.push(chunk.iter().map(|r| r.report.clustering_error).sum::<f64>() / n);
                    acc.push(chunk.iter().map(|r| r.report.accuracy).sum::<f64>() / n);
                }
            }
            let spread = |v: &[f64]| {
                v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min)
            };
            ParamSpread {
                name: r.name.clone(),
                ce_spread: if ce.is_empty() { 0.0 } else { spread(&ce) },
                accuracy_spread: if acc.is_empty() { 0.0 } else { spread(&acc) },
                dominant: false,
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..spreads.len()).collect();
    order.sort_by(|&a, &b| spreads[b].ce_spread.total_cmp(&spreads[a].ce_spread).then(a.cmp(&b)));
    for &i in order.iter().take(3) {
        spreads[i].dominant = true;
    }
    spreads
}

pub fn sensitivity_tsv(spreads: &[ParamSpread]) -> String {
    let mut out = String::from("param\tce_spread\taccuracy_spread\tdominant\texpected_dominant\n");
    for s in spreads {
        let _ = writeln!(
            out,
            "{}\t{:.6}\t{:.6}\t{}\t{}",
            s.name,
            s.ce_spread,
            s.accuracy_spread,
            s.dominant,
            EXPECTED_DOMINANT.contains(&s.name.as_str())
        );
    }
    out
}
