//! Clustering quality against ground-truth categories.
//!
//! Accuracy is majority-label purity: every cluster is credited with its most
//! frequent category. Clustering error is one minus the normalized weight of
//! the best one-to-one matching between clusters and categories, so surplus
//! clusters earn nothing.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Counts of items per (cluster, category).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    total: u64,
}

fn first_seen_index<T: Ord>(items: &[T]) -> BTreeMap<&T, usize> {
    let mut ids = BTreeMap::new();
    for it in items {
        let next = ids.len();
        ids.entry(it).or_insert(next);
    }
    ids
}

impl ContingencyTable {
    /// Rows are clusters, columns categories.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let width = counts.first().map_or(0, Vec::len);
        if counts.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidConfig("ragged contingency table".into()));
        }
        let total = counts.iter().flatten().sum();
        Ok(Self { counts, total })
    }

    pub fn from_labels<C: Ord, K: Ord>(clusters: &[C], categories: &[K]) -> Result<Self> {
        if clusters.len() != categories.len() {
            return Err(Error::LengthMismatch {
                left: clusters.len(),
                right: categories.len(),
            });
        }
        let rows = first_seen_index(clusters);
        let cols = first_seen_index(categories);
        let mut counts = vec![vec![0u64; cols.len()]; rows.len()];
        for (c, k) in clusters.iter().zip(categories) {
            counts[rows[c]][cols[k]] += 1;
        }
        Self::from_counts(counts)
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn n_clusters(&self) -> usize {
        self.counts.iter().filter(|r| r.iter().any(|&c| c > 0)).count()
    }

    pub fn n_categories(&self) -> usize {
        let width = self.counts.first().map_or(0, Vec::len);
        (0..width)
            .filter(|&j| self.counts.iter().any(|r| r[j] > 0))
            .count()
    }

    fn check_nonempty(&self) -> Result<()> {
        if self.total == 0 {
            Err(Error::EmptyTable)
        } else {
            Ok(())
        }
    }

    pub fn accuracy(&self) -> Result<f64> {
        self.check_nonempty()?;
        let hits: u64 = self
            .counts
            .iter()
            .map(|r| r.iter().copied().max().unwrap_or(0))
            .sum();
        Ok(hits as f64 / self.total as f64)
    }

    /// Weight of the maximum one-to-one cluster/category matching.
    pub fn matched_weight(&self) -> u64 {
        max_weight_matching(&self.counts)
            .iter()
            .map(|&(i, j)| self.counts[i][j])
            .sum()
    }

    pub fn clustering_error(&self) -> Result<f64> {
        self.check_nonempty()?;
        Ok(1.0 - self.matched_weight() as f64 / self.total as f64)
    }
}

/// Maximum-weight one-to-one matching of rows to columns. Returns matched
/// `(row, col)` pairs; rows or columns beyond the smaller dimension stay
/// unmatched.
pub fn max_weight_matching(weights: &[Vec<u64>]) -> Vec<(usize, usize)> {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    let n = rows.max(cols);
    if n == 0 {
        return Vec::new();
    }
    let top = weights.iter().flatten().copied().max().unwrap_or(0) as i64;
    let cost = |i: usize, j: usize| -> i64 {
        let w = if i < rows && j < cols { weights[i][j] as i64 } else { 0 };
        top - w
    };
    let assignment = hungarian(n, cost);
    assignment
        .into_iter()
        .enumerate()
        .filter(|&(i, j)| i < rows && j < cols)
        .collect()
}

/// Minimum-cost perfect assignment on an `n x n` cost matrix (shortest
/// augmenting paths with potentials, O(n^3)). Returns the column of each row.
fn hungarian(n: usize, cost: impl Fn(usize, usize) -> i64) -> Vec<usize> {
    const INF: i64 = i64::MAX / 4;
    // 1-based with a virtual column 0
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0; n];
    for j in 1..=n {
        if owner[j] > 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    assignment
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub clustering_error: f64,
    /// `1 - clustering_error`, accuracy under the one-to-one matching.
    pub matched_accuracy: f64,
    pub n_clusters: usize,
    pub n_categories: usize,
    pub n_items: usize,
}

impl EvalReport {
    pub fn from_table(table: &ContingencyTable) -> Result<Self> {
        let clustering_error = table.clustering_error()?;
        Ok(Self {
            accuracy: table.accuracy()?,
            clustering_error,
            matched_accuracy: 1.0 - clustering_error,
            n_clusters: table.n_clusters(),
            n_categories: table.n_categories(),
            n_items: table.total() as usize,
        })
    }
}

/// Scores predicted cluster ids against ground-truth categories.
pub fn evaluate<C: Ord, K: Ord>(assignments: &[C], truths: &[K]) -> Result<EvalReport> {
    let table = ContingencyTable::from_labels(assignments, truths)?;
    EvalReport::from_table(&table)
}
