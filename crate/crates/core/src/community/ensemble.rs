use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::InteractionGraph;

use super::{louvain, modularity, HardPartition};

/// Fuzzy community memberships; each row sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipTable {
    rows: Vec<BTreeMap<usize, f64>>,
}

impl MembershipTable {
    pub fn new(rows: Vec<BTreeMap<usize, f64>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            let sum: f64 = row.values().sum();
            if row.values().any(|v| !(0.0..=1.0).contains(v)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Consistency(format!("membership row {i} is not a distribution")));
            }
        }
        Ok(MembershipTable { rows })
    }

    /// Crisp table: membership 1 in the node's community.
    pub fn crisp(partition: &HardPartition) -> Self {
        MembershipTable {
            rows: partition
                .assignment()
                .iter()
                .map(|&c| BTreeMap::from([(c, 1.0)]))
                .collect(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, node: usize) -> &BTreeMap<usize, f64> {
        &self.rows[node]
    }

    pub fn get(&self, node: usize, community: usize) -> f64 {
        self.rows[node].get(&community).copied().unwrap_or(0.0)
    }

    /// Community with the largest membership, ties to the smaller id.
    pub fn argmax(&self, node: usize) -> usize {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for (&c, &v) in &self.rows[node] {
            if v > best.1 {
                best = (c, v);
            }
        }
        best.0
    }
}

fn run_seed(seed: u64, run: u64) -> u64 {
    // splitmix64 of the combined value
    let mut z = seed ^ run.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Maps each community of `run` onto the reference labels by greedy
/// maximal-overlap matching; unmatched communities draw from `fresh`.
fn align(reference: &HardPartition, run: &HardPartition, fresh: &mut usize) -> Vec<usize> {
    let mut overlap: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&r, &c) in reference.assignment().iter().zip(run.assignment()) {
        *overlap.entry((c, r)).or_insert(0) += 1;
    }
    let mut pairs: Vec<((usize, usize), usize)> = overlap.into_iter().collect();
    pairs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0 .1.cmp(&b.0 .1)).then(a.0 .0.cmp(&b.0 .0)));
    let mut map = vec![usize::MAX; run.n_communities()];
    let mut taken = vec![false; reference.n_communities()];
    for ((c, r), _) in pairs {
        if map[c] == usize::MAX && !taken[r] {
            map[c] = r;
            taken[r] = true;
        }
    }
    for m in map.iter_mut() {
        if *m == usize::MAX {
            *m = *fresh;
            *fresh += 1;
        }
    }
    map
}

/// Runs Louvain `n_runs` times with derived seeds and turns label-aligned
/// assignment frequencies into memberships. Also returns the argmax consensus.
pub fn ensemble_membership(
    graph: &InteractionGraph,
    resolution: f64,
    n_runs: usize,
    seed: u64,
) -> Result<(MembershipTable, HardPartition)> {
    if n_runs == 0 {
        return Err(Error::Config("ensemble needs at least one run".into()));
    }
    let runs: Vec<(HardPartition, f64)> = (0..n_runs as u64)
        .into_par_iter()
        .map(|r| {
            let p = louvain(graph, resolution, run_seed(seed, r))?;
            let q = modularity(graph, &p, resolution)?;
            Ok((p, q))
        })
        .collect::<Result<_>>()?;
    let best = runs
        .iter()
        .enumerate()
        .fold(0, |b, (i, (_, q))| if *q > runs[b].1 { i } else { b });
    let reference = &runs[best].0;
    let mut fresh = reference.n_communities();
    let mut counts: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); graph.n_nodes()];
    for (p, _) in &runs {
        let map = align(reference, p, &mut fresh);
        for (node, &c) in p.assignment().iter().enumerate() {
            *counts[node].entry(map[c]).or_insert(0) += 1;
        }
    }
    let n = n_runs as f64;
    let rows: Vec<BTreeMap<usize, f64>> = counts
        .iter()
        .map(|row| row.iter().map(|(&c, &k)| (c, k as f64 / n)).collect())
        .collect();
    let table = MembershipTable { rows };
    let consensus: Vec<usize> = (0..graph.n_nodes()).map(|i| table.argmax(i)).collect();
    Ok((table, HardPartition::from_labels(&consensus)))
}

/// Outcome of ensemble detection at one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub resolution: f64,
    pub n_communities: usize,
    pub modularity: f64,
    pub partition: HardPartition,
}

/// One ensemble-consensus record per resolution, in input order.
pub fn resolution_sweep(
    graph: &InteractionGraph,
    resolutions: &[f64],
    n_runs: usize,
    seed: u64,
) -> Result<Vec<SweepRecord>> {
    if resolutions.is_empty() {
        return Err(Error::Config("resolution sweep needs at least one resolution".into()));
    }
    if resolutions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("sweep resolutions must be strictly increasing".into()));
    }
    resolutions
        .par_iter()
        .map(|&gamma| {
            let (_, partition) = ensemble_membership(graph, gamma, n_runs, seed)?;
            let q = modularity(graph, &partition, gamma)?;
            Ok(SweepRecord {
                resolution: gamma,
                n_communities: partition.n_communities(),
                modularity: q,
                partition,
            })
        })
        .collect()
}
