//! Kernel/marginal splitting of fuzzy memberships and contiguous kernel
//! extension within blocks.
//!
//! Everything here works on node indices: the eligible units that took part
//! in community detection. [`PartitionScheme`] lifts a node assignment back
//! to the full unit set.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use crate::community::MembershipTable;
use crate::error::{Error, Result};
use crate::graph::LayerWeights;
use crate::spatial::{Adjacency, SizeBounds, SizeFiltered};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KernelSplit {
    /// Community id to its kernel nodes; every set is non-empty.
    pub kernels: BTreeMap<usize, BTreeSet<usize>>,
    pub marginals: BTreeSet<usize>,
}

impl KernelSplit {
    pub fn n_kernel_nodes(&self) -> usize {
        self.kernels.values().map(BTreeSet::len).sum()
    }
}

/// A node is a kernel of `c` when its membership in `c` reaches `threshold`.
/// Communities without kernels vanish and their nodes become marginal.
pub fn split_kernel_marginal(membership: &MembershipTable, threshold: f64) -> Result<KernelSplit> {
    if !(threshold > 0.5 && threshold <= 1.0) {
        return Err(Error::Config(format!(
            "membership threshold must be in (0.5, 1], got {threshold}"
        )));
    }
    let mut split = KernelSplit::default();
    for node in 0..membership.n_nodes() {
        let kernel = membership
            .row(node)
            .iter()
            .find(|(_, &v)| v >= threshold - 1e-12)
            .map(|(&c, _)| c);
        match kernel {
            Some(c) => {
                split.kernels.entry(c).or_default().insert(node);
            }
            None => {
                split.marginals.insert(node);
            }
        }
    }
    Ok(split)
}

/// Per-node density vectors, each field standardized to zero mean and unit
/// variance across nodes. Constant fields contribute zeros.
///
/// `values[f][i]` is field `f` at node `i`.
pub fn standardized_densities(values: &[Vec<f64>], areas: &[f64]) -> Vec<Vec<f64>> {
    let n = areas.len();
    let mut out = vec![Vec::with_capacity(values.len()); n];
    for field in values {
        let d: Vec<f64> = field.iter().zip(areas).map(|(v, a)| v / a).collect();
        let mean = d.iter().sum::<f64>() / n.max(1) as f64;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n.max(1) as f64;
        let sd = var.sqrt();
        for (row, x) in out.iter_mut().zip(&d) {
            row.push(if sd > 0.0 { (x - mean) / sd } else { 0.0 });
        }
    }
    out
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Result of kernel extension over nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Extension {
    /// Node to region, dense in order of first node.
    pub assignment: Vec<usize>,
    pub kernel_nodes: usize,
    pub absorbed_nodes: usize,
    /// Nodes placed by a fallback rule rather than absorption.
    pub fallback_nodes: usize,
    pub diagnostics: Vec<String>,
}

/// Connected components of `members` inside the adjacency, each sorted,
/// ordered by smallest member.
fn components(members: &BTreeSet<usize>, adjacency: &Adjacency) -> Vec<Vec<usize>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &s in members {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in adjacency.neighbors(u) {
                if members.contains(&v) && seen.insert(v) {
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

struct Key(f64);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Grows kernel regions over the marginal nodes, one block at a time.
///
/// Starting regions are the connected pieces of each community's kernels
/// inside a block. Repeatedly, the marginal node of the block closest (in
/// standardized density) to an adjacent already-assigned node joins that
/// node's region; ties go to the smaller node, then the smaller region.
/// Blocks without kernels, and marginals no kernel can reach, fall back to
/// their connected components and are reported in the diagnostics.
pub fn extend_kernels(
    split: &KernelSplit,
    adjacency: &Adjacency,
    blocks: &[usize],
    features: &[Vec<f64>],
) -> Result<Extension> {
    let n = adjacency.n_units();
    if blocks.len() != n || features.len() != n {
        return Err(Error::Consistency(format!(
            "kernel extension inputs differ in size: {} nodes, {} block labels, {} feature rows",
            n,
            blocks.len(),
            features.len()
        )));
    }
    let covered = split.n_kernel_nodes() + split.marginals.len();
    if covered != n || split.marginals.iter().any(|&m| m >= n) {
        return Err(Error::Consistency(format!(
            "kernel split covers {covered} nodes, expected {n}"
        )));
    }
    const UNSET: usize = usize::MAX;
    let mut region = vec![UNSET; n];
    let mut next = 0;
    let mut diagnostics = Vec::new();
    let mut fallback = 0;

    // Initial kernel regions, contiguous and confined to one block.
    for kernels in split.kernels.values() {
        let mut by_block: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for &k in kernels {
            if k >= n || region[k] != UNSET {
                return Err(Error::Consistency(format!(
                    "node {k} is a kernel twice or out of range"
                )));
            }
            by_block.entry(blocks[k]).or_default().insert(k);
        }
        for members in by_block.values() {
            for comp in components(members, adjacency) {
                for &k in &comp {
                    region[k] = next;
                }
                next += 1;
            }
        }
    }

    let mut block_ids: Vec<usize> = blocks.to_vec();
    block_ids.sort_unstable();
    block_ids.dedup();
    let mut absorbed = 0;
    for b in block_ids {
        let pending: BTreeSet<usize> = split.marginals.iter().copied().filter(|&m| blocks[m] == b).collect();
        if pending.is_empty() {
            continue;
        }
        let has_kernel = (0..n).any(|i| blocks[i] == b && region[i] != UNSET);
        if !has_kernel {
            let comps = components(&pending, adjacency);
            diagnostics.push(format!(
                "block {b} has no kernel node; its {} nodes form {} fallback region(s)",
                pending.len(),
                comps.len()
            ));
            for comp in comps {
                fallback += comp.len();
                for &m in &comp {
                    region[m] = next;
                }
                next += 1;
            }
            continue;
        }
        // Frontier of (distance, marginal, region) candidates.
        let mut heap = BinaryHeap::new();
        let push_from = |heap: &mut BinaryHeap<Reverse<(Key, usize, usize)>>, u: usize, r: usize| {
            for &m in adjacency.neighbors(u) {
                if pending.contains(&m) {
                    heap.push(Reverse((Key(distance(&features[m], &features[u])), m, r)));
                }
            }
        };
        for u in 0..n {
            if blocks[u] == b && region[u] != UNSET {
                push_from(&mut heap, u, region[u]);
            }
        }
        while let Some(Reverse((_, m, r))) = heap.pop() {
            if region[m] != UNSET {
                continue;
            }
            region[m] = r;
            absorbed += 1;
            push_from(&mut heap, m, r);
        }
        let stranded: BTreeSet<usize> = pending.iter().copied().filter(|&m| region[m] == UNSET).collect();
        if !stranded.is_empty() {
            let comps = components(&stranded, adjacency);
            diagnostics.push(format!(
                "block {b}: {} marginal node(s) unreachable from any kernel form {} fallback region(s)",
                stranded.len(),
                comps.len()
            ));
            for comp in comps {
                fallback += comp.len();
                for &m in &comp {
                    region[m] = next;
                }
                next += 1;
            }
        }
    }
    debug_assert!(region.iter().all(|&r| r != UNSET));
    Ok(Extension {
        assignment: canonical(&region),
        kernel_nodes: split.n_kernel_nodes(),
        absorbed_nodes: absorbed,
        fallback_nodes: fallback,
        diagnostics,
    })
}

/// Dense relabeling in order of first appearance.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|&l| {
            let k = map.len();
            *map.entry(l).or_insert(k)
        })
        .collect()
}

/// Parameters that produced a scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    pub layer_weights: Option<LayerWeights>,
    pub resolution: Option<f64>,
    pub membership_threshold: Option<f64>,
    pub size_bounds: Option<SizeBounds>,
    pub level: u32,
    /// Scale label when the scheme was produced for a characteristic scale.
    pub scale: Option<String>,
    pub method: String,
}

impl SchemeParams {
    pub fn named(method: impl Into<String>, level: u32) -> Self {
        SchemeParams {
            layer_weights: None,
            resolution: None,
            membership_threshold: None,
            size_bounds: None,
            level,
            scale: None,
            method: method.into(),
        }
    }
}

/// Assignment of every unit to exactly one region.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionScheme {
    /// Unit index to region id, dense in order of first unit.
    pub assignment: Vec<usize>,
    pub params: SchemeParams,
    pub level: u32,
}

impl PartitionScheme {
    pub fn new(assignment: &[usize], params: SchemeParams) -> Self {
        let level = params.level;
        PartitionScheme {
            assignment: canonical(assignment),
            params,
            level,
        }
    }

    /// Lifts a node assignment to units: absorbed units follow their host,
    /// forced singletons get regions of their own.
    pub fn from_nodes(
        filtered: &SizeFiltered,
        node_regions: &[usize],
        n_units: usize,
        params: SchemeParams,
    ) -> Result<Self> {
        if node_regions.len() != filtered.eligible.len() {
            return Err(Error::Consistency(format!(
                "{} node regions for {} eligible nodes",
                node_regions.len(),
                filtered.eligible.len()
            )));
        }
        const UNSET: usize = usize::MAX;
        let mut unit = vec![UNSET; n_units];
        for (e, &r) in filtered.eligible.iter().zip(node_regions) {
            for &m in &e.members {
                unit[m] = r;
            }
        }
        let first = node_regions.iter().copied().max().map_or(0, |m| m + 1);
        for (k, &s) in filtered.singletons.iter().enumerate() {
            unit[s] = first + k;
        }
        if let Some(i) = unit.iter().position(|&r| r == UNSET) {
            return Err(Error::Consistency(format!(
                "unit {i} was not placed by the size filter"
            )));
        }
        Ok(PartitionScheme::new(&unit, params))
    }

    pub fn n_regions(&self) -> usize {
        self.assignment.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn n_units(&self) -> usize {
        self.assignment.len()
    }

    /// Unit indices per region.
    pub fn regions(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_regions()];
        for (u, &r) in self.assignment.iter().enumerate() {
            out[r].push(u);
        }
        out
    }

    /// Coverage and contiguity under `adjacency`.
    pub fn validate(&self, adjacency: &Adjacency) -> Result<()> {
        check_scheme(&self.assignment, adjacency)
    }
}

/// Checks that `assignment` covers the adjacency's units with dense,
/// non-empty region ids and that each region is connected.
pub fn check_scheme(assignment: &[usize], adjacency: &Adjacency) -> Result<()> {
    if assignment.len() != adjacency.n_units() {
        return Err(Error::Consistency(format!(
            "scheme assigns {} units, study has {}",
            assignment.len(),
            adjacency.n_units()
        )));
    }
    let k = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut members: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for (u, &r) in assignment.iter().enumerate() {
        members[r].insert(u);
    }
    for (r, m) in members.iter().enumerate() {
        if m.is_empty() {
            return Err(Error::Consistency(format!("region {r} is empty")));
        }
        let parts = components(m, adjacency);
        if parts.len() > 1 {
            return Err(Error::Consistency(format!(
                "region {r} is split into {} disconnected parts",
                parts.len()
            )));
        }
    }
    Ok(())
}
