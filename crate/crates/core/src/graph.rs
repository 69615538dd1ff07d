//! Weighted interaction graphs over units: OD, proximity and
//! attribute-similarity layers, and their normalized aggregation.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::{Adjacency, InteractionKind, InteractionMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Od,
    Proximity,
    AttributeSimilarity,
    Aggregate,
}

/// Undirected weighted graph with no self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    pub kind: LayerKind,
    pub nodes: Vec<String>,
    /// `(a, b, w)` with `a < b`, sorted, unique, `w > 0`.
    edges: Vec<(usize, usize, f64)>,
    total_weight: f64,
}

impl InteractionGraph {
    /// Builds a graph from possibly repeated, unordered edges; repeats sum.
    pub fn from_edges(
        kind: LayerKind,
        nodes: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let n = nodes.len();
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::Consistency(format!("edge ({a}, {b}) outside {n} nodes")));
            }
            if a == b {
                return Err(Error::Consistency(format!("self-loop on node `{}`", nodes[a])));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Consistency(format!("edge weight {w} is invalid")));
            }
            *acc.entry((a.min(b), a.max(b))).or_insert(0.0) += w;
        }
        let edges: Vec<_> = acc
            .into_iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|((a, b), w)| (a, b, w))
            .collect();
        let total_weight = 2.0 * edges.iter().map(|e| e.2).sum::<f64>();
        Ok(InteractionGraph {
            kind,
            nodes,
            edges,
            total_weight,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Sum of all node degrees (twice the edge weight sum).
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn edge_weight_sum(&self) -> f64 {
        0.5 * self.total_weight
    }

    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nodes.len()];
        for &(a, b, w) in &self.edges {
            d[a] += w;
            d[b] += w;
        }
        d
    }

    /// Same graph with every weight multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let edges: Vec<_> = self.edges.iter().map(|&(a, b, w)| (a, b, w * c)).collect();
        let total_weight = 2.0 * edges.iter().map(|e| e.2).sum::<f64>();
        InteractionGraph {
            kind: self.kind,
            nodes: self.nodes.clone(),
            edges,
            total_weight,
        }
    }
}

/// Non-negative per-layer coefficients, at least one positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerWeights {
    pub od: f64,
    pub proximity: f64,
    pub attribute: f64,
}

impl LayerWeights {
    pub fn new(od: f64, proximity: f64, attribute: f64) -> Result<Self> {
        let w = LayerWeights {
            od,
            proximity,
            attribute,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.od, self.proximity, self.attribute];
        if all.iter().any(|c| !c.is_finite() || *c < 0.0) || all.iter().all(|c| *c == 0.0) {
            return Err(Error::Config(format!(
                "layer weights must be finite, non-negative and not all zero: {all:?}"
            )));
        }
        Ok(())
    }

    pub fn coefficient(&self, kind: LayerKind) -> f64 {
        match kind {
            LayerKind::Od => self.od,
            LayerKind::Proximity => self.proximity,
            LayerKind::AttributeSimilarity => self.attribute,
            LayerKind::Aggregate => 0.0,
        }
    }
}

impl Default for LayerWeights {
    fn default() -> Self {
        LayerWeights {
            od: 0.5,
            proximity: 0.5,
            attribute: 0.0,
        }
    }
}

/// OD graph over `nodes`. Entries naming ids outside `known` are an error;
/// entries between known ids that are not both nodes are dropped.
pub fn build_od_graph(od: &InteractionMatrix, nodes: &[String], known: &[String]) -> Result<InteractionGraph> {
    if od.kind != InteractionKind::Od {
        return Err(Error::Config("build_od_graph needs an OD matrix".into()));
    }
    let pos: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let known: HashSet<&str> = known.iter().chain(nodes).map(String::as_str).collect();
    let mut offenders: Vec<&str> = od
        .iter()
        .flat_map(|(a, b, _)| [a, b])
        .filter(|id| !known.contains(id))
        .collect();
    if !offenders.is_empty() {
        offenders.sort_unstable();
        offenders.dedup();
        return Err(Error::Consistency(format!(
            "OD references unknown units: {}",
            offenders.join(", ")
        )));
    }
    let edges = od
        .iter()
        .filter_map(|(a, b, w)| Some((*pos.get(a)?, *pos.get(b)?, w)))
        .collect::<Vec<_>>();
    InteractionGraph::from_edges(LayerKind::Od, nodes.to_vec(), edges)
}

/// Rewrites OD ids through `host_of` (e.g. absorbed unit → host) and drops
/// flows that collapse onto a single id.
pub fn remap_od(od: &InteractionMatrix, host_of: impl Fn(&str) -> String) -> Result<InteractionMatrix> {
    let mut out = InteractionMatrix::new(od.kind);
    for (a, b, w) in od.iter() {
        let (ha, hb) = (host_of(a), host_of(b));
        if ha != hb {
            out.add(&ha, &hb, w)?;
        }
    }
    Ok(out)
}

/// Proximity layer: adjacent pairs weighted `exp(-spacing / sigma)`.
pub fn build_proximity_graph(adjacency: &Adjacency, nodes: &[String], sigma: f64) -> Result<InteractionGraph> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!("proximity sigma must be positive, got {sigma}")));
    }
    if adjacency.n_units() != nodes.len() {
        return Err(Error::Consistency("adjacency and node list differ in size".into()));
    }
    let edges = adjacency.pairs().map(|(a, b, d)| (a, b, (-d / sigma).exp()));
    InteractionGraph::from_edges(LayerKind::Proximity, nodes.to_vec(), edges)
}

/// Gaussian similarity of area densities over adjacent pairs.
///
/// `values[f][i]` is field `f` at node `i`; density is value over area.
pub fn build_attribute_similarity_graph(
    values: &[Vec<f64>],
    areas: &[f64],
    adjacency: &Adjacency,
    nodes: &[String],
    bandwidths: &[f64],
) -> Result<InteractionGraph> {
    if values.len() != bandwidths.len() {
        return Err(Error::Config(format!(
            "{} fields but {} bandwidths",
            values.len(),
            bandwidths.len()
        )));
    }
    if let Some(b) = bandwidths.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
        return Err(Error::Config(format!("attribute bandwidth must be positive, got {b}")));
    }
    if adjacency.n_units() != nodes.len() || areas.len() != nodes.len() || values.iter().any(|v| v.len() != nodes.len())
    {
        return Err(Error::Consistency("attribute layer inputs differ in size".into()));
    }
    let densities: Vec<Vec<f64>> = values
        .iter()
        .map(|v| v.iter().zip(areas).map(|(x, a)| x / a).collect())
        .collect();
    let edges = adjacency.pairs().map(|(a, b, _)| {
        let e: f64 = densities
            .iter()
            .zip(bandwidths)
            .map(|(d, bw)| ((d[a] - d[b]) / bw).powi(2))
            .sum();
        (a, b, (-e).exp())
    });
    InteractionGraph::from_edges(LayerKind::AttributeSimilarity, nodes.to_vec(), edges)
}

/// Normalizes each non-empty layer to unit edge weight and sums them with
/// the coefficient that `weights` assigns to the layer's kind.
pub fn aggregate_layers(layers: &[&InteractionGraph], weights: &LayerWeights) -> Result<InteractionGraph> {
    weights.validate()?;
    let first = layers
        .first()
        .ok_or_else(|| Error::Consistency("no layers to aggregate".into()))?;
    if let Some(bad) = layers.iter().find(|l| l.nodes != first.nodes) {
        return Err(Error::Consistency(format!(
            "{:?} layer has a different node set from the {:?} layer",
            bad.kind, first.kind
        )));
    }
    let mut edges = Vec::new();
    for layer in layers {
        let c = weights.coefficient(layer.kind);
        let sum = layer.edge_weight_sum();
        if c == 0.0 || sum == 0.0 {
            continue;
        }
        edges.extend(layer.edges().iter().map(|&(a, b, w)| (a, b, c * w / sum)));
    }
    InteractionGraph::from_edges(LayerKind::Aggregate, first.nodes.clone(), edges)
}
