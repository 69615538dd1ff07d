use crate::error::{Error, Result};
use crate::graph::InteractionGraph;

use super::HardPartition;

/// Generalized modularity with resolution `γ`:
/// `Q = (1/ΣD) Σ_{αβ} [I_αβ − γ D_α D_β / ΣD] δ(c_α, c_β)` over ordered pairs.
///
/// Evaluated per community as `Σ_c [2 L_c / ΣD − γ (D_c / ΣD)²]`.
pub fn modularity(graph: &InteractionGraph, partition: &HardPartition, resolution: f64) -> Result<f64> {
    if partition.len() != graph.n_nodes() {
        return Err(Error::Consistency(format!(
            "partition covers {} nodes, graph has {}",
            partition.len(),
            graph.n_nodes()
        )));
    }
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::Config(format!("resolution must be positive, got {resolution}")));
    }
    let total = graph.total_weight();
    if total <= 0.0 {
        return Err(Error::DegenerateGraph);
    }
    let k = partition.n_communities();
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for &(a, b, w) in graph.edges() {
        let (ca, cb) = (partition.community_of(a), partition.community_of(b));
        degree[ca] += w;
        degree[cb] += w;
        if ca == cb {
            internal[ca] += w;
        }
    }
    Ok(internal
        .iter()
        .zip(&degree)
        .map(|(l, d)| 2.0 * l / total - resolution * (d / total).powi(2))
        .sum())
}
