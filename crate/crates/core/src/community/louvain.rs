//! Multi-level Louvain with a resolution parameter.
//!
//! Each level repeats local moves in a seeded node order until no node
//! changes community, then collapses communities into super-nodes. Weights
//! are normalized by the total edge weight so gains are scale-free, and
//! gains within [`TIE_EPS`] of each other count as ties resolved toward the
//! lowest community id (a node stays put unless a move strictly beats it).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::InteractionGraph;

use super::HardPartition;

const TIE_EPS: f64 = 1e-12;
const MAX_PASSES: usize = 1000;

struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    degree: Vec<f64>,
    self_loops: Vec<f64>,
}

impl Level {
    fn from_graph(graph: &InteractionGraph) -> Level {
        let n = graph.n_nodes();
        let m = graph.edge_weight_sum();
        let mut adj = vec![Vec::new(); n];
        let mut degree = vec![0.0; n];
        for &(a, b, w) in graph.edges() {
            let w = w / m;
            adj[a].push((b, w));
            adj[b].push((a, w));
            degree[a] += w;
            degree[b] += w;
        }
        Level {
            adj,
            degree,
            self_loops: vec![0.0; n],
        }
    }

    fn n(&self) -> usize {
        self.adj.len()
    }

    /// Local moving phase. Returns dense community labels and whether any node moved.
    fn local_moving(&self, resolution: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.n();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot = self.degree.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        // Sum of degrees is 2 after normalization.
        let two_m = 2.0;
        let mut weight_to = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any_move = false;
        for _ in 0..MAX_PASSES {
            let mut moved = false;
            for &i in &order {
                let ci = comm[i];
                let ki = self.degree[i];
                for &(j, w) in &self.adj[i] {
                    let cj = comm[j];
                    if weight_to[cj] == 0.0 {
                        touched.push(cj);
                    }
                    weight_to[cj] += w;
                }
                tot[ci] -= ki;
                let gain = |c: usize, w: f64| w - resolution * tot[c] * ki / two_m;
                let stay = gain(ci, weight_to[ci]);
                let best = touched
                    .iter()
                    .filter(|&&c| c != ci)
                    .map(|&c| gain(c, weight_to[c]))
                    .fold(f64::NEG_INFINITY, f64::max);
                // A move must strictly beat staying; equal-gain moves go to the lowest id.
                let best_c = if best > stay + TIE_EPS {
                    touched
                        .iter()
                        .copied()
                        .filter(|&c| c != ci && gain(c, weight_to[c]) >= best - TIE_EPS)
                        .min()
                        .unwrap_or(ci)
                } else {
                    ci
                };
                tot[best_c] += ki;
                comm[i] = best_c;
                if best_c != ci {
                    moved = true;
                }
                for &c in &touched {
                    weight_to[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
            any_move = true;
        }
        // Dense relabel in order of first node index.
        let mut map = vec![usize::MAX; n];
        let mut next = 0;
        let labels = comm
            .iter()
            .map(|&c| {
                if map[c] == usize::MAX {
                    map[c] = next;
                    next += 1;
                }
                map[c]
            })
            .collect();
        (labels, any_move)
    }

    fn aggregate(&self, labels: &[usize]) -> Level {
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut weights: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); k];
        let mut self_loops = vec![0.0; k];
        let mut degree = vec![0.0; k];
        for i in 0..self.n() {
            let ci = labels[i];
            self_loops[ci] += self.self_loops[i];
            degree[ci] += self.degree[i];
            for &(j, w) in &self.adj[i] {
                let cj = labels[j];
                if ci == cj {
                    // Each internal edge is seen from both ends.
                    if i < j {
                        self_loops[ci] += w;
                    }
                } else {
                    *weights[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        Level {
            adj: weights.into_iter().map(|m| m.into_iter().collect()).collect(),
            degree,
            self_loops,
        }
    }
}

/// Louvain community detection at the given resolution.
///
/// Deterministic for a given `(graph, resolution, seed)`; isolated nodes
/// end up as singleton communities.
pub fn louvain(graph: &InteractionGraph, resolution: f64, seed: u64) -> Result<HardPartition> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::Config(format!("resolution must be positive, got {resolution}")));
    }
    if graph.total_weight() <= 0.0 {
        return Err(Error::DegenerateGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = Level::from_graph(graph);
    let mut assignment: Vec<usize> = (0..graph.n_nodes()).collect();
    loop {
        let (labels, moved) = level.local_moving(resolution, &mut rng);
        if !moved {
            break;
        }
        for a in assignment.iter_mut() {
            *a = labels[*a];
        }
        level = level.aggregate(&labels);
        if level.n() == 1 {
            break;
        }
    }
    Ok(HardPartition::from_labels(&assignment))
}
