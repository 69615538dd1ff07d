//! Resolution-parameterized modularity, Louvain detection, ensemble
//! memberships and characteristic-scale detection from resolution sweeps.

mod ensemble;
mod louvain;
mod modularity;
mod scales;

pub use ensemble::{ensemble_membership, resolution_sweep, MembershipTable, SweepRecord};
pub use louvain::louvain;
pub use modularity::modularity;
pub use scales::{detect_characteristic_scales, log_grid, CharacteristicScale, ScaleLabel};

use std::collections::HashMap;

/// Crisp community assignment with dense ids `0..n_communities`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HardPartition {
    assignment: Vec<usize>,
    n_communities: usize,
}

impl HardPartition {
    /// Relabels arbitrary labels densely in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map: HashMap<usize, usize> = HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let n = map.len();
                *map.entry(*l).or_insert(n)
            })
            .collect();
        HardPartition {
            assignment,
            n_communities: map.len(),
        }
    }

    pub fn singletons(n: usize) -> Self {
        HardPartition {
            assignment: (0..n).collect(),
            n_communities: n,
        }
    }

    pub fn all_in_one(n: usize) -> Self {
        HardPartition {
            assignment: vec![0; n],
            n_communities: usize::from(n > 0),
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn n_communities(&self) -> usize {
        self.n_communities
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_communities];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same items");
    let n = a.len() as f64;
    let choose2 = |x: f64| x * (x - 1.0) / 2.0;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut ra: HashMap<usize, f64> = HashMap::new();
    let mut rb: HashMap<usize, f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1.0;
        *ra.entry(x).or_default() += 1.0;
        *rb.entry(y).or_default() += 1.0;
    }
    let index: f64 = joint.values().copied().map(choose2).sum();
    let sa: f64 = ra.values().copied().map(choose2).sum();
    let sb: f64 = rb.values().copied().map(choose2).sum();
    let expected = sa * sb / choose2(n);
    let max = 0.5 * (sa + sb);
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_relabeling() {
        let p = HardPartition::from_labels(&[7, 3, 7, 9]);
        assert_eq!(p.assignment(), &[0, 1, 0, 2]);
        assert_eq!(p.n_communities(), 3);
    }

    #[test]
    fn ari_identical_and_permuted() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[5, 5, 2, 2]), 1.0);
        assert!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]) < 0.0);
    }
}
