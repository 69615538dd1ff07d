use std::collections::BTreeSet;

use crate::error::{Error, Result};

use super::region_count;

/// Symmetric binary contiguity weights over regions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialWeights {
    n: usize,
    pairs: BTreeSet<(usize, usize)>,
}

impl SpatialWeights {
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in pairs {
            if a == b || a >= n || b >= n {
                return Err(Error::Consistency(format!(
                    "invalid weight pair ({a}, {b}) for {n} regions"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(SpatialWeights { n, pairs: set })
    }

    pub fn n_regions(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        if self.pairs.contains(&(a.min(b), a.max(b))) {
            1.0
        } else {
            0.0
        }
    }

    /// Sum over ordered pairs.
    pub fn total(&self) -> f64 {
        2.0 * self.pairs.len() as f64
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoranResult {
    pub value: f64,
    /// Set when the field is constant and the value is the 0 convention.
    pub degenerate: bool,
}

/// Global Moran's I of per-region values `x`.
pub fn morans_i_values(x: &[f64], weights: &SpatialWeights) -> Result<MoranResult> {
    let n = x.len();
    if n < 2 {
        return Err(Error::DegenerateInput(format!(
            "Moran's I needs at least 2 regions, got {n}"
        )));
    }
    if weights.n_regions() != n {
        return Err(Error::Consistency(format!(
            "weights cover {} regions, values cover {n}",
            weights.n_regions()
        )));
    }
    let w = weights.total();
    if w == 0.0 {
        return Err(Error::DegenerateInput("spatial weights are all zero".into()));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let var: f64 = dev.iter().map(|d| d * d).sum();
    let scale: f64 = x.iter().map(|v| v * v).sum();
    if var <= 1e-24 * scale || var == 0.0 {
        return Ok(MoranResult {
            value: 0.0,
            degenerate: true,
        });
    }
    let cross: f64 = weights.pairs().map(|(a, b)| 2.0 * dev[a] * dev[b]).sum();
    Ok(MoranResult {
        value: n as f64 / w * cross / var,
        degenerate: false,
    })
}

/// Moran's I over region densities (summed values over summed area).
pub fn morans_i(assignment: &[usize], values: &[f64], areas: &[f64], weights: &SpatialWeights) -> Result<MoranResult> {
    morans_i_values(&region_densities(assignment, values, areas)?, weights)
}

pub(crate) fn region_densities(assignment: &[usize], values: &[f64], areas: &[f64]) -> Result<Vec<f64>> {
    if assignment.len() != values.len() || assignment.len() != areas.len() {
        return Err(Error::Consistency("density inputs differ in size".into()));
    }
    let k = region_count(assignment)?;
    let mut sum = vec![0.0; k];
    let mut area = vec![0.0; k];
    for ((&r, &v), &a) in assignment.iter().zip(values).zip(areas) {
        sum[r] += v;
        area[r] += a;
    }
    if let Some(r) = area.iter().position(|&a| !(a > 0.0)) {
        return Err(Error::geometry(format!("region {r}"), "region has zero area"));
    }
    Ok(sum.iter().zip(&area).map(|(s, a)| s / a).collect())
}
