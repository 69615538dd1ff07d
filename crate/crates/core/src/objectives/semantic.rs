use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::spatial::SemanticField;

use super::region_count;

/// Area-weighted product of intra-region purity and inter-region contrast.
///
/// Purity is `1 − H/ln T` with `H` the entropy of the region's category area
/// shares and `T` the global category count. Contrast is the neighbor-area
/// weighted Euclidean distance between share vectors; isolated regions score
/// zero contrast.
pub fn semantic_objective(
    assignment: &[usize],
    semantics: &SemanticField,
    areas: &[f64],
    region_adjacency: &BTreeSet<(usize, usize)>,
) -> Result<f64> {
    if assignment.len() != semantics.assignment.len() || assignment.len() != areas.len() {
        return Err(Error::Consistency(format!(
            "semantic inputs differ in size: {} assigned, {} labeled, {} areas",
            assignment.len(),
            semantics.assignment.len(),
            areas.len()
        )));
    }
    let k = region_count(assignment)?;
    let t = semantics.n_categories();
    let mut cat_area = vec![vec![0.0; t]; k];
    for ((&r, &c), &a) in assignment.iter().zip(&semantics.assignment).zip(areas) {
        cat_area[r][c] += a;
    }
    let area: Vec<f64> = cat_area.iter().map(|row| row.iter().sum()).collect();
    if let Some(r) = area.iter().position(|&a| !(a > 0.0)) {
        return Err(Error::geometry(format!("region {r}"), "region has zero area"));
    }
    let shares: Vec<Vec<f64>> = cat_area
        .iter()
        .zip(&area)
        .map(|(row, a)| row.iter().map(|x| x / a).collect())
        .collect();
    let intra: Vec<f64> = shares
        .iter()
        .map(|s| {
            if t == 1 {
                return 1.0;
            }
            let h: f64 = s.iter().filter(|&&p| p > 0.0).map(|p| -p * p.ln()).sum();
            1.0 - h / (t as f64).ln()
        })
        .collect();
    let mut num = vec![0.0; k];
    let mut den = vec![0.0; k];
    for &(a, b) in region_adjacency {
        if a >= k || b >= k {
            return Err(Error::Consistency(format!(
                "region pair ({a}, {b}) outside {k} regions"
            )));
        }
        let d: f64 = shares[a]
            .iter()
            .zip(&shares[b])
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        num[a] += area[b] * d;
        den[a] += area[b];
        num[b] += area[a] * d;
        den[b] += area[a];
    }
    let total: f64 = area.iter().sum();
    let score: f64 = (0..k)
        .map(|j| {
            let inter = if den[j] > 0.0 { num[j] / den[j] } else { 0.0 };
            area[j] * intra[j] * inter
        })
        .sum();
    Ok(score / total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(t: usize, labels: &[usize]) -> SemanticField {
        SemanticField::new((0..t).map(|i| format!("c{i}")).collect(), labels.to_vec()).unwrap()
    }

    #[test]
    fn uniform_semantics_is_zero() {
        let s = field(3, &[1, 1, 1, 1]);
        let adj = BTreeSet::from([(0, 1)]);
        let f = semantic_objective(&[0, 0, 1, 1], &s, &[1.0, 2.0, 3.0, 4.0], &adj).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn two_pure_regions_give_root_two() {
        let s = field(2, &[0, 1]);
        let f = semantic_objective(&[0, 1], &s, &[5.0, 5.0], &BTreeSet::from([(0, 1)])).unwrap();
        assert!((f - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn even_mix_is_zero() {
        let s = field(2, &[0, 1, 0, 1]);
        let f = semantic_objective(&[0, 0, 1, 1], &s, &[1.0; 4], &BTreeSet::from([(0, 1)])).unwrap();
        assert!(f.abs() < 1e-15);
    }

    #[test]
    fn isolated_regions_have_no_contrast() {
        let s = field(2, &[0, 1]);
        assert_eq!(
            semantic_objective(&[0, 1], &s, &[1.0, 1.0], &BTreeSet::new()).unwrap(),
            0.0
        );
    }

    #[test]
    fn zero_area_region_rejected() {
        let s = field(2, &[0, 1]);
        let r = semantic_objective(&[0, 1], &s, &[1.0, 0.0], &BTreeSet::from([(0, 1)]));
        assert!(matches!(r, Err(Error::Geometry { .. })));
    }
}
