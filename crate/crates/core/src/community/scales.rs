use crate::error::{Error, Result};

use super::SweepRecord;

/// Ordinal name of a scale, coarsest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ScaleLabel {
    District,
    SubDistrict,
    Neighborhood,
    Community,
    Finer(usize),
}

impl ScaleLabel {
    pub fn from_rank(rank: usize) -> Self {
        match rank {
            0 => ScaleLabel::District,
            1 => ScaleLabel::SubDistrict,
            2 => ScaleLabel::Neighborhood,
            3 => ScaleLabel::Community,
            k => ScaleLabel::Finer(k),
        }
    }
}

impl std::fmt::Display for ScaleLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScaleLabel::District => f.write_str("district"),
            ScaleLabel::SubDistrict => f.write_str("sub-district"),
            ScaleLabel::Neighborhood => f.write_str("neighborhood"),
            ScaleLabel::Community => f.write_str("community"),
            ScaleLabel::Finer(k) => write!(f, "scale-{k}"),
        }
    }
}

/// A resolution range over which the community count is stable.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicScale {
    pub resolution_range: (f64, f64),
    pub stable_count: usize,
    pub label: ScaleLabel,
}

impl CharacteristicScale {
    /// Geometric midpoint of the range (the sweep grid is logarithmic).
    pub fn midpoint(&self) -> f64 {
        (self.resolution_range.0 * self.resolution_range.1).sqrt()
    }
}

fn median(xs: &mut [usize]) -> f64 {
    xs.sort_unstable();
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2] as f64
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2]) as f64
    }
}

fn stable(counts: &[usize], tol: f64) -> Option<f64> {
    let mut s = counts.to_vec();
    let med = median(&mut s);
    counts
        .iter()
        .all(|&c| (c as f64 - med).abs() <= tol * med + 1e-12)
        .then_some(med)
}

/// Finds maximal runs of consecutive records whose community counts stay
/// within `stability_tol` of the run median and whose resolutions span at
/// least a factor `exp(min_span)`.
///
/// Plateaus at one community, or where every node is its own community,
/// carry no structure and are skipped. Scales are labeled coarsest first.
pub fn detect_characteristic_scales(
    records: &[SweepRecord],
    stability_tol: f64,
    min_span: f64,
) -> Result<Vec<CharacteristicScale>> {
    if records.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "scale detection needs at least 3 sweep records, got {}",
            records.len()
        )));
    }
    if !(stability_tol >= 0.0) || !(min_span >= 0.0) {
        return Err(Error::Config("stability_tol and min_span must be non-negative".into()));
    }
    if records.windows(2).any(|w| w[1].resolution <= w[0].resolution) {
        return Err(Error::Config("sweep records must be sorted by resolution".into()));
    }
    let counts: Vec<usize> = records.iter().map(|r| r.n_communities).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let mut j = i;
        while j + 1 < records.len() && stable(&counts[i..=j + 1], stability_tol).is_some() {
            j += 1;
        }
        let (lo, hi) = (records[i].resolution, records[j].resolution);
        let med = stable(&counts[i..=j], stability_tol).unwrap_or(counts[i] as f64);
        let count = med.round() as usize;
        let n_nodes = records[i].partition.len();
        let trivial = count <= 1 || count >= n_nodes;
        if j > i && (hi / lo).ln() >= min_span - 1e-12 && !trivial {
            out.push(CharacteristicScale {
                resolution_range: (lo, hi),
                stable_count: count,
                label: ScaleLabel::from_rank(out.len()),
            });
            i = j + 1;
        } else {
            i += 1;
        }
    }
    Ok(out)
}

/// `count` logarithmically spaced values over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::HardPartition;

    fn recs(counts: &[usize], grid: &[f64]) -> Vec<SweepRecord> {
        counts
            .iter()
            .zip(grid)
            .map(|(&c, &r)| SweepRecord {
                resolution: r,
                n_communities: c,
                modularity: 0.0,
                partition: HardPartition::from_labels(&(0..50).map(|i| i % c).collect::<Vec<_>>()),
            })
            .collect()
    }

    #[test]
    fn constant_is_one_scale() {
        let g = log_grid(0.1, 10.0, 8);
        let s = detect_characteristic_scales(&recs(&[3; 8], &g), 0.1, 1.5f64.ln()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].resolution_range, (g[0], g[7]));
        assert_eq!(s[0].stable_count, 3);
        assert_eq!(s[0].label, ScaleLabel::District);
    }

    #[test]
    fn two_exact_plateaus() {
        let g = log_grid(1.0, 10.0, 6);
        let s = detect_characteristic_scales(&recs(&[2, 2, 2, 7, 7, 7], &g), 0.0, 1.5f64.ln()).unwrap();
        assert_eq!(s.iter().map(|x| x.stable_count).collect::<Vec<_>>(), [2, 7]);
        assert!(s[0].resolution_range.1 < s[1].resolution_range.0);
        assert_eq!(s[1].label, ScaleLabel::SubDistrict);
    }

    #[test]
    fn short_runs_are_dropped() {
        let g = log_grid(1.0, 1.2, 5);
        let s = detect_characteristic_scales(&recs(&[4; 5], &g), 0.0, 1.5f64.ln()).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn needs_three_records() {
        let g = log_grid(1.0, 2.0, 2);
        assert!(matches!(
            detect_characteristic_scales(&recs(&[2, 2], &g), 0.1, 0.1),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.05, 20.0, 40);
        assert_eq!(g.len(), 40);
        assert!((g[0] - 0.05).abs() < 1e-15 && (g[39] - 20.0).abs() < 1e-12);
    }
}
