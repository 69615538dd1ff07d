use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ObjectiveVector;

/// Group indicators usable as Pareto axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Semantics,
    Quantity,
    Interaction,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Semantics, Axis::Quantity, Axis::Interaction];

    pub fn of(self, v: &ObjectiveVector) -> f64 {
        match self {
            Axis::Semantics => v.groups.semantics,
            Axis::Quantity => v.groups.quantity,
            Axis::Interaction => v.groups.interaction,
        }
    }
}

/// `a` dominates `b`: at least as good everywhere, strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y) && a.iter().zip(b).any(|(x, y)| x > y)
}

/// Non-dominated flags for maximization over points of equal dimension.
///
/// Points are visited in lexicographically descending order, so anything
/// that dominates a point is visited before it; each point is compared
/// against the current front only.
pub fn pareto_mask(points: &[Vec<f64>]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[b]
            .iter()
            .zip(&points[a])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut front: Vec<usize> = Vec::new();
    let mut keep = vec![false; points.len()];
    for i in order {
        if !front.iter().any(|&f| dominates(&points[f], &points[i])) {
            keep[i] = true;
            front.push(i);
        }
    }
    keep
}

fn check_axes(axes: &[Axis]) -> Result<()> {
    let mut a = axes.to_vec();
    a.sort_unstable();
    a.dedup();
    if a.len() != axes.len() || axes.len() < 2 {
        return Err(Error::Config("Pareto analysis needs at least 2 distinct axes".into()));
    }
    Ok(())
}

/// Flags per vector for the chosen axes.
pub fn pareto_flags(vectors: &[ObjectiveVector], axes: &[Axis]) -> Result<Vec<bool>> {
    check_axes(axes)?;
    if vectors.is_empty() {
        return Err(Error::DegenerateInput("Pareto front of an empty batch".into()));
    }
    let points: Vec<Vec<f64>> = vectors.iter().map(|v| axes.iter().map(|a| a.of(v)).collect()).collect();
    Ok(pareto_mask(&points))
}

/// The non-dominated vectors, in input order.
pub fn pareto_front(vectors: &[ObjectiveVector], axes: &[Axis]) -> Result<Vec<ObjectiveVector>> {
    let flags = pareto_flags(vectors, axes)?;
    Ok(vectors
        .iter()
        .zip(flags)
        .filter(|(_, f)| *f)
        .map(|(v, _)| v.clone())
        .collect())
}

/// Deployment preference driving scheme choice from a front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Maximize the population objective.
    UserCoverage,
    /// Maximize the OD modularity objective.
    MobilityCoverage,
    /// Maximize the semantic objective.
    HighValueCoverage,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::UserCoverage,
        Scenario::MobilityCoverage,
        Scenario::HighValueCoverage,
    ];

    pub fn objective(self, v: &ObjectiveVector) -> f64 {
        match self {
            Scenario::UserCoverage => v.f_pop,
            Scenario::MobilityCoverage => v.f_od,
            Scenario::HighValueCoverage => v.f_sem,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::UserCoverage => "user_coverage",
            Scenario::MobilityCoverage => "mobility_coverage",
            Scenario::HighValueCoverage => "high_value_coverage",
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))
    }
}

/// Index of the member maximizing the scenario objective; ties go to fewer
/// regions, then to the earlier member.
pub fn select_scenario_index(front: &[ObjectiveVector], scenario: Scenario) -> Result<usize> {
    if front.is_empty() {
        return Err(Error::DegenerateInput("cannot select from an empty front".into()));
    }
    let mut best = 0;
    for (i, v) in front.iter().enumerate().skip(1) {
        let (o, b) = (scenario.objective(v), scenario.objective(&front[best]));
        if o > b || (o == b && v.n_regions < front[best].n_regions) {
            best = i;
        }
    }
    Ok(best)
}

pub fn select_scenario(front: &[ObjectiveVector], scenario: Scenario) -> Result<&ObjectiveVector> {
    select_scenario_index(front, scenario).map(|i| &front[i])
}
