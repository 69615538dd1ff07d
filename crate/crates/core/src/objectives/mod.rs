//! Scheme objectives: semantics, spatial autocorrelation of population and
//! traffic, and interaction modularity, plus Pareto analysis.

mod moran;
mod pareto;
mod semantic;

pub use moran::{morans_i, morans_i_values, MoranResult, SpatialWeights};
pub use pareto::{
    dominates, pareto_flags, pareto_front, pareto_mask, select_scenario, select_scenario_index, Axis, Scenario,
};
pub use semantic::semantic_objective;

use crate::community::{modularity, HardPartition};
use crate::error::{Error, Result};
use crate::graph::InteractionGraph;
use crate::kernel::{PartitionScheme, SchemeParams};
use crate::spatial::{region_adjacency, Adjacency, SemanticField};

/// Number of regions of a dense assignment.
pub(crate) fn region_count(assignment: &[usize]) -> Result<usize> {
    let k = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; k];
    for &r in assignment {
        seen[r] = true;
    }
    if let Some(r) = seen.iter().position(|s| !s) {
        return Err(Error::Consistency(format!("region ids are not dense: {r} is unused")));
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Groups {
    pub semantics: f64,
    pub quantity: f64,
    pub interaction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveVector {
    pub f_sem: f64,
    pub f_pop: f64,
    pub f_traffic: f64,
    pub f_od: f64,
    pub f_prox: f64,
    pub groups: Groups,
    pub n_regions: usize,
    pub params: SchemeParams,
    /// Notes such as degenerate Moran fields.
    pub diagnostics: Vec<String>,
}

impl ObjectiveVector {
    /// Builds the vector and its group means from the five objectives.
    pub fn from_objectives(f: [f64; 5], n_regions: usize, params: SchemeParams) -> Self {
        let [f_sem, f_pop, f_traffic, f_od, f_prox] = f;
        ObjectiveVector {
            f_sem,
            f_pop,
            f_traffic,
            f_od,
            f_prox,
            groups: Groups {
                semantics: f_sem,
                quantity: 0.5 * (f_pop + f_traffic),
                interaction: 0.5 * (f_od + f_prox),
            },
            n_regions,
            params,
            diagnostics: Vec::new(),
        }
    }
}

/// `(1 − I_pop, 1 − I_traffic)` over region densities.
pub fn quantity_objectives(
    assignment: &[usize],
    population: &[f64],
    traffic: &[f64],
    areas: &[f64],
    weights: &SpatialWeights,
) -> Result<(f64, f64)> {
    let p = morans_i(assignment, population, areas, weights)?;
    let t = morans_i(assignment, traffic, areas, weights)?;
    Ok((1.0 - p.value, 1.0 - t.value))
}

/// Modularity at unit resolution of the OD and proximity graphs under the
/// region partition.
pub fn interaction_objectives(
    assignment: &[usize],
    od: &InteractionGraph,
    proximity: &InteractionGraph,
) -> Result<(f64, f64)> {
    let p = HardPartition::from_labels(assignment);
    let f_od = modularity(od, &p, 1.0).map_err(|e| e.with_context("OD modularity"))?;
    let f_prox = modularity(proximity, &p, 1.0).map_err(|e| e.with_context("proximity modularity"))?;
    Ok((f_od, f_prox))
}

/// Everything the objectives read, over the full unit set.
#[derive(Debug, Clone)]
pub struct EvaluationInputs<'a> {
    pub semantics: &'a SemanticField,
    pub areas: &'a [f64],
    pub population: &'a [f64],
    pub traffic: &'a [f64],
    pub adjacency: &'a Adjacency,
    pub od: &'a InteractionGraph,
    pub proximity: &'a InteractionGraph,
}

/// All five objectives plus group means for one scheme.
///
/// A one-region scheme has no spatial contrast; its Moran terms take the
/// degenerate value 0 instead of failing.
pub fn evaluate(scheme: &PartitionScheme, inputs: &EvaluationInputs<'_>) -> Result<ObjectiveVector> {
    let a = &scheme.assignment;
    let k = region_count(a)?;
    let adj = region_adjacency(a, inputs.adjacency)?;
    let f_sem = semantic_objective(a, inputs.semantics, inputs.areas, &adj)
        .map_err(|e| e.with_context("semantic objective"))?;
    let mut diagnostics = Vec::new();
    let (f_pop, f_traffic) = if k < 2 {
        diagnostics.push("single region: Moran's I taken as 0".to_string());
        (1.0, 1.0)
    } else {
        let w = SpatialWeights::new(k, adj.iter().copied())?;
        let mut one = |name: &str, values: &[f64]| -> Result<f64> {
            let m = morans_i(a, values, inputs.areas, &w).map_err(|e| e.with_context(format!("{name} Moran's I")))?;
            if m.degenerate {
                diagnostics.push(format!("{name} density is constant across regions"));
            }
            Ok(1.0 - m.value)
        };
        (one("population", inputs.population)?, one("traffic", inputs.traffic)?)
    };
    let (f_od, f_prox) = interaction_objectives(a, inputs.od, inputs.proximity)?;
    let mut v = ObjectiveVector::from_objectives([f_sem, f_pop, f_traffic, f_od, f_prox], k, scheme.params.clone());
    v.diagnostics = diagnostics;
    Ok(v)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::graph::LayerKind;

    pub(crate) fn vector(semantics: f64, quantity: f64, interaction: f64, n_regions: usize) -> ObjectiveVector {
        ObjectiveVector::from_objectives(
            [semantics, quantity, quantity, interaction, interaction],
            n_regions,
            SchemeParams::named("test", 0),
        )
    }

    #[test]
    fn groups_are_means() {
        let v = ObjectiveVector::from_objectives([0.1, 0.4, 0.6, 0.2, 0.8], 3, SchemeParams::named("t", 0));
        assert_eq!(v.groups.semantics, 0.1);
        assert!((v.groups.quantity - 0.5).abs() < 1e-15);
        assert!((v.groups.interaction - 0.5).abs() < 1e-15);
    }

    fn triangles() -> InteractionGraph {
        let e = [
            (0, 1, 1.0),
            (1, 2, 1.0),
            (0, 2, 1.0),
            (3, 4, 1.0),
            (4, 5, 1.0),
            (3, 5, 1.0),
        ];
        InteractionGraph::from_edges(LayerKind::Od, (0..6).map(|i| i.to_string()).collect(), e).unwrap()
    }

    #[test]
    fn interaction_of_triangles() {
        let g = triangles();
        let (od, prox) = interaction_objectives(&[0, 0, 0, 1, 1, 1], &g, &g).unwrap();
        assert!((od - 0.5).abs() < 1e-15 && (prox - 0.5).abs() < 1e-15);
        let (od, _) = interaction_objectives(&[0; 6], &g, &g).unwrap();
        assert_eq!(od, 0.0);
    }

    #[test]
    fn evaluate_matches_components() {
        let g = triangles();
        let adj = Adjacency::from_pairs(6, (0..5).map(|i| (i, i + 1, 0.0)));
        let sem = SemanticField::new(vec!["a".into(), "b".into()], vec![0, 0, 1, 1, 1, 0]).unwrap();
        let areas = [1.0, 2.0, 1.0, 1.0, 3.0, 1.0];
        let pop = [5.0, 1.0, 2.0, 8.0, 3.0, 1.0];
        let traffic = [1.0, 1.0, 2.0, 2.0, 3.0, 3.0];
        let inputs = EvaluationInputs {
            semantics: &sem,
            areas: &areas,
            population: &pop,
            traffic: &traffic,
            adjacency: &adj,
            od: &g,
            proximity: &g,
        };
        let scheme = PartitionScheme::new(&[0, 0, 1, 1, 2, 2], SchemeParams::named("t", 0));
        let v = evaluate(&scheme, &inputs).unwrap();
        let ra = region_adjacency(&scheme.assignment, &adj).unwrap();
        let w = SpatialWeights::new(3, ra.iter().copied()).unwrap();
        assert_eq!(
            v.f_sem,
            semantic_objective(&scheme.assignment, &sem, &areas, &ra).unwrap()
        );
        let (fp, ft) = quantity_objectives(&scheme.assignment, &pop, &traffic, &areas, &w).unwrap();
        assert_eq!((v.f_pop, v.f_traffic), (fp, ft));
        let (fo, fx) = interaction_objectives(&scheme.assignment, &g, &g).unwrap();
        assert_eq!((v.f_od, v.f_prox), (fo, fx));
        assert_eq!(v.n_regions, 3);
    }

    #[test]
    fn all_in_one_scheme() {
        let g = triangles();
        let adj = Adjacency::from_pairs(6, (0..5).map(|i| (i, i + 1, 0.0)));
        let sem = SemanticField::new(vec!["a".into()], vec![0; 6]).unwrap();
        let ones = [1.0; 6];
        let inputs = EvaluationInputs {
            semantics: &sem,
            areas: &ones,
            population: &ones,
            traffic: &ones,
            adjacency: &adj,
            od: &g,
            proximity: &g,
        };
        let v = evaluate(&PartitionScheme::new(&[0; 6], SchemeParams::named("t", 0)), &inputs).unwrap();
        assert_eq!((v.f_od, v.f_prox, v.n_regions), (0.0, 0.0, 1));
        assert_eq!(v.diagnostics.len(), 1);
    }

    #[test]
    fn sparse_region_ids_rejected() {
        assert!(region_count(&[0, 2]).is_err());
    }
}
