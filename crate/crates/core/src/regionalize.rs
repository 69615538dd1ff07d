//! End-to-end regionalization of a study: size filtering, graph layers,
//! ensemble detection, kernel extension and scheme evaluation.

use std::collections::BTreeMap;

use crate::community::{ensemble_membership, HardPartition, MembershipTable};
use crate::error::{Error, Result};
use crate::graph::{
    aggregate_layers, build_attribute_similarity_graph, build_od_graph, build_proximity_graph, remap_od,
    InteractionGraph, LayerWeights,
};
use crate::kernel::{extend_kernels, split_kernel_marginal, standardized_densities, PartitionScheme, SchemeParams};
use crate::objectives::{evaluate, EvaluationInputs, ObjectiveVector};
use crate::spatial::{apply_size_constraint, compute_adjacency, Adjacency, SizeBounds, SizeFiltered, UndersizedPolicy};
use crate::study::Study;

/// Settings fixed for every detection on a prepared study.
#[derive(Debug, Clone, PartialEq)]
pub struct PrepareOptions {
    pub gap_threshold: f64,
    /// `None` skips size filtering.
    pub size_bounds: Option<SizeBounds>,
    pub undersized: UndersizedPolicy,
    /// Proximity decay; defaults to the median spacing of adjacent units.
    pub sigma: Option<f64>,
    /// Per-field similarity bandwidths; default to each field's density spread.
    pub bandwidths: Option<Vec<f64>>,
    pub population_field: String,
    pub traffic_field: String,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        PrepareOptions {
            gap_threshold: 30.0,
            size_bounds: None,
            undersized: UndersizedPolicy::Absorb,
            sigma: None,
            bandwidths: None,
            population_field: "population".into(),
            traffic_field: "traffic".into(),
        }
    }
}

/// Parameters of one detection run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectParams {
    pub layer_weights: LayerWeights,
    pub resolution: f64,
    pub membership_threshold: f64,
    pub n_runs: usize,
    pub seed: u64,
}

impl Default for DetectParams {
    fn default() -> Self {
        DetectParams {
            layer_weights: LayerWeights::default(),
            resolution: 1.0,
            membership_threshold: 0.6,
            n_runs: 10,
            seed: 0,
        }
    }
}

/// A study with adjacency, size filter and graph layers computed once.
#[derive(Debug, Clone)]
pub struct Prepared<'a> {
    pub study: &'a Study,
    pub options: PrepareOptions,
    /// Unit adjacency over the whole study.
    pub adjacency: Adjacency,
    pub filtered: SizeFiltered,
    /// Adjacency between eligible nodes (any adjacent member pair).
    pub node_adjacency: Adjacency,
    pub node_ids: Vec<String>,
    pub node_blocks: Vec<usize>,
    pub node_features: Vec<Vec<f64>>,
    pub od_layer: InteractionGraph,
    pub proximity_layer: InteractionGraph,
    pub attribute_layer: InteractionGraph,
    /// Full-unit graphs used by the interaction objectives.
    pub eval_od: InteractionGraph,
    pub eval_proximity: InteractionGraph,
    pub sigma: f64,
    pub bandwidths: Vec<f64>,
    population: usize,
    traffic: usize,
    areas: Vec<f64>,
}

/// One detection outcome.
#[derive(Debug, Clone)]
pub struct Regionalization {
    pub scheme: PartitionScheme,
    pub membership: MembershipTable,
    pub n_communities: usize,
    pub kernel_nodes: usize,
    pub absorbed_nodes: usize,
    pub fallback_nodes: usize,
    pub diagnostics: Vec<String>,
}

fn field_index(study: &Study, name: &str) -> Result<usize> {
    study
        .fields
        .iter()
        .position(|f| f.name == name)
        .ok_or_else(|| Error::Config(format!("no attribute field named `{name}`")))
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len().max(1) as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

impl<'a> Prepared<'a> {
    pub fn new(study: &'a Study, options: PrepareOptions) -> Result<Self> {
        if !(options.gap_threshold > 0.0) {
            return Err(Error::Config(format!(
                "gap_threshold must be positive, got {}",
                options.gap_threshold
            )));
        }
        if study.units.is_empty() {
            return Err(Error::DegenerateInput("study has no units".into()));
        }
        let population = field_index(study, &options.population_field)?;
        let traffic = field_index(study, &options.traffic_field)?;
        let adjacency = compute_adjacency(&study.units, options.gap_threshold)?;
        let filtered = match options.size_bounds {
            Some(b) => apply_size_constraint(&study.units, &study.fields, &adjacency, b, options.undersized)?,
            None => SizeFiltered::identity(&study.units, &study.fields),
        };
        if filtered.eligible.is_empty() {
            return Err(Error::DegenerateInput("no unit satisfies the size bounds".into()));
        }
        let mut node_of = vec![None; study.units.len()];
        for (k, e) in filtered.eligible.iter().enumerate() {
            for &m in &e.members {
                node_of[m] = Some(k);
            }
        }
        let node_pairs: Vec<(usize, usize, f64)> = adjacency
            .pairs()
            .filter_map(|(a, b, d)| match (node_of[a], node_of[b]) {
                (Some(x), Some(y)) if x != y => Some((x, y, d)),
                _ => None,
            })
            .collect();
        let n_nodes = filtered.eligible.len();
        let node_adjacency = Adjacency::from_pairs(n_nodes, node_pairs);
        let node_ids: Vec<String> = filtered
            .eligible
            .iter()
            .map(|e| study.units[e.host].id.clone())
            .collect();
        let labels = study.block_labels();
        let node_blocks: Vec<usize> = filtered.eligible.iter().map(|e| labels[e.host]).collect();
        let node_values: Vec<Vec<f64>> = (0..study.fields.len())
            .map(|f| filtered.eligible.iter().map(|e| e.values[f]).collect())
            .collect();
        let node_areas: Vec<f64> = filtered.eligible.iter().map(|e| e.area).collect();
        let node_features = standardized_densities(&node_values, &node_areas);

        let sigma = match options.sigma {
            Some(s) => s,
            None => node_adjacency
                .median_spacing()
                .or_else(|| adjacency.median_spacing())
                .unwrap_or(1.0),
        };
        let bandwidths = match &options.bandwidths {
            Some(b) => b.clone(),
            None => node_values
                .iter()
                .map(|v| {
                    let d: Vec<f64> = v.iter().zip(&node_areas).map(|(x, a)| x / a).collect();
                    let s = std_dev(&d);
                    if s > 0.0 {
                        s
                    } else {
                        1.0
                    }
                })
                .collect(),
        };

        let ids = study.ids();
        let host: BTreeMap<&str, &str> = filtered
            .eligible
            .iter()
            .flat_map(|e| e.members.iter().map(move |&m| (m, e.host)))
            .map(|(m, h)| (study.units[m].id.as_str(), study.units[h].id.as_str()))
            .collect();
        let remapped = remap_od(&study.od, |id| host.get(id).copied().unwrap_or(id).to_string())?;
        let od_layer = build_od_graph(&remapped, &node_ids, &ids)?;
        let proximity_layer = build_proximity_graph(&node_adjacency, &node_ids, sigma)?;
        let attribute_layer =
            build_attribute_similarity_graph(&node_values, &node_areas, &node_adjacency, &node_ids, &bandwidths)?;
        let eval_od = build_od_graph(&study.od, &ids, &ids)?;
        let eval_proximity = build_proximity_graph(&adjacency, &ids, sigma)?;
        Ok(Prepared {
            study,
            options,
            adjacency,
            filtered,
            node_adjacency,
            node_ids,
            node_blocks,
            node_features,
            od_layer,
            proximity_layer,
            attribute_layer,
            eval_od,
            eval_proximity,
            sigma,
            bandwidths,
            population,
            traffic,
            areas: study.units.iter().map(|u| u.area).collect(),
        })
    }

    /// Weighted aggregate of the three node layers.
    pub fn detection_graph(&self, weights: &LayerWeights) -> Result<InteractionGraph> {
        aggregate_layers(&[&self.od_layer, &self.proximity_layer, &self.attribute_layer], weights)
    }

    /// Detects communities, extends kernels and lifts the result to units.
    pub fn regionalize(&self, params: &DetectParams, level: u32) -> Result<Regionalization> {
        let (membership, consensus) = self.detect(params)?;
        self.extend(membership, consensus.n_communities(), params, level)
    }

    /// Ensemble memberships for the weights, resolution, runs and seed of
    /// `params`; the membership threshold is not used.
    pub fn detect(&self, params: &DetectParams) -> Result<(MembershipTable, HardPartition)> {
        let graph = self.detection_graph(&params.layer_weights)?;
        ensemble_membership(&graph, params.resolution, params.n_runs, params.seed)
            .map_err(|e| e.with_context(format!("community detection at resolution {}", params.resolution)))
    }

    /// Splits `membership` at the threshold of `params` and extends kernels.
    pub fn extend(
        &self,
        membership: MembershipTable,
        n_communities: usize,
        params: &DetectParams,
        level: u32,
    ) -> Result<Regionalization> {
        let split = split_kernel_marginal(&membership, params.membership_threshold)?;
        let ext = extend_kernels(&split, &self.node_adjacency, &self.node_blocks, &self.node_features)?;
        let scheme_params = SchemeParams {
            layer_weights: Some(params.layer_weights),
            resolution: Some(params.resolution),
            membership_threshold: Some(params.membership_threshold),
            size_bounds: self.options.size_bounds,
            level,
            scale: None,
            method: "detect".into(),
        };
        let scheme =
            PartitionScheme::from_nodes(&self.filtered, &ext.assignment, self.study.units.len(), scheme_params)?;
        let mut diagnostics: Vec<String> = self.filtered.warnings.iter().map(|w| w.message.clone()).collect();
        diagnostics.extend(ext.diagnostics);
        Ok(Regionalization {
            scheme,
            membership,
            n_communities,
            kernel_nodes: ext.kernel_nodes,
            absorbed_nodes: ext.absorbed_nodes,
            fallback_nodes: ext.fallback_nodes,
            diagnostics,
        })
    }

    pub fn inputs(&self) -> EvaluationInputs<'_> {
        EvaluationInputs {
            semantics: &self.study.semantics,
            areas: &self.areas,
            population: &self.study.fields[self.population].values,
            traffic: &self.study.fields[self.traffic].values,
            adjacency: &self.adjacency,
            od: &self.eval_od,
            proximity: &self.eval_proximity,
        }
    }

    pub fn evaluate(&self, scheme: &PartitionScheme) -> Result<ObjectiveVector> {
        evaluate(scheme, &self.inputs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_city, CityConfig};

    #[test]
    fn default_city_yields_valid_scheme() {
        let study = generate_city(&CityConfig::with_grid(3, 3, 11)).unwrap();
        let p = Prepared::new(&study, PrepareOptions::default()).unwrap();
        assert!(p.adjacency.len() >= 9 * 12);
        let r = p.regionalize(&DetectParams::default(), 0).unwrap();
        r.scheme.validate(&p.adjacency).unwrap();
        assert_eq!(r.scheme.n_units(), 81);
        assert!(r.scheme.n_regions() >= 9);
        let v = p.evaluate(&r.scheme).unwrap();
        assert_eq!(v.n_regions, r.scheme.n_regions());
    }

    #[test]
    fn size_filter_feeds_scheme() {
        let study = generate_city(&CityConfig::with_grid(2, 3, 1)).unwrap();
        let opts = PrepareOptions {
            size_bounds: Some(SizeBounds::new(8_500.0, 9_500.0).unwrap()),
            ..Default::default()
        };
        let p = Prepared::new(&study, opts).unwrap();
        let r = p.regionalize(&DetectParams::default(), 0).unwrap();
        r.scheme.validate(&p.adjacency).unwrap();
        for &s in &p.filtered.singletons {
            let region = r.scheme.assignment[s];
            assert_eq!(r.scheme.assignment.iter().filter(|&&x| x == region).count(), 1);
        }
    }

    #[test]
    fn same_seed_same_scheme() {
        let study = generate_city(&CityConfig::with_grid(2, 3, 3)).unwrap();
        let p = Prepared::new(&study, PrepareOptions::default()).unwrap();
        let a = p
            .regionalize(
                &DetectParams {
                    seed: 5,
                    ..Default::default()
                },
                0,
            )
            .unwrap();
        let b = p
            .regionalize(
                &DetectParams {
                    seed: 5,
                    ..Default::default()
                },
                0,
            )
            .unwrap();
        assert_eq!(a.scheme, b.scheme);
    }

    #[test]
    fn missing_field_is_config_error() {
        let study = generate_city(&CityConfig::with_grid(2, 2, 3)).unwrap();
        let opts = PrepareOptions {
            population_field: "people".into(),
            ..Default::default()
        };
        assert!(matches!(Prepared::new(&study, opts), Err(Error::Config(_))));
    }
}
