//! Seeded synthetic cities and graph benchmarks.
//!
//! A city is a square grid of blocks separated by major roads, each block a
//! grid of rectangular units separated by minor roads. Population follows a
//! polycentric negative-exponential density, traffic tracks population with
//! multiplicative noise, semantics come from planted zones, and OD flows
//! follow a gravity model on unit centroids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Shape};
use crate::graph::{InteractionGraph, LayerKind};
use crate::spatial::{AttributeField, BasicSpatialUnit, InteractionKind, InteractionMatrix, SemanticField};
use crate::study::Study;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Center {
    pub x: f64,
    pub y: f64,
    /// Peak density (people per square meter).
    pub peak: f64,
    /// Decay radius `r₀` in meters.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticZone {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub category: usize,
    /// Probability a unit inside the zone takes the zone category.
    pub purity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CityConfig {
    pub blocks_per_side: usize,
    pub units_per_block_side: usize,
    pub unit_size: f64,
    pub minor_road: f64,
    pub major_road: f64,
    /// Units shrink toward their lower-left corner by up to this fraction of `unit_size`.
    pub jitter: f64,
    pub centers: Vec<Center>,
    pub categories: Vec<String>,
    /// Category of units outside every zone.
    pub background_category: usize,
    pub semantic_zones: Vec<SemanticZone>,
    /// Gravity distance-decay exponent `β`.
    pub od_exponent: f64,
    /// Total flow mass after scaling; `None` keeps raw gravity values.
    pub od_total: Option<f64>,
    /// Relative traffic noise amplitude.
    pub noise: f64,
    pub seed: u64,
}

impl Default for CityConfig {
    fn default() -> Self {
        CityConfig::with_grid(3, 3, 7)
    }
}

impl CityConfig {
    /// Default layout with 100 m units.
    pub fn with_grid(blocks_per_side: usize, units_per_block_side: usize, seed: u64) -> Self {
        CityConfig::with_layout(blocks_per_side, units_per_block_side, 100.0, seed)
    }

    /// Two population centers and three planted zones placed relative to
    /// the city extent.
    pub fn with_layout(blocks_per_side: usize, units_per_block_side: usize, unit_size: f64, seed: u64) -> Self {
        let mut c = CityConfig {
            blocks_per_side,
            units_per_block_side,
            unit_size,
            minor_road: 8.0,
            major_road: 20.0,
            jitter: 0.1,
            centers: Vec::new(),
            categories: ["residential", "commercial", "industrial", "education"]
                .map(String::from)
                .to_vec(),
            background_category: 0,
            semantic_zones: Vec::new(),
            od_exponent: 2.0,
            od_total: Some(1.0e5),
            noise: 0.2,
            seed,
        };
        let e = c.extent();
        c.centers = vec![
            Center {
                x: 0.3 * e,
                y: 0.35 * e,
                peak: 0.03,
                radius: 0.25 * e,
            },
            Center {
                x: 0.75 * e,
                y: 0.7 * e,
                peak: 0.018,
                radius: 0.18 * e,
            },
        ];
        c.semantic_zones = vec![
            SemanticZone {
                x0: 0.15 * e,
                y0: 0.2 * e,
                x1: 0.45 * e,
                y1: 0.5 * e,
                category: 1,
                purity: 0.85,
            },
            SemanticZone {
                x0: 0.66 * e,
                y0: 0.0,
                x1: e,
                y1: 0.34 * e,
                category: 2,
                purity: 0.9,
            },
            SemanticZone {
                x0: 0.0,
                y0: 0.66 * e,
                x1: 0.34 * e,
                y1: e,
                category: 3,
                purity: 0.8,
            },
        ];
        c
    }

    /// Width of the block pitch (block side plus one major road).
    fn block_side(&self) -> f64 {
        let u = self.units_per_block_side as f64;
        u * self.unit_size + (u - 1.0) * self.minor_road
    }

    /// Side length of the whole city.
    pub fn extent(&self) -> f64 {
        let b = self.blocks_per_side as f64;
        b * self.block_side() + (b - 1.0) * self.major_road
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.blocks_per_side < 2 || self.units_per_block_side < 2 {
            return bad("city grid needs at least 2 blocks per side and 2 units per block side".into());
        }
        if !(self.unit_size > 0.0) || !(self.minor_road > 0.0) || !(self.major_road > 0.0) {
            return bad("unit size and road widths must be positive".into());
        }
        if !(0.0..0.5).contains(&self.jitter) {
            return bad(format!("jitter must be in [0, 0.5), got {}", self.jitter));
        }
        if self.centers.iter().any(|c| !(c.radius > 0.0) || !(c.peak >= 0.0)) {
            return bad("centers need positive radius and non-negative peak".into());
        }
        if self.categories.is_empty() || self.background_category >= self.categories.len() {
            return bad("background category must index the category list".into());
        }
        for z in &self.semantic_zones {
            if !(z.purity > 0.0 && z.purity <= 1.0) {
                return bad(format!("zone purity must be in (0, 1], got {}", z.purity));
            }
            if z.category >= self.categories.len() {
                return bad(format!("zone category {} out of range", z.category));
            }
        }
        if !(self.od_exponent > 0.0) {
            return bad(format!("gravity exponent must be positive, got {}", self.od_exponent));
        }
        if !(self.noise >= 0.0) {
            return bad("noise must be non-negative".into());
        }
        Ok(())
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Level-0 units and their level-1 block polygons.
pub fn generate_units(config: &CityConfig) -> Result<(Vec<BasicSpatialUnit>, Vec<BasicSpatialUnit>)> {
    config.validate()?;
    let mut r = rng(config.seed, 0);
    let (nb, nu) = (config.blocks_per_side, config.units_per_block_side);
    let n_units = nb * nb * nu * nu;
    let width = n_units.to_string().len();
    let bwidth = (nb * nb).to_string().len();
    let pitch = config.block_side() + config.major_road;
    let mut units = Vec::with_capacity(n_units);
    let mut blocks = Vec::with_capacity(nb * nb);
    for by in 0..nb {
        for bx in 0..nb {
            let bid = format!("b{:0bwidth$}", by * nb + bx);
            let (ox, oy) = (bx as f64 * pitch, by as f64 * pitch);
            blocks.push(BasicSpatialUnit::new(
                bid.clone(),
                Shape::rect(ox, oy, ox + config.block_side(), oy + config.block_side()),
                "",
                1,
            ));
            for uy in 0..nu {
                for ux in 0..nu {
                    let x0 = ox + ux as f64 * (config.unit_size + config.minor_road);
                    let y0 = oy + uy as f64 * (config.unit_size + config.minor_road);
                    let w = config.unit_size * (1.0 - config.jitter * r.random::<f64>());
                    let h = config.unit_size * (1.0 - config.jitter * r.random::<f64>());
                    let id = format!("u{:0width$}", units.len());
                    units.push(BasicSpatialUnit::new(
                        id,
                        Shape::rect(x0, y0, x0 + w, y0 + h),
                        bid.clone(),
                        0,
                    ));
                }
            }
        }
    }
    Ok((units, blocks))
}

/// Population, traffic and semantics for `units`.
pub fn generate_fields(
    config: &CityConfig,
    units: &[BasicSpatialUnit],
) -> Result<(AttributeField, AttributeField, SemanticField)> {
    config.validate()?;
    let mut noise_rng = rng(config.seed, 1);
    let mut sem_rng = rng(config.seed, 2);
    let mut pop = Vec::with_capacity(units.len());
    let mut traffic = Vec::with_capacity(units.len());
    let mut sem = Vec::with_capacity(units.len());
    let t = config.categories.len();
    for u in units {
        let c = u.shape.centroid();
        let density: f64 = config
            .centers
            .iter()
            .map(|ctr| ctr.peak * (-c.distance(Point::new(ctr.x, ctr.y)) / ctr.radius).exp())
            .sum();
        let p = density * u.area;
        pop.push(p);
        let eps: f64 = noise_rng.random_range(-1.0..=1.0);
        traffic.push((p * (1.0 + config.noise * eps)).max(0.0));
        let zone = config
            .semantic_zones
            .iter()
            .find(|z| c.x >= z.x0 && c.x <= z.x1 && c.y >= z.y0 && c.y <= z.y1);
        let draw: f64 = sem_rng.random();
        let other: usize = sem_rng.random_range(0..t.max(2) - 1);
        let label = match zone {
            None => config.background_category,
            Some(z) if draw < z.purity || t == 1 => z.category,
            // Uniform over the categories other than the zone's.
            Some(z) => {
                if other >= z.category {
                    other + 1
                } else {
                    other
                }
            }
        };
        sem.push(label);
    }
    Ok((
        AttributeField::new("population", pop)?,
        AttributeField::new("traffic", traffic)?,
        SemanticField::new(config.categories.clone(), sem)?,
    ))
}

/// Unscaled gravity flow between two masses at distance `d`.
pub fn gravity_flow(pa: f64, pb: f64, d: f64, beta: f64) -> f64 {
    pa * pb / d.powf(beta)
}

/// Gravity-model OD over unit centroids, scaled to `config.od_total` if set.
pub fn generate_od(
    config: &CityConfig,
    units: &[BasicSpatialUnit],
    population: &AttributeField,
) -> Result<InteractionMatrix> {
    if !(config.od_exponent > 0.0) {
        return Err(Error::Config(format!(
            "gravity exponent must be positive, got {}",
            config.od_exponent
        )));
    }
    let centroids: Vec<Point> = units.iter().map(|u| u.shape.centroid()).collect();
    let mut flows = Vec::new();
    for a in 0..units.len() {
        for b in (a + 1)..units.len() {
            let d = centroids[a].distance(centroids[b]);
            if d == 0.0 {
                continue;
            }
            let w = gravity_flow(population.values[a], population.values[b], d, config.od_exponent);
            if w > 0.0 {
                flows.push((a, b, w));
            }
        }
    }
    let total: f64 = flows.iter().map(|f| f.2).sum();
    let scale = match config.od_total {
        Some(t) if total > 0.0 => t / total,
        _ => 1.0,
    };
    let mut m = InteractionMatrix::new(InteractionKind::Od);
    for (a, b, w) in flows {
        m.add(&units[a].id, &units[b].id, w * scale)?;
    }
    Ok(m)
}

/// Generates a complete study area.
pub fn generate_city(config: &CityConfig) -> Result<Study> {
    let (units, blocks) = generate_units(config)?;
    let (pop, traffic, sem) = generate_fields(config, &units)?;
    let od = generate_od(config, &units, &pop)?;
    Study::new(units, blocks, vec![pop, traffic], sem, od)
}

/// Planted-partition graph: `n_blocks` groups of `block_size` nodes with
/// edge probability `p_in` within and `p_out` across groups.
pub fn planted_partition(
    n_blocks: usize,
    block_size: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> (InteractionGraph, Vec<usize>) {
    let n = n_blocks * block_size;
    let truth: Vec<usize> = (0..n).map(|i| i / block_size).collect();
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let p = if truth[a] == truth[b] { p_in } else { p_out };
            if r.random::<f64>() < p {
                edges.push((a, b, 1.0));
            }
        }
    }
    let nodes = (0..n).map(|i| format!("n{i}")).collect();
    let g = InteractionGraph::from_edges(LayerKind::Od, nodes, edges).expect("valid planted graph");
    (g, truth)
}

/// Two-level benchmark: `4` cliques of 8 nodes. Cliques 0–1 and 2–3 are
/// paired by `pair_bridges` unit edges; the two pairs touch through a single
/// edge of weight `pair_link`. Returns the graph, the 2-group truth and the
/// 4-group truth.
pub fn nested_cliques(pair_bridges: usize, pair_link: f64) -> (InteractionGraph, Vec<usize>, Vec<usize>) {
    let size = 8;
    let mut edges = Vec::new();
    for c in 0..4 {
        for a in 0..size {
            for b in (a + 1)..size {
                edges.push((c * size + a, c * size + b, 1.0));
            }
        }
    }
    for (p, q) in [(0, 1), (2, 3)] {
        for k in 0..pair_bridges.min(size) {
            edges.push((p * size + k, q * size + k, 1.0));
        }
    }
    if pair_link > 0.0 {
        edges.push((size - 1, 2 * size + size - 1, pair_link));
    }
    let nodes = (0..4 * size).map(|i| format!("n{i}")).collect();
    let g = InteractionGraph::from_edges(LayerKind::Od, nodes, edges).expect("valid benchmark graph");
    let fine: Vec<usize> = (0..4 * size).map(|i| i / size).collect();
    let coarse: Vec<usize> = fine.iter().map(|c| c / 2).collect();
    (g, coarse, fine)
}
