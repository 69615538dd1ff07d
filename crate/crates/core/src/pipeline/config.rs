use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::community::log_grid;
use crate::error::{Error, Result};
use crate::graph::LayerWeights;
use crate::io::read_study;
use crate::objectives::Scenario;
use crate::regionalize::{DetectParams, PrepareOptions};
use crate::spatial::{SizeBounds, UndersizedPolicy};
use crate::study::Study;
use crate::synth::{generate_city, CityConfig};

/// Flat pipeline configuration, usually read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Units GeoJSON; requires `od`.
    pub units: Option<PathBuf>,
    /// OD CSV with header `src_id,dst_id,weight`.
    pub od: Option<PathBuf>,
    /// Generate a synthetic city instead of reading inputs.
    pub synth: bool,
    pub synth_blocks: usize,
    pub synth_units: usize,
    pub synth_unit_size: f64,
    pub synth_od_exponent: f64,
    pub synth_noise: f64,
    /// City seed; defaults to `seed`.
    pub synth_seed: Option<u64>,

    pub seed: u64,
    pub out: PathBuf,
    pub scenario: Scenario,
    /// Worker threads; defaults to the available parallelism.
    pub workers: Option<usize>,

    pub a_min: Option<f64>,
    pub a_max: Option<f64>,
    pub undersized: UndersizedPolicy,
    pub gap_threshold: f64,
    pub population_field: String,
    pub traffic_field: String,

    pub w_od: f64,
    pub w_prox: f64,
    pub w_attr: f64,
    pub sigma: Option<f64>,
    pub bandwidths: Option<Vec<f64>>,
    pub membership_threshold: f64,
    pub n_runs: usize,
    pub resolution: f64,

    /// Explicit resolution sweep grid; otherwise a log grid.
    pub resolutions: Option<Vec<f64>>,
    pub resolution_min: f64,
    pub resolution_max: f64,
    pub resolution_count: usize,
    pub stability_tol: f64,
    pub min_span: f64,

    /// Parameter grid for `sweep`; each list defaults to the single value above.
    pub sweep_resolutions: Option<Vec<f64>>,
    pub sweep_membership_thresholds: Option<Vec<f64>>,
    pub sweep_w_od: Option<Vec<f64>>,
    pub sweep_w_prox: Option<Vec<f64>>,
    pub sweep_w_attr: Option<Vec<f64>>,
    /// Region-count band edges for the sweep report.
    pub bands: Vec<usize>,

    pub method: u8,
    /// Aggregation steps for method 1.
    pub multilevel_levels: usize,
    /// Resolution per aggregation step; defaults to halving from `resolution`.
    pub multilevel_resolutions: Option<Vec<f64>>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            units: None,
            od: None,
            synth: false,
            synth_blocks: 3,
            synth_units: 3,
            synth_unit_size: 100.0,
            synth_od_exponent: 2.0,
            synth_noise: 0.2,
            synth_seed: None,
            seed: 0,
            out: PathBuf::from("out"),
            scenario: Scenario::UserCoverage,
            workers: None,
            a_min: None,
            a_max: None,
            undersized: UndersizedPolicy::Absorb,
            gap_threshold: 30.0,
            population_field: "population".into(),
            traffic_field: "traffic".into(),
            w_od: 0.5,
            w_prox: 0.5,
            w_attr: 0.0,
            sigma: None,
            bandwidths: None,
            membership_threshold: 0.6,
            n_runs: 10,
            resolution: 1.0,
            resolutions: None,
            resolution_min: 0.05,
            resolution_max: 20.0,
            resolution_count: 40,
            stability_tol: 0.1,
            min_span: 1.5f64.ln(),
            sweep_resolutions: None,
            sweep_membership_thresholds: None,
            sweep_w_od: None,
            sweep_w_prox: None,
            sweep_w_attr: None,
            bands: vec![50, 100, 300],
            method: 2,
            multilevel_levels: 1,
            multilevel_resolutions: None,
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("`{name}` must be positive, got {x}")))
    }
}

impl PipelineConfig {
    /// Parses TOML; relative input and output paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut c: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for p in [&mut c.units, &mut c.od].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if c.out.is_relative() {
            c.out = base.join(&c.out);
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        PipelineConfig::from_toml(&text, base).map_err(|e| e.with_context(format!("config {}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        match (self.synth, &self.units, &self.od) {
            (true, None, None) | (false, Some(_), Some(_)) => {}
            (true, _, _) => return Err(Error::Config("set either `synth` or `units`/`od`, not both".into())),
            _ => {
                return Err(Error::Config(
                    "inputs need both `units` and `od`, or `synth = true`".into(),
                ))
            }
        }
        positive("gap_threshold", self.gap_threshold)?;
        positive("resolution", self.resolution)?;
        if let Some(s) = self.sigma {
            positive("sigma", s)?;
        }
        for b in self.bandwidths.iter().flatten() {
            positive("bandwidths", *b)?;
        }
        if !(self.membership_threshold > 0.5 && self.membership_threshold <= 1.0) {
            return Err(Error::Config(format!(
                "`membership_threshold` must be in (0.5, 1], got {}",
                self.membership_threshold
            )));
        }
        if self.n_runs == 0 {
            return Err(Error::Config("`n_runs` must be at least 1".into()));
        }
        self.size_bounds()?;
        self.layer_weights()?;
        if self.resolutions.is_none() {
            positive("resolution_min", self.resolution_min)?;
            positive("resolution_max", self.resolution_max)?;
            if self.resolution_max <= self.resolution_min || self.resolution_count < 3 {
                return Err(Error::Config(
                    "resolution grid needs min < max and at least 3 points".into(),
                ));
            }
        }
        if !(self.stability_tol >= 0.0) || !(self.min_span >= 0.0) {
            return Err(Error::Config(
                "`stability_tol` and `min_span` must be non-negative".into(),
            ));
        }
        if self.bands.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("`bands` must be strictly increasing".into()));
        }
        if !(1..=3).contains(&self.method) {
            return Err(Error::Config(format!(
                "multilevel method must be 1, 2 or 3, got {}",
                self.method
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("`workers` must be at least 1".into()));
        }
        Ok(())
    }

    pub fn size_bounds(&self) -> Result<Option<SizeBounds>> {
        match (self.a_min, self.a_max) {
            (None, None) => Ok(None),
            (Some(lo), Some(hi)) => SizeBounds::new(lo, hi).map(Some),
            _ => Err(Error::Config("set both `a_min` and `a_max`, or neither".into())),
        }
    }

    pub fn layer_weights(&self) -> Result<LayerWeights> {
        LayerWeights::new(self.w_od, self.w_prox, self.w_attr)
    }

    pub fn prepare_options(&self) -> Result<PrepareOptions> {
        Ok(PrepareOptions {
            gap_threshold: self.gap_threshold,
            size_bounds: self.size_bounds()?,
            undersized: self.undersized,
            sigma: self.sigma,
            bandwidths: self.bandwidths.clone(),
            population_field: self.population_field.clone(),
            traffic_field: self.traffic_field.clone(),
        })
    }

    pub fn detect_params(&self) -> Result<DetectParams> {
        Ok(DetectParams {
            layer_weights: self.layer_weights()?,
            resolution: self.resolution,
            membership_threshold: self.membership_threshold,
            n_runs: self.n_runs,
            seed: self.seed,
        })
    }

    /// Resolution grid for the characteristic-scale sweep.
    pub fn resolution_grid(&self) -> Vec<f64> {
        match &self.resolutions {
            Some(r) => r.clone(),
            None => log_grid(self.resolution_min, self.resolution_max, self.resolution_count),
        }
    }

    pub fn city_config(&self) -> CityConfig {
        let seed = self.synth_seed.unwrap_or(self.seed);
        let mut c = CityConfig::with_layout(self.synth_blocks, self.synth_units, self.synth_unit_size, seed);
        c.od_exponent = self.synth_od_exponent;
        c.noise = self.synth_noise;
        c
    }

    /// Reads or generates the study.
    pub fn study(&self) -> Result<Study> {
        self.validate()?;
        if self.synth {
            generate_city(&self.city_config())
        } else {
            read_study(self.units.as_deref().unwrap(), self.od.as_deref().unwrap())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_toml_parses() {
        let c = PipelineConfig::from_toml(
            "synth = true\nseed = 4\nw_attr = 0.2\nscenario = \"mobility_coverage\"\nbands = [10, 20]\n",
            Path::new("/tmp"),
        )
        .unwrap();
        assert!(c.synth);
        assert_eq!(c.scenario, Scenario::MobilityCoverage);
        assert_eq!(c.out, PathBuf::from("/tmp/out"));
        c.validate().unwrap();
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(PipelineConfig::from_toml("synth = true\nresolutoin = 2.0\n", Path::new(".")).is_err());
    }

    #[test]
    fn inputs_are_exclusive() {
        let mut c = PipelineConfig::default();
        assert!(c.validate().is_err());
        c.synth = true;
        c.validate().unwrap();
        c.units = Some("u.geojson".into());
        assert!(c.validate().is_err());
    }

    #[test]
    fn relative_paths_follow_config() {
        let c = PipelineConfig::from_toml("units = \"u.geojson\"\nod = \"/abs/od.csv\"\n", Path::new("/data")).unwrap();
        assert_eq!(c.units, Some(PathBuf::from("/data/u.geojson")));
        assert_eq!(c.od, Some(PathBuf::from("/abs/od.csv")));
    }

    #[test]
    fn ranges_checked() {
        let base = PipelineConfig {
            synth: true,
            ..Default::default()
        };
        for bad in [
            PipelineConfig {
                membership_threshold: 0.5,
                ..base.clone()
            },
            PipelineConfig {
                a_min: Some(5.0),
                ..base.clone()
            },
            PipelineConfig {
                w_od: 0.0,
                w_prox: 0.0,
                ..base.clone()
            },
            PipelineConfig {
                method: 4,
                ..base.clone()
            },
            PipelineConfig {
                gap_threshold: 0.0,
                ..base.clone()
            },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))), "{bad:?}");
        }
    }

    #[test]
    fn default_grid() {
        let g = PipelineConfig::default().resolution_grid();
        assert_eq!(g.len(), 40);
    }
}
