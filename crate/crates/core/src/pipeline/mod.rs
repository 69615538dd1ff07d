//! Pipeline drivers behind the command line: single runs, parameter
//! sweeps, multilevel schemes, synthetic inputs and output validation.

mod config;

pub use config::PipelineConfig;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::community::{detect_characteristic_scales, resolution_sweep, CharacteristicScale, SweepRecord};
use crate::error::{Error, Result};
use crate::graph::LayerWeights;
use crate::io::{od_csv, parse_partition_csv, partition_csv, partition_geojson, units_geojson, write_file};
use crate::kernel::PartitionScheme;
use crate::multilevel::{check_nesting, multilevel_method1, multilevel_method2, multilevel_method3};
use crate::objectives::{pareto_flags, select_scenario_index, Axis, ObjectiveVector, Scenario};
use crate::regionalize::{DetectParams, Prepared};
use crate::study::Study;
use crate::synth::generate_city;

/// Files written by a command and its human-readable summary.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Self {
        Writer {
            dir: dir.to_owned(),
            files: Vec::new(),
        }
    }

    fn put(&mut self, name: &str, contents: &str) -> Result<()> {
        let p = self.dir.join(name);
        write_file(&p, contents)?;
        self.files.push(p);
        Ok(())
    }

    fn finish(mut self, summary: String) -> Result<RunReport> {
        self.put("report.txt", &summary)?;
        Ok(RunReport {
            out_dir: self.dir,
            files: self.files,
            summary,
        })
    }
}

fn with_pool<T: Send>(config: &PipelineConfig, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        b = b.num_threads(w);
    }
    let pool = b
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(f)
}

pub const OBJECTIVES_HEADER: &str =
    "scheme_id,n_regions,f_sem,f_pop,f_traffic,f_od,f_prox,g_semantics,g_quantity,g_interaction,pareto";

/// Objective batch CSV; rows are `(scheme id, vector, pareto flag)`.
pub fn objectives_csv(rows: &[(String, &ObjectiveVector, bool)]) -> String {
    let mut s = String::from(OBJECTIVES_HEADER);
    s.push('\n');
    for (id, v, p) in rows {
        let _ = writeln!(
            s,
            "{id},{},{},{},{},{},{},{},{},{},{p}",
            v.n_regions,
            v.f_sem,
            v.f_pop,
            v.f_traffic,
            v.f_od,
            v.f_prox,
            v.groups.semantics,
            v.groups.quantity,
            v.groups.interaction
        );
    }
    s
}

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut s = String::from("resolution,n_communities,modularity\n");
    for r in records {
        let _ = writeln!(s, "{},{},{}", r.resolution, r.n_communities, r.modularity);
    }
    s
}

pub fn scales_csv(scales: &[CharacteristicScale]) -> String {
    let mut s = String::from("label,resolution_low,resolution_high,stable_count,midpoint\n");
    for c in scales {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            c.label,
            c.resolution_range.0,
            c.resolution_range.1,
            c.stable_count,
            c.midpoint()
        );
    }
    s
}

/// `unit_id,region_l0,region_l1,...` over the given levels.
pub fn nesting_csv(study: &Study, schemes: &[PartitionScheme]) -> String {
    let mut s = String::from("unit_id");
    for k in 0..schemes.len() {
        let _ = write!(s, ",region_l{k}");
    }
    s.push('\n');
    for (i, u) in study.units.iter().enumerate() {
        s.push_str(&u.id);
        for sc in schemes {
            let _ = write!(s, ",{}", sc.assignment[i]);
        }
        s.push('\n');
    }
    s
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Generating parameters per level.
pub fn nesting_params_csv(schemes: &[PartitionScheme]) -> String {
    let mut s = String::from("level,method,scale,resolution,membership_threshold,w_od,w_prox,w_attr,n_regions\n");
    for (k, sc) in schemes.iter().enumerate() {
        let p = &sc.params;
        let w = p.layer_weights;
        let _ = writeln!(
            s,
            "{k},{},{},{},{},{},{},{},{}",
            p.method,
            p.scale.clone().unwrap_or_default(),
            opt(p.resolution),
            opt(p.membership_threshold),
            opt(w.map(|w| w.od)),
            opt(w.map(|w| w.proximity)),
            opt(w.map(|w| w.attribute)),
            sc.n_regions()
        );
    }
    s
}

/// Band label of a region count for edges like `[50, 100, 300]`.
pub fn band_label(n: usize, edges: &[usize]) -> String {
    match edges.iter().position(|&e| n < e) {
        Some(0) => format!("<{}", edges[0]),
        Some(i) => format!("{}-{}", edges[i - 1], edges[i]),
        None => match edges.last() {
            Some(e) => format!(">={e}"),
            None => "all".into(),
        },
    }
}

fn describe(v: &ObjectiveVector) -> String {
    format!(
        "{} regions | f_sem {:.4} f_pop {:.4} f_traffic {:.4} f_od {:.4} f_prox {:.4}",
        v.n_regions, v.f_sem, v.f_pop, v.f_traffic, v.f_od, v.f_prox
    )
}

fn describe_params(s: &PartitionScheme) -> String {
    let p = &s.params;
    let mut out = format!("method {}", p.method);
    if let Some(r) = p.resolution {
        let _ = write!(out, ", resolution {r}");
    }
    if let Some(t) = p.membership_threshold {
        let _ = write!(out, ", threshold {t}");
    }
    if let Some(w) = p.layer_weights {
        let _ = write!(out, ", weights od {} prox {} attr {}", w.od, w.proximity, w.attribute);
    }
    if let Some(sc) = &p.scale {
        let _ = write!(out, ", scale {sc}");
    }
    out
}

fn load(config: &PipelineConfig) -> Result<Study> {
    let study = config.study()?;
    study.validate()?;
    Ok(study)
}

/// Ingest, filter, detect, extend and evaluate once.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunReport> {
    with_pool(config, || {
        let study = load(config)?;
        let prepared = Prepared::new(&study, config.prepare_options()?)?;
        let r = prepared.regionalize(&config.detect_params()?, 0)?;
        r.scheme.validate(&prepared.adjacency)?;
        let v = prepared.evaluate(&r.scheme)?;
        let mut w = Writer::new(&config.out);
        w.put("partition.geojson", &partition_geojson(&study, &r.scheme.assignment, 0))?;
        w.put("partition.csv", &partition_csv(&study, &r.scheme.assignment, 0))?;
        w.put("objectives.csv", &objectives_csv(&[("0".into(), &v, true)]))?;
        let mut s = String::new();
        let _ = writeln!(s, "units: {}", study.units.len());
        let _ = writeln!(
            s,
            "eligible: {}, forced singletons: {}, absorbed: {}",
            prepared.filtered.eligible.len(),
            prepared.filtered.singletons.len(),
            prepared.filtered.absorbed.len()
        );
        let _ = writeln!(s, "sigma: {}", prepared.sigma);
        let _ = writeln!(s, "parameters: {}", describe_params(&r.scheme));
        let _ = writeln!(
            s,
            "communities: {}, kernel nodes: {}, absorbed nodes: {}, fallback nodes: {}",
            r.n_communities, r.kernel_nodes, r.absorbed_nodes, r.fallback_nodes
        );
        let _ = writeln!(s, "scheme: {}", describe(&v));
        for d in r.diagnostics.iter().chain(&v.diagnostics) {
            let _ = writeln!(s, "note: {d}");
        }
        w.finish(s)
    })
}

struct GridPoint {
    resolution: f64,
    threshold: f64,
    weights: (f64, f64, f64),
}

fn grid(config: &PipelineConfig) -> Vec<GridPoint> {
    let one = |x: &Option<Vec<f64>>, d: f64| x.clone().unwrap_or_else(|| vec![d]);
    let res = one(&config.sweep_resolutions, config.resolution);
    let thr = one(&config.sweep_membership_thresholds, config.membership_threshold);
    let wo = one(&config.sweep_w_od, config.w_od);
    let wp = one(&config.sweep_w_prox, config.w_prox);
    let wa = one(&config.sweep_w_attr, config.w_attr);
    let mut out = Vec::new();
    for &a in &wo {
        for &b in &wp {
            for &c in &wa {
                for &t in &thr {
                    for &r in &res {
                        out.push(GridPoint {
                            resolution: r,
                            threshold: t,
                            weights: (a, b, c),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Output of a parameter sweep, kept for callers that want more than files.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// Grid index, scheme and objectives of each successful point.
    pub points: Vec<(usize, PartitionScheme, ObjectiveVector)>,
    pub pareto: Vec<bool>,
    pub failures: Vec<(usize, String)>,
    pub records: Vec<SweepRecord>,
    pub scales: Vec<CharacteristicScale>,
    /// Position in `points` chosen for each scenario.
    pub selections: Vec<(Scenario, usize)>,
}

type PointResult = std::result::Result<(PartitionScheme, ObjectiveVector), String>;

/// Evaluates every grid point of the configuration on a prepared study.
pub fn sweep_points(config: &PipelineConfig, prepared: &Prepared<'_>) -> Result<SweepOutcome> {
    let points = grid(config);
    if points.is_empty() {
        return Err(Error::Config("parameter grid is empty".into()));
    }
    // Detection does not depend on the threshold, so points sharing weights
    // and resolution reuse one ensemble.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, g) in points.iter().enumerate() {
        match groups.iter_mut().find(|grp| {
            let h = &points[grp[0]];
            h.weights == g.weights && h.resolution == g.resolution
        }) {
            Some(grp) => grp.push(i),
            None => groups.push(vec![i]),
        }
    }
    let params_of = |g: &GridPoint| -> Result<DetectParams> {
        Ok(DetectParams {
            layer_weights: LayerWeights::new(g.weights.0, g.weights.1, g.weights.2)?,
            resolution: g.resolution,
            membership_threshold: g.threshold,
            n_runs: config.n_runs,
            seed: config.seed,
        })
    };
    let grouped: Vec<Vec<(usize, PointResult)>> = groups
        .par_iter()
        .map(|grp| {
            let detected = params_of(&points[grp[0]])
                .and_then(|p| prepared.detect(&p))
                .map_err(|e| e.to_string());
            grp.iter()
                .map(|&i| {
                    let (membership, consensus) = match &detected {
                        Ok(d) => d,
                        Err(e) => return (i, Err(e.clone())),
                    };
                    let r = (|| {
                        let params = params_of(&points[i])?;
                        let r = prepared.extend(membership.clone(), consensus.n_communities(), &params, 0)?;
                        r.scheme.validate(&prepared.adjacency)?;
                        let v = prepared.evaluate(&r.scheme)?;
                        Ok((r.scheme, v))
                    })()
                    .map_err(|e: Error| e.to_string());
                    (i, r)
                })
                .collect()
        })
        .collect();
    let mut results: Vec<Option<PointResult>> = (0..points.len()).map(|_| None).collect();
    for (i, r) in grouped.into_iter().flatten() {
        results[i] = Some(r);
    }
    let results = results.into_iter().map(|r| r.expect("every grid point is evaluated"));
    let mut ok = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok((s, v)) => ok.push((i, s, v)),
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    if ok.is_empty() {
        let first = failures.first().map(|f| f.1.clone()).unwrap_or_default();
        return Err(Error::DegenerateInput(format!(
            "all {} grid points failed; first: {first}",
            failures.len()
        )));
    }
    let vectors: Vec<ObjectiveVector> = ok.iter().map(|p| p.2.clone()).collect();
    let pareto = pareto_flags(&vectors, &Axis::ALL)?;
    let front_pos: Vec<usize> = (0..ok.len()).filter(|&i| pareto[i]).collect();
    let front: Vec<ObjectiveVector> = front_pos.iter().map(|&i| vectors[i].clone()).collect();
    let selections = Scenario::ALL
        .iter()
        .map(|&sc| Ok((sc, front_pos[select_scenario_index(&front, sc)?])))
        .collect::<Result<Vec<_>>>()?;
    let graph = prepared.detection_graph(&config.layer_weights()?)?;
    let records = resolution_sweep(&graph, &config.resolution_grid(), config.n_runs, config.seed)?;
    let scales = detect_characteristic_scales(&records, config.stability_tol, config.min_span)?;
    Ok(SweepOutcome {
        points: ok,
        pareto,
        failures,
        records,
        scales,
        selections,
    })
}

/// Parameter sweep with Pareto flags, scenario choice and scale report.
pub fn run_sweep(config: &PipelineConfig) -> Result<RunReport> {
    with_pool(config, || {
        let study = load(config)?;
        let prepared = Prepared::new(&study, config.prepare_options()?)?;
        let o = sweep_points(config, &prepared)?;
        let rows: Vec<(String, &ObjectiveVector, bool)> = o
            .points
            .iter()
            .zip(&o.pareto)
            .map(|((i, _, v), &p)| (i.to_string(), v, p))
            .collect();
        let mut w = Writer::new(&config.out);
        w.put("objectives.csv", &objectives_csv(&rows))?;
        w.put("sweep.csv", &sweep_csv(&o.records))?;
        w.put("scales.csv", &scales_csv(&o.scales))?;
        let chosen = o
            .selections
            .iter()
            .find(|(sc, _)| *sc == config.scenario)
            .map(|s| s.1)
            .expect("every scenario is selected");
        let scheme = &o.points[chosen].1;
        w.put("partition.geojson", &partition_geojson(&study, &scheme.assignment, 0))?;
        w.put("partition.csv", &partition_csv(&study, &scheme.assignment, 0))?;

        let mut s = String::new();
        let _ = writeln!(
            s,
            "grid points: {}, evaluated: {}, failed: {}",
            o.points.len() + o.failures.len(),
            o.points.len(),
            o.failures.len()
        );
        for (i, e) in &o.failures {
            let _ = writeln!(s, "failed point {i}: {e}");
        }
        let _ = writeln!(s, "pareto front: {} scheme(s)", o.pareto.iter().filter(|p| **p).count());
        let _ = writeln!(s, "region-count bands:");
        let mut bands: Vec<(usize, String, usize, usize)> = Vec::new();
        for ((_, _, v), &p) in o.points.iter().zip(&o.pareto) {
            let label = band_label(v.n_regions, &config.bands);
            let rank = config.bands.iter().filter(|&&e| v.n_regions >= e).count();
            match bands.iter_mut().find(|b| b.1 == label) {
                Some(b) => {
                    b.2 += 1;
                    b.3 += usize::from(p);
                }
                None => bands.push((rank, label, 1, usize::from(p))),
            }
        }
        bands.sort();
        for (_, label, n, p) in bands {
            let _ = writeln!(s, "  {label}: {n} scheme(s), {p} on the front");
        }
        let _ = writeln!(s, "scenario selections:");
        for (sc, i) in &o.selections {
            let (id, scheme, v) = &o.points[*i];
            let mark = if *sc == config.scenario { " (written)" } else { "" };
            let _ = writeln!(
                s,
                "  {}{mark}: scheme {id}, {}; {}",
                sc.name(),
                describe(v),
                describe_params(scheme)
            );
        }
        let _ = writeln!(s, "characteristic scales: {}", o.scales.len());
        for c in &o.scales {
            let _ = writeln!(
                s,
                "  {}: resolution {}..{}, {} communities",
                c.label, c.resolution_range.0, c.resolution_range.1, c.stable_count
            );
        }
        w.finish(s)
    })
}

/// Nested schemes by aggregation (1), block hierarchy (2) or per scale (3).
pub fn run_multilevel(config: &PipelineConfig, method: u8) -> Result<RunReport> {
    with_pool(config, || {
        let study = load(config)?;
        let options = config.prepare_options()?;
        let prepared = Prepared::new(&study, options.clone())?;
        let params = config.detect_params()?;
        let mut notes = Vec::new();
        let mut w = Writer::new(&config.out);
        let schemes: Vec<PartitionScheme> = match method {
            1 => {
                let mut levels = vec![prepared.regionalize(&params, 0)?.scheme];
                for k in 1..=config.multilevel_levels {
                    let res = match &config.multilevel_resolutions {
                        Some(r) => *r.get(k - 1).ok_or_else(|| {
                            Error::Config(format!("`multilevel_resolutions` has no entry for level {k}"))
                        })?,
                        None => config.resolution * 0.5f64.powi(k as i32),
                    };
                    let p = DetectParams {
                        resolution: res,
                        ..params
                    };
                    let step = multilevel_method1(&study, levels.last().unwrap(), &options, &p)?;
                    notes.extend(step.diagnostics);
                    if let Some(n) = step.notice {
                        notes.push(n);
                        break;
                    }
                    levels.push(step.scheme);
                }
                levels
            }
            2 => {
                if study.units.iter().all(|u| u.block_id.is_empty()) {
                    return Err(Error::Config(
                        "method 2 needs a block hierarchy (block_id on units)".into(),
                    ));
                }
                multilevel_method2(&study)?
            }
            3 => {
                let graph = prepared.detection_graph(&params.layer_weights)?;
                let records = resolution_sweep(&graph, &config.resolution_grid(), config.n_runs, config.seed)?;
                let scales = detect_characteristic_scales(&records, config.stability_tol, config.min_span)?;
                w.put("sweep.csv", &sweep_csv(&records))?;
                w.put("scales.csv", &scales_csv(&scales))?;
                multilevel_method3(&prepared, &scales, &params)?
            }
            m => return Err(Error::Config(format!("multilevel method must be 1, 2 or 3, got {m}"))),
        };
        for s in &schemes {
            s.validate(&prepared.adjacency)?;
        }
        if method != 3 {
            check_nesting(&schemes.iter().map(|s| s.assignment.clone()).collect::<Vec<_>>())?;
        }
        let mut rows = Vec::new();
        for (k, sc) in schemes.iter().enumerate() {
            w.put(
                &format!("partition_l{k}.geojson"),
                &partition_geojson(&study, &sc.assignment, k as u32),
            )?;
            w.put(
                &format!("partition_l{k}.csv"),
                &partition_csv(&study, &sc.assignment, k as u32),
            )?;
            match prepared.evaluate(sc) {
                Ok(v) => rows.push((k, v)),
                Err(e) => notes.push(format!("level {k} not evaluated: {e}")),
            }
        }
        let vectors: Vec<ObjectiveVector> = rows.iter().map(|r| r.1.clone()).collect();
        let flags = if vectors.is_empty() {
            Vec::new()
        } else {
            pareto_flags(&vectors, &Axis::ALL)?
        };
        let table: Vec<(String, &ObjectiveVector, bool)> = rows
            .iter()
            .zip(&flags)
            .map(|((k, v), &p)| (k.to_string(), v, p))
            .collect();
        w.put("objectives.csv", &objectives_csv(&table))?;
        w.put("nesting.csv", &nesting_csv(&study, &schemes))?;
        w.put("nesting_params.csv", &nesting_params_csv(&schemes))?;
        let mut s = String::new();
        let _ = writeln!(s, "method {method}: {} level(s)", schemes.len());
        let _ = writeln!(
            s,
            "nesting: {}",
            if method == 3 {
                "not required"
            } else {
                "strict (checked)"
            }
        );
        for (k, sc) in schemes.iter().enumerate() {
            let _ = writeln!(s, "  level {k}: {} regions; {}", sc.n_regions(), describe_params(sc));
        }
        for n in notes {
            let _ = writeln!(s, "note: {n}");
        }
        w.finish(s)
    })
}

/// Writes a synthetic city as units GeoJSON and OD CSV.
pub fn run_synth(config: &PipelineConfig) -> Result<RunReport> {
    let city = config.city_config();
    let study = generate_city(&city)?;
    study.validate()?;
    let mut w = Writer::new(&config.out);
    w.put("units.geojson", &units_geojson(&study))?;
    w.put("od.csv", &od_csv(&study.od))?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "synthetic city: {} units in {} blocks, seed {}",
        study.units.len(),
        study.blocks.len(),
        city.seed
    );
    for f in &study.fields {
        let _ = writeln!(s, "  {}: total {}", f.name, f.total());
    }
    let _ = writeln!(s, "  od pairs: {}, total flow {}", study.od.len(), study.od.total());
    w.finish(s)
}

/// Validates inputs and re-checks any partition or nesting files in the
/// output directory.
pub fn run_validate(config: &PipelineConfig) -> Result<RunReport> {
    let study = load(config)?;
    let prepared = Prepared::new(&study, config.prepare_options()?)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "inputs ok: {} units, {} blocks, {} adjacent pairs, {} eligible",
        study.units.len(),
        study.blocks.len(),
        prepared.adjacency.len(),
        prepared.filtered.eligible.len()
    );
    for warn in &prepared.filtered.warnings {
        let _ = writeln!(s, "warning: {}", warn.message);
    }
    let read = |name: &str| -> Result<Option<String>> {
        let p = config.out.join(name);
        if !p.exists() {
            return Ok(None);
        }
        std::fs::read_to_string(&p)
            .map(Some)
            .map_err(|source| Error::Io { path: p, source })
    };
    if let Some(text) = read("partition.csv")? {
        let a = parse_partition_csv(&text, &study).map_err(|e| e.with_context("partition.csv"))?;
        let scheme = PartitionScheme::new(&a, crate::kernel::SchemeParams::named("file", 0));
        scheme
            .validate(&prepared.adjacency)
            .map_err(|e| e.with_context("partition.csv"))?;
        let _ = writeln!(
            s,
            "partition.csv ok: {} regions, contiguous, full coverage",
            scheme.n_regions()
        );
    }
    if let Some(text) = read("nesting.csv")? {
        let levels = parse_nesting_csv(&text, &study)?;
        let scale_based = read("nesting_params.csv")?
            .is_some_and(|p| p.lines().skip(1).any(|l| l.split(',').nth(1) == Some("scale")));
        for (k, l) in levels.iter().enumerate() {
            crate::kernel::check_scheme(&crate::kernel::canonical(l), &prepared.adjacency)
                .map_err(|e| e.with_context(format!("nesting.csv level {k}")))?;
        }
        if !scale_based {
            check_nesting(&levels)?;
        }
        let _ = writeln!(
            s,
            "nesting.csv ok: {} level(s){}",
            levels.len(),
            if scale_based {
                ", per-scale (nesting not required)"
            } else {
                ", strictly nested"
            }
        );
    }
    Ok(RunReport {
        out_dir: config.out.clone(),
        files: Vec::new(),
        summary: s,
    })
}

/// Reads a nesting manifest into one assignment per level.
pub fn parse_nesting_csv(text: &str, study: &Study) -> Result<Vec<Vec<usize>>> {
    let path = Path::new("nesting.csv");
    let bad = |reason: String| Error::Ingest {
        path: path.to_owned(),
        reason,
    };
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let n_levels = rdr.headers().map_err(|e| bad(e.to_string()))?.len().saturating_sub(1);
    let mut levels = vec![vec![usize::MAX; study.units.len()]; n_levels];
    for row in rdr.records() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let id = row.get(0).unwrap_or_default();
        let i = study.index_of(id).ok_or_else(|| bad(format!("unknown unit `{id}`")))?;
        for (k, level) in levels.iter_mut().enumerate() {
            level[i] = row
                .get(k + 1)
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| bad(format!("bad region for `{id}` at level {k}")))?;
        }
    }
    if levels.iter().any(|l| l.contains(&usize::MAX)) {
        return Err(bad("manifest does not cover every unit".into()));
    }
    Ok(levels)
}
