//! Nested partitions: aggregate-and-repeat, block hierarchy, and
//! independent per-scale schemes.

use std::collections::{BTreeMap, HashMap};

use crate::community::CharacteristicScale;
use crate::error::{Error, Result};
use crate::geometry::Shape;
use crate::kernel::{PartitionScheme, SchemeParams};
use crate::regionalize::{DetectParams, PrepareOptions, Prepared};
use crate::spatial::{AttributeField, BasicSpatialUnit, InteractionKind, InteractionMatrix, SemanticField};
use crate::study::Study;

/// Collapses each region of `scheme` into one unit of a new study.
///
/// Fields and OD are summed, the semantic label is the category with the
/// largest area (ties to the smaller index) and the new unit's block is the
/// parent of the smallest block holding all its members, if any. Block
/// polygons are not carried over. Unit ids are `r<k>`.
pub fn aggregate_study(study: &Study, scheme: &PartitionScheme) -> Result<Study> {
    if scheme.n_units() != study.units.len() {
        return Err(Error::Consistency(format!(
            "scheme covers {} units, study has {}",
            scheme.n_units(),
            study.units.len()
        )));
    }
    let regions = scheme.regions();
    let width = regions.len().to_string().len();
    let ids: Vec<String> = (0..regions.len()).map(|r| format!("r{r:0width$}")).collect();
    let parent: HashMap<&str, &str> = study
        .blocks
        .iter()
        .map(|b| (b.id.as_str(), b.block_id.as_str()))
        .collect();
    let t = study.semantics.n_categories();
    let mut units = Vec::with_capacity(regions.len());
    let mut labels = Vec::with_capacity(regions.len());
    for (r, members) in regions.iter().enumerate() {
        let polygons = members
            .iter()
            .flat_map(|&m| study.units[m].shape.polygons.iter().cloned())
            .collect();
        let chain = |m: usize| {
            let mut c = Vec::new();
            let mut cur = study.units[m].block_id.as_str();
            while !cur.is_empty() && !c.contains(&cur) {
                c.push(cur);
                cur = parent.get(cur).copied().unwrap_or("");
            }
            c
        };
        let chains: Vec<Vec<&str>> = members.iter().map(|&m| chain(m)).collect();
        let common = chains[0].iter().find(|b| chains.iter().all(|c| c.contains(b)));
        let up = common.and_then(|b| parent.get(b).copied()).unwrap_or("");
        units.push(BasicSpatialUnit::new(ids[r].clone(), Shape::new(polygons), up, 0));
        let mut cat_area = vec![0.0; t];
        for &m in members {
            cat_area[study.semantics.assignment[m]] += study.units[m].area;
        }
        let label = (0..t).fold(0, |b, c| if cat_area[c] > cat_area[b] { c } else { b });
        labels.push(label);
    }
    let fields = study
        .fields
        .iter()
        .map(|f| {
            let mut v = vec![0.0; regions.len()];
            for (&r, x) in scheme.assignment.iter().zip(&f.values) {
                v[r] += x;
            }
            AttributeField::new(f.name.clone(), v)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut od = InteractionMatrix::new(InteractionKind::Od);
    for (a, b, w) in study.od.iter() {
        let (ra, rb) = (
            scheme.assignment[study.index_of(a).expect("study OD ids are known")],
            scheme.assignment[study.index_of(b).expect("study OD ids are known")],
        );
        if ra != rb {
            od.add(&ids[ra], &ids[rb], w)?;
        }
    }
    let semantics = SemanticField::new(study.semantics.categories.clone(), labels)?;
    Study::new(units, Vec::new(), fields, semantics, od)
}

/// Outcome of one aggregate-and-repeat step.
#[derive(Debug, Clone)]
pub struct Method1Step {
    /// Scheme at the next level over the original units.
    pub scheme: PartitionScheme,
    /// Set when the input had too few regions to aggregate.
    pub notice: Option<String>,
    pub diagnostics: Vec<String>,
}

/// Aggregates the regions of `scheme` into units and regionalizes again.
/// Size bounds do not apply to aggregated units.
pub fn multilevel_method1(
    study: &Study,
    scheme: &PartitionScheme,
    options: &PrepareOptions,
    params: &DetectParams,
) -> Result<Method1Step> {
    if scheme.n_regions() < 3 {
        return Ok(Method1Step {
            scheme: scheme.clone(),
            notice: Some(format!(
                "level {} has {} region(s); nothing to aggregate",
                scheme.level,
                scheme.n_regions()
            )),
            diagnostics: Vec::new(),
        });
    }
    let coarse = aggregate_study(study, scheme)?;
    let opts = PrepareOptions {
        size_bounds: None,
        ..options.clone()
    };
    let prepared = Prepared::new(&coarse, opts)?;
    let level = scheme.level + 1;
    let r = prepared.regionalize(params, level)?;
    let composed: Vec<usize> = scheme.assignment.iter().map(|&reg| r.scheme.assignment[reg]).collect();
    let mut p = r.scheme.params.clone();
    p.method = "aggregate".into();
    Ok(Method1Step {
        scheme: PartitionScheme::new(&composed, p),
        notice: None,
        diagnostics: r.diagnostics,
    })
}

/// One scheme per hierarchy level: singletons, then each block level.
pub fn multilevel_method2(study: &Study) -> Result<Vec<PartitionScheme>> {
    if study.units.iter().all(|u| u.block_id.is_empty()) {
        return Ok(vec![PartitionScheme::new(
            &(0..study.units.len()).collect::<Vec<_>>(),
            SchemeParams::named("hierarchy", 0),
        )]);
    }
    let levels = study.hierarchy()?;
    let mut out = Vec::with_capacity(levels.len());
    for (k, ids) in levels.iter().enumerate() {
        let mut dense: BTreeMap<&str, usize> = BTreeMap::new();
        let labels: Vec<usize> = ids
            .iter()
            .map(|id| {
                let n = dense.len();
                *dense.entry(id.as_str()).or_insert(n)
            })
            .collect();
        out.push(PartitionScheme::new(
            &labels,
            SchemeParams::named("hierarchy", k as u32),
        ));
    }
    check_nesting(&out.iter().map(|s| s.assignment.clone()).collect::<Vec<_>>())?;
    Ok(out)
}

/// Independent schemes at the midpoint resolution of each scale.
pub fn multilevel_method3(
    prepared: &Prepared<'_>,
    scales: &[CharacteristicScale],
    params: &DetectParams,
) -> Result<Vec<PartitionScheme>> {
    if scales.is_empty() {
        return Err(Error::InsufficientData(
            "no characteristic scales to regionalize".into(),
        ));
    }
    scales
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let p = DetectParams {
                resolution: s.midpoint(),
                ..*params
            };
            let mut scheme = prepared.regionalize(&p, k as u32)?.scheme;
            scheme.params.scale = Some(s.label.to_string());
            scheme.params.method = "scale".into();
            Ok(scheme)
        })
        .collect()
}

/// Strict nesting: each level's region of a unit is a function of its
/// region at the level below.
pub fn check_nesting(levels: &[Vec<usize>]) -> Result<()> {
    for (k, pair) in levels.windows(2).enumerate() {
        if pair[0].len() != pair[1].len() {
            return Err(Error::Consistency(format!(
                "levels {k} and {} differ in unit count",
                k + 1
            )));
        }
        let mut up: HashMap<usize, usize> = HashMap::new();
        for (u, (&lo, &hi)) in pair[0].iter().zip(&pair[1]).enumerate() {
            if *up.entry(lo).or_insert(hi) != hi {
                return Err(Error::Consistency(format!(
                    "unit {u}: level-{k} region {lo} maps to two level-{} regions",
                    k + 1
                )));
            }
        }
    }
    Ok(())
}
