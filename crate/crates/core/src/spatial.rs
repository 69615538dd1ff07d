//! Spatial data model: basic spatial units, attribute and semantic fields,
//! pairwise interactions, geometric adjacency and the unit size constraint.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::geometry::{boundary_distance, Shape};

/// Relative tolerance between a cached area and its shoelace recomputation.
pub const AREA_RTOL: f64 = 1e-9;

/// Atomic regionalization unit (or, at `level > 0`, a block polygon).
#[derive(Debug, Clone, PartialEq)]
pub struct BasicSpatialUnit {
    pub id: String,
    pub shape: Shape,
    pub area: f64,
    pub block_id: String,
    pub level: u32,
}

impl BasicSpatialUnit {
    /// Builds a unit and caches its shoelace area.
    pub fn new(id: impl Into<String>, shape: Shape, block_id: impl Into<String>, level: u32) -> Self {
        let area = shape.area();
        BasicSpatialUnit {
            id: id.into(),
            shape,
            area,
            block_id: block_id.into(),
            level,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.shape.validate().map_err(|e| Error::geometry(&self.id, e))?;
        let recomputed = self.shape.area();
        if (recomputed - self.area).abs() > AREA_RTOL * recomputed.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::geometry(
                &self.id,
                format!("cached area {} differs from polygon area {}", self.area, recomputed),
            ));
        }
        Ok(())
    }
}

/// A non-negative quantity per unit, aligned with the owning unit list.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeField {
    pub name: String,
    pub values: Vec<f64>,
}

impl AttributeField {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let field = AttributeField {
            name: name.into(),
            values,
        };
        field.check()?;
        Ok(field)
    }

    /// Aligns an id-keyed mapping to `units`; any missing id is an error.
    pub fn from_map(name: impl Into<String>, map: &HashMap<String, f64>, units: &[BasicSpatialUnit]) -> Result<Self> {
        let name = name.into();
        let mut missing = Vec::new();
        let values = units
            .iter()
            .map(|u| match map.get(&u.id) {
                Some(v) => *v,
                None => {
                    missing.push(u.id.clone());
                    0.0
                }
            })
            .collect();
        if !missing.is_empty() {
            return Err(Error::Consistency(format!(
                "field `{name}` has no value for units {}",
                missing.join(", ")
            )));
        }
        AttributeField::new(name, values)
    }

    fn check(&self) -> Result<()> {
        if let Some((i, v)) = self
            .values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::Consistency(format!(
                "field `{}` has invalid value {v} at position {i}",
                self.name
            )));
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// One categorical label per unit out of `categories`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticField {
    pub categories: Vec<String>,
    pub assignment: Vec<usize>,
}

impl SemanticField {
    pub fn new(categories: Vec<String>, assignment: Vec<usize>) -> Result<Self> {
        if categories.is_empty() {
            return Err(Error::Consistency("semantic field needs at least one category".into()));
        }
        if let Some(bad) = assignment.iter().find(|&&c| c >= categories.len()) {
            return Err(Error::Consistency(format!(
                "semantic index {bad} outside [0, {})",
                categories.len()
            )));
        }
        Ok(SemanticField { categories, assignment })
    }

    pub fn n_categories(&self) -> usize {
        self.categories.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InteractionKind {
    Od,
    Proximity,
}

/// Sparse symmetric weights keyed by unordered unit-id pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    pub kind: InteractionKind,
    entries: BTreeMap<(String, String), f64>,
}

impl InteractionMatrix {
    pub fn new(kind: InteractionKind) -> Self {
        InteractionMatrix {
            kind,
            entries: BTreeMap::new(),
        }
    }

    fn key(a: &str, b: &str) -> (String, String) {
        if a <= b {
            (a.to_owned(), b.to_owned())
        } else {
            (b.to_owned(), a.to_owned())
        }
    }

    /// Adds `w` to the pair's weight; both directions accumulate into one entry.
    pub fn add(&mut self, a: &str, b: &str, w: f64) -> Result<()> {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Consistency(format!(
                "interaction weight {w} for ({a}, {b}) is invalid"
            )));
        }
        if a == b {
            return Err(Error::Consistency(format!(
                "self-pair ({a}, {a}) in interaction matrix"
            )));
        }
        *self.entries.entry(Self::key(a, b)).or_insert(0.0) += w;
        Ok(())
    }

    pub fn get(&self, a: &str, b: &str) -> f64 {
        self.entries.get(&Self::key(a, b)).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.entries.iter().map(|((a, b), w)| (a.as_str(), b.as_str(), *w))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeBounds {
    pub a_min: f64,
    pub a_max: f64,
}

impl SizeBounds {
    pub fn new(a_min: f64, a_max: f64) -> Result<Self> {
        if !(a_min > 0.0 && a_min < a_max && a_max.is_finite()) {
            return Err(Error::Config(format!(
                "size bounds need 0 < a_min < a_max, got [{a_min}, {a_max}]"
            )));
        }
        Ok(SizeBounds { a_min, a_max })
    }
}

/// Unordered unit pairs within the gap threshold, with their spacing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Adjacency {
    n: usize,
    pairs: BTreeMap<(usize, usize), f64>,
    neighbors: Vec<Vec<usize>>,
}

impl Adjacency {
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut map = BTreeMap::new();
        for (a, b, d) in pairs {
            if a == b {
                continue;
            }
            let k = (a.min(b), a.max(b));
            let e = map.entry(k).or_insert(d);
            if d < *e {
                *e = d;
            }
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in map.keys() {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }
        Adjacency {
            n,
            pairs: map,
            neighbors,
        }
    }

    pub fn n_units(&self) -> usize {
        self.n
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.pairs.contains_key(&(a.min(b), a.max(b)))
    }

    pub fn spacing(&self, a: usize, b: usize) -> Option<f64> {
        self.pairs.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn neighbors(&self, a: usize) -> &[usize] {
        &self.neighbors[a]
    }

    /// Pairs `(a, b, spacing)` with `a < b`, in ascending order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.pairs.iter().map(|(&(a, b), &d)| (a, b, d))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Median spacing over adjacent pairs, if any pair is strictly apart.
    pub fn median_spacing(&self) -> Option<f64> {
        let mut d: Vec<f64> = self.pairs.values().copied().collect();
        if d.is_empty() {
            return None;
        }
        d.sort_by(f64::total_cmp);
        let m = if d.len() % 2 == 1 {
            d[d.len() / 2]
        } else {
            0.5 * (d[d.len() / 2 - 1] + d[d.len() / 2])
        };
        (m > 0.0).then_some(m)
    }
}

/// Minimum boundary-to-boundary distance between two units.
///
/// Units must tile: shared interior area is rejected.
pub fn compute_spacing(a: &BasicSpatialUnit, b: &BasicSpatialUnit) -> Result<f64> {
    let d = boundary_distance(&a.shape, &b.shape);
    if d == 0.0 && a.shape.interiors_overlap(&b.shape) {
        return Err(Error::geometry(&a.id, format!("interior overlaps unit `{}`", b.id)));
    }
    if d > 0.0 {
        // Disjoint boundaries can still mean one unit sits inside the other.
        let pa = a.shape.vertices().next();
        let pb = b.shape.vertices().next();
        let nested = pa.is_some_and(|p| b.shape.locate(p, 0.0) == crate::geometry::Location::Inside)
            || pb.is_some_and(|p| a.shape.locate(p, 0.0) == crate::geometry::Location::Inside);
        if nested {
            return Err(Error::geometry(&a.id, format!("lies inside or around unit `{}`", b.id)));
        }
    }
    Ok(d)
}

/// All unit pairs whose spacing is at most `gap_threshold`.
///
/// Candidate pairs come from an x-sorted sweep over bounding boxes padded by
/// the threshold, which is exact (no pair within the threshold is skipped).
pub fn compute_adjacency(units: &[BasicSpatialUnit], gap_threshold: f64) -> Result<Adjacency> {
    if !(gap_threshold > 0.0) {
        return Err(Error::Config(format!(
            "gap threshold must be positive, got {gap_threshold}"
        )));
    }
    for u in units {
        u.validate()?;
    }
    let boxes: Vec<_> = units.iter().map(|u| u.shape.bbox()).collect();
    let mut order: Vec<usize> = (0..units.len()).collect();
    order.sort_by(|&i, &j| boxes[i].min.x.total_cmp(&boxes[j].min.x).then(i.cmp(&j)));
    let mut pairs = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if boxes[j].min.x > boxes[i].max.x + gap_threshold {
                break;
            }
            if boxes[i].distance(&boxes[j]) > gap_threshold {
                continue;
            }
            let d = compute_spacing(&units[i], &units[j])?;
            if d <= gap_threshold {
                pairs.push((i, j, d));
            }
        }
    }
    Ok(Adjacency::from_pairs(units.len(), pairs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndersizedPolicy {
    /// Merge undersized units into their nearest adjacent eligible unit.
    #[default]
    Absorb,
    /// Keep undersized units as forced singleton regions.
    Singleton,
}

/// An eligible unit after size filtering, possibly carrying absorbed members.
#[derive(Debug, Clone, PartialEq)]
pub struct EligibleUnit {
    /// Index of the host unit.
    pub host: usize,
    /// Host first, then absorbed units in ascending index order.
    pub members: Vec<usize>,
    pub area: f64,
    /// Summed attribute values, aligned with the input fields.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeWarning {
    pub unit: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeFiltered {
    pub eligible: Vec<EligibleUnit>,
    /// Units that form their own region outside detection.
    pub singletons: Vec<usize>,
    /// `(absorbed unit, position in eligible)`.
    pub absorbed: Vec<(usize, usize)>,
    pub warnings: Vec<SizeWarning>,
}

impl SizeFiltered {
    /// Every unit is eligible on its own.
    pub fn identity(units: &[BasicSpatialUnit], fields: &[AttributeField]) -> Self {
        let eligible = (0..units.len())
            .map(|i| EligibleUnit {
                host: i,
                members: vec![i],
                area: units[i].area,
                values: fields.iter().map(|f| f.values[i]).collect(),
            })
            .collect();
        SizeFiltered {
            eligible,
            singletons: Vec::new(),
            absorbed: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

/// Applies the area constraint: oversized units become forced singletons,
/// undersized ones are absorbed (or kept as singletons, per `policy`).
pub fn apply_size_constraint(
    units: &[BasicSpatialUnit],
    fields: &[AttributeField],
    adjacency: &Adjacency,
    bounds: SizeBounds,
    policy: UndersizedPolicy,
) -> Result<SizeFiltered> {
    for f in fields {
        if f.values.len() != units.len() {
            return Err(Error::Consistency(format!(
                "field `{}` has {} values for {} units",
                f.name,
                f.values.len(),
                units.len()
            )));
        }
    }
    if adjacency.n_units() != units.len() {
        return Err(Error::Consistency(
            "adjacency was computed for a different unit set".into(),
        ));
    }
    let in_bounds = |i: usize| units[i].area >= bounds.a_min && units[i].area <= bounds.a_max;
    let mut out = SizeFiltered {
        eligible: Vec::new(),
        singletons: Vec::new(),
        absorbed: Vec::new(),
        warnings: Vec::new(),
    };
    let mut slot = vec![usize::MAX; units.len()];
    for i in 0..units.len() {
        if in_bounds(i) {
            slot[i] = out.eligible.len();
            out.eligible.push(EligibleUnit {
                host: i,
                members: vec![i],
                area: units[i].area,
                values: fields.iter().map(|f| f.values[i]).collect(),
            });
        }
    }
    for i in 0..units.len() {
        if in_bounds(i) {
            continue;
        }
        if units[i].area > bounds.a_max {
            out.singletons.push(i);
            continue;
        }
        if policy == UndersizedPolicy::Singleton {
            out.singletons.push(i);
            continue;
        }
        // Nearest adjacent eligible unit, ties to the smaller index.
        let host = adjacency
            .neighbors(i)
            .iter()
            .filter(|&&j| in_bounds(j))
            .map(|&j| (adjacency.spacing(i, j).unwrap_or(f64::INFINITY), j))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        match host {
            Some((_, j)) => {
                let e = &mut out.eligible[slot[j]];
                e.members.push(i);
                e.area += units[i].area;
                for (v, f) in e.values.iter_mut().zip(fields) {
                    *v += f.values[i];
                }
                out.absorbed.push((i, slot[j]));
            }
            None => {
                out.singletons.push(i);
                out.warnings.push(SizeWarning {
                    unit: i,
                    message: format!(
                        "unit `{}` (area {}) is below a_min and has no adjacent eligible unit",
                        units[i].id, units[i].area
                    ),
                });
            }
        }
    }
    for e in &mut out.eligible {
        e.members[1..].sort_unstable();
    }
    Ok(out)
}

/// Region ids adjacent through at least one adjacent unit pair.
pub fn region_adjacency(assignment: &[usize], adjacency: &Adjacency) -> Result<BTreeSet<(usize, usize)>> {
    if assignment.len() != adjacency.n_units() {
        return Err(Error::Consistency(format!(
            "scheme covers {} units but adjacency covers {}",
            assignment.len(),
            adjacency.n_units()
        )));
    }
    let mut out = BTreeSet::new();
    for (a, b, _) in adjacency.pairs() {
        let (ra, rb) = (assignment[a], assignment[b]);
        if ra != rb {
            out.insert((ra.min(rb), ra.max(rb)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(id: &str, x: f64, y: f64, side: f64) -> BasicSpatialUnit {
        BasicSpatialUnit::new(id, Shape::rect(x, y, x + side, y + side), "b", 0)
    }

    #[test]
    fn touching_squares_are_adjacent() {
        let u = vec![square("a", 0.0, 0.0, 1.0), square("b", 1.0, 0.0, 1.0)];
        let adj = compute_adjacency(&u, 5.0).unwrap();
        assert!(adj.contains(0, 1));
        assert_eq!(adj.spacing(0, 1), Some(0.0));
    }

    #[test]
    fn corridor_blocks_adjacency() {
        let u = vec![square("a", 0.0, 0.0, 1.0), square("b", 11.0, 0.0, 1.0)];
        let adj = compute_adjacency(&u, 5.0).unwrap();
        assert!(adj.is_empty());
    }

    #[test]
    fn axis_gap_spacing() {
        let a = square("a", 0.0, 0.0, 1.0);
        let b = square("b", 2.0, 0.0, 1.0);
        assert_eq!(compute_spacing(&a, &b).unwrap(), 1.0);
        assert_eq!(compute_spacing(&b, &a).unwrap(), 1.0);
    }

    #[test]
    fn overlapping_units_error() {
        let a = square("a", 0.0, 0.0, 2.0);
        let b = square("b", 1.0, 1.0, 2.0);
        assert!(matches!(compute_spacing(&a, &b), Err(Error::Geometry { .. })));
        let inner = square("c", 0.5, 0.5, 0.5);
        assert!(compute_spacing(&a, &inner).is_err());
    }

    #[test]
    fn invalid_polygon_names_unit() {
        let mut bad = square("broken", 0.0, 0.0, 1.0);
        bad.area = 7.0;
        let err = compute_adjacency(&[bad], 1.0).unwrap_err();
        assert!(err.to_string().contains("broken"));
    }

    #[test]
    fn zero_threshold_rejected() {
        assert!(compute_adjacency(&[], 0.0).is_err());
    }

    #[test]
    fn size_filter_thresholds() {
        let u: Vec<_> = [5.0f64, 7.0, 20.0]
            .iter()
            .enumerate()
            .map(|(i, a)| square(&format!("u{i}"), 100.0 * i as f64, 0.0, a.sqrt()))
            .collect();
        let adj = compute_adjacency(&u, 1.0).unwrap();
        let f = SizeFilter::run(&u, &adj, 1.0, 10.0);
        assert_eq!(f.eligible.iter().map(|e| e.host).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(f.singletons, vec![2]);
    }

    #[test]
    fn undersized_is_absorbed() {
        let u = vec![
            square("s", 0.0, 0.0, 0.5f64.sqrt()),
            square("l", 0.5f64.sqrt(), 0.0, 5f64.sqrt()),
        ];
        let adj = compute_adjacency(&u, 1.0).unwrap();
        let f = SizeFilter::run(&u, &adj, 1.0, 10.0);
        assert_eq!(f.eligible.len(), 1);
        assert!((f.eligible[0].area - 5.5).abs() < 1e-12);
        assert_eq!(f.absorbed, vec![(0, 0)]);
    }

    #[test]
    fn in_bounds_is_identity() {
        let u = vec![square("a", 0.0, 0.0, 2.0), square("b", 2.0, 0.0, 2.0)];
        let adj = compute_adjacency(&u, 1.0).unwrap();
        let f = SizeFilter::run(&u, &adj, 1.0, 10.0);
        assert_eq!(f, SizeFiltered::identity(&u, &[]));
    }

    #[test]
    fn isolated_undersized_becomes_singleton_with_warning() {
        let u = vec![square("tiny", 0.0, 0.0, 0.5), square("far", 50.0, 0.0, 2.0)];
        let adj = compute_adjacency(&u, 1.0).unwrap();
        let f = SizeFilter::run(&u, &adj, 1.0, 10.0);
        assert_eq!(f.singletons, vec![0]);
        assert_eq!(f.warnings.len(), 1);
    }

    #[test]
    fn singleton_policy_keeps_undersized() {
        let u = vec![square("s", 0.0, 0.0, 0.5), square("l", 0.5, 0.0, 2.0)];
        let adj = compute_adjacency(&u, 1.0).unwrap();
        let b = SizeBounds::new(1.0, 10.0).unwrap();
        let f = apply_size_constraint(&u, &[], &adj, b, UndersizedPolicy::Singleton).unwrap();
        assert_eq!(f.singletons, vec![0]);
        assert!(f.absorbed.is_empty());
    }

    #[test]
    fn region_adjacency_cases() {
        let adj = Adjacency::from_pairs(2, [(0, 1, 0.0)]);
        assert_eq!(region_adjacency(&[0, 1], &adj).unwrap().len(), 1);
        assert!(region_adjacency(&[0, 0], &adj).unwrap().is_empty());
        let path = Adjacency::from_pairs(3, [(0, 1, 0.0), (1, 2, 0.0)]);
        assert_eq!(region_adjacency(&[0, 1, 2], &path).unwrap().len(), 2);
        assert!(region_adjacency(&[0, 1], &path).is_err());
    }

    #[test]
    fn bad_bounds_rejected() {
        assert!(SizeBounds::new(0.0, 1.0).is_err());
        assert!(SizeBounds::new(2.0, 1.0).is_err());
    }

    #[test]
    fn missing_field_value_is_error() {
        let u = vec![square("a", 0.0, 0.0, 1.0)];
        let map = HashMap::new();
        assert!(AttributeField::from_map("population", &map, &u).is_err());
        assert!(AttributeField::new("x", vec![-1.0]).is_err());
    }

    struct SizeFilter;
    impl SizeFilter {
        fn run(u: &[BasicSpatialUnit], adj: &Adjacency, lo: f64, hi: f64) -> SizeFiltered {
            let b = SizeBounds::new(lo, hi).unwrap();
            apply_size_constraint(u, &[], adj, b, UndersizedPolicy::Absorb).unwrap()
        }
    }
}
