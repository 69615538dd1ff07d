//! GeoJSON unit ingestion/export and the CSV formats used by the pipeline.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon, Ring, Shape};
use crate::spatial::{AttributeField, BasicSpatialUnit, InteractionKind, InteractionMatrix, SemanticField};
use crate::study::Study;

const RESERVED: &[&str] = &["id", "block_id", "level", "semantic", "region_id"];

fn ingest_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Ingest {
        path: path.to_owned(),
        reason: reason.into(),
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_owned(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn parse_ring(v: &Value) -> Option<Ring> {
    let pts = v
        .as_array()?
        .iter()
        .map(|c| {
            let c = c.as_array()?;
            Some(Point::new(c.first()?.as_f64()?, c.get(1)?.as_f64()?))
        })
        .collect::<Option<Vec<_>>>()?;
    Some(Ring::new(pts))
}

fn parse_polygon(v: &Value) -> Option<Polygon> {
    let rings = v.as_array()?.iter().map(parse_ring).collect::<Option<Vec<_>>>()?;
    let mut it = rings.into_iter();
    let exterior = it.next()?;
    Some(Polygon::new(exterior, it.collect()))
}

fn parse_geometry(g: &Value) -> std::result::Result<Shape, String> {
    let kind = g.get("type").and_then(Value::as_str).ok_or("geometry has no type")?;
    let coords = g.get("coordinates").ok_or("geometry has no coordinates")?;
    let polygons = match kind {
        "Polygon" => vec![parse_polygon(coords).ok_or("malformed Polygon coordinates")?],
        "MultiPolygon" => coords
            .as_array()
            .ok_or("malformed MultiPolygon coordinates")?
            .iter()
            .map(parse_polygon)
            .collect::<Option<Vec<_>>>()
            .ok_or("malformed MultiPolygon coordinates")?,
        other => return Err(format!("unsupported geometry type `{other}`")),
    };
    Ok(Shape::new(polygons))
}

fn ring_coords(r: &Ring) -> Value {
    let mut pts: Vec<Value> = r.0.iter().map(|p| json!([p.x, p.y])).collect();
    if let Some(first) = r.0.first() {
        pts.push(json!([first.x, first.y]));
    }
    Value::Array(pts)
}

fn geometry_json(s: &Shape) -> Value {
    let poly = |p: &Polygon| Value::Array(p.rings().map(ring_coords).collect());
    if s.polygons.len() == 1 {
        json!({"type": "Polygon", "coordinates": poly(&s.polygons[0])})
    } else {
        json!({"type": "MultiPolygon", "coordinates": s.polygons.iter().map(poly).collect::<Vec<_>>()})
    }
}

/// Parsed contents of a units GeoJSON document.
#[derive(Debug, Clone)]
pub struct UnitsDocument {
    pub units: Vec<BasicSpatialUnit>,
    pub blocks: Vec<BasicSpatialUnit>,
    pub fields: Vec<AttributeField>,
    pub semantics: SemanticField,
}

pub fn parse_units_geojson(text: &str, path: &Path) -> Result<UnitsDocument> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ingest_err(path, format!("invalid JSON: {e}")))?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(ingest_err(path, "top-level object is not a FeatureCollection"));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| ingest_err(path, "FeatureCollection has no features array"))?;

    let mut units = Vec::new();
    let mut blocks = Vec::new();
    let mut labels = Vec::new();
    let mut numeric: Vec<BTreeMap<String, f64>> = Vec::new();
    for (k, f) in features.iter().enumerate() {
        let props = f
            .get("properties")
            .and_then(Value::as_object)
            .ok_or_else(|| ingest_err(path, format!("feature {k} has no properties")))?;
        let id = match props.get("id") {
            Some(Value::String(s)) => s.clone(),
            _ => return Err(ingest_err(path, format!("feature {k} lacks a string `id`"))),
        };
        let block_id = match props.get("block_id") {
            Some(Value::String(s)) => s.clone(),
            None | Some(Value::Null) => String::new(),
            _ => return Err(ingest_err(path, format!("unit `{id}`: `block_id` must be a string"))),
        };
        let level = match props.get("level") {
            Some(v) => v
                .as_u64()
                .ok_or_else(|| ingest_err(path, format!("unit `{id}`: `level` must be a non-negative integer")))?
                as u32,
            None => 0,
        };
        let geom = f
            .get("geometry")
            .ok_or_else(|| ingest_err(path, format!("unit `{id}` has no geometry")))?;
        let shape = parse_geometry(geom).map_err(|e| ingest_err(path, format!("unit `{id}`: {e}")))?;
        let unit = BasicSpatialUnit::new(id.clone(), shape, block_id, level);
        if level > 0 {
            blocks.push(unit);
            continue;
        }
        let semantic = match props.get("semantic") {
            Some(Value::String(s)) => s.clone(),
            _ => return Err(ingest_err(path, format!("unit `{id}` lacks a string `semantic`"))),
        };
        let mut nums = BTreeMap::new();
        for (key, v) in props {
            if RESERVED.contains(&key.as_str()) {
                continue;
            }
            if let Some(x) = v.as_f64() {
                nums.insert(key.clone(), x);
            }
        }
        units.push(unit);
        labels.push(semantic);
        numeric.push(nums);
    }

    let field_names: BTreeSet<String> = numeric.iter().flat_map(|m| m.keys().cloned()).collect();
    let mut fields = Vec::new();
    for name in field_names {
        let mut map = HashMap::new();
        for (u, nums) in units.iter().zip(&numeric) {
            if let Some(v) = nums.get(&name) {
                map.insert(u.id.clone(), *v);
            }
        }
        fields.push(AttributeField::from_map(name, &map, &units).map_err(|e| ingest_err(path, e.to_string()))?);
    }

    let categories: Vec<String> = match doc.get("categories").and_then(Value::as_array) {
        Some(cats) => cats.iter().filter_map(|c| c.as_str().map(str::to_owned)).collect(),
        None => labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect(),
    };
    let lookup: HashMap<&str, usize> = categories.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let assignment = labels
        .iter()
        .zip(&units)
        .map(|(l, u)| {
            lookup
                .get(l.as_str())
                .copied()
                .ok_or_else(|| ingest_err(path, format!("unit `{}` has unknown semantic `{l}`", u.id)))
        })
        .collect::<Result<Vec<_>>>()?;
    let semantics = SemanticField::new(categories, assignment).map_err(|e| ingest_err(path, e.to_string()))?;
    Ok(UnitsDocument {
        units,
        blocks,
        fields,
        semantics,
    })
}

pub fn read_units_geojson(path: &Path) -> Result<UnitsDocument> {
    parse_units_geojson(&read_to_string(path)?, path)
}

#[derive(serde::Deserialize)]
struct OdRow {
    src_id: String,
    dst_id: String,
    weight: f64,
}

/// Reads `src_id,dst_id,weight`; both directions sum into one unordered pair
/// and intra-unit rows are dropped.
pub fn parse_od_csv(text: &str, path: &Path) -> Result<InteractionMatrix> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| ingest_err(path, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["src_id", "dst_id", "weight"] {
        return Err(ingest_err(path, "expected header `src_id,dst_id,weight`"));
    }
    let mut m = InteractionMatrix::new(InteractionKind::Od);
    for (line, row) in rdr.deserialize::<OdRow>().enumerate() {
        let row = row.map_err(|e| ingest_err(path, format!("row {}: {e}", line + 2)))?;
        if row.src_id == row.dst_id {
            continue;
        }
        m.add(&row.src_id, &row.dst_id, row.weight)
            .map_err(|e| ingest_err(path, format!("row {}: {e}", line + 2)))?;
    }
    Ok(m)
}

pub fn read_od_csv(path: &Path) -> Result<InteractionMatrix> {
    parse_od_csv(&read_to_string(path)?, path)
}

pub fn read_study(units_path: &Path, od_path: &Path) -> Result<Study> {
    let doc = read_units_geojson(units_path)?;
    let od = read_od_csv(od_path)?;
    Study::new(doc.units, doc.blocks, doc.fields, doc.semantics, od)
}

fn unit_feature(study: &Study, i: usize, extra: &[(&str, Value)]) -> Value {
    let u = &study.units[i];
    let mut props = Map::new();
    props.insert("id".into(), json!(u.id));
    props.insert("block_id".into(), json!(u.block_id));
    props.insert("level".into(), json!(u.level));
    props.insert(
        "semantic".into(),
        json!(study.semantics.categories[study.semantics.assignment[i]]),
    );
    for f in &study.fields {
        props.insert(f.name.clone(), json!(f.values[i]));
    }
    for (k, v) in extra {
        props.insert((*k).into(), v.clone());
    }
    json!({"type": "Feature", "geometry": geometry_json(&u.shape), "properties": props})
}

fn block_feature(b: &BasicSpatialUnit) -> Value {
    let mut props = Map::new();
    props.insert("id".into(), json!(b.id));
    props.insert("block_id".into(), json!(b.block_id));
    props.insert("level".into(), json!(b.level));
    json!({"type": "Feature", "geometry": geometry_json(&b.shape), "properties": props})
}

/// Units and block polygons in the same format [`parse_units_geojson`] reads.
pub fn units_geojson(study: &Study) -> String {
    let mut features: Vec<Value> = (0..study.units.len()).map(|i| unit_feature(study, i, &[])).collect();
    features.extend(study.blocks.iter().map(block_feature));
    let doc = json!({
        "type": "FeatureCollection",
        "categories": study.semantics.categories,
        "features": features,
    });
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

/// Unit features tagged with their `region_id`; `level` is the scheme level.
pub fn partition_geojson(study: &Study, assignment: &[usize], level: u32) -> String {
    let features: Vec<Value> = (0..study.units.len())
        .map(|i| {
            unit_feature(
                study,
                i,
                &[("region_id", json!(assignment[i])), ("level", json!(level))],
            )
        })
        .collect();
    let doc = json!({
        "type": "FeatureCollection",
        "categories": study.semantics.categories,
        "features": features,
    });
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

pub fn partition_csv(study: &Study, assignment: &[usize], level: u32) -> String {
    let mut s = String::from("unit_id,region_id,level\n");
    for (u, r) in study.units.iter().zip(assignment) {
        s.push_str(&format!("{},{},{}\n", u.id, r, level));
    }
    s
}

pub fn od_csv(od: &InteractionMatrix) -> String {
    let mut s = String::from("src_id,dst_id,weight\n");
    for (a, b, w) in od.iter() {
        s.push_str(&format!("{a},{b},{w}\n"));
    }
    s
}

/// Reads `unit_id,region_id,level` back into an assignment aligned with `study`.
pub fn parse_partition_csv(text: &str, study: &Study) -> Result<Vec<usize>> {
    let path = Path::new("<partition>");
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = vec![usize::MAX; study.units.len()];
    for row in rdr.records() {
        let row = row.map_err(|e| ingest_err(path, e.to_string()))?;
        let id = row.get(0).unwrap_or_default();
        let region: usize = row
            .get(1)
            .and_then(|r| r.parse().ok())
            .ok_or_else(|| ingest_err(path, format!("bad region id for `{id}`")))?;
        let i = study
            .index_of(id)
            .ok_or_else(|| ingest_err(path, format!("unknown unit `{id}`")))?;
        out[i] = region;
    }
    if out.contains(&usize::MAX) {
        return Err(ingest_err(path, "partition does not cover every unit"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
      "type": "FeatureCollection",
      "features": [
        {"type": "Feature",
         "geometry": {"type": "Polygon", "coordinates": [[[0,0],[10,0],[10,10],[0,10],[0,0]]]},
         "properties": {"id": "a", "block_id": "B", "level": 0, "semantic": "res", "population": 5, "traffic": 2.5}},
        {"type": "Feature",
         "geometry": {"type": "MultiPolygon", "coordinates": [[[[10,0],[20,0],[20,10],[10,10],[10,0]]]]},
         "properties": {"id": "b", "block_id": "B", "level": 0, "semantic": "com", "population": 1, "traffic": 0}},
        {"type": "Feature",
         "geometry": {"type": "Polygon", "coordinates": [[[0,0],[20,0],[20,10],[0,10],[0,0]]]},
         "properties": {"id": "B", "level": 1}}
      ]
    }"#;

    #[test]
    fn parses_units_blocks_and_fields() {
        let d = parse_units_geojson(DOC, Path::new("t.geojson")).unwrap();
        assert_eq!(d.units.len(), 2);
        assert_eq!(d.blocks.len(), 1);
        assert_eq!(
            d.fields.iter().map(|f| f.name.as_str()).collect::<Vec<_>>(),
            ["population", "traffic"]
        );
        assert_eq!(d.semantics.categories, ["com", "res"]);
        assert_eq!(d.semantics.assignment, [1, 0]);
        assert_eq!(d.units[0].area, 100.0);
    }

    #[test]
    fn missing_attribute_is_ingest_error() {
        let broken = DOC.replace(r#""population": 1, "#, "");
        let err = parse_units_geojson(&broken, Path::new("t.geojson")).unwrap_err();
        assert!(err.to_string().contains("population"), "{err}");
    }

    #[test]
    fn od_symmetrizes_and_checks_header() {
        let m = parse_od_csv("src_id,dst_id,weight\na,b,2\nb,a,3\na,a,9\n", Path::new("od.csv")).unwrap();
        assert_eq!(m.get("a", "b"), 5.0);
        assert_eq!(m.len(), 1);
        assert!(parse_od_csv("from,to,w\n", Path::new("od.csv")).is_err());
        assert!(parse_od_csv("src_id,dst_id,weight\na,b,-1\n", Path::new("od.csv")).is_err());
    }

    #[test]
    fn geojson_roundtrip() {
        let d = parse_units_geojson(DOC, Path::new("t.geojson")).unwrap();
        let study = Study::new(
            d.units,
            d.blocks,
            d.fields,
            d.semantics,
            InteractionMatrix::new(InteractionKind::Od),
        )
        .unwrap();
        let text = units_geojson(&study);
        let e = parse_units_geojson(&text, Path::new("again")).unwrap();
        assert_eq!(e.units, study.units);
        assert_eq!(e.blocks, study.blocks);
        assert_eq!(e.fields, study.fields);
        assert_eq!(e.semantics, study.semantics);
    }
}
