//! A study area: the finest-level units plus everything attached to them.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::spatial::{AttributeField, BasicSpatialUnit, InteractionMatrix, SemanticField};

/// All inputs of one regionalization: level-0 units with their fields,
/// semantics and OD flows, plus optional higher-level block polygons.
#[derive(Debug, Clone)]
pub struct Study {
    pub units: Vec<BasicSpatialUnit>,
    pub blocks: Vec<BasicSpatialUnit>,
    pub fields: Vec<AttributeField>,
    pub semantics: SemanticField,
    pub od: InteractionMatrix,
    index: HashMap<String, usize>,
}

impl Study {
    pub fn new(
        units: Vec<BasicSpatialUnit>,
        blocks: Vec<BasicSpatialUnit>,
        fields: Vec<AttributeField>,
        semantics: SemanticField,
        od: InteractionMatrix,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(units.len());
        for (i, u) in units.iter().enumerate() {
            if u.level != 0 {
                return Err(Error::Consistency(format!(
                    "unit `{}` is level {}; study units must be level 0",
                    u.id, u.level
                )));
            }
            if index.insert(u.id.clone(), i).is_some() {
                return Err(Error::Consistency(format!("duplicate unit id `{}`", u.id)));
            }
        }
        for b in &blocks {
            if index.contains_key(&b.id) {
                return Err(Error::Consistency(format!(
                    "block id `{}` collides with a unit id",
                    b.id
                )));
            }
        }
        for f in &fields {
            if f.values.len() != units.len() {
                return Err(Error::Consistency(format!(
                    "field `{}` has {} values for {} units",
                    f.name,
                    f.values.len(),
                    units.len()
                )));
            }
        }
        if semantics.assignment.len() != units.len() {
            return Err(Error::Consistency(
                "semantic assignment does not cover every unit".into(),
            ));
        }
        let mut unknown: Vec<&str> = od
            .iter()
            .flat_map(|(a, b, _)| [a, b])
            .filter(|id| !index.contains_key(*id))
            .collect();
        unknown.sort_unstable();
        unknown.dedup();
        if !unknown.is_empty() {
            return Err(Error::Consistency(format!(
                "OD references unknown units: {}",
                unknown.join(", ")
            )));
        }
        Ok(Study {
            units,
            blocks,
            fields,
            semantics,
            od,
            index,
        })
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn ids(&self) -> Vec<String> {
        self.units.iter().map(|u| u.id.clone()).collect()
    }

    pub fn field(&self, name: &str) -> Result<&AttributeField> {
        self.fields
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| Error::Config(format!("no attribute field named `{name}`")))
    }

    /// Dense block label per unit (ordered by first appearance).
    pub fn block_labels(&self) -> Vec<usize> {
        let mut seen: HashMap<&str, usize> = HashMap::new();
        self.units
            .iter()
            .map(|u| {
                let n = seen.len();
                *seen.entry(u.block_id.as_str()).or_insert(n)
            })
            .collect()
    }

    /// Validates geometry of units and blocks, and the block hierarchy:
    /// every block referenced by a unit at level k−1 that exists as a
    /// polygon at level k must contain it.
    pub fn validate(&self) -> Result<()> {
        for u in self.units.iter().chain(&self.blocks) {
            u.validate()?;
        }
        let mut by_id: BTreeMap<&str, &BasicSpatialUnit> = BTreeMap::new();
        for b in &self.blocks {
            if by_id.insert(b.id.as_str(), b).is_some() {
                return Err(Error::Consistency(format!("duplicate block id `{}`", b.id)));
            }
        }
        if self.blocks.is_empty() {
            return Ok(());
        }
        for child in self.units.iter().chain(&self.blocks) {
            if child.block_id.is_empty() {
                continue;
            }
            let Some(parent) = by_id.get(child.block_id.as_str()) else {
                if child.level == 0 {
                    return Err(Error::Consistency(format!(
                        "unit `{}` references missing block `{}`",
                        child.id, child.block_id
                    )));
                }
                continue;
            };
            if parent.level != child.level + 1 {
                return Err(Error::Consistency(format!(
                    "unit `{}` (level {}) assigned to block `{}` at level {}",
                    child.id, child.level, parent.id, parent.level
                )));
            }
            let tol = 1e-9 * parent.shape.bbox().extent().max(1.0);
            if !parent.shape.contains_shape(&child.shape, tol) {
                return Err(Error::geometry(
                    &child.id,
                    format!("not contained in its block `{}`", parent.id),
                ));
            }
        }
        Ok(())
    }

    /// Ancestor id at each hierarchy level for every unit; `levels[0]` is
    /// the unit's own id. Fails if any unit lacks a block id.
    pub fn hierarchy(&self) -> Result<Vec<Vec<String>>> {
        if self.units.iter().any(|u| u.block_id.is_empty()) {
            return Err(Error::Config(
                "block hierarchy requires a block_id on every unit".into(),
            ));
        }
        let parents: HashMap<&str, &str> = self
            .blocks
            .iter()
            .filter(|b| !b.block_id.is_empty())
            .map(|b| (b.id.as_str(), b.block_id.as_str()))
            .collect();
        let mut levels = vec![
            self.ids(),
            self.units.iter().map(|u| u.block_id.clone()).collect::<Vec<_>>(),
        ];
        loop {
            let last = levels.last().unwrap();
            let next: Vec<Option<&str>> = last.iter().map(|id| parents.get(id.as_str()).copied()).collect();
            if next.iter().all(Option::is_none) {
                break;
            }
            if next.iter().any(Option::is_none) {
                return Err(Error::Consistency(format!(
                    "block hierarchy is ragged at level {}",
                    levels.len()
                )));
            }
            let next: Vec<String> = next.into_iter().map(|s| s.unwrap().to_owned()).collect();
            levels.push(next);
        }
        Ok(levels)
    }
}
