use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dataset::{Dataset, SourceRef};
use crate::numerics::{RVector, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    /// Union over levels of the per-level products `X^l_z × X^l_o`.
    #[default]
    PerLevelUnion,
    /// All z-projections times all o-projections.
    FullProduct,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("cannot detect levels: {0}; use the full-product grid mode")]
    NoLevels(String),
}

/// A grid node: indexes into [`Grid::z_parts`] and [`Grid::o_parts`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridPoint {
    pub z: usize,
    pub o: usize,
}

/// The finite evaluation set built from a dataset's bundles.
#[derive(Debug, Clone)]
pub struct Grid {
    pub mode: GridMode,
    pub z_parts: Vec<RVector>,
    pub o_parts: Vec<RVector>,
    pub points: Vec<GridPoint>,
    /// Level of each point (`None` in full-product mode).
    pub levels: Vec<Option<usize>>,
    /// Dataset bundles coinciding with each point.
    pub sources: Vec<Vec<SourceRef>>,
    /// Grid index of each observation's chosen bundle.
    pub observation_points: Vec<usize>,
    index: HashMap<GridPoint, usize>,
}

enum LevelKey {
    Tagged(usize),
    Coordinate(Rational),
}

fn level_keys(ds: &Dataset) -> Result<Vec<LevelKey>, GridError> {
    let tags: Vec<Option<usize>> = ds.sources().map(|s| ds.tag(s).0).collect();
    if tags.iter().all(Option::is_some) {
        return Ok(tags.into_iter().map(|t| LevelKey::Tagged(t.unwrap())).collect());
    }
    if tags.iter().any(Option::is_some) {
        return Err(GridError::NoLevels("only some bundles carry a clause tag".into()));
    }
    if ds.n_o == 0 {
        return Err(GridError::NoLevels("no o-coordinates to separate levels by".into()));
    }
    let last = ds.dim() - 1;
    Ok(ds.sources().map(|s| LevelKey::Coordinate(ds.bundle(s)[last].clone())).collect())
}

fn intern(parts: &mut Vec<RVector>, lookup: &mut HashMap<RVector, usize>, v: RVector) -> usize {
    *lookup.entry(v.clone()).or_insert_with(|| {
        parts.push(v);
        parts.len() - 1
    })
}

impl Grid {
    pub fn build(ds: &Dataset, mode: GridMode) -> Result<Grid, GridError> {
        let sources: Vec<SourceRef> = ds.sources().collect();
        let mut z_parts = Vec::new();
        let mut o_parts = Vec::new();
        let mut z_lookup = HashMap::new();
        let mut o_lookup = HashMap::new();

        // (level key order, gadget index, source order) keeps construction order
        let groups: Vec<(Option<usize>, Vec<SourceRef>)> = match mode {
            GridMode::FullProduct => vec![(None, sources.clone())],
            GridMode::PerLevelUnion => {
                let keys = level_keys(ds)?;
                let mut tagged: BTreeMap<usize, Vec<SourceRef>> = BTreeMap::new();
                let mut by_coord: BTreeMap<Rational, Vec<SourceRef>> = BTreeMap::new();
                for (src, key) in sources.iter().zip(keys) {
                    match key {
                        LevelKey::Tagged(l) => tagged.entry(l).or_default().push(*src),
                        LevelKey::Coordinate(c) => by_coord.entry(c).or_default().push(*src),
                    }
                }
                if tagged.is_empty() {
                    by_coord.into_values().enumerate().map(|(i, v)| (Some(i + 1), v)).collect()
                } else {
                    tagged.into_iter().map(|(l, v)| (Some(l), v)).collect()
                }
            }
        };

        let mut points = Vec::new();
        let mut levels = Vec::new();
        let mut index = HashMap::new();
        for (level, mut group) in groups {
            group.sort_by_key(|&s| ds.tag(s).1.unwrap_or(usize::MAX));
            let mut zs = Vec::new();
            let mut os = Vec::new();
            for &src in &group {
                let (z, o) = ds.split(ds.bundle(src));
                let zi = intern(&mut z_parts, &mut z_lookup, z);
                let oi = intern(&mut o_parts, &mut o_lookup, o);
                if !zs.contains(&zi) {
                    zs.push(zi);
                }
                if !os.contains(&oi) {
                    os.push(oi);
                }
            }
            for &z in &zs {
                for &o in &os {
                    let gp = GridPoint { z, o };
                    if let std::collections::hash_map::Entry::Vacant(e) = index.entry(gp) {
                        e.insert(points.len());
                        points.push(gp);
                        levels.push(level);
                    }
                }
            }
        }
        if mode == GridMode::FullProduct {
            // the single group above already covers all parts
            debug_assert_eq!(points.len(), z_parts.len() * o_parts.len());
        }

        let mut sources_of = vec![Vec::new(); points.len()];
        let mut observation_points = vec![0; ds.observations.len()];
        for src in sources {
            let (z, o) = ds.split(ds.bundle(src));
            let gp = GridPoint { z: z_lookup[&z], o: o_lookup[&o] };
            let idx = index[&gp];
            sources_of[idx].push(src);
            if let SourceRef::Observation(k) = src {
                observation_points[k] = idx;
            }
        }

        Ok(Grid { mode, z_parts, o_parts, points, levels, sources: sources_of, observation_points, index })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point_index(&self, gp: GridPoint) -> Option<usize> {
        self.index.get(&gp).copied()
    }

    pub fn z_index(&self, z: &RVector) -> Option<usize> {
        self.z_parts.iter().position(|p| p == z)
    }

    /// Full bundle `(z, o)` of a point.
    pub fn bundle(&self, idx: usize) -> RVector {
        let gp = self.points[idx];
        self.z_parts[gp.z].concat(&self.o_parts[gp.o])
    }

    /// Stable display name: `l<level>_t<index>` for gadget bundles, else
    /// `g<z-row>x<o-col>`.
    pub fn node_name(&self, ds: &Dataset, idx: usize) -> String {
        for &src in &self.sources[idx] {
            if let (Some(l), Some(t)) = ds.tag(src) {
                return format!("l{l}_t{t}");
            }
        }
        let gp = self.points[idx];
        format!("g{}x{}", gp.z, gp.o)
    }

    /// Grid index of gadget bundle `t` at level `l`, when tagged.
    pub fn gadget_point(&self, ds: &Dataset, level: usize, t: usize) -> Option<usize> {
        (0..self.len()).find(|&i| self.sources[i].iter().any(|&s| ds.tag(s) == (Some(level), Some(t))))
    }
}
