//! Multi-scale quad-tree decomposition of a potential field.
//!
//! The field square is recursively split into cells. Each cell is
//! classified into an *approximate distance zone* per unit: zone 0 means
//! the unit reaches into the cell's circumscribed circle, zone `k ≥ 1`
//! bins the scaled squared distance `d̃²` between consecutive entries of
//! the zone boundary ladder, and the last zone ("farthest") lies beyond
//! the ladder. A cell becomes a leaf once it is small enough and its zone
//! classification is uniform across the cell, so cells shrink near
//! restrictions and stay coarse in open space. Each leaf carries an upper
//! bound on the potential anywhere inside it, which later drives the
//! routing costs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldUnit;
use crate::geom::Vec2;

/// Hard cap on subdivision depth; hitting it means `n_min` is inconsistent
/// with the field size (e.g. zero or subnormal).
pub const MAX_DEPTH: u32 = 32;

/// Ascending `d̃²` thresholds separating the distance zones.
///
/// The defaults mark where the potential `exp(−d̃²)` crosses
/// 0.9, 0.7, 0.5, 0.25, and 0.05.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ZoneConfig {
    boundaries: Vec<f64>,
}

impl Default for ZoneConfig {
    fn default() -> Self {
        ZoneConfig {
            boundaries: vec![0.105, 0.357, 0.693, 1.386, 2.996],
        }
    }
}

impl ZoneConfig {
    /// Boundaries must be strictly ascending and positive.
    pub fn new(boundaries: Vec<f64>) -> Result<Self> {
        let ascending = boundaries.windows(2).all(|w| w[0] < w[1]);
        let positive = boundaries.iter().all(|b| *b > 0.0 && b.is_finite());
        if boundaries.is_empty() || !ascending || !positive {
            return Err(Error::InvalidScenario(
                "zone boundaries must be non-empty, positive, and strictly ascending".into(),
            ));
        }
        Ok(ZoneConfig { boundaries })
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Total number of zones: containment (0), one per ladder interval,
    /// and the farthest zone.
    pub fn zone_count(&self) -> usize {
        self.boundaries.len() + 2
    }

    /// Index of the zone beyond the last boundary.
    pub fn farthest_zone(&self) -> usize {
        self.boundaries.len() + 1
    }

    /// Bin a scaled squared distance into zones `1..=farthest`.
    pub fn bin(&self, scaled_squared_distance: f64) -> usize {
        1 + self
            .boundaries
            .iter()
            .filter(|b| **b <= scaled_squared_distance)
            .count()
    }

    /// The `d̃²` value at which a zone begins (0 for zones 0 and 1). Zone
    /// `z ≥ 2` starts at `boundaries[z−2]`; the farthest zone starts at the
    /// last boundary.
    pub fn lower_edge(&self, zone: usize) -> f64 {
        debug_assert!(zone <= self.farthest_zone());
        if zone <= 1 {
            0.0
        } else {
            self.boundaries[zone - 2]
        }
    }

    /// Upper bound `exp(−lower_edge)` on the potential anywhere in a cell
    /// of the given zone (1 for zones 0 and 1).
    pub fn zone_upper_potential(&self, zone: usize) -> f64 {
        (-self.lower_edge(zone)).exp()
    }
}

impl TryFrom<Vec<f64>> for ZoneConfig {
    type Error = Error;
    fn try_from(boundaries: Vec<f64>) -> Result<Self> {
        ZoneConfig::new(boundaries)
    }
}

impl From<ZoneConfig> for Vec<f64> {
    fn from(cfg: ZoneConfig) -> Self {
        cfg.boundaries
    }
}

/// Geometry of the decomposition: the square to cover and the smallest and
/// largest admissible cell sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionParams {
    pub field_center: Vec2,
    pub field_size: f64,
    pub n_min: f64,
    pub n_max: f64,
}

impl DecompositionParams {
    /// Defaults: `n_min = size/64`, `n_max = size/8`.
    pub fn for_field(field_center: Vec2, field_size: f64) -> Self {
        DecompositionParams {
            field_center,
            field_size,
            n_min: field_size / 64.0,
            n_max: field_size / 8.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.field_size > 0.0
            && self.field_size.is_finite()
            && self.field_center.is_finite()
            && self.n_min > 0.0
            && self.n_min <= self.n_max
            && self.n_max <= self.field_size;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidScenario(
                "decomposition requires 0 < n_min <= n_max <= field_size".into(),
            ))
        }
    }
}

/// One square cell of the decomposition. Children, when present, cover the
/// parent exactly in the fixed order NW, NE, SW, SE.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadNode {
    center: Vec2,
    side: f64,
    zone: usize,
    zone_upper_potential: f64,
    children: Option<Box<[QuadNode; 4]>>,
}

/// Child slots in a subdivided node.
pub const NW: usize = 0;
pub const NE: usize = 1;
pub const SW: usize = 2;
pub const SE: usize = 3;

impl QuadNode {
    pub fn center(&self) -> Vec2 {
        self.center
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn zone(&self) -> usize {
        self.zone
    }

    pub fn zone_upper_potential(&self) -> f64 {
        self.zone_upper_potential
    }

    pub fn children(&self) -> Option<&[QuadNode; 4]> {
        self.children.as_deref()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    /// Closed-square membership test.
    pub fn contains(&self, p: Vec2) -> bool {
        let half = self.side / 2.0;
        (p.x - self.center.x).abs() <= half && (p.y - self.center.y).abs() <= half
    }

    /// All leaves in depth-first NW, NE, SW, SE order.
    pub fn leaves(&self) -> Vec<&QuadNode> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a QuadNode>) {
        match &self.children {
            None => out.push(self),
            Some(children) => {
                for child in children.iter() {
                    child.collect_leaves(out);
                }
            }
        }
    }

    /// The unique leaf reached by deterministic descent: points on an
    /// internal boundary go east/north. `None` when `p` lies outside the
    /// root square.
    pub fn locate_leaf(&self, p: Vec2) -> Option<&QuadNode> {
        if !self.contains(p) {
            return None;
        }
        let mut node = self;
        while let Some(children) = &node.children {
            let east = p.x >= node.center.x;
            let north = p.y >= node.center.y;
            let idx = match (north, east) {
                (true, false) => NW,
                (true, true) => NE,
                (false, false) => SW,
                (false, true) => SE,
            };
            node = &children[idx];
        }
        Some(node)
    }

    /// Nested export for debugging/visualization.
    pub fn export(&self) -> TreeExport {
        TreeExport {
            center: self.center.into(),
            size: self.side,
            zone: self.zone,
            children: self
                .children
                .as_ref()
                .map(|c| c.iter().map(|n| n.export()).collect()),
        }
    }
}

/// Serializable mirror of the tree: `{center, size, zone, children}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct TreeExport {
    pub center: [f64; 2],
    pub size: f64,
    pub zone: usize,
    pub children: Option<Vec<TreeExport>>,
}

/// Classify each unit into a distance zone for the cell at `center` with
/// side `n`: zone 0 when the unit reaches the circumscribed circle
/// (`d² ≤ n²/2`), otherwise the `d̃²` ladder bin.
pub fn approx_distance_zones(
    center: Vec2,
    n: f64,
    units: &[&FieldUnit],
    cfg: &ZoneConfig,
) -> Vec<usize> {
    units
        .iter()
        .map(|unit| {
            if unit.squared_distance(center) <= n * n / 2.0 {
                0
            } else {
                cfg.bin(unit.scaled_squared_distance(center))
            }
        })
        .collect()
}

/// Whether the cell's zone classification is uniform: for every unit in
/// the cell's own zone, step from the center toward the unit by the
/// circumscribed radius `n/√2` and require the probe point to still sit at
/// or beyond the zone's lower edge. A zero repulsion vector at the center
/// (the center touches the unit) counts as failure.
pub fn uniformity_probe(quad: &QuadNode, same_zone_units: &[&FieldUnit], cfg: &ZoneConfig) -> bool {
    let bd_l = cfg.lower_edge(quad.zone);
    for unit in same_zone_units {
        let v = unit.repulsion_vector(quad.center);
        let norm = v.norm();
        if norm == 0.0 {
            return false;
        }
        let probe = quad.center - v * (quad.side / (std::f64::consts::SQRT_2 * norm));
        if unit.scaled_squared_distance(probe) < bd_l {
            return false;
        }
    }
    true
}

/// Build the decomposition for a set of units.
///
/// A node is a leaf iff `n ≤ n_max` and (`n ≤ n_min`, or its zone is the
/// farthest, or the uniformity probe passes); everything else subdivides.
/// Units classified farthest at a node are dropped before recursing into
/// its children.
pub fn build(units: &[FieldUnit], params: &DecompositionParams, cfg: &ZoneConfig) -> Result<QuadNode> {
    params.validate()?;
    let refs: Vec<&FieldUnit> = units.iter().collect();
    build_cell(params.field_center, params.field_size, &refs, params, cfg, 0)
}

fn build_cell(
    center: Vec2,
    side: f64,
    units: &[&FieldUnit],
    params: &DecompositionParams,
    cfg: &ZoneConfig,
    depth: u32,
) -> Result<QuadNode> {
    let zones = approx_distance_zones(center, side, units, cfg);
    let farthest = cfg.farthest_zone();
    let zone = zones.iter().copied().min().unwrap_or(farthest);
    let mut node = QuadNode {
        center,
        side,
        zone,
        zone_upper_potential: cfg.zone_upper_potential(zone),
        children: None,
    };

    if side <= params.n_max {
        if side <= params.n_min || zone == farthest {
            return Ok(node);
        }
        if zone > 0 {
            let same_zone: Vec<&FieldUnit> = units
                .iter()
                .zip(&zones)
                .filter(|(_, z)| **z == zone)
                .map(|(u, _)| *u)
                .collect();
            if uniformity_probe(&node, &same_zone, cfg) {
                return Ok(node);
            }
        }
    }

    if depth >= MAX_DEPTH {
        return Err(Error::DepthExceeded(MAX_DEPTH));
    }

    let kept: Vec<&FieldUnit> = units
        .iter()
        .zip(&zones)
        .filter(|(_, z)| **z < farthest)
        .map(|(u, _)| *u)
        .collect();

    let q = side / 4.0;
    let half = side / 2.0;
    let offsets = [
        Vec2::new(-q, q),  // NW
        Vec2::new(q, q),   // NE
        Vec2::new(-q, -q), // SW
        Vec2::new(q, -q),  // SE
    ];
    let mut children = Vec::with_capacity(4);
    for offset in offsets {
        children.push(build_cell(center + offset, half, &kept, params, cfg, depth + 1)?);
    }
    let children: Box<[QuadNode; 4]> = children
        .into_boxed_slice()
        .try_into()
        .expect("exactly four children");
    node.children = Some(children);
    Ok(node)
}
