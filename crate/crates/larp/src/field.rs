//! Restrictive potential-field units.
//!
//! A field is a set of *units* (point, line segment, rectangle, ellipse, or
//! a collection of those). Each unit maps a query position `x` to a
//! repulsion vector `x̄(x)` — the displacement from the closest part of the
//! unit — and owns a symmetric positive-definite repulsion matrix `A` that
//! shapes how fast its influence decays with distance. From those two
//! pieces come the squared distance `d²(x) = x̄ᵀx̄`, the scaled squared
//! distance `d̃²(x) = x̄ᵀA⁻¹x̄`, and the potential `σ(x) = exp(−d̃²(x))`,
//! which is 1 exactly on the unit and decays toward 0 far away.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Mat2, Vec2};

/// Default step for finite-difference potential gradients, in meters.
pub const DEFAULT_GRADIENT_STEP: f64 = 1e-4;

/// Symmetric positive-definite matrix controlling a unit's decay envelope.
///
/// The inverse is fixed at construction so repeated `d̃²` evaluations stay
/// cheap and deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct RepulsionMatrix {
    matrix: Mat2,
    inverse: Mat2,
}

impl RepulsionMatrix {
    /// Validates symmetry and positive definiteness (`det > 0`, `tr > 0`).
    pub fn new(matrix: Mat2) -> Result<Self> {
        if !matrix.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if !(matrix.determinant() > 0.0 && matrix.trace() > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let inverse = matrix.try_inverse().ok_or(Error::NotPositiveDefinite)?;
        Ok(RepulsionMatrix { matrix, inverse })
    }

    pub fn identity() -> Self {
        RepulsionMatrix::new(Mat2::IDENTITY).expect("identity is SPD")
    }

    pub fn matrix(&self) -> Mat2 {
        self.matrix
    }

    pub fn inverse(&self) -> Mat2 {
        self.inverse
    }

    /// Eigenvalues of `A`, smallest first. Both are positive.
    pub fn eigenvalues(&self) -> (f64, f64) {
        self.matrix.symmetric_eigenvalues()
    }

    /// The quadratic form `vᵀA⁻¹v`, evaluated with the same accumulation
    /// order as a plain dot product so that `A = I` reproduces `vᵀv`
    /// bit for bit. The trailing `+ 0.0` only canonicalizes a `-0.0` (which
    /// signed-zero components of `v` can produce, the inverse's
    /// off-diagonal zeros being negated by the adjugate) to the `+0.0` a
    /// plain dot yields; every other value passes through unchanged.
    fn scaled_form(&self, v: Vec2) -> f64 {
        v.dot(self.inverse.mul_vec(v)) + 0.0
    }
}

impl TryFrom<[[f64; 2]; 2]> for RepulsionMatrix {
    type Error = Error;
    fn try_from(rows: [[f64; 2]; 2]) -> Result<Self> {
        RepulsionMatrix::new(Mat2::from(rows))
    }
}

impl From<RepulsionMatrix> for [[f64; 2]; 2] {
    fn from(r: RepulsionMatrix) -> Self {
        r.matrix.into()
    }
}

/// All four field quantities at one position, mutually consistent: the
/// distances and potential are derived from the reported repulsion vector
/// (for a collection, the sub-unit with the smallest `d̃²`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldEvaluation {
    pub repulsion_vector: Vec2,
    pub squared_distance: f64,
    pub scaled_squared_distance: f64,
    pub potential: f64,
}

/// One restriction in the field.
///
/// Construct through the checked constructors ([`FieldUnit::point`] and
/// friends); deserialization runs the same validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(try_from = "raw::UnitSpec")]
pub enum FieldUnit {
    Point {
        location: Vec2,
        repulsion: RepulsionMatrix,
    },
    Line {
        start: Vec2,
        end: Vec2,
        repulsion: RepulsionMatrix,
    },
    Rectangle {
        corner1: Vec2,
        corner2: Vec2,
        repulsion: RepulsionMatrix,
    },
    Ellipse {
        location: Vec2,
        /// Shape matrix `B`; the covered region is `‖B⁻¹(x − x̂)‖ ≤ 1`.
        shape: Mat2,
        #[serde(skip)]
        shape_inverse: Mat2,
        repulsion: RepulsionMatrix,
    },
    Collection { units: Vec<FieldUnit> },
}

impl FieldUnit {
    pub fn point(location: Vec2, repulsion: RepulsionMatrix) -> Self {
        FieldUnit::Point {
            location,
            repulsion,
        }
    }

    /// A segment between two distinct endpoints. Zero-length segments are
    /// rejected; use [`FieldUnit::point`] for those.
    pub fn line(start: Vec2, end: Vec2, repulsion: RepulsionMatrix) -> Result<Self> {
        if (end - start).norm_squared() == 0.0 {
            return Err(Error::DegenerateLine);
        }
        Ok(FieldUnit::Line {
            start,
            end,
            repulsion,
        })
    }

    /// An axis-aligned filled rectangle spanned by two opposite corners.
    /// Rejects zero-area rectangles.
    pub fn rectangle(corner1: Vec2, corner2: Vec2, repulsion: RepulsionMatrix) -> Result<Self> {
        if corner1.x == corner2.x || corner1.y == corner2.y {
            return Err(Error::DegenerateRectangle);
        }
        Ok(FieldUnit::Rectangle {
            corner1,
            corner2,
            repulsion,
        })
    }

    /// Opt-in constructor for a rectangle collapsed along at most one axis
    /// (a wall of zero thickness). Corners that coincide in both
    /// coordinates are still rejected.
    pub fn rectangle_allowing_thin(
        corner1: Vec2,
        corner2: Vec2,
        repulsion: RepulsionMatrix,
    ) -> Result<Self> {
        if corner1.x == corner2.x && corner1.y == corner2.y {
            return Err(Error::DegenerateRectangle);
        }
        Ok(FieldUnit::Rectangle {
            corner1,
            corner2,
            repulsion,
        })
    }

    /// An elliptical region `‖B⁻¹(x − x̂)‖ ≤ 1`. `B` must be comfortably
    /// invertible (`|det B| > 1e-12`).
    pub fn ellipse(location: Vec2, shape: Mat2, repulsion: RepulsionMatrix) -> Result<Self> {
        if shape.determinant().abs() <= 1e-12 {
            return Err(Error::SingularShape);
        }
        let shape_inverse = shape.try_inverse().ok_or(Error::SingularShape)?;
        Ok(FieldUnit::Ellipse {
            location,
            shape,
            shape_inverse,
            repulsion,
        })
    }

    /// A collection delegates to whichever sub-unit is closest in scaled
    /// distance. Must not be empty.
    pub fn collection(units: Vec<FieldUnit>) -> Result<Self> {
        if units.is_empty() {
            return Err(Error::EmptyCollection);
        }
        Ok(FieldUnit::Collection { units })
    }

    /// Displacement from the nearest part of the unit to `x`. Zero exactly
    /// when `x` lies on (or inside) the unit.
    ///
    /// For a collection this is the repulsion vector of the sub-unit with
    /// the smallest scaled squared distance (lowest index on ties).
    pub fn repulsion_vector(&self, x: Vec2) -> Vec2 {
        match self {
            FieldUnit::Point { location, .. } => x - *location,
            FieldUnit::Line { start, end, .. } => {
                let dir = *end - *start;
                let rho = dir.dot(x - *start) / dir.norm_squared();
                x - (*start + dir * rho.clamp(0.0, 1.0))
            }
            FieldUnit::Rectangle {
                corner1, corner2, ..
            } => {
                // Component-wise distance to the [corner1, corner2] span:
                // ½(|x−c1| + |x−c2| − |c1−c2|) is zero inside and grows
                // linearly outside; the sign of x − center orients it.
                let g = ((x - *corner1).abs() + (x - *corner2).abs() - (*corner1 - *corner2).abs())
                    * 0.5;
                let g = Vec2::new(g.x.max(0.0), g.y.max(0.0));
                let center = (*corner1 + *corner2) * 0.5;
                (x - center).sign_or_positive().hadamard(g)
            }
            FieldUnit::Ellipse {
                location,
                shape_inverse,
                ..
            } => {
                let delta = x - *location;
                if delta.norm_squared() == 0.0 {
                    return Vec2::ZERO;
                }
                let radial = shape_inverse.mul_vec(delta).norm();
                delta * (1.0 - 1.0 / radial).max(0.0)
            }
            FieldUnit::Collection { units } => units[Self::closest_index(units, x)]
                .repulsion_vector(x),
        }
    }

    fn closest_index(units: &[FieldUnit], x: Vec2) -> usize {
        let mut best = 0;
        let mut best_d = units[0].scaled_squared_distance(x);
        for (i, unit) in units.iter().enumerate().skip(1) {
            let d = unit.scaled_squared_distance(x);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// `d²(x) = x̄ᵀx̄`; for a collection, the minimum over sub-units.
    pub fn squared_distance(&self, x: Vec2) -> f64 {
        match self {
            FieldUnit::Collection { units } => units
                .iter()
                .map(|u| u.squared_distance(x))
                .fold(f64::INFINITY, f64::min),
            _ => self.repulsion_vector(x).norm_squared(),
        }
    }

    /// `d̃²(x) = x̄ᵀA⁻¹x̄`; for a collection, the minimum over sub-units.
    pub fn scaled_squared_distance(&self, x: Vec2) -> f64 {
        match self {
            FieldUnit::Collection { units } => units
                .iter()
                .map(|u| u.scaled_squared_distance(x))
                .fold(f64::INFINITY, f64::min),
            _ => {
                let v = self.repulsion_vector(x);
                self.repulsion().scaled_form(v)
            }
        }
    }

    /// `σ(x) = exp(−d̃²(x)) ∈ (0, 1]`: 1 exactly on the unit, decaying
    /// with scaled distance (underflows to 0 far away).
    pub fn potential(&self, x: Vec2) -> f64 {
        (-self.scaled_squared_distance(x)).exp()
    }

    /// All four quantities at once, derived from one repulsion vector so
    /// they are mutually consistent even for collections.
    pub fn evaluate(&self, x: Vec2) -> FieldEvaluation {
        match self {
            FieldUnit::Collection { units } => units[Self::closest_index(units, x)].evaluate(x),
            _ => {
                let v = self.repulsion_vector(x);
                let squared = v.norm_squared();
                let scaled = self.repulsion().scaled_form(v);
                FieldEvaluation {
                    repulsion_vector: v,
                    squared_distance: squared,
                    scaled_squared_distance: scaled,
                    potential: (-scaled).exp(),
                }
            }
        }
    }

    /// Central-difference gradient of `σ` with step `h` per component.
    pub fn potential_gradient(&self, x: Vec2, h: f64) -> Vec2 {
        central_gradient(|p| self.potential(p), x, h)
    }

    /// The repulsion matrix of a simple unit; for a collection, of its
    /// first sub-unit (collections have no matrix of their own).
    pub fn repulsion(&self) -> &RepulsionMatrix {
        match self {
            FieldUnit::Point { repulsion, .. }
            | FieldUnit::Line { repulsion, .. }
            | FieldUnit::Rectangle { repulsion, .. }
            | FieldUnit::Ellipse { repulsion, .. } => repulsion,
            FieldUnit::Collection { units } => units[0].repulsion(),
        }
    }
}

/// Central finite differences of a scalar field, one component at a time.
pub fn central_gradient(f: impl Fn(Vec2) -> f64, x: Vec2, h: f64) -> Vec2 {
    let dx = (f(Vec2::new(x.x + h, x.y)) - f(Vec2::new(x.x - h, x.y))) / (2.0 * h);
    let dy = (f(Vec2::new(x.x, x.y + h)) - f(Vec2::new(x.x, x.y - h))) / (2.0 * h);
    Vec2::new(dx, dy)
}

/// A whole scene of units. The field potential is the strongest unit
/// potential at each point (zero for an empty field).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Field {
    units: Vec<FieldUnit>,
}

impl Field {
    pub fn new(units: Vec<FieldUnit>) -> Self {
        Field { units }
    }

    pub fn units(&self) -> &[FieldUnit] {
        &self.units
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// Smallest scaled squared distance over all units, or `None` when the
    /// field has no units.
    pub fn min_scaled_squared_distance(&self, x: Vec2) -> Option<f64> {
        self.units
            .iter()
            .map(|u| u.scaled_squared_distance(x))
            .fold(None, |acc, d| Some(acc.map_or(d, |a: f64| a.min(d))))
    }

    /// Field potential `max_u σ_u(x)`; 0 for an empty field.
    pub fn potential(&self, x: Vec2) -> f64 {
        match self.min_scaled_squared_distance(x) {
            Some(d) => (-d).exp(),
            None => 0.0,
        }
    }

    pub fn potential_gradient(&self, x: Vec2, h: f64) -> Vec2 {
        central_gradient(|p| self.potential(p), x, h)
    }

    /// Index of the unit closest to `x` together with its squared distance,
    /// measured in scaled (`d̃²`) or plain (`d²`) form. Lowest index on
    /// ties; `None` for an empty field.
    pub fn nearest_unit(&self, x: Vec2, scaled: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, unit) in self.units.iter().enumerate() {
            let d = if scaled {
                unit.scaled_squared_distance(x)
            } else {
                unit.squared_distance(x)
            };
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((i, d));
            }
        }
        best
    }
}

/// Serde-facing mirror of [`FieldUnit`] so deserialization funnels through
/// the checked constructors.
mod raw {
    use super::*;

    #[derive(Deserialize)]
    #[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
    pub enum UnitSpec {
        Point {
            location: Vec2,
            repulsion: RepulsionMatrix,
        },
        Line {
            start: Vec2,
            end: Vec2,
            repulsion: RepulsionMatrix,
        },
        Rectangle {
            corner1: Vec2,
            corner2: Vec2,
            repulsion: RepulsionMatrix,
        },
        Ellipse {
            location: Vec2,
            shape: Mat2,
            repulsion: RepulsionMatrix,
        },
        Collection { units: Vec<FieldUnit> },
    }

    impl TryFrom<UnitSpec> for FieldUnit {
        type Error = Error;
        fn try_from(spec: UnitSpec) -> Result<FieldUnit> {
            match spec {
                UnitSpec::Point {
                    location,
                    repulsion,
                } => Ok(FieldUnit::point(location, repulsion)),
                UnitSpec::Line {
                    start,
                    end,
                    repulsion,
                } => FieldUnit::line(start, end, repulsion),
                UnitSpec::Rectangle {
                    corner1,
                    corner2,
                    repulsion,
                } => FieldUnit::rectangle(corner1, corner2, repulsion),
                UnitSpec::Ellipse {
                    location,
                    shape,
                    repulsion,
                } => FieldUnit::ellipse(location, shape, repulsion),
                UnitSpec::Collection { units } => FieldUnit::collection(units),
            }
        }
    }
}
