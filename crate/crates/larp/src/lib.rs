//! Restrictive-routing path planning on potential fields.
//!
//! The toolkit models obstacles and keep-out regions as potential-field
//! *units* whose influence decays with a per-unit scaled distance
//! ([`field`]). On top of that sit two very different planning styles:
//!
//! * a routing pipeline that decomposes the field into a multi-scale
//!   quad tree ([`decomposition`]), connects the leaf cells into a graph,
//!   and runs a safety-weighted A* over it ([`network`]);
//! * classical force-following baselines — potential-minimization descent
//!   and three artificial-potential-field variants ([`planners`]).
//!
//! Route quality is compared with line-integral safety metrics
//! ([`metrics`]), and [`scenario`] + the `larp` binary tie everything into
//! reproducible scenario files, comparison reports, and SVG plots.

pub mod decomposition;
mod error;
pub mod field;
pub mod geom;
pub mod metrics;
pub mod network;
pub mod planners;
pub mod plot;
pub mod scenario;

pub use error::{Error, Result};
pub use field::{Field, FieldEvaluation, FieldUnit, RepulsionMatrix};
pub use geom::{Mat2, Vec2};
