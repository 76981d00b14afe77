//! Nested solids with materials, translations only.
//!
//! Any volume may have children; a volume's material fills its solid minus
//! its children. All solids are aligned with the z axis, which is vertical.

pub mod model;
pub mod parse;
pub mod solid;
pub mod surface;
pub mod vec3;

pub use model::{GeometryModel, PlacedVolume, VolumeId};
pub use parse::parse_geometry;
pub use solid::Solid;
pub use surface::{Facet, SurfaceDef};
pub use vec3::Vec3;

/// Push applied after a boundary crossing, in cm.
pub const EPSILON: f64 = 1e-7;
