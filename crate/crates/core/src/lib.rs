//! Monte Carlo estimate of the rate and deposited-energy spectrum of
//! ionizing-radiation interactions in a superconducting-qubit chip.
//!
//! Geometry and kinematics are generic over the scalar type (see [`num::Real`]);
//! the transport engine, data tables and analysis run in `f64`.

pub mod analysis;
pub mod data;
pub mod error;
pub mod geometry;
pub mod num;
pub mod rng;
pub mod runner;
pub mod scenario;
pub mod sources;
pub mod transport;
pub mod twostep;

pub use error::{Error, Result};
pub use num::Real;

pub type Vec3d = geometry::Vec3<f64>;
pub type Vec3f = geometry::Vec3<f32>;
pub type Solid = geometry::Solid<f64>;
pub type Geometry = geometry::GeometryModel<f64>;
pub type GeometryF32 = geometry::GeometryModel<f32>;
pub type Surface = geometry::SurfaceDef<f64>;

/// Version string recorded in run manifests.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
