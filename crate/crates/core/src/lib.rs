//! Conserved vorticity integrals on advected surfaces.
//!
//! The crate is organized bottom-up: `geom` holds the pointwise exterior
//! algebra, `flows` the closed-form velocity fields and their state, `advect`
//! the Lagrangian surface meshes and quadrature, `integrals` the conserved
//! quantities and their boundary fluxes, `spectral` a periodic 2-D solver
//! whose output plugs in as just another flow, and `harness` the experiment
//! runner with drift reports.

pub mod advect;
pub mod error;
pub mod flows;
pub mod geom;
pub mod harness;
pub mod integrals;
pub mod spectral;
pub mod util;

pub use error::{Error, Result};
pub use geom::{AltTensor, MetricChart, Variance};
