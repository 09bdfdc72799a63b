//! Material surface meshes: quadrature, mesh storage, constructors, and
//! Runge-Kutta transport of nodes together with their tangent frames.

pub mod builders;
pub mod mesh;
pub mod quadrature;
pub mod transport;

pub use builders::{build_mesh, builder_names, MeshSpec};
pub use mesh::{integrate_scalar_density, pullback_integrate, ElementRange, MaterialNode, SurfaceMesh};
pub use transport::{advect_mesh, rk4_step, step_all, TimeGrid};
