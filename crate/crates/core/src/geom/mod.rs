//! Exterior algebra, metric charts, and surface volume tensors.

pub mod alt_tensor;
pub mod metric;
pub mod multi_index;
pub mod volume;

pub use alt_tensor::{AltTensor, Variance};
pub use metric::MetricChart;
pub use volume::{
    boundary_volume_vector, orthonormal_complement, orthonormalize, surface_volume_tensors,
    unit_normal_in_surface, SurfaceTensors,
};
