//! Material surface meshes: quadrature nodes carrying advected frames.

use nalgebra::DMatrix;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::geom::{AltTensor, MetricChart, Variance};
use crate::util::tree_sum;

/// One quadrature node moving with the fluid. The frame columns are tangent
/// vectors of the reference parametrization pushed forward by the flow map;
/// boundary meshes carry one extra trailing column, the outward companion
/// direction inside the parent surface.
#[derive(Clone, Debug)]
pub struct MaterialNode {
    pub position: Vec<f64>,
    pub frame: DMatrix<f64>,
    pub weight: f64,
    pub ref_coords: Vec<f64>,
}

/// Contiguous node block sharing one orientation sign.
#[derive(Clone, Debug)]
pub struct ElementRange {
    pub nodes: Range<usize>,
    pub orientation: f64,
}

#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    /// Surface dimension; 0 is allowed (endpoint sets of arcs).
    pub sdim: usize,
    /// Ambient dimension.
    pub adim: usize,
    pub closed: bool,
    /// Columns per node frame: sdim for a surface, sdim + 1 when the last
    /// column is an outward companion (boundary meshes).
    pub frame_cols: usize,
    pub nodes: Vec<MaterialNode>,
    pub elements: Vec<ElementRange>,
    pub boundary: Option<Box<SurfaceMesh>>,
}

impl SurfaceMesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn has_companion(&self) -> bool {
        self.frame_cols == self.sdim + 1
    }

    /// Tangent block of a node frame (drops the companion column if any).
    pub fn tangents(&self, node: &MaterialNode) -> DMatrix<f64> {
        if self.frame_cols == self.sdim {
            node.frame.clone()
        } else {
            node.frame.columns(0, self.sdim).into_owned()
        }
    }

    pub fn companion(&self, node: &MaterialNode) -> Option<Vec<f64>> {
        if self.has_companion() {
            Some(node.frame.column(self.frame_cols - 1).iter().copied().collect())
        } else {
            None
        }
    }

    pub fn translate(&mut self, offset: &[f64]) -> Result<()> {
        if offset.len() != self.adim {
            return Err(Error::Dimension(format!(
                "offset of length {} for an ambient dimension of {}",
                offset.len(),
                self.adim
            )));
        }
        for node in &mut self.nodes {
            for (x, o) in node.position.iter_mut().zip(offset) {
                *x += o;
            }
        }
        if let Some(b) = &mut self.boundary {
            b.translate(offset)?;
        }
        Ok(())
    }

    /// Rotate a planar mesh by `theta` about `center`, frames included.
    pub fn rotate_2d(&mut self, theta: f64, center: &[f64]) -> Result<()> {
        if self.adim != 2 || center.len() != 2 {
            return Err(Error::Dimension(format!(
                "plane rotation on an ambient dimension of {}",
                self.adim
            )));
        }
        let (s, c) = theta.sin_cos();
        let rot = |x: f64, y: f64| (c * x - s * y, s * x + c * y);
        for node in &mut self.nodes {
            let (x, y) = (node.position[0] - center[0], node.position[1] - center[1]);
            let (rx, ry) = rot(x, y);
            node.position[0] = center[0] + rx;
            node.position[1] = center[1] + ry;
            for j in 0..node.frame.ncols() {
                let (vx, vy) = rot(node.frame[(0, j)], node.frame[(1, j)]);
                node.frame[(0, j)] = vx;
                node.frame[(1, j)] = vy;
            }
        }
        if let Some(b) = &mut self.boundary {
            b.rotate_2d(theta, center)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.sdim > self.adim {
            return Err(Error::Dimension(format!(
                "surface dimension {} exceeds ambient {}",
                self.sdim, self.adim
            )));
        }
        if self.adim > crate::geom::multi_index::MAX_DIM {
            return Err(Error::Dimension(format!(
                "ambient dimension {} exceeds {}",
                self.adim,
                crate::geom::multi_index::MAX_DIM
            )));
        }
        if self.frame_cols != self.sdim && self.frame_cols != self.sdim + 1 {
            return Err(Error::Invalid(format!(
                "{} frame columns on a dimension-{} mesh",
                self.frame_cols, self.sdim
            )));
        }
        let mut covered = 0usize;
        for el in &self.elements {
            if el.nodes.start != covered || el.nodes.end > self.nodes.len() {
                return Err(Error::Invalid(format!(
                    "element range {:?} breaks the contiguous cover at node {covered}",
                    el.nodes
                )));
            }
            if el.orientation != 1.0 && el.orientation != -1.0 {
                return Err(Error::Invalid(format!(
                    "element orientation {} is not ±1",
                    el.orientation
                )));
            }
            covered = el.nodes.end;
        }
        if covered != self.nodes.len() {
            return Err(Error::Invalid(format!(
                "elements cover {covered} of {} nodes",
                self.nodes.len()
            )));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.position.len() != self.adim
                || node.frame.nrows() != self.adim
                || node.frame.ncols() != self.frame_cols
            {
                return Err(Error::Invalid(format!(
                    "node {i} has position length {} and frame {}x{}",
                    node.position.len(),
                    node.frame.nrows(),
                    node.frame.ncols()
                )));
            }
        }
        if self.closed && self.boundary.is_some() {
            return Err(Error::Invalid(
                "closed mesh carrying a boundary mesh".into(),
            ));
        }
        if let Some(b) = &self.boundary {
            if b.adim != self.adim {
                return Err(Error::Dimension(format!(
                    "boundary ambient {} differs from parent {}",
                    b.adim, self.adim
                )));
            }
            if self.sdim == 0 || b.sdim != self.sdim - 1 {
                return Err(Error::Invalid(format!(
                    "boundary dimension {} under a parent of dimension {}",
                    b.sdim, self.sdim
                )));
            }
            if !b.has_companion() {
                return Err(Error::Invalid(
                    "boundary mesh is missing its companion column".into(),
                ));
            }
            b.validate()?;
        }
        Ok(())
    }
}

/// Integral of a covariant sdim-form over the mesh: the form is evaluated on
/// the frame tangent columns and weighted by reference measure and element
/// orientation. The summation tree is fixed by node order, so results are
/// reproducible bit for bit.
pub fn pullback_integrate(
    mesh: &SurfaceMesh,
    mut form: impl FnMut(&[f64]) -> Result<AltTensor>,
) -> Result<f64> {
    let mut terms = Vec::with_capacity(mesh.nodes.len());
    for el in &mesh.elements {
        for idx in el.nodes.clone() {
            let node = &mesh.nodes[idx];
            let alpha = form(&node.position)?;
            if alpha.degree() != mesh.sdim {
                return Err(Error::Degree(format!(
                    "degree-{} form on a dimension-{} mesh",
                    alpha.degree(),
                    mesh.sdim
                )));
            }
            if alpha.variance() != Variance::Covariant && alpha.degree() > 0 {
                return Err(Error::Variance("pullback needs a covariant form".into()));
            }
            let val = if mesh.frame_cols == mesh.sdim {
                alpha.evaluate(&node.frame)?
            } else {
                alpha.evaluate(&node.frame.columns(0, mesh.sdim).into_owned())?
            };
            terms.push(el.orientation * node.weight * val);
        }
    }
    Ok(tree_sum(terms))
}

/// Integral of a scalar against the metric surface measure carried by the
/// advected frames. Orientation-free.
pub fn integrate_scalar_density(
    mesh: &SurfaceMesh,
    metric: &MetricChart,
    mut f: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<f64> {
    let mut terms = Vec::with_capacity(mesh.nodes.len());
    for el in &mesh.elements {
        for idx in el.nodes.clone() {
            let node = &mesh.nodes[idx];
            let density = if mesh.sdim == 0 {
                1.0
            } else {
                let t = mesh.tangents(node);
                let det = metric.gram(&t, &node.position)?.determinant();
                if !(det > 0.0) {
                    return Err(Error::DegenerateFrame(format!(
                        "Gram determinant {det:.3e} at {:?}",
                        node.position
                    )));
                }
                det.sqrt()
            };
            terms.push(node.weight * f(&node.position)? * density);
        }
    }
    Ok(tree_sum(terms))
}
