//! Boundary flux conditions, their transport law, and the spanning-surface
//! constants that tie a closed surface's integral to an interior quantity.

use nalgebra::DMatrix;

use super::{entropy_circ_odd, helicity, vorticity_of_frame, EntropyWeight, WeightFn};
use crate::advect::{pullback_integrate, step_all, SurfaceMesh, TimeGrid};
use crate::error::{Error, Result};
use crate::flows::{EnergySign, FlowField, FlowState};
use crate::geom::{orthonormalize, MetricChart};

/// Sup-norms of the two flux conditions over the boundary nodes. Exactly one
/// is defined, by the parity of the boundary dimension: even boundaries
/// carry the vorticity scalar, odd ones the entropy-gradient alignment.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryConditions {
    pub helicity_bc: Option<f64>,
    pub entropy_bc: Option<f64>,
    pub t: f64,
}

fn alignment(v: &crate::geom::AltTensor, grad: &[f64]) -> f64 {
    v.components()
        .iter()
        .zip(grad)
        .map(|(a, b)| a * b)
        .sum()
}

/// Pointwise flux-condition value for one boundary frame: the vorticity
/// scalar on even-dimensional boundaries, the contraction of the vorticity
/// vector with the entropy gradient on odd-dimensional ones.
fn boundary_quantity(
    point: &[f64],
    tangents: &DMatrix<f64>,
    orientation: f64,
    state: &FlowState,
) -> Result<f64> {
    let sv = vorticity_of_frame(point, tangents, orientation, state)?;
    match (sv.vort_scalar, sv.vort_vector) {
        (Some(scalar), _) => Ok(scalar),
        (_, Some(vector)) => Ok(alignment(&vector, &state.entropy_grad)),
        _ => unreachable!("one branch is always populated"),
    }
}

/// Evaluate the vanishing-flux boundary conditions of an open surface.
pub fn boundary_conditions(
    mesh: &SurfaceMesh,
    flow: &dyn FlowField,
    t: f64,
) -> Result<BoundaryConditions> {
    if mesh.closed {
        return Err(Error::Invalid(
            "boundary conditions are vacuous on a closed surface".into(),
        ));
    }
    let bd = mesh
        .boundary
        .as_deref()
        .ok_or_else(|| Error::Invalid("open surface without a boundary mesh".into()))?;
    if flow.dim() != bd.adim {
        return Err(Error::Dimension(format!(
            "dimension-{} flow against a boundary in ambient dimension {}",
            flow.dim(),
            bd.adim
        )));
    }
    let mut sup = 0.0f64;
    for el in &bd.elements {
        for idx in el.nodes.clone() {
            let node = &bd.nodes[idx];
            let state = flow.state(&node.position, t)?;
            let z = boundary_quantity(
                &node.position,
                &bd.tangents(node),
                el.orientation,
                &state,
            )?;
            sup = sup.max(z.abs());
        }
    }
    let (helicity_bc, entropy_bc) = if bd.sdim % 2 == 0 {
        (Some(sup), None)
    } else {
        (None, Some(sup))
    };
    Ok(BoundaryConditions {
        helicity_bc,
        entropy_bc,
        t,
    })
}

/// Tangential trace of the velocity gradient over the frame's span.
fn surface_divergence(
    metric: &MetricChart,
    point: &[f64],
    tangents: &DMatrix<f64>,
    state: &FlowState,
) -> Result<f64> {
    if tangents.ncols() == 0 {
        return Ok(0.0);
    }
    let basis = orthonormalize(metric, point, tangents)?;
    let mut div = 0.0;
    for a in 0..basis.ncols() {
        for i in 0..basis.nrows() {
            for j in 0..basis.nrows() {
                div += basis[(i, a)] * state.velocity_grad[(i, j)] * basis[(j, a)];
            }
        }
    }
    Ok(div)
}

/// Checks the transport law dz/dt = -z div_S u for the boundary flux
/// quantity z along advected nodes, with central differences in time.
/// Returns the largest residual relative to the largest term magnitude.
pub fn lemma_transport_check(
    boundary: &SurfaceMesh,
    flow: &dyn FlowField,
    grid: &TimeGrid,
) -> Result<f64> {
    if flow.dim() != boundary.adim {
        return Err(Error::Dimension(format!(
            "dimension-{} flow against a mesh in ambient dimension {}",
            flow.dim(),
            boundary.adim
        )));
    }
    let steps = grid.steps();
    if steps < 2 {
        return Err(Error::Invalid(
            "the transport check needs at least two steps for central differences".into(),
        ));
    }
    let metric = MetricChart::euclidean(boundary.adim);
    let mut mesh = boundary.clone();
    // snapshots[k][node] = (z, div_S u)
    let mut snapshots: Vec<Vec<(f64, f64)>> = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = grid.time_at(k);
        let mut row = Vec::with_capacity(mesh.node_count());
        for el in &mesh.elements {
            for idx in el.nodes.clone() {
                let node = &mesh.nodes[idx];
                let state = flow.state(&node.position, t)?;
                let tangents = mesh.tangents(node);
                let z = boundary_quantity(&node.position, &tangents, el.orientation, &state)?;
                let div = surface_divergence(&metric, &node.position, &tangents, &state)?;
                row.push((z, div));
            }
        }
        snapshots.push(row);
        if k < steps {
            step_all(flow, &mut mesh, t, grid.dt)?;
        }
    }

    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for k in 1..steps {
        for node in 0..snapshots[k].len() {
            let dz = (snapshots[k + 1][node].0 - snapshots[k - 1][node].0) / (2.0 * grid.dt);
            let (z, div) = snapshots[k][node];
            let rhs = -z * div;
            worst = worst.max((dz - rhs).abs());
            scale = scale.max(dz.abs()).max(rhs.abs());
        }
    }
    Ok(worst / scale.max(1e-14))
}

/// A spanning-surface constant: the interior integral whose value equals a
/// conserved boundary integral when the weight admits one.
#[derive(Clone, Copy, Debug)]
pub struct SpanningConstant {
    pub interior: f64,
    /// The matching boundary integral: for even spanning surfaces only a
    /// constant weight has one (the boundary helicity); for odd spanning
    /// surfaces it exists whenever the weight has a closed-form
    /// antiderivative (the boundary entropy circulation).
    pub boundary: Option<f64>,
}

/// Integral over a surface spanning a closed boundary: the scalar-vorticity
/// constant when the spanning surface is even-dimensional, the
/// entropy-alignment constant when it is odd-dimensional.
pub fn spanning_constant(
    sigma: &SurfaceMesh,
    flow: &dyn FlowField,
    t: f64,
    f: &WeightFn,
) -> Result<SpanningConstant> {
    if flow.dim() != sigma.adim {
        return Err(Error::Dimension(format!(
            "dimension-{} flow against a mesh in ambient dimension {}",
            flow.dim(),
            sigma.adim
        )));
    }
    let bd = sigma
        .boundary
        .as_deref()
        .ok_or_else(|| Error::Invalid("a spanning surface needs a boundary".into()))?;
    if !bd.closed {
        return Err(Error::Invalid(
            "the spanned boundary must be a closed surface".into(),
        ));
    }

    if sigma.sdim % 2 == 0 {
        let q = sigma.sdim / 2;
        let interior = if let Some(c) = f.const_value() {
            c * pullback_integrate(sigma, |x| {
                flow.state(x, t)?.vorticity_form().wedge_pow(q)
            })?
        } else {
            if flow.dim() % 2 != 0 {
                return Err(Error::Domain(format!(
                    "a non-constant weight in the vorticity scalar needs an even-dimensional \
                     domain, the flow lives in {}",
                    flow.dim()
                )));
            }
            super::enstrophy(sigma, flow, t, f)?.value
        };
        let boundary = match f.const_value() {
            Some(c) => Some(c * helicity(bd, flow, t, EnergySign::Minus)?.value),
            None => None,
        };
        Ok(SpanningConstant { interior, boundary })
    } else {
        let q = (sigma.sdim - 1) / 2;
        let weight = EntropyWeight {
            of_entropy: Some(f.clone()),
            of_vorticity: None,
        };
        let interior = entropy_circ_odd(sigma, flow, t, &weight)?.value;
        let has_antideriv = f.antiderivative(0.0).is_some();
        let boundary = if has_antideriv {
            Some(pullback_integrate(bd, |x| {
                let st = flow.state(x, t)?;
                let big_f = f
                    .antiderivative(st.entropy)
                    .expect("antiderivative probed above");
                let mut wq = st.vorticity_form().wedge_pow(q)?;
                wq.scale(big_f);
                Ok(wq)
            })?)
        } else {
            None
        };
        Ok(SpanningConstant { interior, boundary })
    }
}
