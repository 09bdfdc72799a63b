//! Oriented volume tensors of embedded surface elements.

use nalgebra::DMatrix;

use super::alt_tensor::{AltTensor, Variance};
use super::metric::MetricChart;
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;

/// Pointwise volume data of an s-dimensional tangent frame.
#[derive(Clone, Debug)]
pub struct SurfaceTensors {
    /// Unit s-vector spanning the tangent plane, sign-matched to the frame
    /// orientation.
    pub eps_surface: AltTensor,
    /// sqrt det of the tangent Gram matrix; the measure factor carried by
    /// the frame columns.
    pub area_density: f64,
    /// Orthonormal completion of the tangent plane, n x (n-s).
    pub normals: DMatrix<f64>,
}

/// Orthonormalize columns in place order with the chart inner product.
/// Columns are kept in their given order; a column whose residual drops
/// below tolerance relative to its own norm marks a degenerate frame.
pub fn orthonormalize(
    metric: &MetricChart,
    point: &[f64],
    columns: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = columns.nrows();
    let k = columns.ncols();
    let mut out = DMatrix::zeros(n, k);
    for j in 0..k {
        let mut v: Vec<f64> = columns.column(j).iter().copied().collect();
        let scale = metric.norm_vec(&v, point)?.max(1.0);
        for prev in 0..j {
            let q: Vec<f64> = out.column(prev).iter().copied().collect();
            let proj = metric.inner_vec(&v, &q, point)?;
            for i in 0..n {
                v[i] -= proj * q[i];
            }
        }
        let norm = metric.norm_vec(&v, point)?;
        if !(norm > PIVOT_TOL * scale) {
            return Err(Error::DegenerateFrame(format!(
                "column {j} is dependent on the preceding ones at {point:?} (residual {norm:.3e})"
            )));
        }
        for i in 0..n {
            out[(i, j)] = v[i] / norm;
        }
    }
    Ok(out)
}

/// Extend the span of `tangents` to an orthonormal basis of the chart.
/// Coordinate directions are the candidates, picked by largest residual
/// norm with earlier axes winning ties.
pub fn orthonormal_complement(
    metric: &MetricChart,
    point: &[f64],
    tangents: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = metric.dim();
    let s = tangents.ncols();
    let base = orthonormalize(metric, point, tangents)?;
    let mut accepted: Vec<Vec<f64>> = (0..s)
        .map(|j| base.column(j).iter().copied().collect())
        .collect();
    let mut residuals: Vec<Vec<f64>> = (0..n)
        .map(|axis| {
            let mut e = vec![0.0; n];
            e[axis] = 1.0;
            e
        })
        .collect();
    let mut normals = DMatrix::zeros(n, n - s);
    for slot in 0..(n - s) {
        for r in residuals.iter_mut() {
            for q in &accepted {
                let proj = metric.inner_vec(r, q, point)?;
                for i in 0..n {
                    r[i] -= proj * q[i];
                }
            }
        }
        let mut best = 0;
        let mut best_norm = -1.0;
        for (idx, r) in residuals.iter().enumerate() {
            let norm = metric.norm_vec(r, point)?;
            if norm > best_norm + PIVOT_TOL {
                best = idx;
                best_norm = norm;
            }
        }
        if best_norm <= PIVOT_TOL {
            return Err(Error::DegenerateFrame(format!(
                "cannot complete the frame at {point:?}: residual {best_norm:.3e}"
            )));
        }
        let mut picked = residuals.swap_remove(best);
        for v in picked.iter_mut() {
            *v /= best_norm;
        }
        for i in 0..n {
            normals[(i, slot)] = picked[i];
        }
        accepted.push(picked);
    }
    Ok(normals)
}

/// Volume tensors of the element spanned by `tangents` with the given
/// orientation sign. The unit s-vector comes from hooking the flattened
/// normal frame into the chart volume; the construction leaves its sign
/// arbitrary, so it is matched against the frame itself.
pub fn surface_volume_tensors(
    metric: &MetricChart,
    point: &[f64],
    tangents: &DMatrix<f64>,
    orientation: f64,
) -> Result<SurfaceTensors> {
    let n = metric.dim();
    let s = tangents.ncols();
    if tangents.nrows() != n {
        return Err(Error::Dimension(format!(
            "tangents of length {} on a dimension-{n} chart",
            tangents.nrows()
        )));
    }
    if !(orientation == 1.0 || orientation == -1.0) {
        return Err(Error::Invalid(format!("orientation {orientation} is not ±1")));
    }
    let gram = metric.gram(tangents, point)?;
    let det = if s == 0 { 1.0 } else { gram.determinant() };
    if !(det > 0.0) {
        return Err(Error::DegenerateFrame(format!(
            "tangent Gram determinant {det:.3e} at {point:?}"
        )));
    }
    let area_density = det.sqrt();

    let normals = orthonormal_complement(metric, point, tangents)?;
    let mut hooked = metric.volume_vector(point)?;
    for j in 0..(n - s) {
        let nu: Vec<f64> = normals.column(j).iter().copied().collect();
        let nu_flat = metric.flat(&AltTensor::vector(&nu, Variance::Contravariant), point)?;
        hooked = nu_flat.contract(&hooked)?;
    }

    // Orient: the frame's own wedge must pair positively (after the
    // orientation sign) with the unit s-vector.
    let mut frame_form = AltTensor::scalar(n, 1.0);
    for j in 0..s {
        let t: Vec<f64> = tangents.column(j).iter().copied().collect();
        let t_flat = metric.flat(&AltTensor::vector(&t, Variance::Contravariant), point)?;
        frame_form = frame_form.wedge(&t_flat)?;
    }
    let alignment = hooked.pairing(&frame_form)? * orientation;
    if alignment < 0.0 {
        hooked.scale(-1.0);
    } else if alignment == 0.0 {
        return Err(Error::DegenerateFrame(format!(
            "frame wedge vanished against the volume at {point:?}"
        )));
    }

    Ok(SurfaceTensors {
        eps_surface: hooked,
        area_density,
        normals,
    })
}

/// Volume s-1 vector induced on a boundary slice: hook the flattened unit
/// normal into the surface volume. With a unit normal orthogonal to the
/// boundary tangents the identity n̂ ∧ eps(boundary) = eps(surface) holds by
/// construction.
pub fn boundary_volume_vector(
    metric: &MetricChart,
    point: &[f64],
    eps_surface: &AltTensor,
    unit_normal: &[f64],
) -> Result<AltTensor> {
    let n_flat = metric.flat(&AltTensor::vector(unit_normal, Variance::Contravariant), point)?;
    n_flat.contract(eps_surface)
}

/// Unit outward direction inside a surface along a boundary slice: the
/// companion column projected off the boundary tangent span, normalized.
/// The companion is stored pointing outward, so the sign carries over.
pub fn unit_normal_in_surface(
    metric: &MetricChart,
    point: &[f64],
    boundary_tangents: &DMatrix<f64>,
    companion: &[f64],
) -> Result<Vec<f64>> {
    let n = metric.dim();
    let mut v = companion.to_vec();
    if boundary_tangents.ncols() > 0 {
        let base = orthonormalize(metric, point, boundary_tangents)?;
        for j in 0..base.ncols() {
            let q: Vec<f64> = base.column(j).iter().copied().collect();
            let proj = metric.inner_vec(&v, &q, point)?;
            for i in 0..n {
                v[i] -= proj * q[i];
            }
        }
    }
    let norm = metric.norm_vec(&v, point)?;
    let scale = metric.norm_vec(companion, point)?.max(1.0);
    if !(norm > PIVOT_TOL * scale) {
        return Err(Error::DegenerateFrame(format!(
            "companion column lies in the boundary tangent span at {point:?}"
        )));
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn plane_element_in_three_space() {
        let g = MetricChart::euclidean(3);
        let t = dmatrix![1.0, 0.0; 0.0, 1.0; 0.0, 0.0];
        let st = surface_volume_tensors(&g, &[0.0; 3], &t, 1.0).unwrap();
        assert_eq!(st.eps_surface.components(), &[1.0, 0.0, 0.0]); // ∂x∧∂y
        assert_eq!(st.area_density, 1.0);
        assert_eq!(st.normals.ncols(), 1);
        assert!((st.normals[(2, 0)].abs() - 1.0).abs() < 1e-15);

        let flipped = surface_volume_tensors(&g, &[0.0; 3], &t, -1.0).unwrap();
        assert_eq!(flipped.eps_surface.components(), &[-1.0, 0.0, 0.0]);
    }

    #[test]
    fn stretch_and_shear_leave_the_unit_volume_alone() {
        let g = MetricChart::euclidean(3);
        let t = dmatrix![2.0, 2.0; 0.0, 3.0; 0.0, 0.0];
        let st = surface_volume_tensors(&g, &[0.0; 3], &t, 1.0).unwrap();
        assert!((st.eps_surface.components()[0] - 1.0).abs() < 1e-14);
        assert!((st.area_density - 6.0).abs() < 1e-14);
    }

    #[test]
    fn full_dimensional_element_is_the_chart_volume() {
        let g = MetricChart::euclidean(2);
        let t = dmatrix![1.0, 1.0; 0.0, 1.0];
        let st = surface_volume_tensors(&g, &[0.0; 2], &t, 1.0).unwrap();
        assert_eq!(st.eps_surface.components(), &[1.0]);
        assert_eq!(st.normals.ncols(), 0);
    }

    #[test]
    fn boundary_volume_closes_the_wedge_identity() {
        // Disk in the plane, boundary point (1,0): tangent e_y, outward e_x.
        let g = MetricChart::euclidean(2);
        let t = dmatrix![1.0, 0.0; 0.0, 1.0];
        let st = surface_volume_tensors(&g, &[1.0, 0.0], &t, 1.0).unwrap();
        let n_hat = unit_normal_in_surface(&g, &[1.0, 0.0], &dmatrix![0.0; 1.0], &[1.0, 0.0])
            .unwrap();
        assert_eq!(n_hat, vec![1.0, 0.0]);
        let eps_b =
            boundary_volume_vector(&g, &[1.0, 0.0], &st.eps_surface, &n_hat).unwrap();
        assert_eq!(eps_b.components(), &[0.0, 1.0]); // ∂y, the oriented circle direction

        let n_vec = AltTensor::vector(&n_hat, Variance::Contravariant);
        let closed = n_vec.wedge(&eps_b).unwrap();
        assert_eq!(closed.components(), st.eps_surface.components());
    }

    #[test]
    fn companion_normal_respects_the_metric() {
        let g = MetricChart::custom(2, |_| dmatrix![4.0, 0.0; 0.0, 1.0]);
        let n_hat =
            unit_normal_in_surface(&g, &[0.0, 0.0], &dmatrix![0.0; 1.0], &[1.0, 0.2]).unwrap();
        assert!((n_hat[0] - 0.5).abs() < 1e-15);
        assert!(n_hat[1].abs() < 1e-15);
    }

    #[test]
    fn dependent_tangents_are_refused() {
        let g = MetricChart::euclidean(3);
        let t = dmatrix![1.0, 2.0; 0.0, 0.0; 0.0, 0.0];
        assert!(matches!(
            surface_volume_tensors(&g, &[0.0; 3], &t, 1.0),
            Err(Error::DegenerateFrame(_))
        ));
    }

    #[test]
    fn complement_prefers_the_largest_residual_axis() {
        // Tangent nearly along e_x: the completion should take e_y and e_z,
        // never a near-parallel copy of the tangent.
        let g = MetricChart::euclidean(3);
        let t = dmatrix![1.0; 1e-8; 0.0];
        let nm = orthonormal_complement(&g, &[0.0; 3], &t).unwrap();
        assert_eq!(nm.ncols(), 2);
        for j in 0..2 {
            let col: Vec<f64> = nm.column(j).iter().copied().collect();
            let dot: f64 = col[0] * 1.0 + col[1] * 1e-8;
            assert!(dot.abs() < 1e-7, "normal {j} leaks into the tangent: {dot}");
        }
    }
}
