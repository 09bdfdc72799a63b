//! Mesh constructors. Every builder returns a parent mesh with reference
//! quadrature baked into the node weights and, for open surfaces, a boundary
//! mesh whose frames carry the outward companion column.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Deserialize;

use super::mesh::{ElementRange, MaterialNode, SurfaceMesh};
use super::quadrature::{gauss_legendre_on, simplex_rule, Quad1d};
use crate::error::{Error, Result};
use crate::geom::{surface_volume_tensors, unit_normal_in_surface, AltTensor, MetricChart, Variance};

fn one() -> f64 {
    1.0
}

fn center2() -> Vec<f64> {
    vec![0.0, 0.0]
}

fn center3() -> Vec<f64> {
    vec![0.0, 0.0, 0.0]
}

fn composite_gl(panels: usize, order: usize, lo: f64, hi: f64) -> Result<Quad1d> {
    if panels == 0 {
        return Err(Error::Invalid("panel count must be at least 1".into()));
    }
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    let h = (hi - lo) / panels as f64;
    for p in 0..panels {
        let rule = gauss_legendre_on(order, lo + p as f64 * h, lo + (p + 1) as f64 * h)?;
        nodes.extend(rule.nodes);
        weights.extend(rule.weights);
    }
    Ok(Quad1d { nodes, weights })
}

fn whole_mesh(
    sdim: usize,
    adim: usize,
    closed: bool,
    frame_cols: usize,
    nodes: Vec<MaterialNode>,
    boundary: Option<SurfaceMesh>,
) -> SurfaceMesh {
    let count = nodes.len();
    SurfaceMesh {
        sdim,
        adim,
        closed,
        frame_cols,
        nodes,
        elements: vec![ElementRange {
            nodes: 0..count,
            orientation: 1.0,
        }],
        boundary: boundary.map(Box::new),
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleParams {
    #[serde(default = "center2")]
    pub center: Vec<f64>,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "default_panels")]
    pub panels: usize,
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_panels() -> usize {
    64
}

fn default_order() -> usize {
    4
}

fn circle_node(center: &[f64], radius: f64, theta: f64, weight: f64) -> MaterialNode {
    let n = center.len();
    let mut position = center.to_vec();
    position[0] += radius * theta.cos();
    position[1] += radius * theta.sin();
    let mut frame = DMatrix::zeros(n, 1);
    frame[(0, 0)] = -radius * theta.sin();
    frame[(1, 0)] = radius * theta.cos();
    MaterialNode {
        position,
        frame,
        weight,
        ref_coords: vec![theta],
    }
}

/// Counterclockwise loop in the (x0, x1) plane of the ambient space.
pub fn circle(p: &CircleParams) -> Result<SurfaceMesh> {
    check_center(&p.center, 2)?;
    check_positive(p.radius, "radius")?;
    let rule = composite_gl(p.panels, p.order, 0.0, 2.0 * PI)?;
    let nodes = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&theta, &w)| circle_node(&p.center, p.radius, theta, w))
        .collect();
    Ok(whole_mesh(1, p.center.len(), true, 1, nodes, None))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenArcParams {
    #[serde(default = "center2")]
    pub center: Vec<f64>,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default)]
    pub theta0: f64,
    #[serde(default = "default_theta1")]
    pub theta1: f64,
    #[serde(default = "default_arc_panels")]
    pub panels: usize,
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_theta1() -> f64 {
    PI
}

fn default_arc_panels() -> usize {
    32
}

/// Circular arc from theta0 to theta1; its boundary is the two endpoints,
/// the start weighted -1 and the end +1, each with an outward companion
/// along the arc direction.
pub fn open_arc(p: &OpenArcParams) -> Result<SurfaceMesh> {
    check_center(&p.center, 2)?;
    check_positive(p.radius, "radius")?;
    if p.theta1 <= p.theta0 {
        return Err(Error::Invalid(format!(
            "arc range [{}, {}] is empty",
            p.theta0, p.theta1
        )));
    }
    let n = p.center.len();
    let rule = composite_gl(p.panels, p.order, p.theta0, p.theta1)?;
    let nodes: Vec<MaterialNode> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&theta, &w)| circle_node(&p.center, p.radius, theta, w))
        .collect();

    let endpoint = |theta: f64, outward_sign: f64| -> MaterialNode {
        let base = circle_node(&p.center, p.radius, theta, 1.0);
        MaterialNode {
            position: base.position,
            frame: base.frame * outward_sign,
            weight: 1.0,
            ref_coords: vec![theta],
        }
    };
    let boundary = SurfaceMesh {
        sdim: 0,
        adim: n,
        // a boundary has no boundary of its own
        closed: true,
        frame_cols: 1,
        nodes: vec![endpoint(p.theta0, -1.0), endpoint(p.theta1, 1.0)],
        elements: vec![
            ElementRange {
                nodes: 0..1,
                orientation: -1.0,
            },
            ElementRange {
                nodes: 1..2,
                orientation: 1.0,
            },
        ],
        boundary: None,
    };

    Ok(whole_mesh(1, n, false, 1, nodes, Some(boundary)))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskParams {
    #[serde(default = "center2")]
    pub center: Vec<f64>,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "default_disk_panels")]
    pub radial_panels: usize,
    #[serde(default = "default_order")]
    pub radial_order: usize,
    #[serde(default = "default_disk_angular")]
    pub angular_panels: usize,
    #[serde(default = "default_order")]
    pub angular_order: usize,
}

fn default_disk_panels() -> usize {
    8
}

fn default_disk_angular() -> usize {
    16
}

/// Polar-grid disk in the (x0, x1) plane; boundary is its rim circle with
/// the radial direction as companion.
pub fn disk(p: &DiskParams) -> Result<SurfaceMesh> {
    check_center(&p.center, 2)?;
    check_positive(p.radius, "radius")?;
    let n = p.center.len();
    let radial = composite_gl(p.radial_panels, p.radial_order, 0.0, p.radius)?;
    let angular = composite_gl(p.angular_panels, p.angular_order, 0.0, 2.0 * PI)?;

    let mut nodes = Vec::with_capacity(radial.nodes.len() * angular.nodes.len());
    for (&r, &wr) in radial.nodes.iter().zip(&radial.weights) {
        for (&theta, &wt) in angular.nodes.iter().zip(&angular.weights) {
            let (st, ct) = theta.sin_cos();
            let mut position = p.center.to_vec();
            position[0] += r * ct;
            position[1] += r * st;
            let mut frame = DMatrix::zeros(n, 2);
            frame[(0, 0)] = ct;
            frame[(1, 0)] = st;
            frame[(0, 1)] = -r * st;
            frame[(1, 1)] = r * ct;
            nodes.push(MaterialNode {
                position,
                frame,
                weight: wr * wt,
                ref_coords: vec![r, theta],
            });
        }
    }

    let rim: Vec<MaterialNode> = angular
        .nodes
        .iter()
        .zip(&angular.weights)
        .map(|(&theta, &w)| {
            let (st, ct) = theta.sin_cos();
            let mut position = p.center.to_vec();
            position[0] += p.radius * ct;
            position[1] += p.radius * st;
            let mut frame = DMatrix::zeros(n, 2);
            frame[(0, 0)] = -p.radius * st; // boundary tangent
            frame[(1, 0)] = p.radius * ct;
            frame[(0, 1)] = ct; // outward companion
            frame[(1, 1)] = st;
            MaterialNode {
                position,
                frame,
                weight: w,
                ref_coords: vec![theta],
            }
        })
        .collect();
    let boundary = whole_mesh(1, n, true, 2, rim, None);

    Ok(whole_mesh(2, n, false, 2, nodes, Some(boundary)))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereParams {
    #[serde(default = "center3")]
    pub center: Vec<f64>,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "default_sphere_polar")]
    pub polar_panels: usize,
    #[serde(default = "default_order")]
    pub polar_order: usize,
    #[serde(default = "default_sphere_azimuth")]
    pub azimuth_panels: usize,
    #[serde(default = "default_order")]
    pub azimuth_order: usize,
}

fn default_sphere_polar() -> usize {
    8
}

fn default_sphere_azimuth() -> usize {
    16
}

fn sphere_grid(
    center: &[f64],
    radius: f64,
    polar: &Quad1d,
    azimuth: &Quad1d,
    with_companion: bool,
) -> Vec<MaterialNode> {
    let n = center.len();
    let cols = if with_companion { 3 } else { 2 };
    let mut nodes = Vec::with_capacity(polar.nodes.len() * azimuth.nodes.len());
    for (&theta, &wt) in polar.nodes.iter().zip(&polar.weights) {
        for (&phi, &wp) in azimuth.nodes.iter().zip(&azimuth.weights) {
            let (st, ct) = theta.sin_cos();
            let (sp, cp) = phi.sin_cos();
            let radial = [st * cp, st * sp, ct];
            let mut position = center.to_vec();
            for i in 0..3 {
                position[i] += radius * radial[i];
            }
            let mut frame = DMatrix::zeros(n, cols);
            // tangents along colatitude and azimuth
            frame[(0, 0)] = radius * ct * cp;
            frame[(1, 0)] = radius * ct * sp;
            frame[(2, 0)] = -radius * st;
            frame[(0, 1)] = -radius * st * sp;
            frame[(1, 1)] = radius * st * cp;
            if with_companion {
                for i in 0..3 {
                    frame[(i, 2)] = radial[i];
                }
            }
            nodes.push(MaterialNode {
                position,
                frame,
                weight: wt * wp,
                ref_coords: vec![theta, phi],
            });
        }
    }
    nodes
}

/// Closed sphere; the (colatitude, azimuth) frame order makes the stored
/// orientation match the outward normal.
pub fn sphere(p: &SphereParams) -> Result<SurfaceMesh> {
    check_center(&p.center, 3)?;
    if p.center.len() != 3 {
        return Err(Error::Dimension("spheres live in three dimensions".into()));
    }
    check_positive(p.radius, "radius")?;
    let polar = composite_gl(p.polar_panels, p.polar_order, 0.0, PI)?;
    let azimuth = composite_gl(p.azimuth_panels, p.azimuth_order, 0.0, 2.0 * PI)?;
    let nodes = sphere_grid(&p.center, p.radius, &polar, &azimuth, false);
    Ok(whole_mesh(2, 3, true, 2, nodes, None))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusParams {
    #[serde(default = "center3")]
    pub center: Vec<f64>,
    #[serde(default = "default_major")]
    pub major_radius: f64,
    #[serde(default = "default_minor")]
    pub minor_radius: f64,
    #[serde(default = "default_sphere_azimuth")]
    pub panels_u: usize,
    #[serde(default = "default_order")]
    pub order_u: usize,
    #[serde(default = "default_sphere_polar")]
    pub panels_v: usize,
    #[serde(default = "default_order")]
    pub order_v: usize,
}

fn default_major() -> f64 {
    2.0
}

fn default_minor() -> f64 {
    0.5
}

pub fn torus(p: &TorusParams) -> Result<SurfaceMesh> {
    check_center(&p.center, 3)?;
    if p.center.len() != 3 {
        return Err(Error::Dimension("tori live in three dimensions".into()));
    }
    check_positive(p.major_radius, "major_radius")?;
    check_positive(p.minor_radius, "minor_radius")?;
    if p.minor_radius >= p.major_radius {
        return Err(Error::Invalid(format!(
            "minor radius {} must stay below the major radius {}",
            p.minor_radius, p.major_radius
        )));
    }
    let rule_u = composite_gl(p.panels_u, p.order_u, 0.0, 2.0 * PI)?;
    let rule_v = composite_gl(p.panels_v, p.order_v, 0.0, 2.0 * PI)?;
    let (rr, r) = (p.major_radius, p.minor_radius);
    let mut nodes = Vec::with_capacity(rule_u.nodes.len() * rule_v.nodes.len());
    for (&u, &wu) in rule_u.nodes.iter().zip(&rule_u.weights) {
        for (&v, &wv) in rule_v.nodes.iter().zip(&rule_v.weights) {
            let (su, cu) = u.sin_cos();
            let (sv, cv) = v.sin_cos();
            let ring = rr + r * cv;
            let mut position = p.center.to_vec();
            position[0] += ring * cu;
            position[1] += ring * su;
            position[2] += r * sv;
            let mut frame = DMatrix::zeros(3, 2);
            frame[(0, 0)] = -ring * su;
            frame[(1, 0)] = ring * cu;
            frame[(0, 1)] = -r * sv * cu;
            frame[(1, 1)] = -r * sv * su;
            frame[(2, 1)] = r * cv;
            nodes.push(MaterialNode {
                position,
                frame,
                weight: wu * wv,
                ref_coords: vec![u, v],
            });
        }
    }
    Ok(whole_mesh(2, 3, true, 2, nodes, None))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxParams {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    #[serde(default = "default_box_panels")]
    pub panels: usize,
    #[serde(default = "default_order")]
    pub order: usize,
    /// Marks the box as a fundamental cell of a periodic flow: topologically
    /// closed, no boundary terms. The flow must actually have the box as a
    /// period; nothing can check that here.
    #[serde(default)]
    pub periodic: bool,
    /// Rotation about the box center, planar boxes only.
    #[serde(default)]
    pub rotate: f64,
}

fn default_box_panels() -> usize {
    4
}

/// Full-dimensional axis box.
pub fn box_region(p: &BoxParams) -> Result<SurfaceMesh> {
    let n = p.lo.len();
    if n == 0 || n != p.hi.len() {
        return Err(Error::Dimension(format!(
            "box corners of lengths {} and {}",
            n,
            p.hi.len()
        )));
    }
    if n > crate::geom::multi_index::MAX_DIM {
        return Err(Error::Dimension(format!("box dimension {n} exceeds 6")));
    }
    for a in 0..n {
        if p.hi[a] <= p.lo[a] {
            return Err(Error::Invalid(format!(
                "box is empty along axis {a}: [{}, {}]",
                p.lo[a], p.hi[a]
            )));
        }
    }
    let rules: Vec<Quad1d> = (0..n)
        .map(|a| composite_gl(p.panels, p.order, p.lo[a], p.hi[a]))
        .collect::<Result<_>>()?;

    let mut nodes = Vec::new();
    let mut idx = vec![0usize; n];
    'outer: loop {
        let mut position = Vec::with_capacity(n);
        let mut weight = 1.0;
        for a in 0..n {
            position.push(rules[a].nodes[idx[a]]);
            weight *= rules[a].weights[idx[a]];
        }
        nodes.push(MaterialNode {
            ref_coords: position.clone(),
            position,
            frame: DMatrix::identity(n, n),
            weight,
        });
        // odometer, last axis fastest
        for a in (0..n).rev() {
            idx[a] += 1;
            if idx[a] < rules[a].nodes.len() {
                continue 'outer;
            }
            idx[a] = 0;
        }
        break;
    }

    let boundary = if p.periodic {
        None
    } else {
        let mut face_nodes = Vec::new();
        let mut elements = Vec::new();
        for axis in 0..n {
            for side in [0usize, 1] {
                let start = face_nodes.len();
                let others: Vec<usize> = (0..n).filter(|&b| b != axis).collect();
                let fixed = if side == 0 { p.lo[axis] } else { p.hi[axis] };
                let outward = if side == 0 { -1.0 } else { 1.0 };
                let mut idx = vec![0usize; others.len()];
                'face: loop {
                    let mut position = vec![0.0; n];
                    position[axis] = fixed;
                    let mut weight = 1.0;
                    for (slot, &b) in others.iter().enumerate() {
                        position[b] = rules[b].nodes[idx[slot]];
                        weight *= rules[b].weights[idx[slot]];
                    }
                    let mut frame = DMatrix::zeros(n, n); // n-1 tangents + companion
                    for (slot, &b) in others.iter().enumerate() {
                        frame[(b, slot)] = 1.0;
                    }
                    frame[(axis, n - 1)] = outward;
                    face_nodes.push(MaterialNode {
                        ref_coords: position.clone(),
                        position,
                        frame,
                        weight,
                    });
                    for slot in (0..others.len()).rev() {
                        idx[slot] += 1;
                        if idx[slot] < rules[others[slot]].nodes.len() {
                            continue 'face;
                        }
                        idx[slot] = 0;
                    }
                    break;
                }
                let side_sign = if side == 0 { -1.0 } else { 1.0 };
                let orientation = side_sign * if axis % 2 == 0 { 1.0 } else { -1.0 };
                elements.push(ElementRange {
                    nodes: start..face_nodes.len(),
                    orientation,
                });
            }
        }
        Some(SurfaceMesh {
            sdim: n - 1,
            adim: n,
            closed: true,
            frame_cols: n,
            nodes: face_nodes,
            elements,
            boundary: None,
        })
    };

    let mut mesh = whole_mesh(n, n, p.periodic, n, nodes, boundary);
    mesh.closed = p.periodic;
    if p.rotate != 0.0 {
        if n != 2 {
            return Err(Error::Invalid(format!(
                "box rotation applies to planar boxes, not dimension {n}"
            )));
        }
        let center = [
            0.5 * (p.lo[0] + p.hi[0]),
            0.5 * (p.lo[1] + p.hi[1]),
        ];
        mesh.rotate_2d(p.rotate, &center)?;
    }
    Ok(mesh)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallParams {
    #[serde(default = "center3")]
    pub center: Vec<f64>,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "default_box_panels")]
    pub radial_panels: usize,
    #[serde(default = "default_order")]
    pub radial_order: usize,
    #[serde(default = "default_box_panels")]
    pub polar_panels: usize,
    #[serde(default = "default_order")]
    pub polar_order: usize,
    #[serde(default = "default_sphere_azimuth")]
    pub azimuth_panels: usize,
    #[serde(default = "default_order")]
    pub azimuth_order: usize,
}

/// Solid ball in spherical coordinates; boundary is its sphere with the
/// radial companion.
pub fn ball(p: &BallParams) -> Result<SurfaceMesh> {
    check_center(&p.center, 3)?;
    if p.center.len() != 3 {
        return Err(Error::Dimension("balls live in three dimensions".into()));
    }
    check_positive(p.radius, "radius")?;
    let radial = composite_gl(p.radial_panels, p.radial_order, 0.0, p.radius)?;
    let polar = composite_gl(p.polar_panels, p.polar_order, 0.0, PI)?;
    let azimuth = composite_gl(p.azimuth_panels, p.azimuth_order, 0.0, 2.0 * PI)?;

    let mut nodes =
        Vec::with_capacity(radial.nodes.len() * polar.nodes.len() * azimuth.nodes.len());
    for (&rho, &wr) in radial.nodes.iter().zip(&radial.weights) {
        for (&theta, &wt) in polar.nodes.iter().zip(&polar.weights) {
            for (&phi, &wp) in azimuth.nodes.iter().zip(&azimuth.weights) {
                let (st, ct) = theta.sin_cos();
                let (sp, cp) = phi.sin_cos();
                let radial_dir = [st * cp, st * sp, ct];
                let mut position = p.center.to_vec();
                for i in 0..3 {
                    position[i] += rho * radial_dir[i];
                }
                let mut frame = DMatrix::zeros(3, 3);
                for i in 0..3 {
                    frame[(i, 0)] = radial_dir[i];
                }
                frame[(0, 1)] = rho * ct * cp;
                frame[(1, 1)] = rho * ct * sp;
                frame[(2, 1)] = -rho * st;
                frame[(0, 2)] = -rho * st * sp;
                frame[(1, 2)] = rho * st * cp;
                nodes.push(MaterialNode {
                    position,
                    frame,
                    weight: wr * wt * wp,
                    ref_coords: vec![rho, theta, phi],
                });
            }
        }
    }

    let shell = sphere_grid(&p.center, p.radius, &polar, &azimuth, true);
    let boundary = whole_mesh(2, 3, true, 3, shell, None);
    Ok(whole_mesh(3, 3, false, 3, nodes, Some(boundary)))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplexParams {
    pub vertices: Vec<Vec<f64>>,
    #[serde(default = "default_simplex_k")]
    pub refinement: usize,
}

fn default_simplex_k() -> usize {
    3
}

/// Affine simplex spanned by s+1 vertices, with simplex quadrature exact
/// through degree 2*refinement + 1. Facet orientations are solved at build
/// time so the outward-companion wedge identity holds on every face.
pub fn simplex_patch(p: &SimplexParams) -> Result<SurfaceMesh> {
    let s = p.vertices.len().saturating_sub(1);
    if s == 0 {
        return Err(Error::Invalid(
            "a simplex needs at least two vertices".into(),
        ));
    }
    let n = p.vertices[0].len();
    for v in &p.vertices {
        if v.len() != n {
            return Err(Error::Dimension(
                "simplex vertices of mixed lengths".into(),
            ));
        }
    }
    if s > n || n > crate::geom::multi_index::MAX_DIM {
        return Err(Error::Dimension(format!(
            "{}-simplex in ambient dimension {n}",
            s
        )));
    }

    let edges = |verts: &[Vec<f64>]| -> DMatrix<f64> {
        DMatrix::from_fn(n, verts.len() - 1, |i, j| verts[j + 1][i] - verts[0][i])
    };
    let map_rule = |verts: &[Vec<f64>], k: usize| -> Result<Vec<MaterialNode>> {
        let dim = verts.len() - 1;
        let rule = simplex_rule(dim, k)?;
        let e = edges(verts);
        Ok(rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(xi, &w)| {
                let mut position = verts[0].clone();
                for (j, &c) in xi.iter().enumerate() {
                    for i in 0..n {
                        position[i] += c * e[(i, j)];
                    }
                }
                MaterialNode {
                    position,
                    frame: e.clone(),
                    weight: w,
                    ref_coords: xi.clone(),
                }
            })
            .collect())
    };

    let parent_frame = edges(&p.vertices);
    let metric = MetricChart::euclidean(n);
    let centroid: Vec<f64> = (0..n)
        .map(|i| p.vertices.iter().map(|v| v[i]).sum::<f64>() / (s as f64 + 1.0))
        .collect();
    let parent_eps = surface_volume_tensors(&metric, &centroid, &parent_frame, 1.0)?.eps_surface;

    let nodes = map_rule(&p.vertices, p.refinement)?;

    // facets: drop one vertex, keep the rest in order
    let mut face_nodes = Vec::new();
    let mut elements = Vec::new();
    for omit in 0..=s {
        let remaining: Vec<Vec<f64>> = (0..=s)
            .filter(|&j| j != omit)
            .map(|j| p.vertices[j].clone())
            .collect();
        let face_centroid: Vec<f64> = (0..n)
            .map(|i| remaining.iter().map(|v| v[i]).sum::<f64>() / s as f64)
            .collect();
        let companion: Vec<f64> = (0..n)
            .map(|i| face_centroid[i] - p.vertices[omit][i])
            .collect();

        let tangents = edges(&remaining);
        let n_hat = unit_normal_in_surface(&metric, &face_centroid, &tangents, &companion)?;
        let eps_face = if s == 1 {
            AltTensor::scalar(n, 1.0)
        } else {
            surface_volume_tensors(&metric, &face_centroid, &tangents, 1.0)?.eps_surface
        };
        let sealed = AltTensor::vector(&n_hat, Variance::Contravariant).wedge(&eps_face)?;
        let q = sealed.pairing(&metric.flat(&parent_eps, &face_centroid)?)?;
        let orientation = if q > 0.0 { 1.0 } else { -1.0 };

        let start = face_nodes.len();
        for mut node in map_rule(&remaining, p.refinement)? {
            let mut frame = DMatrix::zeros(n, s);
            for j in 0..(s - 1) {
                for i in 0..n {
                    frame[(i, j)] = node.frame[(i, j)];
                }
            }
            for i in 0..n {
                frame[(i, s - 1)] = companion[i];
            }
            node.frame = frame;
            face_nodes.push(node);
        }
        elements.push(ElementRange {
            nodes: start..face_nodes.len(),
            orientation,
        });
    }
    let boundary = SurfaceMesh {
        sdim: s - 1,
        adim: n,
        closed: true,
        frame_cols: s,
        nodes: face_nodes,
        elements,
        boundary: None,
    };

    Ok(whole_mesh(s, n, false, s, nodes, Some(boundary)))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductParams {
    pub factors: Vec<MeshSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub builder: String,
    #[serde(default = "empty_params")]
    pub params: serde_json::Value,
}

fn empty_params() -> serde_json::Value {
    serde_json::json!({})
}

/// Cartesian product of closed meshes on disjoint coordinate blocks.
pub fn product(p: &ProductParams) -> Result<SurfaceMesh> {
    if p.factors.len() < 2 {
        return Err(Error::Invalid("a product needs at least two factors".into()));
    }
    let meshes: Vec<SurfaceMesh> = p
        .factors
        .iter()
        .map(|spec| build_mesh(&spec.builder, &spec.params))
        .collect::<Result<_>>()?;
    for m in &meshes {
        if !m.closed {
            return Err(Error::Invalid(
                "product factors must be closed meshes".into(),
            ));
        }
    }
    let adim: usize = meshes.iter().map(|m| m.adim).sum();
    let sdim: usize = meshes.iter().map(|m| m.sdim).sum();
    if adim > crate::geom::multi_index::MAX_DIM {
        return Err(Error::Dimension(format!(
            "product ambient dimension {adim} exceeds 6"
        )));
    }

    let mut nodes = Vec::new();
    let mut elements = Vec::new();
    let mut el_idx = vec![0usize; meshes.len()];
    'elements: loop {
        let start = nodes.len();
        let mut orientation = 1.0;
        let ranges: Vec<_> = meshes
            .iter()
            .zip(&el_idx)
            .map(|(m, &e)| {
                orientation *= m.elements[e].orientation;
                m.elements[e].nodes.clone()
            })
            .collect();
        let mut node_idx: Vec<usize> = ranges.iter().map(|r| r.start).collect();
        'nodes: loop {
            let mut position = Vec::with_capacity(adim);
            let mut ref_coords = Vec::new();
            let mut weight = 1.0;
            let mut frame = DMatrix::zeros(adim, sdim);
            let mut row0 = 0;
            let mut col0 = 0;
            for (m, &ni) in meshes.iter().zip(&node_idx) {
                let node = &m.nodes[ni];
                position.extend_from_slice(&node.position);
                ref_coords.extend_from_slice(&node.ref_coords);
                weight *= node.weight;
                for c in 0..m.sdim {
                    for r in 0..m.adim {
                        frame[(row0 + r, col0 + c)] = node.frame[(r, c)];
                    }
                }
                row0 += m.adim;
                col0 += m.sdim;
            }
            nodes.push(MaterialNode {
                position,
                frame,
                weight,
                ref_coords,
            });
            for slot in (0..meshes.len()).rev() {
                node_idx[slot] += 1;
                if node_idx[slot] < ranges[slot].end {
                    continue 'nodes;
                }
                node_idx[slot] = ranges[slot].start;
            }
            break;
        }
        elements.push(ElementRange {
            nodes: start..nodes.len(),
            orientation,
        });
        for slot in (0..meshes.len()).rev() {
            el_idx[slot] += 1;
            if el_idx[slot] < meshes[slot].elements.len() {
                continue 'elements;
            }
            el_idx[slot] = 0;
        }
        break;
    }

    Ok(SurfaceMesh {
        sdim,
        adim,
        closed: true,
        frame_cols: sdim,
        nodes,
        elements,
        boundary: None,
    })
}

// ---------------------------------------------------------------------------

fn check_center(center: &[f64], min_dim: usize) -> Result<()> {
    if center.len() < min_dim || center.len() > crate::geom::multi_index::MAX_DIM {
        return Err(Error::Dimension(format!(
            "center of length {} (need {min_dim}..=6)",
            center.len()
        )));
    }
    Ok(())
}

fn check_positive(v: f64, what: &str) -> Result<()> {
    if !(v > 0.0) {
        return Err(Error::Invalid(format!("{what} must be positive, got {v}")));
    }
    Ok(())
}

pub fn builder_names() -> &'static [&'static str] {
    &[
        "circle", "open_arc", "disk", "sphere", "torus", "box", "ball", "simplex", "product",
    ]
}

fn parse<T: serde::de::DeserializeOwned>(params: &serde_json::Value) -> Result<T> {
    serde_json::from_value(params.clone())
        .map_err(|e| Error::Invalid(format!("mesh parameters: {e}")))
}

pub fn build_mesh(builder: &str, params: &serde_json::Value) -> Result<SurfaceMesh> {
    let mesh = match builder {
        "circle" => circle(&parse(params)?)?,
        "open_arc" => open_arc(&parse(params)?)?,
        "disk" => disk(&parse(params)?)?,
        "sphere" => sphere(&parse(params)?)?,
        "torus" => torus(&parse(params)?)?,
        "box" => box_region(&parse(params)?)?,
        "ball" => ball(&parse(params)?)?,
        "simplex" => simplex_patch(&parse(params)?)?,
        "product" => product(&parse(params)?)?,
        other => {
            return Err(Error::Invalid(format!(
                "unknown mesh builder `{other}`; available: {}",
                builder_names().join(", ")
            )))
        }
    };
    mesh.validate()?;
    Ok(mesh)
}
