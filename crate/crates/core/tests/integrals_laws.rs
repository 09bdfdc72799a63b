//! The law side of the integrals: time derivatives of material-surface
//! values against their boundary fluxes, the transported boundary
//! quantities, spanning-surface constants, and the integration-by-parts
//! rearrangements. Time derivatives come from a five-point stencil over
//! advected copies of the mesh, so their error is fourth order in dt.

use std::f64::consts::PI;
use std::sync::Arc;

use serde_json::json;

use vortint_core::advect::{advect_mesh, build_mesh, step_all, SurfaceMesh, TimeGrid};
use vortint_core::flows::{self, EnergySign, FlowField};
use vortint_core::integrals::{
    boundary_conditions, enstrophy, enstrophy_rearranged, entropy_circ_even,
    entropy_circ_even_rearranged, entropy_circ_odd, entropy_circ_odd_rearranged, helicity,
    lemma_transport_check, spanning_constant, EntropyWeight, WeightFn,
};
use vortint_core::util::central_diff4;

fn flow(name: &str, params: serde_json::Value) -> Arc<dyn FlowField> {
    flows::build(name, &params).unwrap()
}

fn mesh(builder: &str, params: serde_json::Value) -> SurfaceMesh {
    build_mesh(builder, &params).unwrap()
}

fn close(got: f64, want: f64, tol: f64) {
    assert!(
        (got - want).abs() <= tol * want.abs().max(1.0),
        "got {got}, want {want} (tol {tol})"
    );
}

/// Value of the integral on the mesh advected from time 0 to time h,
/// in two substeps so the trajectory error stays below the stencil error.
fn advected_value(
    m0: &SurfaceMesh,
    f: &dyn FlowField,
    h: f64,
    eval: &dyn Fn(&SurfaceMesh, f64) -> f64,
) -> f64 {
    let mut m = m0.clone();
    let sub = h / 2.0;
    step_all(f, &mut m, 0.0, sub).unwrap();
    step_all(f, &mut m, sub, sub).unwrap();
    eval(&m, h)
}

/// d/dt of the material-surface value at t = 0.
fn material_rate(
    m0: &SurfaceMesh,
    f: &dyn FlowField,
    dt: f64,
    eval: &dyn Fn(&SurfaceMesh, f64) -> f64,
) -> f64 {
    central_diff4(|h| advected_value(m0, f, h, eval), 0.0, dt)
}

fn linear_stratified_2d(entropy_slope: f64) -> Arc<dyn FlowField> {
    flow(
        "stratified_shear",
        json!({
            "dim": 2,
            "gamma": 1.4,
            "p0": 1.0,
            "shear": {"kind": "linear", "slope": 1.0, "offset": 0.0},
            "entropy": {"kind": "linear", "slope": entropy_slope, "offset": 0.0},
        }),
    )
}

fn linear_stratified_3d() -> Arc<dyn FlowField> {
    flow(
        "stratified_shear",
        json!({
            "dim": 3,
            "gamma": 1.4,
            "p0": 1.0,
            "shear": {"kind": "linear", "slope": 1.0, "offset": 0.0},
            "entropy": {"kind": "linear", "slope": 0.8, "offset": 0.1},
        }),
    )
}

// ---------------------------------------------------------------------------
// flux balances

#[test]
fn energy_difference_drives_an_open_line_integral() {
    // A compressible vortex with nonzero internal energy separates the two
    // sign choices: the head with -e balances the line-integral rate, the
    // head with +e does not.
    let f = flow("isentropic_vortex", json!({}));
    let m = mesh(
        "open_arc",
        json!({"center": [0.3, 0.0], "radius": 0.8, "theta0": 0.0, "theta1": 2.356194490192345}),
    );

    let rate = material_rate(&m, f.as_ref(), 0.01, &|m, t| {
        helicity(m, f.as_ref(), t, EnergySign::Minus).unwrap().value
    });

    let minus = helicity(&m, f.as_ref(), 0.0, EnergySign::Minus).unwrap();
    let plus = helicity(&m, f.as_ref(), 0.0, EnergySign::Plus).unwrap();
    let scale = rate.abs().max(minus.flux.abs()).max(1.0);
    assert!(
        (rate - minus.flux).abs() <= 1e-5 * scale,
        "rate {rate} vs flux {}",
        minus.flux
    );
    assert!(
        (rate - plus.flux).abs() >= 1e-3 * scale,
        "the +e head should not balance: rate {rate} vs flux {}",
        plus.flux
    );
}

#[test]
fn helicity_flux_balances_on_a_half_box() {
    let f = flow("abc", json!({}));
    let m = mesh(
        "box",
        json!({
            "lo": [0.0, 0.0, 0.0],
            "hi": [2.0 * PI, 2.0 * PI, PI],
            "panels": 3,
            "order": 6,
        }),
    );
    let rate = material_rate(&m, f.as_ref(), 0.005, &|m, t| {
        helicity(m, f.as_ref(), t, EnergySign::Minus).unwrap().value
    });
    let flux = helicity(&m, f.as_ref(), 0.0, EnergySign::Minus).unwrap().flux;
    let scale = rate.abs().max(flux.abs()).max(1.0);
    assert!(
        (rate - flux).abs() <= 1e-5 * scale,
        "rate {rate} vs flux {flux}"
    );
}

#[test]
fn entropy_flux_degenerates_when_entropy_rides_the_shear_axis() {
    // With S and U both functions of y alone, the boundary flux form is an
    // exact one-form in y: it integrates to zero around any closed rim, and
    // the surface value is exactly conserved. The check still runs the full
    // machinery and must land on the noise floor.
    let f = flow("stratified_shear", json!({"dim": 2}));
    let m = mesh(
        "box",
        json!({"lo": [0.3, 0.3], "hi": [2.3, 1.9], "panels": 4, "order": 5}),
    );
    let weight = WeightFn::Power { k: 2 };

    let out = entropy_circ_even(&m, f.as_ref(), 0.0, &weight).unwrap();
    // S = 0.5 sin y against vorticity -cos y: -L [ (0.5 sin y)^2 sin'... ]
    let expect = -2.0 * 0.25 * (1.9f64.sin().powi(3) - 0.3f64.sin().powi(3)) / 3.0;
    close(out.value, expect, 1e-12);
    assert!(
        out.flux.abs() <= 1e-12 * out.value.abs().max(1.0),
        "flux {}",
        out.flux
    );

    let rate = material_rate(&m, f.as_ref(), 0.01, &|m, t| {
        entropy_circ_even(m, f.as_ref(), t, &weight).unwrap().value
    });
    assert!(
        rate.abs() <= 1e-6 * out.value.abs().max(1.0),
        "rate {rate}"
    );

    // Long-haul conservation along the material surface.
    let mut moved = m.clone();
    advect_mesh(f.as_ref(), &mut moved, 0.0, 0.005, 40).unwrap();
    let later = entropy_circ_even(&moved, f.as_ref(), 0.2, &weight).unwrap();
    close(later.value, out.value, 1e-8);
}

#[test]
fn non_isentropic_flow_breaks_the_helicity_balance() {
    // Entropy stratification feeds the transport of u through an extra
    // term the energy head does not see; the flux-corrected drift must not
    // vanish, and it measures that entropy source.
    let f = linear_stratified_3d();
    let m = mesh(
        "box",
        json!({"lo": [0.0, 0.0, 0.0], "hi": [1.0, 1.0, 1.0], "panels": 3, "order": 4}),
    );
    let rate = material_rate(&m, f.as_ref(), 0.01, &|m, t| {
        helicity(m, f.as_ref(), t, EnergySign::Minus).unwrap().value
    });
    let flux = helicity(&m, f.as_ref(), 0.0, EnergySign::Minus).unwrap().flux;
    let scale = rate.abs().max(flux.abs()).max(1.0);
    assert!(
        (rate - flux).abs() >= 1e-3 * scale,
        "rate {rate} unexpectedly balances flux {flux}"
    );
}

// ---------------------------------------------------------------------------
// spanning surfaces

#[test]
fn spanning_surface_ties_interior_vorticity_to_rim_circulation() {
    // Rigid rotation: interior vorticity integral and rim circulation are
    // both 2 w pi r^2 in closed form.
    let rigid = flow("rigid_rotation", json!({"omega": 0.5}));
    let disk = mesh("disk", json!({"center": [0.3, -0.4], "radius": 1.1}));
    let sc = spanning_constant(&disk, rigid.as_ref(), 0.0, &WeightFn::Const { value: 1.0 })
        .unwrap();
    let expect = 2.0 * 0.5 * PI * 1.1 * 1.1;
    close(sc.interior, expect, 1e-10);
    close(sc.boundary.unwrap(), expect, 1e-10);

    // Cellular flow: no closed form needed, the two quadratures must agree.
    let tg = flow("taylor_green", json!({}));
    let disk = mesh("disk", json!({"center": [0.4, 0.2], "radius": 0.8}));
    let sc = spanning_constant(&disk, tg.as_ref(), 0.0, &WeightFn::Const { value: 1.0 })
        .unwrap();
    let b = sc.boundary.unwrap();
    assert!(
        (sc.interior - b).abs() <= 1e-10 * b.abs().max(1.0),
        "interior {} vs rim {b}",
        sc.interior
    );

    // A non-constant weight has no rim counterpart; the interior is the
    // weighted vorticity integral itself.
    let sc = spanning_constant(&disk, tg.as_ref(), 0.0, &WeightFn::Identity).unwrap();
    assert!(sc.boundary.is_none());
    assert_eq!(
        sc.interior,
        enstrophy(&disk, tg.as_ref(), 0.0, &WeightFn::Identity)
            .unwrap()
            .value
    );
}

#[test]
fn spanning_surface_ties_entropy_weight_to_shell_integral() {
    // Ball in stratified shear: interior integral of S dS ^ w against the
    // shell integral of (S^2/2) w.
    let f = linear_stratified_3d();
    let ball = mesh(
        "ball",
        json!({
            "center": [0.0, 0.0, 0.2],
            "radius": 0.9,
            "polar_panels": 6,
            "polar_order": 8,
        }),
    );
    let sc = spanning_constant(&ball, f.as_ref(), 0.0, &WeightFn::Identity).unwrap();
    let volume = 4.0 / 3.0 * PI * 0.9f64.powi(3);
    // -S' U' = -0.8 against mean S over the ball = 0.8 z0 + 0.1 = 0.26.
    close(sc.interior, -0.8 * 0.26 * volume, 1e-9);
    let b = sc.boundary.unwrap();
    assert!(
        (sc.interior - b).abs() <= 1e-10 * b.abs().max(1.0),
        "interior {} vs shell {b}",
        sc.interior
    );

    // A curve spans its endpoints: the interior integral of f(S) dS is the
    // endpoint difference of the antiderivative.
    let f2 = linear_stratified_2d(1.0);
    let arc = mesh(
        "open_arc",
        json!({"center": [0.2, -0.1], "radius": 1.0, "theta0": 0.4, "theta1": 2.2}),
    );
    let sc = spanning_constant(&arc, f2.as_ref(), 0.0, &WeightFn::Power { k: 2 }).unwrap();
    let s_at = |theta: f64| -0.1 + theta.sin();
    let expect = (s_at(2.2).powi(3) - s_at(0.4).powi(3)) / 3.0;
    close(sc.interior, expect, 1e-10);
    close(sc.boundary.unwrap(), expect, 1e-10);

    // Weights without a closed-form antiderivative keep the interior but
    // drop the boundary counterpart.
    let custom = WeightFn::Custom {
        f: Arc::new(|z| z),
        df: Arc::new(|_| 1.0),
    };
    let sc2 = spanning_constant(&arc, f2.as_ref(), 0.0, &custom).unwrap();
    assert!(sc2.boundary.is_none());
    let sc1 = spanning_constant(&arc, f2.as_ref(), 0.0, &WeightFn::Identity).unwrap();
    assert_eq!(sc2.interior, sc1.interior);
}

#[test]
fn spanning_needs_a_closed_boundary() {
    let tg = flow("taylor_green", json!({}));
    let torus_free = mesh(
        "box",
        json!({
            "lo": [0.0, 0.0],
            "hi": [2.0 * PI, 2.0 * PI],
            "panels": 2,
            "order": 4,
            "periodic": true,
        }),
    );
    let err = spanning_constant(
        &torus_free,
        tg.as_ref(),
        0.0,
        &WeightFn::Const { value: 1.0 },
    )
    .unwrap_err()
    .to_string();
    assert!(err.contains("boundary"), "{err}");

    let f2 = linear_stratified_2d(1.0);
    let mut arc = mesh("open_arc", json!({"center": [0.0, 0.0], "radius": 1.0}));
    if let Some(b) = arc.boundary.as_mut() {
        b.closed = false;
    }
    let err = spanning_constant(&arc, f2.as_ref(), 0.0, &WeightFn::Identity)
        .unwrap_err()
        .to_string();
    assert!(err.contains("closed"), "{err}");
}

// ---------------------------------------------------------------------------
// boundary conditions and their transport

#[test]
fn boundary_conditions_report_the_sup_norms() {
    // Irrotational stream: both flavors vanish identically.
    let u3 = flow("uniform", json!({"velocity": [0.3, -0.2, 0.1]}));
    let ball = mesh("ball", json!({"center": [0.0, 0.0, 0.0], "radius": 1.0}));
    let bc = boundary_conditions(&ball, u3.as_ref(), 0.25).unwrap();
    assert_eq!(bc.t, 0.25);
    assert!(bc.helicity_bc.unwrap() < 1e-14);
    assert!(bc.entropy_bc.is_none());

    let u2 = flow("uniform", json!({"velocity": [0.4, -0.3]}));
    let disk = mesh("disk", json!({"center": [0.0, 0.0], "radius": 1.0}));
    let bc = boundary_conditions(&disk, u2.as_ref(), 0.0).unwrap();
    assert!(bc.entropy_bc.unwrap() < 1e-14);
    assert!(bc.helicity_bc.is_none());

    // Shear with slope 2: the vorticity scalar on the two z-normal faces is
    // exactly the slope, the other faces see none of it.
    let f3 = flow(
        "stratified_shear",
        json!({
            "dim": 3,
            "shear": {"kind": "linear", "slope": 2.0, "offset": 0.0},
            "entropy": {"kind": "linear", "slope": 0.8, "offset": 0.1},
        }),
    );
    let cube = mesh(
        "box",
        json!({"lo": [0.0, 0.0, 0.0], "hi": [1.0, 1.0, 1.0], "panels": 2, "order": 3}),
    );
    let bc = boundary_conditions(&cube, f3.as_ref(), 0.0).unwrap();
    close(bc.helicity_bc.unwrap(), 2.0, 1e-12);

    // In the plane the rim quantity aligns the edge direction with the
    // entropy gradient: the sup is the entropy slope on the vertical edges.
    let f2 = linear_stratified_2d(0.8);
    let rect = mesh(
        "box",
        json!({"lo": [0.0, 0.0], "hi": [1.0, 1.0], "panels": 2, "order": 3}),
    );
    let bc = boundary_conditions(&rect, f2.as_ref(), 0.0).unwrap();
    close(bc.entropy_bc.unwrap(), 0.8, 1e-12);

    let circle = mesh("circle", json!({"center": [0.0, 0.0], "radius": 1.0}));
    let err = boundary_conditions(&circle, u2.as_ref(), 0.0)
        .unwrap_err()
        .to_string();
    assert!(err.contains("closed"), "{err}");
}

#[test]
fn transported_boundary_quantity_obeys_the_log_derivative_law() {
    // Uniform flow: the quantity and the surface divergence both vanish.
    let u2 = flow("uniform", json!({"velocity": [0.4, -0.3]}));
    let circle = mesh("circle", json!({"center": [0.0, 0.0], "radius": 1.0}));
    let grid = TimeGrid::new(0.0, 0.1, 0.025).unwrap();
    let res = lemma_transport_check(&circle, u2.as_ref(), &grid).unwrap();
    assert!(res < 1e-12, "residual {res}");

    // Plane shear: vertical edges tilt, and the alignment with the entropy
    // gradient decays exactly at rate -z div. The residual is pure stencil
    // error, second order in dt.
    let f2 = linear_stratified_2d(0.8);
    let rect = mesh(
        "box",
        json!({"lo": [0.0, 0.0], "hi": [1.0, 1.0], "panels": 2, "order": 3}),
    );
    let edges = rect.boundary.as_deref().unwrap();
    let coarse = lemma_transport_check(
        edges,
        f2.as_ref(),
        &TimeGrid::new(0.0, 0.4, 0.05).unwrap(),
    )
    .unwrap();
    let fine = lemma_transport_check(
        edges,
        f2.as_ref(),
        &TimeGrid::new(0.0, 0.4, 0.025).unwrap(),
    )
    .unwrap();
    assert!(coarse < 5e-3, "coarse residual {coarse}");
    let ratio = coarse / fine;
    assert!(
        (2.8..=5.7).contains(&ratio),
        "halving dt should cut the residual fourfold: {coarse} -> {fine}"
    );

    // Curved case: the vorticity scalar on an advected sphere.
    let abc = flow("abc", json!({}));
    let sphere = mesh(
        "sphere",
        json!({
            "center": [0.0, 0.0, 0.0],
            "radius": 1.0,
            "polar_panels": 2,
            "azimuth_panels": 4,
        }),
    );
    let coarse = lemma_transport_check(
        &sphere,
        abc.as_ref(),
        &TimeGrid::new(0.0, 0.08, 0.02).unwrap(),
    )
    .unwrap();
    let fine = lemma_transport_check(
        &sphere,
        abc.as_ref(),
        &TimeGrid::new(0.0, 0.08, 0.01).unwrap(),
    )
    .unwrap();
    assert!(coarse < 5e-3, "coarse residual {coarse}");
    let ratio = coarse / fine;
    assert!(
        (2.8..=5.7).contains(&ratio),
        "halving dt should cut the residual fourfold: {coarse} -> {fine}"
    );

    let err = lemma_transport_check(
        &circle,
        u2.as_ref(),
        &TimeGrid::new(0.0, 0.1, 0.1).unwrap(),
    )
    .unwrap_err()
    .to_string();
    assert!(err.contains("two steps"), "{err}");
}

// ---------------------------------------------------------------------------
// rearranged forms

#[test]
fn rearranged_enstrophy_matches() {
    let tg = flow("taylor_green", json!({}));
    let torus_free = mesh(
        "box",
        json!({
            "lo": [0.0, 0.0],
            "hi": [2.0 * PI, 2.0 * PI],
            "panels": 4,
            "order": 8,
            "periodic": true,
        }),
    );
    for weight in [
        WeightFn::Identity,
        WeightFn::Custom {
            f: Arc::new(|z: f64| (0.5 * z).exp()),
            df: Arc::new(|z: f64| 0.5 * (0.5 * z).exp()),
        },
    ] {
        let lhs = enstrophy(&torus_free, tg.as_ref(), 0.0, &weight).unwrap().value;
        let rhs = enstrophy_rearranged(&torus_free, tg.as_ref(), 0.0, &weight).unwrap();
        assert!(
            (lhs - rhs).abs() <= 1e-8 * lhs.abs().max(1.0),
            "{lhs} vs {rhs} for {weight:?}"
        );
    }

    // Open surface: the parts integral picks up the rim term.
    let disk = mesh("disk", json!({"center": [0.4, 0.2], "radius": 0.9}));
    let lhs = enstrophy(&disk, tg.as_ref(), 0.0, &WeightFn::Identity).unwrap().value;
    let rhs = enstrophy_rearranged(&disk, tg.as_ref(), 0.0, &WeightFn::Identity).unwrap();
    assert!(
        (lhs - rhs).abs() <= 1e-8 * lhs.abs().max(1.0),
        "{lhs} vs {rhs}"
    );
}

#[test]
fn rearranged_entropy_circulation_matches() {
    // A sphere in three-dimensional stratified shear keeps the shear and
    // entropy axes apart, which makes the closed-surface integral nonzero.
    let f = flow("stratified_shear", json!({"dim": 3}));
    let sphere = mesh(
        "sphere",
        json!({
            "center": [0.3, 0.2, -0.1],
            "radius": 1.2,
            "polar_panels": 6,
            "polar_order": 8,
            "azimuth_panels": 8,
            "azimuth_order": 8,
        }),
    );
    let weight = WeightFn::Power { k: 2 };
    let lhs = entropy_circ_even(&sphere, f.as_ref(), 0.0, &weight).unwrap().value;
    let rhs = entropy_circ_even_rearranged(&sphere, f.as_ref(), 0.0, &weight).unwrap();
    assert!(lhs.abs() > 1e-3, "degenerate case: {lhs}");
    assert!(
        (lhs - rhs).abs() <= 1e-8 * lhs.abs().max(1.0),
        "{lhs} vs {rhs}"
    );

    let tg = flow("taylor_green", json!({}));
    let disk = mesh("disk", json!({"center": [0.0, 0.0], "radius": 1.0}));
    assert!(entropy_circ_even_rearranged(&disk, tg.as_ref(), 0.0, &weight).is_err());
}

#[test]
fn rearranged_odd_entropy_circulation_matches() {
    let f = flow("stratified_shear", json!({"dim": 3}));
    let torus_free = mesh(
        "box",
        json!({
            "lo": [0.0, 0.0, 0.0],
            "hi": [2.0 * PI, 2.0 * PI, 2.0 * PI],
            "panels": 3,
            "order": 8,
            "periodic": true,
        }),
    );
    let by_ratio = EntropyWeight {
        of_entropy: None,
        of_vorticity: Some(WeightFn::Identity),
    };
    let lhs = entropy_circ_odd(&torus_free, f.as_ref(), 0.0, &by_ratio).unwrap().value;
    let rhs =
        entropy_circ_odd_rearranged(&torus_free, f.as_ref(), 0.0, &WeightFn::Identity).unwrap();
    assert!(lhs.abs() > 1e-3, "degenerate case: {lhs}");
    assert!(
        (lhs - rhs).abs() <= 1e-8 * lhs.abs().max(1.0),
        "{lhs} vs {rhs}"
    );

    // The circulation ratio does not exist in even ambient dimension.
    let tg = flow("taylor_green", json!({}));
    let arc = mesh("open_arc", json!({"center": [0.0, 0.0], "radius": 1.0}));
    assert!(entropy_circ_odd_rearranged(&arc, tg.as_ref(), 0.0, &WeightFn::Identity).is_err());
}
