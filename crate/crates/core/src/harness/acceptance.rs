//! Built-in acceptance suite: the headline conservation guarantees measured
//! end to end, one row per claim. The CLI exposes it as
//! `vortint suite paper-acceptance`; the integration tests run the same
//! rows. `quick` trades resolution and horizon for speed, with the changed
//! tolerances spelled out in each row's note.

use std::sync::Arc;
use std::sync::OnceLock;
use std::time::Instant;

use serde_json::json;

use crate::advect::{build_mesh, SurfaceMesh, TimeGrid};
use crate::error::{Error, Result};
use crate::flows::{self, euler_residual, sample_points, EnergySign, FlowField};
use crate::integrals::{
    circulation, enstrophy_rearranged, entropy_circ_even_rearranged,
    entropy_circ_odd_rearranged, evaluate, helicity, lemma_transport_check, manifold_vorticity,
    spanning_constant, vorticity_of_frame, FunctionalValue, IntegralSpec, WeightFn,
};
use crate::spectral::{InitialCondition, SpectralFlow, SpectralFlowParams};
use crate::util::fit_order;

use super::run::{drift_abs, flux_balance_err, sample_series, DRIFT_REL_FLOOR};

/// One suite row. `measured` is compared against `tolerance` from below
/// unless `lower_bound` flips the sense (the negative control wants a drift
/// that stays LARGE). Secondary checks fold into `passed`, with their
/// numbers in `note`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CriterionRow {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub lower_bound: bool,
    pub passed: bool,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub quick: bool,
    pub note: String,
}

impl CriterionRow {
    pub fn line(&self) -> String {
        format!(
            "{} {:<18} measured={:<12.3e} tol={}{:<9.1e} [{:6.2}s/{:.0}s] {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            if self.lower_bound { ">" } else { "<" },
            self.tolerance,
            self.seconds,
            self.budget_seconds,
            self.note
        )
    }
}

type CriterionFn = fn(bool) -> Result<CriterionRow>;

pub const CRITERIA: [(&str, CriterionFn); 13] = [
    ("kelvin", kelvin),
    ("kelvin-compressible", kelvin_compressible),
    ("helicity-closed", helicity_closed),
    ("helicity-flux", helicity_flux),
    ("enstrophy-boundary", enstrophy_boundary),
    ("spectral-enstrophy", spectral_enstrophy),
    ("entropy-even-flux", entropy_even_flux),
    ("entropy-odd", entropy_odd),
    ("transport-lemma", transport_lemma),
    ("reductions", reductions),
    ("spanning", spanning),
    ("residuals", residuals),
    ("negative-control", negative_control),
];

pub fn criterion_names() -> Vec<&'static str> {
    CRITERIA.iter().map(|(n, _)| *n).collect()
}

/// Run one criterion by name, timing it and enforcing its runtime budget.
pub fn run_criterion(name: &str, quick: bool) -> Result<CriterionRow> {
    let f = CRITERIA
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, f)| *f)
        .ok_or_else(|| {
            Error::config(
                "suite.only",
                format!("unknown criterion `{name}`; available: {}", criterion_names().join(", ")),
            )
        })?;
    let start = Instant::now();
    let mut row = f(quick)?;
    row.seconds = start.elapsed().as_secs_f64();
    row.quick = quick;
    if row.seconds > row.budget_seconds {
        row.passed = false;
        row.note = format!("over the {:.0}s budget; {}", row.budget_seconds, row.note);
    }
    Ok(row)
}

/// The whole suite (or one filtered row), in declaration order.
pub fn run_suite(quick: bool, only: Option<&str>) -> Result<Vec<CriterionRow>> {
    match only {
        Some(name) => Ok(vec![run_criterion(name, quick)?]),
        None => CRITERIA
            .iter()
            .map(|(name, _)| run_criterion(name, quick))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// small shared pieces

fn flow(name: &str, params: serde_json::Value) -> Result<Arc<dyn FlowField>> {
    flows::build(name, &params)
}

fn mesh(builder: &str, params: serde_json::Value) -> Result<SurfaceMesh> {
    build_mesh(builder, &params)
}

fn series(
    m: &SurfaceMesh,
    f: &dyn FlowField,
    spec: &IntegralSpec,
    t0: f64,
    t1: f64,
    dt: f64,
    every: usize,
) -> Result<Vec<FunctionalValue>> {
    let grid = TimeGrid::new(t0, t1, dt)?;
    Ok(sample_series(m, f, std::slice::from_ref(spec), &grid, every)?.remove(0))
}

fn judged_drift(series: &[FunctionalValue]) -> f64 {
    let v0 = series[0].value.abs();
    if v0 > DRIFT_REL_FLOOR {
        drift_abs(series) / v0
    } else {
        drift_abs(series)
    }
}

fn row(name: &'static str, measured: f64, tolerance: f64, budget: f64) -> CriterionRow {
    CriterionRow {
        name,
        measured,
        tolerance,
        lower_bound: false,
        passed: measured <= tolerance,
        seconds: 0.0,
        budget_seconds: budget,
        quick: false,
        note: String::new(),
    }
}

fn stratified2() -> Result<Arc<dyn FlowField>> {
    flow("stratified_shear", json!({"dim": 2}))
}

fn stratified3_linear() -> Result<Arc<dyn FlowField>> {
    flow(
        "stratified_shear",
        json!({
            "dim": 3,
            "shear": {"kind": "linear", "slope": 1.0, "offset": 0.0},
            "entropy": {"kind": "linear", "slope": 0.8, "offset": 0.1},
        }),
    )
}

// ---------------------------------------------------------------------------
// shared spectral flows
//
// One stored solve serves both spectral rows: snapshots kept every 5 steps,
// thinned by 2 for the documented every-10 baseline. The solve is cached for
// the process lifetime; its cost lands on whichever row runs first.

type SpectralPair = (Arc<SpectralFlow>, Arc<SpectralFlow>);

fn build_spectral_pair(n: usize, dt: f64) -> std::result::Result<SpectralPair, String> {
    let params = SpectralFlowParams {
        n,
        dt,
        t0: 0.0,
        t1: 1.0,
        snapshot_every: 5,
        ic: Some(InitialCondition::Random {
            seed: 7,
            band: [2.0, 4.0],
            amplitude: 0.8,
        }),
        checkpoint: None,
    };
    let fine = SpectralFlow::from_params(params).map_err(|e| e.to_string())?;
    let coarse = fine
        .trajectory()
        .thin(2)
        .and_then(SpectralFlow::from_trajectory)
        .map_err(|e| e.to_string())?;
    Ok((Arc::new(coarse), Arc::new(fine)))
}

/// (baseline cadence, halved cadence) spectral flows over t in [0, 1].
fn spectral_flows(quick: bool) -> Result<SpectralPair> {
    static FULL: OnceLock<std::result::Result<SpectralPair, String>> = OnceLock::new();
    static QUICK: OnceLock<std::result::Result<SpectralPair, String>> = OnceLock::new();
    let cell = if quick { &QUICK } else { &FULL };
    let (n, dt) = if quick { (64, 2e-3) } else { (128, 1e-3) };
    cell.get_or_init(|| build_spectral_pair(n, dt))
        .clone()
        .map_err(Error::Advection)
}

// ---------------------------------------------------------------------------
// 1. circulation of an advected loop

fn kelvin(quick: bool) -> Result<CriterionRow> {
    let f = flow("taylor_green", json!({}))?;
    let m = mesh(
        "circle",
        json!({"center": [std::f64::consts::PI, std::f64::consts::PI],
               "radius": 1.0, "panels": 32, "order": 8}),
    )?;
    let t1 = if quick { 0.2 } else { 1.0 };
    let spec = IntegralSpec::Circulation;
    let base = series(&m, f.as_ref(), &spec, 0.0, t1, 1e-3, 10)?;
    let drift = judged_drift(&base);

    // The centered loop conserves to roundoff at EVERY dt: the flow is
    // antisymmetric through (pi, pi), advection preserves antipodal node
    // pairs, and their quadrature contributions cancel. Fourth-order step
    // scaling is therefore exhibited on the same loop displaced off the
    // symmetry point, where truncation is visible; conservation still
    // applies to any material loop.
    let mut shifted = m.clone();
    shifted.translate(&[0.5, -0.3])?;
    let coarse = drift_abs(&series(&shifted, f.as_ref(), &spec, 0.0, t1, 2e-2, 1)?);
    let fine = drift_abs(&series(&shifted, f.as_ref(), &spec, 0.0, t1, 1e-2, 2)?);
    let ratio = coarse / fine.max(1e-300);

    let mut r = row("kelvin", drift, 1e-8, 5.0);
    r.passed &= (8.0..=32.0).contains(&ratio);
    r.note = format!(
        "zero-valued loop judged by absolute drift; value(0)={:.2e}; on the off-center copy dt halving at 2e-2 scales drift by {:.1} (want 8..32){}",
        base[0].value,
        ratio,
        if quick { "; quick: t1=0.2" } else { "" }
    );
    Ok(r)
}

// ---------------------------------------------------------------------------
// 2. same loop transport in a compressible flow

fn kelvin_compressible(quick: bool) -> Result<CriterionRow> {
    let f = flow("isentropic_vortex", json!({}))?;
    let m = mesh(
        "circle",
        json!({"center": [0.0, 0.0], "radius": 1.0, "panels": 32, "order": 8}),
    )?;
    let t1 = if quick { 0.25 } else { 1.0 };
    let base = series(&m, f.as_ref(), &IntegralSpec::Circulation, 0.0, t1, 1e-3, 10)?;
    let mut r = row("kelvin-compressible", judged_drift(&base), 1e-6, 10.0);
    r.note = format!(
        "loop riding the translating vortex; value(0)={:.6}{}",
        base[0].value,
        if quick { "; quick: t1=0.25" } else { "" }
    );
    Ok(r)
}

// ---------------------------------------------------------------------------
// 3. helicity constant on a closed 3-surface

fn helicity_closed(quick: bool) -> Result<CriterionRow> {
    let f = flow("boosted_abc", json!({"boost": [0.3, 0.2, 0.1]}))?;
    let tau = std::f64::consts::TAU;
    let (panels, t1) = if quick { (2, 0.1) } else { (3, 0.5) };
    let m = mesh(
        "box",
        json!({"lo": [0.0, 0.0, 0.0], "hi": [tau, tau, tau],
               "panels": panels, "order": 8, "periodic": true}),
    )?;
    let spec = IntegralSpec::Helicity {
        energy_sign: EnergySign::Minus,
    };
    let base = series(&m, f.as_ref(), &spec, 0.0, t1, 1e-3, 10)?;
    let want = 3.0 * tau.powi(3);
    let value_err = (base[0].value - want).abs() / want;
    let mut r = row("helicity-closed", judged_drift(&base), 1e-6, 60.0);
    r.passed &= value_err < 1e-4;
    r.note = format!(
        "value(0)={:.6e} vs 3(2pi)^3={:.6e}, rel err {:.1e} (want <1e-4); {} nodes{}",
        base[0].value,
        want,
        value_err,
        m.node_count(),
        if quick { "; quick: 16^3 nodes, t1=0.1" } else { "" }
    );
    Ok(r)
}

// ---------------------------------------------------------------------------
// 4. helicity flux balance on a half-box, second-order in the sample spacing

fn helicity_flux(quick: bool) -> Result<CriterionRow> {
    let f = flow("boosted_abc", json!({"boost": [0.3, 0.2, 0.1]}))?;
    let tau = std::f64::consts::TAU;
    let panels = if quick { 2 } else { 3 };
    let m = mesh(
        "box",
        json!({"lo": [0.0, 0.0, 0.0], "hi": [tau, tau, std::f64::consts::PI],
               "panels": panels, "order": 6}),
    )?;
    let spec = IntegralSpec::Helicity {
        energy_sign: EnergySign::Minus,
    };
    let t1 = 0.5;
    let dts = [1e-2, 5e-3, 2.5e-3];
    let mut errs = Vec::new();
    for &dt in &dts {
        let s = series(&m, f.as_ref(), &spec, 0.0, t1, dt, 10)?;
        errs.push(flux_balance_err(&s, 10.0 * dt).expect("three or more samples"));
    }
    let (order, r2, points) = fit_order(&dts, &errs);
    let mut r = row("helicity-flux", order, 2.3, 60.0);
    r.passed = (order - 2.0).abs() <= 0.3 && points == 3;
    r.note = format!(
        "balance err {:.2e} -> {:.2e} -> {:.2e} over dt {{1e-2, 5e-3, 2.5e-3}}, fit order {:.2} (want 2 +- 0.3, r2={:.4}){}",
        errs[0], errs[1], errs[2], order, r2,
        if quick { "; quick: 12^3 nodes" } else { "" }
    );
    r.tolerance = 2.3;
    Ok(r)
}

// ---------------------------------------------------------------------------
// 5. enstrophy with a boundary but no boundary term

fn enstrophy_boundary(quick: bool) -> Result<CriterionRow> {
    let f = stratified2()?;
    let m = mesh(
        "box",
        json!({"lo": [0.3, 0.3], "hi": [1.3, 1.3], "panels": 4, "order": 5}),
    )?;
    let t1 = if quick { 0.25 } else { 1.0 };
    let spec = IntegralSpec::Enstrophy {
        f: WeightFn::Power { k: 2 },
    };
    let base = series(&m, f.as_ref(), &spec, 0.0, t1, 1e-3, 10)?;
    let max_flux = base.iter().map(|s| s.flux.abs()).fold(0.0, f64::max);
    let mut r = row("enstrophy-boundary", judged_drift(&base), 1e-8, 5.0);
    r.passed &= max_flux == 0.0;
    r.note = format!(
        "open square, flux identically {:.1e}; value(0)={:.6}{}",
        max_flux,
        base[0].value,
        if quick { "; quick: t1=0.25" } else { "" }
    );
    Ok(r)
}

// ---------------------------------------------------------------------------
// 6. enstrophy on a disk advected through the stored square-box solve

fn spectral_enstrophy(quick: bool) -> Result<CriterionRow> {
    let (coarse, fine) = spectral_flows(quick)?;
    let pi = std::f64::consts::PI;
    let m = mesh(
        "disk",
        json!({"center": [pi, pi], "radius": 0.5,
               "radial_panels": 4, "radial_order": 4,
               "angular_panels": 8, "angular_order": 4}),
    )?;
    let spec = IntegralSpec::Enstrophy {
        f: WeightFn::Identity,
    };
    let (t1, dt) = if quick { (0.25, 2.5e-3) } else { (0.5, 2.5e-3) };
    let base = series(&m, coarse.as_ref(), &spec, 0.0, t1, dt, 10)?;
    let refined = series(&m, fine.as_ref(), &spec, 0.0, t1, dt, 10)?;
    let d_base = judged_drift(&base);
    let d_fine = judged_drift(&refined);
    let mut r = row("spectral-enstrophy", d_base, 1e-4, 180.0);
    r.passed &= d_fine < d_base;
    r.note = format!(
        "value(0)={:.6}; halving the snapshot cadence cuts drift {:.2e} -> {:.2e} (x{:.1}){}",
        base[0].value,
        d_base,
        d_fine,
        d_base / d_fine.max(1e-300),
        if quick { "; quick: 64^2 grid, t1=0.25" } else { "" }
    );
    Ok(r)
}

// ---------------------------------------------------------------------------
// 7. even entropy circulation: conserved, with a degenerate boundary term

fn entropy_even_flux(quick: bool) -> Result<CriterionRow> {
    let f = stratified2()?;
    let spec = IntegralSpec::EntropyCircEven {
        f: WeightFn::Identity,
    };

    // Tilted rectangle: the entropy differential is nonzero along every
    // edge, so each edge carries flux density; the closed sum still
    // vanishes because the flux form is a total differential of the
    // stratification coordinate. The balance error is therefore pure
    // numerical floor, and the second-order step-size fit below has no
    // physical signal to find in this flow family. Measured and reported
    // as found.
    let tilted = mesh(
        "box",
        json!({"lo": [0.3, 0.3], "hi": [1.8, 1.2], "panels": 4, "order": 6, "rotate": 0.5}),
    )?;
    let dts = [1e-2, 5e-3, 2.5e-3];
    let mut errs = Vec::new();
    for &dt in &dts {
        let s = series(&tilted, f.as_ref(), &spec, 0.0, 0.5, dt, 10)?;
        errs.push(flux_balance_err(&s, 10.0 * dt).expect("three or more samples"));
    }
    let (order, r2, _) = fit_order(&dts, &errs);

    // Axis-aligned rectangle: two edges ride entropy level lines and the
    // other two mirror each other through the shear, so the degeneracy is
    // structural and the value must hold to advection accuracy.
    let aligned = mesh(
        "box",
        json!({"lo": [0.3, 0.3], "hi": [2.3, 1.9], "panels": 4, "order": 6}),
    )?;
    let t1 = if quick { 0.25 } else { 1.0 };
    let base = series(&aligned, f.as_ref(), &spec, 0.0, t1, 1e-3, 10)?;
    let drift = judged_drift(&base);
    let max_flux = base.iter().map(|s| s.flux.abs()).fold(0.0, f64::max);

    let mut r = row("entropy-even-flux", order, 2.3, 10.0);
    r.passed = (order - 2.0).abs() <= 0.3 && drift < 1e-8 && max_flux < 1e-10;
    r.note = format!(
        "fit order {:.2} over balance errs {{{:.1e}, {:.1e}, {:.1e}}} (r2={:.3}): the flux integrand is exact along the stratification axis, so the closed-boundary flux vanishes identically and no dt^2 term exists to fit; aligned-rectangle drift {:.2e} (<1e-8) with sup|flux|={:.1e}{}",
        order, errs[0], errs[1], errs[2], r2, drift, max_flux,
        if quick { "; quick: t1=0.25" } else { "" }
    );
    Ok(r)
}

// ---------------------------------------------------------------------------
// 8. odd entropy circulation constant on a closed 3-box

fn entropy_odd(quick: bool) -> Result<CriterionRow> {
    let f = flow("stratified_shear", json!({"dim": 3}))?;
    let tau = std::f64::consts::TAU;
    let panels = if quick { 2 } else { 3 };
    let m = mesh(
        "box",
        json!({"lo": [0.0, 0.0, 0.0], "hi": [tau, tau, tau],
               "panels": panels, "order": 8, "periodic": true}),
    )?;
    let spec = IntegralSpec::EntropyCircOdd {
        f: crate::integrals::EntropyWeight {
            of_entropy: Some(WeightFn::Identity),
            of_vorticity: Some(WeightFn::Identity),
        },
    };
    let t1 = if quick { 0.2 } else { 1.0 };
    let base = series(&m, f.as_ref(), &spec, 0.0, t1, 1e-3, 10)?;
    let mut r = row("entropy-odd", judged_drift(&base), 1e-7, 60.0);
    r.note = format!(
        "weight S * (c/rho); value(0)={:.6e}; {} nodes{}",
        base[0].value,
        m.node_count(),
        if quick { "; quick: 16^3 nodes, t1=0.2" } else { "" }
    );
    Ok(r)
}

// ---------------------------------------------------------------------------
// 9. boundary-transport law residuals on advected loops

fn transport_lemma(quick: bool) -> Result<CriterionRow> {
    let horizon = if quick { 0.1 } else { 0.3 };
    let cases: [(&str, Arc<dyn FlowField>, SurfaceMesh); 2] = [
        (
            "rigid_rotation",
            flow("rigid_rotation", json!({}))?,
            mesh("circle", json!({"center": [0.3, -0.2], "radius": 0.9, "panels": 16, "order": 6}))?,
        ),
        (
            "stratified_shear",
            stratified2()?,
            mesh("circle", json!({"center": [1.0, 1.0], "radius": 0.6, "panels": 16, "order": 6}))?,
        ),
    ];
    let mut worst = 0.0f64;
    let mut worst_ratio_lo = f64::INFINITY;
    let mut worst_ratio_hi = 0.0f64;
    let mut parts = Vec::new();
    for (name, f, m) in &cases {
        let coarse = lemma_transport_check(m, f.as_ref(), &TimeGrid::new(0.0, horizon, 1e-3)?)?;
        let fine = lemma_transport_check(m, f.as_ref(), &TimeGrid::new(0.0, horizon, 5e-4)?)?;
        worst = worst.max(coarse);
        // Second-order central differencing should shrink by about four
        // when the finite-difference term dominates; a residual already at
        // roundoff is accepted as converged.
        if coarse > 1e-12 {
            let ratio = coarse / fine.max(1e-300);
            worst_ratio_lo = worst_ratio_lo.min(ratio);
            worst_ratio_hi = worst_ratio_hi.max(ratio);
        }
        parts.push(format!("{name}: {coarse:.2e} -> {fine:.2e}"));
    }
    let mut r = row("transport-lemma", worst, 1e-6, 10.0);
    if worst_ratio_hi > 0.0 {
        r.passed &= worst_ratio_lo >= 2.8 && worst_ratio_hi <= 5.7;
    }
    r.note = format!(
        "{} ; dt halving ratios within [2.8, 5.7]{}",
        parts.join(" ; "),
        if quick { "; quick: horizon 0.1" } else { "" }
    );
    Ok(r)
}

// ---------------------------------------------------------------------------
// 10. reduction and consistency identities over random configurations

fn reductions(quick: bool) -> Result<CriterionRow> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x10ad);
    let configs = if quick { 25 } else { 100 };
    let tau = std::f64::consts::TAU;
    let mut per_identity: std::collections::BTreeMap<&'static str, f64> =
        std::collections::BTreeMap::new();
    let mut track = |err: f64, what: &'static str| {
        let e = per_identity.entry(what).or_insert(0.0);
        if err > *e {
            *e = err;
        }
    };

    // Loop integral of u against the odd-surface integral with no vorticity
    // factor: the same curve, the same nodes, the same number.
    let flows2: Vec<Arc<dyn FlowField>> = vec![
        flow("taylor_green", json!({}))?,
        flow("rigid_rotation", json!({"omega": 0.7}))?,
        flow("isentropic_vortex", json!({"beta": 3.0}))?,
        stratified2()?,
    ];
    let flows3: Vec<Arc<dyn FlowField>> = vec![
        flow("abc", json!({}))?,
        flow("boosted_abc", json!({"boost": [0.2, -0.1, 0.3]}))?,
        flow("stratified_shear", json!({"dim": 3}))?,
        stratified3_linear()?,
    ];
    for i in 0..configs {
        let dim3 = i % 2 == 1;
        let f = if dim3 {
            &flows3[rng.random_range(0..flows3.len())]
        } else {
            &flows2[rng.random_range(0..flows2.len())]
        };
        let mut center = vec![rng.random_range(0.5..5.5), rng.random_range(0.5..5.5)];
        if dim3 {
            center.push(rng.random_range(0.5..5.5));
        }
        let m = mesh(
            "circle",
            json!({"center": center, "radius": rng.random_range(0.4..1.2), "panels": 12, "order": 6}),
        )?;
        let t = rng.random_range(0.0..1.0);
        let c = circulation(&m, f.as_ref(), t)?.value;
        let h = helicity(&m, f.as_ref(), t, EnergySign::Minus)?.value;
        track((h - c).abs() / c.abs().max(1.0), "loop-reduction");
    }

    // Full-frame surface vorticity against the manifold vorticity scalar:
    // frame-shape independent by normalization.
    for _ in 0..configs {
        let f = &flows2[rng.random_range(0..flows2.len())];
        let x = [rng.random_range(0.2..6.0), rng.random_range(0.2..6.0)];
        let st = f.state(&x, rng.random_range(0.0..1.0))?;
        let mut frame = nalgebra::DMatrix::zeros(2, 2);
        loop {
            for v in frame.iter_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
            let det: f64 = frame[(0, 0)] * frame[(1, 1)] - frame[(0, 1)] * frame[(1, 0)];
            if det.abs() > 0.1 {
                if det < 0.0 {
                    frame.swap_columns(0, 1);
                }
                break;
            }
        }
        let sv = vorticity_of_frame(&x, &frame, 1.0, &st)?;
        let full = sv.vort_scalar.expect("even frame");
        let w = manifold_vorticity(&st)?;
        track((full - w).abs() / w.abs().max(1.0), "full-frame-vorticity");
    }

    // Vorticity vector of a spanning frame against the boundary scalar:
    // with the outward direction listed first, pairing the vector against
    // it reproduces the boundary-frame vorticity.
    for _ in 0..configs {
        let f = &flows3[rng.random_range(0..flows3.len())];
        let x = [
            rng.random_range(0.2..6.0),
            rng.random_range(0.2..6.0),
            rng.random_range(0.2..6.0),
        ];
        let st = f.state(&x, rng.random_range(0.0..1.0))?;
        let (t1, t2, n) = random_orthonormal_triple(&mut rng);
        let mut full = nalgebra::DMatrix::zeros(3, 3);
        let mut bd = nalgebra::DMatrix::zeros(3, 2);
        for k in 0..3 {
            full[(k, 0)] = t1[k];
            full[(k, 1)] = t2[k];
            full[(k, 2)] = n[k];
            bd[(k, 0)] = t1[k];
            bd[(k, 1)] = t2[k];
        }
        let vec3 = vorticity_of_frame(&x, &full, 1.0, &st)?
            .vort_vector
            .expect("odd frame");
        let aligned: f64 = vec3
            .components()
            .iter()
            .zip(&n)
            .map(|(a, b)| a * b)
            .sum();
        let scalar = vorticity_of_frame(&x, &bd, 1.0, &st)?
            .vort_scalar
            .expect("even frame");
        track((aligned - scalar).abs() / scalar.abs().max(1.0), "boundary-alignment");
    }

    // Rearranged forms against their primary forms, random weights and
    // evaluation times on resolved meshes.
    // Cubed weights of exponentially stratified densities carry high
    // harmonics; order 12 keeps the plane quadrature at the identity floor.
    let box2 = mesh(
        "box",
        json!({"lo": [0.0, 0.0], "hi": [tau, tau], "panels": 3, "order": 12, "periodic": true}),
    )?;
    let box3 = mesh(
        "box",
        json!({"lo": [0.0, 0.0, 0.0], "hi": [tau, tau, tau], "panels": 3, "order": 10, "periodic": true}),
    )?;
    let rearr = if quick { 12 } else { 100 };
    for i in 0..rearr {
        let t = rng.random_range(0.0..1.0);
        let w = match rng.random_range(0..3) {
            0 => WeightFn::Identity,
            1 => WeightFn::Power {
                k: rng.random_range(2u32..4),
            },
            _ => WeightFn::Const {
                value: rng.random_range(0.5..2.0),
            },
        };

        // The rearranged forms move a term to the boundary by Stokes, so on
        // the periodically identified box every factor must itself be
        // periodic: taylor_green and the sinusoidal shear qualify, the rigid
        // rotation (u grows linearly) does not.
        let f2 = if rng.random_range(0..2) == 0 { &flows2[0] } else { &flows2[3] };
        let spec = IntegralSpec::Enstrophy { f: w.clone() };
        let a = evaluate(&spec, &box2, f2.as_ref(), t)?.value;
        let b = enstrophy_rearranged(&box2, f2.as_ref(), t, &w)?;
        track((a - b).abs() / a.abs().max(1.0), "enstrophy-rearranged");

        let f3 = &flows3[2]; // sinusoidal stratification
        if i % 2 == 0 {
            let sphere = mesh(
                "sphere",
                json!({"center": [rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)],
                       "radius": rng.random_range(0.8..1.3),
                       "polar_panels": 6, "polar_order": 8,
                       "azimuth_panels": 8, "azimuth_order": 8}),
            )?;
            let spec = IntegralSpec::EntropyCircEven { f: w.clone() };
            let a = evaluate(&spec, &sphere, f3.as_ref(), t)?.value;
            let b = entropy_circ_even_rearranged(&sphere, f3.as_ref(), t, &w)?;
            track((a - b).abs() / a.abs().max(1.0), "entropy-even-rearranged");
        } else {
            let ew = crate::integrals::EntropyWeight {
                of_entropy: None,
                of_vorticity: Some(w.clone()),
            };
            let spec = IntegralSpec::EntropyCircOdd { f: ew };
            let a = evaluate(&spec, &box3, f3.as_ref(), t)?.value;
            let b = entropy_circ_odd_rearranged(&box3, f3.as_ref(), t, &w)?;
            track((a - b).abs() / a.abs().max(1.0), "entropy-odd-rearranged");
        }
    }

    let worst = per_identity.values().copied().fold(0.0, f64::max);
    let detail: Vec<String> = per_identity
        .iter()
        .map(|(k, v)| format!("{k} {v:.1e}"))
        .collect();
    let mut r = row("reductions", worst, 1e-8, 30.0);
    r.note = format!(
        "{configs} random configurations per identity ({rearr} per rearrangement); worst: {}{}",
        detail.join(", "),
        if quick { "; quick: 25/12 configurations" } else { "" }
    );
    Ok(r)
}

fn random_orthonormal_triple(rng: &mut impl rand::Rng) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    loop {
        let a: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let na = (a.iter().map(|v| v * v).sum::<f64>()).sqrt();
        if na < 0.3 {
            continue;
        }
        let t1: Vec<f64> = a.iter().map(|v| v / na).collect();
        let dot: f64 = t1.iter().zip(&b).map(|(x, y)| x * y).sum();
        let raw: Vec<f64> = (0..3).map(|k| b[k] - dot * t1[k]).collect();
        let nb = (raw.iter().map(|v| v * v).sum::<f64>()).sqrt();
        if nb < 0.3 {
            continue;
        }
        let t2: Vec<f64> = raw.iter().map(|v| v / nb).collect();
        let n = vec![
            t1[1] * t2[2] - t1[2] * t2[1],
            t1[2] * t2[0] - t1[0] * t2[2],
            t1[0] * t2[1] - t1[1] * t2[0],
        ];
        return (t1, t2, n);
    }
}

// ---------------------------------------------------------------------------
// 11. spanning-surface constants

fn spanning(_quick: bool) -> Result<CriterionRow> {
    let rigid = flow("rigid_rotation", json!({"omega": 0.5}))?;
    let disk = mesh(
        "disk",
        json!({"center": [0.3, -0.4], "radius": 1.1,
               "radial_panels": 6, "radial_order": 6,
               "angular_panels": 12, "angular_order": 6}),
    )?;
    let sc = spanning_constant(&disk, rigid.as_ref(), 0.35, &WeightFn::Const { value: 1.0 })?;
    let rim = sc.boundary.expect("constant weight has a boundary integral");
    let disk_loop = (sc.interior - rim).abs() / rim.abs().max(1.0);
    let exact = 2.0 * 0.5 * std::f64::consts::PI * 1.1 * 1.1;
    let exact_err = (sc.interior - exact).abs() / exact;

    let strat = flow("stratified_shear", json!({"dim": 3}))?;
    let ball = mesh(
        "ball",
        json!({"center": [0.0, 0.0, 0.2], "radius": 0.9,
               "polar_panels": 6, "polar_order": 8}),
    )?;
    let sb = spanning_constant(&ball, strat.as_ref(), 0.6, &WeightFn::Identity)?;
    let shell = sb.boundary.expect("identity weight has an antiderivative");
    let ball_shell = (sb.interior - shell).abs() / shell.abs().max(1.0);

    let mut r = row("spanning", disk_loop, 1e-10, 30.0);
    r.passed &= exact_err < 1e-10 && ball_shell < 1e-6;
    r.note = format!(
        "disk {:.6} vs rim {:.6} (closed form 2 w pi r^2 = {:.6}, err {:.1e}); ball vs shell mismatch {:.1e} (want <1e-6)",
        sc.interior, rim, exact, exact_err, ball_shell
    );
    Ok(r)
}

// ---------------------------------------------------------------------------
// 12. catalog certification against the equations of motion

fn residuals(quick: bool) -> Result<CriterionRow> {
    let analytic: [(&str, serde_json::Value); 7] = [
        ("uniform", json!({})),
        ("rigid_rotation", json!({})),
        ("taylor_green", json!({})),
        ("abc", json!({})),
        ("boosted_abc", json!({"boost": [0.3, 0.2, 0.1]})),
        ("isentropic_vortex", json!({})),
        ("stratified_shear", json!({"dim": 3})),
    ];
    let samples = if quick { 200 } else { 1000 };
    let mut worst = 0.0f64;
    let mut worst_name = "";
    for (name, params) in analytic {
        let f = flow(name, params)?;
        let pts = sample_points(f.as_ref(), samples, 2024);
        let rep = euler_residual(f.as_ref(), &pts)?;
        if rep.worst() > worst {
            worst = rep.worst();
            worst_name = name;
        }
    }
    let (spectral, _) = spectral_flows(quick)?;
    let pts = sample_points(spectral.as_ref(), 120, 2024);
    let spectral_worst = euler_residual(spectral.as_ref(), &pts)?.worst();

    let mut r = row("residuals", worst, 1e-8, 30.0);
    r.passed &= spectral_worst < 1e-4;
    r.note = format!(
        "worst analytic residual from {worst_name} at {samples} samples; stored solve {:.2e} at 120 samples (want <1e-4, time-interpolation floor){}",
        spectral_worst,
        if quick { "; quick: 200 samples, 64^2 grid" } else { "" }
    );
    Ok(r)
}

// ---------------------------------------------------------------------------
// 13. negative control: the odd-surface law needs uniform entropy

fn negative_control(quick: bool) -> Result<CriterionRow> {
    let f = stratified3_linear()?;
    let m = mesh(
        "box",
        json!({"lo": [0.0, 0.0, 0.0], "hi": [1.0, 1.0, 1.0], "panels": 3, "order": 4}),
    )?;
    let spec = IntegralSpec::Helicity {
        energy_sign: EnergySign::Minus,
    };
    let t1 = if quick { 0.25 } else { 0.5 };
    // The balance integrates the reported flux with the trapezoid rule and
    // subtracts it from the value; for a flow satisfying the transport law
    // this compensated series is constant to advection accuracy. Entropy
    // stratification breaks it at leading order, and refining dt cannot
    // repair a modeling error.
    let dts = [2e-3, 1e-3, 5e-4];
    let mut drifts = Vec::new();
    let mut scale = 0.0f64;
    for &dt in &dts {
        let s = series(&m, f.as_ref(), &spec, 0.0, t1, dt, 10)?;
        let h = 10.0 * dt;
        let mut comp = Vec::with_capacity(s.len());
        let mut acc = 0.0;
        comp.push(s[0].value);
        for k in 1..s.len() {
            acc += 0.5 * (s[k - 1].flux + s[k].flux) * h;
            comp.push(s[k].value - acc);
        }
        let d = comp
            .iter()
            .map(|v| (v - comp[0]).abs())
            .fold(0.0, f64::max);
        scale = s.iter().map(|x| x.flux.abs()).fold(scale, f64::max);
        drifts.push(d);
    }
    let measured = drifts[1] / scale.max(DRIFT_REL_FLOOR);
    let shrink = drifts[0] / drifts[2].max(1e-300);

    let mut r = row("negative-control", measured, 1e-3, 60.0);
    r.lower_bound = true;
    r.passed = measured > 1e-3 && shrink < 2.0;
    r.note = format!(
        "flux-compensated helicity drift over the flux scale {scale:.3}; dt 4x refinement changes it by x{shrink:.2} (non-convergence wanted: <2); raw drifts {{{:.2e}, {:.2e}, {:.2e}}}{}",
        drifts[0], drifts[1], drifts[2],
        if quick { "; quick: t1=0.25" } else { "" }
    );
    Ok(r)
}
