//! Solver and flow-field checks for the periodic plane: eigenstate
//! steadiness, discrete conservation, cross-validation against the analytic
//! cellular flow, checkpoint round trips, and the interpolation budget of
//! the trajectory-backed flow field.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::json;

use vortint_core::flows::{self, euler_residual, sample_points, FlowField, TaylorGreen};
use vortint_core::spectral::{
    checkpoint, run, InitialCondition, ModeSpec, Solver, SpectralFlow, SpectralFlowParams,
    SpectralState,
};

fn mode(k: [i64; 2], amplitude: f64) -> ModeSpec {
    ModeSpec {
        k,
        amplitude,
        phase: 0.0,
    }
}

/// 2 sin x sin y = cos(x - y) - cos(x + y), the steady cellular vorticity.
fn taylor_green_ic() -> InitialCondition {
    InitialCondition::Modes {
        modes: vec![mode([1, -1], 1.0), mode([1, 1], -1.0)],
    }
}

// Gentle enough that the enstrophy cascade stays far from the dealiasing
// cutoff over a unit horizon; the pointwise fields then satisfy the
// equations to interpolation accuracy rather than to the (much larger)
// truncation discard of a marginally resolved run.
fn band_ic() -> InitialCondition {
    InitialCondition::Random {
        seed: 7,
        band: [2.0, 4.0],
        amplitude: 0.8,
    }
}

/// The expensive trajectory every torus test shares: N = 128, dt = 1e-3,
/// a unit horizon, snapshots every ten steps.
fn flow128() -> &'static SpectralFlow {
    static FLOW: OnceLock<SpectralFlow> = OnceLock::new();
    FLOW.get_or_init(|| {
        SpectralFlow::from_params(SpectralFlowParams {
            n: 128,
            dt: 1e-3,
            t0: 0.0,
            t1: 1.0,
            snapshot_every: 10,
            ic: Some(band_ic()),
            checkpoint: None,
        })
        .unwrap()
    })
}

fn small_tg_flow() -> SpectralFlow {
    SpectralFlow::from_params(SpectralFlowParams {
        n: 64,
        dt: 2e-3,
        t0: 0.0,
        t1: 0.12,
        snapshot_every: 10,
        ic: Some(taylor_green_ic()),
        checkpoint: None,
    })
    .unwrap()
}

#[test]
fn initial_conditions_realize_the_documented_spectra() {
    let n = 32;
    let st = taylor_green_ic().realize(n, 0.0).unwrap();
    let at = |kx: i64, ky: i64| {
        let ix = kx.rem_euclid(n as i64) as usize;
        let iy = ky.rem_euclid(n as i64) as usize;
        st.vorticity_hat[iy * n + ix]
    };
    assert!((at(1, 1).re + 0.5).abs() < 1e-15);
    assert!((at(-1, -1).re + 0.5).abs() < 1e-15);
    assert!((at(1, -1).re - 0.5).abs() < 1e-15);
    assert!((at(-1, 1).re - 0.5).abs() < 1e-15);
    let named: f64 = [at(1, 1), at(-1, -1), at(1, -1), at(-1, 1)]
        .iter()
        .map(|c| c.norm())
        .sum();
    let total: f64 = st.vorticity_hat.iter().map(|c| c.norm()).sum();
    assert!((total - named).abs() < 1e-14, "stray modes present");

    let st = band_ic().realize(128, 0.0).unwrap();
    st.validate().unwrap();
    // amplitude is the rms vorticity, and enstrophy integrates its square
    // over the (2 pi)^2 torus.
    let want = TAU * TAU * 0.8 * 0.8;
    assert!((st.enstrophy() - want).abs() < 1e-10 * want);
    for iy in 0..128usize {
        let ky = if iy <= 64 { iy as i64 } else { iy as i64 - 128 };
        for ix in 0..128usize {
            let kx = if ix <= 64 { ix as i64 } else { ix as i64 - 128 };
            let r2 = kx * kx + ky * ky;
            if !(4..=16).contains(&r2) {
                assert_eq!(st.vorticity_hat[iy * 128 + ix].norm(), 0.0);
            }
        }
    }

    let origin = InitialCondition::Modes {
        modes: vec![mode([0, 0], 1.0)],
    };
    assert!(origin.realize(n, 0.0).is_err());
    let outside = InitialCondition::Modes {
        modes: vec![mode([11, 0], 1.0)],
    };
    // cutoff for n = 32 is |k| <= 10
    assert!(outside.realize(n, 0.0).is_err());
    let empty = InitialCondition::Random {
        seed: 1,
        band: [5.01, 5.09],
        amplitude: 1.0,
    };
    assert!(empty.realize(n, 0.0).is_err());
    let wide = InitialCondition::Random {
        seed: 1,
        band: [2.0, 11.0],
        amplitude: 1.0,
    };
    assert!(wide.realize(n, 0.0).is_err());
}

#[test]
fn taylor_green_is_a_steady_eigenstate() {
    let n = 32;
    let mut solver = Solver::new(n).unwrap();
    let st0 = taylor_green_ic().realize(n, 0.0).unwrap();
    let mut st = st0.clone();
    for _ in 0..1000 {
        st = solver.step(&st, 1e-3).unwrap();
    }
    let drift = st
        .vorticity_hat
        .iter()
        .zip(&st0.vorticity_hat)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    assert!(drift < 1e-10, "eigenstate drifted by {drift:.3e} over t=1");
    assert!((st.t - 1.0).abs() < 1e-9);
}

#[test]
fn zero_vorticity_stays_exactly_zero() {
    let mut solver = Solver::new(16).unwrap();
    let mut st = SpectralState::zero(16, 0.0).unwrap();
    for _ in 0..5 {
        st = solver.step(&st, 0.1).unwrap();
    }
    assert!(st.vorticity_hat.iter().all(|c| c.re == 0.0 && c.im == 0.0));
}

#[test]
fn random_field_conserves_energy_and_enstrophy() {
    let traj = flow128().trajectory();
    let first = SpectralState {
        n: traj.n,
        vorticity_hat: traj.snaps[0].clone(),
        t: traj.times[0],
    };
    let (e0, z0) = (first.energy(), first.enstrophy());
    assert!(e0 > 0.0 && z0 > 0.0);
    let mut worst_e = 0.0f64;
    let mut worst_z = 0.0f64;
    for snap in &traj.snaps {
        let st = SpectralState {
            n: traj.n,
            vorticity_hat: snap.clone(),
            t: 0.0,
        };
        worst_e = worst_e.max((st.energy() - e0).abs() / e0);
        worst_z = worst_z.max((st.enstrophy() - z0).abs() / z0);
        st.validate().unwrap();
    }
    assert!(worst_e < 1e-6, "energy drifted by {worst_e:.3e}");
    assert!(worst_z < 1e-6, "enstrophy drifted by {worst_z:.3e}");
}

#[test]
fn taylor_green_trajectory_matches_the_analytic_flow() {
    let flow = small_tg_flow();
    let mut rng = StdRng::seed_from_u64(23);
    for _ in 0..40 {
        let x = [rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)];
        let t = rng.random_range(0.0..0.12);
        let got = flow.state(&x, t).unwrap();
        let want = TaylorGreen.state(&x, 0.0).unwrap();
        for i in 0..2 {
            assert!((got.velocity[i] - want.velocity[i]).abs() < 1e-10);
            assert!((got.pressure_grad[i] - want.pressure_grad[i]).abs() < 1e-10);
            for j in 0..2 {
                assert!((got.velocity_grad[(i, j)] - want.velocity_grad[(i, j)]).abs() < 1e-10);
            }
        }
        assert!((got.pressure - want.pressure).abs() < 1e-10);
        assert_eq!(got.density, 1.0);
        assert_eq!(got.gamma, None);

        let (u, g) = flow.kinematics(&x, t).unwrap();
        assert_eq!(u, got.velocity);
        assert_eq!(g, got.velocity_grad);
    }
}

#[test]
fn velocity_is_divergence_free_at_random_points() {
    let flow = flow128();
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..60 {
        let x = [rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)];
        let t = rng.random_range(0.0..1.0);
        let st = flow.state(&x, t).unwrap();
        assert!(
            st.divergence().abs() < 1e-10,
            "div u = {:e} at {x:?}",
            st.divergence()
        );
    }
}

#[test]
fn momentum_residual_stays_within_the_interpolation_budget() {
    let flow = flow128();
    let pts = sample_points(flow, 100, 41);
    let rep = euler_residual(flow, &pts).unwrap();
    assert!(
        rep.worst() < 1e-4,
        "momentum {:.2e} entropy {:.2e} curl {:.2e}",
        rep.max_momentum,
        rep.max_entropy,
        rep.max_curl_transport
    );
    assert!(rep.max_continuity.is_none());
}

#[test]
fn enstrophy_on_an_advected_disk_tracks_the_material_value() {
    use vortint_core::advect::{advect_mesh, build_mesh};
    use vortint_core::integrals::{enstrophy, WeightFn};

    let flow = flow128();
    let mut m = build_mesh(
        "disk",
        &json!({
            "center": [PI, PI],
            "radius": 0.5,
            "radial_panels": 3,
            "radial_order": 3,
            "angular_panels": 6,
            "angular_order": 3,
        }),
    )
    .unwrap();
    let v0 = enstrophy(&m, flow, 0.0, &WeightFn::Identity).unwrap().value;
    advect_mesh(flow, &mut m, 0.0, 2.5e-3, 20).unwrap();
    let v1 = enstrophy(&m, flow, 0.05, &WeightFn::Identity).unwrap().value;
    assert!(v0.abs() > 1e-3, "degenerate start {v0}");
    let drift = (v1 - v0).abs() / v0.abs();
    assert!(drift < 1e-5, "enstrophy drifted by {drift:.3e}");
}

#[test]
fn queries_outside_the_horizon_are_domain_errors() {
    let flow = small_tg_flow();
    let x = [1.0, 2.0];
    let err = flow.state(&x, -0.3).unwrap_err().to_string();
    assert!(err.contains("horizon"), "{err}");
    assert!(flow.state(&x, 0.5).is_err());
    // Stencils right at the edges overhang by less than half a snapshot
    // interval and still evaluate.
    assert!(flow.state(&x, 0.12 + 0.004).is_ok());
    assert!(flow.state(&x, -0.004).is_ok());
    assert!(flow.state(&[1.0, 2.0, 3.0], 0.05).is_err());
}

#[test]
fn checkpoints_round_trip_bitwise() {
    let flow = small_tg_flow();
    let dir = std::env::temp_dir();
    let path = dir.join(format!("vortint-ckpt-{}.bin", std::process::id()));
    flow.save_checkpoint(&path).unwrap();

    let loaded = checkpoint::load(&path).unwrap();
    let orig = flow.trajectory();
    assert_eq!(loaded.n, orig.n);
    assert_eq!(loaded.times, orig.times);
    assert_eq!(loaded.snaps, orig.snaps);

    let sidecar = checkpoint::sidecar_path(&path);
    assert!(sidecar.ends_with(format!("vortint-ckpt-{}.bin.json", std::process::id())));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sidecar).unwrap()).unwrap();
    assert_eq!(meta["n"], 64);
    assert_eq!(meta["count"], orig.times.len());
    assert_eq!(meta["times"][0], 0.0);

    // The registry accepts a checkpoint path and reproduces the flow.
    let rebuilt = flows::build("spectral", &json!({ "checkpoint": path })).unwrap();
    let x = [0.7, 2.9];
    let a = flow.state(&x, 0.05).unwrap();
    let b = rebuilt.state(&x, 0.05).unwrap();
    assert_eq!(a.velocity, b.velocity);
    assert_eq!(a.pressure, b.pressure);

    std::fs::remove_file(&path).unwrap();
    std::fs::remove_file(&sidecar).unwrap();

    assert!(checkpoint::load(&path).is_err());
}

#[test]
fn solver_rejects_bad_steps_and_states() {
    let mut solver = Solver::new(32).unwrap();
    let st = taylor_green_ic().realize(32, 0.0).unwrap();
    let err = solver.step(&st, 1.0).unwrap_err().to_string();
    assert!(err.contains("CFL"), "{err}");

    let err = run(&mut solver, st.clone(), 1e-3, 7, 10).unwrap_err().to_string();
    assert!(err.contains("cadence"), "{err}");

    let mut broken = st.clone();
    broken.vorticity_hat[5] += vortint_core::spectral::C64::new(1e-6, 0.0);
    assert!(broken.validate().is_err());

    let mut offset = st;
    offset.vorticity_hat[0] = vortint_core::spectral::C64::new(1e-6, 0.0);
    assert!(offset.validate().is_err());

    assert!(Solver::new(24).is_err());
    assert!(Solver::new(4).is_err());
}

#[test]
fn params_parse_with_defaults_and_reject_stray_keys() {
    let p: SpectralFlowParams =
        serde_json::from_value(json!({"ic": {"type": "random", "seed": 3, "band": [2, 4], "amplitude": 1.0}}))
            .unwrap();
    assert_eq!(p.n, 128);
    assert_eq!(p.dt, 1e-3);
    assert_eq!(p.t1, 1.0);
    assert_eq!(p.snapshot_every, 10);

    assert!(serde_json::from_value::<SpectralFlowParams>(json!({"bogus": 1})).is_err());
    assert!(serde_json::from_value::<SpectralFlowParams>(
        json!({"ic": {"type": "random", "seed": 3, "band": [2, 4], "amplitude": 1.0, "extra": 2}})
    )
    .is_err());

    let both = SpectralFlowParams {
        n: 32,
        dt: 1e-3,
        t0: 0.0,
        t1: 0.05,
        snapshot_every: 10,
        ic: Some(band_ic()),
        checkpoint: Some("/nonexistent".into()),
    };
    let err = SpectralFlow::from_params(both).err().unwrap().to_string();
    assert!(err.contains("not both"), "{err}");

    let neither = SpectralFlowParams {
        n: 32,
        dt: 1e-3,
        t0: 0.0,
        t1: 0.05,
        snapshot_every: 10,
        ic: None,
        checkpoint: None,
    };
    assert!(SpectralFlow::from_params(neither).is_err());
}
