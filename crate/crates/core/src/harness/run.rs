//! Advect, sample, and score one configured experiment. Reruns across
//! refinement levels reuse a single flow instance, so stored solves are
//! replayed once per run, not once per level. Everything here is
//! deterministic: node order, reduction order, and output formatting are
//! fixed, so rerunning a config reproduces its files byte for byte.
//! Experiments execute serially; concurrency across experiments is the
//! caller's business, and files land atomically so that stays safe.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::advect::{build_mesh, step_all, SurfaceMesh, TimeGrid};
use crate::error::{Error, Result};
use crate::flows::FlowField;
use crate::integrals::{conservation_warnings, evaluate, FunctionalValue, IntegralSpec};
use crate::util::fit_order;

use super::config::{scale_panels, validate, ExperimentConfig, Prepared, ToleranceSection};

/// Division floor for relative drift; integrals whose initial value sits at
/// or below it are judged by absolute drift instead.
pub const DRIFT_REL_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OrderFit {
    pub order: f64,
    pub r2: f64,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct ConvergenceOrders {
    /// Drift against dt levels.
    pub dt_drift: Option<OrderFit>,
    /// Flux-balance error against dt levels.
    pub dt_flux: Option<OrderFit>,
    /// Drift against mesh-refinement scale 1/factor.
    pub mesh_drift: Option<OrderFit>,
}

/// Everything measured for one tracked integral.
#[derive(Clone, Debug, Serialize)]
pub struct DriftReport {
    pub kind: String,
    pub series: Vec<FunctionalValue>,
    pub drift_abs: f64,
    pub drift_rel: f64,
    pub flux_balance_err: Option<f64>,
    pub convergence_orders: Option<ConvergenceOrders>,
    pub warnings: Vec<String>,
    pub pass: Option<bool>,
}

impl DriftReport {
    /// The drift a threshold is judged against: relative when the initial
    /// value clears the division floor, absolute otherwise.
    pub fn judged_drift(&self) -> f64 {
        if self.series[0].value.abs() > DRIFT_REL_FLOOR {
            self.drift_rel
        } else {
            self.drift_abs
        }
    }
}

// ---------------------------------------------------------------------------
// sampling

/// Advect a copy of the mesh through the grid, evaluating every spec at the
/// sampling cadence. Returns one series per spec; entry 0 is the initial
/// state, the last entry lands exactly on t1.
pub fn sample_series(
    mesh: &SurfaceMesh,
    flow: &dyn FlowField,
    specs: &[IntegralSpec],
    grid: &TimeGrid,
    sample_every: usize,
) -> Result<Vec<Vec<FunctionalValue>>> {
    let steps = grid.steps();
    if sample_every == 0 || steps % sample_every != 0 {
        return Err(Error::Invalid(format!(
            "sampling cadence {sample_every} must divide {steps} steps"
        )));
    }
    let mut work = mesh.clone();
    let mut series: Vec<Vec<FunctionalValue>> = vec![Vec::with_capacity(steps / sample_every + 1); specs.len()];
    for (i, spec) in specs.iter().enumerate() {
        series[i].push(evaluate(spec, &work, flow, grid.time_at(0))?);
    }
    for k in 0..steps {
        let t = grid.time_at(k);
        step_all(flow, &mut work, t, grid.dt)?;
        if (k + 1) % sample_every == 0 {
            let ts = grid.time_at(k + 1);
            for (i, spec) in specs.iter().enumerate() {
                series[i].push(evaluate(spec, &work, flow, ts)?);
            }
        }
    }
    Ok(series)
}

pub fn drift_abs(series: &[FunctionalValue]) -> f64 {
    let v0 = series[0].value;
    series
        .iter()
        .map(|s| (s.value - v0).abs())
        .fold(0.0, f64::max)
}

pub fn drift_rel(series: &[FunctionalValue]) -> f64 {
    drift_abs(series) / series[0].value.abs().max(DRIFT_REL_FLOOR)
}

/// Worst mismatch between the sampled d(value)/dt and the reported flux,
/// with the derivative taken by central differences over the sample spacing.
/// Needs at least three samples; the endpoints have no centered difference.
pub fn flux_balance_err(series: &[FunctionalValue], dt_sample: f64) -> Option<f64> {
    if series.len() < 3 {
        return None;
    }
    let mut worst = 0.0f64;
    for i in 1..series.len() - 1 {
        let rate = (series[i + 1].value - series[i - 1].value) / (2.0 * dt_sample);
        worst = worst.max((rate - series[i].flux).abs());
    }
    Some(worst)
}

// ---------------------------------------------------------------------------
// full runs

#[derive(Debug, Serialize)]
pub struct RunOutcome {
    pub reports: Vec<DriftReport>,
    /// Overall verdict; None when the config sets no tolerances.
    pub passed: Option<bool>,
    #[serde(skip)]
    pub files: Vec<PathBuf>,
}

fn verdict(tol: &ToleranceSection, report: &DriftReport) -> bool {
    let mut ok = true;
    if let Some(ta) = tol.drift_abs {
        ok &= report.drift_abs <= ta;
    }
    if let Some(tr) = tol.drift_rel {
        ok &= report.judged_drift() <= tr;
    }
    if let Some(tf) = tol.flux_balance {
        if let Some(err) = report.flux_balance_err {
            ok &= err <= tf;
        }
    }
    ok
}

fn rebuild_scaled_mesh(prepared: &Prepared, factor: u32) -> Result<SurfaceMesh> {
    let scaled = scale_panels(&prepared.config.surface.params, factor);
    let params = serde_json::to_value(&scaled).map_err(|e| Error::Serialize(e.to_string()))?;
    let mut mesh = build_mesh(&prepared.config.surface.builder, &params)?;
    if let Some(offset) = &prepared.config.surface.placement {
        mesh.translate(offset)?;
    }
    Ok(mesh)
}

/// Run a validated experiment against an already-built flow.
pub fn run_prepared(prepared: &Prepared, flow: &dyn FlowField) -> Result<Vec<DriftReport>> {
    let cfg = &prepared.config;
    let grid = TimeGrid::new(cfg.grid.t0, cfg.grid.t1, cfg.grid.dt)?;
    let every = cfg.grid.sample_every;
    let base = sample_series(&prepared.mesh, flow, &prepared.specs, &grid, every)?;

    // Per-level metrics for the convergence fits, gathered once per level
    // across all specs.
    let refinement = cfg.refinement.as_ref();
    let dt_levels: &[f64] = refinement.map_or(&[], |r| &r.dt_levels);
    let mesh_levels: &[u32] = refinement.map_or(&[], |r| &r.mesh_levels);

    let mut dt_drifts: Vec<Vec<f64>> = vec![Vec::new(); prepared.specs.len()];
    let mut dt_fluxes: Vec<Vec<Option<f64>>> = vec![Vec::new(); prepared.specs.len()];
    for &dt in dt_levels {
        let lgrid = TimeGrid::new(cfg.grid.t0, cfg.grid.t1, dt)?;
        let level = sample_series(&prepared.mesh, flow, &prepared.specs, &lgrid, every)?;
        for (i, s) in level.iter().enumerate() {
            dt_drifts[i].push(drift_abs(s));
            dt_fluxes[i].push(flux_balance_err(s, every as f64 * dt));
        }
    }

    let mut mesh_drifts: Vec<Vec<f64>> = vec![Vec::new(); prepared.specs.len()];
    for &m in mesh_levels {
        let mesh = rebuild_scaled_mesh(prepared, m)?;
        let level = sample_series(&mesh, flow, &prepared.specs, &grid, every)?;
        for (i, s) in level.iter().enumerate() {
            mesh_drifts[i].push(drift_abs(s));
        }
    }

    let fit = |scales: &[f64], errors: &[f64]| -> Option<OrderFit> {
        let (order, r2, points) = fit_order(scales, errors);
        (points >= 3).then_some(OrderFit { order, r2, points })
    };

    let mut reports = Vec::with_capacity(prepared.specs.len());
    for (i, spec) in prepared.specs.iter().enumerate() {
        let series = base[i].clone();
        let convergence_orders = if refinement.is_some() {
            let dt_flux = if dt_fluxes[i].iter().all(|e| e.is_some()) {
                let errs: Vec<f64> = dt_fluxes[i].iter().map(|e| e.unwrap()).collect();
                fit(dt_levels, &errs)
            } else {
                None
            };
            let mesh_scales: Vec<f64> = mesh_levels.iter().map(|&m| 1.0 / m as f64).collect();
            Some(ConvergenceOrders {
                dt_drift: fit(dt_levels, &dt_drifts[i]),
                dt_flux,
                mesh_drift: fit(&mesh_scales, &mesh_drifts[i]),
            })
        } else {
            None
        };
        let mut report = DriftReport {
            kind: spec.kind_name().into(),
            drift_abs: drift_abs(&series),
            drift_rel: drift_rel(&series),
            flux_balance_err: flux_balance_err(&series, every as f64 * cfg.grid.dt),
            convergence_orders,
            warnings: conservation_warnings(spec, &prepared.mesh, flow),
            pass: None,
            series,
        };
        if let Some(tol) = &cfg.tolerances {
            if !tol.is_empty() {
                report.pass = Some(verdict(tol, &report));
            }
        }
        reports.push(report);
    }
    Ok(reports)
}

/// Validate, build, run, and persist. `stem` names the output files.
pub fn run(config: &ExperimentConfig, stem: &str) -> Result<RunOutcome> {
    let prepared = validate(config)?;
    let flow = prepared.build_flow()?;
    let reports = run_prepared(&prepared, flow.as_ref())?;
    let passed = reports.iter().any(|r| r.pass.is_some()).then(|| {
        reports.iter().all(|r| r.pass.unwrap_or(true))
    });

    let out = config.output.clone().unwrap_or_default();
    let dir = output_dir(&out.dir);
    std::fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    for format in &out.formats {
        let path = dir.join(format!("{stem}.{format}"));
        match format.as_str() {
            "csv" => write_atomic(&path, series_csv(&reports).as_bytes())?,
            "json" => {
                let doc = ReportDoc {
                    config,
                    reports: &reports,
                    passed,
                };
                let mut text = serde_json::to_string_pretty(&doc)
                    .map_err(|e| Error::Serialize(e.to_string()))?;
                text.push('\n');
                write_atomic(&path, text.as_bytes())?;
            }
            other => return Err(Error::config("output.formats", format!("unknown format `{other}`"))),
        }
        files.push(path);
    }
    Ok(RunOutcome {
        reports,
        passed,
        files,
    })
}

/// Parse a config file and run it, naming outputs after the file stem.
pub fn run_file(path: &Path) -> Result<RunOutcome> {
    let config = super::config::parse_config_file(path)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("experiment")
        .to_string();
    run(&config, &stem)
}

/// Output directory after the VORTINT_OUT override.
pub fn output_dir(configured: &str) -> PathBuf {
    match std::env::var("VORTINT_OUT") {
        Ok(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from(configured),
    }
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    config: &'a ExperimentConfig,
    reports: &'a [DriftReport],
    passed: Option<bool>,
}

/// One wide table: sample times, then a value/flux column pair per tracked
/// integral. Fixed-width scientific formatting keeps reruns byte-identical.
pub fn series_csv(reports: &[DriftReport]) -> String {
    let mut header = String::from("t");
    for (i, r) in reports.iter().enumerate() {
        header.push_str(&format!(",{0}_{1}_value,{0}_{1}_flux", r.kind, i));
    }
    let mut out = header;
    out.push('\n');
    let samples = reports.first().map_or(0, |r| r.series.len());
    for row in 0..samples {
        out.push_str(&format!("{:.16e}", reports[0].series[row].t));
        for r in reports {
            let s = &r.series[row];
            out.push_str(&format!(",{:.16e},{:.16e}", s.value, s.flux));
        }
        out.push('\n');
    }
    out
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Invalid(format!("unusable output path {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
