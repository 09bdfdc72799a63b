//! A stored solver trajectory exposed as a flow field. Space is evaluated
//! by direct Fourier summation over the dealiased band, so u, grad u, and p
//! are smooth functions of x rather than grid lookups; time is a cubic
//! Lagrange interpolation over the four nearest snapshots. Density is one,
//! entropy constant, and pressure is recovered from the velocity on demand.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{checkpoint, run, Fft2, InitialCondition, Solver, Trajectory, C64, ZC};
use crate::error::{Error, Result};
use crate::flows::{FlowField, FlowState};

fn default_n() -> usize {
    128
}

fn default_dt() -> f64 {
    1e-3
}

fn default_t1() -> f64 {
    1.0
}

fn default_every() -> usize {
    10
}

/// Either an initial condition to solve from, or a checkpoint to load.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralFlowParams {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "default_t1")]
    pub t1: f64,
    /// Solver steps between stored snapshots.
    #[serde(default = "default_every")]
    pub snapshot_every: usize,
    #[serde(default)]
    pub ic: Option<InitialCondition>,
    #[serde(default)]
    pub checkpoint: Option<PathBuf>,
}

/// Velocity spectra interpolated to one instant, restricted to the
/// dealiased square, plus the lazily recovered pressure spectrum.
struct EvalGrid {
    ux: Vec<C64>,
    uy: Vec<C64>,
    pressure: OnceLock<Vec<C64>>,
}

struct GridCache {
    map: HashMap<u64, Arc<EvalGrid>>,
    order: VecDeque<u64>,
}

// Advection revisits at most three stage times per step; a small window of
// recent grids makes repeated queries at one time cost a single build.
const CACHE_CAP: usize = 16;

pub struct SpectralFlow {
    traj: Trajectory,
    cut: i64,
    side: usize,
    cache: Mutex<GridCache>,
}

impl SpectralFlow {
    pub fn from_params(p: SpectralFlowParams) -> Result<Self> {
        let traj = match (&p.ic, &p.checkpoint) {
            (Some(_), Some(_)) => {
                return Err(Error::Invalid(
                    "give either an initial condition or a checkpoint, not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Invalid(
                    "spectral flow needs an `ic` block or a `checkpoint` path".into(),
                ))
            }
            (None, Some(path)) => checkpoint::load(path)?,
            (Some(ic), None) => {
                if !(p.t1 > p.t0) {
                    return Err(Error::Invalid(format!(
                        "horizon [{}, {}] is empty",
                        p.t0, p.t1
                    )));
                }
                if !(p.dt > 0.0) {
                    return Err(Error::Invalid(format!(
                        "step size {} must be positive",
                        p.dt
                    )));
                }
                let raw = (p.t1 - p.t0) / p.dt;
                if (raw - raw.round()).abs() > 1e-9 * raw.max(1.0) {
                    return Err(Error::Invalid(format!(
                        "dt={} does not divide the horizon: {raw} steps",
                        p.dt
                    )));
                }
                let state = ic.realize(p.n, p.t0)?;
                let mut solver = Solver::new(p.n)?;
                run(
                    &mut solver,
                    state,
                    p.dt,
                    raw.round() as usize,
                    p.snapshot_every,
                )?
            }
        };
        Self::from_trajectory(traj)
    }

    pub fn from_trajectory(traj: Trajectory) -> Result<Self> {
        traj.validate()?;
        if traj.times.len() < 4 {
            return Err(Error::Invalid(format!(
                "time interpolation needs at least four snapshots, got {}",
                traj.times.len()
            )));
        }
        let cut = (traj.n / 3) as i64;
        Ok(SpectralFlow {
            traj,
            cut,
            side: (2 * cut + 1) as usize,
            cache: Mutex::new(GridCache {
                map: HashMap::new(),
                order: VecDeque::new(),
            }),
        })
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }

    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        checkpoint::save(path, &self.traj)
    }

    fn grid_at(&self, t: f64) -> Result<Arc<EvalGrid>> {
        let key = t.to_bits();
        {
            let cache = self.cache.lock().unwrap();
            if let Some(g) = cache.map.get(&key) {
                return Ok(g.clone());
            }
        }
        let grid = Arc::new(self.build_grid(t)?);
        let mut cache = self.cache.lock().unwrap();
        if cache.map.insert(key, grid.clone()).is_none() {
            cache.order.push_back(key);
            if cache.order.len() > CACHE_CAP {
                let evict = cache.order.pop_front().unwrap();
                cache.map.remove(&evict);
            }
        }
        Ok(grid)
    }

    /// Queries may overhang each end of the horizon by half a snapshot
    /// interval; difference stencils right at the edges land there, and the
    /// end windows extrapolate at the same fourth-order accuracy.
    fn build_grid(&self, t: f64) -> Result<EvalGrid> {
        let (t0, t1) = self.traj.horizon();
        let d = self.traj.cadence();
        if !(t >= t0 - 0.5 * d && t <= t1 + 0.5 * d) {
            return Err(Error::Domain(format!(
                "time {t} lies outside the stored horizon [{t0}, {t1}]"
            )));
        }
        let count = self.traj.times.len() as isize;
        let j0 = (((t - t0) / d).floor() as isize - 1).clamp(0, count - 4) as usize;
        let ts = &self.traj.times[j0..j0 + 4];
        let mut w = [0.0; 4];
        for (i, wi) in w.iter_mut().enumerate() {
            let mut p = 1.0;
            for j in 0..4 {
                if j != i {
                    p *= (t - ts[j]) / (ts[i] - ts[j]);
                }
            }
            *wi = p;
        }

        let n = self.traj.n;
        let ni = n as i64;
        let cut = self.cut;
        let side = self.side;
        let mut ux = vec![ZC; side * side];
        let mut uy = vec![ZC; side * side];
        for ky in -cut..=cut {
            let iy = ky.rem_euclid(ni) as usize;
            for kx in -cut..=cut {
                if kx == 0 && ky == 0 {
                    continue;
                }
                let ix = kx.rem_euclid(ni) as usize;
                let full = iy * n + ix;
                let mut c = ZC;
                for a in 0..4 {
                    c += w[a] * self.traj.snaps[j0 + a][full];
                }
                let psi = c / (kx * kx + ky * ky) as f64;
                let at = ((ky + cut) as usize) * side + (kx + cut) as usize;
                ux[at] = C64::new(-ky as f64 * psi.im, ky as f64 * psi.re);
                uy[at] = C64::new(kx as f64 * psi.im, -kx as f64 * psi.re);
            }
        }
        Ok(EvalGrid {
            ux,
            uy,
            pressure: OnceLock::new(),
        })
    }

    /// Unit-modulus phases exp(i k v) for k in [-cut, cut].
    fn phases(&self, v: f64) -> Vec<C64> {
        let cut = self.cut as usize;
        let mut e = vec![C64::new(1.0, 0.0); self.side];
        let step = C64::from_polar(1.0, v);
        for k in 1..=cut {
            e[cut + k] = e[cut + k - 1] * step;
            e[cut - k] = e[cut + k].conj();
        }
        e
    }

    fn sum_kinematics(&self, grid: &EvalGrid, x: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let ex = self.phases(x[0]);
        let ey = self.phases(x[1]);
        let side = self.side;
        let cut = self.cut;
        let (mut u0, mut u1) = (ZC, ZC);
        // Accumulators for k_j-weighted sums; the gradient is i times them.
        let (mut gx0, mut gy0, mut gx1, mut gy1) = (ZC, ZC, ZC, ZC);
        for jy in 0..side {
            let ky = (jy as i64 - cut) as f64;
            let py = ey[jy];
            let base = jy * side;
            let (mut ra, mut rb, mut rka, mut rkb) = (ZC, ZC, ZC, ZC);
            for jx in 0..side {
                let kx = (jx as i64 - cut) as f64;
                let a = grid.ux[base + jx] * ex[jx];
                let b = grid.uy[base + jx] * ex[jx];
                ra += a;
                rb += b;
                rka += kx * a;
                rkb += kx * b;
            }
            let rap = ra * py;
            let rbp = rb * py;
            u0 += rap;
            u1 += rbp;
            gx0 += rka * py;
            gy0 += ky * rap;
            gx1 += rkb * py;
            gy1 += ky * rbp;
        }
        let mut grad = DMatrix::zeros(2, 2);
        // (i z).re = -z.im; imaginary residue of the Hermitian sums is
        // roundoff and is dropped.
        grad[(0, 0)] = -gx0.im;
        grad[(0, 1)] = -gy0.im;
        grad[(1, 0)] = -gx1.im;
        grad[(1, 1)] = -gy1.im;
        (vec![u0.re, u1.re], grad)
    }

    fn sum_scalar(&self, coeffs: &[C64], x: &[f64]) -> (f64, Vec<f64>) {
        let ex = self.phases(x[0]);
        let ey = self.phases(x[1]);
        let side = self.side;
        let cut = self.cut;
        let mut v = ZC;
        let (mut gx, mut gy) = (ZC, ZC);
        for jy in 0..side {
            let ky = (jy as i64 - cut) as f64;
            let py = ey[jy];
            let base = jy * side;
            let (mut rv, mut rk) = (ZC, ZC);
            for jx in 0..side {
                let kx = (jx as i64 - cut) as f64;
                let c = coeffs[base + jx] * ex[jx];
                rv += c;
                rk += kx * c;
            }
            let rvp = rv * py;
            v += rvp;
            gx += rk * py;
            gy += ky * rvp;
        }
        (v.re, vec![-gx.im, -gy.im])
    }

    /// -lap p = tr((grad u)^2), zero-mean gauge. The quadratic source is
    /// formed on the full collocation grid; every aliased image lands
    /// outside the 2/3 band, so the truncated spectrum is exact.
    fn pressure_spectrum(&self, grid: &EvalGrid) -> Vec<C64> {
        let n = self.traj.n;
        let ni = n as i64;
        let cut = self.cut;
        let side = self.side;
        let mut fft = Fft2::new(n);

        let mut gxx = vec![ZC; n * n];
        let mut gxy = vec![ZC; n * n];
        let mut gyx = vec![ZC; n * n];
        let mut gyy = vec![ZC; n * n];
        for ky in -cut..=cut {
            let iy = ky.rem_euclid(ni) as usize;
            for kx in -cut..=cut {
                let ix = kx.rem_euclid(ni) as usize;
                let at = ((ky + cut) as usize) * side + (kx + cut) as usize;
                let full = iy * n + ix;
                let i_kx = C64::new(0.0, kx as f64);
                let i_ky = C64::new(0.0, ky as f64);
                gxx[full] = i_kx * grid.ux[at];
                gxy[full] = i_ky * grid.ux[at];
                gyx[full] = i_kx * grid.uy[at];
                gyy[full] = i_ky * grid.uy[at];
            }
        }
        fft.inverse(&mut gxx);
        fft.inverse(&mut gxy);
        fft.inverse(&mut gyx);
        fft.inverse(&mut gyy);
        let mut q = vec![ZC; n * n];
        for j in 0..n * n {
            let tr = gxx[j].re * gxx[j].re
                + gyy[j].re * gyy[j].re
                + 2.0 * gxy[j].re * gyx[j].re;
            q[j] = C64::new(tr, 0.0);
        }
        fft.forward(&mut q);

        let mut p = vec![ZC; side * side];
        for ky in -cut..=cut {
            let iy = ky.rem_euclid(ni) as usize;
            for kx in -cut..=cut {
                if kx == 0 && ky == 0 {
                    continue;
                }
                let ix = kx.rem_euclid(ni) as usize;
                let at = ((ky + cut) as usize) * side + (kx + cut) as usize;
                p[at] = q[iy * n + ix] / (kx * kx + ky * ky) as f64;
            }
        }
        p
    }
}

impl FlowField for SpectralFlow {
    fn dim(&self) -> usize {
        2
    }

    fn state(&self, x: &[f64], t: f64) -> Result<FlowState> {
        if x.len() != 2 {
            return Err(Error::Dimension(format!(
                "plane flow queried at a {}-dimensional point",
                x.len()
            )));
        }
        let grid = self.grid_at(t)?;
        let (velocity, velocity_grad) = self.sum_kinematics(&grid, x);
        let p_hat = grid.pressure.get_or_init(|| self.pressure_spectrum(&grid));
        let (pressure, pressure_grad) = self.sum_scalar(p_hat, x);
        Ok(FlowState {
            velocity,
            velocity_grad,
            density: 1.0,
            density_grad: vec![0.0; 2],
            pressure,
            pressure_grad,
            entropy: 0.0,
            entropy_grad: vec![0.0; 2],
            gamma: None,
        })
    }

    fn kinematics(&self, x: &[f64], t: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
        if x.len() != 2 {
            return Err(Error::Dimension(format!(
                "plane flow queried at a {}-dimensional point",
                x.len()
            )));
        }
        let grid = self.grid_at(t)?;
        Ok(self.sum_kinematics(&grid, x))
    }

    fn is_steady(&self) -> bool {
        false
    }

    fn is_isentropic(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "spectral"
    }

    fn sample_domain(&self) -> Vec<(f64, f64)> {
        vec![(0.0, TAU), (0.0, TAU)]
    }
}
