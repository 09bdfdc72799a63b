//! Pseudo-spectral incompressible Euler on the 2pi-periodic plane.
//!
//! The state is the Fourier transform of the scalar vorticity, marched in
//! vorticity form d vort/dt = -u . grad vort with RK4 and the 2/3 rule for
//! the quadratic term. The stream function solves vort = -lap psi, so
//! u = (d_y psi, -d_x psi) and divergence vanishes mode by mode. A stored
//! trajectory doubles as a flow field via `SpectralFlow`.

pub mod checkpoint;
mod flow;

pub use flow::{SpectralFlow, SpectralFlowParams};

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

pub(crate) const ZC: C64 = Complex::new(0.0, 0.0);

/// Signed wavenumber of FFT bin `i` on an `n`-point axis.
fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn check_grid(n: usize) -> Result<()> {
    if !(8..=1024).contains(&n) || !n.is_power_of_two() {
        return Err(Error::Invalid(format!(
            "grid size {n} must be a power of two between 8 and 1024"
        )));
    }
    Ok(())
}

/// Vorticity spectrum at one instant. Coefficients are stored row-major as
/// `[ky][kx]` and normalized so the physical field is the plain sum of
/// c exp(i k.x); bin i carries wavenumber i for i <= n/2 and i - n above.
#[derive(Clone, Debug)]
pub struct SpectralState {
    pub n: usize,
    pub vorticity_hat: Vec<C64>,
    pub t: f64,
}

impl SpectralState {
    pub fn zero(n: usize, t: f64) -> Result<Self> {
        check_grid(n)?;
        Ok(SpectralState {
            n,
            vorticity_hat: vec![ZC; n * n],
            t,
        })
    }

    /// Reality (conjugate symmetry) and the zero-mean gauge, both to 1e-12.
    pub fn validate(&self) -> Result<()> {
        check_grid(self.n)?;
        let n = self.n;
        if self.vorticity_hat.len() != n * n {
            return Err(Error::Invalid(format!(
                "spectrum holds {} coefficients, expected {}",
                self.vorticity_hat.len(),
                n * n
            )));
        }
        let w = &self.vorticity_hat;
        if w[0].norm() > 1e-12 {
            return Err(Error::Invalid(format!(
                "mean vorticity mode is {}, not zero",
                w[0]
            )));
        }
        for iy in 0..n {
            let cy = (n - iy) % n;
            for ix in 0..n {
                let cx = (n - ix) % n;
                let d = (w[iy * n + ix] - w[cy * n + cx].conj()).norm();
                if d > 1e-12 {
                    return Err(Error::Invalid(format!(
                        "conjugate symmetry broken at k=({}, {}) by {d:.3e}",
                        wavenumber(ix, n),
                        wavenumber(iy, n)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Kinetic energy of the induced velocity over the whole torus.
    pub fn energy(&self) -> f64 {
        let n = self.n;
        let mut sum = 0.0;
        for iy in 0..n {
            let ky = wavenumber(iy, n) as f64;
            for ix in 0..n {
                let kx = wavenumber(ix, n) as f64;
                let k2 = kx * kx + ky * ky;
                if k2 > 0.0 {
                    sum += self.vorticity_hat[iy * n + ix].norm_sqr() / k2;
                }
            }
        }
        TAU * TAU * sum
    }

    /// Integral of the squared vorticity over the whole torus.
    pub fn enstrophy(&self) -> f64 {
        let sum: f64 = self.vorticity_hat.iter().map(|c| c.norm_sqr()).sum();
        TAU * TAU * sum
    }
}

/// One real cosine mode: amplitude cos(k.x + phase).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: [i64; 2],
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Explicit list of cosine modes.
    Modes { modes: Vec<ModeSpec> },
    /// Uniform random phases on every lattice mode with band[0] <= |k| <=
    /// band[1], conjugate-symmetrized; `amplitude` is the rms vorticity.
    Random {
        seed: u64,
        band: [f64; 2],
        amplitude: f64,
    },
}

impl InitialCondition {
    pub fn realize(&self, n: usize, t: f64) -> Result<SpectralState> {
        let mut state = SpectralState::zero(n, t)?;
        let cut = (n / 3) as i64;
        let ni = n as i64;
        let put = |w: &mut Vec<C64>, k: [i64; 2], c: C64| {
            let ix = k[0].rem_euclid(ni) as usize;
            let iy = k[1].rem_euclid(ni) as usize;
            w[iy * n + ix] += c;
        };
        match self {
            InitialCondition::Modes { modes } => {
                for m in modes {
                    if m.k == [0, 0] {
                        return Err(Error::Invalid(
                            "a mean mode breaks the zero-mean vorticity gauge".into(),
                        ));
                    }
                    if m.k[0].abs() > cut || m.k[1].abs() > cut {
                        return Err(Error::Invalid(format!(
                            "mode {:?} lies outside the dealiased band |k| <= {cut}",
                            m.k
                        )));
                    }
                    let c = C64::from_polar(0.5 * m.amplitude, m.phase);
                    put(&mut state.vorticity_hat, m.k, c);
                    put(&mut state.vorticity_hat, [-m.k[0], -m.k[1]], c.conj());
                }
            }
            InitialCondition::Random {
                seed,
                band,
                amplitude,
            } => {
                if !(band[0] > 0.0 && band[1] >= band[0]) {
                    return Err(Error::Invalid(format!(
                        "band [{}, {}] must satisfy 0 < lo <= hi",
                        band[0], band[1]
                    )));
                }
                if band[1] > cut as f64 {
                    return Err(Error::Invalid(format!(
                        "band reaches past the dealiased cutoff |k| <= {cut}"
                    )));
                }
                // Half-plane members in a fixed order, mirrored by conjugation.
                let mut half = Vec::new();
                for ky in 0..=cut {
                    for kx in -cut..=cut {
                        if ky == 0 && kx <= 0 {
                            continue;
                        }
                        let r2 = (kx * kx + ky * ky) as f64;
                        if r2 >= band[0] * band[0] && r2 <= band[1] * band[1] {
                            half.push([kx, ky]);
                        }
                    }
                }
                if half.is_empty() {
                    return Err(Error::Invalid(format!(
                        "band [{}, {}] contains no lattice modes",
                        band[0], band[1]
                    )));
                }
                let mag = amplitude / ((2 * half.len()) as f64).sqrt();
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for k in half {
                    let c = C64::from_polar(mag, rng.random::<f64>() * TAU);
                    put(&mut state.vorticity_hat, k, c);
                    put(&mut state.vorticity_hat, [-k[0], -k[1]], c.conj());
                }
            }
        }
        state.validate()?;
        Ok(state)
    }
}

/// Square 2-D FFT: row transforms, transpose, rows again, transpose back.
/// Forward normalizes by 1/n^2 so coefficients feed exp(i k.x) sums directly.
pub(crate) struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
}

impl Fft2 {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Fft2 {
            n,
            fwd,
            inv,
            scratch: vec![ZC; len],
        }
    }

    fn rows(&mut self, data: &mut [C64], forward: bool) {
        let fft = if forward {
            self.fwd.clone()
        } else {
            self.inv.clone()
        };
        for row in data.chunks_exact_mut(self.n) {
            fft.process_with_scratch(row, &mut self.scratch);
        }
    }

    fn transpose(&self, data: &mut [C64]) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                data.swap(i * n + j, j * n + i);
            }
        }
    }

    pub(crate) fn forward(&mut self, data: &mut [C64]) {
        self.rows(data, true);
        self.transpose(data);
        self.rows(data, true);
        self.transpose(data);
        let s = 1.0 / (self.n * self.n) as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }

    pub(crate) fn inverse(&mut self, data: &mut [C64]) {
        self.rows(data, false);
        self.transpose(data);
        self.rows(data, false);
        self.transpose(data);
    }
}

pub struct Solver {
    n: usize,
    fft: Fft2,
}

impl Solver {
    pub fn new(n: usize) -> Result<Self> {
        check_grid(n)?;
        Ok(Solver { n, fft: Fft2::new(n) })
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    fn check_state(&self, state: &SpectralState) -> Result<()> {
        if state.n != self.n || state.vorticity_hat.len() != self.n * self.n {
            return Err(Error::Dimension(format!(
                "state grid {} does not match solver grid {}",
                state.n, self.n
            )));
        }
        Ok(())
    }

    /// u spectra from the vorticity spectrum, dealiased. psi = w / |k|^2.
    fn velocity_spectra(&self, w: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let n = self.n;
        let cut = (n / 3) as i64;
        let mut ux = vec![ZC; n * n];
        let mut uy = vec![ZC; n * n];
        for iy in 0..n {
            let ky = wavenumber(iy, n);
            for ix in 0..n {
                let kx = wavenumber(ix, n);
                if kx.abs() > cut || ky.abs() > cut || (kx == 0 && ky == 0) {
                    continue;
                }
                let k2 = (kx * kx + ky * ky) as f64;
                let psi = w[iy * n + ix] / k2;
                // i ky psi and -i kx psi
                ux[iy * n + ix] = C64::new(-ky as f64 * psi.im, ky as f64 * psi.re);
                uy[iy * n + ix] = C64::new(kx as f64 * psi.im, -kx as f64 * psi.re);
            }
        }
        (ux, uy)
    }

    /// Largest pointwise speed on the collocation grid.
    pub fn max_speed(&mut self, state: &SpectralState) -> Result<f64> {
        self.check_state(state)?;
        let (mut ux, mut uy) = self.velocity_spectra(&state.vorticity_hat);
        self.fft.inverse(&mut ux);
        self.fft.inverse(&mut uy);
        let mut worst = 0.0f64;
        for j in 0..self.n * self.n {
            worst = worst.max(ux[j].re.hypot(uy[j].re));
        }
        Ok(worst)
    }

    /// -dealias(u . grad w), the advection right-hand side in spectral form.
    fn rhs(&mut self, w: &[C64]) -> Vec<C64> {
        let n = self.n;
        let cut = (n / 3) as i64;
        let (mut ux, mut uy) = self.velocity_spectra(w);
        let mut wx = vec![ZC; n * n];
        let mut wy = vec![ZC; n * n];
        for iy in 0..n {
            let ky = wavenumber(iy, n);
            for ix in 0..n {
                let kx = wavenumber(ix, n);
                if kx.abs() > cut || ky.abs() > cut {
                    continue;
                }
                let c = w[iy * n + ix];
                wx[iy * n + ix] = C64::new(-kx as f64 * c.im, kx as f64 * c.re);
                wy[iy * n + ix] = C64::new(-ky as f64 * c.im, ky as f64 * c.re);
            }
        }
        self.fft.inverse(&mut ux);
        self.fft.inverse(&mut uy);
        self.fft.inverse(&mut wx);
        self.fft.inverse(&mut wy);
        // Real parts only: the imaginary residue is transform roundoff and
        // would otherwise leak into the conjugate symmetry.
        let mut out = vec![ZC; n * n];
        for j in 0..n * n {
            out[j] = C64::new(ux[j].re * wx[j].re + uy[j].re * wy[j].re, 0.0);
        }
        self.fft.forward(&mut out);
        for iy in 0..n {
            let ky = wavenumber(iy, n);
            for ix in 0..n {
                let kx = wavenumber(ix, n);
                let z = &mut out[iy * n + ix];
                if kx.abs() > cut || ky.abs() > cut || (kx == 0 && ky == 0) {
                    *z = ZC;
                } else {
                    *z = -*z;
                }
            }
        }
        out
    }

    /// One RK4 step. Rejects steps whose CFL number dt max|u| n / 2pi
    /// reaches 0.5.
    pub fn step(&mut self, state: &SpectralState, dt: f64) -> Result<SpectralState> {
        self.check_state(state)?;
        if !(dt > 0.0) {
            return Err(Error::Invalid(format!("step size {dt} must be positive")));
        }
        let speed = self.max_speed(state)?;
        let cfl = dt * speed * self.n as f64 / TAU;
        if cfl >= 0.5 {
            return Err(Error::Advection(format!(
                "step rejected: CFL number {cfl:.3} at dt={dt} (max speed {speed:.3})"
            )));
        }

        let m = self.n * self.n;
        let w0 = &state.vorticity_hat;
        let combine = |w: &[C64], k: &[C64], h: f64| -> Vec<C64> {
            (0..m).map(|j| w[j] + h * k[j]).collect()
        };
        let k1 = self.rhs(w0);
        let k2 = self.rhs(&combine(w0, &k1, 0.5 * dt));
        let k3 = self.rhs(&combine(w0, &k2, 0.5 * dt));
        let k4 = self.rhs(&combine(w0, &k3, dt));
        let mut w1 = Vec::with_capacity(m);
        for j in 0..m {
            w1.push(w0[j] + dt / 6.0 * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]));
        }
        Ok(SpectralState {
            n: self.n,
            vorticity_hat: w1,
            t: state.t + dt,
        })
    }
}

/// Snapshots of one solver run at uniform cadence, endpoints included.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub n: usize,
    pub times: Vec<f64>,
    pub snaps: Vec<Vec<C64>>,
}

impl Trajectory {
    pub fn validate(&self) -> Result<()> {
        check_grid(self.n)?;
        if self.times.len() != self.snaps.len() || self.times.len() < 2 {
            return Err(Error::Invalid(format!(
                "trajectory holds {} times against {} snapshots",
                self.times.len(),
                self.snaps.len()
            )));
        }
        for s in &self.snaps {
            if s.len() != self.n * self.n {
                return Err(Error::Invalid("snapshot size does not match the grid".into()));
            }
        }
        let d = self.times[1] - self.times[0];
        for k in 1..self.times.len() {
            let step = self.times[k] - self.times[k - 1];
            if (step - d).abs() > 1e-9 * d.abs().max(1.0) || !(step > 0.0) {
                return Err(Error::Invalid(format!(
                    "snapshot times are not uniform: gap {step} vs {d}"
                )));
            }
        }
        Ok(())
    }

    pub fn cadence(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn horizon(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    /// Keep every `factor`-th snapshot: the same dynamics at a coarser
    /// cadence, for interpolation refinement studies. The snapshot count
    /// minus one must be divisible by `factor` so the final time survives.
    pub fn thin(&self, factor: usize) -> Result<Trajectory> {
        let intervals = self.times.len() - 1;
        if factor == 0 || intervals % factor != 0 {
            return Err(Error::Invalid(format!(
                "cannot thin {} snapshot intervals by {factor}",
                intervals
            )));
        }
        let traj = Trajectory {
            n: self.n,
            times: self.times.iter().copied().step_by(factor).collect(),
            snaps: self.snaps.iter().cloned().step_by(factor).collect(),
        };
        traj.validate()?;
        Ok(traj)
    }
}

/// March `steps` steps of size dt from `state`, keeping every `every`-th
/// state. `every` must divide `steps` so the cadence stays uniform through
/// the final time.
pub fn run(
    solver: &mut Solver,
    state: SpectralState,
    dt: f64,
    steps: usize,
    every: usize,
) -> Result<Trajectory> {
    state.validate()?;
    if every == 0 || steps == 0 || steps % every != 0 {
        return Err(Error::Invalid(format!(
            "snapshot cadence {every} must divide the {steps} solver steps"
        )));
    }
    let t0 = state.t;
    let mut times = vec![t0];
    let mut snaps = vec![state.vorticity_hat.clone()];
    let mut st = state;
    for k in 1..=steps {
        st = solver.step(&st, dt)?;
        // Rebuild the clock from the step index so cadence stays exact.
        st.t = t0 + k as f64 * dt;
        if k % every == 0 {
            times.push(st.t);
            snaps.push(st.vorticity_hat.clone());
        }
    }
    let traj = Trajectory {
        n: solver.n,
        times,
        snaps,
    };
    traj.validate()?;
    Ok(traj)
}

/// CFL bound the stepper enforces, exposed for planning step sizes.
pub fn cfl_number(dt: f64, max_speed: f64, n: usize) -> f64 {
    dt * max_speed * n as f64 / TAU
}
