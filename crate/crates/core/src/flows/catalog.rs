//! The flow catalog. Gradients are written out by hand per flow; the
//! finite-difference wrapper in `residual` cross-checks them in tests.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Deserialize;

use super::{FlowField, FlowState};
use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

fn check_dim(x: &[f64], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::Dimension(format!(
            "point of length {} in a dimension-{dim} flow",
            x.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoParams {}

/// Scalar profile of one coordinate with an analytic derivative.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Const {
        value: f64,
    },
    Linear {
        #[serde(default = "one")]
        slope: f64,
        #[serde(default)]
        offset: f64,
    },
    Sin {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        wavenumber: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Const { value } => value,
            Profile::Linear { slope, offset } => slope * x + offset,
            Profile::Sin {
                amplitude,
                wavenumber,
                phase,
                offset,
            } => amplitude * (wavenumber * x + phase).sin() + offset,
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match *self {
            Profile::Const { .. } => 0.0,
            Profile::Linear { slope, .. } => slope,
            Profile::Sin {
                amplitude,
                wavenumber,
                phase,
                ..
            } => amplitude * wavenumber * (wavenumber * x + phase).cos(),
        }
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidRotationParams {
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default = "two_dims")]
    pub dim: usize,
}

fn two_dims() -> usize {
    2
}

/// Solid-body rotation about the origin (axis z in three dimensions).
pub struct RigidRotation {
    omega: f64,
    dim: usize,
}

impl RigidRotation {
    pub fn new(omega: f64, dim: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Invalid(format!(
                "rigid rotation lives in 2 or 3 dimensions, got {dim}"
            )));
        }
        Ok(RigidRotation { omega, dim })
    }

    pub(crate) fn from_params(p: RigidRotationParams) -> Result<Self> {
        Self::new(p.omega, p.dim)
    }
}

impl FlowField for RigidRotation {
    fn dim(&self) -> usize {
        self.dim
    }

    fn state(&self, x: &[f64], _t: f64) -> Result<FlowState> {
        check_dim(x, self.dim)?;
        let n = self.dim;
        let w = self.omega;
        let mut velocity = vec![0.0; n];
        velocity[0] = -w * x[1];
        velocity[1] = w * x[0];
        let mut grad = DMatrix::zeros(n, n);
        grad[(0, 1)] = -w;
        grad[(1, 0)] = w;
        let mut pressure_grad = vec![0.0; n];
        pressure_grad[0] = w * w * x[0];
        pressure_grad[1] = w * w * x[1];
        Ok(FlowState {
            velocity,
            velocity_grad: grad,
            density: 1.0,
            density_grad: vec![0.0; n],
            pressure: 0.5 * w * w * (x[0] * x[0] + x[1] * x[1]),
            pressure_grad,
            entropy: 0.0,
            entropy_grad: vec![0.0; n],
            gamma: None,
        })
    }

    fn is_steady(&self) -> bool {
        true
    }

    fn is_isentropic(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "rigid_rotation"
    }

    fn sample_domain(&self) -> Vec<(f64, f64)> {
        vec![(-1.5, 1.5); self.dim]
    }
}

// ---------------------------------------------------------------------------

/// The steady cellular flow with stream function sin(x) sin(y).
pub struct TaylorGreen;

impl FlowField for TaylorGreen {
    fn dim(&self) -> usize {
        2
    }

    fn state(&self, x: &[f64], _t: f64) -> Result<FlowState> {
        check_dim(x, 2)?;
        let (sx, cx) = x[0].sin_cos();
        let (sy, cy) = x[1].sin_cos();
        let velocity = vec![sx * cy, -cx * sy];
        let mut grad = DMatrix::zeros(2, 2);
        grad[(0, 0)] = cx * cy;
        grad[(0, 1)] = -sx * sy;
        grad[(1, 0)] = sx * sy;
        grad[(1, 1)] = -cx * cy;
        // Steady momentum balance pins p = (cos 2x + cos 2y)/4.
        let pressure = 0.25 * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos());
        let pressure_grad = vec![-0.5 * (2.0 * x[0]).sin(), -0.5 * (2.0 * x[1]).sin()];
        Ok(FlowState {
            velocity,
            velocity_grad: grad,
            density: 1.0,
            density_grad: vec![0.0; 2],
            pressure,
            pressure_grad,
            entropy: 0.0,
            entropy_grad: vec![0.0; 2],
            gamma: None,
        })
    }

    fn is_steady(&self) -> bool {
        true
    }

    fn is_isentropic(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "taylor_green"
    }

    fn sample_domain(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 2.0 * PI); 2]
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbcParams {
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    #[serde(default = "one")]
    pub c: f64,
}

/// The triply periodic Beltrami flow: curl u = u.
pub struct Abc {
    a: f64,
    b: f64,
    c: f64,
}

impl Abc {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Abc { a, b, c }
    }

    pub(crate) fn from_params(p: AbcParams) -> Self {
        Abc::new(p.a, p.b, p.c)
    }

    fn eval(&self, x: &[f64]) -> (Vec<f64>, DMatrix<f64>, f64, Vec<f64>) {
        let (sx, cx) = x[0].sin_cos();
        let (sy, cy) = x[1].sin_cos();
        let (sz, cz) = x[2].sin_cos();
        let (a, b, c) = (self.a, self.b, self.c);
        let u = vec![a * sz + c * cy, b * sx + a * cz, c * sy + b * cx];
        let mut grad = DMatrix::zeros(3, 3);
        grad[(0, 1)] = -c * sy;
        grad[(0, 2)] = a * cz;
        grad[(1, 0)] = b * cx;
        grad[(1, 2)] = -a * sz;
        grad[(2, 0)] = -b * sx;
        grad[(2, 1)] = c * cy;
        let speed2: f64 = u.iter().map(|v| v * v).sum();
        let pressure = -0.5 * speed2;
        let pressure_grad: Vec<f64> = (0..3)
            .map(|i| -(0..3).map(|k| u[k] * grad[(k, i)]).sum::<f64>())
            .collect();
        (u, grad, pressure, pressure_grad)
    }
}

impl FlowField for Abc {
    fn dim(&self) -> usize {
        3
    }

    fn state(&self, x: &[f64], _t: f64) -> Result<FlowState> {
        check_dim(x, 3)?;
        let (velocity, velocity_grad, pressure, pressure_grad) = self.eval(x);
        Ok(FlowState {
            velocity,
            velocity_grad,
            density: 1.0,
            density_grad: vec![0.0; 3],
            pressure,
            pressure_grad,
            entropy: 0.0,
            entropy_grad: vec![0.0; 3],
            gamma: None,
        })
    }

    fn is_steady(&self) -> bool {
        true
    }

    fn is_isentropic(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "abc"
    }

    fn sample_domain(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 2.0 * PI); 3]
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoostedAbcParams {
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default)]
    pub boost: [f64; 3],
}

/// Galilean boost of the Beltrami flow: u(x,t) = U + u0(x - U t).
pub struct BoostedAbc {
    inner: Abc,
    boost: [f64; 3],
}

impl BoostedAbc {
    pub fn new(a: f64, b: f64, c: f64, boost: [f64; 3]) -> Self {
        BoostedAbc {
            inner: Abc::new(a, b, c),
            boost,
        }
    }

    pub(crate) fn from_params(p: BoostedAbcParams) -> Self {
        BoostedAbc::new(p.a, p.b, p.c, p.boost)
    }
}

impl FlowField for BoostedAbc {
    fn dim(&self) -> usize {
        3
    }

    fn state(&self, x: &[f64], t: f64) -> Result<FlowState> {
        check_dim(x, 3)?;
        let shifted: Vec<f64> = (0..3).map(|i| x[i] - self.boost[i] * t).collect();
        let mut st = self.inner.state(&shifted, 0.0)?;
        for i in 0..3 {
            st.velocity[i] += self.boost[i];
        }
        Ok(st)
    }

    fn is_steady(&self) -> bool {
        self.boost == [0.0; 3]
    }

    fn is_isentropic(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "boosted_abc"
    }

    fn sample_domain(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 2.0 * PI); 3]
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsentropicVortexParams {
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_beta() -> f64 {
    5.0
}

fn default_gamma() -> f64 {
    1.4
}

/// Compressible vortex riding a unit free stream along x, centered at the
/// origin at t = 0. Entropy is exactly zero everywhere.
pub struct IsentropicVortex {
    beta: f64,
    gamma: f64,
}

impl IsentropicVortex {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        if gamma <= 1.0 {
            return Err(Error::Invalid(format!("gamma must exceed 1, got {gamma}")));
        }
        let core_deficit =
            (gamma - 1.0) * beta * beta / (8.0 * gamma * PI * PI) * 1.0f64.exp();
        if core_deficit >= 1.0 {
            return Err(Error::Invalid(format!(
                "vortex strength beta={beta} drives the core temperature to {:.3} <= 0",
                1.0 - core_deficit
            )));
        }
        Ok(IsentropicVortex { beta, gamma })
    }

    pub(crate) fn from_params(p: IsentropicVortexParams) -> Result<Self> {
        Self::new(p.beta, p.gamma)
    }
}

impl FlowField for IsentropicVortex {
    fn dim(&self) -> usize {
        2
    }

    fn state(&self, x: &[f64], t: f64) -> Result<FlowState> {
        check_dim(x, 2)?;
        let g = self.gamma;
        let dx = x[0] - t;
        let dy = x[1];
        let r2 = dx * dx + dy * dy;
        let phi = self.beta / (2.0 * PI) * (0.5 * (1.0 - r2)).exp();

        let velocity = vec![1.0 - phi * dy, phi * dx];
        let mut grad = DMatrix::zeros(2, 2);
        grad[(0, 0)] = phi * dx * dy;
        grad[(0, 1)] = phi * (dy * dy - 1.0);
        grad[(1, 0)] = phi * (1.0 - dx * dx);
        grad[(1, 1)] = -phi * dx * dy;

        let kk = (g - 1.0) * self.beta * self.beta / (8.0 * g * PI * PI);
        let deficit = kk * (1.0 - r2).exp();
        let temp = 1.0 - deficit;
        if temp <= 0.0 {
            return Err(Error::Domain(format!(
                "temperature {temp:.3e} at {x:?}; vortex core too strong"
            )));
        }
        let density = temp.powf(1.0 / (g - 1.0));
        let pressure = density * temp;
        // dT = 2 (1 - T) (dx, dy); chain everything through that.
        let tx = 2.0 * dx * deficit;
        let ty = 2.0 * dy * deficit;
        let density_grad = vec![
            density / ((g - 1.0) * temp) * tx,
            density / ((g - 1.0) * temp) * ty,
        ];
        let pressure_grad = vec![
            g / (g - 1.0) * density * tx,
            g / (g - 1.0) * density * ty,
        ];

        Ok(FlowState {
            velocity,
            velocity_grad: grad,
            density,
            density_grad,
            pressure,
            pressure_grad,
            entropy: 0.0,
            entropy_grad: vec![0.0; 2],
            gamma: Some(g),
        })
    }

    fn is_steady(&self) -> bool {
        false
    }

    fn is_isentropic(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "isentropic_vortex"
    }

    fn sample_domain(&self) -> Vec<(f64, f64)> {
        vec![(-4.0, 4.0); 2]
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratifiedShearParams {
    #[serde(default = "two_dims")]
    pub dim: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "one")]
    pub p0: f64,
    #[serde(default = "default_shear")]
    pub shear: Profile,
    #[serde(default = "default_entropy")]
    pub entropy: Profile,
}

fn default_shear() -> Profile {
    Profile::Sin {
        amplitude: 1.0,
        wavenumber: 1.0,
        phase: 0.0,
        offset: 0.0,
    }
}

fn default_entropy() -> Profile {
    Profile::Sin {
        amplitude: 0.5,
        wavenumber: 1.0,
        phase: 0.0,
        offset: 0.0,
    }
}

/// Parallel shear u = (U(y), 0, ...) at constant pressure, with entropy
/// stratified along the last coordinate. Density follows from the gas
/// closure: rho = (p0 exp(-S))^(1/gamma).
pub struct StratifiedShear {
    dim: usize,
    gamma: f64,
    p0: f64,
    shear: Profile,
    entropy: Profile,
}

impl StratifiedShear {
    pub fn new(dim: usize, gamma: f64, p0: f64, shear: Profile, entropy: Profile) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Invalid(format!(
                "stratified shear lives in 2 or 3 dimensions, got {dim}"
            )));
        }
        if gamma <= 1.0 {
            return Err(Error::Invalid(format!("gamma must exceed 1, got {gamma}")));
        }
        if p0 <= 0.0 {
            return Err(Error::Invalid(format!(
                "background pressure must be positive, got {p0}"
            )));
        }
        Ok(StratifiedShear {
            dim,
            gamma,
            p0,
            shear,
            entropy,
        })
    }

    pub(crate) fn from_params(p: StratifiedShearParams) -> Result<Self> {
        Self::new(p.dim, p.gamma, p.p0, p.shear, p.entropy)
    }

    fn strat_axis(&self) -> usize {
        self.dim - 1
    }
}

impl FlowField for StratifiedShear {
    fn dim(&self) -> usize {
        self.dim
    }

    fn state(&self, x: &[f64], _t: f64) -> Result<FlowState> {
        check_dim(x, self.dim)?;
        let n = self.dim;
        let g = self.gamma;
        let axis = self.strat_axis();

        let mut velocity = vec![0.0; n];
        velocity[0] = self.shear.eval(x[1]);
        let mut grad = DMatrix::zeros(n, n);
        grad[(0, 1)] = self.shear.deriv(x[1]);

        let s = self.entropy.eval(x[axis]);
        let s_prime = self.entropy.deriv(x[axis]);
        let density = (self.p0 * (-s).exp()).powf(1.0 / g);
        let mut density_grad = vec![0.0; n];
        density_grad[axis] = -density * s_prime / g;
        let mut entropy_grad = vec![0.0; n];
        entropy_grad[axis] = s_prime;

        Ok(FlowState {
            velocity,
            velocity_grad: grad,
            density,
            density_grad,
            pressure: self.p0,
            pressure_grad: vec![0.0; n],
            entropy: s,
            entropy_grad,
            gamma: Some(g),
        })
    }

    fn is_steady(&self) -> bool {
        true
    }

    fn is_isentropic(&self) -> bool {
        matches!(self.entropy, Profile::Const { .. })
            || matches!(
                self.entropy,
                Profile::Linear { slope, .. } if slope == 0.0
            )
            || matches!(
                self.entropy,
                Profile::Sin { amplitude, .. } if amplitude == 0.0
            )
    }

    fn name(&self) -> &'static str {
        "stratified_shear"
    }

    fn sample_domain(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 2.0 * PI); self.dim]
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformParams {
    #[serde(default = "default_stream")]
    pub velocity: Vec<f64>,
}

fn default_stream() -> Vec<f64> {
    vec![1.0, 0.0]
}

/// Constant translation; the trivial member of the catalog.
pub struct Uniform {
    velocity: Vec<f64>,
}

impl Uniform {
    pub fn new(velocity: Vec<f64>) -> Result<Self> {
        let n = velocity.len();
        if n < 1 || n > crate::geom::multi_index::MAX_DIM {
            return Err(Error::Invalid(format!(
                "uniform flow in dimension {n} is out of range"
            )));
        }
        Ok(Uniform { velocity })
    }

    pub(crate) fn from_params(p: UniformParams) -> Result<Self> {
        Self::new(p.velocity)
    }
}

impl FlowField for Uniform {
    fn dim(&self) -> usize {
        self.velocity.len()
    }

    fn state(&self, x: &[f64], _t: f64) -> Result<FlowState> {
        check_dim(x, self.dim())?;
        let n = self.dim();
        Ok(FlowState {
            velocity: self.velocity.clone(),
            velocity_grad: DMatrix::zeros(n, n),
            density: 1.0,
            density_grad: vec![0.0; n],
            pressure: 0.0,
            pressure_grad: vec![0.0; n],
            entropy: 0.0,
            entropy_grad: vec![0.0; n],
            gamma: None,
        })
    }

    fn is_steady(&self) -> bool {
        true
    }

    fn is_isentropic(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "uniform"
    }

    fn sample_domain(&self) -> Vec<(f64, f64)> {
        vec![(-1.0, 1.0); self.dim()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::eos;

    #[test]
    fn cellular_flow_frozen_values() {
        let tg = TaylorGreen;
        let st = tg.state(&[PI / 2.0, 0.0], 0.0).unwrap();
        assert_eq!(st.velocity, vec![1.0, 0.0]);
        let w = tg
            .state(&[PI / 2.0, PI / 2.0], 0.0)
            .unwrap()
            .vorticity_form();
        assert!((w.components()[0] - 2.0).abs() < 1e-15);
        // stagnation points sit on the cell corners
        let corner = tg.state(&[PI, PI], 0.0).unwrap();
        assert!(corner.velocity[0].abs() < 1e-15);
        assert!(corner.velocity[1].abs() < 1e-15);
    }

    #[test]
    fn beltrami_curl_equals_velocity() {
        let f = Abc::new(1.0, 0.7, 1.3);
        for (i, x) in [[0.3, 1.9, 4.4], [2.0, 0.1, 5.5], [1.0, 1.0, 1.0]]
            .iter()
            .enumerate()
        {
            let st = f.state(x, 0.0).unwrap();
            let w = st.vorticity_form();
            let curl = [
                w.coeff_by_indices(&[1, 2]),
                -w.coeff_by_indices(&[0, 2]),
                w.coeff_by_indices(&[0, 1]),
            ];
            for k in 0..3 {
                assert!(
                    (curl[k] - st.velocity[k]).abs() < 1e-14,
                    "case {i} component {k}: {} vs {}",
                    curl[k],
                    st.velocity[k]
                );
            }
            assert!(st.divergence().abs() < 1e-14);
        }
    }

    #[test]
    fn boost_shifts_the_pattern() {
        let base = Abc::new(1.0, 1.0, 1.0);
        let moved = BoostedAbc::new(1.0, 1.0, 1.0, [0.3, 0.2, 0.1]);
        let t = 0.7;
        let x = [1.1, 2.2, 3.3];
        let shifted = [x[0] - 0.3 * t, x[1] - 0.2 * t, x[2] - 0.1 * t];
        let a = base.state(&shifted, 0.0).unwrap();
        let b = moved.state(&x, t).unwrap();
        for i in 0..3 {
            assert!((b.velocity[i] - a.velocity[i] - [0.3, 0.2, 0.1][i]).abs() < 1e-15);
        }
        assert_eq!(a.pressure, b.pressure);
        assert!(!moved.is_steady());
        assert!(BoostedAbc::new(1.0, 1.0, 1.0, [0.0; 3]).is_steady());
    }

    #[test]
    fn vortex_is_exactly_isentropic() {
        let f = IsentropicVortex::new(5.0, 1.4).unwrap();
        for x in [[0.0, 0.0], [1.3, -0.4], [0.1, 2.0], [-3.0, 1.0]] {
            let st = f.state(&x, 0.6).unwrap();
            assert_eq!(st.entropy, 0.0);
            let p_from_eos = eos::pressure(st.density, st.entropy, 1.4);
            assert!(
                (st.pressure - p_from_eos).abs() < 1e-14 * st.pressure,
                "p {} vs closure {}",
                st.pressure,
                p_from_eos
            );
        }
        // free stream at the moving center
        let st = f.state(&[0.6, 0.0], 0.6).unwrap();
        assert!((st.velocity[0] - 1.0).abs() < 1e-15);
        assert!(st.velocity[1].abs() < 1e-15);
    }

    #[test]
    fn vortex_core_strength_is_validated() {
        assert!(IsentropicVortex::new(40.0, 1.4).is_err());
    }

    #[test]
    fn shear_state_honors_the_closure() {
        let f = StratifiedShear::new(
            3,
            1.4,
            2.0,
            Profile::Sin {
                amplitude: 1.0,
                wavenumber: 1.0,
                phase: 0.0,
                offset: 0.0,
            },
            Profile::Linear {
                slope: 0.2,
                offset: 0.1,
            },
        )
        .unwrap();
        let st = f.state(&[0.4, 1.0, 2.5], 0.0).unwrap();
        assert_eq!(st.velocity, vec![1.0f64.sin(), 0.0, 0.0]);
        assert_eq!(st.entropy, 0.2 * 2.5 + 0.1);
        let p = eos::pressure(st.density, st.entropy, 1.4);
        assert!((p - 2.0).abs() < 1e-14, "closure gives p = {p}");
        // entropy varies along z only, shear along y only
        assert_eq!(st.entropy_grad[0], 0.0);
        assert_eq!(st.entropy_grad[1], 0.0);
        assert!(st.entropy_grad[2] != 0.0);
        assert!(!f.is_isentropic());
    }

    #[test]
    fn rigid_rotation_speed_grows_with_radius() {
        let f = RigidRotation::new(2.0, 3).unwrap();
        let st = f.state(&[3.0, 4.0, 1.0], 0.0).unwrap();
        let speed: f64 = st.velocity.iter().map(|u| u * u).sum::<f64>().sqrt();
        assert!((speed - 10.0).abs() < 1e-14);
        let w = st.vorticity_form();
        assert!((w.coeff_by_indices(&[0, 1]) - 4.0).abs() < 1e-15);
        assert_eq!(w.coeff_by_indices(&[0, 2]), 0.0);
    }

    #[test]
    fn profiles_deserialize_from_tagged_tables() {
        let p: Profile =
            serde_json::from_value(serde_json::json!({"kind": "sin", "amplitude": 2.0}))
                .unwrap();
        assert_eq!(p.eval(PI / 2.0), 2.0);
        let p: Profile = serde_json::from_value(serde_json::json!({"kind": "const", "value": 3.0}))
            .unwrap();
        assert_eq!(p.deriv(9.0), 0.0);
        assert!(serde_json::from_value::<Profile>(serde_json::json!({"kind": "cubic"})).is_err());
    }
}
