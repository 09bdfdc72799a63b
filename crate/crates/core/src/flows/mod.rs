//! Closed-form velocity fields with full thermodynamic state.
//!
//! Every flow reports velocity, its Jacobian, density, pressure, and entropy
//! together with their analytic spatial gradients. Charts are Cartesian;
//! the ideal-gas closure is P = rho^gamma exp(S), which fixes the internal
//! energy as e = exp(S) rho^(gamma-1) / (gamma-1). Incompressible members of
//! the catalog carry e = 0 and constant entropy.

pub mod catalog;
pub mod residual;

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geom::{AltTensor, Variance};

pub use catalog::{
    Abc, BoostedAbc, IsentropicVortex, Profile, RigidRotation, StratifiedShear, TaylorGreen,
    Uniform,
};
pub use residual::{euler_residual, sample_points, FdGradients, ResidualReport};

/// Which way the internal energy enters the Bernoulli head. The transport
/// identities close with `Minus`; `Plus` is kept so the alternative can be
/// run side by side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySign {
    Minus,
    Plus,
}

impl Default for EnergySign {
    fn default() -> Self {
        EnergySign::Minus
    }
}

pub mod eos {
    /// P = rho^gamma exp(S).
    pub fn pressure(rho: f64, s: f64, gamma: f64) -> f64 {
        rho.powf(gamma) * s.exp()
    }

    /// e with P = rho^2 de/drho: e = exp(S) rho^(gamma-1) / (gamma-1),
    /// integration constant zero.
    pub fn internal_energy(rho: f64, s: f64, gamma: f64) -> f64 {
        s.exp() * rho.powf(gamma - 1.0) / (gamma - 1.0)
    }

    /// de/dS at fixed density; equal to e itself for this closure.
    pub fn de_ds(rho: f64, s: f64, gamma: f64) -> f64 {
        internal_energy(rho, s, gamma)
    }
}

/// Pointwise flow state. `velocity_grad[(i, j)]` is du^i/dx_j.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub velocity: Vec<f64>,
    pub velocity_grad: DMatrix<f64>,
    pub density: f64,
    pub density_grad: Vec<f64>,
    pub pressure: f64,
    pub pressure_grad: Vec<f64>,
    pub entropy: f64,
    pub entropy_grad: Vec<f64>,
    /// None marks the incompressible members: e = 0 and no gas closure.
    pub gamma: Option<f64>,
}

impl FlowState {
    pub fn dim(&self) -> usize {
        self.velocity.len()
    }

    pub fn internal_energy(&self) -> f64 {
        match self.gamma {
            None => 0.0,
            Some(g) => eos::internal_energy(self.density, self.entropy, g),
        }
    }

    pub fn de_ds(&self) -> f64 {
        match self.gamma {
            None => 0.0,
            Some(g) => eos::de_ds(self.density, self.entropy, g),
        }
    }

    /// Spatial gradient of de/dS, assembled from the stored state gradients.
    pub fn de_ds_grad(&self) -> Vec<f64> {
        let n = self.dim();
        match self.gamma {
            None => vec![0.0; n],
            Some(g) => {
                let e = eos::internal_energy(self.density, self.entropy, g);
                let drho = self.entropy.exp() * self.density.powf(g - 2.0);
                (0..n)
                    .map(|i| e * self.entropy_grad[i] + drho * self.density_grad[i])
                    .collect()
            }
        }
    }

    /// u lowered with the Cartesian metric.
    pub fn velocity_form(&self) -> AltTensor {
        AltTensor::vector(&self.velocity, Variance::Covariant)
    }

    /// Vorticity two-form d(u flat): w_ij = d_i u_j - d_j u_i.
    pub fn vorticity_form(&self) -> AltTensor {
        let n = self.dim();
        let mut w = AltTensor::zero(n, 2, Variance::Covariant);
        for i in 0..n {
            for j in (i + 1)..n {
                let val = self.velocity_grad[(j, i)] - self.velocity_grad[(i, j)];
                w.set_by_indices(&[i, j], val).unwrap();
            }
        }
        w
    }

    pub fn divergence(&self) -> f64 {
        (0..self.dim()).map(|i| self.velocity_grad[(i, i)]).sum()
    }

    /// Bernoulli head: |u|²/2 ± e - p/rho.
    pub fn bernoulli_head(&self, sign: EnergySign) -> f64 {
        let ke: f64 = self.velocity.iter().map(|u| 0.5 * u * u).sum();
        let e = self.internal_energy();
        let signed = match sign {
            EnergySign::Minus => -e,
            EnergySign::Plus => e,
        };
        ke + signed - self.pressure / self.density
    }
}

pub trait FlowField: Send + Sync {
    fn dim(&self) -> usize;
    fn state(&self, x: &[f64], t: f64) -> Result<FlowState>;
    /// Velocity and its Jacobian alone, the only fields advection needs.
    /// Flows whose secondary fields are expensive override this.
    fn kinematics(&self, x: &[f64], t: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let st = self.state(x, t)?;
        Ok((st.velocity, st.velocity_grad))
    }
    fn is_steady(&self) -> bool;
    /// Constant entropy everywhere.
    fn is_isentropic(&self) -> bool;
    fn name(&self) -> &'static str;
    /// Axis-aligned box the flow considers representative, for residual
    /// sampling and random placement.
    fn sample_domain(&self) -> Vec<(f64, f64)>;
}

fn param<T: serde::de::DeserializeOwned>(params: &serde_json::Value) -> Result<T> {
    serde_json::from_value(params.clone())
        .map_err(|e| Error::Invalid(format!("flow parameters: {e}")))
}

/// Names the registry accepts, in catalog order.
pub fn catalog_names() -> &'static [&'static str] {
    &[
        "rigid_rotation",
        "taylor_green",
        "abc",
        "boosted_abc",
        "isentropic_vortex",
        "stratified_shear",
        "uniform",
        "spectral",
    ]
}

/// Build a flow from its registry name and a JSON parameter object.
/// `{}` selects documented defaults for every flow except `spectral`,
/// which needs an `ic` block (solve now) or a `checkpoint` path (load).
pub fn build(name: &str, params: &serde_json::Value) -> Result<std::sync::Arc<dyn FlowField>> {
    use std::sync::Arc;
    Ok(match name {
        "rigid_rotation" => Arc::new(RigidRotation::from_params(param(params)?)?),
        "taylor_green" => {
            let _: catalog::NoParams = param(params)?;
            Arc::new(TaylorGreen)
        }
        "abc" => Arc::new(Abc::from_params(param(params)?)),
        "boosted_abc" => Arc::new(BoostedAbc::from_params(param(params)?)),
        "isentropic_vortex" => Arc::new(IsentropicVortex::from_params(param(params)?)?),
        "stratified_shear" => Arc::new(StratifiedShear::from_params(param(params)?)?),
        "uniform" => Arc::new(Uniform::from_params(param(params)?)?),
        "spectral" => {
            let p: crate::spectral::SpectralFlowParams = param(params)?;
            Arc::new(crate::spectral::SpectralFlow::from_params(p)?)
        }
        other => {
            return Err(Error::Invalid(format!(
                "unknown flow `{other}`; available: {}",
                catalog_names().join(", ")
            )))
        }
    })
}

/// Ambient dimension of a catalog entry, without paying for construction.
/// The spectral flow may replay a long solve in `build`; everything a config
/// validator needs is that its fields parse and that it lives in the plane.
pub fn dim_of(name: &str, params: &serde_json::Value) -> Result<usize> {
    if name == "spectral" {
        let _: crate::spectral::SpectralFlowParams = param(params)?;
        return Ok(2);
    }
    build(name, params).map(|f| f.dim())
}
