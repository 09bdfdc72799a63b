//! Surface integrals of the transported vorticity quantities, with their
//! boundary fluxes. Everything here works in the Cartesian chart the flow
//! catalog lives in; the geometry layer stays metric-generic.
//!
//! Sign convention: d/dt value = flux, with flux the oriented boundary
//! integral of the flux form. Closed surfaces have flux identically zero.

pub mod checks;

pub use checks::{
    boundary_conditions, lemma_transport_check, spanning_constant, BoundaryConditions,
    SpanningConstant,
};

use std::fmt;
use std::sync::Arc;

use serde::Deserialize;

use crate::advect::{pullback_integrate, SurfaceMesh};
use crate::error::{Error, Result};
use crate::flows::{EnergySign, FlowField, FlowState};
use crate::geom::{AltTensor, Variance};
use crate::util::central_diff4;

// ---------------------------------------------------------------------------
// scalar weights

/// Scalar weight with an exact derivative (and, where available, an exact
/// antiderivative used when a boundary counterpart integral exists).
#[derive(Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightFn {
    Const {
        value: f64,
    },
    Identity,
    Power {
        k: u32,
    },
    #[serde(skip)]
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        df: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for WeightFn {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFn::Const { value } => write!(w, "Const({value})"),
            WeightFn::Identity => write!(w, "Identity"),
            WeightFn::Power { k } => write!(w, "Power({k})"),
            WeightFn::Custom { .. } => write!(w, "Custom"),
        }
    }
}

impl WeightFn {
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            WeightFn::Const { value } => *value,
            WeightFn::Identity => z,
            WeightFn::Power { k } => z.powi(*k as i32),
            WeightFn::Custom { f, .. } => f(z),
        }
    }

    pub fn deriv(&self, z: f64) -> f64 {
        match self {
            WeightFn::Const { .. } => 0.0,
            WeightFn::Identity => 1.0,
            WeightFn::Power { k } => {
                if *k == 0 {
                    0.0
                } else {
                    *k as f64 * z.powi(*k as i32 - 1)
                }
            }
            WeightFn::Custom { df, .. } => df(z),
        }
    }

    /// F with F' = f, fixed by F(0) = 0; None for custom weights.
    pub fn antiderivative(&self, z: f64) -> Option<f64> {
        match self {
            WeightFn::Const { value } => Some(value * z),
            WeightFn::Identity => Some(0.5 * z * z),
            WeightFn::Power { k } => Some(z.powi(*k as i32 + 1) / (*k as f64 + 1.0)),
            WeightFn::Custom { .. } => None,
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, WeightFn::Const { .. } | WeightFn::Power { k: 0 })
    }

    pub fn const_value(&self) -> Option<f64> {
        match self {
            WeightFn::Const { value } => Some(*value),
            WeightFn::Power { k: 0 } => Some(1.0),
            _ => None,
        }
    }
}

/// Weight for the odd-dimensional entropy circulation: a product of a factor
/// in S and a factor in the entropy-circulation ratio c/rho. Either factor
/// may be absent (treated as 1); the c/rho factor needs odd manifold
/// dimension.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyWeight {
    #[serde(default)]
    pub of_entropy: Option<WeightFn>,
    #[serde(default)]
    pub of_vorticity: Option<WeightFn>,
}

impl EntropyWeight {
    pub fn needs_circ_scalar(&self) -> bool {
        self.of_vorticity.is_some()
    }

    pub fn eval(&self, s: f64, z: f64) -> f64 {
        let a = self.of_entropy.as_ref().map_or(1.0, |f| f.eval(s));
        let b = self.of_vorticity.as_ref().map_or(1.0, |f| f.eval(z));
        a * b
    }
}

// ---------------------------------------------------------------------------
// results

/// One integral evaluation: the surface value and the instantaneous boundary
/// flux feeding d(value)/dt. Closed surfaces always carry flux = 0.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct FunctionalValue {
    pub value: f64,
    pub flux: f64,
    pub t: f64,
}

/// Vorticity quantity intrinsic to a frame: a scalar on even-dimensional
/// surfaces, a tangent vector on odd-dimensional ones.
#[derive(Clone, Debug)]
pub struct SurfaceVorticity {
    pub q: usize,
    pub vort_scalar: Option<f64>,
    pub vort_vector: Option<AltTensor>,
}

// ---------------------------------------------------------------------------
// pointwise quantities

fn full_volume_vector(n: usize) -> AltTensor {
    let all: Vec<usize> = (0..n).collect();
    AltTensor::basis(n, &all, Variance::Contravariant).expect("indices in range")
}

/// Vorticity scalar of the flow domain (even dimension): the full
/// contraction of w^(n/2) with the volume tensor.
pub fn manifold_vorticity(state: &FlowState) -> Result<f64> {
    let n = state.dim();
    if n % 2 != 0 {
        return Err(Error::Domain(format!(
            "the vorticity scalar needs even dimension, the flow lives in {n}"
        )));
    }
    let wq = state.vorticity_form().wedge_pow(n / 2)?;
    wq.pairing(&full_volume_vector(n))
}

/// Entropy circulation scalar of the flow domain (odd dimension): the full
/// contraction of dS ^ w^((n-1)/2) with the volume tensor.
pub fn entropy_circ_scalar(state: &FlowState) -> Result<f64> {
    let n = state.dim();
    if n % 2 != 1 {
        return Err(Error::Domain(format!(
            "the entropy circulation scalar needs odd dimension, the flow lives in {n}"
        )));
    }
    let ds = AltTensor::vector(&state.entropy_grad, Variance::Covariant);
    let form = ds.wedge(&state.vorticity_form().wedge_pow((n - 1) / 2)?)?;
    form.pairing(&full_volume_vector(n))
}

/// Vorticity scalar or vector of a tangent frame: the surface volume
/// tensor contracted with w^q restricted to the frame.
pub fn vorticity_of_frame(
    point: &[f64],
    tangents: &nalgebra::DMatrix<f64>,
    orientation: f64,
    state: &FlowState,
) -> Result<SurfaceVorticity> {
    let metric = crate::geom::MetricChart::euclidean(state.dim());
    let eps = crate::geom::surface_volume_tensors(&metric, point, tangents, orientation)?
        .eps_surface;
    let s = tangents.ncols();
    let q = s / 2;
    let wq = state.vorticity_form().wedge_pow(q)?;
    if s % 2 == 0 {
        Ok(SurfaceVorticity {
            q,
            vort_scalar: Some(wq.pairing(&eps)?),
            vort_vector: None,
        })
    } else {
        Ok(SurfaceVorticity {
            q,
            vort_scalar: None,
            vort_vector: Some(wq.contract(&eps)?),
        })
    }
}

// ---------------------------------------------------------------------------
// shared checks

fn check_flow_mesh(flow: &dyn FlowField, mesh: &SurfaceMesh) -> Result<()> {
    if flow.dim() != mesh.adim {
        return Err(Error::Dimension(format!(
            "dimension-{} flow against a mesh in ambient dimension {}",
            flow.dim(),
            mesh.adim
        )));
    }
    Ok(())
}

fn boundary_of<'m>(mesh: &'m SurfaceMesh, what: &str) -> Result<&'m SurfaceMesh> {
    mesh.boundary.as_deref().ok_or_else(|| {
        Error::Invalid(format!(
            "{what} of an open surface needs its boundary mesh"
        ))
    })
}

// ---------------------------------------------------------------------------
// the integrals

/// Loop integral of the velocity form over a closed material curve.
pub fn circulation(mesh: &SurfaceMesh, flow: &dyn FlowField, t: f64) -> Result<FunctionalValue> {
    check_flow_mesh(flow, mesh)?;
    if mesh.sdim != 1 {
        return Err(Error::Degree(format!(
            "circulation lives on curves, not dimension-{} surfaces",
            mesh.sdim
        )));
    }
    if !mesh.closed {
        return Err(Error::Invalid(
            "circulation needs a closed loop; open curves fall under the helicity flux law"
                .into(),
        ));
    }
    let value = pullback_integrate(mesh, |x| Ok(flow.state(x, t)?.velocity_form()))?;
    Ok(FunctionalValue {
        value,
        flux: 0.0,
        t,
    })
}

/// Odd-surface integral of u ^ w^q; its boundary flux is the Bernoulli head
/// times w^q. The head's energy sign is selectable so both sign choices can
/// be run against the balance check.
pub fn helicity(
    mesh: &SurfaceMesh,
    flow: &dyn FlowField,
    t: f64,
    sign: EnergySign,
) -> Result<FunctionalValue> {
    check_flow_mesh(flow, mesh)?;
    if mesh.sdim % 2 != 1 {
        return Err(Error::Degree(format!(
            "helicity needs an odd-dimensional surface, got {}",
            mesh.sdim
        )));
    }
    let q = (mesh.sdim - 1) / 2;
    let value = pullback_integrate(mesh, |x| {
        let st = flow.state(x, t)?;
        st.velocity_form().wedge(&st.vorticity_form().wedge_pow(q)?)
    })?;
    let flux = if mesh.closed {
        0.0
    } else {
        let bd = boundary_of(mesh, "the helicity flux")?;
        pullback_integrate(bd, |x| {
            let st = flow.state(x, t)?;
            let mut wq = st.vorticity_form().wedge_pow(q)?;
            wq.scale(st.bernoulli_head(sign));
            Ok(wq)
        })?
    };
    Ok(FunctionalValue { value, flux, t })
}

/// Even-surface integral of f(vorticity scalar / density) w^q. No boundary
/// term: the integrand itself is transported.
pub fn enstrophy(
    mesh: &SurfaceMesh,
    flow: &dyn FlowField,
    t: f64,
    f: &WeightFn,
) -> Result<FunctionalValue> {
    check_flow_mesh(flow, mesh)?;
    if mesh.sdim % 2 != 0 || mesh.sdim == 0 {
        return Err(Error::Degree(format!(
            "this integral needs an even-dimensional surface, got {}",
            mesh.sdim
        )));
    }
    if flow.dim() % 2 != 0 {
        return Err(Error::Domain(format!(
            "the vorticity scalar is undefined in odd dimension {}; only the constant-weight \
             special cases survive there",
            flow.dim()
        )));
    }
    let q = mesh.sdim / 2;
    let value = pullback_integrate(mesh, |x| {
        let st = flow.state(x, t)?;
        let ratio = manifold_vorticity(&st)? / st.density;
        let mut wq = st.vorticity_form().wedge_pow(q)?;
        wq.scale(f.eval(ratio));
        Ok(wq)
    })?;
    Ok(FunctionalValue {
        value,
        flux: 0.0,
        t,
    })
}

/// Even-surface integral of f(S) w^q with boundary flux
/// q e_S f(S) dS ^ w^(q-1).
pub fn entropy_circ_even(
    mesh: &SurfaceMesh,
    flow: &dyn FlowField,
    t: f64,
    f: &WeightFn,
) -> Result<FunctionalValue> {
    check_flow_mesh(flow, mesh)?;
    if mesh.sdim % 2 != 0 || mesh.sdim == 0 {
        return Err(Error::Degree(format!(
            "this integral needs an even-dimensional surface, got {}",
            mesh.sdim
        )));
    }
    let q = mesh.sdim / 2;
    let value = pullback_integrate(mesh, |x| {
        let st = flow.state(x, t)?;
        let mut wq = st.vorticity_form().wedge_pow(q)?;
        wq.scale(f.eval(st.entropy));
        Ok(wq)
    })?;
    let flux = if mesh.closed {
        0.0
    } else {
        let bd = boundary_of(mesh, "the entropy circulation flux")?;
        pullback_integrate(bd, |x| {
            let st = flow.state(x, t)?;
            let ds = AltTensor::vector(&st.entropy_grad, Variance::Covariant);
            let mut form = ds.wedge(&st.vorticity_form().wedge_pow(q - 1)?)?;
            form.scale(q as f64 * st.de_ds() * f.eval(st.entropy));
            Ok(form)
        })?
    };
    Ok(FunctionalValue { value, flux, t })
}

/// Odd-surface integral of f(S, c/rho) dS ^ w^q. Conserved with no boundary
/// term; the c/rho argument is only defined on odd-dimensional domains.
pub fn entropy_circ_odd(
    mesh: &SurfaceMesh,
    flow: &dyn FlowField,
    t: f64,
    f: &EntropyWeight,
) -> Result<FunctionalValue> {
    check_flow_mesh(flow, mesh)?;
    if mesh.sdim % 2 != 1 {
        return Err(Error::Degree(format!(
            "this integral needs an odd-dimensional surface, got {}",
            mesh.sdim
        )));
    }
    if f.needs_circ_scalar() && flow.dim() % 2 != 1 {
        return Err(Error::Domain(format!(
            "a weight in c/rho needs an odd-dimensional domain, the flow lives in {}",
            flow.dim()
        )));
    }
    let q = (mesh.sdim - 1) / 2;
    let value = pullback_integrate(mesh, |x| {
        let st = flow.state(x, t)?;
        let z = if f.needs_circ_scalar() {
            entropy_circ_scalar(&st)? / st.density
        } else {
            0.0
        };
        let ds = AltTensor::vector(&st.entropy_grad, Variance::Covariant);
        let mut form = ds.wedge(&st.vorticity_form().wedge_pow(q)?)?;
        form.scale(f.eval(st.entropy, z));
        Ok(form)
    })?;
    Ok(FunctionalValue {
        value,
        flux: 0.0,
        t,
    })
}

/// Mass of a full-dimensional material region.
pub fn mass(mesh: &SurfaceMesh, flow: &dyn FlowField, t: f64) -> Result<FunctionalValue> {
    check_flow_mesh(flow, mesh)?;
    if mesh.sdim != mesh.adim {
        return Err(Error::Degree(format!(
            "mass needs a full-dimensional region, got a {}-surface in dimension {}",
            mesh.sdim, mesh.adim
        )));
    }
    let n = mesh.adim;
    let all: Vec<usize> = (0..n).collect();
    let value = pullback_integrate(mesh, |x| {
        let st = flow.state(x, t)?;
        let mut vol = AltTensor::basis(n, &all, Variance::Covariant)?;
        vol.scale(st.density);
        Ok(vol)
    })?;
    Ok(FunctionalValue {
        value,
        flux: 0.0,
        t,
    })
}

// ---------------------------------------------------------------------------
// rearranged forms (integration by parts through w = du, dw = 0); used as
// numerical identities against the primary forms

fn fd_gradient(x: &[f64], mut f: impl FnMut(&[f64]) -> Result<f64>) -> Result<Vec<f64>> {
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for k in 0..x.len() {
        let h = 1e-4 * (1.0 + x[k].abs());
        let mut err = None;
        let g = central_diff4(
            |v| {
                probe[k] = v;
                match f(&probe) {
                    Ok(y) => y,
                    Err(e) => {
                        err = Some(e);
                        f64::NAN
                    }
                }
            },
            x[k],
            h,
        );
        probe[k] = x[k];
        if let Some(e) = err {
            return Err(e);
        }
        grad.push(g);
    }
    Ok(grad)
}

/// f w^q rewritten as d(f u^w^(q-1)) - f' d(vort/rho)^u^w^(q-1): the surface
/// term moves to the boundary by Stokes. Valid with or without boundary.
pub fn enstrophy_rearranged(
    mesh: &SurfaceMesh,
    flow: &dyn FlowField,
    t: f64,
    f: &WeightFn,
) -> Result<f64> {
    check_flow_mesh(flow, mesh)?;
    if mesh.sdim % 2 != 0 || mesh.sdim == 0 {
        return Err(Error::Degree("even-dimensional surfaces only".into()));
    }
    let q = mesh.sdim / 2;
    let ratio_at = |x: &[f64]| {
        let st = flow.state(x, t)?;
        Ok(manifold_vorticity(&st)? / st.density)
    };
    let interior = pullback_integrate(mesh, |x| {
        let st = flow.state(x, t)?;
        let grad = fd_gradient(x, ratio_at)?;
        let dratio = AltTensor::vector(&grad, Variance::Covariant);
        let mut form = dratio
            .wedge(&st.velocity_form())?
            .wedge(&st.vorticity_form().wedge_pow(q - 1)?)?;
        form.scale(f.deriv(ratio_at(x)?));
        Ok(form)
    })?;
    let boundary = if mesh.closed {
        0.0
    } else {
        let bd = boundary_of(mesh, "the rearranged integral")?;
        pullback_integrate(bd, |x| {
            let st = flow.state(x, t)?;
            let mut form = st
                .velocity_form()
                .wedge(&st.vorticity_form().wedge_pow(q - 1)?)?;
            form.scale(f.eval(ratio_at(x)?));
            Ok(form)
        })?
    };
    Ok(boundary - interior)
}

/// f(S) w^q on a closed surface rewritten as -f'(S) dS^u^w^(q-1).
pub fn entropy_circ_even_rearranged(
    mesh: &SurfaceMesh,
    flow: &dyn FlowField,
    t: f64,
    f: &WeightFn,
) -> Result<f64> {
    check_flow_mesh(flow, mesh)?;
    if mesh.sdim % 2 != 0 || mesh.sdim == 0 {
        return Err(Error::Degree("even-dimensional surfaces only".into()));
    }
    if !mesh.closed {
        return Err(Error::Invalid(
            "this rearrangement holds on closed surfaces".into(),
        ));
    }
    let q = mesh.sdim / 2;
    let value = pullback_integrate(mesh, |x| {
        let st = flow.state(x, t)?;
        let ds = AltTensor::vector(&st.entropy_grad, Variance::Covariant);
        let mut form = ds
            .wedge(&st.velocity_form())?
            .wedge(&st.vorticity_form().wedge_pow(q - 1)?)?;
        form.scale(f.deriv(st.entropy));
        Ok(form)
    })?;
    Ok(-value)
}

/// f(c/rho) dS ^ w^q rewritten as d(f S w^q) - f' S d(c/rho) ^ w^q.
pub fn entropy_circ_odd_rearranged(
    mesh: &SurfaceMesh,
    flow: &dyn FlowField,
    t: f64,
    f: &WeightFn,
) -> Result<f64> {
    check_flow_mesh(flow, mesh)?;
    if mesh.sdim % 2 != 1 {
        return Err(Error::Degree("odd-dimensional surfaces only".into()));
    }
    if flow.dim() % 2 != 1 {
        return Err(Error::Domain(
            "c/rho needs an odd-dimensional domain".into(),
        ));
    }
    let q = (mesh.sdim - 1) / 2;
    let ratio_at = |x: &[f64]| {
        let st = flow.state(x, t)?;
        Ok(entropy_circ_scalar(&st)? / st.density)
    };
    let interior = pullback_integrate(mesh, |x| {
        let st = flow.state(x, t)?;
        let grad = fd_gradient(x, ratio_at)?;
        let dratio = AltTensor::vector(&grad, Variance::Covariant);
        let mut form = dratio.wedge(&st.vorticity_form().wedge_pow(q)?)?;
        form.scale(f.deriv(ratio_at(x)?) * st.entropy);
        Ok(form)
    })?;
    let boundary = if mesh.closed {
        0.0
    } else {
        let bd = boundary_of(mesh, "the rearranged integral")?;
        pullback_integrate(bd, |x| {
            let st = flow.state(x, t)?;
            let mut form = st.vorticity_form().wedge_pow(q)?;
            form.scale(f.eval(ratio_at(x)?) * st.entropy);
            Ok(form)
        })?
    };
    Ok(boundary - interior)
}

// ---------------------------------------------------------------------------
// dispatch

/// Config-facing selector for the integrals above.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntegralSpec {
    Circulation,
    Helicity {
        #[serde(default)]
        energy_sign: EnergySign,
    },
    Enstrophy {
        f: WeightFn,
    },
    EntropyCircEven {
        f: WeightFn,
    },
    EntropyCircOdd {
        #[serde(default)]
        f: EntropyWeight,
    },
    Mass,
    SpanningConstant {
        #[serde(default)]
        f: Option<WeightFn>,
    },
}

impl IntegralSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            IntegralSpec::Circulation => "circulation",
            IntegralSpec::Helicity { .. } => "helicity",
            IntegralSpec::Enstrophy { .. } => "enstrophy",
            IntegralSpec::EntropyCircEven { .. } => "entropy_circ_even",
            IntegralSpec::EntropyCircOdd { .. } => "entropy_circ_odd",
            IntegralSpec::Mass => "mass",
            IntegralSpec::SpanningConstant { .. } => "spanning_constant",
        }
    }
}

pub fn evaluate(
    spec: &IntegralSpec,
    mesh: &SurfaceMesh,
    flow: &dyn FlowField,
    t: f64,
) -> Result<FunctionalValue> {
    match spec {
        IntegralSpec::Circulation => circulation(mesh, flow, t),
        IntegralSpec::Helicity { energy_sign } => helicity(mesh, flow, t, *energy_sign),
        IntegralSpec::Enstrophy { f } => enstrophy(mesh, flow, t, f),
        IntegralSpec::EntropyCircEven { f } => entropy_circ_even(mesh, flow, t, f),
        IntegralSpec::EntropyCircOdd { f } => entropy_circ_odd(mesh, flow, t, f),
        IntegralSpec::Mass => mass(mesh, flow, t),
        IntegralSpec::SpanningConstant { f } => {
            let weight = f.clone().unwrap_or(WeightFn::Const { value: 1.0 });
            let sc = spanning_constant(mesh, flow, t, &weight)?;
            Ok(FunctionalValue {
                value: sc.interior,
                flux: 0.0,
                t,
            })
        }
    }
}

/// Precondition advisories: conditions under which the selected integral is
/// still computable but not expected to be conserved.
pub fn conservation_warnings(
    spec: &IntegralSpec,
    mesh: &SurfaceMesh,
    flow: &dyn FlowField,
) -> Vec<String> {
    let mut out = Vec::new();
    let isentropic = flow.is_isentropic();
    match spec {
        IntegralSpec::Circulation | IntegralSpec::Helicity { .. } => {
            if !isentropic {
                out.push(format!(
                    "{} is conserved for isentropic flow; `{}` is not isentropic, expect drift \
                     measuring the entropy source",
                    spec.kind_name(),
                    flow.name()
                ));
            }
            if matches!(spec, IntegralSpec::Helicity { .. }) && !mesh.closed {
                out.push(
                    "open surface: conservation needs the boundary flux to vanish; the report \
                     tracks value drift against the flux balance"
                        .into(),
                );
            }
        }
        IntegralSpec::Enstrophy { .. } => {
            if !isentropic {
                out.push(format!(
                    "enstrophy is conserved for isentropic flow; `{}` is not isentropic",
                    flow.name()
                ));
            }
        }
        IntegralSpec::EntropyCircEven { .. } => {
            if isentropic {
                out.push(
                    "isentropic flow: the entropy circulation integrand has dS = 0 content; \
                     values reduce to constant-weight vorticity integrals"
                        .into(),
                );
            }
            if !mesh.closed {
                out.push(
                    "open surface: conservation needs the entropy-gradient boundary flux to \
                     vanish"
                        .into(),
                );
            }
        }
        IntegralSpec::EntropyCircOdd { .. } => {
            if isentropic {
                out.push("isentropic flow: dS = 0 makes this integral identically zero".into());
            }
        }
        IntegralSpec::Mass | IntegralSpec::SpanningConstant { .. } => {}
    }
    out
}
