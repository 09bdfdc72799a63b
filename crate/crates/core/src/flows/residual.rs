//! Pointwise verification that a flow satisfies the compressible Euler
//! system, including the vorticity transport law with its entropy source.

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::{FlowField, FlowState};
use crate::error::Result;
use crate::util::central_diff4;

const TIME_H: f64 = 1e-4;
const SPACE_H: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub samples: usize,
    pub max_momentum: f64,
    /// None for flows without a gas closure (constant density by fiat).
    pub max_continuity: Option<f64>,
    pub max_entropy: f64,
    pub max_curl_transport: f64,
}

impl ResidualReport {
    pub fn worst(&self) -> f64 {
        self.max_momentum
            .max(self.max_continuity.unwrap_or(0.0))
            .max(self.max_entropy)
            .max(self.max_curl_transport)
    }
}

/// Uniform sample points over the flow's own domain box, paired with times
/// in [0, 1]. Deterministic in the seed.
pub fn sample_points(flow: &dyn FlowField, count: usize, seed: u64) -> Vec<(Vec<f64>, f64)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let domain = flow.sample_domain();
    (0..count)
        .map(|_| {
            let x: Vec<f64> = domain
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..hi))
                .collect();
            let t = if flow.is_steady() {
                0.0
            } else {
                rng.random_range(0.0..1.0)
            };
            (x, t)
        })
        .collect()
}

fn vorticity_at(flow: &dyn FlowField, x: &[f64], t: f64) -> Result<Vec<f64>> {
    Ok(flow.state(x, t)?.vorticity_form().components().to_vec())
}

pub fn euler_residual(flow: &dyn FlowField, points: &[(Vec<f64>, f64)]) -> Result<ResidualReport> {
    let n = flow.dim();
    let mut max_momentum = 0.0f64;
    let mut max_continuity: Option<f64> = None;
    let mut max_entropy = 0.0f64;
    let mut max_curl = 0.0f64;

    for (x, t) in points {
        let st = flow.state(x, *t)?;
        let steady = flow.is_steady();

        let u_t: Vec<f64> = if steady {
            vec![0.0; n]
        } else {
            let mut out = vec![0.0; n];
            for (i, slot) in out.iter_mut().enumerate() {
                *slot = central_diff4(
                    |tau| flow.state(x, tau).map(|s| s.velocity[i]).unwrap_or(f64::NAN),
                    *t,
                    TIME_H,
                );
            }
            out
        };

        let mut momentum2 = 0.0;
        for i in 0..n {
            let advect: f64 = (0..n).map(|k| st.velocity[k] * st.velocity_grad[(i, k)]).sum();
            let r = u_t[i] + advect + st.pressure_grad[i] / st.density;
            momentum2 += r * r;
        }
        max_momentum = max_momentum.max(momentum2.sqrt());

        if st.gamma.is_some() {
            let rho_t = if steady {
                0.0
            } else {
                central_diff4(
                    |tau| flow.state(x, tau).map(|s| s.density).unwrap_or(f64::NAN),
                    *t,
                    TIME_H,
                )
            };
            let advect: f64 = (0..n).map(|k| st.velocity[k] * st.density_grad[k]).sum();
            let r = (rho_t + advect + st.density * st.divergence()).abs();
            max_continuity = Some(max_continuity.unwrap_or(0.0).max(r));
        }

        let s_t = if steady {
            0.0
        } else {
            central_diff4(
                |tau| flow.state(x, tau).map(|s| s.entropy).unwrap_or(f64::NAN),
                *t,
                TIME_H,
            )
        };
        let s_adv: f64 = (0..n).map(|k| st.velocity[k] * st.entropy_grad[k]).sum();
        max_entropy = max_entropy.max((s_t + s_adv).abs());

        max_curl = max_curl.max(curl_transport_residual(flow, &st, x, *t)?);
    }

    Ok(ResidualReport {
        samples: points.len(),
        max_momentum,
        max_continuity,
        max_entropy,
        max_curl_transport: max_curl,
    })
}

/// |d/dt w + L_u w - de_S ∧ dS| in the max norm over components. Spatial
/// derivatives of the vorticity come from fourth-order differences of the
/// analytic state.
fn curl_transport_residual(
    flow: &dyn FlowField,
    st: &FlowState,
    x: &[f64],
    t: f64,
) -> Result<f64> {
    let n = flow.dim();
    let w = st.vorticity_form();
    let m = w.components().len();

    let mut w_x: Vec<Vec<f64>> = Vec::with_capacity(n); // w_x[k][pos] = d_k w[pos]
    for k in 0..n {
        let h = SPACE_H * (1.0 + x[k].abs());
        let mut shifted = x.to_vec();
        let mut sample = |delta: f64| -> Result<Vec<f64>> {
            shifted[k] = x[k] + delta;
            vorticity_at(flow, &shifted, t)
        };
        let p2 = sample(2.0 * h)?;
        let p1 = sample(h)?;
        let m1 = sample(-h)?;
        let m2 = sample(-2.0 * h)?;
        w_x.push(
            (0..m)
                .map(|pos| (-p2[pos] + 8.0 * p1[pos] - 8.0 * m1[pos] + m2[pos]) / (12.0 * h))
                .collect(),
        );
    }

    let w_t: Vec<f64> = if flow.is_steady() {
        vec![0.0; m]
    } else {
        let p2 = vorticity_at(flow, x, t + 2.0 * TIME_H)?;
        let p1 = vorticity_at(flow, x, t + TIME_H)?;
        let m1 = vorticity_at(flow, x, t - TIME_H)?;
        let m2 = vorticity_at(flow, x, t - 2.0 * TIME_H)?;
        (0..m)
            .map(|pos| (-p2[pos] + 8.0 * p1[pos] - 8.0 * m1[pos] + m2[pos]) / (12.0 * TIME_H))
            .collect()
    };

    let w_of = |comps: &[f64], i: usize, j: usize| -> f64 {
        use crate::geom::multi_index::{mask_from_indices, rank};
        if i == j {
            0.0
        } else if i < j {
            comps[rank(mask_from_indices(&[i, j]))]
        } else {
            -comps[rank(mask_from_indices(&[j, i]))]
        }
    };

    let de = st.de_ds_grad();
    let ds = &st.entropy_grad;

    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let transport: f64 = (0..n)
                .map(|k| {
                    st.velocity[k] * w_of(&w_x[k], i, j)
                        + w_of(w.components(), k, j) * st.velocity_grad[(k, i)]
                        + w_of(w.components(), i, k) * st.velocity_grad[(k, j)]
                })
                .sum();
            let source = de[i] * ds[j] - de[j] * ds[i];
            let r = w_of(&w_t, i, j) + transport - source;
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

/// Wrapper replacing every analytic spatial gradient with a fourth-order
/// difference of the wrapped flow. Lets tests confirm the hand-written
/// Jacobians, and exercises downstream code without analytic derivatives.
pub struct FdGradients<F: FlowField> {
    inner: F,
    h: f64,
}

impl<F: FlowField> FdGradients<F> {
    pub fn new(inner: F) -> Self {
        FdGradients {
            inner,
            h: SPACE_H,
        }
    }
}

impl<F: FlowField> FlowField for FdGradients<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn state(&self, x: &[f64], t: f64) -> Result<FlowState> {
        let n = self.inner.dim();
        let mut st = self.inner.state(x, t)?;
        let mut velocity_grad = DMatrix::zeros(n, n);
        let mut density_grad = vec![0.0; n];
        let mut pressure_grad = vec![0.0; n];
        let mut entropy_grad = vec![0.0; n];
        for k in 0..n {
            let h = self.h * (1.0 + x[k].abs());
            let mut shifted = x.to_vec();
            let mut states = Vec::with_capacity(4);
            for delta in [2.0 * h, h, -h, -2.0 * h] {
                shifted[k] = x[k] + delta;
                states.push(self.inner.state(&shifted, t)?);
            }
            let diff = |f: &dyn Fn(&FlowState) -> f64| -> f64 {
                (-f(&states[0]) + 8.0 * f(&states[1]) - 8.0 * f(&states[2]) + f(&states[3]))
                    / (12.0 * h)
            };
            for i in 0..n {
                velocity_grad[(i, k)] = diff(&|s| s.velocity[i]);
            }
            density_grad[k] = diff(&|s| s.density);
            pressure_grad[k] = diff(&|s| s.pressure);
            entropy_grad[k] = diff(&|s| s.entropy);
        }
        st.velocity_grad = velocity_grad;
        st.density_grad = density_grad;
        st.pressure_grad = pressure_grad;
        st.entropy_grad = entropy_grad;
        Ok(st)
    }

    fn is_steady(&self) -> bool {
        self.inner.is_steady()
    }

    fn is_isentropic(&self) -> bool {
        self.inner.is_isentropic()
    }

    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn sample_domain(&self) -> Vec<(f64, f64)> {
        self.inner.sample_domain()
    }
}
