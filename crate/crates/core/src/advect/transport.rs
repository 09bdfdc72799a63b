//! Time stepping of material nodes: positions by the velocity, frames by
//! the velocity gradient, advanced together in one classical RK4 stage
//! sequence so both see the same intermediate states.

use nalgebra::DMatrix;

use super::mesh::{MaterialNode, SurfaceMesh};
use crate::error::{Error, Result};
use crate::flows::FlowField;

#[derive(Clone, Copy, Debug)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Invalid(format!("step size {dt} must be positive")));
        }
        if t1 <= t0 {
            return Err(Error::Invalid(format!(
                "time interval [{t0}, {t1}] is empty"
            )));
        }
        let raw = (t1 - t0) / dt;
        if (raw - raw.round()).abs() > 1e-12 * raw.max(1.0) {
            return Err(Error::Invalid(format!(
                "dt={dt} does not divide [{t0}, {t1}]: {raw} steps"
            )));
        }
        Ok(TimeGrid { t0, t1, dt })
    }

    pub fn steps(&self) -> usize {
        ((self.t1 - self.t0) / self.dt).round() as usize
    }

    /// t0 + k dt without accumulation error.
    pub fn time_at(&self, step: usize) -> f64 {
        if step == self.steps() {
            self.t1
        } else {
            self.t0 + step as f64 * self.dt
        }
    }
}

struct Stage {
    dx: Vec<f64>,
    dj: DMatrix<f64>,
}

fn stage(flow: &dyn FlowField, x: &[f64], j: &DMatrix<f64>, t: f64) -> Result<Stage> {
    let (u, grad) = flow.kinematics(x, t)?;
    Ok(Stage {
        dj: &grad * j,
        dx: u,
    })
}

/// One RK4 step of (x, J) with dx/dt = u(x,t) and dJ/dt = (grad u) J.
pub fn rk4_step(flow: &dyn FlowField, node: &mut MaterialNode, t: f64, dt: f64) -> Result<()> {
    let x0 = node.position.clone();
    let j0 = node.frame.clone();
    let n = x0.len();

    let shift = |x: &[f64], dx: &Vec<f64>, h: f64| -> Vec<f64> {
        (0..n).map(|i| x[i] + h * dx[i]).collect()
    };

    let k1 = stage(flow, &x0, &j0, t)?;
    let k2 = stage(
        flow,
        &shift(&x0, &k1.dx, 0.5 * dt),
        &(&j0 + &k1.dj * (0.5 * dt)),
        t + 0.5 * dt,
    )?;
    let k3 = stage(
        flow,
        &shift(&x0, &k2.dx, 0.5 * dt),
        &(&j0 + &k2.dj * (0.5 * dt)),
        t + 0.5 * dt,
    )?;
    let k4 = stage(flow, &shift(&x0, &k3.dx, dt), &(&j0 + &k3.dj * dt), t + dt)?;

    for i in 0..n {
        node.position[i] =
            x0[i] + dt / 6.0 * (k1.dx[i] + 2.0 * k2.dx[i] + 2.0 * k3.dx[i] + k4.dx[i]);
    }
    node.frame = j0 + (k1.dj + (k2.dj + k3.dj) * 2.0 + k4.dj) * (dt / 6.0);
    Ok(())
}

pub fn step_all(flow: &dyn FlowField, mesh: &mut SurfaceMesh, t: f64, dt: f64) -> Result<()> {
    for node in &mut mesh.nodes {
        rk4_step(flow, node, t, dt)?;
    }
    if let Some(b) = &mut mesh.boundary {
        step_all(flow, b, t, dt)?;
    }
    Ok(())
}

/// Advance the mesh (and its boundary, in lockstep) over `steps` steps of
/// size dt starting at time t.
pub fn advect_mesh(
    flow: &dyn FlowField,
    mesh: &mut SurfaceMesh,
    t: f64,
    dt: f64,
    steps: usize,
) -> Result<()> {
    if flow.dim() != mesh.adim {
        return Err(Error::Dimension(format!(
            "dimension-{} flow cannot move a mesh in ambient dimension {}",
            flow.dim(),
            mesh.adim
        )));
    }
    for k in 0..steps {
        step_all(flow, mesh, t + k as f64 * dt, dt)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{RigidRotation, Uniform};
    use nalgebra::dmatrix;

    fn single_node(x: Vec<f64>, frame: DMatrix<f64>) -> MaterialNode {
        MaterialNode {
            ref_coords: vec![0.0; x.len()],
            position: x,
            frame,
            weight: 1.0,
        }
    }

    #[test]
    fn uniform_flow_translates_and_keeps_frames() {
        let flow = Uniform::new(vec![0.5, -1.0]).unwrap();
        let mut node = single_node(vec![1.0, 2.0], dmatrix![1.0, 0.0; 0.0, 1.0]);
        for k in 0..10 {
            rk4_step(&flow, &mut node, 0.1 * k as f64, 0.1).unwrap();
        }
        assert!((node.position[0] - 1.5).abs() < 1e-14);
        assert!((node.position[1] - 1.0).abs() < 1e-14);
        assert_eq!(node.frame, dmatrix![1.0, 0.0; 0.0, 1.0]);
    }

    #[test]
    fn rotation_moves_frames_like_positions() {
        let w = 1.3f64;
        let flow = RigidRotation::new(w, 2).unwrap();
        let mut node = single_node(vec![1.0, 0.0], dmatrix![1.0, 0.0; 0.0, 1.0]);
        let dt = 1e-3;
        let steps = 1000;
        for k in 0..steps {
            rk4_step(&flow, &mut node, dt * k as f64, dt).unwrap();
        }
        let a = w * dt * steps as f64;
        assert!((node.position[0] - a.cos()).abs() < 1e-12);
        assert!((node.position[1] - a.sin()).abs() < 1e-12);
        // J must be the rotation matrix itself
        assert!((node.frame[(0, 0)] - a.cos()).abs() < 1e-12);
        assert!((node.frame[(1, 0)] - a.sin()).abs() < 1e-12);
        assert!((node.frame[(0, 1)] + a.sin()).abs() < 1e-12);
        assert!((node.frame[(1, 1)] - a.cos()).abs() < 1e-12);
    }

    #[test]
    fn time_grid_rejects_fractional_step_counts() {
        assert!(TimeGrid::new(0.0, 1.0, 1e-3).is_ok());
        assert!(TimeGrid::new(0.0, 1.0, 3e-4).is_err());
        assert!(TimeGrid::new(0.0, 0.0, 1e-3).is_err());
        let grid = TimeGrid::new(0.0, 0.5, 1e-3).unwrap();
        assert_eq!(grid.steps(), 500);
        assert_eq!(grid.time_at(grid.steps()), 0.5);
    }
}
