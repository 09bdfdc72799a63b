//! Riemannian metric on a coordinate chart.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, Dyn};

use super::alt_tensor::{AltTensor, Variance};
use crate::error::{Error, Result};

pub type MetricFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

const SYMMETRY_TOL: f64 = 1e-12;

/// Metric evaluated pointwise on a chart. The Euclidean case is tracked
/// explicitly so raising and lowering can skip the matrix work.
#[derive(Clone)]
pub struct MetricChart {
    dim: usize,
    field: Option<MetricFn>,
}

impl fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricChart")
            .field("dim", &self.dim)
            .field("euclidean", &self.field.is_none())
            .finish()
    }
}

impl MetricChart {
    pub fn euclidean(dim: usize) -> Self {
        MetricChart { dim, field: None }
    }

    pub fn custom(
        dim: usize,
        g: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        MetricChart {
            dim,
            field: Some(Arc::new(g)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_euclidean(&self) -> bool {
        self.field.is_none()
    }

    pub fn matrix(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        match &self.field {
            None => Ok(DMatrix::identity(self.dim, self.dim)),
            Some(g) => {
                let m = g(point);
                if m.nrows() != self.dim || m.ncols() != self.dim {
                    return Err(Error::Metric(format!(
                        "metric returned a {}x{} matrix on a dimension-{} chart",
                        m.nrows(),
                        m.ncols(),
                        self.dim
                    )));
                }
                for i in 0..self.dim {
                    for j in (i + 1)..self.dim {
                        if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL {
                            return Err(Error::Metric(format!(
                                "metric asymmetric at {point:?}: g[{i},{j}]={} vs g[{j},{i}]={}",
                                m[(i, j)],
                                m[(j, i)]
                            )));
                        }
                    }
                }
                Ok(m)
            }
        }
    }

    fn cholesky(&self, point: &[f64]) -> Result<Cholesky<f64, Dyn>> {
        let m = self.matrix(point)?;
        Cholesky::new(m).ok_or_else(|| {
            Error::Metric(format!("metric not positive definite at {point:?}"))
        })
    }

    pub fn sqrt_det(&self, point: &[f64]) -> Result<f64> {
        if self.is_euclidean() {
            return Ok(1.0);
        }
        let chol = self.cholesky(point)?;
        let mut s = 1.0;
        for i in 0..self.dim {
            s *= chol.l_dirty()[(i, i)];
        }
        Ok(s)
    }

    pub fn inverse(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        if self.is_euclidean() {
            return Ok(DMatrix::identity(self.dim, self.dim));
        }
        Ok(self.cholesky(point)?.inverse())
    }

    /// Raise indices. Euclidean charts only flip the variance tag.
    pub fn sharp(&self, x: &AltTensor, point: &[f64]) -> Result<AltTensor> {
        if x.variance() != Variance::Covariant {
            return Err(Error::Variance(
                "sharp applies to covariant tensors".into(),
            ));
        }
        if self.is_euclidean() {
            return AltTensor::from_coeffs(
                x.dim(),
                x.degree(),
                Variance::Contravariant,
                x.components().to_vec(),
            );
        }
        x.transform_compound(&self.inverse(point)?, Variance::Contravariant)
    }

    /// Lower indices.
    pub fn flat(&self, x: &AltTensor, point: &[f64]) -> Result<AltTensor> {
        if x.variance() != Variance::Contravariant {
            return Err(Error::Variance(
                "flat applies to contravariant tensors".into(),
            ));
        }
        if self.is_euclidean() {
            return AltTensor::from_coeffs(
                x.dim(),
                x.degree(),
                Variance::Covariant,
                x.components().to_vec(),
            );
        }
        x.transform_compound(&self.matrix(point)?, Variance::Covariant)
    }

    /// Oriented metric volume form, sqrt(det g) dx0∧...∧dx(n-1).
    pub fn volume_form(&self, point: &[f64]) -> Result<AltTensor> {
        let all: Vec<usize> = (0..self.dim).collect();
        let base = AltTensor::basis(self.dim, &all, Variance::Covariant)?;
        Ok(base.scaled(self.sqrt_det(point)?))
    }

    /// Dual volume: the n-vector pairing to 1 against the volume form.
    pub fn volume_vector(&self, point: &[f64]) -> Result<AltTensor> {
        let all: Vec<usize> = (0..self.dim).collect();
        let base = AltTensor::basis(self.dim, &all, Variance::Contravariant)?;
        Ok(base.scaled(1.0 / self.sqrt_det(point)?))
    }

    pub fn inner_vec(&self, u: &[f64], v: &[f64], point: &[f64]) -> Result<f64> {
        if u.len() != self.dim || v.len() != self.dim {
            return Err(Error::Dimension(format!(
                "vectors of lengths {} and {} on a dimension-{} chart",
                u.len(),
                v.len(),
                self.dim
            )));
        }
        if self.is_euclidean() {
            return Ok(u.iter().zip(v).map(|(a, b)| a * b).sum());
        }
        let g = self.matrix(point)?;
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += u[i] * g[(i, j)] * v[j];
            }
        }
        Ok(acc)
    }

    pub fn norm_vec(&self, v: &[f64], point: &[f64]) -> Result<f64> {
        Ok(self.inner_vec(v, v, point)?.sqrt())
    }

    /// Gram matrix columns^T g columns of a set of column vectors.
    pub fn gram(&self, columns: &DMatrix<f64>, point: &[f64]) -> Result<DMatrix<f64>> {
        if columns.nrows() != self.dim {
            return Err(Error::Dimension(format!(
                "column vectors of length {} on a dimension-{} chart",
                columns.nrows(),
                self.dim
            )));
        }
        if self.is_euclidean() {
            return Ok(columns.transpose() * columns);
        }
        Ok(columns.transpose() * self.matrix(point)? * columns)
    }
}
