//! Alternating tensors with compressed component storage.
//!
//! Components are kept only for strictly increasing index sets, ordered as
//! in [`super::multi_index`]. All products use the determinant convention:
//! (dx0 ∧ dx1)(e0, e1) = 1, and contraction of a p-tensor into a k-tensor
//! sums over increasing p-sets only, which absorbs the usual 1/p! weight.

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::json;

use super::multi_index::{
    binomial, index_sets, indices_from_mask, mask_from_indices, merge_sign, rank, sort_sign,
    MAX_DIM,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Variance {
    Covariant,
    Contravariant,
}

impl Variance {
    pub fn opposite(self) -> Self {
        match self {
            Variance::Covariant => Variance::Contravariant,
            Variance::Contravariant => Variance::Covariant,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AltTensor {
    dim: u8,
    degree: u8,
    variance: Variance,
    coeffs: Vec<f64>,
}

/// Determinant of the k x k matrix given by an entry getter. Sizes through 3
/// are expanded; larger ones run in-place elimination on a stack buffer.
pub(crate) fn det_indexed(k: usize, entry: impl Fn(usize, usize) -> f64) -> f64 {
    match k {
        0 => 1.0,
        1 => entry(0, 0),
        2 => entry(0, 0) * entry(1, 1) - entry(0, 1) * entry(1, 0),
        3 => {
            let (a, b, c) = (entry(0, 0), entry(0, 1), entry(0, 2));
            let (d, e, f) = (entry(1, 0), entry(1, 1), entry(1, 2));
            let (g, h, i) = (entry(2, 0), entry(2, 1), entry(2, 2));
            a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
        }
        _ => {
            assert!(k <= MAX_DIM);
            let mut a = [[0.0f64; MAX_DIM]; MAX_DIM];
            for (r, row) in a.iter_mut().enumerate().take(k) {
                for (c, slot) in row.iter_mut().enumerate().take(k) {
                    *slot = entry(r, c);
                }
            }
            let mut det = 1.0;
            for col in 0..k {
                let mut pivot = col;
                for r in (col + 1)..k {
                    if a[r][col].abs() > a[pivot][col].abs() {
                        pivot = r;
                    }
                }
                if a[pivot][col] == 0.0 {
                    return 0.0;
                }
                if pivot != col {
                    a.swap(pivot, col);
                    det = -det;
                }
                det *= a[col][col];
                for r in (col + 1)..k {
                    let factor = a[r][col] / a[col][col];
                    for c in (col + 1)..k {
                        a[r][c] -= factor * a[col][c];
                    }
                }
            }
            det
        }
    }
}

#[inline]
fn mask_positions(mask: u8) -> ([usize; MAX_DIM], usize) {
    let mut out = [0usize; MAX_DIM];
    let mut len = 0;
    let mut rest = mask;
    while rest != 0 {
        out[len] = rest.trailing_zeros() as usize;
        len += 1;
        rest &= rest - 1;
    }
    (out, len)
}

impl AltTensor {
    pub fn zero(dim: usize, degree: usize, variance: Variance) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        AltTensor {
            dim: dim as u8,
            degree: degree as u8,
            variance,
            coeffs: vec![0.0; binomial(dim, degree)],
        }
    }

    /// Degree-0 element. Variance is immaterial at degree 0; products accept
    /// either.
    pub fn scalar(dim: usize, value: f64) -> Self {
        let mut t = AltTensor::zero(dim, 0, Variance::Covariant);
        t.coeffs[0] = value;
        t
    }

    pub fn from_coeffs(
        dim: usize,
        degree: usize,
        variance: Variance,
        coeffs: Vec<f64>,
    ) -> Result<Self> {
        let want = binomial(dim, degree);
        if coeffs.len() != want {
            return Err(Error::Dimension(format!(
                "degree {degree} in dimension {dim} takes {want} components, got {}",
                coeffs.len()
            )));
        }
        Ok(AltTensor {
            dim: dim as u8,
            degree: degree as u8,
            variance,
            coeffs,
        })
    }

    /// Unit basis element for the given coordinate indices, e.g. dx1 ∧ dx3.
    /// Indices may arrive in any order; the sorting sign is applied.
    pub fn basis(dim: usize, indices: &[usize], variance: Variance) -> Result<Self> {
        for &i in indices {
            if i >= dim {
                return Err(Error::Dimension(format!(
                    "index {i} out of range for dimension {dim}"
                )));
            }
        }
        let sign = sort_sign(indices)
            .ok_or_else(|| Error::Invalid(format!("repeated index in {indices:?}")))?;
        let mut t = AltTensor::zero(dim, indices.len(), variance);
        t.coeffs[rank(mask_from_indices(indices))] = sign;
        Ok(t)
    }

    pub fn vector(components: &[f64], variance: Variance) -> Self {
        AltTensor {
            dim: components.len() as u8,
            degree: 1,
            variance,
            coeffs: components.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn degree(&self) -> usize {
        self.degree as usize
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn components(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn components_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, mask: u8) -> f64 {
        debug_assert_eq!(mask.count_ones() as usize, self.degree());
        self.coeffs[rank(mask)]
    }

    /// Component for an arbitrary index tuple; repeated indices give 0 and
    /// out-of-order tuples pick up the sorting sign.
    pub fn coeff_by_indices(&self, indices: &[usize]) -> f64 {
        match sort_sign(indices) {
            None => 0.0,
            Some(sign) => sign * self.coeff(mask_from_indices(indices)),
        }
    }

    pub fn set_by_indices(&mut self, indices: &[usize], value: f64) -> Result<()> {
        if indices.len() != self.degree() {
            return Err(Error::Degree(format!(
                "{} indices for a degree-{} tensor",
                indices.len(),
                self.degree
            )));
        }
        let sign = sort_sign(indices)
            .ok_or_else(|| Error::Invalid(format!("repeated index in {indices:?}")))?;
        let r = rank(mask_from_indices(indices));
        self.coeffs[r] = sign * value;
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for c in &mut self.coeffs {
            *c *= factor;
        }
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.scale(factor);
        self
    }

    pub fn add_scaled(&mut self, other: &Self, factor: f64) -> Result<()> {
        if self.dim != other.dim || self.degree != other.degree || self.variance != other.variance
        {
            return Err(Error::Dimension(format!(
                "shape mismatch: degree {} {:?} in dim {} vs degree {} {:?} in dim {}",
                self.degree, self.variance, self.dim, other.degree, other.variance, other.dim
            )));
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += factor * b;
        }
        Ok(())
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "wedge across dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        let variance = if self.degree == 0 {
            other.variance
        } else if other.degree == 0 {
            self.variance
        } else if self.variance != other.variance {
            return Err(Error::Variance(format!(
                "wedge of {:?} with {:?}",
                self.variance, other.variance
            )));
        } else {
            self.variance
        };
        let n = self.dim();
        let deg = self.degree() + other.degree();
        let mut out = AltTensor {
            dim: self.dim,
            degree: deg as u8,
            variance,
            coeffs: vec![0.0; binomial(n, deg)],
        };
        if deg > n {
            // Λ^deg is trivial past the dimension; keep the zero.
            return Ok(out);
        }
        for (jpos, &jm) in index_sets(n, self.degree()).iter().enumerate() {
            let a = self.coeffs[jpos];
            if a == 0.0 {
                continue;
            }
            for (kpos, &km) in index_sets(n, other.degree()).iter().enumerate() {
                if jm & km != 0 {
                    continue;
                }
                let b = other.coeffs[kpos];
                if b == 0.0 {
                    continue;
                }
                out.coeffs[rank(jm | km)] += merge_sign(jm, km) * a * b;
            }
        }
        Ok(out)
    }

    pub fn wedge_pow(&self, power: usize) -> Result<Self> {
        let mut acc = AltTensor {
            dim: self.dim,
            degree: 0,
            variance: self.variance,
            coeffs: vec![1.0],
        };
        for _ in 0..power {
            acc = acc.wedge(self)?;
        }
        Ok(acc)
    }

    /// Contraction pairing opposite variances. The lower-degree operand is
    /// slotted into the leading arguments of the higher-degree one; with
    /// equal degrees this is the full pairing (a degree-0 result).
    pub fn contract(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "contraction across dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        if self.degree > 0 && other.degree > 0 && self.variance == other.variance {
            return Err(Error::Variance(format!(
                "contraction needs one covariant and one contravariant operand, got two {:?}",
                self.variance
            )));
        }
        let (lo, hi) = if self.degree <= other.degree {
            (self, other)
        } else {
            (other, self)
        };
        let n = self.dim();
        let d = hi.degree() - lo.degree();
        let mut out = AltTensor::zero(n, d, hi.variance);
        for (jpos, &jm) in index_sets(n, lo.degree()).iter().enumerate() {
            let x = lo.coeffs[jpos];
            if x == 0.0 {
                continue;
            }
            for (lpos, &lm) in index_sets(n, d).iter().enumerate() {
                if jm & lm != 0 {
                    continue;
                }
                out.coeffs[lpos] += x * hi.coeffs[rank(jm | lm)] * merge_sign(jm, lm);
            }
        }
        Ok(out)
    }

    pub fn pairing(&self, other: &Self) -> Result<f64> {
        if self.degree != other.degree {
            return Err(Error::Degree(format!(
                "pairing of degree {} with degree {}",
                self.degree, other.degree
            )));
        }
        Ok(self.contract(other)?.coeffs[0])
    }

    /// Apply the degree-k compound of an n x n matrix:
    /// out_I = sum_J det(m[I, J]) self_J. Index raising and lowering both
    /// take this shape, with m the inverse metric or the metric.
    pub fn transform_compound(&self, m: &DMatrix<f64>, variance: Variance) -> Result<Self> {
        let n = self.dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension(format!(
                "{}x{} matrix applied to a dimension-{n} tensor",
                m.nrows(),
                m.ncols()
            )));
        }
        let k = self.degree();
        let sets = index_sets(n, k);
        let mut out = AltTensor::zero(n, k, variance);
        for (ipos, &im) in sets.iter().enumerate() {
            let (rows, _) = mask_positions(im);
            let mut acc = 0.0;
            for (jpos, &jm) in sets.iter().enumerate() {
                let x = self.coeffs[jpos];
                if x == 0.0 {
                    continue;
                }
                let (cols, _) = mask_positions(jm);
                acc += x * det_indexed(k, |r, c| m[(rows[r], cols[c])]);
            }
            out.coeffs[ipos] = acc;
        }
        Ok(out)
    }

    /// Value on k column vectors: sum_I coeff_I det(columns[I, :]).
    pub fn evaluate(&self, columns: &DMatrix<f64>) -> Result<f64> {
        let k = self.degree();
        if columns.ncols() != k {
            return Err(Error::Degree(format!(
                "degree-{k} tensor applied to {} arguments",
                columns.ncols()
            )));
        }
        if columns.nrows() != self.dim() {
            return Err(Error::Dimension(format!(
                "arguments live in dimension {}, tensor in {}",
                columns.nrows(),
                self.dim
            )));
        }
        let mut acc = 0.0;
        for (ipos, &im) in index_sets(self.dim(), k).iter().enumerate() {
            let a = self.coeffs[ipos];
            if a == 0.0 {
                continue;
            }
            let (rows, _) = mask_positions(im);
            acc += a * det_indexed(k, |r, c| columns[(rows[r], c)]);
        }
        Ok(acc)
    }

    pub fn describe(&self) -> serde_json::Value {
        let indices: Vec<Vec<usize>> = index_sets(self.dim(), self.degree())
            .iter()
            .map(|&m| indices_from_mask(m))
            .collect();
        json!({
            "degree": self.degree,
            "variance": self.variance,
            "indices": indices,
            "coeffs": self.coeffs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn cov(dim: usize, indices: &[usize]) -> AltTensor {
        AltTensor::basis(dim, indices, Variance::Covariant).unwrap()
    }

    #[test]
    fn wedge_of_coordinate_forms() {
        let dx = cov(2, &[0]);
        let dy = cov(2, &[1]);
        let area = dx.wedge(&dy).unwrap();
        assert_eq!(area.components(), &[1.0]);
        let flipped = dy.wedge(&dx).unwrap();
        assert_eq!(flipped.components(), &[-1.0]);
    }

    #[test]
    fn square_of_a_symplectic_two_form() {
        // (dx0∧dx1 + dx2∧dx3)^2 = 2 dx0∧dx1∧dx2∧dx3
        let mut w = AltTensor::zero(4, 2, Variance::Covariant);
        w.set_by_indices(&[0, 1], 1.0).unwrap();
        w.set_by_indices(&[2, 3], 1.0).unwrap();
        let sq = w.wedge_pow(2).unwrap();
        assert_eq!(sq.degree(), 4);
        assert_eq!(sq.components(), &[2.0]);
    }

    #[test]
    fn wedge_past_dimension_vanishes() {
        let w = cov(2, &[0, 1]);
        let overflow = w.wedge(&cov(2, &[0])).unwrap();
        assert_eq!(overflow.degree(), 3);
        assert!(overflow.components().is_empty());
        assert_eq!(overflow.norm_inf(), 0.0);
    }

    #[test]
    fn first_slot_contraction() {
        let e0 = AltTensor::vector(&[1.0, 0.0], Variance::Contravariant);
        let area = cov(2, &[0, 1]);
        let rest = e0.contract(&area).unwrap();
        assert_eq!(rest.components(), &[0.0, 1.0]); // dx1
    }

    #[test]
    fn contraction_into_the_volume_gives_the_curl() {
        // Components (a, b, c) on {01, 02, 12} map to the vector (c, -b, a).
        let mut w = AltTensor::zero(3, 2, Variance::Covariant);
        w.set_by_indices(&[0, 1], 3.0).unwrap();
        w.set_by_indices(&[0, 2], 5.0).unwrap();
        w.set_by_indices(&[1, 2], 7.0).unwrap();
        let vol = AltTensor::basis(3, &[0, 1, 2], Variance::Contravariant).unwrap();
        let curl = w.contract(&vol).unwrap();
        assert_eq!(curl.components(), &[7.0, -5.0, 3.0]);
    }

    #[test]
    fn pairing_of_equal_degrees() {
        let mut w = AltTensor::zero(4, 2, Variance::Covariant);
        w.set_by_indices(&[0, 1], 1.0).unwrap();
        w.set_by_indices(&[2, 3], 1.0).unwrap();
        let sq = w.wedge_pow(2).unwrap();
        let vol = AltTensor::basis(4, &[0, 1, 2, 3], Variance::Contravariant).unwrap();
        assert_eq!(vol.pairing(&sq).unwrap(), 2.0);
    }

    #[test]
    fn contract_rejects_matching_variances() {
        let a = cov(3, &[0]);
        let b = cov(3, &[0, 1]);
        assert!(matches!(a.contract(&b), Err(Error::Variance(_))));
    }

    #[test]
    fn evaluate_is_a_determinant() {
        let area = cov(3, &[0, 2]);
        let cols = dmatrix![
            2.0, 1.0;
            9.0, 9.0;
            0.0, 4.0;
        ];
        assert_eq!(area.evaluate(&cols).unwrap(), 8.0);
    }

    #[test]
    fn compound_transform_lowers_with_a_diagonal_metric() {
        let g = dmatrix![2.0, 0.0; 0.0, 3.0];
        let v = AltTensor::vector(&[1.0, 1.0], Variance::Contravariant);
        let low = v.transform_compound(&g, Variance::Covariant).unwrap();
        assert_eq!(low.components(), &[2.0, 3.0]);

        let bi = AltTensor::basis(2, &[0, 1], Variance::Contravariant).unwrap();
        let low2 = bi.transform_compound(&g, Variance::Covariant).unwrap();
        assert_eq!(low2.components(), &[6.0]);
    }

    #[test]
    fn unsorted_component_access_carries_the_sign() {
        let mut w = AltTensor::zero(3, 2, Variance::Covariant);
        w.set_by_indices(&[2, 1], 4.0).unwrap();
        assert_eq!(w.coeff_by_indices(&[1, 2]), -4.0);
        assert_eq!(w.coeff_by_indices(&[2, 1]), 4.0);
        assert_eq!(w.coeff_by_indices(&[1, 1]), 0.0);
    }

    #[test]
    fn det_indexed_handles_larger_sizes() {
        // Permutation-like 5x5 with one dense row keeps the pivot path honest.
        let m = dmatrix![
            0.0, 1.0, 0.0, 0.0, 0.0;
            1.0, 0.0, 0.0, 0.0, 0.0;
            0.0, 0.0, 2.0, 1.0, 1.0;
            0.0, 0.0, 0.0, 3.0, 1.0;
            0.0, 0.0, 0.0, 0.0, 4.0;
        ];
        let d = det_indexed(5, |r, c| m[(r, c)]);
        assert!((d - (-24.0)).abs() < 1e-12, "det {d}");
    }
}
