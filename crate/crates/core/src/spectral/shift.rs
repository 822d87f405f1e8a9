use nalgebra::DMatrix;

use super::{check_len, fourier_transform, FourierOperator, Signal, SpectralError};
use crate::closure::ClosureOperator;
use crate::dag::PosetView;

/// `T_q` assembled entry by entry from
/// `(T_q s)_x = sum_{y <= x, y <= q} w_{x,y} sum_{z <= y} mu_w(z, y) s_z`.
pub fn shift_matrix_direct(q: usize, op: &FourierOperator, poset: &PosetView) -> DMatrix<f64> {
    let n = op.n();
    let w = op.inverse_matrix();
    let mut t = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in poset.predecessors(x).filter(|&y| poset.leq(y, q)) {
            for z in poset.predecessors(y) {
                t[(x, z)] += w[(x, y)] * op.moebius(z, y);
            }
        }
    }
    t
}

/// `h'_y = sum_{q >= y} h_q`.
pub fn frequency_response(h: &[f64], poset: &PosetView) -> Vec<f64> {
    assert_eq!(h.len(), poset.n());
    (0..h.len()).map(|y| poset.successors(y).map(|q| h[q]).sum()).collect()
}

/// The unique `h` with `frequency_response(h) = h'`.
///
/// The response map is unit triangular in reverse topological order, so
/// `h_y = h'_y - sum_{q > y} h_q` is solved from the last node back.
pub fn inverse_frequency_response(response: &[f64], poset: &PosetView) -> Vec<f64> {
    assert_eq!(response.len(), poset.n());
    let mut h = vec![0.0; response.len()];
    for y in (0..response.len()).rev() {
        let above: f64 = poset.successors(y).skip(1).map(|q| h[q]).sum();
        h[y] = response[y] - above;
    }
    h
}

/// A filter `H = sum_q h_q T_q`, stored by its coefficients and response.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    coefficients: Vec<f64>,
    response: Vec<f64>,
}

impl Filter {
    pub fn new(coefficients: Vec<f64>, poset: &PosetView) -> Result<Self, SpectralError> {
        check_len(poset.n(), coefficients.len())?;
        let response = frequency_response(&coefficients, poset);
        Ok(Self { coefficients, response })
    }

    pub fn from_response(response: Vec<f64>, poset: &PosetView) -> Result<Self, SpectralError> {
        check_len(poset.n(), response.len())?;
        let coefficients = inverse_frequency_response(&response, poset);
        Ok(Self { coefficients, response })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    /// `h * s = W (h' ⊙ W^-1 s)`.
    pub fn apply(&self, s: &[f64], w: &ClosureOperator) -> Result<Signal, SpectralError> {
        check_len(self.response.len(), w.n())?;
        let mut c = fourier_transform(s, w)?.into_inner();
        for (cy, hy) in c.iter_mut().zip(&self.response) {
            *cy *= hy;
        }
        Ok(Signal::new(w.matrix().mul_vec(&c)))
    }

    /// `H = sum_q h_q T_q`, built from the shift matrices.
    pub fn matrix(&self, op: &FourierOperator, poset: &PosetView) -> DMatrix<f64> {
        let n = op.n();
        let mut h = DMatrix::zeros(n, n);
        for (q, &hq) in self.coefficients.iter().enumerate() {
            if hq != 0.0 {
                h += op.shift_matrix(q, poset) * hq;
            }
        }
        h
    }

    /// `h * s` through the shift matrices.
    pub fn apply_by_shifts(&self, s: &[f64], op: &FourierOperator, poset: &PosetView) -> Result<Signal, SpectralError> {
        check_len(op.n(), s.len())?;
        let out = self.matrix(op, poset) * nalgebra::DVector::from_column_slice(s);
        Ok(Signal::new(out.as_slice().to_vec()))
    }
}
