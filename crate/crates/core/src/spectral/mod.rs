//! Fourier analysis on a closed DAG.
//!
//! The columns `f^y` of `W` are the Fourier basis, the causes are the
//! spectrum, and `F = W^-1` is the Fourier transform. Entry `F[y, x]` is the
//! weighted Moebius function `mu_w(x, y)`:
//!
//! ```text
//! mu_w(x, x) = 1
//! mu_w(x, y) = - sum_{x <= z < y} w_{y,z} mu_w(x, z)      (x != y)
//! ```
//!
//! Transforms never build `F`; they solve `W c = s` by forward substitution.

mod shift;
mod variation;

use std::ops::Deref;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::closure::ClosureOperator;
use crate::dag::PosetView;

pub use shift::{frequency_response, inverse_frequency_response, shift_matrix_direct, Filter};
pub use variation::{
    basis_total_variation, frequency_order, normalized_basis_vector, total_variation, FrequencyOrder,
    TotalVariation,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("vector of length {got} does not match a DAG with {expected} nodes")]
    DimensionMismatch { expected: usize, got: usize },
}

fn check_len(expected: usize, got: usize) -> Result<(), SpectralError> {
    if expected == got {
        Ok(())
    } else {
        Err(SpectralError::DimensionMismatch { expected, got })
    }
}

macro_rules! node_vector {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Default)]
        pub struct $name(Vec<f64>);

        impl $name {
            pub fn new(values: Vec<f64>) -> Self {
                Self(values)
            }

            pub fn zeros(n: usize) -> Self {
                Self(vec![0.0; n])
            }

            pub fn values(&self) -> &[f64] {
                &self.0
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }

        impl Deref for $name {
            type Target = [f64];

            fn deref(&self) -> &[f64] {
                &self.0
            }
        }
    };
}

node_vector!(
    /// One value per node, in topological order.
    Signal
);
node_vector!(
    /// Fourier coefficients (causes), one per node in topological order.
    Spectrum
);

/// `ŝ = W^-1 s` by forward substitution.
pub fn fourier_transform(s: &[f64], w: &ClosureOperator) -> Result<Spectrum, SpectralError> {
    check_len(w.n(), s.len())?;
    Ok(Spectrum(w.matrix().solve(s)))
}

/// `s = W ŝ`.
pub fn inverse_fourier_transform(c: &[f64], w: &ClosureOperator) -> Result<Signal, SpectralError> {
    check_len(w.n(), c.len())?;
    Ok(Signal(w.matrix().mul_vec(c)))
}

/// Applies the shift `T_q = W D_q W^-1` to `s`, where `D_q` keeps the
/// causes `y <= q`.
pub fn apply_shift(q: usize, s: &[f64], w: &ClosureOperator, poset: &PosetView) -> Result<Signal, SpectralError> {
    let mut c = fourier_transform(s, w)?.into_inner();
    let keep = poset.predecessor_set(q);
    for (y, cy) in c.iter_mut().enumerate() {
        if !keep.contains(y) {
            *cy = 0.0;
        }
    }
    Ok(Signal(w.matrix().mul_vec(&c)))
}

/// `W` together with its dense inverse `F`.
#[derive(Debug, Clone)]
pub struct FourierOperator {
    w: DMatrix<f64>,
    f: DMatrix<f64>,
}

impl FourierOperator {
    /// Inverse transform matrix `W` (dense).
    pub fn inverse_matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// Fourier transform matrix `F = W^-1`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    /// `mu_w(x, y)`, zero unless `x <= y`.
    pub fn moebius(&self, x: usize, y: usize) -> f64 {
        self.f[(y, x)]
    }

    /// `T_q = W D_q F`.
    pub fn shift_matrix(&self, q: usize, poset: &PosetView) -> DMatrix<f64> {
        let n = self.n();
        let keep = poset.predecessor_set(q);
        let mut wd = self.w.clone();
        for y in 0..n {
            if !keep.contains(y) {
                wd.column_mut(y).fill(0.0);
            }
        }
        wd * &self.f
    }
}

/// Builds `F` column by column from the Moebius recursion.
///
/// For a fixed `x`, `mu_w(x, ·)` is only nonzero on the successors of `x`;
/// those are visited in topological order so every `mu_w(x, z)` with
/// `z < y` is known when `mu_w(x, y)` is formed.
pub fn moebius_matrix(w: &ClosureOperator, poset: &PosetView) -> FourierOperator {
    let n = w.n();
    let mut f = DMatrix::zeros(n, n);
    let strict = w.matrix().strict();
    for x in 0..n {
        f[(x, x)] = 1.0;
        for y in poset.successors(x).skip(1) {
            let (cols, vals) = strict.row(y);
            let mu: f64 = cols
                .iter()
                .zip(vals)
                .filter(|(&z, _)| z >= x)
                .map(|(&z, &wyz)| wyz * f[(z, x)])
                .sum();
            f[(y, x)] = -mu;
        }
    }
    FourierOperator { w: w.to_dense(), f }
}

/// `F = W^-1` by a dense triangular solve against the identity.
pub fn fourier_matrix_by_inversion(w: &ClosureOperator) -> DMatrix<f64> {
    let dense = w.to_dense();
    let n = dense.nrows();
    dense
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .expect("unit lower-triangular matrices are invertible")
}
