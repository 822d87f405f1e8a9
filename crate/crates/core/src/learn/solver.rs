//! Monotone FISTA for `min_x f(x) + λ ||x||_1` with smooth `f`.

use nalgebra::{DMatrix, DVector};

/// Iteration limits and tolerance of the proximal solver.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Stop when a proximal step moves the iterate by at most
    /// `tol · max(1, ||x||_inf)` in every coordinate.
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iter: 10_000, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutput {
    pub x: Vec<f64>,
    /// Objective after each iteration; entry 0 is the starting point.
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Smooth part of a composite objective in `x`, through `z = B x`.
pub(crate) trait Loss {
    fn value(&self, z: &DVector<f64>) -> f64;
    /// Gradient with respect to `z`.
    fn grad(&self, z: &DVector<f64>) -> DVector<f64>;
}

/// `||z - s||^2`.
pub(crate) struct Squared<'a>(pub &'a DVector<f64>);

impl Loss for Squared<'_> {
    fn value(&self, z: &DVector<f64>) -> f64 {
        (z - self.0).norm_squared()
    }

    fn grad(&self, z: &DVector<f64>) -> DVector<f64> {
        (z - self.0) * 2.0
    }
}

/// `sum_i softplus(z_i) - s_i z_i`, the logistic negative log-likelihood.
pub(crate) struct Logistic<'a>(pub &'a DVector<f64>);

pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Loss for Logistic<'_> {
    fn value(&self, z: &DVector<f64>) -> f64 {
        z.iter().zip(self.0.iter()).map(|(&zi, &si)| softplus(zi) - si * zi).sum()
    }

    fn grad(&self, z: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(z.len(), z.iter().zip(self.0.iter()).map(|(&zi, &si)| sigmoid(zi) - si))
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

fn l1(x: &DVector<f64>) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

/// Monotone FISTA for `loss(B x) + λ ||x||_1`.
///
/// The Lipschitz estimate doubles until the quadratic upper bound holds and
/// decays by 1% per iteration, so it can follow the local curvature down.
pub(crate) fn mfista(b: &DMatrix<f64>, loss: &impl Loss, lambda: f64, opts: SolverOptions) -> SolverOutput {
    let n = b.ncols();
    let composite = |x: &DVector<f64>, bx: &DVector<f64>| loss.value(bx) + lambda * l1(x);

    let mut x = DVector::zeros(n);
    let mut bx = b * &x;
    let mut fx = composite(&x, &bx);
    let mut y = x.clone();
    let mut by = bx.clone();
    let mut t = 1.0f64;
    let mut lip = 1.0f64;
    let mut objective = vec![fx];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let fy = loss.value(&by);
        let grad = b.tr_mul(&loss.grad(&by));
        lip = (0.99 * lip).max(1e-8);
        let (z, bz) = loop {
            let z = (&y - &grad / lip).map(|v| soft_threshold(v, lambda / lip));
            let bz = b * &z;
            let d = &z - &y;
            let bound = fy + grad.dot(&d) + 0.5 * lip * d.norm_squared();
            if loss.value(&bz) <= bound + 1e-12 * bound.abs().max(1.0) || !lip.is_finite() {
                break (z, bz);
            }
            lip *= 2.0;
        };
        let step = (&z - &y).amax();
        let fz = composite(&z, &bz);

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let x_prev = x.clone();
        let bx_prev = bx.clone();
        if fz <= fx {
            x = z.clone();
            bx = bz.clone();
            fx = fz;
        }
        y = &x + (&z - &x) * (t / t_next) + (&x - &x_prev) * ((t - 1.0) / t_next);
        by = &bx + (&bz - &bx) * (t / t_next) + (&bx - &bx_prev) * ((t - 1.0) / t_next);
        t = t_next;
        objective.push(fx);

        if step <= opts.tol * x.amax().max(1.0) {
            converged = true;
            break;
        }
    }
    SolverOutput { x: x.as_slice().to_vec(), objective, iterations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_and_sigmoid_are_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(800.0) == 1.0 && sigmoid(-800.0) == 0.0);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0 && softplus(-1000.0) < 1e-300);
    }

    #[test]
    fn one_dimensional_lasso() {
        // min (x - 3)^2 + x  =>  x = 2.5
        let b = DMatrix::from_element(1, 1, 1.0);
        let s = DVector::from_element(1, 3.0);
        let out = mfista(&b, &Squared(&s), 1.0, SolverOptions::default());
        assert!(out.converged);
        assert!((out.x[0] - 2.5).abs() < 1e-8);
        let out = mfista(&b, &Squared(&s), 6.0, SolverOptions::default());
        assert_eq!(out.x[0], 0.0);
    }

    #[test]
    fn objective_is_monotone() {
        let b = DMatrix::from_fn(8, 5, |i, j| ((i * 5 + j * 3) % 7) as f64 - 3.0);
        let s = DVector::from_fn(8, |i, _| i as f64 - 4.0);
        for lambda in [0.0, 0.5, 5.0] {
            let out = mfista(&b, &Squared(&s), lambda, SolverOptions::default());
            assert!(out.objective.windows(2).all(|w| w[1] <= w[0] + 1e-12));
            let labels = s.map(|v| if v > 0.0 { 1.0 } else { 0.0 });
            let out = mfista(&b, &Logistic(&labels), lambda, SolverOptions::default());
            assert!(out.objective.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }
    }
}
