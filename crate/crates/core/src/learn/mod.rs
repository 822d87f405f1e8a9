//! Fourier-sparse reconstruction from node samples, and evaluation metrics.

mod solver;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use thiserror::Error;

use crate::rng::{self, tag};
use crate::spectral::{Signal, Spectrum};

pub use solver::{sigmoid, SolverOptions};

/// Penalty used for logistic fits unless overridden.
pub const DEFAULT_LOGISTIC_LAMBDA: f64 = 0.1;
/// Lasso penalty as a fraction of `||B_Sᵀ s||_inf` unless overridden.
pub const DEFAULT_LASSO_LAMBDA_FRACTION: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("sample index {index} out of range for {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("node {0} is sampled twice")]
    DuplicateSample(usize),
    #[error("{indices} sample indices but {values} values")]
    LengthMismatch { indices: usize, values: usize },
    #[error("at least one sample is required")]
    NoSamples,
    #[error("sample value {0} is not 0 or 1")]
    NonBinaryLabel(f64),
    #[error("penalty {0} must be non-negative")]
    NegativeLambda(f64),
    #[error("basis has {rows} rows but the signal has {n} nodes")]
    BasisShape { rows: usize, n: usize },
    #[error("sample fraction {0} is outside (0, 1]")]
    InvalidFraction(f64),
    #[error("labels must contain both classes")]
    DegenerateLabels,
    #[error("reference signal has zero norm")]
    ZeroReference,
    #[error("scores and labels differ in length ({scores} vs {labels})")]
    ScoreLength { scores: usize, labels: usize },
}

/// Observed values `s_{x_1}, ..., s_{x_k}` of a signal on `n` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    n: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SampleSet {
    pub fn new(n: usize, indices: Vec<usize>, values: Vec<f64>) -> Result<Self, LearnError> {
        if indices.len() != values.len() {
            return Err(LearnError::LengthMismatch { indices: indices.len(), values: values.len() });
        }
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n {
                return Err(LearnError::IndexOutOfRange { index: i, n });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(LearnError::DuplicateSample(i));
            }
        }
        Ok(Self { n, indices, values })
    }

    /// Restricts `signal` to `indices`.
    pub fn from_signal(signal: &[f64], indices: Vec<usize>) -> Result<Self, LearnError> {
        let values = indices.iter().map(|&i| signal.get(i).copied().unwrap_or(f64::NAN)).collect();
        Self::new(signal.len(), indices, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn fraction(&self) -> f64 {
        self.len() as f64 / self.n as f64
    }
}

/// `round(fraction · n)` nodes (at least one), uniform without replacement,
/// in ascending order.
pub fn sample_nodes(n: usize, fraction: f64, seed: u64, trial: u64) -> Result<Vec<usize>, LearnError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(LearnError::InvalidFraction(fraction));
    }
    let k = ((fraction * n as f64).round() as usize).clamp(1, n);
    let mut rng = rng::stream(seed, &[tag::SAMPLING, trial]);
    let mut picked = index::sample(&mut rng, n, k).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseFitResult {
    /// Estimated spectrum `r̂`.
    pub spectrum: Spectrum,
    /// Reconstruction `r = basis · r̂` on all nodes.
    pub signal: Signal,
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn sampled_rows(basis: &DMatrix<f64>, samples: &SampleSet) -> Result<DMatrix<f64>, LearnError> {
    if basis.nrows() != samples.n() {
        return Err(LearnError::BasisShape { rows: basis.nrows(), n: samples.n() });
    }
    if samples.is_empty() {
        return Err(LearnError::NoSamples);
    }
    Ok(basis.select_rows(samples.indices()))
}

fn check_lambda(lambda: f64) -> Result<(), LearnError> {
    if lambda >= 0.0 {
        Ok(())
    } else {
        Err(LearnError::NegativeLambda(lambda))
    }
}

fn finish(basis: &DMatrix<f64>, out: solver::SolverOutput) -> SparseFitResult {
    let r = basis * DVector::from_column_slice(&out.x);
    SparseFitResult {
        spectrum: Spectrum::new(out.x),
        signal: Signal::new(r.as_slice().to_vec()),
        objective: out.objective,
        iterations: out.iterations,
        converged: out.converged,
    }
}

/// Smallest `λ` for which the Lasso solution is zero: `2 ||B_Sᵀ s||_inf`.
pub fn lasso_lambda_max(basis: &DMatrix<f64>, samples: &SampleSet) -> Result<f64, LearnError> {
    Ok(2.0 * max_correlation(basis, samples)?)
}

/// `||B_Sᵀ s||_inf`.
pub fn max_correlation(basis: &DMatrix<f64>, samples: &SampleSet) -> Result<f64, LearnError> {
    let b = sampled_rows(basis, samples)?;
    Ok(b.tr_mul(&DVector::from_column_slice(samples.values())).amax())
}

/// Default penalty `DEFAULT_LASSO_LAMBDA_FRACTION · ||B_Sᵀ s||_inf`.
pub fn default_lasso_lambda(basis: &DMatrix<f64>, samples: &SampleSet) -> Result<f64, LearnError> {
    Ok(DEFAULT_LASSO_LAMBDA_FRACTION * max_correlation(basis, samples)?)
}

/// `min_r̂ sum_i (s_{x_i} - (basis r̂)_{x_i})^2 + λ ||r̂||_1`.
///
/// The columns of `basis` are the basis vectors. A run that hits the
/// iteration limit is returned with `converged = false`.
pub fn lasso_reconstruct(
    basis: &DMatrix<f64>,
    samples: &SampleSet,
    lambda: f64,
    opts: SolverOptions,
) -> Result<SparseFitResult, LearnError> {
    check_lambda(lambda)?;
    let b = sampled_rows(basis, samples)?;
    let s = DVector::from_column_slice(samples.values());
    Ok(finish(basis, solver::mfista(&b, &solver::Squared(&s), lambda, opts)))
}

/// L1-penalized logistic regression with `p(x) = σ((basis r̂)_x)`.
pub fn logistic_sparse_fit(
    basis: &DMatrix<f64>,
    samples: &SampleSet,
    lambda: f64,
    opts: SolverOptions,
) -> Result<SparseFitResult, LearnError> {
    check_lambda(lambda)?;
    if let Some(&v) = samples.values().iter().find(|&&v| v != 0.0 && v != 1.0) {
        return Err(LearnError::NonBinaryLabel(v));
    }
    let b = sampled_rows(basis, samples)?;
    let s = DVector::from_column_slice(samples.values());
    Ok(finish(basis, solver::mfista(&b, &solver::Logistic(&s), lambda, opts)))
}

/// `[σ(r_x) >= τ]` as 0/1 values.
pub fn predict_binary(r: &[f64], tau: f64) -> Signal {
    Signal::new(r.iter().map(|&v| if sigmoid(v) >= tau { 1.0 } else { 0.0 }).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// Points `(fpr, tpr)` from `(0, 0)` to `(1, 1)`, one per distinct score.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// ROC by sweeping the threshold down through the distinct scores; AUC by
/// the trapezoid rule, so tied scores count one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<RocCurve, LearnError> {
    if scores.len() != labels.len() {
        return Err(LearnError::ScoreLength { scores: scores.len(), labels: labels.len() });
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(LearnError::DegenerateLabels);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let (x0, y0) = *points.last().unwrap();
        let (x1, y1) = (fp as f64 / neg as f64, tp as f64 / pos as f64);
        auc += (x1 - x0) * (y0 + y1) / 2.0;
        points.push((x1, y1));
    }
    Ok(RocCurve { points, auc })
}

/// `||r - s|| / ||s||`.
pub fn relative_error(r: &[f64], s: &[f64]) -> Result<f64, LearnError> {
    assert_eq!(r.len(), s.len());
    let norm: f64 = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(LearnError::ZeroReference);
    }
    let diff: f64 = r.iter().zip(s).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    Ok(diff / norm)
}
