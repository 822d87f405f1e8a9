//! Graph Fourier bases of the undirected versions of a DAG, used as
//! baselines for reconstruction.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::closure::ClosureOperator;
use crate::dag::WeightedDag;

/// Matrices up to this size are diagonalized by cyclic Jacobi; larger ones
/// by nalgebra's symmetric QR algorithm.
pub const JACOBI_LIMIT: usize = 300;
pub const SYMMETRY_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("matrix is not symmetric: |M[{row},{col}] - M[{col},{row}]| = {gap}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },
    #[error("matrix is not square ({rows} x {cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("Jacobi iteration did not converge in {0} sweeps")]
    NotConverged(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UndirectedSource {
    Adjacency,
    AdjacencyClosed,
    Laplacian,
    LaplacianClosed,
}

/// `A + Aᵀ`, `W + Wᵀ - 2I` and their Laplacians `D - S`.
#[derive(Debug, Clone, PartialEq)]
pub struct UndirectedMatrices {
    pub adjacency: DMatrix<f64>,
    pub adjacency_closed: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
    pub laplacian_closed: DMatrix<f64>,
}

impl UndirectedMatrices {
    pub fn get(&self, source: UndirectedSource) -> &DMatrix<f64> {
        match source {
            UndirectedSource::Adjacency => &self.adjacency,
            UndirectedSource::AdjacencyClosed => &self.adjacency_closed,
            UndirectedSource::Laplacian => &self.laplacian,
            UndirectedSource::LaplacianClosed => &self.laplacian_closed,
        }
    }
}

pub fn laplacian(s: &DMatrix<f64>) -> DMatrix<f64> {
    let mut l = -s;
    for i in 0..s.nrows() {
        l[(i, i)] += s.row(i).sum();
    }
    l
}

pub fn undirected_adjacency(dag: &WeightedDag) -> DMatrix<f64> {
    let a = dag.adjacency_matrix();
    &a + a.transpose()
}

pub fn undirected_closure(w: &ClosureOperator) -> DMatrix<f64> {
    let w = w.to_dense();
    let n = w.nrows();
    &w + w.transpose() - DMatrix::identity(n, n) * 2.0
}

pub fn undirected_matrices(dag: &WeightedDag, w: &ClosureOperator) -> UndirectedMatrices {
    let adjacency = undirected_adjacency(dag);
    let adjacency_closed = undirected_closure(w);
    let laplacian_open = laplacian(&adjacency);
    let laplacian_closed = laplacian(&adjacency_closed);
    UndirectedMatrices { adjacency, adjacency_closed, laplacian: laplacian_open, laplacian_closed }
}

/// Orthonormal eigenvectors (columns of `vectors`) with ascending eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigenbasis {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<(), BaselineError> {
    if !m.is_square() {
        return Err(BaselineError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    for i in 0..m.nrows() {
        for j in 0..i {
            let gap = (m[(i, j)] - m[(j, i)]).abs();
            if gap > SYMMETRY_TOL {
                return Err(BaselineError::NotSymmetric { row: i, col: j, gap });
            }
        }
    }
    Ok(())
}

/// Sorts ascending and flips each eigenvector so its largest-magnitude
/// entry (the first, on ties) is positive.
fn normalize(values: Vec<f64>, vectors: DMatrix<f64>) -> SymmetricEigenbasis {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut out = DMatrix::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        let col = vectors.column(j);
        let pivot = (0..n).fold(0, |best, i| if col[i].abs() > col[best].abs() { i } else { best });
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        out.set_column(k, &(col * sign));
    }
    SymmetricEigenbasis { values: order.iter().map(|&j| values[j]).collect(), vectors: out }
}

/// Full eigendecomposition by cyclic Jacobi rotations.
pub fn jacobi_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigenbasis, BaselineError> {
    check_symmetric(m)?;
    let n = m.nrows();
    let mut a = (m + m.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let off = |a: &DMatrix<f64>| {
        let mut s = 0.0;
        for j in 0..n {
            for i in (j + 1)..n {
                s += a[(i, j)] * a[(i, j)];
            }
        }
        (2.0 * s).sqrt()
    };

    for _ in 0..MAX_SWEEPS {
        if off(&a) <= 1e-15 * scale {
            let values = (0..n).map(|i| a[(i, i)]).collect();
            return Ok(normalize(values, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(BaselineError::NotConverged(MAX_SWEEPS))
}

/// Eigendecomposition of a symmetric matrix: Jacobi up to
/// [`JACOBI_LIMIT`], nalgebra beyond.
pub fn symmetric_eigenbasis(m: &DMatrix<f64>) -> Result<SymmetricEigenbasis, BaselineError> {
    if m.nrows() <= JACOBI_LIMIT {
        return jacobi_eigen(m);
    }
    check_symmetric(m)?;
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    Ok(normalize(eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::closure_operator;
    use crate::dag::erdos_renyi_dag;
    use crate::fixtures::example_dag;
    use crate::semiring::Semiring;
    use proptest::prelude::*;

    fn check_invariants(m: &DMatrix<f64>, e: &SymmetricEigenbasis) {
        let n = m.nrows();
        let q = &e.vectors;
        assert!((q.transpose() * q - DMatrix::identity(n, n)).amax() <= 1e-8);
        let recon = q * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&e.values)) * q.transpose();
        assert!((recon - m).amax() <= 1e-7 * m.amax().max(f64::MIN_POSITIVE));
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        use rand::Rng;
        let mut rng = crate::rng::stream(seed, &[99]);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &a + a.transpose()
    }

    #[test]
    fn identity_and_two_by_two() {
        let e = jacobi_eigen(&DMatrix::identity(4, 4)).unwrap();
        assert_eq!(e.values, vec![1.0; 4]);
        assert_eq!(e.vectors, DMatrix::identity(4, 4));

        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = jacobi_eigen(&m).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.vectors[(0, 0)] - r).abs() < 1e-15 && (e.vectors[(1, 0)] + r).abs() < 1e-15);
        assert!((e.vectors[(0, 1)] - r).abs() < 1e-15 && (e.vectors[(1, 1)] - r).abs() < 1e-15);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(jacobi_eigen(&m), Err(BaselineError::NotSymmetric { row: 1, col: 0, .. })));
        assert!(matches!(symmetric_eigenbasis(&DMatrix::zeros(2, 3)), Err(BaselineError::NotSquare { .. })));
    }

    #[test]
    fn jacobi_agrees_with_nalgebra() {
        for seed in 0..3 {
            let m = random_symmetric(40, seed);
            let j = jacobi_eigen(&m).unwrap();
            let eig = m.clone().symmetric_eigen();
            let q = normalize(eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors);
            for (a, b) in j.values.iter().zip(&q.values) {
                assert!((a - b).abs() < 1e-10);
            }
            assert!((&j.vectors - &q.vectors).amax() < 1e-7);
        }
    }

    #[test]
    fn large_matrices_use_nalgebra() {
        let m = random_symmetric(JACOBI_LIMIT + 20, 4);
        check_invariants(&m, &symmetric_eigenbasis(&m).unwrap());
    }

    #[test]
    fn example_matrices() {
        let dag = example_dag();
        let w = closure_operator(&dag, &Semiring::pollution()).unwrap();
        let u = undirected_matrices(&dag, &w);
        assert_eq!(u.adjacency[(2, 0)], 0.3);
        assert_eq!(u.adjacency[(0, 2)], 0.3);
        assert!((u.adjacency_closed[(4, 0)] - 0.65).abs() < 1e-12);
        assert_eq!(u.adjacency_closed[(0, 0)], 0.0);
        for l in [&u.laplacian, &u.laplacian_closed] {
            for i in 0..6 {
                assert!(l.row(i).sum().abs() < 1e-12);
            }
        }
        let empty = WeightedDag::new(3, &[], None).unwrap();
        let w = closure_operator(&empty, &Semiring::pollution()).unwrap();
        let u = undirected_matrices(&empty, &w);
        assert_eq!(u.adjacency, DMatrix::zeros(3, 3));
        assert_eq!(u.laplacian, DMatrix::zeros(3, 3));
        assert_eq!(u.adjacency_closed, DMatrix::zeros(3, 3));
    }

    #[test]
    fn laplacian_spectrum_of_connected_graph() {
        let dag = erdos_renyi_dag(30, 0.3, (0.1, 1.0), 2).unwrap();
        let w = closure_operator(&dag, &Semiring::pollution()).unwrap();
        let l = undirected_matrices(&dag, &w).laplacian_closed;
        let e = symmetric_eigenbasis(&l).unwrap();
        assert!(e.values.iter().all(|&v| v > -1e-10));
        assert!(e.values[0].abs() < 1e-10 && e.values[1] > 1e-8);
        let c = 1.0 / 30f64.sqrt();
        assert!(e.vectors.column(0).iter().all(|&x| (x - c).abs() < 1e-8));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn decomposition_invariants(seed in 0u64..1000, n in 1usize..=50) {
            let m = random_symmetric(n, seed);
            check_invariants(&m, &jacobi_eigen(&m).unwrap());
        }
    }
}
