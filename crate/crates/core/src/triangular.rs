//! Row-compressed lower-triangular matrices.

use nalgebra::DMatrix;

/// Strictly lower-triangular matrix in compressed row storage.
///
/// Only stored entries exist; what an absent entry means (0, or some other
/// semiring zero) is up to the owner.
#[derive(Debug, Clone, PartialEq)]
pub struct StrictLower {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl StrictLower {
    pub fn empty(n: usize) -> Self {
        Self { n, row_ptr: vec![0; n + 1], cols: Vec::new(), vals: Vec::new() }
    }

    /// Builds from per-row `(col, value)` lists; each row is sorted by column.
    ///
    /// Panics if an entry is on or above the diagonal.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                assert!(j < i, "entry ({i}, {j}) is not strictly lower");
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols, vals }
    }

    /// Keeps the strictly lower entries of a row-major `n x n` buffer for
    /// which `keep` holds.
    pub fn from_row_major(n: usize, data: &[f64], keep: impl Fn(f64) -> bool) -> Self {
        assert_eq!(data.len(), n * n);
        let rows = (0..n)
            .map(|i| {
                (0..i)
                    .filter(|&j| keep(data[i * n + j]))
                    .map(|j| (j, data[i * n + j]))
                    .collect()
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).ok().map(|k| vals[k])
    }

    /// `(row, col, value)` for every stored entry, row-major.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { vals: self.vals.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    /// Drops stored entries for which `keep` is false.
    pub fn retain(&self, keep: impl Fn(f64) -> bool) -> Self {
        let rows = (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter()
                    .zip(vals)
                    .filter(|(_, &v)| keep(v))
                    .map(|(&j, &v)| (j, v))
                    .collect()
            })
            .collect();
        Self::from_rows(rows)
    }

    /// Dense copy with `fill` in every absent position (diagonal included).
    pub fn to_dense(&self, fill: f64) -> DMatrix<f64> {
        let mut m = DMatrix::from_element(self.n, self.n, fill);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }
}

/// Unit lower-triangular matrix `I + L` with `L` strictly lower.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitLower {
    strict: StrictLower,
}

impl UnitLower {
    pub fn identity(n: usize) -> Self {
        Self { strict: StrictLower::empty(n) }
    }

    /// Absent entries of `strict` are read as zero.
    pub fn from_strict(strict: StrictLower) -> Self {
        Self { strict }
    }

    /// Reads the strictly lower part of a dense matrix, dropping exact zeros.
    /// The diagonal and upper part are ignored.
    pub fn from_dense_lower(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let rows = (0..n)
            .map(|i| (0..i).filter(|&j| m[(i, j)] != 0.0).map(|j| (j, m[(i, j)])).collect())
            .collect();
        Self { strict: StrictLower::from_rows(rows) }
    }

    pub fn n(&self) -> usize {
        self.strict.n()
    }

    pub fn strict(&self) -> &StrictLower {
        &self.strict
    }

    /// Stored entries, diagonal included.
    pub fn nnz(&self) -> usize {
        self.n() + self.strict.nnz()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            1.0
        } else {
            self.strict.get(i, j).unwrap_or(0.0)
        }
    }

    /// `M x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n());
        (0..self.n())
            .map(|i| {
                let (cols, vals) = self.strict.row(i);
                x[i] + cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum::<f64>()
            })
            .collect()
    }

    /// Solves `M x = b` by forward substitution in `O(nnz)`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n());
        let mut x = b.to_vec();
        for i in 0..self.n() {
            let (cols, vals) = self.strict.row(i);
            let acc: f64 = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
            x[i] -= acc;
        }
        x
    }

    /// Column `j`, i.e. `M e_j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        let mut col = vec![0.0; self.n()];
        col[j] = 1.0;
        for i in (j + 1)..self.n() {
            if let Some(v) = self.strict.get(i, j) {
                col[i] = v;
            }
        }
        col
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = self.strict.to_dense(0.0);
        m.fill_diagonal(1.0);
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> UnitLower {
        UnitLower::from_strict(StrictLower::from_rows(vec![
            vec![],
            vec![(0, 2.0)],
            vec![(1, -1.0), (0, 0.5)],
        ]))
    }

    #[test]
    fn solve_inverts_mul() {
        let m = sample();
        let x = [1.0, -2.0, 3.5];
        let b = m.mul_vec(&x);
        assert_eq!(b, vec![1.0, 0.0, 6.0]);
        assert_eq!(m.solve(&b), x.to_vec());
        assert_eq!(m.column(0), vec![1.0, 2.0, 0.5]);
        assert_eq!(m.get(2, 0), 0.5);
        assert_eq!(m.get(0, 2), 0.0);
        assert_eq!(m.nnz(), 6);
    }

    #[test]
    fn dense_round_trip() {
        let m = sample();
        assert_eq!(UnitLower::from_dense_lower(&m.to_dense()), m);
        let kept = m.strict().retain(|v| v > 0.0);
        assert_eq!(kept.nnz(), 2);
    }

    #[test]
    #[should_panic]
    fn rejects_upper_entries() {
        StrictLower::from_rows(vec![vec![(1, 1.0)], vec![]]);
    }
}
