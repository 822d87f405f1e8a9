//! Weighted transitive and reflexive closures.
//!
//! The closure of a DAG under a semiring assigns to every comparable pair
//! `y < x` the semiring sum, over all paths `y -> x`, of the semiring product
//! of the edge weights along the path. Adding a unit diagonal then gives the
//! operator `W` that maps causes to signal values.

use thiserror::Error;

use crate::dag::WeightedDag;
use crate::semiring::{Semiring, SemiringKind};
use crate::triangular::{StrictLower, UnitLower};

/// Up to this many nodes the closure runs the dense triple loop; beyond it,
/// a row-by-row sparse recurrence.
pub const DENSE_CLOSURE_LIMIT: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClosureError {
    #[error("closure values of semiring `{0}` are not real influences; convert them first")]
    NonRealizableSemiring(&'static str),
    #[error("expected a `{expected}` closure, got `{got}`")]
    WrongSemiring { expected: SemiringKind, got: SemiringKind },
    #[error("negative distance {value} at ({row}, {col})")]
    NegativeDistance { row: usize, col: usize, value: f64 },
    #[error("negative capacity {value} at ({row}, {col})")]
    NegativeCapacity { row: usize, col: usize, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosureMethod {
    Auto,
    /// Dense triple loop over a pivot `k`, as in Floyd-Warshall.
    Dense,
    /// Row `x` is the semiring combination of its parents' rows.
    RowSparse,
}

/// Strictly lower closure matrix `Ā` in topological order.
///
/// Absent entries stand for the semiring zero (no path).
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureMatrix {
    semiring: Semiring,
    entries: StrictLower,
    labels: Vec<String>,
}

impl ClosureMatrix {
    pub fn semiring(&self) -> &Semiring {
        &self.semiring
    }

    pub fn n(&self) -> usize {
        self.entries.n()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn entries(&self) -> &StrictLower {
        &self.entries
    }

    /// `Ā[x, y]`, the semiring zero if `y` does not reach `x`.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.entries.get(x, y).unwrap_or(self.semiring.zero())
    }

    /// Dense copy; diagonal and upper part hold the semiring zero.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        self.entries.to_dense(self.semiring.zero())
    }
}

/// Weighted transitive closure with the method picked by size.
pub fn weighted_transitive_closure(dag: &WeightedDag, semiring: &Semiring) -> ClosureMatrix {
    closure_with(dag, semiring, ClosureMethod::Auto)
}

pub fn closure_with(dag: &WeightedDag, semiring: &Semiring, method: ClosureMethod) -> ClosureMatrix {
    let dense = match method {
        ClosureMethod::Auto => dag.n() <= DENSE_CLOSURE_LIMIT,
        ClosureMethod::Dense => true,
        ClosureMethod::RowSparse => false,
    };
    let entries = if dense { dense_closure(dag, semiring) } else { row_sparse_closure(dag, semiring) };
    ClosureMatrix { semiring: *semiring, entries, labels: dag.labels().to_vec() }
}

/// `h[i][j] <- h[i][j] (+) h[i][k] (x) h[k][j]` for every pivot `k`.
///
/// In topological order `h[i][k]` can only be nonzero for `k < i` and
/// `h[k][j]` only for `j < k`, so the loops skip the rest.
fn dense_closure(dag: &WeightedDag, s: &Semiring) -> StrictLower {
    let n = dag.n();
    let zero = s.zero();
    let mut h = vec![zero; n * n];
    for e in dag.edges() {
        h[e.dst * n + e.src] = s.embed(e.weight);
    }
    let mut pivot_row = Vec::with_capacity(n);
    for k in 1..n {
        pivot_row.clear();
        pivot_row.extend_from_slice(&h[k * n..k * n + k]);
        if pivot_row.iter().all(|&v| s.is_zero(v)) {
            continue;
        }
        for i in (k + 1)..n {
            let hik = h[i * n + k];
            if s.is_zero(hik) {
                continue;
            }
            let row = &mut h[i * n..i * n + k];
            for (hij, &hkj) in row.iter_mut().zip(&pivot_row) {
                if !s.is_zero(hkj) {
                    *hij = s.plus(*hij, s.times(hik, hkj));
                }
            }
        }
    }
    StrictLower::from_row_major(n, &h, |v| !s.is_zero(v))
}

/// `Ā[x, ·] = (+)_{z -> x} a_{x,z} (x) (e_z (+) Ā[z, ·])`, one row at a time.
fn row_sparse_closure(dag: &WeightedDag, s: &Semiring) -> StrictLower {
    let n = dag.n();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut acc = vec![s.zero(); n];
    let mut touched = Vec::new();
    for x in 0..n {
        for &(z, w) in dag.parents(x) {
            let a = s.embed(w);
            let mut add = |col: usize, v: f64| {
                if s.is_zero(acc[col]) {
                    touched.push(col);
                }
                acc[col] = s.plus(acc[col], v);
            };
            add(z, a);
            for &(y, v) in &rows[z] {
                add(y, s.times(a, v));
            }
        }
        touched.sort_unstable();
        touched.dedup();
        let row = touched
            .iter()
            .filter(|&&y| !s.is_zero(acc[y]))
            .map(|&y| (y, acc[y]))
            .collect();
        for &y in &touched {
            acc[y] = s.zero();
        }
        touched.clear();
        rows.push(row);
    }
    StrictLower::from_rows(rows)
}

/// `(I - A)^-1 - I` by column-wise forward substitution.
pub fn pollution_closure_closed_form(dag: &WeightedDag) -> ClosureMatrix {
    let n = dag.n();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut col = vec![0.0; n];
    for y in 0..n {
        col.iter_mut().for_each(|c| *c = 0.0);
        col[y] = 1.0;
        for x in (y + 1)..n {
            let v: f64 = dag.parents(x).iter().map(|&(z, a)| a * col[z]).sum();
            col[x] = v;
            if v != 0.0 {
                rows[x].push((y, v));
            }
        }
    }
    ClosureMatrix {
        semiring: Semiring::pollution(),
        entries: StrictLower::from_rows(rows),
        labels: dag.labels().to_vec(),
    }
}

/// Maps shortest-path lengths `d` to influences `exp(-d)`; unreachable
/// pairs (`d = inf`) become 0.
pub fn distance_to_influence(closure: &ClosureMatrix) -> Result<ClosureMatrix, ClosureError> {
    let kind = closure.semiring.kind();
    if kind != SemiringKind::ShortestPath {
        return Err(ClosureError::WrongSemiring { expected: SemiringKind::ShortestPath, got: kind });
    }
    if let Some((row, col, value)) = closure.entries.triplets().find(|t| t.2 < 0.0) {
        return Err(ClosureError::NegativeDistance { row, col, value });
    }
    Ok(ClosureMatrix {
        semiring: Semiring::influence(),
        entries: closure.entries.map_values(|d| (-d).exp()).retain(|v| v != 0.0),
        labels: closure.labels.clone(),
    })
}

/// Maps capacities `c` to `exp(-1/c)` in `[0, 1]`.
///
/// Experimental: this makes a unit self-weight compatible with the capacity
/// closure, but no downstream computation relies on it.
pub fn capacity_to_unit(closure: &ClosureMatrix) -> Result<ClosureMatrix, ClosureError> {
    let kind = closure.semiring.kind();
    if kind != SemiringKind::MaxCapacity || closure.semiring.one() != f64::INFINITY {
        return Err(ClosureError::WrongSemiring { expected: SemiringKind::MaxCapacity, got: kind });
    }
    if let Some((row, col, value)) = closure.entries.triplets().find(|t| t.2 < 0.0) {
        return Err(ClosureError::NegativeCapacity { row, col, value });
    }
    Ok(ClosureMatrix {
        semiring: Semiring::unit_capacity(),
        entries: closure.entries.map_values(|c| (-1.0 / c).exp()).retain(|v| v != 0.0),
        labels: closure.labels.clone(),
    })
}

/// Unit lower-triangular operator `W = I + Ā` in topological order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureOperator {
    w: UnitLower,
    kind: SemiringKind,
    labels: Vec<String>,
}

impl ClosureOperator {
    /// Wraps an arbitrary unit lower-triangular matrix.
    pub fn from_unit_lower(w: UnitLower, kind: SemiringKind, labels: Vec<String>) -> Self {
        assert_eq!(w.n(), labels.len());
        Self { w, kind, labels }
    }

    pub fn matrix(&self) -> &UnitLower {
        &self.w
    }

    pub fn kind(&self) -> SemiringKind {
        self.kind
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.w.n()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.w.get(x, y)
    }

    /// The Fourier basis vector `f^y`: column `y` of `W`.
    pub fn basis_vector(&self, y: usize) -> Vec<f64> {
        self.w.column(y)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        self.w.to_dense()
    }
}

/// `W = I + Ā` with self-weight 1.
///
/// Exact zeros (possible with cancelling signed weights) are dropped from
/// the sparsity pattern.
pub fn reflexive_closure(closure: &ClosureMatrix) -> Result<ClosureOperator, ClosureError> {
    if !closure.semiring.is_real_compatible() {
        return Err(ClosureError::NonRealizableSemiring(closure.semiring.name()));
    }
    Ok(ClosureOperator {
        w: UnitLower::from_strict(closure.entries.retain(|v| v != 0.0)),
        kind: closure.semiring.kind(),
        labels: closure.labels.clone(),
    })
}

/// Closure followed by the reflexive step, converting distances to influences
/// when the semiring is shortest path.
pub fn closure_operator(dag: &WeightedDag, semiring: &Semiring) -> Result<ClosureOperator, ClosureError> {
    let closure = weighted_transitive_closure(dag, semiring);
    match semiring.kind() {
        SemiringKind::ShortestPath => reflexive_closure(&distance_to_influence(&closure)?),
        SemiringKind::MaxCapacity if !semiring.is_real_compatible() => {
            reflexive_closure(&capacity_to_unit(&closure)?)
        }
        _ => reflexive_closure(&closure),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::erdos_renyi_dag;
    use crate::fixtures::{distance_example_dag, example_dag, EXAMPLE_W};

    /// Semiring sum over all paths `y -> x`, by exhaustive DFS enumeration.
    fn path_oracle(dag: &WeightedDag, s: &Semiring, y: usize, x: usize) -> f64 {
        fn walk(dag: &WeightedDag, s: &Semiring, v: usize, x: usize, prod: f64, total: &mut f64) {
            for &(c, w) in dag.children(v) {
                let p = s.times(s.embed(w), prod);
                if c == x {
                    *total = s.plus(*total, p);
                } else if c < x {
                    walk(dag, s, c, x, p, total);
                }
            }
        }
        let mut total = s.zero();
        walk(dag, s, y, x, s.one(), &mut total);
        total
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    fn all_semirings() -> Vec<Semiring> {
        vec![
            Semiring::boolean(),
            Semiring::pollution(),
            Semiring::influence(),
            Semiring::shortest_path(),
            Semiring::max_capacity(),
        ]
    }

    #[test]
    fn example_pollution_closure() {
        let dag = example_dag();
        let closure = weighted_transitive_closure(&dag, &Semiring::pollution());
        assert!((closure.get(4, 0) - 0.65).abs() < 1e-15);
        let w = reflexive_closure(&closure).unwrap();
        for x in 0..6 {
            for y in 0..6 {
                assert!((w.get(x, y) - EXAMPLE_W[x][y]).abs() <= 1e-12);
            }
        }
        let closed = pollution_closure_closed_form(&dag);
        for x in 0..6 {
            for y in 0..x {
                assert!((closed.get(x, y) - closure.get(x, y)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn shortest_path_overwrites_direct_edge() {
        let dag = distance_example_dag();
        let (b, f) = (dag.node("b").unwrap(), dag.node("f").unwrap());
        assert_eq!(dag.weight(b, f), Some(4.5));
        let closure = weighted_transitive_closure(&dag, &Semiring::shortest_path());
        assert_eq!(closure.get(f, b), 1.5 + 1.7);
        assert_eq!(closure.get(f, b), 3.2);
        assert_eq!(closure.get(b, f), f64::INFINITY);
        let influence = distance_to_influence(&closure).unwrap();
        assert!((influence.get(f, b) - 0.040_762_203_978_366_21).abs() < 1e-15);
        assert!(matches!(reflexive_closure(&closure), Err(ClosureError::NonRealizableSemiring(_))));
        let w = closure_operator(&dag, &Semiring::shortest_path()).unwrap();
        assert_eq!(w.get(f, b), (-3.2f64).exp());
    }

    #[test]
    fn distance_conversion_edges() {
        let dag = WeightedDag::new(3, &[(0, 1, 0.0001), (1, 2, 2.0)], None).unwrap();
        let c = weighted_transitive_closure(&dag, &Semiring::shortest_path());
        let inf = distance_to_influence(&c).unwrap();
        assert!((inf.get(1, 0) - (-0.0001f64).exp()).abs() < 1e-15);
        let neg = WeightedDag::new(2, &[(0, 1, -1.0)], None).unwrap();
        let c = weighted_transitive_closure(&neg, &Semiring::shortest_path());
        assert!(matches!(distance_to_influence(&c), Err(ClosureError::NegativeDistance { .. })));
        let p = weighted_transitive_closure(&dag, &Semiring::pollution());
        assert!(matches!(distance_to_influence(&p), Err(ClosureError::WrongSemiring { .. })));
    }

    #[test]
    fn edgeless_closure_is_zero() {
        let dag = WeightedDag::new(4, &[], None).unwrap();
        for s in all_semirings() {
            let c = weighted_transitive_closure(&dag, &s);
            assert_eq!(c.entries().nnz(), 0);
            assert_eq!(c.get(3, 0), s.zero());
        }
        let w = reflexive_closure(&weighted_transitive_closure(&dag, &Semiring::pollution())).unwrap();
        assert_eq!(w.to_dense(), nalgebra::DMatrix::identity(4, 4));
    }

    #[test]
    fn boolean_chain_is_all_ones() {
        let chain = WeightedDag::new(3, &[(0, 1, 0.4), (1, 2, -2.0)], None).unwrap();
        let w = reflexive_closure(&weighted_transitive_closure(&chain, &Semiring::boolean())).unwrap();
        let d = w.to_dense();
        for x in 0..3 {
            for y in 0..=x {
                assert_eq!(d[(x, y)], 1.0);
            }
        }
    }

    #[test]
    fn example_boolean_closure_is_reachability_graph() {
        let dag = example_dag();
        let c = weighted_transitive_closure(&dag, &Semiring::boolean());
        let reach = dag.reachability_graph();
        let pairs: Vec<_> = c.entries().triplets().map(|(x, y, _)| (y, x)).collect();
        let expected: Vec<_> = {
            let mut v: Vec<_> = reach.edges().iter().map(|e| (e.src, e.dst)).collect();
            v.sort_by_key(|&(s, d)| (d, s));
            v
        };
        assert_eq!(pairs, expected);
    }

    #[test]
    fn matches_path_enumeration_on_random_dags() {
        for seed in 0..40 {
            let n = 2 + seed as usize % 7;
            let dag = erdos_renyi_dag(n, 0.5, (0.05, 1.0), seed).unwrap();
            for s in all_semirings() {
                for method in [ClosureMethod::Dense, ClosureMethod::RowSparse] {
                    let c = closure_with(&dag, &s, method);
                    for x in 0..n {
                        for y in 0..x {
                            let oracle = path_oracle(&dag, &s, y, x);
                            assert!(close(c.get(x, y), oracle, 1e-12), "{} {x} {y}", s.name());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn support_is_strict_order() {
        for seed in 0..20 {
            let dag = erdos_renyi_dag(12, 0.2, (0.1, 1.0), seed).unwrap();
            let poset = dag.poset();
            for s in all_semirings() {
                let c = weighted_transitive_closure(&dag, &s);
                for x in 0..12 {
                    for y in 0..12 {
                        let reachable = y != x && poset.leq(y, x);
                        assert_eq!(!s.is_zero(c.get(x, y)) && y < x, reachable);
                    }
                }
            }
        }
    }

    #[test]
    fn idempotent_semirings_are_stable_under_reclosure() {
        for seed in 0..10 {
            let dag = erdos_renyi_dag(10, 0.3, (0.1, 1.0), seed).unwrap();
            for s in [Semiring::boolean(), Semiring::influence(), Semiring::shortest_path(), Semiring::max_capacity()] {
                let c = weighted_transitive_closure(&dag, &s);
                let closed_dag = dag.with_edges(
                    c.entries()
                        .triplets()
                        .map(|(x, y, v)| crate::dag::Edge { src: y, dst: x, weight: v })
                        .collect(),
                );
                let again = weighted_transitive_closure(&closed_dag, &s);
                assert_eq!(again.entries().nnz(), c.entries().nnz());
                for (x, y, v) in c.entries().triplets() {
                    assert!(close(again.get(x, y), v, 1e-12));
                }
            }
        }
    }

    #[test]
    fn closed_form_matches_generic_with_signed_weights() {
        for seed in 0..30 {
            let dag = erdos_renyi_dag(8, 0.5, (-1.0, 1.0), seed).unwrap();
            let generic = weighted_transitive_closure(&dag, &Semiring::pollution());
            let closed = pollution_closure_closed_form(&dag);
            for x in 0..8 {
                for y in 0..x {
                    assert!((generic.get(x, y) - closed.get(x, y)).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn capacity_conversion() {
        let dag = WeightedDag::new(3, &[(0, 1, 2.0), (1, 2, 4.0)], None).unwrap();
        let c = weighted_transitive_closure(&dag, &Semiring::max_capacity());
        assert_eq!(c.get(2, 0), 2.0);
        let unit = capacity_to_unit(&c).unwrap();
        assert!((unit.get(2, 0) - (-0.5f64).exp()).abs() < 1e-15);
        let w = closure_operator(&dag, &Semiring::max_capacity()).unwrap();
        assert_eq!(w.get(2, 2), 1.0);
    }
}
