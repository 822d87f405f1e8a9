use rayon::prelude::*;

use super::{apply_shift, check_len, SpectralError};
use crate::closure::ClosureOperator;
use crate::dag::PosetView;

#[derive(Debug, Clone, PartialEq)]
pub struct TotalVariation {
    /// `TV_q(s) = ||s - T_q s||_2`, one entry per shift `q`.
    pub per_shift: Vec<f64>,
    /// Sum over all shifts.
    pub sum: f64,
}

pub fn total_variation(s: &[f64], w: &ClosureOperator, poset: &PosetView) -> Result<TotalVariation, SpectralError> {
    check_len(w.n(), s.len())?;
    let per_shift: Vec<f64> = (0..w.n())
        .into_par_iter()
        .map(|q| {
            let shifted = apply_shift(q, s, w, poset).expect("length checked");
            s.iter().zip(shifted.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        })
        .collect();
    let sum = per_shift.iter().sum();
    Ok(TotalVariation { per_shift, sum })
}

/// Column `f^y` of `W` scaled to unit Euclidean norm.
pub fn normalized_basis_vector(y: usize, w: &ClosureOperator) -> Vec<f64> {
    let mut f = w.basis_vector(y);
    let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    f.iter_mut().for_each(|v| *v /= norm);
    f
}

/// Total variation of the normalized basis vector `f^y`.
pub fn basis_total_variation(y: usize, w: &ClosureOperator, poset: &PosetView) -> TotalVariation {
    total_variation(&normalized_basis_vector(y, w), w, poset).expect("basis vector has length n")
}

/// Frequencies sorted by sum total variation, with the componentwise
/// comparability of their TV vectors.
///
/// `TV(f^y)` is the indicator of `{q : y ≰ q}`, so both are read off the
/// poset: no shift is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyOrder {
    /// Nodes ascending by STV, ties by topological index.
    pub order: Vec<usize>,
    /// `STV(f^y) = |{q : y ≰ q}|`, indexed by node.
    pub stv: Vec<usize>,
    n: usize,
    leq: Vec<bool>,
}

impl FrequencyOrder {
    /// Whether `TV(f^x) <= TV(f^y)` componentwise.
    pub fn tv_leq(&self, x: usize, y: usize) -> bool {
        self.leq[x * self.n + y]
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

pub fn frequency_order(poset: &PosetView) -> FrequencyOrder {
    let n = poset.n();
    let stv: Vec<usize> = (0..n).map(|y| n - poset.successor_set(y).count_ones(..)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&y| (stv[y], y));
    // [x ≰ q] <= [y ≰ q] for all q  <=>  successors(y) ⊆ successors(x)
    let mut leq = vec![false; n * n];
    for x in 0..n {
        for y in 0..n {
            leq[x * n + y] = poset.successor_set(y).is_subset(poset.successor_set(x));
        }
    }
    FrequencyOrder { order, stv, n, leq }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::closure_operator;
    use crate::dag::{erdos_renyi_dag, WeightedDag};
    use crate::fixtures::example_dag;
    use crate::semiring::{Semiring, SemiringKind};
    use proptest::prelude::*;

    #[test]
    fn example_tv_of_first_basis_vector() {
        let dag = example_dag();
        let w = closure_operator(&dag, &Semiring::pollution()).unwrap();
        let tv = basis_total_variation(0, &w, &dag.poset());
        let expected = [0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        for (a, b) in tv.per_shift.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((tv.sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn example_frequency_order() {
        let dag = example_dag();
        let fo = frequency_order(&dag.poset());
        let (c, e, f) = (2, 4, 5);
        assert!(fo.tv_leq(c, e));
        assert!(!fo.tv_leq(c, f));
        assert_eq!(fo.stv, vec![1, 1, 4, 3, 5, 5]);
        assert_eq!(fo.order, vec![0, 1, 3, 2, 4, 5]);
    }

    #[test]
    fn global_minimum_has_zero_variation() {
        let dag = WeightedDag::new(4, &[(0, 1, 0.4), (0, 2, -0.3), (1, 3, 2.0), (2, 3, 1.0)], None).unwrap();
        let w = closure_operator(&dag, &Semiring::pollution()).unwrap();
        let tv = basis_total_variation(0, &w, &dag.poset());
        assert!(tv.per_shift.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn chain_stv_increases() {
        let chain = WeightedDag::new(5, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)], None).unwrap();
        let fo = frequency_order(&chain.poset());
        assert_eq!(fo.stv, vec![0, 1, 2, 3, 4]);
        assert_eq!(fo.order, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn raw_signal_is_not_normalized() {
        let dag = example_dag();
        let w = closure_operator(&dag, &Semiring::pollution()).unwrap();
        let s: Vec<f64> = w.basis_vector(0).iter().map(|v| 3.0 * v).collect();
        let tv = total_variation(&s, &w, &dag.poset()).unwrap();
        let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((tv.per_shift[1] - norm).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn basis_tv_is_poset_indicator(seed in 0u64..10_000, n in 2usize..=10, p in 0.1f64..0.7) {
            let dag = erdos_renyi_dag(n, p, (-1.0, 1.0), seed).unwrap();
            let poset = dag.poset();
            for kind in [SemiringKind::Pollution, SemiringKind::Influence, SemiringKind::Boolean] {
                let Ok(w) = closure_operator(&dag, &Semiring::from_kind(kind).unwrap()) else { continue };
                let numeric: Vec<Vec<f64>> = (0..n).map(|y| basis_total_variation(y, &w, &poset).per_shift).collect();
                for y in 0..n {
                    for q in 0..n {
                        let expected = if poset.leq(y, q) { 0.0 } else { 1.0 };
                        prop_assert!((numeric[y][q] - expected).abs() < 1e-9);
                    }
                }
                let fo = frequency_order(&poset);
                for x in 0..n {
                    for y in 0..n {
                        let componentwise = (0..n).all(|q| numeric[x][q] <= numeric[y][q] + 1e-9);
                        prop_assert_eq!(componentwise, poset.leq(x, y));
                        prop_assert_eq!(fo.tv_leq(x, y), poset.leq(x, y));
                    }
                }
                for pair in fo.order.windows(2) {
                    prop_assert!(!poset.leq(pair[1], pair[0]) || pair[0] == pair[1]);
                }
            }
        }
    }
}
