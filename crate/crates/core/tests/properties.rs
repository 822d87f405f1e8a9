use dagsp::closure::{closure_with, ClosureMethod};
use dagsp::dynnet::{read_contacts, sir_simulate, Contact, DynamicNetwork, SirConfig, SirState};
use dagsp::learn::{roc_auc, sample_nodes};
use dagsp::spectral::{apply_shift, fourier_matrix_by_inversion, fourier_transform, inverse_fourier_transform, moebius_matrix};
use dagsp::{closure_operator, erdos_renyi_dag, Semiring};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn semirings() -> [Semiring; 5] {
    [Semiring::boolean(), Semiring::pollution(), Semiring::influence(), Semiring::shortest_path(), Semiring::max_capacity()]
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dense_and_row_sparse_closures_agree(seed in 0u64..10_000, n in 1usize..30, p in 0.0f64..0.5) {
        let signed = erdos_renyi_dag(n, p, (-1.0, 1.0), seed).unwrap();
        let positive = erdos_renyi_dag(n, p, (0.1, 3.0), seed).unwrap();
        for semiring in semirings() {
            let dag = if semiring.kind() == dagsp::SemiringKind::Pollution { &signed } else { &positive };
            let dense = closure_with(dag, &semiring, ClosureMethod::Dense).to_dense();
            let sparse = closure_with(dag, &semiring, ClosureMethod::RowSparse).to_dense();
            prop_assert!(max_abs(&(dense - sparse)) < 1e-10, "{:?}", semiring.kind());
        }
    }

    #[test]
    fn transitive_reduction_keeps_reachability(seed in 0u64..10_000, n in 1usize..25, p in 0.0f64..0.6) {
        let dag = erdos_renyi_dag(n, p, (0.5, 2.0), seed).unwrap();
        let reduced = dag.transitive_reduction();
        prop_assert!(reduced.edge_count() <= dag.edge_count());
        let (a, b) = (dag.poset(), reduced.poset());
        for x in 0..n {
            for y in 0..n {
                prop_assert_eq!(a.leq(y, x), b.leq(y, x));
            }
        }
    }

    #[test]
    fn fourier_routes_agree(seed in 0u64..10_000, n in 1usize..25, values in prop::collection::vec(-3.0f64..3.0, 25)) {
        let dag = erdos_renyi_dag(n, 0.3, (-1.0, 1.0), seed).unwrap();
        let poset = dag.poset();
        for semiring in [Semiring::pollution(), Semiring::boolean()] {
            let w = closure_operator(&dag, &semiring).unwrap();
            let f = fourier_matrix_by_inversion(&w);
            let moebius = moebius_matrix(&w, &poset);
            prop_assert!(max_abs(&(&f - moebius.matrix())) < 1e-9);
            prop_assert!(max_abs(&(w.to_dense() * &f - DMatrix::identity(n, n))) < 1e-9);

            let s = &values[..n];
            let c = fourier_transform(s, &w).unwrap();
            let by_matrix = &f * DVector::from_column_slice(s);
            prop_assert!(c.values().iter().zip(by_matrix.iter()).all(|(a, b)| (a - b).abs() < 1e-9));
            let back = inverse_fourier_transform(c.values(), &w).unwrap();
            prop_assert!(back.values().iter().zip(s).all(|(a, b)| (a - b).abs() < 1e-9));
        }
    }

    #[test]
    fn shifts_are_commuting_projections(seed in 0u64..10_000, n in 2usize..15, q in 0usize..15, r in 0usize..15) {
        let (q, r) = (q % n, r % n);
        let dag = erdos_renyi_dag(n, 0.4, (-1.0, 1.0), seed).unwrap();
        let poset = dag.poset();
        let w = closure_operator(&dag, &Semiring::pollution()).unwrap();
        let op = moebius_matrix(&w, &poset);
        let (tq, tr) = (op.shift_matrix(q, &poset), op.shift_matrix(r, &poset));
        prop_assert!(max_abs(&(&tq * &tq - &tq)) < 1e-9);
        prop_assert!(max_abs(&(&tq * &tr - &tr * &tq)) < 1e-9);

        let s: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let shifted = apply_shift(q, &s, &w, &poset).unwrap();
        let expected = &tq * DVector::from_vec(s);
        prop_assert!(shifted.values().iter().zip(expected.iter()).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn sir_trace_invariants(
        seed in 0u64..10_000,
        individuals in 2usize..12,
        time_points in 1usize..10,
        raw in prop::collection::vec((0usize..10, 0usize..12, 0usize..12, 0.0f64..40.0), 0..60),
        delay in 1usize..6,
    ) {
        let mut seen = std::collections::HashSet::new();
        let contacts: Vec<Contact> = raw
            .into_iter()
            .map(|(t, u, v, distance)| Contact { t: t % time_points, u: u % individuals, v: v % individuals, distance })
            .filter(|c| c.u != c.v && seen.insert((c.t, c.u.min(c.v), c.u.max(c.v))))
            .collect();
        let net = DynamicNetwork::new(individuals, time_points, contacts).unwrap();
        let cfg = SirConfig { rho: 10.0, eps: 20.0, recovery_delay: delay, initial_infected: 1, seed };
        let trace = sir_simulate(&net, &cfg).unwrap();
        prop_assert_eq!(trace.layers(), time_points + 1);
        let m = time_points;
        prop_assert_eq!((0..individuals).filter(|&v| trace.state(v, 0) == SirState::Infected).count(), 1);
        for v in 0..individuals {
            prop_assert_eq!(trace.state(v, m), trace.state(v, m - 1));
            let infected: Vec<usize> = (0..=m).filter(|&t| trace.state(v, t) == SirState::Infected).collect();
            if let (Some(&first), Some(&last)) = (infected.first(), infected.last()) {
                prop_assert_eq!(last - first + 1, infected.len());
                prop_assert!(infected.len() <= delay + 1);
                if first > 0 {
                    let t = first - 1;
                    let caused = net.contacts_at(t).iter().any(|c| {
                        let other = if c.u == v { c.v } else if c.v == v { c.u } else { return false };
                        c.distance <= cfg.eps && trace.state(other, t) == SirState::Infected
                    });
                    prop_assert!(caused);
                }
            }
            for t in 0..m {
                if trace.state(v, t) == SirState::Recovered {
                    prop_assert_eq!(trace.state(v, t + 1), SirState::Recovered);
                }
            }
        }
    }

    #[test]
    fn contact_csv_round_trip(raw in prop::collection::vec((0usize..20, 0usize..8, 0usize..8, 0.0f64..50.0), 1..40), stride in 1usize..4) {
        let mut seen = std::collections::HashSet::new();
        let rows: Vec<_> = raw.into_iter().filter(|r| r.1 != r.2 && seen.insert((r.0, r.1.min(r.2), r.1.max(r.2)))).collect();
        prop_assume!(!rows.is_empty());
        let mut text = String::from("t,u,v,distance\n");
        for (t, u, v, d) in &rows {
            text.push_str(&format!("{t},{u},{v},{d}\n"));
        }
        let net = read_contacts(text.as_bytes(), stride, None).unwrap();
        let max_t = rows.iter().map(|r| r.0).max().unwrap();
        let max_id = rows.iter().map(|r| r.1.max(r.2)).max().unwrap();
        prop_assert_eq!(net.time_points(), max_t / stride + 1);
        prop_assert_eq!(net.individuals(), max_id + 1);
        let kept = rows.iter().filter(|r| r.0 % stride == 0).count();
        prop_assert_eq!(net.contacts().len(), kept);
        for c in net.contacts() {
            let row = rows.iter().find(|r| r.0 == c.t * stride && r.1.min(r.2) == c.u && r.1.max(r.2) == c.v).unwrap();
            prop_assert_eq!(row.3, c.distance);
        }
    }

    #[test]
    fn auc_flips_with_score_sign(scores in prop::collection::vec(-3i32..3, 2..40), labels in prop::collection::vec(any::<bool>(), 40)) {
        let labels = &labels[..scores.len()];
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let s: Vec<f64> = scores.iter().map(|&v| v as f64).collect();
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        let a = roc_auc(&s, labels).unwrap().auc;
        let b = roc_auc(&neg, labels).unwrap().auc;
        prop_assert!((a + b - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn node_samples_are_distinct_and_reproducible(n in 1usize..200, fraction in 0.001f64..=1.0, seed in any::<u64>(), trial in 0u64..5) {
        let a = sample_nodes(n, fraction, seed, trial).unwrap();
        prop_assert_eq!(&a, &sample_nodes(n, fraction, seed, trial).unwrap());
        prop_assert_eq!(a.len(), ((fraction * n as f64).round() as usize).clamp(1, n));
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), a.len());
        prop_assert!(a.iter().all(|&i| i < n));
    }
}
