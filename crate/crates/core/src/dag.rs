//! Weighted DAGs, their induced partial order, and random DAG generation.
//!
//! A [`WeightedDag`] is always stored in topological order: node `i` is the
//! `i`-th node of a deterministic topological sort, and every edge goes from
//! a smaller to a larger index. The weight matrix `A` (with `A[x, y]` the
//! weight of the edge `y -> x`) is therefore strictly lower triangular.

use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::cmp::Reverse;

use fixedbitset::FixedBitSet;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DagError {
    #[error("the edge list contains a directed cycle")]
    CycleDetected,
    #[error("edge {src} -> {dst} has weight zero")]
    ZeroWeight { src: String, dst: String },
    #[error("edge {src} -> {dst} appears more than once")]
    DuplicateEdge { src: String, dst: String },
    #[error("edge {src} -> {dst} has a non-finite weight")]
    NonFiniteWeight { src: String, dst: String },
    #[error("node index {index} out of range for {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },
    #[error("expected {expected} node labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("weight range [{lo}, {hi}] is empty")]
    EmptyWeightRange { lo: f64, hi: f64 },
    #[error("edge probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
}

/// A directed, weighted edge `src -> dst` between topologically sorted nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// Edge-weighted DAG in topological order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDag {
    labels: Vec<String>,
    /// `input_index[i]` is the index the `i`-th sorted node had in the input.
    input_index: Vec<usize>,
    /// Sorted by `(dst, src)`.
    edges: Vec<Edge>,
    /// Incoming edges per node as `(parent, weight)`, sorted by parent.
    parents: Vec<Vec<(usize, f64)>>,
    children: Vec<Vec<(usize, f64)>>,
}

impl WeightedDag {
    /// Builds a DAG on nodes `0..n` from `(src, dst, weight)` triples.
    ///
    /// Nodes are re-indexed by a stable Kahn sort in which ties are broken
    /// by ascending input index. Labels default to the input indices.
    pub fn new(
        n: usize,
        edges: &[(usize, usize, f64)],
        labels: Option<Vec<String>>,
    ) -> Result<Self, DagError> {
        let labels = match labels {
            Some(l) if l.len() != n => {
                return Err(DagError::LabelCount { expected: n, got: l.len() })
            }
            Some(l) => l,
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        let name = |i: usize| labels[i].clone();

        let mut seen = BTreeSet::new();
        let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut indegree = vec![0usize; n];
        for &(src, dst, weight) in edges {
            for index in [src, dst] {
                if index >= n {
                    return Err(DagError::NodeOutOfRange { index, n });
                }
            }
            if src == dst {
                return Err(DagError::CycleDetected);
            }
            if weight == 0.0 {
                return Err(DagError::ZeroWeight { src: name(src), dst: name(dst) });
            }
            if !weight.is_finite() {
                return Err(DagError::NonFiniteWeight { src: name(src), dst: name(dst) });
            }
            if !seen.insert((src, dst)) {
                return Err(DagError::DuplicateEdge { src: name(src), dst: name(dst) });
            }
            out[src].push((dst, weight));
            indegree[dst] += 1;
        }

        let mut heap: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&v| indegree[v] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(v)) = heap.pop() {
            order.push(v);
            for &(w, _) in &out[v] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    heap.push(Reverse(w));
                }
            }
        }
        if order.len() != n {
            return Err(DagError::CycleDetected);
        }

        let mut position = vec![0usize; n];
        for (pos, &v) in order.iter().enumerate() {
            position[v] = pos;
        }
        let sorted_edges = edges
            .iter()
            .map(|&(s, d, w)| Edge { src: position[s], dst: position[d], weight: w })
            .collect();
        let sorted_labels = order.iter().map(|&v| labels[v].clone()).collect();
        Ok(Self::from_sorted_parts(sorted_labels, order, sorted_edges))
    }

    /// Builds a DAG from labelled edges. Node indices follow the order in
    /// which labels first appear; `extra_nodes` lists labels (in order) that
    /// are registered before any edge, e.g. isolated nodes.
    pub fn from_labeled_edges(
        extra_nodes: &[String],
        edges: &[(String, String, f64)],
    ) -> Result<Self, DagError> {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut labels = Vec::new();
        let mut intern = |label: &str| -> usize {
            if let Some(&i) = index.get(label) {
                return i;
            }
            labels.push(label.to_string());
            index.insert(label.to_string(), labels.len() - 1);
            labels.len() - 1
        };
        for l in extra_nodes {
            intern(l);
        }
        let triples: Vec<_> = edges
            .iter()
            .map(|(s, d, w)| (intern(s), intern(d), *w))
            .collect();
        let n = labels.len();
        Self::new(n, &triples, Some(labels))
    }

    fn from_sorted_parts(labels: Vec<String>, input_index: Vec<usize>, mut edges: Vec<Edge>) -> Self {
        let n = labels.len();
        edges.sort_by_key(|e| (e.dst, e.src));
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for e in &edges {
            debug_assert!(e.src < e.dst);
            parents[e.dst].push((e.src, e.weight));
            children[e.src].push((e.dst, e.weight));
        }
        for c in &mut children {
            c.sort_by_key(|&(d, _)| d);
        }
        Self { labels, input_index, edges, parents, children }
    }

    /// A copy with the same nodes and a new edge set, given in sorted indexing.
    ///
    /// Edges must go forward in the current order; the order is kept as is.
    pub fn with_edges(&self, edges: Vec<Edge>) -> Self {
        Self::from_sorted_parts(self.labels.clone(), self.input_index.clone(), edges)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    /// Sorted index of the node with the given label.
    pub fn node(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The topological order as input node indices.
    pub fn topo_order(&self) -> &[usize] {
        &self.input_index
    }

    pub fn parents(&self, node: usize) -> &[(usize, f64)] {
        &self.parents[node]
    }

    pub fn children(&self, node: usize) -> &[(usize, f64)] {
        &self.children[node]
    }

    pub fn weight(&self, src: usize, dst: usize) -> Option<f64> {
        self.parents[dst]
            .binary_search_by_key(&src, |&(p, _)| p)
            .ok()
            .map(|i| self.parents[dst][i].1)
    }

    /// Dense weight matrix `A` with `A[x, y]` the weight of edge `y -> x`.
    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut a = DMatrix::zeros(n, n);
        for e in &self.edges {
            a[(e.dst, e.src)] = e.weight;
        }
        a
    }

    /// Same DAG with every weight replaced by one.
    pub fn unweighted(&self) -> Self {
        let edges = self.edges.iter().map(|e| Edge { weight: 1.0, ..*e }).collect();
        self.with_edges(edges)
    }

    pub fn poset(&self) -> PosetView {
        PosetView::new(self)
    }

    /// The cover graph: keeps `y -> x` only if no longer path `y -> ... -> x` exists.
    pub fn transitive_reduction(&self) -> Self {
        let poset = self.poset();
        let kept = self
            .edges
            .iter()
            .filter(|e| {
                !self.parents[e.dst]
                    .iter()
                    .any(|&(z, _)| z != e.src && poset.leq(e.src, z))
            })
            .copied()
            .collect();
        self.with_edges(kept)
    }

    /// The reachability graph with unit weights: one edge per pair `y < x`.
    pub fn reachability_graph(&self) -> Self {
        let poset = self.poset();
        let mut edges = Vec::new();
        for x in 0..self.n() {
            for y in poset.predecessors(x) {
                if y != x {
                    edges.push(Edge { src: y, dst: x, weight: 1.0 });
                }
            }
        }
        self.with_edges(edges)
    }
}

/// Reachability relation of a DAG, stored as one bitset per node in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct PosetView {
    below: Vec<FixedBitSet>,
    above: Vec<FixedBitSet>,
}

impl PosetView {
    pub fn new(dag: &WeightedDag) -> Self {
        let n = dag.n();
        let mut below: Vec<FixedBitSet> = Vec::with_capacity(n);
        for x in 0..n {
            let mut set = FixedBitSet::with_capacity(n);
            set.insert(x);
            for &(p, _) in dag.parents(x) {
                set.union_with(&below[p]);
            }
            below.push(set);
        }
        let mut above = vec![FixedBitSet::with_capacity(n); n];
        for x in 0..n {
            for y in below[x].ones() {
                above[y].insert(x);
            }
        }
        Self { below, above }
    }

    pub fn n(&self) -> usize {
        self.below.len()
    }

    /// `y <= x`: either `y == x` or there is a path from `y` to `x`.
    pub fn leq(&self, y: usize, x: usize) -> bool {
        self.below[x].contains(y)
    }

    /// All `y` with `y <= x`, ascending; includes `x`.
    pub fn predecessors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.below[x].ones()
    }

    /// All `q` with `y <= q`, ascending; includes `y`.
    pub fn successors(&self, y: usize) -> impl Iterator<Item = usize> + '_ {
        self.above[y].ones()
    }

    pub fn predecessor_set(&self, x: usize) -> &FixedBitSet {
        &self.below[x]
    }

    pub fn successor_set(&self, y: usize) -> &FixedBitSet {
        &self.above[y]
    }

    /// Number of comparable pairs `y < x`.
    pub fn strict_pair_count(&self) -> usize {
        self.below.iter().map(|b| b.count_ones(..) - 1).sum()
    }
}

/// Random DAG: nodes are put in a random order and each forward pair gets an
/// edge with probability `p`, weighted uniformly in `weight_range`.
///
/// A sampled weight of exactly zero is drawn again.
pub fn erdos_renyi_dag(
    n: usize,
    p: f64,
    weight_range: (f64, f64),
    seed: u64,
) -> Result<WeightedDag, DagError> {
    let (lo, hi) = weight_range;
    if !(0.0..=1.0).contains(&p) {
        return Err(DagError::InvalidProbability(p));
    }
    if !(lo.is_finite() && hi.is_finite()) || lo > hi || (lo == hi && lo == 0.0) {
        return Err(DagError::EmptyWeightRange { lo, hi });
    }
    let mut rng = rng::stream(seed, &[rng::tag::DAG]);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                let w = loop {
                    let w = if lo == hi { lo } else { rng.random_range(lo..hi) };
                    if w != 0.0 {
                        break w;
                    }
                };
                edges.push((perm[i], perm[j], w));
            }
        }
    }
    WeightedDag::new(n, &edges, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_dag;

    /// Brute-force DFS reachability oracle.
    fn reaches(dag: &WeightedDag, from: usize, to: usize) -> bool {
        let mut stack = vec![from];
        let mut seen = vec![false; dag.n()];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if !std::mem::replace(&mut seen[v], true) {
                stack.extend(dag.children(v).iter().map(|&(c, _)| c));
            }
        }
        false
    }

    #[test]
    fn example_is_strictly_lower_triangular() {
        let dag = example_dag();
        assert_eq!(dag.labels(), ["a", "b", "c", "d", "e", "f"]);
        let a = dag.adjacency_matrix();
        for x in 0..6 {
            for y in x..6 {
                assert_eq!(a[(x, y)], 0.0);
            }
        }
        assert_eq!(a[(2, 0)], 0.3);
        assert_eq!(a[(5, 3)], 0.5);
    }

    #[test]
    fn singleton_and_cycles() {
        let dag = WeightedDag::new(1, &[], None).unwrap();
        assert_eq!(dag.topo_order(), [0]);
        assert_eq!(
            WeightedDag::new(2, &[(0, 1, 1.0), (1, 0, 1.0)], None),
            Err(DagError::CycleDetected)
        );
        assert_eq!(WeightedDag::new(2, &[(1, 1, 1.0)], None), Err(DagError::CycleDetected));
    }

    #[test]
    fn rejects_zero_and_duplicate_edges() {
        assert!(matches!(
            WeightedDag::new(2, &[(0, 1, 0.0)], None),
            Err(DagError::ZeroWeight { .. })
        ));
        assert!(matches!(
            WeightedDag::new(2, &[(0, 1, 1.0), (0, 1, 2.0)], None),
            Err(DagError::DuplicateEdge { .. })
        ));
        assert!(matches!(
            WeightedDag::new(2, &[(0, 5, 1.0)], None),
            Err(DagError::NodeOutOfRange { index: 5, n: 2 })
        ));
    }

    #[test]
    fn kahn_ties_break_by_input_index() {
        // 3 -> 0, 2 and 1 free: sorted order is 1, 2, 3, 0.
        let dag = WeightedDag::new(4, &[(3, 0, 1.0)], None).unwrap();
        assert_eq!(dag.topo_order(), [1, 2, 3, 0]);
        assert_eq!(dag.edges(), [Edge { src: 2, dst: 3, weight: 1.0 }]);
    }

    #[test]
    fn example_poset_queries() {
        let dag = example_dag();
        let poset = dag.poset();
        let id = |l| dag.node(l).unwrap();
        assert!(poset.leq(id("a"), id("e")));
        assert!(!poset.leq(id("c"), id("f")));
        assert!(!poset.leq(id("a"), id("b")));
        for x in 0..6 {
            assert!(poset.leq(x, x));
        }
        assert_eq!(poset.successors(id("d")).collect::<Vec<_>>(), vec![3, 4, 5]);
    }

    #[test]
    fn example_reduction_drops_shortcut() {
        let dag = example_dag();
        let reduced = dag.transitive_reduction();
        assert_eq!(reduced.edge_count(), 7);
        assert!(reduced.weight(dag.node("b").unwrap(), dag.node("f").unwrap()).is_none());
        // the reachability graph adds a->e, b->e, a->f
        let closed = dag.reachability_graph();
        assert_eq!(closed.edge_count(), 11);
        let pairs: BTreeSet<_> = closed
            .edges()
            .iter()
            .map(|e| (dag.label(e.src), dag.label(e.dst)))
            .collect();
        for p in [("a", "e"), ("b", "e"), ("a", "f"), ("b", "f")] {
            assert!(pairs.contains(&p));
        }
    }

    #[test]
    fn chain_reduction() {
        let chain = WeightedDag::new(3, &[(0, 1, 1.0), (1, 2, 1.0)], None).unwrap();
        assert_eq!(chain.transitive_reduction(), chain);
        let closed = chain.reachability_graph();
        assert_eq!(closed.edge_count(), 3);
        assert_eq!(closed.transitive_reduction().edge_count(), 2);
    }

    #[test]
    fn erdos_renyi_limits() {
        let empty = erdos_renyi_dag(10, 0.0, (-1.0, 1.0), 1).unwrap();
        assert_eq!(empty.edge_count(), 0);
        let full = erdos_renyi_dag(4, 1.0, (-1.0, 1.0), 1).unwrap();
        assert_eq!(full.edge_count(), 6);
        assert!(full.edges().iter().all(|e| e.weight != 0.0 && e.weight.abs() <= 1.0));
        assert!(matches!(
            erdos_renyi_dag(4, 0.5, (1.0, -1.0), 1),
            Err(DagError::EmptyWeightRange { .. })
        ));
        assert!(matches!(
            erdos_renyi_dag(4, 1.5, (0.0, 1.0), 1),
            Err(DagError::InvalidProbability(_))
        ));
        assert_eq!(
            erdos_renyi_dag(30, 0.2, (-1.0, 1.0), 7).unwrap(),
            erdos_renyi_dag(30, 0.2, (-1.0, 1.0), 7).unwrap()
        );
    }

    #[test]
    fn erdos_renyi_edge_count_near_expectation() {
        // n = 500, p = 0.05: p * n(n-1)/2 = 6237.5, std ~ 77
        let dag = erdos_renyi_dag(500, 0.05, (-1.0, 1.0), 3).unwrap();
        let m = dag.edge_count() as f64;
        assert!((m - 6237.5).abs() < 400.0, "edge count {m}");
    }

    #[test]
    fn poset_matches_dfs_on_random_dags() {
        for seed in 0..40 {
            let n = 2 + (seed as usize % 11);
            let dag = erdos_renyi_dag(n, 0.3, (0.5, 2.0), seed).unwrap();
            let poset = dag.poset();
            for e in dag.edges() {
                assert!(e.src < e.dst);
            }
            for y in 0..n {
                for x in 0..n {
                    assert_eq!(poset.leq(y, x), y == x || reaches(&dag, y, x));
                }
            }
            let reduced = dag.transitive_reduction();
            assert_eq!(reduced.poset(), poset);
        }
    }
}
