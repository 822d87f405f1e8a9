//! Dynamic contact networks, their time-unrolled DAGs, and SIR epidemics.
//!
//! Node `(v, t)` of the unrolled DAG has index `t · |V| + v`. Layers
//! `0..m` are the observed time points and layer `m` is the extra final
//! copy, so the DAG has `|V| · (m + 1)` nodes.

mod contacts;
mod sir;

use thiserror::Error;

use crate::dag::{Edge, WeightedDag};

pub use contacts::{contacts_from_walk, ingest_contacts, read_contacts, synth_contacts, MobilityParams};
pub use sir::{sir_simulate, SirConfig, SirState, SirTrace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynNetError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: negative distance {distance}")]
    NegativeDistance { line: u64, distance: f64 },
    #[error("contact ({t}, {u}, {v}) is invalid: {reason}")]
    InvalidContact { t: usize, u: usize, v: usize, reason: &'static str },
    #[error("{initial} initial infections requested for {population} individuals")]
    InitialExceedsPopulation { initial: usize, population: usize },
    #[error("invalid SIR configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("stride must be at least 1")]
    ZeroStride,
}

/// An undirected contact between `u < v` at time index `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub t: usize,
    pub u: usize,
    pub v: usize,
    /// Distance in meters.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicNetwork {
    individuals: usize,
    time_points: usize,
    /// Sorted by `(t, u, v)`.
    contacts: Vec<Contact>,
}

impl DynamicNetwork {
    /// Contacts are normalized to `u < v`; a pair may appear once per time point.
    pub fn new(individuals: usize, time_points: usize, contacts: Vec<Contact>) -> Result<Self, DynNetError> {
        let mut normalized = Vec::with_capacity(contacts.len());
        for c in contacts {
            let bad = |reason| DynNetError::InvalidContact { t: c.t, u: c.u, v: c.v, reason };
            if c.u >= individuals || c.v >= individuals {
                return Err(bad("individual out of range"));
            }
            if c.t >= time_points {
                return Err(bad("time out of range"));
            }
            if c.u == c.v {
                return Err(bad("self-contact"));
            }
            if !(c.distance >= 0.0) {
                return Err(bad("distance must be a non-negative number"));
            }
            normalized.push(Contact { u: c.u.min(c.v), v: c.u.max(c.v), ..c });
        }
        normalized.sort_by_key(|c| (c.t, c.u, c.v));
        if let Some(w) = normalized.windows(2).find(|w| (w[0].t, w[0].u, w[0].v) == (w[1].t, w[1].u, w[1].v)) {
            return Err(DynNetError::InvalidContact { t: w[0].t, u: w[0].u, v: w[0].v, reason: "duplicate contact" });
        }
        Ok(Self { individuals, time_points, contacts: normalized })
    }

    pub fn individuals(&self) -> usize {
        self.individuals
    }

    /// Number of observed time points `m`.
    pub fn time_points(&self) -> usize {
        self.time_points
    }

    pub fn contacts(&self) -> &[Contact] {
        &self.contacts
    }

    /// Contacts at time index `t`.
    pub fn contacts_at(&self, t: usize) -> &[Contact] {
        let lo = self.contacts.partition_point(|c| c.t < t);
        let hi = self.contacts.partition_point(|c| c.t <= t);
        &self.contacts[lo..hi]
    }

    /// Drops contacts farther apart than `eps` meters.
    pub fn with_cutoff(&self, eps: f64) -> Self {
        Self { contacts: self.contacts.iter().filter(|c| c.distance <= eps).copied().collect(), ..self.clone() }
    }

    /// Index of `(v, t)` in the unrolled DAG.
    pub fn node_index(&self, v: usize, t: usize) -> usize {
        t * self.individuals + v
    }

    pub fn unrolled_size(&self) -> usize {
        self.individuals * (self.time_points + 1)
    }
}

/// The time-unrolled DAG with every edge weight 1.
///
/// Edges: `(u, t) -> (u, t+1)` for all `u` and `t < m`, and both
/// `(u, t) -> (v, t+1)` and `(v, t) -> (u, t+1)` for each contact at `t`.
pub fn unroll(net: &DynamicNetwork) -> WeightedDag {
    build(net, |_| 1.0)
}

/// Self edges keep weight 1, contact edges get `e^{-d}`.
///
/// Contacts so distant that `e^{-d}` underflows to zero are left out.
pub fn assign_influence_weights(dag: &WeightedDag, net: &DynamicNetwork) -> WeightedDag {
    assert_eq!(dag.n(), net.unrolled_size(), "DAG is not the unrolling of this network");
    let n_ind = net.individuals();
    let mut edges: Vec<Edge> = Vec::with_capacity(dag.edge_count());
    for e in dag.edges() {
        let (t, u, v) = (e.src / n_ind, e.src % n_ind, e.dst % n_ind);
        let weight = if u == v {
            1.0
        } else {
            let (a, b) = (u.min(v), u.max(v));
            let contacts = net.contacts_at(t);
            let c = contacts[contacts.partition_point(|c| (c.u, c.v) < (a, b))];
            (-c.distance).exp()
        };
        if weight > 0.0 {
            edges.push(Edge { weight, ..*e });
        }
    }
    dag.with_edges(edges)
}

/// [`unroll`] followed by [`assign_influence_weights`].
pub fn influence_dag(net: &DynamicNetwork) -> WeightedDag {
    build(net, |d| (-d).exp())
}

fn build(net: &DynamicNetwork, contact_weight: impl Fn(f64) -> f64) -> WeightedDag {
    let n_ind = net.individuals();
    let m = net.time_points();
    let mut edges = Vec::with_capacity(n_ind * m + 2 * net.contacts().len());
    for t in 0..m {
        for u in 0..n_ind {
            edges.push((net.node_index(u, t), net.node_index(u, t + 1), 1.0));
        }
        for c in net.contacts_at(t) {
            let w = contact_weight(c.distance);
            if w > 0.0 {
                edges.push((net.node_index(c.u, t), net.node_index(c.v, t + 1), w));
                edges.push((net.node_index(c.v, t), net.node_index(c.u, t + 1), w));
            }
        }
    }
    let labels = (0..=m).flat_map(|t| (0..n_ind).map(move |v| format!("{v}@{t}"))).collect();
    WeightedDag::new(net.unrolled_size(), &edges, Some(labels)).expect("edges advance time by one step")
}
