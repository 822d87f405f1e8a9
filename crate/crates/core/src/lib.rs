//! Causal Fourier analysis for signals on edge-weighted DAGs.
//!
//! A signal on a DAG is modelled as `s = W c`, where `W` is a unit
//! lower-triangular closure of the edge weights and `c` holds one "cause"
//! per node. The causes form the spectrum of `s`; `W^-1`, whose entries are
//! a weighted Moebius function, is the Fourier transform. Around this core
//! the crate provides causal shifts and filters, total-variation frequency
//! ordering, sparse reconstruction from samples, and the experiment drivers
//! for linear-SEM signals and epidemic signals on time-unrolled contact
//! networks.

pub mod baselines;
pub mod basis;
pub mod closure;
pub mod dag;
pub mod dynnet;
pub mod experiment;
pub mod fixtures;
pub mod io;
pub mod learn;
pub mod rng;
pub mod sem;
pub mod semiring;
pub mod spectral;
pub mod triangular;

mod error;

pub use closure::{
    closure_operator, reflexive_closure, weighted_transitive_closure, ClosureMatrix, ClosureOperator,
};
pub use dag::{erdos_renyi_dag, PosetView, WeightedDag};
pub use error::{Error, Result};
pub use semiring::{Semiring, SemiringKind};
pub use spectral::{FourierOperator, Signal, Spectrum};
