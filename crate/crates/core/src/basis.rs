//! The six Fourier bases compared in reconstruction experiments.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, UndirectedSource};
use crate::closure::{closure_operator, ClosureOperator};
use crate::dag::WeightedDag;
use crate::error::Result;
use crate::semiring::Semiring;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    /// Columns of the weighted closure `W`.
    DagWeighted,
    /// Columns of the boolean closure of the unweighted DAG.
    DagBoolean,
    /// Eigenvectors of `A + Aᵀ`.
    Adjacency,
    /// Eigenvectors of `W + Wᵀ - 2I`.
    AdjacencyClosed,
    Laplacian,
    LaplacianClosed,
}

impl BasisKind {
    pub const ALL: [BasisKind; 6] = [
        BasisKind::DagWeighted,
        BasisKind::DagBoolean,
        BasisKind::Adjacency,
        BasisKind::AdjacencyClosed,
        BasisKind::Laplacian,
        BasisKind::LaplacianClosed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BasisKind::DagWeighted => "dag-weighted",
            BasisKind::DagBoolean => "dag-boolean",
            BasisKind::Adjacency => "adjacency",
            BasisKind::AdjacencyClosed => "adjacency-closed",
            BasisKind::Laplacian => "laplacian",
            BasisKind::LaplacianClosed => "laplacian-closed",
        }
    }

    pub fn is_dag(self) -> bool {
        matches!(self, BasisKind::DagWeighted | BasisKind::DagBoolean)
    }

    fn undirected(self) -> Option<UndirectedSource> {
        match self {
            BasisKind::Adjacency => Some(UndirectedSource::Adjacency),
            BasisKind::AdjacencyClosed => Some(UndirectedSource::AdjacencyClosed),
            BasisKind::Laplacian => Some(UndirectedSource::Laplacian),
            BasisKind::LaplacianClosed => Some(UndirectedSource::LaplacianClosed),
            _ => None,
        }
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BasisKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        BasisKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown basis `{s}`"))
    }
}

/// Closures of one DAG, shared by all bases built from it.
#[derive(Debug, Clone)]
pub struct BasisContext<'a> {
    pub dag: &'a WeightedDag,
    pub weighted: ClosureOperator,
    boolean: Option<ClosureOperator>,
}

impl<'a> BasisContext<'a> {
    /// `semiring` gives the weighted closure; the boolean one is built on demand.
    pub fn new(dag: &'a WeightedDag, semiring: &Semiring) -> Result<Self> {
        Ok(Self { dag, weighted: closure_operator(dag, semiring)?, boolean: None })
    }

    pub fn boolean(&mut self) -> Result<&ClosureOperator> {
        if self.boolean.is_none() {
            self.boolean = Some(closure_operator(&self.dag.unweighted(), &Semiring::boolean())?);
        }
        Ok(self.boolean.as_ref().expect("just built"))
    }

    /// Dense `n x n` matrix whose columns are the basis vectors.
    pub fn build(&mut self, kind: BasisKind) -> Result<DMatrix<f64>> {
        if let Some(source) = kind.undirected() {
            let m = match source {
                UndirectedSource::Adjacency => baselines::undirected_adjacency(self.dag),
                UndirectedSource::AdjacencyClosed => baselines::undirected_closure(&self.weighted),
                UndirectedSource::Laplacian => baselines::laplacian(&baselines::undirected_adjacency(self.dag)),
                UndirectedSource::LaplacianClosed => baselines::laplacian(&baselines::undirected_closure(&self.weighted)),
            };
            let eig = baselines::symmetric_eigenbasis(&m)?;
            return Ok(eig.vectors);
        }
        Ok(match kind {
            BasisKind::DagWeighted => self.weighted.to_dense(),
            _ => self.boolean()?.to_dense(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_dag;

    #[test]
    fn names_round_trip() {
        for kind in BasisKind::ALL {
            assert_eq!(kind.as_str().parse::<BasisKind>(), Ok(kind));
        }
        assert!("fourier".parse::<BasisKind>().is_err());
        assert_eq!(serde_json::to_string(&BasisKind::AdjacencyClosed).unwrap(), "\"adjacency-closed\"");
    }

    #[test]
    fn builds_all_bases() {
        let dag = example_dag();
        let mut ctx = BasisContext::new(&dag, &Semiring::pollution()).unwrap();
        for kind in BasisKind::ALL {
            let b = ctx.build(kind).unwrap();
            assert_eq!(b.shape(), (6, 6));
            assert!(b.clone().try_inverse().is_some(), "{kind}");
        }
        let boolean = ctx.build(BasisKind::DagBoolean).unwrap();
        assert_eq!(boolean[(4, 0)], 1.0);
        assert_eq!(boolean[(5, 2)], 0.0);
        let weighted = ctx.build(BasisKind::DagWeighted).unwrap();
        assert!((weighted[(4, 0)] - 0.65).abs() < 1e-12);
    }
}
