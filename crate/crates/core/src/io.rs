//! CSV formats: edge lists (`src,dst,weight`), label files (one per line),
//! matrices as `row,col,value` triplets and signals as `node,value`.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::closure::{ClosureMatrix, ClosureOperator};
use crate::dag::WeightedDag;
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRecord {
    src: String,
    dst: String,
    weight: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SignalRecord {
    node: String,
    value: f64,
}

fn parse_error(line: Option<u64>, message: impl std::fmt::Display) -> Error {
    match line {
        Some(l) => Error::Config(format!("line {l}: {message}")),
        None => Error::Config(message.to_string()),
    }
}

/// Reads an edge list; `labels` (e.g. from a label file) fixes the indexing
/// of listed nodes and adds isolated ones.
pub fn read_edge_list(reader: impl Read, labels: &[String]) -> Result<WeightedDag> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut edges = Vec::new();
    for record in rdr.deserialize::<EdgeRecord>() {
        let r = record?;
        edges.push((r.src, r.dst, r.weight));
    }
    Ok(WeightedDag::from_labeled_edges(labels, &edges)?)
}

pub fn load_dag(edges: &Path, labels: Option<&Path>) -> Result<WeightedDag> {
    let labels = match labels {
        Some(p) => read_labels(std::fs::File::open(p)?)?,
        None => Vec::new(),
    };
    read_edge_list(std::fs::File::open(edges)?, &labels)
}

/// One label per non-empty line.
pub fn read_labels(reader: impl Read) -> Result<Vec<String>> {
    let mut labels = Vec::new();
    for line in BufReader::new(reader).lines() {
        let line = line?;
        let label = line.trim();
        if !label.is_empty() {
            labels.push(label.to_string());
        }
    }
    Ok(labels)
}

pub fn write_edge_list(dag: &WeightedDag, writer: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for e in dag.edges() {
        wtr.serialize(EdgeRecord { src: dag.label(e.src).into(), dst: dag.label(e.dst).into(), weight: e.weight })?;
    }
    if dag.edges().is_empty() {
        wtr.write_record(["src", "dst", "weight"])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes `row,col,value` triplets in topological indexing.
pub fn write_triplets(writer: impl Write, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["row", "col", "value"])?;
    for (i, j, v) in triplets {
        wtr.write_record([i.to_string(), j.to_string(), v.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Stored entries of a closure (strictly lower part).
pub fn write_closure(closure: &ClosureMatrix, writer: impl Write) -> Result<()> {
    write_triplets(writer, closure.entries().triplets())
}

/// Nonzero entries of `W`, diagonal included.
pub fn write_operator(w: &ClosureOperator, writer: impl Write) -> Result<()> {
    let strict = w.matrix().strict();
    let rows = (0..w.n()).flat_map(|i| {
        let (cols, vals) = strict.row(i);
        cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v)).chain(std::iter::once((i, i, 1.0)))
    });
    write_triplets(writer, rows)
}

pub fn read_triplets(reader: impl Read) -> Result<Vec<(usize, usize, f64)>> {
    #[derive(Deserialize)]
    struct Triplet {
        row: usize,
        col: usize,
        value: f64,
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for t in rdr.deserialize::<Triplet>() {
        let t = t?;
        out.push((t.row, t.col, t.value));
    }
    Ok(out)
}

/// Reads `node,value` rows into a vector indexed like `dag`; every node
/// must appear exactly once.
pub fn read_signal(reader: impl Read, labels: &[String]) -> Result<Vec<f64>> {
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut values = vec![None; labels.len()];
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    for record in rdr.deserialize::<SignalRecord>() {
        let r = record?;
        let Some(&i) = index.get(r.node.as_str()) else {
            return Err(parse_error(None, format!("unknown node `{}`", r.node)));
        };
        if values[i].replace(r.value).is_some() {
            return Err(parse_error(None, format!("node `{}` listed twice", r.node)));
        }
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| parse_error(None, format!("no value for node `{}`", labels[i]))))
        .collect()
}

pub fn write_signal(labels: &[String], values: &[f64], writer: impl Write) -> Result<()> {
    assert_eq!(labels.len(), values.len());
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["node", "value"])?;
    for (l, v) in labels.iter().zip(values) {
        wtr.write_record([l.as_str(), &v.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::{closure_operator, weighted_transitive_closure};
    use crate::fixtures::example_dag;
    use crate::semiring::Semiring;

    #[test]
    fn edge_list_round_trip() {
        let dag = example_dag();
        let mut buf = Vec::new();
        write_edge_list(&dag, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("src,dst,weight\na,c,0.3\n"), "{text}");
        let back = read_edge_list(buf.as_slice(), &dag.labels().to_vec()).unwrap();
        assert_eq!(back, dag);
    }

    #[test]
    fn labels_add_isolated_nodes() {
        let labels = read_labels("x\n\n y \nz\n".as_bytes()).unwrap();
        assert_eq!(labels, vec!["x", "y", "z"]);
        let dag = read_edge_list("src,dst,weight\nz,x,2\n".as_bytes(), &labels).unwrap();
        assert_eq!(dag.n(), 3);
        assert_eq!(dag.labels(), &["y", "z", "x"]);
    }

    #[test]
    fn bad_edge_lists() {
        assert!(matches!(read_edge_list("src,dst,weight\na,b,x\n".as_bytes(), &[]), Err(Error::Csv(_))));
        assert!(matches!(read_edge_list("src,dst,weight\na,b,0\n".as_bytes(), &[]), Err(Error::Dag(_))));
        assert!(matches!(read_edge_list("src,dst,weight\na,b,1\nb,a,1\n".as_bytes(), &[]), Err(Error::Dag(_))));
    }

    #[test]
    fn triplets_round_trip() {
        let dag = example_dag();
        let closure = weighted_transitive_closure(&dag, &Semiring::pollution());
        let mut buf = Vec::new();
        write_closure(&closure, &mut buf).unwrap();
        let t = read_triplets(buf.as_slice()).unwrap();
        assert_eq!(t.len(), 11);
        assert_eq!(t, closure.entries().triplets().collect::<Vec<_>>());

        let w = closure_operator(&dag, &Semiring::pollution()).unwrap();
        let mut buf = Vec::new();
        write_operator(&w, &mut buf).unwrap();
        assert_eq!(read_triplets(buf.as_slice()).unwrap().len(), 17);

        let sp = weighted_transitive_closure(&dag, &Semiring::shortest_path());
        let mut buf = Vec::new();
        write_closure(&sp, &mut buf).unwrap();
        assert!(!String::from_utf8(buf).unwrap().contains("inf"));
    }

    #[test]
    fn signal_round_trip() {
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let mut buf = Vec::new();
        write_signal(&labels, &[1.5, -2.0, 0.1], &mut buf).unwrap();
        assert_eq!(read_signal(buf.as_slice(), &labels).unwrap(), vec![1.5, -2.0, 0.1]);
        assert!(read_signal("node,value\nb,1\nc,2\n".as_bytes(), &labels).is_err());
        assert!(read_signal("node,value\na,1\na,1\nb,1\nc,2\n".as_bytes(), &labels).is_err());
        assert!(read_signal("node,value\nq,1\n".as_bytes(), &labels).is_err());
    }
}
