//! On-disk formats: canonical graph directories, embedding text and binary
//! dumps, PMI matrix dumps with text sidecars.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::embed::Embedding;
use crate::error::{Error, ParseErrorKind, Result};
use crate::graph::{load_labels, Graph, NodeLabels};
use crate::pmi::PmiMatrix;

pub const NAMES_FILE: &str = "names.txt";
pub const EDGES_FILE: &str = "edges.txt";
pub const LABELS_FILE: &str = "labels.txt";
pub const STATS_FILE: &str = "stats.json";

/// Largest `n` for which CSV matrix dumps are allowed.
pub const CSV_MAX_N: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub volume: f64,
    pub total_weight: f64,
    pub labels: Option<usize>,
}

impl GraphStats {
    pub fn of(g: &Graph, labels: Option<&NodeLabels>) -> Self {
        Self {
            nodes: g.n(),
            edges: g.edges().len(),
            volume: g.volume(),
            total_weight: g.total_weight(),
            labels: labels.map(NodeLabels::num_labels),
        }
    }
}

pub fn write_names<W: Write>(g: &Graph, mut out: W) -> std::io::Result<()> {
    for name in g.names() {
        writeln!(out, "{name}")?;
    }
    Ok(())
}

/// Dense-id edge list, `u v w` with shortest round-trip weights.
pub fn write_dense_edges<W: Write>(g: &Graph, mut out: W) -> std::io::Result<()> {
    for e in g.edges() {
        writeln!(out, "{} {} {}", e.u, e.v, e.weight)?;
    }
    Ok(())
}

pub fn write_labels<W: Write>(g: &Graph, labels: &NodeLabels, mut out: W) -> std::io::Result<()> {
    for (name, set) in g.names().iter().zip(&labels.sets) {
        if set.is_empty() {
            continue;
        }
        write!(out, "{name}")?;
        for &l in set {
            write!(out, " {}", labels.label_names[l])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads a graph from a names file and a dense-id edge list.
pub fn read_dense_graph<N: BufRead, E: BufRead>(names: N, edges: E) -> Result<Graph> {
    let names: Vec<String> = names
        .lines()
        .map(|l| l.map(|s| s.trim().to_string()))
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect();
    let mut list = Vec::new();
    for (idx, line) in edges.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let malformed = || Error::Parse { line: idx + 1, kind: ParseErrorKind::Malformed(text.to_string()) };
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(malformed());
        }
        let u: usize = toks[0].parse().map_err(|_| malformed())?;
        let v: usize = toks[1].parse().map_err(|_| malformed())?;
        let w: f64 = toks[2].parse().map_err(|_| malformed())?;
        list.push((u, v, w));
    }
    Graph::from_edges(names, list)
}

/// Loads a preprocessed graph directory, with labels when present.
pub fn read_graph_dir(dir: &Path) -> Result<(Graph, Option<NodeLabels>)> {
    let names = BufReader::new(fs::File::open(dir.join(NAMES_FILE))?);
    let edges = BufReader::new(fs::File::open(dir.join(EDGES_FILE))?);
    let g = read_dense_graph(names, edges)?;
    let labels_path = dir.join(LABELS_FILE);
    let labels = if labels_path.exists() {
        Some(load_labels(BufReader::new(fs::File::open(labels_path)?), g.names())?)
    } else {
        None
    };
    Ok((g, labels))
}

/// One line per node: `name v1 … vd`, 17 significant digits.
pub fn write_embedding_text<W: Write>(names: &[String], emb: &Embedding, mut out: W) -> Result<()> {
    if names.len() != emb.n() {
        return Err(Error::DimensionMismatch { expected: emb.n(), actual: names.len() });
    }
    for (name, row) in names.iter().zip(emb.vectors.rows()) {
        write!(out, "{name}")?;
        for x in row {
            write!(out, " {x:.16e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Parses the embedding text format back into names and a row matrix.
pub fn read_embedding_text<R: BufRead>(reader: R) -> Result<(Vec<String>, Array2<f64>)> {
    let mut names = Vec::new();
    let mut data = Vec::new();
    let mut dim = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let malformed = || Error::Parse { line: idx + 1, kind: ParseErrorKind::Malformed(text.to_string()) };
        let mut toks = text.split_whitespace();
        let name = toks.next().ok_or_else(malformed)?;
        let row: Vec<f64> = toks.map(|t| t.parse().map_err(|_| malformed())).collect::<Result<_>>()?;
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => return Err(malformed()),
            _ => {}
        }
        names.push(name.to_string());
        data.extend(row);
    }
    let d = dim.unwrap_or(0);
    let m = Array2::from_shape_vec((names.len(), d), data).expect("rows share a width");
    Ok((names, m))
}

/// Row-major little-endian f64 dump.
pub fn write_matrix_binary<W: Write>(m: &Array2<f64>, mut out: W) -> std::io::Result<()> {
    for x in m.iter() {
        out.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_matrix_binary<R: Read>(mut reader: R, rows: usize, cols: usize) -> Result<Array2<f64>> {
    let mut buf = vec![0u8; rows * cols * 8];
    reader.read_exact(&mut buf)?;
    let data = buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok(Array2::from_shape_vec((rows, cols), data).expect("buffer sized rows*cols"))
}

/// `key=value` sidecar describing a PMI dump.
pub fn pmi_sidecar(pmi: &PmiMatrix) -> String {
    format!(
        "n={}\nT={}\nb={}\nepsilon={:e}\nramp={}\nkind={}\n",
        pmi.n(),
        pmi.config.window,
        pmi.config.neg_ratio,
        pmi.config.ramp.floor(),
        pmi.config.ramp.label(),
        pmi.kind.as_str()
    )
}

pub fn embedding_sidecar(emb: &Embedding) -> String {
    format!("n={}\nd={}\nmethod={}\n", emb.n(), emb.dim(), emb.config.method)
}

/// Parses a `key=value` sidecar.
pub fn parse_sidecar(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

/// CSV dump, only for small matrices.
pub fn write_matrix_csv<W: Write>(m: &Array2<f64>, mut out: W) -> Result<()> {
    if m.nrows() > CSV_MAX_N {
        return Err(Error::invalid(format!("CSV export limited to n <= {CSV_MAX_N}")));
    }
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.17e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
