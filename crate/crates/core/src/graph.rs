//! Undirected weighted graphs, edge-list and label ingestion, and the
//! structural checks every random-walk computation relies on.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::BufRead;

use ndarray::{Array1, Array2};

use crate::error::{Error, ParseErrorKind, Result, WalkabilityError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Immutable undirected graph with positive edge weights.
///
/// Edges are stored once with `u < v`; the adjacency matrix is implied
/// symmetric. Node ids are dense in `0..n` and `names[i]` is the original
/// token for node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    edges: Vec<Edge>,
    degree: Vec<f64>,
    volume: f64,
    names: Vec<String>,
    offsets: Vec<usize>,
    adj: Vec<(usize, f64)>,
}

impl Graph {
    /// Builds a graph over `names.len()` nodes. Duplicate edges (in either
    /// orientation) are merged by summing their weights.
    pub fn from_edges<I>(names: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let n = names.len();
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u}, {v}) out of range for {n} nodes")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop on node {u}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::invalid(format!("edge ({u}, {v}) has non-positive weight {w}")));
            }
            *merged.entry((u.min(v), u.max(v))).or_insert(0.0) += w;
        }
        let edges: Vec<Edge> = merged
            .into_iter()
            .map(|((u, v), weight)| Edge { u, v, weight })
            .collect();
        Ok(Self::assemble(names, edges))
    }

    /// Graph on nodes `0..n` named by their index, all weights 1.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::from_edges(index_names(n), edges.iter().map(|&(u, v)| (u, v, 1.0)))
    }

    /// Graph on nodes `0..n` named by their index.
    pub fn weighted(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        Self::from_edges(index_names(n), edges.iter().copied())
    }

    fn assemble(names: Vec<String>, edges: Vec<Edge>) -> Self {
        let n = names.len();
        let mut degree = vec![0.0; n];
        let mut counts = vec![0usize; n];
        for e in &edges {
            degree[e.u] += e.weight;
            degree[e.v] += e.weight;
            counts[e.u] += 1;
            counts[e.v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + counts[i];
        }
        let mut fill = offsets.clone();
        let mut adj = vec![(0usize, 0.0f64); offsets[n]];
        for e in &edges {
            adj[fill[e.u]] = (e.v, e.weight);
            fill[e.u] += 1;
            adj[fill[e.v]] = (e.u, e.weight);
            fill[e.v] += 1;
        }
        for i in 0..n {
            adj[offsets[i]..offsets[i + 1]].sort_by_key(|&(j, _)| j);
        }
        let volume = 2.0 * edges.iter().map(|e| e.weight).sum::<f64>();
        Self { edges, degree, volume, names, offsets, adj }
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    /// Sum of all weighted degrees, i.e. twice the total edge weight.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Neighbors of `i` with edge weights, sorted by neighbor id.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Stationary distribution of the random walk: `degree / volume`.
    pub fn stationary(&self) -> Array1<f64> {
        self.degree.iter().map(|d| d / self.volume).collect()
    }

    pub fn dense_adjacency(&self) -> Array2<f64> {
        let n = self.n();
        let mut a = Array2::zeros((n, n));
        for e in &self.edges {
            a[[e.u, e.v]] = e.weight;
            a[[e.v, e.u]] = e.weight;
        }
        a
    }

    /// Unnormalized Laplacian `D - A`.
    pub fn laplacian(&self) -> Array2<f64> {
        let mut l = -self.dense_adjacency();
        for (i, d) in self.degree.iter().enumerate() {
            l[[i, i]] = *d;
        }
        l
    }

    /// Connected components, each sorted ascending, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for &(y, _) in self.neighbors(x) {
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                        queue.push_back(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Subgraph induced on `keep` (ascending, unique); ids re-densified in
    /// that order and names carried over.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Self {
        let mut remap = vec![usize::MAX; self.n()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let names = keep.iter().map(|&i| self.names[i].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| remap[e.u] != usize::MAX && remap[e.v] != usize::MAX)
            .map(|e| {
                let (u, v) = (remap[e.u], remap[e.v]);
                Edge { u: u.min(v), v: u.max(v), weight: e.weight }
            })
            .collect::<Vec<_>>();
        let mut edges = edges;
        edges.sort_by_key(|e| (e.u, e.v));
        Self::assemble(names, edges)
    }
}

fn index_names(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(idx, line)| match line {
        Err(e) => Some(Err(Error::Io(e))),
        Ok(line) => {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                None
            } else {
                Some(Ok((idx + 1, trimmed.to_string())))
            }
        }
    })
}

/// Parses a whitespace-separated `u v [w]` edge list. Node tokens are
/// arbitrary and get dense ids in order of first appearance.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    let mut intern = |tok: &str| -> usize {
        if let Some(&id) = ids.get(tok) {
            return id;
        }
        let id = names.len();
        ids.insert(tok.to_string(), id);
        names.push(tok.to_string());
        id
    };
    for item in content_lines(reader) {
        let (line, text) = item?;
        let parse_err = |kind| Error::Parse { line, kind };
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != 2 && toks.len() != 3 {
            return Err(parse_err(ParseErrorKind::Malformed(text.clone())));
        }
        let weight = match toks.get(2) {
            None => 1.0,
            Some(tok) => {
                let w: f64 = tok
                    .parse()
                    .map_err(|_| parse_err(ParseErrorKind::Malformed(text.clone())))?;
                if w.is_nan() {
                    return Err(parse_err(ParseErrorKind::Malformed(text.clone())));
                }
                if !(w > 0.0 && w.is_finite()) {
                    return Err(parse_err(ParseErrorKind::NonPositiveWeight(tok.to_string())));
                }
                w
            }
        };
        if toks[0] == toks[1] {
            return Err(parse_err(ParseErrorKind::SelfLoop(toks[0].to_string())));
        }
        let u = intern(toks[0]);
        let v = intern(toks[1]);
        edges.push((u, v, weight));
    }
    Graph::from_edges(names, edges)
}

/// Subgraph on the largest connected component. Among equally large
/// components, the one holding the smallest node id wins.
pub fn largest_connected_component(g: &Graph) -> Result<Graph> {
    if g.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    let comps = g.components();
    let mut best = &comps[0];
    for c in &comps[1..] {
        if c.len() > best.len() {
            best = c;
        }
    }
    if best.len() == g.n() {
        return Ok(g.clone());
    }
    Ok(g.induced_subgraph(best))
}

/// Checks that the random walk on `g` has a unique stationary distribution
/// it converges to: connected, non-bipartite, no zero-degree node.
pub fn validate_walkable(g: &Graph) -> Result<()> {
    let n = g.n();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let comps = g.components();
    if comps.len() > 1 {
        let component_sizes = comps.iter().map(Vec::len).collect();
        return Err(WalkabilityError::Disconnected { component_sizes }.into());
    }
    if let Some(node) = g.degree().iter().position(|&d| d <= 0.0) {
        return Err(WalkabilityError::IsolatedNode { node }.into());
    }
    if let Some(coloring) = two_coloring(g) {
        return Err(WalkabilityError::Bipartite { coloring }.into());
    }
    Ok(())
}

fn two_coloring(g: &Graph) -> Option<Vec<u8>> {
    let n = g.n();
    let mut color = vec![u8::MAX; n];
    for start in 0..n {
        if color[start] != u8::MAX {
            continue;
        }
        color[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &(y, _) in g.neighbors(x) {
                if color[y] == u8::MAX {
                    color[y] = 1 - color[x];
                    queue.push_back(y);
                } else if color[y] == color[x] {
                    return None;
                }
            }
        }
    }
    Some(color)
}

/// Per-node label sets with dense label ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeLabels {
    /// `sets[i]` is sorted and duplicate-free.
    pub sets: Vec<Vec<usize>>,
    /// Original token for each label id.
    pub label_names: Vec<String>,
}

impl NodeLabels {
    pub fn num_labels(&self) -> usize {
        self.label_names.len()
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Builds from raw id sets; `num_labels` must exceed every id.
    pub fn from_sets(sets: Vec<Vec<usize>>, num_labels: usize) -> Result<Self> {
        let mut out = Vec::with_capacity(sets.len());
        for mut s in sets {
            s.sort_unstable();
            s.dedup();
            if let Some(&bad) = s.iter().find(|&&l| l >= num_labels) {
                return Err(Error::invalid(format!("label id {bad} >= {num_labels}")));
            }
            out.push(s);
        }
        let label_names = (0..num_labels).map(|i| i.to_string()).collect();
        Ok(Self { sets: out, label_names })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub graph: Graph,
    pub labels: NodeLabels,
}

/// Reads `node label [label ...]` lines against a known node-name list.
/// Lines for unknown nodes are skipped (they fell outside the retained
/// component); repeated lines for a node accumulate. Label ids are assigned
/// in first-appearance order.
pub fn load_labels<R: BufRead>(reader: R, node_names: &[String]) -> Result<NodeLabels> {
    let index: HashMap<&str, usize> =
        node_names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut label_ids: HashMap<String, usize> = HashMap::new();
    let mut label_names = Vec::new();
    let mut sets = vec![Vec::new(); node_names.len()];
    for item in content_lines(reader) {
        let (_, text) = item?;
        let mut toks = text.split_whitespace();
        let node = toks.next().expect("content lines are non-empty");
        let Some(&i) = index.get(node) else {
            continue;
        };
        for tok in toks {
            let id = *label_ids.entry(tok.to_string()).or_insert_with(|| {
                label_names.push(tok.to_string());
                label_names.len() - 1
            });
            sets[i].push(id);
        }
    }
    for s in &mut sets {
        s.sort_unstable();
        s.dedup();
    }
    Ok(NodeLabels { sets, label_names })
}

impl LabeledDataset {
    pub fn load<G: BufRead, L: BufRead>(edges: G, labels: L) -> Result<Self> {
        let graph = load_edge_list(edges)?;
        let labels = load_labels(labels, graph.names())?;
        Ok(Self { graph, labels })
    }
}
