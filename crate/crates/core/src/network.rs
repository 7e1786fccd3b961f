//! Communication graphs and doubly stochastic mixing matrices.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg;

/// Tolerance on row and column sums of a mixing matrix.
pub const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Tree,
    Ring,
    Complete,
    Star,
}

impl Topology {
    pub const ALL: [Topology; 4] = [
        Topology::Tree,
        Topology::Ring,
        Topology::Complete,
        Topology::Star,
    ];

    pub fn min_nodes(self) -> usize {
        match self {
            Topology::Ring => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Topology::Tree => "tree",
            Topology::Ring => "ring",
            Topology::Complete => "complete",
            Topology::Star => "star",
        };
        f.write_str(s)
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tree" => Ok(Topology::Tree),
            "ring" => Ok(Topology::Ring),
            "complete" => Ok(Topology::Complete),
            "star" => Ok(Topology::Star),
            other => Err(Error::input(format!("unknown topology `{other}`"))),
        }
    }
}

/// Undirected simple graph on nodes `0..n`. Edges are stored as `(i, j)`
/// with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from an edge list, rejecting self-loops and
    /// out-of-range endpoints. Duplicate or reversed pairs collapse.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i == j {
                return Err(Error::input(format!("self-loop at node {i}")));
            }
            if i >= n || j >= n {
                return Err(Error::input(format!("edge ({i}, {j}) out of range for {n} nodes")));
            }
            set.insert((i.min(j), i.max(j)));
        }
        Ok(Self { n, edges: set })
    }

    /// Random tree: node `k` attaches to a uniformly chosen earlier node.
    pub fn random_tree(n: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::input(format!("tree needs n >= 2, got {n}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges = (1..n).map(|k| (rng.gen_range(0..k), k)).collect::<Vec<_>>();
        Self::from_edges(n, edges)
    }

    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::input(format!("ring needs n >= 3, got {n}")));
        }
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn complete(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::input(format!("complete graph needs n >= 2, got {n}")));
        }
        Self::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    /// Star centred on node 0.
    pub fn star(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::input(format!("star needs n >= 2, got {n}")));
        }
        Self::from_edges(n, (1..n).map(|j| (0, j)))
    }

    /// `seed` is only used by [`Topology::Tree`].
    pub fn build(topology: Topology, n: usize, seed: u64) -> Result<Self> {
        match topology {
            Topology::Tree => Self::random_tree(n, seed),
            Topology::Ring => Self::ring(n),
            Topology::Complete => Self::complete(n),
            Topology::Star => Self::star(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| match (a == i, b == i) {
                (true, _) => Some(b),
                (_, true) => Some(a),
                _ => None,
            })
            .collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    /// One `i j` pair per line, 1-indexed.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (i, j) in self.edges() {
            out.push_str(&format!("{} {}\n", i + 1, j + 1));
        }
        out
    }

    /// Parses the edge-list format. Blank lines and `#` comments are skipped.
    /// The node count is the largest index seen unless `n` is given.
    pub fn from_edge_list(text: &str, n: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_node = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let mut next = || -> Result<usize> {
                let tok = parts
                    .next()
                    .ok_or_else(|| Error::parse(format!("line {}: expected `i j`", lineno + 1)))?;
                let v: usize = tok
                    .parse()
                    .map_err(|_| Error::parse(format!("line {}: bad node `{tok}`", lineno + 1)))?;
                if v == 0 {
                    return Err(Error::parse(format!("line {}: nodes are 1-indexed", lineno + 1)));
                }
                Ok(v - 1)
            };
            let (i, j) = (next()?, next()?);
            if parts.next().is_some() {
                return Err(Error::parse(format!("line {}: trailing tokens", lineno + 1)));
            }
            max_node = max_node.max(i + 1).max(j + 1);
            edges.push((i, j));
        }
        let n = n.unwrap_or(max_node);
        if n == 0 {
            return Err(Error::parse("empty edge list"));
        }
        Self::from_edges(n, edges)
    }
}

/// A doubly stochastic matrix together with its disagreement contraction
/// factor `sigma`, the top singular value of `W - (1/n) 1 1^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    w: DMatrix<f64>,
    sigma: f64,
}

impl MixingMatrix {
    /// Metropolis weights: `w_ij = 1 / (1 + max(deg_i, deg_j))` on edges and
    /// the remaining mass on the diagonal. Symmetric with positive diagonal.
    pub fn metropolis(g: &Graph) -> Result<Self> {
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        let n = g.n();
        let deg = g.degrees();
        let mut w = DMatrix::zeros(n, n);
        for (i, j) in g.edges() {
            let v = 1.0 / (1.0 + deg[i].max(deg[j]) as f64);
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| w[(i, j)]).sum();
            w[(i, i)] = 1.0 - off;
        }
        let sigma = second_largest_singular_value(&w)?;
        Ok(Self { w, sigma })
    }

    /// Wraps an arbitrary nonnegative doubly stochastic matrix.
    pub fn from_matrix(w: DMatrix<f64>) -> Result<Self> {
        if w.nrows() != w.ncols() || w.nrows() == 0 {
            return Err(Error::input("mixing matrix must be square and non-empty"));
        }
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::input("mixing matrix entries must be finite and nonnegative"));
        }
        let (rows, cols) = stochastic_defects(&w);
        let tol = STOCHASTIC_TOL * w.nrows() as f64;
        if rows > tol || cols > tol {
            return Err(Error::input(format!(
                "matrix is not doubly stochastic (row defect {rows:e}, column defect {cols:e})"
            )));
        }
        let sigma = second_largest_singular_value(&w)?;
        Ok(Self { w, sigma })
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Largest absolute deviation of any row sum and any column sum from 1.
    pub fn stochastic_defects(&self) -> (f64, f64) {
        stochastic_defects(&self.w)
    }

    /// True if the positive off-diagonal entries are exactly the graph's edges.
    pub fn matches_graph(&self, g: &Graph) -> bool {
        let n = self.n();
        n == g.n()
            && (0..n).all(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .all(|j| (self.w[(i, j)] > 0.0) == g.has_edge(i, j))
            })
    }

    /// Returns `(||W x - 1 xbar||, sigma ||x - 1 xbar||)`; the first never
    /// exceeds the second.
    pub fn average_property(&self, x: &[f64]) -> Result<(f64, f64)> {
        check_len(self.n(), x.len())?;
        let v = DVector::from_column_slice(x);
        let mean = v.mean();
        let mixed = &self.w * &v;
        let lhs = mixed.map(|e| e - mean).norm();
        let rhs = self.sigma * v.map(|e| e - mean).norm();
        Ok((lhs, rhs))
    }

    /// Dense row-major CSV with shortest round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.w.row_iter() {
            let line: Vec<String> = row.iter().map(|v| linalg::fmt_f64(*v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|_| {
                        Error::parse(format!("line {}: bad number `{}`", lineno + 1, t.trim()))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let n = rows.len();
        if n == 0 {
            return Err(Error::parse("empty matrix"));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Dimension {
                expected: n,
                got: r.len(),
            });
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }
}

fn stochastic_defects(w: &DMatrix<f64>) -> (f64, f64) {
    let rows = w
        .row_iter()
        .map(|r| (r.sum() - 1.0).abs())
        .fold(0.0, f64::max);
    let cols = w
        .column_iter()
        .map(|c| (c.sum() - 1.0).abs())
        .fold(0.0, f64::max);
    (rows, cols)
}

/// Top singular value of `W - (1/n) 1 1^T`.
///
/// For a doubly stochastic `W` this is the second largest singular value of
/// `W` and the contraction factor of disagreement under one mixing round.
pub fn second_largest_singular_value(w: &DMatrix<f64>) -> Result<f64> {
    if w.nrows() != w.ncols() {
        return Err(Error::input(format!(
            "expected a square matrix, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    let sigma = linalg::spectral_norm(&linalg::deflate(w));
    // rounding noise around an exact projector
    Ok(if sigma < 1e-14 { 0.0 } else { sigma })
}
