//! Simple undirected graphs underlying CV graph states.
//!
//! Vertices are 1-based at the public surface (edge lists, text files) and
//! 0-based inside the adjacency matrix. Adjacency entries are stored as `f64`
//! so that matrix powers feed directly into the covariance algebra; for 0/1
//! matrices of the sizes used here every power is an exact integer.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a graph was constructed. Carried into reports as a descriptor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphKind {
    Star { n: usize },
    Multipartite { l: usize, m: usize },
    Rectangular { m: usize },
    Empty { n: usize },
    Edges { n: usize },
    Random { n: usize },
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Star { n } => write!(f, "star({n})"),
            GraphKind::Multipartite { l, m } => write!(f, "multipartite({l},{m})"),
            GraphKind::Rectangular { m } => write!(f, "rectangular({m})"),
            GraphKind::Empty { n } => write!(f, "empty({n})"),
            GraphKind::Edges { n } => write!(f, "edges({n})"),
            GraphKind::Random { n } => write!(f, "random({n})"),
        }
    }
}

/// Undirected, unweighted graph with a symmetric 0/1 adjacency matrix and
/// zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: DMatrix<f64>,
    kind: GraphKind,
}

impl Graph {
    fn from_adjacency(adjacency: DMatrix<f64>, kind: GraphKind) -> Self {
        debug_assert!(adjacency.is_square());
        Graph { adjacency, kind }
    }

    /// Vertex count.
    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn kind(&self) -> &GraphKind {
        &self.kind
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[(u, v)] != 0.0
    }

    pub fn edge_count(&self) -> usize {
        let n = self.n();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.has_edge(i, j))
            .count()
    }

    /// Edges as 1-based pairs `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.has_edge(i, j) {
                    out.push((i + 1, j + 1));
                }
            }
        }
        out
    }

    /// Degree of the 0-based vertex `v`.
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency.row(v).iter().filter(|&&a| a != 0.0).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|v| self.degree(v)).collect()
    }

    /// True if vertex 1 is joined to every other vertex and no other edges
    /// exist.
    pub fn is_star_centered_on_first(&self) -> bool {
        let n = self.n();
        if n < 2 {
            return false;
        }
        (0..n).all(|i| {
            (0..n).all(|j| {
                let expected = i != j && (i == 0 || j == 0);
                self.has_edge(i, j) == expected
            })
        })
    }

    /// `Tr A²`, equal to the degree sum.
    pub fn trace_a2(&self) -> f64 {
        trace_power(self, 2)
    }

    /// `Tr A⁴`.
    pub fn trace_a4(&self) -> f64 {
        trace_power(self, 4)
    }

    /// `Σ_ij [A²]_ij`, the total number of length-2 walks.
    pub fn sum_a2_entries(&self) -> f64 {
        (&self.adjacency * &self.adjacency).sum()
    }
}

/// Builds a graph from 1-based vertex pairs. Duplicate pairs collapse.
pub fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidGraph("vertex count must be positive".into()));
    }
    let mut adjacency = DMatrix::zeros(n, n);
    for &(i, j) in edges {
        for index in [i, j] {
            if index == 0 || index > n {
                return Err(Error::VertexOutOfRange { index, n });
            }
        }
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        adjacency[(i - 1, j - 1)] = 1.0;
        adjacency[(j - 1, i - 1)] = 1.0;
    }
    Ok(Graph::from_adjacency(adjacency, GraphKind::Edges { n }))
}

/// Star on `n` vertices with vertex 1 as the centre.
pub fn star_graph(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidGraph(format!(
            "star graph needs n >= 2, got {n}"
        )));
    }
    let adjacency = DMatrix::from_fn(n, n, |i, j| {
        if i != j && (i == 0 || j == 0) {
            1.0
        } else {
            0.0
        }
    });
    Ok(Graph::from_adjacency(adjacency, GraphKind::Star { n }))
}

/// Complete `l`-partite graph with `m` vertices per part. Vertex `v`
/// (0-based) belongs to part `v / m`.
pub fn multipartite_graph(l: usize, m: usize) -> Result<Graph> {
    if l < 2 {
        return Err(Error::InvalidGraph(format!(
            "multipartite graph needs l >= 2, got {l}"
        )));
    }
    if m < 1 {
        return Err(Error::InvalidGraph(
            "multipartite graph needs m >= 1".into(),
        ));
    }
    let n = l * m;
    let adjacency = DMatrix::from_fn(n, n, |i, j| if i / m != j / m { 1.0 } else { 0.0 });
    Ok(Graph::from_adjacency(
        adjacency,
        GraphKind::Multipartite { l, m },
    ))
}

/// 4×m belt of squares: band adjacency with offsets ±1 and ±4 on `n = 4m`
/// vertices. Offsets falling outside `1..=n` are dropped (no wraparound).
pub fn rectangular_graph(m: usize) -> Result<Graph> {
    if m < 2 {
        return Err(Error::InvalidGraph(format!(
            "rectangular graph needs m >= 2, got {m}"
        )));
    }
    let n = 4 * m;
    let adjacency = DMatrix::from_fn(n, n, |i, j| {
        let d = i.abs_diff(j);
        if d == 1 || d == 4 {
            1.0
        } else {
            0.0
        }
    });
    Ok(Graph::from_adjacency(
        adjacency,
        GraphKind::Rectangular { m },
    ))
}

/// Edgeless graph; the probe is then a product of squeezed vacua.
pub fn empty_graph(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidGraph("vertex count must be positive".into()));
    }
    Ok(Graph::from_adjacency(
        DMatrix::zeros(n, n),
        GraphKind::Empty { n },
    ))
}

/// Erdős–Rényi graph: each of the `n(n-1)/2` edges is present independently
/// with probability `p`.
pub fn random_graph<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidGraph("vertex count must be positive".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidGraph(format!(
            "edge probability {p} not in [0, 1]"
        )));
    }
    let mut adjacency = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                adjacency[(i, j)] = 1.0;
                adjacency[(j, i)] = 1.0;
            }
        }
    }
    Ok(Graph::from_adjacency(adjacency, GraphKind::Random { n }))
}

/// `Tr(A^k)` by repeated multiplication. `k = 0` gives `n`.
pub fn trace_power(g: &Graph, k: u32) -> f64 {
    let a = g.adjacency();
    match k {
        0 => g.n() as f64,
        1 => a.trace(),
        _ => {
            let mut power = a.clone();
            for _ in 1..k {
                power = &power * a;
            }
            power.trace()
        }
    }
}

/// `Tr A⁴ / (Tr A²)²`, the phase-sensing figure of merit of a graph.
pub fn chi_phase(g: &Graph) -> Result<f64> {
    let t2 = g.trace_a2();
    if t2 == 0.0 {
        return Err(Error::EdgelessGraph("chi_p"));
    }
    Ok(g.trace_a4() / (t2 * t2))
}

/// `Σ_ij [A²]_ij / Tr A²`, the displacement-sensing figure of merit.
pub fn chi_disp(g: &Graph) -> Result<f64> {
    let t2 = g.trace_a2();
    if t2 == 0.0 {
        return Err(Error::EdgelessGraph("chi_d"));
    }
    Ok(g.sum_a2_entries() / t2)
}

/// Parses the edge-list text format: first non-comment line is `n`, every
/// following line is `i j` (1-based). Lines starting with `#` and blank lines
/// are skipped.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse = |tok: &str| {
            tok.parse::<usize>().map_err(|e| Error::Parse {
                line: lineno + 1,
                message: format!("{tok:?}: {e}"),
            })
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match (n, tokens.as_slice()) {
            (None, [count]) => n = Some(parse(count)?),
            (None, _) => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: "expected the vertex count on its own line".into(),
                })
            }
            (Some(_), [i, j]) => edges.push((parse(i)?, parse(j)?)),
            (Some(_), _) => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected `i j`, got {line:?}"),
                })
            }
        }
    }
    let n = n.ok_or(Error::Parse {
        line: 0,
        message: "missing vertex count".into(),
    })?;
    graph_from_edges(n, &edges)
}

pub fn read_edge_list(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    parse_edge_list(&text)
}
