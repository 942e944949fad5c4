//! Resource cluster graphs: chain, ring, second-nearest-neighbor and custom
//! topologies with per-edge coupling strengths.
//!
//! Mode indices are 1-based throughout this module, matching the edge-list
//! text format `i j xi` used by the CLI.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One undirected weighted edge, stored with `i < j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub strength: f64,
}

/// A weighted undirected graph over `n_modes` cluster modes.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterGraph {
    n_modes: usize,
    edges: Vec<Edge>,
}

impl ClusterGraph {
    /// Open chain: edges `(i, i+1)` at unit strength.
    pub fn chain(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::invalid_argument("n_modes must be >= 1"));
        }
        let edges = (1..n_modes)
            .map(|i| Edge { i, j: i + 1, strength: 1.0 })
            .collect();
        Ok(Self { n_modes, edges })
    }

    /// Chain plus a closing `(1, N)` edge.
    pub fn ring(n_modes: usize) -> Result<Self> {
        if n_modes < 3 {
            return Err(Error::invalid_argument(
                "ring needs n_modes >= 3 (smaller rings duplicate a chain edge)",
            ));
        }
        let mut g = Self::chain(n_modes)?;
        g.edges.push(Edge { i: 1, j: n_modes, strength: 1.0 });
        Ok(g)
    }

    /// Ring at unit strength plus all second-nearest-neighbor edges
    /// `(i, i+2)`, cyclically closed by `(1, N-1)` and `(2, N)`, at
    /// `second_strength`.
    pub fn two_nn(n_modes: usize, second_strength: f64) -> Result<Self> {
        if n_modes < 5 {
            return Err(Error::invalid_argument(
                "2NN topology needs n_modes >= 5 so wrap edges never collide with ring edges",
            ));
        }
        if !second_strength.is_finite() {
            return Err(Error::invalid_argument("second-neighbor strength must be finite"));
        }
        let mut g = Self::ring(n_modes)?;
        for i in 1..=(n_modes - 2) {
            g.edges.push(Edge { i, j: i + 2, strength: second_strength });
        }
        g.edges.push(Edge { i: 1, j: n_modes - 1, strength: second_strength });
        g.edges.push(Edge { i: 2, j: n_modes, strength: second_strength });
        g.edges.sort_by_key(|e| (e.i, e.j));
        Ok(g)
    }

    /// Arbitrary validated edge list; indices 1-based, `i != j`, no duplicates.
    pub fn custom(n_modes: usize, edge_list: &[(usize, usize, f64)]) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::invalid_argument("n_modes must be >= 1"));
        }
        let mut edges: Vec<Edge> = Vec::with_capacity(edge_list.len());
        for &(a, b, strength) in edge_list {
            if a == b {
                return Err(Error::invalid_argument(format!("self-loop on mode {a}")));
            }
            if a == 0 || b == 0 || a > n_modes || b > n_modes {
                return Err(Error::invalid_argument(format!(
                    "edge ({a}, {b}) out of range for {n_modes} modes (indices are 1-based)"
                )));
            }
            if !strength.is_finite() {
                return Err(Error::invalid_argument(format!(
                    "edge ({a}, {b}) has non-finite strength"
                )));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if edges.iter().any(|e| e.i == i && e.j == j) {
                return Err(Error::invalid_argument(format!("duplicate edge ({i}, {j})")));
            }
            edges.push(Edge { i, j, strength });
        }
        edges.sort_by_key(|e| (e.i, e.j));
        Ok(Self { n_modes, edges })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Plain text edge list, one `i j xi` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            writeln!(out, "{} {} {}", e.i, e.j, e.strength).expect("write to string");
        }
        out
    }

    /// Parses the `i j xi` edge-list format. Blank lines and `#` comments are
    /// ignored; a missing strength defaults to 1.
    pub fn parse_edge_list(n_modes: usize, text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 && fields.len() != 3 {
                return Err(Error::parse(format!(
                    "edge list line {}: expected `i j [xi]`, got {raw:?}",
                    lineno + 1
                )));
            }
            let i: usize = fields[0].parse().map_err(|_| {
                Error::parse(format!("edge list line {}: bad mode index {:?}", lineno + 1, fields[0]))
            })?;
            let j: usize = fields[1].parse().map_err(|_| {
                Error::parse(format!("edge list line {}: bad mode index {:?}", lineno + 1, fields[1]))
            })?;
            let strength: f64 = if fields.len() == 3 {
                fields[2].parse().map_err(|_| {
                    Error::parse(format!("edge list line {}: bad strength {:?}", lineno + 1, fields[2]))
                })?
            } else {
                1.0
            };
            edges.push((i, j, strength));
        }
        Self::custom(n_modes, &edges)
    }
}
