//! Edge curvatures of unweighted networks: Ollivier-Ricci (optimal
//! transport), Forman-Ricci (combinatorial), Menger-Ricci (triangles) and
//! Haantjes-Ricci (short detour paths), plus network averages over time.
//!
//! Every edge has length 1 and every node weight 1; edge weights of the
//! source network never enter these formulas.

mod series;
mod transport;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{all_hop_distances, hop_distances, Graph};

pub use series::{curvature_series, read_series_csv, write_series_csv, CurvatureSeries};
pub use transport::{wasserstein_w1, NodeMeasure};

/// Menger curvature of a unit equilateral triangle under the Heron-over-product
/// form `sqrt(p(p-a)(p-b)(p-c)) / (a b c)`, i.e. `sqrt(3) / 4`.
pub const UNIT_TRIANGLE_MENGER: f64 = 0.433_012_701_892_219_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureKind {
    Or,
    Fr,
    Mr,
    Hr,
}

impl CurvatureKind {
    /// CSV column order.
    pub const ALL: [CurvatureKind; 4] = [
        CurvatureKind::Or,
        CurvatureKind::Fr,
        CurvatureKind::Mr,
        CurvatureKind::Hr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CurvatureKind::Or => "or",
            CurvatureKind::Fr => "fr",
            CurvatureKind::Mr => "mr",
            CurvatureKind::Hr => "hr",
        }
    }
}

impl fmt::Display for CurvatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CurvatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "or" => Ok(CurvatureKind::Or),
            "fr" => Ok(CurvatureKind::Fr),
            "mr" => Ok(CurvatureKind::Mr),
            "hr" => Ok(CurvatureKind::Hr),
            other => Err(Error::Invalid(format!("unknown curvature kind `{other}`"))),
        }
    }
}

/// How a detour path contributes to Haantjes-Ricci curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HaantjesMode {
    /// `sqrt((l - d) / d^3)` per path.
    #[default]
    Sqrt,
    /// `(l - d) / d^3` per path, for sensitivity checks.
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureOptions {
    /// Longest detour (in edges) considered for triangles and Haantjes paths.
    pub max_path_len: usize,
    pub haantjes: HaantjesMode,
}

impl Default for CurvatureOptions {
    fn default() -> Self {
        Self {
            max_path_len: 4,
            haantjes: HaantjesMode::Sqrt,
        }
    }
}

impl CurvatureOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_path_len < 2 {
            return Err(Error::Invalid(format!(
                "max path length {} must be at least 2",
                self.max_path_len
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCurvature {
    pub edge: (usize, usize),
    pub or: f64,
    pub fr: f64,
    pub mr: f64,
    pub hr: f64,
}

/// Network means of the four edge curvatures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureAverages {
    pub or: f64,
    pub fr: f64,
    pub mr: f64,
    pub hr: f64,
}

impl CurvatureAverages {
    pub fn get(&self, kind: CurvatureKind) -> f64 {
        match kind {
            CurvatureKind::Or => self.or,
            CurvatureKind::Fr => self.fr,
            CurvatureKind::Mr => self.mr,
            CurvatureKind::Hr => self.hr,
        }
    }
}

/// Ollivier-Ricci curvature `1 - W1(m_u, m_v)` with uniform neighbour measures.
pub fn or_curvature(g: &Graph, u: usize, v: usize) -> Result<f64> {
    g.check_edge(u, v)?;
    let mu = NodeMeasure::uniform_neighbors(g, u)?;
    let mv = NodeMeasure::uniform_neighbors(g, v)?;
    // Ground distances are needed from every node of m_u's support.
    let rows: Vec<(usize, Vec<usize>)> = mu
        .support()
        .iter()
        .chain(mv.support())
        .map(|&x| (x, hop_distances(g, x)))
        .collect();
    let dist = |x: usize, y: usize| {
        rows.iter()
            .find(|(s, _)| *s == x)
            .map(|(_, d)| d[y])
            .expect("row for every support node")
    };
    Ok(1.0 - wasserstein_w1(&mu, &mv, dist))
}

fn or_with_distances(g: &Graph, u: usize, v: usize, dist: &[Vec<usize>]) -> f64 {
    let mu = NodeMeasure::uniform_neighbors(g, u).expect("edge endpoint has a neighbour");
    let mv = NodeMeasure::uniform_neighbors(g, v).expect("edge endpoint has a neighbour");
    1.0 - wasserstein_w1(&mu, &mv, |x, y| dist[x][y])
}

/// Forman-Ricci curvature with unit node and edge weights: `4 - deg(u) - deg(v)`.
pub fn fr_curvature(g: &Graph, u: usize, v: usize) -> Result<f64> {
    g.check_edge(u, v)?;
    Ok(4.0 - g.degree(u) as f64 - g.degree(v) as f64)
}

/// Third vertices `w` of the triangles `(u, v, w)` on edge `(u, v)`.
pub fn enumerate_triangles(g: &Graph, u: usize, v: usize) -> Result<Vec<usize>> {
    g.check_edge(u, v)?;
    Ok(common_neighbors(g, u, v))
}

fn common_neighbors(g: &Graph, u: usize, v: usize) -> Vec<usize> {
    let (a, b) = (g.neighbors(u), g.neighbors(v));
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Heron area over the product of the sides.
pub fn menger_triangle(a: f64, b: f64, c: f64) -> f64 {
    let p = (a + b + c) / 2.0;
    let heron = p * (p - a) * (p - b) * (p - c);
    heron.max(0.0).sqrt() / (a * b * c)
}

/// Menger-Ricci curvature: sum of triangle curvatures over triangles on the edge.
pub fn mr_curvature(g: &Graph, u: usize, v: usize) -> Result<f64> {
    let triangles = enumerate_triangles(g, u, v)?;
    Ok(triangles.len() as f64 * menger_triangle(1.0, 1.0, 1.0))
}

/// Simple `u`-`v` paths of 2 to `max_len` edges, each listed once from `u` to `v`.
/// The edge itself is never part of such a path.
pub fn enumerate_paths(g: &Graph, u: usize, v: usize, max_len: usize) -> Result<Vec<Vec<usize>>> {
    g.check_edge(u, v)?;
    let mut out = Vec::new();
    let mut path = vec![u];
    let mut on_path = vec![false; g.n_nodes()];
    on_path[u] = true;
    collect_paths(g, v, max_len, &mut path, &mut on_path, &mut out);
    Ok(out)
}

fn collect_paths(
    g: &Graph,
    target: usize,
    max_len: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) {
    let x = *path.last().expect("path starts at u");
    let len = path.len() - 1;
    for &y in g.neighbors(x) {
        if on_path[y] {
            continue;
        }
        if y == target {
            if len + 1 >= 2 {
                let mut p = path.clone();
                p.push(y);
                out.push(p);
            }
            continue;
        }
        if len + 2 <= max_len {
            path.push(y);
            on_path[y] = true;
            collect_paths(g, target, max_len, path, on_path, out);
            on_path[y] = false;
            path.pop();
        }
    }
}

/// Number of simple `u`-`v` detours by length: `counts[l]` paths of `l` edges.
fn count_paths(g: &Graph, u: usize, v: usize, max_len: usize) -> Vec<u64> {
    let mut counts = vec![0_u64; max_len + 1];
    let mut on_path = vec![false; g.n_nodes()];
    on_path[u] = true;
    count_from(g, u, v, 0, max_len, &mut on_path, &mut counts);
    counts
}

fn count_from(
    g: &Graph,
    x: usize,
    target: usize,
    len: usize,
    max_len: usize,
    on_path: &mut [bool],
    counts: &mut [u64],
) {
    for &y in g.neighbors(x) {
        if on_path[y] {
            continue;
        }
        if y == target {
            if len + 1 >= 2 {
                counts[len + 1] += 1;
            }
            continue;
        }
        if len + 2 <= max_len {
            on_path[y] = true;
            count_from(g, y, target, len + 1, max_len, on_path, counts);
            on_path[y] = false;
        }
    }
}

fn haantjes_term(path_len: usize, mode: HaantjesMode) -> f64 {
    // chord d(u, v) = 1 on an edge
    let excess = path_len as f64 - 1.0;
    match mode {
        HaantjesMode::Sqrt => excess.sqrt(),
        HaantjesMode::Squared => excess,
    }
}

/// Haantjes-Ricci curvature: sum over detour paths of length `l <= max_len`
/// of `sqrt(l - 1)` (or `l - 1` in [`HaantjesMode::Squared`]).
pub fn hr_curvature(g: &Graph, u: usize, v: usize, opts: &CurvatureOptions) -> Result<f64> {
    g.check_edge(u, v)?;
    Ok(hr_from_counts(&count_paths(g, u, v, opts.max_path_len), opts.haantjes))
}

fn hr_from_counts(counts: &[u64], mode: HaantjesMode) -> f64 {
    counts
        .iter()
        .enumerate()
        .skip(2)
        .map(|(l, &c)| c as f64 * haantjes_term(l, mode))
        .sum()
}

/// All four curvatures for every edge, in `g.edges()` order.
pub fn edge_curvatures(g: &Graph, opts: &CurvatureOptions) -> Result<Vec<EdgeCurvature>> {
    opts.validate()?;
    let dist = all_hop_distances(g);
    let out = g
        .edges()
        .par_iter()
        .map(|&(u, v)| {
            let or = or_with_distances(g, u, v, &dist);
            let fr = 4.0 - g.degree(u) as f64 - g.degree(v) as f64;
            let mr = common_neighbors(g, u, v).len() as f64 * UNIT_TRIANGLE_MENGER;
            let hr = hr_from_counts(&count_paths(g, u, v, opts.max_path_len), opts.haantjes);
            EdgeCurvature {
                edge: (u, v),
                or,
                fr,
                mr,
                hr,
            }
        })
        .collect();
    Ok(out)
}

/// Arithmetic mean over edges of each curvature.
pub fn average_curvatures(g: &Graph, opts: &CurvatureOptions) -> Result<CurvatureAverages> {
    if g.n_edges() == 0 {
        return Err(Error::EmptyEdgeSet);
    }
    let per_edge = edge_curvatures(g, opts)?;
    let m = per_edge.len() as f64;
    let sum = |f: fn(&EdgeCurvature) -> f64| per_edge.iter().map(f).sum::<f64>() / m;
    Ok(CurvatureAverages {
        or: sum(|e| e.or),
        fr: sum(|e| e.fr),
        mr: sum(|e| e.mr),
        hr: sum(|e| e.hr),
    })
}
