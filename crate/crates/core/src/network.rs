//! Correlation, distance, minimum spanning tree and threshold networks for
//! one window of returns.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Tolerance for the symmetric / unit-diagonal / range checks on hand-built matrices.
const MATRIX_TOL: f64 = 1e-12;

/// Symmetric Pearson correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix(Array2<f64>);

impl CorrMatrix {
    /// Validates a hand-built matrix. Entries are clamped into `[-1, 1]`
    /// after the tolerance check.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let n = check_square(&values)?;
        let mut values = values;
        for i in 0..n {
            if (values[[i, i]] - 1.0).abs() > MATRIX_TOL {
                return Err(Error::Invalid(format!("diagonal entry {i} is not 1")));
            }
            values[[i, i]] = 1.0;
            for j in 0..i {
                let c = values[[i, j]];
                if !c.is_finite() || (c - values[[j, i]]).abs() > MATRIX_TOL {
                    return Err(Error::Invalid(format!("entry ({i}, {j}) is not symmetric")));
                }
                if c.abs() > 1.0 + MATRIX_TOL {
                    return Err(Error::Invalid(format!("entry ({i}, {j}) = {c} outside [-1, 1]")));
                }
                let c = c.clamp(-1.0, 1.0);
                values[[i, j]] = c;
                values[[j, i]] = c;
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[[i, j]]
    }
}

/// `d_ij = sqrt(2 (1 - c_ij))`, symmetric with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistMatrix(Array2<f64>);

impl DistMatrix {
    /// Accepts any symmetric, zero-diagonal matrix with entries in `[0, 2]`.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let n = check_square(&values)?;
        for i in 0..n {
            if values[[i, i]] != 0.0 {
                return Err(Error::Invalid(format!("diagonal entry {i} is not 0")));
            }
            for j in 0..i {
                let d = values[[i, j]];
                if !d.is_finite() || d != values[[j, i]] {
                    return Err(Error::Invalid(format!("entry ({i}, {j}) is not symmetric")));
                }
                if !(0.0..=2.0 + MATRIX_TOL).contains(&d) {
                    return Err(Error::Invalid(format!("entry ({i}, {j}) = {d} outside [0, 2]")));
                }
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[[i, j]]
    }
}

fn check_square(values: &Array2<f64>) -> Result<usize> {
    let (r, c) = values.dim();
    if r != c {
        return Err(Error::Invalid(format!("matrix is {r}x{c}, expected square")));
    }
    Ok(r)
}

/// Pearson correlation of the columns of a `tau x N` return block.
///
/// Covariance and standard deviations share the sample normalisation
/// (`tau - 1`), so the ratio is exactly the textbook coefficient.
pub fn pearson_matrix(window: ArrayView2<'_, f64>, tickers: &[String]) -> Result<CorrMatrix> {
    let (tau, n) = window.dim();
    if tau < crate::market_data::MIN_WINDOW {
        return Err(Error::TooShort {
            what: "rows in a correlation window",
            needed: crate::market_data::MIN_WINDOW,
            got: tau,
        });
    }
    if tickers.len() != n {
        return Err(Error::Invalid(format!(
            "{} tickers for a block with {n} columns",
            tickers.len()
        )));
    }
    let norm = (tau - 1) as f64;
    let mut centered = Array2::<f64>::zeros((tau, n));
    let mut sd = vec![0.0; n];
    for k in 0..n {
        let col = window.column(k);
        let mean = col.sum() / tau as f64;
        let scale = col.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let mut ss = 0.0;
        for (t, &x) in col.iter().enumerate() {
            let dx = x - mean;
            centered[[t, k]] = dx;
            ss += dx * dx;
        }
        let s = (ss / norm).sqrt();
        if !s.is_finite() || s <= 1e-14 * scale.max(f64::MIN_POSITIVE) || ss == 0.0 {
            return Err(Error::ZeroVariance {
                ticker: tickers[k].clone(),
            });
        }
        sd[k] = s;
    }
    let mut c = Array2::<f64>::eye(n);
    for i in 0..n {
        for j in 0..i {
            let cov = centered
                .column(i)
                .iter()
                .zip(centered.column(j).iter())
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / norm;
            let r = (cov / (sd[i] * sd[j])).clamp(-1.0, 1.0);
            c[[i, j]] = r;
            c[[j, i]] = r;
        }
    }
    Ok(CorrMatrix(c))
}

pub fn distance_matrix(c: &CorrMatrix) -> DistMatrix {
    let n = c.n();
    let mut d = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..i {
            let v = (2.0 * (1.0 - c.get(i, j))).max(0.0).sqrt();
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    DistMatrix(d)
}

/// Dense Prim's algorithm rooted at node 0.
///
/// Among crossing edges of equal weight the one with the smallest
/// `(min node, max node)` pair is taken, so the result is fully determined
/// by the matrix. Returned edges are `(min, max)` pairs in sorted order.
pub fn mst_prim(d: &DistMatrix) -> Vec<(usize, usize)> {
    let n = d.n();
    if n < 2 {
        return Vec::new();
    }
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut in_tree = vec![false; n];
    // Best crossing edge into each outside node: (weight, tree endpoint).
    let mut best: Vec<(f64, usize)> = vec![(f64::INFINITY, usize::MAX); n];
    in_tree[0] = true;
    for v in 1..n {
        best[v] = (d.get(0, v), 0);
    }
    let mut edges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut pick: Option<usize> = None;
        for v in (0..n).filter(|&v| !in_tree[v]) {
            pick = match pick {
                None => Some(v),
                Some(p) => {
                    let (wp, up) = best[p];
                    let (wv, uv) = best[v];
                    if wv < wp || (wv == wp && key(v, uv) < key(p, up)) {
                        Some(v)
                    } else {
                        Some(p)
                    }
                }
            };
        }
        let v = pick.expect("at least one node outside the tree");
        in_tree[v] = true;
        edges.push(key(v, best[v].1));
        for w in (0..n).filter(|&w| !in_tree[w]) {
            let dw = d.get(v, w);
            let (cur, from) = best[w];
            if dw < cur || (dw == cur && key(v, w) < key(w, from)) {
                best[w] = (dw, v);
            }
        }
    }
    edges.sort_unstable();
    edges
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeOrigin {
    Mst,
    Threshold,
    Both,
}

impl EdgeOrigin {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeOrigin::Mst => "mst",
            EdgeOrigin::Threshold => "threshold",
            EdgeOrigin::Both => "both",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "mst" => Some(EdgeOrigin::Mst),
            "threshold" => Some(EdgeOrigin::Threshold),
            "both" => Some(EdgeOrigin::Both),
            _ => None,
        }
    }
}

/// MST of the distance matrix plus every pair with `c_ij > theta`.
#[derive(Debug, Clone)]
pub struct ThresholdNetwork {
    graph: Graph,
    origins: Vec<EdgeOrigin>,
    theta: f64,
    corr: CorrMatrix,
    dist: DistMatrix,
}

impl ThresholdNetwork {
    /// The unweighted graph the curvatures are computed on.
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Origin tag of each edge, aligned with `graph().edges()`.
    pub fn origins(&self) -> &[EdgeOrigin] {
        &self.origins
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn corr(&self) -> &CorrMatrix {
        &self.corr
    }

    pub fn dist(&self) -> &DistMatrix {
        &self.dist
    }

    pub fn n_nodes(&self) -> usize {
        self.graph.n_nodes()
    }

    /// Edge-list dump: one JSON header line, then `i j c_ij d_ij origin` per edge.
    pub fn write_dump<W: Write>(&self, tickers: &[String], mut out: W) -> Result<()> {
        let header = DumpHeader {
            tickers: tickers.to_vec(),
            theta: self.theta,
            n_nodes: self.n_nodes(),
            n_edges: self.graph.n_edges(),
        };
        let line = serde_json::to_string(&header).map_err(|e| Error::Invalid(e.to_string()))?;
        writeln!(out, "{line}")?;
        for (&(i, j), origin) in self.graph.edges().iter().zip(&self.origins) {
            writeln!(
                out,
                "{i} {j} {} {} {}",
                self.corr.get(i, j),
                self.dist.get(i, j),
                origin.as_str()
            )?;
        }
        Ok(())
    }
}

impl AsRef<Graph> for ThresholdNetwork {
    fn as_ref(&self) -> &Graph {
        &self.graph
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub tickers: Vec<String>,
    pub theta: f64,
    pub n_nodes: usize,
    pub n_edges: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DumpEdge {
    pub i: usize,
    pub j: usize,
    pub corr: f64,
    pub dist: f64,
    pub origin: EdgeOrigin,
}

/// Parses the format produced by [`ThresholdNetwork::write_dump`].
pub fn read_dump<R: BufRead>(input: R) -> Result<(DumpHeader, Vec<DumpEdge>)> {
    let mut lines = input.lines();
    let first = lines.next().ok_or(Error::EmptyInput)??;
    let header: DumpHeader = serde_json::from_str(&first).map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let mut edges = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: &str| Error::Parse {
            line: idx + 2,
            message: m.to_string(),
        };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 {
            return Err(bad("expected `i j c d origin`"));
        }
        edges.push(DumpEdge {
            i: f[0].parse().map_err(|_| bad("bad node index"))?,
            j: f[1].parse().map_err(|_| bad("bad node index"))?,
            corr: f[2].parse().map_err(|_| bad("bad correlation"))?,
            dist: f[3].parse().map_err(|_| bad("bad distance"))?,
            origin: EdgeOrigin::parse(f[4]).ok_or_else(|| bad("bad origin tag"))?,
        });
    }
    Ok((header, edges))
}

pub fn threshold_network(c: &CorrMatrix, d: &DistMatrix, theta: f64) -> Result<ThresholdNetwork> {
    if c.n() != d.n() {
        return Err(Error::Invalid(format!(
            "correlation matrix is {0}x{0} but distance matrix is {1}x{1}",
            c.n(),
            d.n()
        )));
    }
    if !(-1.0..=1.0).contains(&theta) {
        return Err(Error::Invalid(format!("theta {theta} outside [-1, 1]")));
    }
    let n = c.n();
    let mut tagged: BTreeMap<(usize, usize), EdgeOrigin> = mst_prim(d)
        .into_iter()
        .map(|e| (e, EdgeOrigin::Mst))
        .collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if c.get(i, j) > theta {
                tagged
                    .entry((i, j))
                    .and_modify(|o| *o = EdgeOrigin::Both)
                    .or_insert(EdgeOrigin::Threshold);
            }
        }
    }
    let graph = Graph::new(n, tagged.keys().copied())?;
    // BTreeMap iteration order matches the sorted edge list of the graph.
    let origins = tagged.into_values().collect();
    Ok(ThresholdNetwork {
        graph,
        origins,
        theta,
        corr: c.clone(),
        dist: d.clone(),
    })
}
