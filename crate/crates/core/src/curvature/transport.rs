//! Exact Wasserstein-1 distance between small discrete measures on a graph.
//!
//! The shared part of the two measures is cancelled first (W1 only depends
//! on `mu - mv` when the ground cost is a metric), then the remaining
//! transportation problem is solved as a min-cost flow by successive
//! shortest augmenting paths with node potentials. Costs are integer hop
//! counts, so all path lengths and potentials are exact.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Masses at or below this are treated as exhausted.
const MASS_EPS: f64 = 1e-14;

/// Probability measure on graph nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMeasure {
    support: Vec<usize>,
    mass: Vec<f64>,
}

impl NodeMeasure {
    /// Uniform over the neighbours of `node`, excluding `node` itself.
    pub fn uniform_neighbors(g: &Graph, node: usize) -> Result<Self> {
        let support = g.neighbors(node).to_vec();
        if support.is_empty() {
            return Err(Error::Invalid(format!("node {node} has no neighbours")));
        }
        let m = 1.0 / support.len() as f64;
        let mass = vec![m; support.len()];
        Ok(Self { support, mass })
    }

    /// General measure; masses must be non-negative and sum to 1 within 1e-12.
    pub fn new(support: Vec<usize>, mass: Vec<f64>) -> Result<Self> {
        if support.len() != mass.len() || support.is_empty() {
            return Err(Error::Invalid("support and mass lengths differ or are empty".into()));
        }
        if mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::Invalid("masses must be finite and non-negative".into()));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("masses sum to {total}, expected 1")));
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid("support has duplicate nodes".into()));
        }
        Ok(Self { support, mass })
    }

    /// Point mass at `node`.
    pub fn dirac(node: usize) -> Self {
        Self {
            support: vec![node],
            mass: vec![1.0],
        }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }
}

/// Exact W1 between `mu` and `mv` with ground cost `dist(a, b)`, which must
/// be a metric on the union of the supports (graph hop counts are).
pub fn wasserstein_w1(mu: &NodeMeasure, mv: &NodeMeasure, dist: impl Fn(usize, usize) -> usize) -> f64 {
    let mut net: BTreeMap<usize, f64> = BTreeMap::new();
    for (&x, &m) in mu.support.iter().zip(&mu.mass) {
        *net.entry(x).or_insert(0.0) += m;
    }
    for (&y, &m) in mv.support.iter().zip(&mv.mass) {
        *net.entry(y).or_insert(0.0) -= m;
    }
    let mut sources = Vec::new();
    let mut supply = Vec::new();
    let mut sinks = Vec::new();
    let mut demand = Vec::new();
    for (&node, &m) in &net {
        if m > MASS_EPS {
            sources.push(node);
            supply.push(m);
        } else if m < -MASS_EPS {
            sinks.push(node);
            demand.push(-m);
        }
    }
    if sources.is_empty() || sinks.is_empty() {
        return 0.0;
    }
    let cost: Vec<Vec<i64>> = sources
        .iter()
        .map(|&x| sinks.iter().map(|&y| dist(x, y) as i64).collect())
        .collect();
    min_cost_transport(&cost, supply, demand)
}

/// Min-cost flow on the bipartite transport network.
///
/// Node layout: `0` super source, `1..=a` sources, `a+1..=a+b` sinks,
/// `a+b+1` super sink. Dijkstra orders labels by `(reduced distance, hops)`
/// so each phase augments along a shortest path with fewest arcs, which
/// keeps the augmentation count finite with real-valued capacities.
fn min_cost_transport(cost: &[Vec<i64>], mut supply: Vec<f64>, mut demand: Vec<f64>) -> f64 {
    let a = supply.len();
    let b = demand.len();
    let n = a + b + 2;
    let src = 0;
    let snk = a + b + 1;
    let sink_node = |j: usize| a + 1 + j;

    let orig_supply = supply.clone();
    let orig_demand = demand.clone();
    let mut flow = vec![vec![0.0_f64; b]; a];
    let mut pot = vec![0_i64; n];

    const INF: i64 = i64::MAX / 4;
    let mut dist = vec![INF; n];
    let mut hops = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut done = vec![false; n];

    loop {
        if supply.iter().all(|&s| s <= MASS_EPS) || demand.iter().all(|&d| d <= MASS_EPS) {
            break;
        }
        dist.iter_mut().for_each(|d| *d = INF);
        hops.iter_mut().for_each(|h| *h = usize::MAX);
        parent.iter_mut().for_each(|p| *p = usize::MAX);
        done.iter_mut().for_each(|d| *d = false);
        dist[src] = 0;
        hops[src] = 0;

        loop {
            let mut x = usize::MAX;
            for v in 0..n {
                if !done[v] && dist[v] < INF && (x == usize::MAX || (dist[v], hops[v]) < (dist[x], hops[x])) {
                    x = v;
                }
            }
            if x == usize::MAX {
                break;
            }
            done[x] = true;
            let dx = dist[x];
            let hx = hops[x];
            let relax = |y: usize, c: i64, dist: &mut Vec<i64>, hops: &mut Vec<usize>, parent: &mut Vec<usize>| {
                if done[y] {
                    return;
                }
                let nd = dx + c + pot[x] - pot[y];
                debug_assert!(c + pot[x] - pot[y] >= 0, "negative reduced cost");
                if (nd, hx + 1) < (dist[y], hops[y]) {
                    dist[y] = nd;
                    hops[y] = hx + 1;
                    parent[y] = x;
                }
            };
            if x == src {
                for i in 0..a {
                    if supply[i] > MASS_EPS {
                        relax(1 + i, 0, &mut dist, &mut hops, &mut parent);
                    }
                }
            } else if x <= a {
                let i = x - 1;
                if orig_supply[i] - supply[i] > MASS_EPS {
                    relax(src, 0, &mut dist, &mut hops, &mut parent);
                }
                for j in 0..b {
                    relax(sink_node(j), cost[i][j], &mut dist, &mut hops, &mut parent);
                }
            } else if x < snk {
                let j = x - a - 1;
                for i in 0..a {
                    if flow[i][j] > MASS_EPS {
                        relax(1 + i, -cost[i][j], &mut dist, &mut hops, &mut parent);
                    }
                }
                if demand[j] > MASS_EPS {
                    relax(snk, 0, &mut dist, &mut hops, &mut parent);
                }
            } else {
                for j in 0..b {
                    if orig_demand[j] - demand[j] > MASS_EPS {
                        relax(sink_node(j), 0, &mut dist, &mut hops, &mut parent);
                    }
                }
            }
        }

        if dist[snk] >= INF {
            break;
        }
        let reach = dist[snk];
        for v in 0..n {
            pot[v] += dist[v].min(reach);
        }

        // Bottleneck along the path, walking back from the super sink.
        let mut bottleneck = f64::INFINITY;
        let mut y = snk;
        while y != src {
            let x = parent[y];
            let cap = arc_capacity(x, y, a, &supply, &demand, &orig_supply, &orig_demand, &flow);
            bottleneck = bottleneck.min(cap);
            y = x;
        }
        let mut y = snk;
        while y != src {
            let x = parent[y];
            push(x, y, a, bottleneck, &mut supply, &mut demand, &mut flow);
            y = x;
        }
    }

    let mut total = 0.0;
    for i in 0..a {
        for j in 0..b {
            total += flow[i][j] * cost[i][j] as f64;
        }
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn arc_capacity(
    x: usize,
    y: usize,
    a: usize,
    supply: &[f64],
    demand: &[f64],
    orig_supply: &[f64],
    orig_demand: &[f64],
    flow: &[Vec<f64>],
) -> f64 {
    let b = demand.len();
    let snk = a + b + 1;
    match (x, y) {
        (0, i) => supply[i - 1],
        (i, 0) => orig_supply[i - 1] - supply[i - 1],
        (j, t) if t == snk => demand[j - a - 1],
        (t, j) if t == snk => orig_demand[j - a - 1] - demand[j - a - 1],
        (i, _) if i <= a => f64::INFINITY,
        (j, i) => flow[i - 1][j - a - 1],
    }
}

/// Moves `amount` along arc `x -> y`, snapping exhausted quantities to zero.
fn push(
    x: usize,
    y: usize,
    a: usize,
    amount: f64,
    supply: &mut [f64],
    demand: &mut [f64],
    flow: &mut [Vec<f64>],
) {
    let snap = |v: &mut f64| {
        if *v <= MASS_EPS {
            *v = 0.0;
        }
    };
    let b = demand.len();
    let snk = a + b + 1;
    match (x, y) {
        (0, i) => {
            supply[i - 1] -= amount;
            snap(&mut supply[i - 1]);
        }
        (i, 0) => supply[i - 1] += amount,
        (j, t) if t == snk => {
            demand[j - a - 1] -= amount;
            snap(&mut demand[j - a - 1]);
        }
        (t, j) if t == snk => demand[j - a - 1] += amount,
        (i, j) if i <= a => flow[i - 1][j - a - 1] += amount,
        (j, i) => {
            let f = &mut flow[i - 1][j - a - 1];
            *f -= amount;
            snap(f);
        }
    }
}
