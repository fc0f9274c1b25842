//! Independent reference implementations used only by tests. None of these
//! share code with the library: the transport oracles see raw neighbour
//! measures (no shared-mass cancellation) and the MST oracle enumerates every
//! labelled spanning tree.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

// ---------------------------------------------------------------- graphs

/// Hop distances by BFS over an edge list.
pub fn bfs_all_pairs(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    (0..n)
        .map(|s| {
            let mut d = vec![usize::MAX; n];
            d[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(x) = q.pop_front() {
                for &y in &adj[x] {
                    if d[y] == usize::MAX {
                        d[y] = d[x] + 1;
                        q.push_back(y);
                    }
                }
            }
            d
        })
        .collect()
}

pub fn neighbours(n: usize, edges: &[(usize, usize)], v: usize) -> Vec<usize> {
    let mut out: Vec<usize> = edges
        .iter()
        .filter_map(|&(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    debug_assert!(out.iter().all(|&x| x < n));
    out
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    n == 0 || bfs_all_pairs(n, edges)[0].iter().all(|&d| d != usize::MAX)
}

/// Uniform random labelled tree from a random Prüfer sequence.
pub fn random_tree<R: Rng>(n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => {
            let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
            prufer_decode(n, &seq)
        }
    }
}

/// Random connected graph: random tree plus each remaining pair with probability `p`.
pub fn random_connected<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut set: BTreeSet<(usize, usize)> = random_tree(n, rng).into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                set.insert((a, b));
            }
        }
    }
    let mut edges: Vec<_> = set.into_iter().collect();
    edges.shuffle(rng);
    edges
}

/// One representative of every isomorphism class of connected graphs on
/// exactly `n` nodes (n <= 6).
pub fn connected_graphs_up_to_iso(n: usize) -> Vec<Vec<(usize, usize)>> {
    assert!(n <= 6);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        if !connected(n, &edges) {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| {
                let mut e: Vec<(usize, usize)> = edges
                    .iter()
                    .map(|&(a, b)| (p[a].min(p[b]), p[a].max(p[b])))
                    .collect();
                e.sort_unstable();
                e
            })
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(edges);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn prufer_decode(n: usize, seq: &[usize]) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

// ---------------------------------------------------------------- MST

/// Minimum total weight over all `n^(n-2)` labelled spanning trees.
pub fn mst_weight_brute_force(d: &[Vec<f64>]) -> f64 {
    let n = d.len();
    if n <= 1 {
        return 0.0;
    }
    if n == 2 {
        return d[0][1];
    }
    let mut seq = vec![0usize; n - 2];
    let mut best = f64::INFINITY;
    loop {
        let w: f64 = prufer_decode(n, &seq).iter().map(|&(a, b)| d[a][b]).sum();
        best = best.min(w);
        // odometer increment
        let mut k = 0;
        loop {
            if k == seq.len() {
                return best;
            }
            seq[k] += 1;
            if seq[k] < n {
                break;
            }
            seq[k] = 0;
            k += 1;
        }
    }
}

// ---------------------------------------------------------------- transport

/// Exact W1 between uniform measures on `src` and `dst` by enumerating every
/// spanning tree of the complete bipartite graph K(a, b): each basic feasible
/// solution of the transportation polytope lives on one. Masses are scaled to
/// integers (each source supplies `b`, each sink takes `a`), so tree flows are
/// exact. Trees are generated by parent assignment rooted at source 0.
pub fn w1_uniform_vertex_enumeration(src: &[usize], dst: &[usize], dist: &[Vec<usize>]) -> f64 {
    let (a, b) = (src.len(), dst.len());
    let n = a + b;
    let cost = |i: usize, j: usize| dist[src[i]][dst[j]] as i64;
    // node k < a is source k; node a + j is sink j
    let net = |k: usize| if k < a { b as i64 } else { -(a as i64) };
    let choices = |k: usize| if k < a { b } else { a };
    let mut parent_choice = vec![0usize; n]; // index 0 unused (root)
    let mut best = i64::MAX;
    let mut depth = vec![0usize; n];
    loop {
        let parent = |k: usize, pc: &[usize]| if k < a { a + pc[k] } else { pc[k] };
        // acyclic iff every node reaches the root
        let mut is_tree = true;
        for k in 1..n {
            let (mut x, mut steps) = (k, 0);
            while x != 0 && steps <= n {
                x = parent(x, &parent_choice);
                steps += 1;
            }
            if x != 0 {
                is_tree = false;
                break;
            }
            depth[k] = steps;
        }
        if is_tree {
            let mut order: Vec<usize> = (1..n).collect();
            order.sort_by_key(|&k| std::cmp::Reverse(depth[k]));
            let mut subtree: Vec<i64> = (0..n).map(net).collect();
            let mut total = 0i64;
            let mut feasible = true;
            for &k in &order {
                let p = parent(k, &parent_choice);
                let flow = if k < a { subtree[k] } else { -subtree[k] };
                if flow < 0 {
                    feasible = false;
                    break;
                }
                total += flow * if k < a { cost(k, p - a) } else { cost(p, k - a) };
                subtree[p] += subtree[k];
            }
            if feasible {
                best = best.min(total);
            }
        }
        let mut k = 1;
        loop {
            if k == n {
                return best as f64 / (a * b) as f64;
            }
            parent_choice[k] += 1;
            if parent_choice[k] < choices(k) {
                break;
            }
            parent_choice[k] = 0;
            k += 1;
        }
    }
}

/// Minimises `c.x` subject to `A x = b`, `x >= 0` (with `b >= 0`) by a dense
/// two-phase tableau simplex using Bland's rule. Returns `None` if infeasible.
pub fn simplex_min(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    const EPS: f64 = 1e-11;
    let m = a.len();
    let n = c.len();
    let width = n + m + 1;
    let rhs = n + m;
    let mut t: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row = vec![0.0; width];
            row[..n].copy_from_slice(&a[i]);
            row[n + i] = 1.0;
            row[rhs] = b[i];
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    fn pivot(t: &mut [Vec<f64>], obj: &mut [f64], r: usize, col: usize) {
        let p = t[r][col];
        t[r].iter_mut().for_each(|v| *v /= p);
        let prow = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && row[col] != 0.0 {
                let f = row[col];
                row.iter_mut().zip(&prow).for_each(|(v, pv)| *v -= f * pv);
            }
        }
        let f = obj[col];
        obj.iter_mut().zip(&prow).for_each(|(v, pv)| *v -= f * pv);
    }

    let run = |t: &mut Vec<Vec<f64>>, obj: &mut Vec<f64>, basis: &mut Vec<usize>, allowed: usize| loop {
        let Some(col) = (0..allowed).find(|&j| obj[j] < -EPS) else {
            return true;
        };
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if t[i][col] > EPS {
                let ratio = t[i][rhs] / t[i][col];
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let lr = t[l][rhs] / t[l][col];
                        if ratio < lr - EPS || (ratio <= lr + EPS && basis[i] < basis[l]) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        let Some(r) = leave else {
            return false; // unbounded
        };
        pivot(t, obj, r, col);
        basis[r] = col;
    };

    // phase 1: minimise the sum of artificials
    let mut obj = vec![0.0; width];
    for row in &t {
        for j in 0..n {
            obj[j] -= row[j];
        }
        obj[rhs] -= row[rhs];
    }
    run(&mut t, &mut obj, &mut basis, n + m);
    if -obj[rhs] > 1e-9 {
        return None;
    }
    for r in 0..m {
        if basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| t[r][j].abs() > EPS) {
                pivot(&mut t, &mut obj, r, col);
                basis[r] = col;
            }
        }
    }

    // phase 2
    let mut obj = vec![0.0; width];
    obj[..n].copy_from_slice(c);
    for r in 0..m {
        let bc = basis[r];
        if bc < n && obj[bc] != 0.0 {
            let f = obj[bc];
            let row = t[r].clone();
            obj.iter_mut().zip(&row).for_each(|(v, rv)| *v -= f * rv);
        }
    }
    if !run(&mut t, &mut obj, &mut basis, n) {
        return None;
    }
    Some(-obj[rhs])
}

/// W1 between arbitrary measures via the transportation LP.
pub fn w1_simplex(src: &[(usize, f64)], dst: &[(usize, f64)], dist: &[Vec<usize>]) -> f64 {
    let (a, b) = (src.len(), dst.len());
    let mut c = Vec::with_capacity(a * b);
    for &(x, _) in src {
        for &(y, _) in dst {
            c.push(dist[x][y] as f64);
        }
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (i, &(_, m)) in src.iter().enumerate() {
        let mut r = vec![0.0; a * b];
        (0..b).for_each(|j| r[i * b + j] = 1.0);
        rows.push(r);
        rhs.push(m);
    }
    for (j, &(_, m)) in dst.iter().enumerate() {
        let mut r = vec![0.0; a * b];
        (0..a).for_each(|i| r[i * b + j] = 1.0);
        rows.push(r);
        rhs.push(m);
    }
    simplex_min(&c, &rows, &rhs).expect("transportation problem is feasible")
}

/// Ollivier-Ricci curvature of edge (u, v) from the raw definition.
pub fn or_oracle_enumeration(n: usize, edges: &[(usize, usize)], u: usize, v: usize) -> f64 {
    let d = bfs_all_pairs(n, edges);
    1.0 - w1_uniform_vertex_enumeration(&neighbours(n, edges, u), &neighbours(n, edges, v), &d)
}

pub fn or_oracle_simplex(n: usize, edges: &[(usize, usize)], u: usize, v: usize) -> f64 {
    let d = bfs_all_pairs(n, edges);
    let uniform = |x: usize| {
        let nb = neighbours(n, edges, x);
        let m = 1.0 / nb.len() as f64;
        nb.into_iter().map(|y| (y, m)).collect::<Vec<_>>()
    };
    1.0 - w1_simplex(&uniform(u), &uniform(v), &d)
}

// ---------------------------------------------------------------- statistics

/// Sample Pearson correlation of two columns, two-pass.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Forman-Ricci from the weighted formula evaluated with unit node and edge
/// weights: `w_e (w_u/w_e + w_v/w_e - sum over other edges at u and v of
/// w_u/sqrt(w_e w_e') ...)`.
pub fn forman_weighted_unit(n: usize, edges: &[(usize, usize)], u: usize, v: usize) -> f64 {
    let (we, wu, wv) = (1.0_f64, 1.0_f64, 1.0_f64);
    let at_u = neighbours(n, edges, u).into_iter().filter(|&x| x != v).count();
    let at_v = neighbours(n, edges, v).into_iter().filter(|&x| x != u).count();
    let sum_u: f64 = (0..at_u).map(|_| wu / (we * 1.0_f64).sqrt()).sum();
    let sum_v: f64 = (0..at_v).map(|_| wv / (we * 1.0_f64).sqrt()).sum();
    we * (wu / we + wv / we - sum_u - sum_v)
}
