mod support;

use curvnet_core::curvature::{average_curvatures, or_curvature, wasserstein_w1, CurvatureOptions, NodeMeasure};
use curvnet_core::graph::{all_hop_distances, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::oracles::*;

#[test]
fn oracles_agree_with_each_other() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let n = rng.gen_range(2..=7);
        let edges = random_connected(n, 0.4, &mut rng);
        for &(u, v) in &edges {
            let a = or_oracle_enumeration(n, &edges, u, v);
            let b = or_oracle_simplex(n, &edges, u, v);
            assert!((a - b).abs() < 1e-9, "{edges:?} ({u},{v}): {a} vs {b}");
        }
    }
}

#[test]
fn or_matches_enumeration_on_all_small_graphs() {
    for n in 2..=5 {
        for edges in connected_graphs_up_to_iso(n) {
            let g = Graph::new(n, edges.iter().copied()).unwrap();
            for &(u, v) in g.edges() {
                let want = or_oracle_enumeration(n, &edges, u, v);
                let got = or_curvature(&g, u, v).unwrap();
                assert!((got - want).abs() < 1e-9, "{edges:?} ({u},{v}): {got} vs {want}");
            }
        }
    }
}

#[test]
fn or_matches_simplex_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let n = rng.gen_range(2..=8);
        let p = rng.gen_range(0.0..0.7);
        let edges = random_connected(n, p, &mut rng);
        let g = Graph::new(n, edges.iter().copied()).unwrap();
        for &(u, v) in g.edges() {
            let want = or_oracle_simplex(n, &edges, u, v);
            assert!((or_curvature(&g, u, v).unwrap() - want).abs() < 1e-9);
        }
    }
}

#[test]
fn general_measures_match_simplex() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let n = rng.gen_range(2..=8);
        let edges = random_connected(n, 0.3, &mut rng);
        let g = Graph::new(n, edges.iter().copied()).unwrap();
        let dist = all_hop_distances(&g);
        let mut measure = || {
            let k = rng.gen_range(1..=n);
            let mut nodes: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(nodes.as_mut_slice(), &mut rng);
            nodes.truncate(k);
            let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = w.iter().sum();
            nodes.into_iter().zip(w.into_iter().map(|x| x / s)).collect::<Vec<_>>()
        };
        let (a, b) = (measure(), measure());
        let to_measure = |m: &[(usize, f64)]| {
            NodeMeasure::new(m.iter().map(|x| x.0).collect(), m.iter().map(|x| x.1).collect()).unwrap()
        };
        let got = wasserstein_w1(&to_measure(&a), &to_measure(&b), |x, y| dist[x][y]);
        let want = w1_simplex(&a, &b, &dist);
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}

/// Without laziness a tree edge with endpoint degrees a, b has curvature
/// -2 (1 - 1/a - 1/b)+, which is nonzero once both endpoints branch.
#[test]
fn tree_edges_follow_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..50 {
        let n = rng.gen_range(2..=20);
        let edges = random_tree(n, &mut rng);
        let g = Graph::new(n, edges.iter().copied()).unwrap();
        for &(u, v) in g.edges() {
            let (a, b) = (g.degree(u) as f64, g.degree(v) as f64);
            let closed = -2.0 * (1.0 - 1.0 / a - 1.0 / b).max(0.0);
            let got = or_curvature(&g, u, v).unwrap();
            assert!((got - closed).abs() < 1e-12, "deg ({a},{b}): {got} vs {closed}");
            assert!((or_oracle_simplex(n, &edges, u, v) - closed).abs() < 1e-9);
        }
    }
    let star_of_stars = Graph::new(6, [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)]).unwrap();
    assert!((or_curvature(&star_of_stars, 0, 1).unwrap() + 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn averages_agree_with_per_edge_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..20 {
        let n = rng.gen_range(3..=8);
        let edges = random_connected(n, 0.4, &mut rng);
        let g = Graph::new(n, edges.iter().copied()).unwrap();
        let avg = average_curvatures(&g, &CurvatureOptions::default()).unwrap();
        let want: f64 = g.edges().iter().map(|&(u, v)| or_oracle_simplex(n, &edges, u, v)).sum::<f64>()
            / g.n_edges() as f64;
        assert!((avg.or - want).abs() < 1e-9);
    }
}
