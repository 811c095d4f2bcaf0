use nalgebra::Point2;
use proptest::prelude::*;
use tls_planner::field::FieldLayout;
use tls_planner::routing::{
    default_origin, nearest_neighbor_route, pairwise_distance, solve_tsp, solve_tsp_dfj,
    DistanceGraph, Metric, Tour,
};

/// Shortest closed tour from node 0 by trying every order of the rest.
fn brute_force(g: &DistanceGraph) -> f64 {
    fn go(g: &DistanceGraph, cur: usize, left: &mut Vec<usize>, acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        if left.is_empty() {
            *best = best.min(acc + g.weight(cur, 0));
            return;
        }
        for i in 0..left.len() {
            let k = left.remove(i);
            go(g, k, left, acc + g.weight(cur, k), best);
            left.insert(i, k);
        }
    }
    let mut best = f64::INFINITY;
    go(g, 0, &mut (1..g.len()).collect(), 0.0, &mut best);
    if g.len() == 1 {
        0.0
    } else {
        best
    }
}

fn tour_length(g: &DistanceGraph, t: &Tour) -> f64 {
    let idx = |id: usize| g.node_ids.iter().position(|&n| n == id).unwrap();
    t.sequence
        .windows(2)
        .map(|w| g.weight(idx(w[0]), idx(w[1])))
        .sum()
}

fn assert_valid(g: &DistanceGraph, t: &Tour, start: usize) {
    assert_eq!(t.sequence.first(), Some(&start));
    assert_eq!(t.sequence.last(), Some(&start));
    let mut inner = t.sequence[..t.sequence.len() - 1].to_vec();
    inner.sort_unstable();
    let mut ids = g.node_ids.clone();
    ids.sort_unstable();
    assert_eq!(inner, ids, "not a permutation");
    assert!((tour_length(g, t) - t.total_length).abs() < 1e-9);
}

/// Graph over points in the plane under the Manhattan distance.
fn planar(points: &[(f64, f64)]) -> DistanceGraph {
    let n = points.len();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = (points[i].0 - points[j].0).abs() + (points[i].1 - points[j].1).abs();
        }
    }
    DistanceGraph::from_matrix((0..n).collect(), w, Metric::Br).unwrap()
}

/// Symmetric matrix with arbitrary (possibly non-metric) weights.
fn arbitrary(n: usize, upper: &[f64]) -> DistanceGraph {
    let mut w = vec![0.0; n * n];
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            w[i * n + j] = upper[k];
            w[j * n + i] = upper[k];
            k += 1;
        }
    }
    DistanceGraph::from_matrix((0..n).collect(), w, Metric::Aha).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn exact_solvers_match_enumeration(points in prop::collection::vec((0.0..40.0f64, 0.0..20.0f64), 1..=8)) {
        let g = planar(&points);
        let opt = brute_force(&g);
        let dp = solve_tsp(&g).unwrap();
        let lp = solve_tsp_dfj(&g).unwrap();
        assert_valid(&g, &dp, 0);
        assert_valid(&g, &lp, 0);
        prop_assert!((dp.total_length - opt).abs() < 1e-6, "dp {} opt {}", dp.total_length, opt);
        prop_assert!((lp.total_length - opt).abs() < 1e-6, "dfj {} opt {}", lp.total_length, opt);
        let nn = nearest_neighbor_route(&g, 0).unwrap();
        assert_valid(&g, &nn, 0);
        prop_assert!(nn.total_length >= opt - 1e-9);
    }

    #[test]
    fn non_metric_weights(n in 2usize..=7, upper in prop::collection::vec(0.0..100.0f64, 21)) {
        let g = arbitrary(n, &upper);
        let opt = brute_force(&g);
        prop_assert!((solve_tsp(&g).unwrap().total_length - opt).abs() < 1e-6);
        prop_assert!((solve_tsp_dfj(&g).unwrap().total_length - opt).abs() < 1e-6);
        prop_assert!(nearest_neighbor_route(&g, 0).unwrap().total_length >= opt - 1e-9);
    }

    #[test]
    fn integer_ties(n in 3usize..=7, upper in prop::collection::vec(1u8..4, 21)) {
        let upper: Vec<f64> = upper.into_iter().map(f64::from).collect();
        let g = arbitrary(n, &upper);
        let a = solve_tsp(&g).unwrap();
        let b = solve_tsp(&g).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!((a.total_length - brute_force(&g)).abs() < 1e-9);
    }
}

#[test]
fn field_graphs_under_both_metrics() {
    let layout = FieldLayout::engr();
    let grid = layout.corridor_grid();
    let mut sites = Vec::new();
    for (i, x) in grid.xs.iter().enumerate() {
        for (j, y) in grid.ys.iter().enumerate() {
            if (i * 7 + j * 3) % 5 == 0 {
                sites.push(Point2::new(*x, *y));
            }
        }
    }
    for metric in [Metric::Br, Metric::Aha] {
        for chunk in sites.chunks(7) {
            let mut nodes = vec![(0, default_origin(&layout))];
            nodes.extend(chunk.iter().enumerate().map(|(k, p)| (k + 1, *p)));
            let g = DistanceGraph::build(&nodes, metric, &layout);
            for i in 0..g.len() {
                for j in 0..g.len() {
                    let d = pairwise_distance(&g.positions[i], &g.positions[j], metric, &layout);
                    assert!((g.weight(i, j) - d).abs() < 1e-9);
                }
            }
            let opt = brute_force(&g);
            assert!((solve_tsp(&g).unwrap().total_length - opt).abs() < 1e-6);
            assert!((solve_tsp_dfj(&g).unwrap().total_length - opt).abs() < 1e-6);
        }
    }
}

#[test]
fn aha_never_shorter_than_br() {
    let layout = FieldLayout::engr();
    let grid = layout.corridor_grid();
    let pts: Vec<Point2<f64>> = grid
        .xs
        .iter()
        .flat_map(|x| grid.ys.iter().map(move |y| Point2::new(*x, *y)))
        .collect();
    for a in &pts {
        for b in &pts {
            let br = pairwise_distance(a, b, Metric::Br, &layout);
            let aha = pairwise_distance(a, b, Metric::Aha, &layout);
            assert!(aha >= br - 1e-9, "{a} {b}: aha {aha} < br {br}");
            assert!((aha - pairwise_distance(b, a, Metric::Aha, &layout)).abs() < 1e-9);
        }
    }
}
