//! Exact and nearest-neighbor tours over a handful of scan locations under
//! both navigation metrics, and the waypoint plan of the exact tour.
//!
//!     cargo run --example route_planning

use tls_planner::field::{candidate_scan_locations, FieldLayout};
use tls_planner::routing::{
    decompose_route, default_origin, nearest_neighbor_route, solve_tsp, DistanceGraph, Metric,
};

fn main() -> tls_planner::Result<()> {
    let layout = FieldLayout::engr();
    let candidates = candidate_scan_locations(&layout, 0.8, 0.3)?;
    let mut nodes = vec![(0, default_origin(&layout))];
    nodes.extend(
        candidates
            .locations
            .iter()
            .filter(|l| l.id % 9 == 4)
            .map(|l| (l.id, l.position)),
    );
    println!(
        "routing {} locations from ({:.2}, {:.2})",
        nodes.len() - 1,
        nodes[0].1.x,
        nodes[0].1.y
    );

    for metric in [Metric::Br, Metric::Aha] {
        let graph = DistanceGraph::build(&nodes, metric, &layout);
        let exact = solve_tsp(&graph)?;
        let nn = nearest_neighbor_route(&graph, 0)?;
        println!(
            "{metric}: exact {:.2} m {:?}, nearest neighbor {:.2} m ({:+.1}%)",
            exact.total_length,
            exact.sequence,
            nn.total_length,
            100.0 * (nn.total_length / exact.total_length - 1.0)
        );
        if metric == Metric::Aha {
            let plan = decompose_route(&exact, &graph, &layout)?;
            println!(
                "{} waypoints, {:.2} m driven",
                plan.waypoints.len(),
                plan.length()
            );
            print!("{}", plan.to_csv());
        }
    }
    Ok(())
}
