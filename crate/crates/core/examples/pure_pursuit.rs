//! Drive a short waypoint plan with the pure-pursuit controller, with and
//! without pose noise, and summarize the tracking error.
//!
//!     cargo run --example pure_pursuit [seed]

use nalgebra::Point2;
use tls_planner::field::{candidate_scan_locations, FieldLayout};
use tls_planner::nav::{
    navigation_metrics, simulate_mission, NoiseModel, Phase, PurePursuitParams, RobotState,
    SeriesStats,
};
use tls_planner::routing::{decompose_route, default_origin, solve_tsp, DistanceGraph, Metric};

fn main() -> tls_planner::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let layout = FieldLayout::engr();
    let candidates = candidate_scan_locations(&layout, 0.8, 0.3)?;
    let mut nodes = vec![(0, default_origin(&layout))];
    nodes.extend(
        candidates
            .locations
            .iter()
            .step_by(12)
            .map(|l| (l.id, l.position)),
    );
    let graph = DistanceGraph::build(&nodes, Metric::Aha, &layout);
    let plan = decompose_route(&solve_tsp(&graph)?, &graph, &layout)?;

    let params = PurePursuitParams {
        scan_dwell: 2.0,
        ..PurePursuitParams::default()
    };
    let noisy = NoiseModel {
        position_sigma: 0.005,
        heading_sigma: 0.00524,
        wheel_slip_sigma: 0.01,
        seed,
    };
    let start = &plan.waypoints[0];
    for (label, noise) in [("noise-free", NoiseModel::default()), ("noisy", noisy)] {
        let log = simulate_mission(
            &plan,
            &params,
            &noise,
            RobotState::at_rest(start.position, start.heading),
        )?;
        let m = navigation_metrics(&log, &plan);
        let track = m.xte_where(|p| p == Phase::Track);
        let abs: Vec<f64> = track.iter().map(|e| e.abs()).collect();
        let xte = SeriesStats::of(&abs);
        let end: Point2<f64> = log.samples.last().unwrap().state.position;
        println!(
            "{label:>10}: {:.1} s, {:.2} m driven, |XTE| mean {:.2} cm max {:.2} cm, ended {:.1} cm from the last waypoint",
            log.samples.last().unwrap().state.time,
            log.path_length(),
            100.0 * xte.mean,
            100.0 * xte.max_abs,
            100.0 * (end - plan.waypoints.last().unwrap().position).norm()
        );
    }
    Ok(())
}
