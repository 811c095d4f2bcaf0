use std::path::Path;

use nalgebra::{Point2, Vector2};
use proptest::prelude::*;
use tls_planner::nav::{
    dwell_samples, navigation_metrics, pure_pursuit_step, simulate_mission, stationary_pose_stats,
    NoiseModel, Phase, PurePursuitParams, RobotState, Segment,
};
use tls_planner::routing::WaypointPlan;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn arc_passes_through_target(
        x in -2.0..12.0f64,
        y in -0.9..0.9f64,
        heading in -3.0..3.0f64,
        ld in 0.3..2.0f64,
    ) {
        let seg = Segment::new(Point2::new(0.0, 0.0), Point2::new(10.0, 0.0));
        let state = RobotState::at_rest(Point2::new(x, y), heading);
        let params = PurePursuitParams { look_ahead: ld, ..PurePursuitParams::default() };
        let cmd = pure_pursuit_step(&state, &seg, &params);
        prop_assume!(cmd.chord > 1e-6 && cmd.curvature.abs() > 1e-9);

        // the target sits on the path
        prop_assert!(cmd.target.y.abs() < 1e-12);
        prop_assert!(cmd.target.x >= -1e-12 && cmd.target.x <= 10.0 + 1e-12);
        // on the look-ahead circle unless clamped to an end of the segment
        let clamped = cmd.target.x <= 1e-9 || cmd.target.x >= 10.0 - 1e-9;
        if y.abs() <= ld && !clamped {
            prop_assert!((cmd.chord - ld).abs() < 1e-9);
        }
        // circle tangent to the heading at the robot passes through the target
        let r = 1.0 / cmd.curvature;
        let left = Vector2::new(-heading.sin(), heading.cos());
        let center = state.position + left * r;
        prop_assert!(((cmd.target - center).norm() - r.abs()).abs() < 1e-6 * r.abs().max(1.0));
        prop_assert!((cmd.radius() - r).abs() < 1e-6 * r.abs().max(1.0));
        prop_assert!((cmd.omega - cmd.v * cmd.curvature).abs() < 1e-12);
    }
}

fn plan(text: &str) -> WaypointPlan {
    WaypointPlan::from_csv(text, Path::new("plan.csv")).unwrap()
}

const L_LEG: &str = "index,x,y,heading,location_id,next_segment
0,0.0,0.0,0.0,0,headland
1,8.0,0.0,0.0,,headland
2,8.0,6.0,1.5707963,1,
";

#[test]
fn noise_free_tracking_converges() {
    let p = plan(L_LEG);
    let log = simulate_mission(
        &p,
        &PurePursuitParams::default(),
        &NoiseModel::default(),
        RobotState::at_rest(Point2::origin(), 0.0),
    )
    .unwrap();
    let m = navigation_metrics(&log, &p);
    let tracking = m.xte_where(|ph| ph == Phase::Track);
    assert!(!tracking.is_empty());
    assert!(
        tracking.iter().all(|e| e.abs() < 0.06),
        "max {}",
        tracking.iter().fold(0.0f64, |a, e| a.max(e.abs()))
    );
    let end = log.samples.last().unwrap().state.position;
    assert!(
        (end - Point2::new(8.0, 6.0)).norm()
            <= PurePursuitParams::default().goal_position_tolerance + 1e-9
    );
}

#[test]
fn dwell_spread_matches_measurement_noise() {
    let p = plan(
        "index,x,y,heading,location_id,next_segment
0,0.0,0.0,0.0,0,headland
1,3.0,0.0,0.0,1,
",
    );
    let params = PurePursuitParams {
        scan_dwell: 200.0,
        ..PurePursuitParams::default()
    };
    let noise = NoiseModel {
        position_sigma: 0.005,
        heading_sigma: 0.00524,
        wheel_slip_sigma: 0.0,
        seed: 3,
    };
    let log = simulate_mission(
        &p,
        &params,
        &noise,
        RobotState::at_rest(Point2::origin(), 0.0),
    )
    .unwrap();
    let dwell = dwell_samples(&log);
    let (idx, samples) = dwell.last().unwrap();
    assert!(samples.len() >= 1000, "{} samples", samples.len());
    let s = stationary_pose_stats(samples, &p.waypoints[*idx].position).unwrap();
    for (sd, sigma) in [(s.x.sd, 0.005), (s.y.sd, 0.005), (s.heading.sd, 0.00524)] {
        assert!((sd / sigma - 1.0).abs() < 0.1, "sd {sd} vs sigma {sigma}");
    }
    assert!(s.absolute_error < 0.05 + 3.0 * 0.005);
}
