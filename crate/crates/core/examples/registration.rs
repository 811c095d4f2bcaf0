//! Synthesize two overlapping scans of a small field, place them with
//! perturbed poses, refine with cloud-to-cloud alignment and compare the
//! misalignment before and after.
//!
//!     cargo run --release --example registration

use nalgebra::Vector3;
use tls_planner::field::{digitize_field, FieldLayout};
use tls_planner::geometry::Pose;
use tls_planner::raycast::ScannerSpec;
use tls_planner::registration::{
    c2c_refine, hausdorff_distance, register_from_pose, synthesize_scan, IcpParams, PointCloud,
    Scene,
};

fn main() -> tls_planner::Result<()> {
    let layout = FieldLayout {
        n_rows: 3,
        plots_per_row: 3,
        ..FieldLayout::engr()
    };
    let plots = digitize_field(&layout)?;
    let (w, h) = layout.extent();
    let scene = Scene::new(&plots, &[]).with_ground(0.0, 0.0, w, h);
    let spec = ScannerSpec {
        angular_step: 0.5,
        ..ScannerSpec::default()
    };

    let truth_a = Pose::new(Vector3::new(5.95, 2.9, 1.0), 0.0, 0.0, 0.0);
    let truth_b = Pose::new(Vector3::new(10.45, 4.7, 1.0), 0.0, 0.0, 1.2);
    let scan_a = synthesize_scan(&scene, &truth_a, &spec, 0.002, 1);
    let scan_b = synthesize_scan(&scene, &truth_b, &spec, 0.002, 2);
    println!("scan sizes: {} and {} points", scan_a.len(), scan_b.len());

    // the second scan's pose is off by a small tilt, yaw and offset
    let est_b = Pose::new(
        truth_b.translation + Vector3::new(0.03, -0.02, 0.01),
        0.008,
        -0.01,
        1.21,
    );
    let reference = register_from_pose(&scan_a, &truth_a)?;
    let placed = register_from_pose(&scan_b, &est_b)?;
    let truth_placed = register_from_pose(&scan_b, &truth_b)?;

    // each point against its own truth-placed copy
    let err = |c: &PointCloud| {
        let d: Vec<f64> = c
            .points
            .iter()
            .zip(&truth_placed.points)
            .map(|(p, q)| (p - q).norm())
            .collect();
        (
            d.iter().fold(0.0, |a: f64, b| a.max(*b)),
            d.iter().sum::<f64>() / d.len() as f64,
        )
    };
    let (max, mean) = err(&placed);
    println!(
        "pose only: point error max {:.2} cm, mean {:.2} cm",
        100.0 * max,
        100.0 * mean
    );

    let icp = c2c_refine(&placed, &reference, &IcpParams::default())?;
    for s in &icp.stages {
        println!(
            "  gate {:.3} m: rms {:.4} -> {:.4} in {} steps",
            s.gate,
            s.rms_history[0],
            s.rms_history.last().unwrap(),
            s.rms_history.len() - 1
        );
    }
    let (max, mean) = err(&icp.refined);
    println!(
        "refined:   point error max {:.2} cm, mean {:.2} cm",
        100.0 * max,
        100.0 * mean
    );
    let h = hausdorff_distance(&icp.refined, &reference)?;
    println!(
        "directed Hausdorff to the first scan: {:.2} m (non-overlapping parts included)",
        h.d_h
    );
    Ok(())
}
