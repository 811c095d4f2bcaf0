//! Cast the scanner's rays from a few candidate locations and report how
//! many voxel cells each one sees.
//!
//!     cargo run --example visibility [angular_step_deg]

use tls_planner::field::{candidate_scan_locations, digitize_field, FieldLayout};
use tls_planner::raycast::{visibility_analysis, ScannerSpec};

fn main() -> tls_planner::Result<()> {
    let step: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1.0);
    let layout = FieldLayout::engr();
    let plots = digitize_field(&layout)?;
    let candidates = candidate_scan_locations(&layout, 0.8, 0.3)?;
    let spec = ScannerSpec {
        angular_step: step,
        ..ScannerSpec::default()
    };
    spec.validate()?;
    println!("{} rays per scan at {step} deg", spec.n_rays());

    let sample: Vec<_> = candidates.locations.iter().step_by(10).cloned().collect();
    let table = visibility_analysis(&plots, &sample, &spec);
    let scores = table.scores();
    for (loc, score) in sample.iter().zip(&scores) {
        let hits: u32 = table
            .row(sample.iter().position(|l| l.id == loc.id).unwrap())
            .iter()
            .sum();
        println!(
            "  #{:<3} ({:6.2}, {:6.2})  {:5} cells visible, {:6} hits",
            loc.id, loc.position.x, loc.position.y, score, hits
        );
    }
    println!("{} cells in the field", table.n_cells());
    Ok(())
}
