//! Visibility over every candidate, then greedy set cover of the cells.
//!
//!     cargo run --release --example greedy_cover [engr|spl] [angular_step_deg]

use tls_planner::cover::greedy_cover;
use tls_planner::field::{candidate_scan_locations, digitize_field, FieldLayout};
use tls_planner::raycast::{visibility_analysis, ScannerSpec};

fn main() -> tls_planner::Result<()> {
    let mut args = std::env::args().skip(1);
    let layout = match args.next().as_deref() {
        Some("spl") => FieldLayout::spl(),
        _ => FieldLayout::engr(),
    };
    let step: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let spec = ScannerSpec {
        angular_step: step,
        ..ScannerSpec::default()
    };
    let plots = digitize_field(&layout)?;
    let candidates = candidate_scan_locations(&layout, 0.8, 0.3)?;
    let table = visibility_analysis(&plots, &candidates.locations, &spec);
    let cover = greedy_cover(&table);

    println!("{} candidates, {} cells", cover.n_candidates, cover.n_cells);
    for (k, (id, gain)) in cover
        .selected
        .iter()
        .zip(&cover.covered_per_step)
        .enumerate()
    {
        println!("  pick {:>2}: location {id:<3} +{gain} cells", k + 1);
    }
    println!(
        "{} selected, reduction {:.1}%, {} cells unseen from any candidate",
        cover.selected.len(),
        100.0 * cover.reduction(),
        cover.uncoverable.len()
    );
    Ok(())
}
