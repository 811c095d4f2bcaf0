//! Lay out a field, voxelize its plots and list candidate scan locations.
//!
//!     cargo run --example digitize_field [engr|spl]

use tls_planner::field::{candidate_scan_locations, digitize_field, FieldLayout};

fn main() -> tls_planner::Result<()> {
    let layout = match std::env::args().nth(1).as_deref() {
        Some("spl") => FieldLayout::spl(),
        _ => FieldLayout::engr(),
    };
    let plots = digitize_field(&layout)?;
    let (w, h) = layout.extent();
    println!("field {w:.2} m x {h:.2} m, {} plots", plots.len());
    let p = &plots[0];
    println!(
        "plot {:?}: ({:.2}, {:.2}, {:.2}) .. ({:.2}, {:.2}, {:.2}), grid {:?} = {} cells",
        p.id,
        p.min.x,
        p.min.y,
        p.min.z,
        p.max.x,
        p.max.y,
        p.max.z,
        p.grid_dims,
        p.n_cells()
    );

    let candidates = candidate_scan_locations(&layout, 0.8, 0.3)?;
    println!(
        "{} candidate locations ({} rejected)",
        candidates.locations.len(),
        candidates.rejected
    );
    for loc in candidates.locations.iter().take(5) {
        println!(
            "  #{:<3} ({:6.2}, {:6.2})  {:?}",
            loc.id, loc.position.x, loc.position.y, loc.kind
        );
    }
    Ok(())
}
