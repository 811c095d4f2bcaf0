use std::collections::HashMap;

use nalgebra::{Point2, Point3, Vector3};
use proptest::prelude::*;
use tls_planner::field::{
    digitize_field, CellId, FieldLayout, LocationKind, PlotBox, ScanLocation,
};
use tls_planner::raycast::{
    ray_aabb_intersect, visibility_analysis, Aabb, Ray, ScannerSpec, VisibilityTable,
};

/// Nearest non-negative face crossing that lands on the box, or 0 when the
/// origin is inside.
fn six_plane(ray: &Ray, b: &Aabb) -> Option<f64> {
    if b.contains(&ray.origin) {
        return Some(0.0);
    }
    let mut best: Option<f64> = None;
    for axis in 0..3 {
        let d = ray.direction[axis];
        if d == 0.0 {
            continue;
        }
        for bound in [b.min[axis], b.max[axis]] {
            let t = (bound - ray.origin[axis]) / d;
            if t < 0.0 {
                continue;
            }
            let p = ray.at(t);
            let on_face = (0..3)
                .filter(|&k| k != axis)
                .all(|k| p[k] >= b.min[k] - 1e-12 && p[k] <= b.max[k] + 1e-12);
            if on_face && best.is_none_or(|bt| t < bt) {
                best = Some(t);
            }
        }
    }
    best
}

fn coord() -> impl Strategy<Value = f64> {
    -6.0..6.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn slab_matches_face_planes(
        lo in (coord(), coord(), 0.0..1.0f64),
        size in (0.1..3.0f64, 0.1..3.0f64, 0.1..2.0f64),
        origin in (-9.0..9.0f64, -9.0..9.0f64, -1.0..3.0f64),
        dir in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
    ) {
        let d = Vector3::new(dir.0, dir.1, dir.2);
        prop_assume!(d.norm() > 1e-3);
        let min = Point3::new(lo.0, lo.1, lo.2);
        let b = Aabb::new(min, min + Vector3::new(size.0, size.1, size.2));
        let ray = Ray::new(Point3::new(origin.0, origin.1, origin.2), d);
        let slab = ray_aabb_intersect(&ray, &b).map(|(t0, _)| t0.max(0.0));
        match (slab, six_plane(&ray, &b)) {
            (Some(a), Some(o)) => prop_assert!((a - o).abs() < 1e-9, "slab {a} oracle {o}"),
            (None, None) => {}
            other => prop_assert!(false, "disagree: {other:?}"),
        }
    }

    #[test]
    fn axis_parallel_rays(
        lo in (coord(), coord(), 0.0..1.0f64),
        origin in (-9.0..9.0f64, -9.0..9.0f64, -1.0..3.0f64),
        axis in 0usize..3,
        sign in prop::bool::ANY,
    ) {
        let min = Point3::new(lo.0, lo.1, lo.2);
        let b = Aabb::new(min, min + Vector3::new(1.0, 2.0, 1.5));
        let mut d = Vector3::zeros();
        d[axis] = if sign { 1.0 } else { -1.0 };
        let ray = Ray::new(Point3::new(origin.0, origin.1, origin.2), d);
        let slab = ray_aabb_intersect(&ray, &b).map(|(t0, _)| t0.max(0.0));
        let oracle = six_plane(&ray, &b);
        prop_assert_eq!(slab.is_some(), oracle.is_some());
        if let (Some(a), Some(o)) = (slab, oracle) {
            prop_assert!((a - o).abs() < 1e-9);
        }
    }
}

fn small_field() -> FieldLayout {
    FieldLayout {
        n_rows: 2,
        plots_per_row: 2,
        ..FieldLayout::engr()
    }
}

fn coarse() -> ScannerSpec {
    ScannerSpec {
        angular_step: 3.0,
        ..ScannerSpec::default()
    }
}

fn site(id: usize, x: f64, y: f64) -> ScanLocation {
    ScanLocation {
        id,
        position: Point2::new(x, y),
        kind: LocationKind::AlleyRowIntersection,
        clearance: 0.0,
    }
}

/// Cell holding `p`, clamped so boundary points land in the adjacent cell.
fn naive_cell(b: &PlotBox, p: &Point3<f64>) -> [usize; 3] {
    let mut out = [0; 3];
    for a in 0..3 {
        let i = ((p[a] - b.min[a]) / b.voxel_size[a]).floor().max(0.0) as usize;
        out[a] = i.min(b.grid_dims[a] - 1);
    }
    out
}

/// Casts every ray against every box with the face-plane oracle.
fn brute_counts(
    plots: &[PlotBox],
    sites: &[ScanLocation],
    spec: &ScannerSpec,
) -> HashMap<(usize, CellId), u32> {
    let mut counts = HashMap::new();
    let nv = ((spec.v_end - spec.v_start) / spec.angular_step + 1e-9).floor() as usize + 1;
    let nh = ((spec.h_end - spec.h_start) / spec.angular_step - 1e-9).ceil() as usize;
    for s in sites {
        let origin = Point3::new(s.position.x, s.position.y, spec.mount_height);
        for vi in 0..nv {
            for hi in 0..nh {
                let v = (spec.v_start + vi as f64 * spec.angular_step).to_radians();
                let h = (spec.h_start + hi as f64 * spec.angular_step).to_radians();
                let ray = Ray::new(
                    origin,
                    Vector3::new(v.cos() * h.cos(), v.cos() * h.sin(), v.sin()),
                );
                let nearest = plots
                    .iter()
                    .filter_map(|b| six_plane(&ray, &Aabb::new(b.min, b.max)).map(|t| (b, t)))
                    .min_by(|a, b| a.1.total_cmp(&b.1));
                if let Some((b, t)) = nearest {
                    if t >= spec.min_range && t <= spec.max_range {
                        let cell = CellId {
                            plot: b.id,
                            cell: naive_cell(b, &ray.at(t)),
                        };
                        *counts.entry((s.id, cell)).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    counts
}

fn table_map(t: &VisibilityTable) -> HashMap<(usize, CellId), u32> {
    let mut out = HashMap::new();
    for (li, id) in t.location_ids.iter().enumerate() {
        for (ci, cell) in t.cells.iter().enumerate() {
            let n = t.count(li, ci);
            if n > 0 {
                out.insert((*id, *cell), n);
            }
        }
    }
    out
}

#[test]
fn visibility_matches_brute_force() {
    let layout = small_field();
    let plots = digitize_field(&layout).unwrap();
    let sites = [site(1, 0.5, 0.5), site(2, 5.5, 2.3), site(3, 8.0, 5.0)];
    let spec = coarse();
    assert_eq!(spec.n_rays(), brute_rays(&spec));
    let table = visibility_analysis(&plots, &sites, &spec);
    let brute = brute_counts(&plots, &sites, &spec);
    let fast = table_map(&table);
    let total: u32 = brute.values().sum();
    assert!(total > 1000, "scene too sparse: {total} hits");
    let mismatched: Vec<_> = brute
        .iter()
        .filter(|(k, v)| fast.get(k) != Some(v))
        .map(|(k, _)| *k)
        .collect();
    assert!(
        mismatched.len() <= total as usize / 1000,
        "{} of {} cells differ",
        mismatched.len(),
        brute.len()
    );
    assert_eq!(fast.values().sum::<u32>(), total);
}

fn brute_rays(spec: &ScannerSpec) -> usize {
    let nv = ((spec.v_end - spec.v_start) / spec.angular_step + 1e-9).floor() as usize + 1;
    let nh = ((spec.h_end - spec.h_start) / spec.angular_step - 1e-9).ceil() as usize;
    nv * nh
}

#[test]
fn adding_a_box_never_adds_hits_elsewhere() {
    let plots = digitize_field(&small_field()).unwrap();
    let sites = [site(1, 0.5, 0.5), site(2, 5.5, 2.3)];
    let spec = coarse();
    let all = table_map(&visibility_analysis(&plots, &sites, &spec));
    for drop in 0..plots.len() {
        let fewer: Vec<PlotBox> = plots
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != drop)
            .map(|(_, b)| b.clone())
            .collect();
        let some = table_map(&visibility_analysis(&fewer, &sites, &spec));
        for ((loc, cell), n) in &all {
            if cell.plot == plots[drop].id {
                continue;
            }
            assert!(
                some.get(&(*loc, *cell)).copied().unwrap_or(0) >= *n,
                "{cell:?} lost hits when a box was removed"
            );
        }
    }
}

#[test]
fn far_bottom_of_a_lone_plot_is_hidden() {
    let layout = FieldLayout {
        n_rows: 1,
        plots_per_row: 1,
        ..FieldLayout::engr()
    };
    let plots = digitize_field(&layout).unwrap();
    let b = &plots[0];
    let spec = ScannerSpec {
        angular_step: 0.5,
        ..ScannerSpec::default()
    };
    // scanner south of the plot, facing its y-min face
    let s = site(1, (b.min.x + b.max.x) / 2.0, b.min.y - 1.5);
    let table = visibility_analysis(&plots, &[s], &spec);
    let [nx, ny, nz] = b.grid_dims;
    let idx = |c: [usize; 3]| table.cells.iter().position(|x| x.cell == c).unwrap();
    for i in 0..nx {
        assert!(
            table.count(0, idx([i, 0, 0])) > 0,
            "near face cell {i} unseen"
        );
        assert_eq!(
            table.count(0, idx([i, ny - 1, 0])),
            0,
            "far bottom cell {i} seen"
        );
    }
    assert!(table.count(0, idx([nx / 2, 0, nz - 1])) > 0);
}
