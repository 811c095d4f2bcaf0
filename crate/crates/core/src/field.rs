//! Field digitization: plots become axis-aligned boxes split into voxel
//! cells, and the free-space corridor grid yields candidate scan sites.
//!
//! Frame convention: `x` runs along the rows (plot length), `y` across the
//! rows (plot width), `z` up. The layout origin is the south-west corner of
//! the field including headlands.

use std::fmt::Write as _;

use nalgebra::{Point2, Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A trailing voxel remainder smaller than this fraction of the voxel edge is
/// merged into the previous cell instead of opening a new one.
pub const SLIVER_MERGE_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldLayout {
    pub n_rows: usize,
    pub plots_per_row: usize,
    pub plot_length: f64,
    pub plot_width: f64,
    pub plot_height: f64,
    /// Center-to-center distance between adjacent rows.
    pub row_spacing: f64,
    /// Free gap between consecutive plots along a row.
    pub alley_width: f64,
    /// Unplanted border at both row ends, and at the field sides unless
    /// `side_headland_depth` is given.
    pub headland_depth: f64,
    #[serde(default)]
    pub side_headland_depth: Option<f64>,
    #[serde(default)]
    pub origin: [f64; 2],
    #[serde(default = "default_voxel")]
    pub voxel_size: [f64; 3],
}

fn default_voxel() -> [f64; 3] {
    [0.5, 0.5, 0.33]
}

impl FieldLayout {
    /// Wide-row engineered breeding field: 10 rows of 6 plots, 3 m long.
    pub fn engr() -> Self {
        FieldLayout {
            n_rows: 10,
            plots_per_row: 6,
            plot_length: 3.0,
            plot_width: 1.0,
            plot_height: 1.9,
            row_spacing: 1.8,
            alley_width: 1.5,
            headland_depth: 2.25,
            side_headland_depth: Some(1.4),
            origin: [0.0, 0.0],
            voxel_size: default_voxel(),
        }
    }

    /// Single-plant layout field: 10 rows of 6 plants, 1 m boxes.
    pub fn spl() -> Self {
        FieldLayout {
            plot_length: 1.0,
            headland_depth: 3.25,
            ..FieldLayout::engr()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("plot_length", self.plot_length),
            ("plot_width", self.plot_width),
            ("plot_height", self.plot_height),
            ("row_spacing", self.row_spacing),
            ("alley_width", self.alley_width),
            ("headland_depth", self.headland_depth),
            ("side_headland_depth", self.side_headland()),
            ("voxel_size[0]", self.voxel_size[0]),
            ("voxel_size[1]", self.voxel_size[1]),
            ("voxel_size[2]", self.voxel_size[2]),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(name, format!("must be > 0, got {v}")));
            }
        }
        if self.n_rows == 0 {
            return Err(Error::validation("n_rows", "must be at least 1"));
        }
        if self.plots_per_row == 0 {
            return Err(Error::validation("plots_per_row", "must be at least 1"));
        }
        if !self.origin.iter().all(|v| v.is_finite()) {
            return Err(Error::validation("origin", "must be finite"));
        }
        if self.row_spacing <= self.plot_width {
            return Err(Error::validation(
                "row_spacing",
                format!(
                    "must exceed plot_width ({}) to leave a gap between rows",
                    self.plot_width
                ),
            ));
        }
        let dims = [self.plot_length, self.plot_width, self.plot_height];
        for (axis, (v, d)) in self.voxel_size.iter().zip(dims).enumerate() {
            if *v > d {
                return Err(Error::validation(
                    format!("voxel_size[{axis}]"),
                    format!("{v} exceeds the plot dimension {d}"),
                ));
            }
        }
        Ok(())
    }

    pub fn side_headland(&self) -> f64 {
        self.side_headland_depth.unwrap_or(self.headland_depth)
    }

    /// Field extent including headlands, as (length along x, width along y).
    pub fn extent(&self) -> (f64, f64) {
        let n_plots = self.plots_per_row as f64;
        let length = 2.0 * self.headland_depth
            + n_plots * self.plot_length
            + (n_plots - 1.0) * self.alley_width;
        let width = 2.0 * self.side_headland()
            + (self.n_rows as f64 - 1.0) * self.row_spacing
            + self.plot_width;
        (length, width)
    }

    pub fn row_gap(&self) -> f64 {
        self.row_spacing - self.plot_width
    }

    /// Corridor center lines of the free-space grid.
    pub fn corridor_grid(&self) -> CorridorGrid {
        let [ox, oy] = self.origin;
        let (length, width) = self.extent();
        let hd = self.headland_depth;
        let sd = self.side_headland();

        let mut xs = Vec::with_capacity(self.plots_per_row + 1);
        xs.push(ox + hd / 2.0);
        for p in 1..self.plots_per_row {
            let alley_start =
                ox + hd + p as f64 * self.plot_length + (p - 1) as f64 * self.alley_width;
            xs.push(alley_start + self.alley_width / 2.0);
        }
        xs.push(ox + length - hd / 2.0);

        let mut ys = Vec::with_capacity(self.n_rows + 1);
        ys.push(oy + sd / 2.0);
        for r in 1..self.n_rows {
            let gap_start = oy + sd + (r - 1) as f64 * self.row_spacing + self.plot_width;
            ys.push(gap_start + self.row_gap() / 2.0);
        }
        ys.push(oy + width - sd / 2.0);

        CorridorGrid { xs, ys }
    }
}

/// Center lines of the navigable corridors.
///
/// `xs` are the lines of constant x (the two end headlands and every alley);
/// `ys` are the lines of constant y (the two side headlands and every gap
/// between rows). The first and last entry of each list are headlands.
#[derive(Clone, Debug, PartialEq)]
pub struct CorridorGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl CorridorGrid {
    pub fn nearest_x(&self, x: f64) -> (usize, f64) {
        nearest(&self.xs, x)
    }

    pub fn nearest_y(&self, y: f64) -> (usize, f64) {
        nearest(&self.ys, y)
    }

    /// Side headlands (constant-y borders) as (south, north).
    pub fn side_headlands(&self) -> (f64, f64) {
        (self.ys[0], *self.ys.last().unwrap())
    }

    /// Whether the point lies on a constant-x corridor (alley or end headland).
    pub fn on_x_line(&self, x: f64, tol: f64) -> bool {
        self.nearest_x(x).1 <= tol
    }

    pub fn on_y_line(&self, y: f64, tol: f64) -> bool {
        self.nearest_y(y).1 <= tol
    }
}

fn nearest(lines: &[f64], v: f64) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, l) in lines.iter().enumerate() {
        let d = (l - v).abs();
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlotId {
    pub row: usize,
    pub plot: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotBox {
    pub id: PlotId,
    pub min: Point3<f64>,
    pub max: Point3<f64>,
    pub voxel_size: Vector3<f64>,
    pub grid_dims: [usize; 3],
}

impl PlotBox {
    pub fn n_cells(&self) -> usize {
        self.grid_dims.iter().product()
    }

    /// Cell containing `p`, clamped to the grid so that points on the box
    /// boundary map to the adjacent interior cell.
    pub fn cell_at(&self, p: &Point3<f64>) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for axis in 0..3 {
            let f = ((p[axis] - self.min[axis]) / self.voxel_size[axis]).floor();
            let hi = (self.grid_dims[axis] - 1) as f64;
            idx[axis] = f.clamp(0.0, hi) as usize;
        }
        idx
    }

    /// Bounds of a cell; the last layer along each axis extends to the box
    /// boundary, whether truncated or widened by sliver merging.
    pub fn cell_bounds(&self, cell: [usize; 3]) -> (Point3<f64>, Point3<f64>) {
        let mut lo = self.min;
        let mut hi = self.min;
        for axis in 0..3 {
            lo[axis] = self.min[axis] + cell[axis] as f64 * self.voxel_size[axis];
            hi[axis] = if cell[axis] + 1 == self.grid_dims[axis] {
                self.max[axis]
            } else {
                lo[axis] + self.voxel_size[axis]
            };
        }
        (lo, hi)
    }

    pub fn cell_center(&self, cell: [usize; 3]) -> Point3<f64> {
        let (lo, hi) = self.cell_bounds(cell);
        nalgebra::center(&lo, &hi)
    }

    /// Horizontal distance from `p` to the box footprint (0 inside).
    pub fn footprint_distance(&self, p: &Point2<f64>) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        dx.hypot(dy)
    }
}

fn cell_count(extent: f64, voxel: f64) -> usize {
    ((extent / voxel - SLIVER_MERGE_FRACTION).ceil() as usize).max(1)
}

pub fn digitize_field(layout: &FieldLayout) -> Result<Vec<PlotBox>> {
    layout.validate()?;
    let voxel = Vector3::from(layout.voxel_size);
    let grid_dims = [
        cell_count(layout.plot_length, voxel.x),
        cell_count(layout.plot_width, voxel.y),
        cell_count(layout.plot_height, voxel.z),
    ];
    let [ox, oy] = layout.origin;
    let hd = layout.headland_depth;
    let sd = layout.side_headland();

    let mut plots = Vec::with_capacity(layout.n_rows * layout.plots_per_row);
    for row in 0..layout.n_rows {
        let y0 = oy + sd + row as f64 * layout.row_spacing;
        for plot in 0..layout.plots_per_row {
            let x0 = ox + hd + plot as f64 * (layout.plot_length + layout.alley_width);
            plots.push(PlotBox {
                id: PlotId { row, plot },
                min: Point3::new(x0, y0, 0.0),
                max: Point3::new(
                    x0 + layout.plot_length,
                    y0 + layout.plot_width,
                    layout.plot_height,
                ),
                voxel_size: voxel,
                grid_dims,
            });
        }
    }
    Ok(plots)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    pub plot: PlotId,
    pub cell: [usize; 3],
}

/// Dense numbering of every cell in a digitized field.
///
/// Plots are laid out in the order given; within a plot cells are ordered by
/// `(i, j, k)` with `k` fastest.
#[derive(Clone, Debug)]
pub struct CellIndex {
    offsets: Vec<usize>,
    dims: Vec<[usize; 3]>,
    ids: Vec<PlotId>,
    total: usize,
}

impl CellIndex {
    pub fn new(plots: &[PlotBox]) -> Self {
        let mut offsets = Vec::with_capacity(plots.len());
        let mut total = 0;
        for p in plots {
            offsets.push(total);
            total += p.n_cells();
        }
        CellIndex {
            offsets,
            dims: plots.iter().map(|p| p.grid_dims).collect(),
            ids: plots.iter().map(|p| p.id).collect(),
            total,
        }
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn flat(&self, plot_pos: usize, cell: [usize; 3]) -> usize {
        let [_, ny, nz] = self.dims[plot_pos];
        self.offsets[plot_pos] + (cell[0] * ny + cell[1]) * nz + cell[2]
    }

    pub fn cell_id(&self, flat: usize) -> CellId {
        let pos = self.offsets.partition_point(|&o| o <= flat) - 1;
        let [_, ny, nz] = self.dims[pos];
        let local = flat - self.offsets[pos];
        CellId {
            plot: self.ids[pos],
            cell: [local / (ny * nz), (local / nz) % ny, local % nz],
        }
    }

    pub fn plot_position(&self, flat: usize) -> usize {
        self.offsets.partition_point(|&o| o <= flat) - 1
    }
}

/// One CSV line per cell: plot ids, cell indices and the cell center.
pub fn cells_csv(plots: &[PlotBox]) -> String {
    let mut out = String::from("plot_row,plot_index,i,j,k,cx,cy,cz\n");
    for p in plots {
        let [nx, ny, nz] = p.grid_dims;
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    let c = p.cell_center([i, j, k]);
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{:.6},{:.6},{:.6}",
                        p.id.row, p.id.plot, i, j, k, c.x, c.y, c.z
                    );
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationKind {
    AlleyRowIntersection,
    HeadlandIntersection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanLocation {
    /// 1-based; 0 is reserved for the route origin.
    pub id: usize,
    pub position: Point2<f64>,
    pub kind: LocationKind,
    /// Distance to the nearest plot footprint.
    pub clearance: f64,
}

#[derive(Clone, Debug, Default)]
pub struct CandidateSet {
    pub locations: Vec<ScanLocation>,
    /// Grid intersections dropped for insufficient clearance.
    pub rejected: usize,
    pub diagnostic: Option<String>,
}

/// Intersections of the constant-y corridors (row gaps and side headlands)
/// with the constant-x corridors (alleys and end headlands), kept when their
/// distance to every plot footprint exceeds `min_scan_distance` and is at
/// least `robot_clearance`. Numbered row-major from the origin, starting at 1.
pub fn candidate_scan_locations(
    layout: &FieldLayout,
    min_scan_distance: f64,
    robot_clearance: f64,
) -> Result<CandidateSet> {
    if !(min_scan_distance >= 0.0) {
        return Err(Error::validation(
            "min_scan_distance",
            format!("must be >= 0, got {min_scan_distance}"),
        ));
    }
    let plots = digitize_field(layout)?;
    let grid = layout.corridor_grid();
    let mut set = CandidateSet::default();
    let last_x = grid.xs.len() - 1;
    let last_y = grid.ys.len() - 1;
    for (jy, &y) in grid.ys.iter().enumerate() {
        for (ix, &x) in grid.xs.iter().enumerate() {
            let p = Point2::new(x, y);
            let clearance = plots
                .iter()
                .map(|b| b.footprint_distance(&p))
                .fold(f64::INFINITY, f64::min);
            if clearance > min_scan_distance && clearance >= robot_clearance {
                let headland = ix == 0 || ix == last_x || jy == 0 || jy == last_y;
                set.locations.push(ScanLocation {
                    id: set.locations.len() + 1,
                    position: p,
                    kind: if headland {
                        LocationKind::HeadlandIntersection
                    } else {
                        LocationKind::AlleyRowIntersection
                    },
                    clearance,
                });
            } else {
                set.rejected += 1;
            }
        }
    }
    if set.locations.is_empty() {
        set.diagnostic = Some(format!(
            "all {} corridor intersections are within {min_scan_distance} m of a plot \
             (or closer than the robot clearance {robot_clearance} m)",
            set.rejected
        ));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plot(len: f64, wid: f64, h: f64) -> FieldLayout {
        FieldLayout {
            n_rows: 1,
            plots_per_row: 1,
            plot_length: len,
            plot_width: wid,
            plot_height: h,
            row_spacing: wid + 0.8,
            alley_width: 1.5,
            headland_depth: 2.0,
            side_headland_depth: None,
            origin: [0.0, 0.0],
            voxel_size: [0.5, 0.5, 0.33],
        }
    }

    #[test]
    fn example_plot_has_36_cells() {
        let boxes = digitize_field(&plot(3.0, 1.0, 1.0)).unwrap();
        assert_eq!(boxes[0].grid_dims, [6, 2, 3]);
        assert_eq!(boxes[0].n_cells(), 36);
    }

    #[test]
    fn tall_plot_uses_ceiling_layers() {
        let boxes = digitize_field(&plot(3.0, 1.0, 1.9)).unwrap();
        assert_eq!(boxes[0].grid_dims, [6, 2, 6]);
        let (lo, hi) = boxes[0].cell_bounds([0, 0, 5]);
        assert!((lo.z - 1.65).abs() < 1e-12);
        assert!((hi.z - 1.9).abs() < 1e-12);
    }

    #[test]
    fn engr_total_cells() {
        let boxes = digitize_field(&FieldLayout::engr()).unwrap();
        assert_eq!(boxes.len(), 60);
        assert_eq!(boxes.iter().map(PlotBox::n_cells).sum::<usize>(), 4320);
    }

    #[test]
    fn boxes_do_not_overlap() {
        let boxes = digitize_field(&FieldLayout::engr()).unwrap();
        for (a, b) in boxes.iter().zip(boxes.iter().skip(1)) {
            let sep_x = a.max.x <= b.min.x || b.max.x <= a.min.x;
            let sep_y = a.max.y <= b.min.y || b.max.y <= a.min.y;
            assert!(sep_x || sep_y, "{:?} overlaps {:?}", a.id, b.id);
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        let mut l = FieldLayout::engr();
        l.plot_width = -1.0;
        match digitize_field(&l) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "plot_width"),
            other => panic!("unexpected {other:?}"),
        }
        let mut l = FieldLayout::engr();
        l.row_spacing = 0.9;
        assert!(matches!(
            digitize_field(&l),
            Err(Error::Validation { field, .. }) if field == "row_spacing"
        ));
        let mut l = FieldLayout::engr();
        l.voxel_size[2] = 2.5;
        assert!(digitize_field(&l).is_err());
        let mut l = FieldLayout::engr();
        l.n_rows = 0;
        assert!(digitize_field(&l).is_err());
    }

    #[test]
    fn single_plot_has_four_corner_sites() {
        let set = candidate_scan_locations(&plot(3.0, 1.0, 1.9), 0.0, 0.0).unwrap();
        assert_eq!(set.locations.len(), 4);
        assert!(set
            .locations
            .iter()
            .all(|l| l.kind == LocationKind::HeadlandIntersection));
        let ids: Vec<_> = set.locations.iter().map(|l| l.id).collect();
        assert_eq!(ids, vec![1, 2, 3, 4]);
        // row-major from the origin corner
        assert!(set.locations[0].position.x < set.locations[1].position.x);
        assert!(set.locations[1].position.y < set.locations[2].position.y);
    }

    #[test]
    fn oversized_clearance_leaves_nothing() {
        let set = candidate_scan_locations(&FieldLayout::engr(), 50.0, 0.0).unwrap();
        assert!(set.locations.is_empty());
        assert_eq!(set.rejected, 77);
        assert!(set.diagnostic.is_some());
    }

    #[test]
    fn cell_lookup_clamps_boundaries() {
        let b = &digitize_field(&plot(3.0, 1.0, 1.9)).unwrap()[0];
        assert_eq!(b.cell_at(&b.max), [5, 1, 5]);
        assert_eq!(b.cell_at(&b.min), [0, 0, 0]);
        let p = Point3::new(b.min.x + 0.5, b.min.y + 0.25, 0.1);
        assert_eq!(b.cell_at(&p), [1, 0, 0]);
    }

    #[test]
    fn cell_index_round_trips() {
        let boxes = digitize_field(&FieldLayout::spl()).unwrap();
        let idx = CellIndex::new(&boxes);
        for flat in [0, 1, 23, 24, idx.len() - 1] {
            let id = idx.cell_id(flat);
            let pos = idx.plot_position(flat);
            assert_eq!(boxes[pos].id, id.plot);
            assert_eq!(idx.flat(pos, id.cell), flat);
        }
    }

    #[test]
    fn cells_csv_has_one_line_per_cell() {
        let boxes = digitize_field(&plot(3.0, 1.0, 1.0)).unwrap();
        let csv = cells_csv(&boxes);
        assert_eq!(csv.lines().count(), 37);
    }
}
