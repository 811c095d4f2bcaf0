//! Scanner ray generation, slab-method ray/box intersection and the
//! per-location visibility table.
//!
//! # Binary cache layout
//!
//! All integers little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8 | magic `TLSVIS\0\x01` |
//! | 8 | `u64` number of locations `L` |
//! | 8 | `u64` number of cells `C` |
//! | 8·L | `u64` location ids |
//! | 20·C | per cell five `u32`: plot row, plot index, i, j, k |
//! | 4·L·C | `u32` hit counts, row-major (location outer) |

use std::fmt::Write as _;

use nalgebra::{Point3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CellId, CellIndex, PlotBox, PlotId, ScanLocation};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn new(min: Point3<f64>, max: Point3<f64>) -> Self {
        Aabb { min, max }
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }
}

impl From<&PlotBox> for Aabb {
    fn from(b: &PlotBox) -> Self {
        Aabb::new(b.min, b.max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Point3<f64>,
    pub direction: Vector3<f64>,
}

impl Ray {
    /// Normalizes `direction`.
    pub fn new(origin: Point3<f64>, direction: Vector3<f64>) -> Self {
        Ray {
            origin,
            direction: direction.normalize(),
        }
    }

    pub fn at(&self, t: f64) -> Point3<f64> {
        self.origin + self.direction * t
    }
}

/// Parametric interval `[t_entry, t_exit]` over which the ray is inside the
/// box. `t_entry` is negative when the origin is inside. Returns `None` when
/// the slab intervals do not overlap or the box lies behind the origin.
pub fn ray_aabb_intersect(ray: &Ray, b: &Aabb) -> Option<(f64, f64)> {
    let mut t_min = f64::NEG_INFINITY;
    let mut t_max = f64::INFINITY;
    for axis in 0..3 {
        let o = ray.origin[axis];
        let d = ray.direction[axis];
        if d == 0.0 {
            // parallel to this slab: inside it for all t, or never
            if o < b.min[axis] || o > b.max[axis] {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d;
        let mut t0 = (b.min[axis] - o) * inv;
        let mut t1 = (b.max[axis] - o) * inv;
        if inv < 0.0 {
            std::mem::swap(&mut t0, &mut t1);
        }
        t_min = t_min.max(t0);
        t_max = t_max.min(t1);
        if t_min > t_max {
            return None;
        }
    }
    if t_max < 0.0 {
        return None;
    }
    Some((t_min, t_max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScannerSpec {
    /// Elevation range in degrees, both ends inclusive.
    pub v_start: f64,
    pub v_end: f64,
    /// Azimuth range in degrees, end exclusive.
    pub h_start: f64,
    pub h_end: f64,
    pub angular_step: f64,
    pub min_range: f64,
    pub max_range: f64,
    pub mount_height: f64,
}

impl Default for ScannerSpec {
    fn default() -> Self {
        ScannerSpec {
            v_start: -60.0,
            v_end: 90.0,
            h_start: 0.0,
            h_end: 360.0,
            angular_step: 0.36,
            min_range: 0.6,
            max_range: 70.0,
            mount_height: 1.0,
        }
    }
}

const ANGLE_EPS: f64 = 1e-9;

impl ScannerSpec {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.v_start,
            self.v_end,
            self.h_start,
            self.h_end,
            self.angular_step,
            self.min_range,
            self.max_range,
            self.mount_height,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("scanner", "all values must be finite"));
        }
        if self.v_start >= self.v_end {
            return Err(Error::validation("scanner.v_start", "must be below v_end"));
        }
        if self.h_start >= self.h_end {
            return Err(Error::validation("scanner.h_start", "must be below h_end"));
        }
        if self.angular_step <= 0.0 {
            return Err(Error::validation("scanner.angular_step", "must be > 0"));
        }
        if !(0.0 <= self.min_range && self.min_range < self.max_range) {
            return Err(Error::validation(
                "scanner.min_range",
                "need 0 <= min_range < max_range",
            ));
        }
        Ok(())
    }

    pub fn n_vertical(&self) -> usize {
        ((self.v_end - self.v_start) / self.angular_step + ANGLE_EPS).floor() as usize + 1
    }

    pub fn n_horizontal(&self) -> usize {
        ((self.h_end - self.h_start) / self.angular_step - ANGLE_EPS).ceil() as usize
    }

    pub fn n_rays(&self) -> usize {
        self.n_vertical() * self.n_horizontal()
    }

    /// Unit direction for grid angles `(vi, hi)` in a frame yawed by `heading`
    /// (radians, counter-clockwise from east).
    pub fn direction(&self, vi: usize, hi: usize, heading: f64) -> Vector3<f64> {
        let v = (self.v_start + vi as f64 * self.angular_step).to_radians();
        let h = (self.h_start + hi as f64 * self.angular_step).to_radians() + heading;
        let (sv, cv) = v.sin_cos();
        let (sh, ch) = h.sin_cos();
        Vector3::new(cv * ch, cv * sh, sv)
    }
}

/// Rays on the scanner's angular grid, elevation outer, azimuth inner.
pub fn generate_rays(
    spec: &ScannerSpec,
    origin: Point3<f64>,
    heading: f64,
) -> impl Iterator<Item = Ray> + '_ {
    let nh = spec.n_horizontal();
    (0..spec.n_vertical()).flat_map(move |vi| {
        (0..nh).map(move |hi| Ray {
            origin,
            direction: spec.direction(vi, hi, heading),
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HitRecord {
    pub cell: CellId,
    /// Position of the plot in the slice passed to the caster.
    pub plot_pos: usize,
    pub t_entry: f64,
    pub entry_point: Point3<f64>,
}

/// Nearest box entry along the ray, or `None` if it misses every box or the
/// first entry falls outside `[min_range, max_range]`. A ray starting inside
/// a box enters it at `t = 0`.
pub fn first_hit(
    plots: &[PlotBox],
    ray: &Ray,
    min_range: f64,
    max_range: f64,
) -> Option<HitRecord> {
    let mut best: Option<(usize, f64)> = None;
    for (pos, p) in plots.iter().enumerate() {
        if let Some((t0, _)) = ray_aabb_intersect(ray, &Aabb::new(p.min, p.max)) {
            let t = t0.max(0.0);
            if best.is_none_or(|(_, bt)| t < bt) {
                best = Some((pos, t));
            }
        }
    }
    let (pos, t) = best?;
    if t < min_range || t > max_range {
        return None;
    }
    let p = &plots[pos];
    let entry_point = ray.at(t);
    Some(HitRecord {
        cell: CellId {
            plot: p.id,
            cell: p.cell_at(&entry_point),
        },
        plot_pos: pos,
        t_entry: t,
        entry_point,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VisibilityTable {
    pub location_ids: Vec<usize>,
    pub cells: Vec<CellId>,
    counts: Vec<u32>,
}

impl VisibilityTable {
    pub fn zeros(location_ids: Vec<usize>, cells: Vec<CellId>) -> Self {
        let counts = vec![0; location_ids.len() * cells.len()];
        VisibilityTable {
            location_ids,
            cells,
            counts,
        }
    }

    pub fn from_counts(
        location_ids: Vec<usize>,
        cells: Vec<CellId>,
        counts: Vec<u32>,
    ) -> Result<Self> {
        if counts.len() != location_ids.len() * cells.len() {
            return Err(Error::Format(format!(
                "count matrix has {} entries, expected {}x{}",
                counts.len(),
                location_ids.len(),
                cells.len()
            )));
        }
        Ok(VisibilityTable {
            location_ids,
            cells,
            counts,
        })
    }

    pub fn n_locations(&self) -> usize {
        self.location_ids.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn count(&self, loc: usize, cell: usize) -> u32 {
        self.counts[loc * self.cells.len() + cell]
    }

    pub fn visible(&self, loc: usize, cell: usize) -> bool {
        self.count(loc, cell) > 0
    }

    pub fn row(&self, loc: usize) -> &[u32] {
        let n = self.cells.len();
        &self.counts[loc * n..(loc + 1) * n]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Number of cells visible from each location.
    pub fn scores(&self) -> Vec<usize> {
        (0..self.n_locations())
            .map(|l| self.row(l).iter().filter(|&&c| c > 0).count())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("location_id,plot_row,plot_index,i,j,k,hit_count\n");
        for (l, id) in self.location_ids.iter().enumerate() {
            for (c, cell) in self.cells.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    id,
                    cell.plot.row,
                    cell.plot.plot,
                    cell.cell[0],
                    cell.cell[1],
                    cell.cell[2],
                    self.count(l, c)
                );
            }
        }
        out
    }

    /// Parses the dense CSV written by [`VisibilityTable::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut location_ids: Vec<usize> = Vec::new();
        let mut cells: Vec<CellId> = Vec::new();
        let mut counts = Vec::new();
        let mut first_loc: Option<usize> = None;
        for (ln, line) in crate::data_lines(text).skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            let bad = |reason: &str| Error::Format(format!("visibility csv line {ln}: {reason}"));
            if f.len() != 7 {
                return Err(bad("expected 7 fields"));
            }
            let v: Vec<u64> = f
                .iter()
                .map(|s| s.trim().parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("non-integer field"))?;
            let loc = v[0] as usize;
            if location_ids.last() != Some(&loc) {
                location_ids.push(loc);
            }
            let cell = CellId {
                plot: PlotId {
                    row: v[1] as usize,
                    plot: v[2] as usize,
                },
                cell: [v[3] as usize, v[4] as usize, v[5] as usize],
            };
            if first_loc.is_none_or(|f| f == loc) {
                first_loc = Some(loc);
                cells.push(cell);
            }
            counts.push(u32::try_from(v[6]).map_err(|_| bad("count overflows u32"))?);
        }
        VisibilityTable::from_counts(location_ids, cells, counts)
    }

    pub const MAGIC: [u8; 8] = *b"TLSVIS\0\x01";

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(
            24 + 8 * self.n_locations() + 20 * self.n_cells() + 4 * self.counts.len(),
        );
        out.extend_from_slice(&Self::MAGIC);
        out.extend_from_slice(&(self.n_locations() as u64).to_le_bytes());
        out.extend_from_slice(&(self.n_cells() as u64).to_le_bytes());
        for id in &self.location_ids {
            out.extend_from_slice(&(*id as u64).to_le_bytes());
        }
        for c in &self.cells {
            for v in [c.plot.row, c.plot.plot, c.cell[0], c.cell[1], c.cell[2]] {
                out.extend_from_slice(&(v as u32).to_le_bytes());
            }
        }
        for c in &self.counts {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let short = || Error::Format("visibility cache is truncated".into());
        if bytes.len() < 24 || bytes[..8] != Self::MAGIC {
            return Err(Error::Format("not a visibility cache (bad magic)".into()));
        }
        let u64_at = |o: usize| -> Result<u64> {
            bytes
                .get(o..o + 8)
                .map(|b| u64::from_le_bytes(b.try_into().unwrap()))
                .ok_or_else(short)
        };
        let u32_at = |o: usize| -> Result<u32> {
            bytes
                .get(o..o + 4)
                .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
                .ok_or_else(short)
        };
        let n_loc = u64_at(8)? as usize;
        let n_cells = u64_at(16)? as usize;
        let expected = 24 + 8 * n_loc + 20 * n_cells + 4 * n_loc * n_cells;
        if bytes.len() != expected {
            return Err(Error::Format(format!(
                "visibility cache has {} bytes, header implies {expected}",
                bytes.len()
            )));
        }
        let mut o = 24;
        let mut location_ids = Vec::with_capacity(n_loc);
        for _ in 0..n_loc {
            location_ids.push(u64_at(o)? as usize);
            o += 8;
        }
        let mut cells = Vec::with_capacity(n_cells);
        for _ in 0..n_cells {
            let mut v = [0usize; 5];
            for x in v.iter_mut() {
                *x = u32_at(o)? as usize;
                o += 4;
            }
            cells.push(CellId {
                plot: PlotId {
                    row: v[0],
                    plot: v[1],
                },
                cell: [v[2], v[3], v[4]],
            });
        }
        let mut counts = Vec::with_capacity(n_loc * n_cells);
        for _ in 0..n_loc * n_cells {
            counts.push(u32_at(o)?);
            o += 4;
        }
        VisibilityTable::from_counts(location_ids, cells, counts)
    }
}

fn location_counts(
    plots: &[PlotBox],
    index: &CellIndex,
    loc: &ScanLocation,
    spec: &ScannerSpec,
) -> Vec<u32> {
    let mut counts = vec![0u32; index.len()];
    let origin = Point3::new(loc.position.x, loc.position.y, spec.mount_height);
    for ray in generate_rays(spec, origin, 0.0) {
        if let Some(hit) = first_hit(plots, &ray, spec.min_range, spec.max_range) {
            counts[index.flat(hit.plot_pos, hit.cell.cell)] += 1;
        }
    }
    counts
}

/// Hit counts of every cell from every location. Locations are processed in
/// parallel; rows are assembled in input order.
pub fn visibility_analysis(
    plots: &[PlotBox],
    locations: &[ScanLocation],
    spec: &ScannerSpec,
) -> VisibilityTable {
    let index = CellIndex::new(plots);
    let cells: Vec<CellId> = (0..index.len()).map(|f| index.cell_id(f)).collect();
    let ids = locations.iter().map(|l| l.id).collect();
    if plots.is_empty() {
        return VisibilityTable::zeros(ids, cells);
    }
    let rows: Vec<Vec<u32>> = locations
        .par_iter()
        .map(|loc| location_counts(plots, &index, loc, spec))
        .collect();
    VisibilityTable {
        location_ids: ids,
        cells,
        counts: rows.concat(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_box() -> Aabb {
        Aabb::new(Point3::new(1.0, -1.0, -1.0), Point3::new(2.0, 1.0, 1.0))
    }

    #[test]
    fn axis_aligned_entry_exit() {
        let r = Ray::new(Point3::origin(), Vector3::x());
        assert_eq!(ray_aabb_intersect(&r, &unit_box()), Some((1.0, 2.0)));
    }

    #[test]
    fn parallel_miss() {
        let r = Ray::new(Point3::new(0.0, 5.0, 0.0), Vector3::x());
        assert_eq!(ray_aabb_intersect(&r, &unit_box()), None);
    }

    #[test]
    fn origin_inside() {
        let b = Aabb::new(Point3::new(-1.0, -1.0, -1.0), Point3::new(1.0, 1.0, 1.0));
        let r = Ray::new(Point3::origin(), Vector3::x());
        let (t0, t1) = ray_aabb_intersect(&r, &b).unwrap();
        assert!(t0 < 0.0);
        assert_eq!(t1, 1.0);
    }

    #[test]
    fn box_behind_origin() {
        let r = Ray::new(Point3::new(3.0, 0.0, 0.0), Vector3::x());
        assert_eq!(ray_aabb_intersect(&r, &unit_box()), None);
    }

    #[test]
    fn negative_direction() {
        let r = Ray::new(Point3::new(3.0, 0.0, 0.0), -Vector3::x());
        assert_eq!(ray_aabb_intersect(&r, &unit_box()), Some((1.0, 2.0)));
    }

    #[test]
    fn default_ray_count() {
        let spec = ScannerSpec::default();
        assert_eq!(spec.n_vertical(), 417);
        assert_eq!(spec.n_horizontal(), 1000);
        assert_eq!(spec.n_rays(), 417_000);
    }

    #[test]
    fn coarse_grid_directions() {
        let spec = ScannerSpec {
            v_start: 0.0,
            v_end: 90.0,
            angular_step: 90.0,
            ..ScannerSpec::default()
        };
        let dirs: Vec<_> = generate_rays(&spec, Point3::origin(), 0.0)
            .map(|r| r.direction)
            .collect();
        let expect = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
        ];
        assert_eq!(dirs.len(), 8);
        for (d, e) in dirs.iter().zip(expect) {
            for a in 0..3 {
                assert!((d[a] - e[a]).abs() < 1e-12, "{d:?} vs {e:?}");
            }
        }
    }

    #[test]
    fn heading_rotates_azimuth() {
        let spec = ScannerSpec {
            v_start: -30.0,
            v_end: 30.0,
            angular_step: 30.0,
            ..ScannerSpec::default()
        };
        let h = std::f64::consts::FRAC_PI_2;
        for (a, b) in generate_rays(&spec, Point3::origin(), 0.0).zip(generate_rays(
            &spec,
            Point3::origin(),
            h,
        )) {
            assert_relative_eq!(b.direction.x, -a.direction.y, epsilon = 1e-12);
            assert_relative_eq!(b.direction.y, a.direction.x, epsilon = 1e-12);
            assert_relative_eq!(b.direction.z, a.direction.z, epsilon = 1e-12);
            assert_relative_eq!(a.direction.norm(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn invalid_spec() {
        let d = ScannerSpec::default;
        assert!(ScannerSpec {
            angular_step: 0.0,
            ..d()
        }
        .validate()
        .is_err());
        assert!(ScannerSpec {
            v_end: -90.0,
            ..d()
        }
        .validate()
        .is_err());
        assert!(ScannerSpec {
            min_range: 80.0,
            ..d()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn empty_field_gives_zero_table() {
        let loc = ScanLocation {
            id: 1,
            position: nalgebra::Point2::new(0.0, 0.0),
            kind: crate::field::LocationKind::HeadlandIntersection,
            clearance: 1.0,
        };
        let t = visibility_analysis(&[], &[loc], &ScannerSpec::default());
        assert_eq!(t.n_locations(), 1);
        assert_eq!(t.n_cells(), 0);
        assert!(t.counts().iter().all(|&c| c == 0));
    }

    #[test]
    fn binary_cache_rejects_garbage() {
        assert!(VisibilityTable::from_bytes(b"nope").is_err());
        let t = VisibilityTable::zeros(vec![1, 2], vec![]);
        let mut bytes = t.to_bytes();
        bytes.push(0);
        assert!(VisibilityTable::from_bytes(&bytes).is_err());
    }
}
