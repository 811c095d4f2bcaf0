//! Synthetic scans, pose-based and cloud-to-cloud registration, and the
//! point/target error statistics used to score a multi-scan survey.

use std::fmt::{self, Write as _};
use std::path::Path;

use nalgebra::{
    Isometry3, Matrix3, Matrix4, Matrix6, Point3, Translation3, UnitQuaternion, Vector3, Vector4,
    Vector6,
};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::field::PlotBox;
use crate::geometry::Pose;
use crate::raycast::{ray_aabb_intersect, Aabb, Ray, ScannerSpec};
use crate::spatial::KdTree;

/// Scanner origin and attitude; roll and pitch come from the tilt
/// compensator, yaw from the platform heading.
pub type ScanPose = Pose;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    ScannerLocal,
    World,
}

impl Frame {
    fn name(self) -> &'static str {
        match self {
            Frame::ScannerLocal => "scanner_local",
            Frame::World => "world",
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3<f64>>,
    pub frame: Frame,
    pub source_location_id: Option<usize>,
    /// Surface each point came from: 0 for crop, `k` for sphere target `k-1`.
    /// Empty when unknown (e.g. loaded from text).
    pub labels: Vec<u16>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3<f64>>, frame: Frame) -> Self {
        PointCloud {
            points,
            frame,
            source_location_id: None,
            labels: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn transformed(&self, iso: &Isometry3<f64>) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|p| iso * p).collect(),
            ..self.clone()
        }
    }

    /// One point per line, `x y z` in meters with 6 decimals.
    pub fn to_ascii(&self) -> String {
        let mut out = String::with_capacity(self.points.len() * 36);
        for p in &self.points {
            let _ = writeln!(out, "{:.6} {:.6} {:.6}", p.x, p.y, p.z);
        }
        out
    }

    pub fn from_ascii(text: &str, frame: Frame, path: &Path) -> Result<Self> {
        let mut points = Vec::new();
        for (ln, line) in crate::data_lines(text) {
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: ln,
                    reason: "expected three numbers".into(),
                })?;
            if v.len() != 3 || v.iter().any(|c| !c.is_finite()) {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: ln,
                    reason: "expected three finite numbers".into(),
                });
            }
            points.push(Point3::new(v[0], v[1], v[2]));
        }
        Ok(PointCloud::new(points, frame))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sphere {
    pub center: Point3<f64>,
    pub radius: f64,
}

/// Entry distance of a ray into a sphere, if any.
fn ray_sphere(ray: &Ray, s: &Sphere) -> Option<f64> {
    let oc = ray.origin - s.center;
    let b = oc.dot(&ray.direction);
    let c = oc.norm_squared() - s.radius * s.radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = -b - sq;
    let t1 = -b + sq;
    if t1 < 0.0 {
        None
    } else {
        Some(t0.max(0.0))
    }
}

/// Casts the scanner's rays from `pose` against the scene's plot boxes,
/// sphere targets and ground. Each ray's nearest surface within range yields one point at the
/// true range plus Gaussian noise, expressed in the scanner frame.
/// Everything a synthesized scan can hit.
#[derive(Clone, Copy, Debug)]
pub struct Scene<'a> {
    pub plots: &'a [PlotBox],
    pub spheres: &'a [Sphere],
    /// Optional ground slab, hit like a plot.
    pub ground: Option<Aabb>,
}

impl<'a> Scene<'a> {
    pub fn new(plots: &'a [PlotBox], spheres: &'a [Sphere]) -> Self {
        Scene {
            plots,
            spheres,
            ground: None,
        }
    }

    /// Adds a 0.5 m thick slab whose top face is `z = 0` over `[x0, x1] x [y0, y1]`.
    pub fn with_ground(mut self, x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        self.ground = Some(Aabb::new(
            Point3::new(x0, y0, -0.5),
            Point3::new(x1, y1, 0.0),
        ));
        self
    }
}

pub fn synthesize_scan(
    scene: &Scene,
    pose: &ScanPose,
    spec: &ScannerSpec,
    noise_sigma: f64,
    seed: u64,
) -> PointCloud {
    let rot = pose.rotation();
    let origin = Point3::from(pose.translation);
    let spheres = scene.spheres;
    let boxes: Vec<Aabb> = scene
        .plots
        .iter()
        .map(Aabb::from)
        .chain(scene.ground)
        .collect();
    let nh = spec.n_horizontal();
    let rows: Vec<(Vec<Point3<f64>>, Vec<u16>)> = (0..spec.n_vertical())
        .into_par_iter()
        .map(|vi| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ (vi as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let normal = Normal::new(0.0, noise_sigma.max(0.0)).unwrap();
            let mut pts = Vec::new();
            let mut labels = Vec::new();
            for hi in 0..nh {
                let local_dir = spec.direction(vi, hi, 0.0);
                let ray = Ray {
                    origin,
                    direction: rot * local_dir,
                };
                let mut best: Option<(f64, u16)> = None;
                for b in &boxes {
                    if let Some((t0, _)) = ray_aabb_intersect(&ray, b) {
                        let t = t0.max(0.0);
                        if best.is_none_or(|(bt, _)| t < bt) {
                            best = Some((t, 0));
                        }
                    }
                }
                for (k, s) in spheres.iter().enumerate() {
                    if let Some(t) = ray_sphere(&ray, s) {
                        if best.is_none_or(|(bt, _)| t < bt) {
                            best = Some((t, k as u16 + 1));
                        }
                    }
                }
                let Some((t, label)) = best else { continue };
                if t < spec.min_range || t > spec.max_range {
                    continue;
                }
                let r = if noise_sigma > 0.0 {
                    t + normal.sample(&mut rng)
                } else {
                    t
                };
                pts.push(Point3::from(local_dir * r));
                labels.push(label);
            }
            (pts, labels)
        })
        .collect();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (p, l) in rows {
        points.extend(p);
        labels.extend(l);
    }
    PointCloud {
        points,
        frame: Frame::ScannerLocal,
        source_location_id: None,
        labels,
    }
}

/// Places a scanner-frame cloud in the world frame with `pose`.
pub fn register_from_pose(cloud: &PointCloud, pose: &ScanPose) -> Result<PointCloud> {
    if cloud.frame != Frame::ScannerLocal {
        return Err(Error::Frame {
            expected: Frame::ScannerLocal.name(),
            found: cloud.frame.name(),
        });
    }
    let mut out = cloud.transformed(&pose.isometry());
    out.frame = Frame::World;
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct IcpResult {
    /// Correction to apply on top of the source's current placement.
    pub transform: Isometry3<f64>,
    pub refined: PointCloud,
    pub stages: Vec<IcpStage>,
    /// Matches within the final gate.
    pub correspondences: usize,
}

impl IcpResult {
    pub fn final_rms(&self) -> f64 {
        self.stages
            .last()
            .and_then(|s| s.rms_history.last())
            .copied()
            .unwrap_or(f64::NAN)
    }

    pub fn iterations(&self) -> usize {
        self.stages.iter().map(|s| s.rms_history.len() - 1).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IcpStage {
    pub gate: f64,
    /// Truncated RMS after each accepted iteration; the first entry is the
    /// alignment the stage started from.
    pub rms_history: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IcpParams {
    pub max_correspondence: f64,
    /// Smallest gate of the coarse-to-fine schedule.
    pub min_correspondence: f64,
    /// Per stage.
    pub max_iters: usize,
    /// Source points used for matching; larger clouds are strided down.
    pub max_source_points: usize,
    pub rms_tolerance: f64,
    pub metric: IcpMetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcpMetric {
    PointToPoint,
    /// Residuals along reference normals estimated from the nearest
    /// `NORMAL_NEIGHBORS` reference points.
    PointToPlane,
}

pub const NORMAL_NEIGHBORS: usize = 10;
const DAMPING: f64 = 1e-2;

impl Default for IcpParams {
    fn default() -> Self {
        IcpParams {
            max_correspondence: 0.30,
            min_correspondence: 0.03,
            max_iters: 50,
            max_source_points: 20_000,
            rms_tolerance: 1e-6,
            metric: IcpMetric::PointToPlane,
        }
    }
}

/// Least-squares rigid transform mapping `src[i]` onto `dst[i]` (Kabsch).
pub fn best_rigid_transform(src: &[Point3<f64>], dst: &[Point3<f64>]) -> Isometry3<f64> {
    let n = src.len() as f64;
    let cs = src.iter().map(|p| p.coords).sum::<Vector3<f64>>() / n;
    let cd = dst.iter().map(|p| p.coords).sum::<Vector3<f64>>() / n;
    let mut h = Matrix3::zeros();
    for (s, d) in src.iter().zip(dst) {
        h += (s.coords - cs) * (d.coords - cd).transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.unwrap();
    let v_t = svd.v_t.unwrap();
    let mut d = Matrix3::identity();
    if (v_t.transpose() * u.transpose()).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let r = v_t.transpose() * d * u.transpose();
    let rot = UnitQuaternion::from_matrix(&r);
    let t = cd - rot * cs;
    Isometry3::from_parts(Translation3::from(t), rot)
}

/// Nearest reference point within the gate for each source point.
fn matches(tree: &KdTree, src: &[Point3<f64>], gate_sq: f64) -> Vec<Option<usize>> {
    src.par_iter()
        .map(|p| {
            tree.nearest(p)
                .filter(|(_, d)| *d <= gate_sq)
                .map(|(j, _)| j)
        })
        .collect()
}

/// Unit normal of the plane fitted to the neighbors of reference point `j`.
fn reference_normal(tree: &KdTree, j: usize) -> Vector3<f64> {
    let nbrs = tree.k_nearest(tree.point(j), NORMAL_NEIGHBORS);
    let n = nbrs.len() as f64;
    let mean = nbrs
        .iter()
        .fold(Vector3::zeros(), |a, (i, _)| a + tree.point(*i).coords)
        / n;
    let cov = nbrs.iter().fold(Matrix3::zeros(), |a, (i, _)| {
        let d = tree.point(*i).coords - mean;
        a + d * d.transpose()
    });
    let eig = cov.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    eig.eigenvectors.column(k).normalize()
}

struct Matcher<'a> {
    tree: &'a KdTree,
    metric: IcpMetric,
    normals: Vec<Option<Vector3<f64>>>,
}

impl Matcher<'_> {
    /// Pairs whose residual is within the gate and the RMS over all source
    /// points with each residual truncated at the gate. Nearest neighbors
    /// are searched out to `reach`, which for point-to-plane may exceed the
    /// gate since a sparse reference leaves points far from any sample yet
    /// close to its surface.
    fn pairs(&mut self, src: &[Point3<f64>], gate: f64, reach: f64) -> (Vec<(usize, usize)>, f64) {
        let reach = if self.metric == IcpMetric::PointToPlane {
            reach.max(gate)
        } else {
            gate
        };
        let found = matches(self.tree, src, reach * reach);
        if self.metric == IcpMetric::PointToPlane {
            let mut missing: Vec<usize> = found
                .iter()
                .flatten()
                .copied()
                .filter(|&j| self.normals[j].is_none())
                .collect();
            missing.sort_unstable();
            missing.dedup();
            let computed: Vec<Vector3<f64>> = missing
                .par_iter()
                .map(|&j| reference_normal(self.tree, j))
                .collect();
            for (j, n) in missing.into_iter().zip(computed) {
                self.normals[j] = Some(n);
            }
        }
        let gate_sq = gate * gate;
        let mut pairs = Vec::new();
        let mut sum = 0.0;
        for (i, f) in found.iter().enumerate() {
            let e2 = f.map_or(f64::INFINITY, |j| self.residual(src, i, j).powi(2));
            if e2 <= gate_sq {
                pairs.push((i, f.unwrap_or_default()));
                sum += e2;
            } else {
                sum += gate_sq;
            }
        }
        let rms = if src.is_empty() {
            f64::INFINITY
        } else {
            (sum / src.len() as f64).sqrt()
        };
        (pairs, rms)
    }

    fn residual(&self, src: &[Point3<f64>], i: usize, j: usize) -> f64 {
        let d = src[i] - self.tree.point(j);
        match self.metric {
            IcpMetric::PointToPoint => d.norm(),
            IcpMetric::PointToPlane => d.dot(&self.normals[j].unwrap_or_else(Vector3::z)),
        }
    }

    fn step(&self, src: &[Point3<f64>], pairs: &[(usize, usize)]) -> Isometry3<f64> {
        let kabsch = || {
            let a: Vec<Point3<f64>> = pairs.iter().map(|&(i, _)| src[i]).collect();
            let b: Vec<Point3<f64>> = pairs.iter().map(|&(_, j)| *self.tree.point(j)).collect();
            best_rigid_transform(&a, &b)
        };
        if self.metric == IcpMetric::PointToPoint {
            return kabsch();
        }
        // linearized small-angle least squares on plane distances, rotating
        // about the centroid of the matched source points
        let c = pairs
            .iter()
            .fold(Vector3::zeros(), |a, &(i, _)| a + src[i].coords)
            / pairs.len() as f64;
        let mut ata = Matrix6::zeros();
        let mut atb = Vector6::zeros();
        for &(i, j) in pairs {
            let n = self.normals[j].unwrap_or_else(Vector3::z);
            let arm = (src[i].coords - c).cross(&n);
            let a = Vector6::new(arm.x, arm.y, arm.z, n.x, n.y, n.z);
            let e = (src[i] - self.tree.point(j)).dot(&n);
            ata += a * a.transpose();
            atb -= a * e;
        }
        // ridge damping, per block, holds weakly observed directions
        // (typically height among vertical faces) at the current estimate
        let rot_ridge = DAMPING * (ata[(0, 0)] + ata[(1, 1)] + ata[(2, 2)]) / 3.0;
        let trans_ridge = DAMPING * (ata[(3, 3)] + ata[(4, 4)] + ata[(5, 5)]) / 3.0;
        for k in 0..3 {
            ata[(k, k)] += rot_ridge;
            ata[(k + 3, k + 3)] += trans_ridge;
        }
        match ata.cholesky() {
            Some(ch) => {
                let x = ch.solve(&atb);
                let rot = UnitQuaternion::from_scaled_axis(Vector3::new(x[0], x[1], x[2]));
                let t = Vector3::new(x[3], x[4], x[5]) + c - rot * c;
                Isometry3::from_parts(Translation3::from(t), rot)
            }
            None => kabsch(),
        }
    }
}

/// Iterative closest point with gated correspondences.
///
/// The gate starts at `max_correspondence` and is halved after each stage
/// converges until it would drop below `min_correspondence`. Within a stage
/// the tracked RMS is truncated at the gate, every source point contributing
/// `min(residual, gate)`, and an update that would raise it is rejected, so
/// the stage's history never increases.
pub fn c2c_refine(
    source: &PointCloud,
    reference: &PointCloud,
    params: &IcpParams,
) -> Result<IcpResult> {
    if source.frame != Frame::World || reference.frame != Frame::World {
        let found = if source.frame != Frame::World {
            source.frame
        } else {
            reference.frame
        };
        return Err(Error::Frame {
            expected: Frame::World.name(),
            found: found.name(),
        });
    }
    if source.is_empty() || reference.is_empty() {
        return Err(Error::EmptyInput);
    }
    let tree = KdTree::new(&reference.points);
    let mut matcher = Matcher {
        tree: &tree,
        metric: params.metric,
        normals: vec![None; tree.len()],
    };
    let stride = source.len().div_ceil(params.max_source_points.max(1));
    let base: Vec<Point3<f64>> = source.points.iter().step_by(stride).copied().collect();

    let mut total = Isometry3::identity();
    let mut current = base.clone();
    let mut stages = Vec::new();
    let mut gate = params.max_correspondence;
    let mut correspondences = 0;
    loop {
        let (mut pairs, mut rms) = matcher.pairs(&current, gate, params.max_correspondence);
        if pairs.len() < 3 {
            if stages.is_empty() {
                return Err(Error::NoOverlap { gate });
            }
            break;
        }
        let mut history = vec![rms];
        for _ in 0..params.max_iters {
            let candidate = matcher.step(&current, &pairs) * total;
            let moved: Vec<Point3<f64>> = base.iter().map(|p| candidate * p).collect();
            let (np, nrms) = matcher.pairs(&moved, gate, params.max_correspondence);
            if np.len() < 3 || nrms > rms {
                break;
            }
            total = candidate;
            current = moved;
            let change = rms - nrms;
            pairs = np;
            rms = nrms;
            history.push(rms);
            if change < params.rms_tolerance {
                break;
            }
        }
        correspondences = pairs.len();
        stages.push(IcpStage {
            gate,
            rms_history: history,
        });
        gate /= 2.0;
        if gate < params.min_correspondence {
            break;
        }
    }
    let mut refined = source.transformed(&total);
    refined.frame = Frame::World;
    Ok(IcpResult {
        transform: total,
        refined,
        stages,
        correspondences,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HausdorffResult {
    /// Largest nearest-neighbor distance from source into reference.
    pub d_h: f64,
    pub distances: Vec<f64>,
    /// Signed offset from each source point to its nearest reference point.
    pub offsets: Vec<Vector3<f64>>,
}

impl HausdorffResult {
    pub fn mean(&self) -> f64 {
        self.distances.iter().sum::<f64>() / self.distances.len() as f64
    }

    pub fn sd(&self) -> f64 {
        crate::nav::SeriesStats::of(&self.distances).sd
    }
}

/// Directed Hausdorff distance from `source` to `reference` using a k-d tree.
pub fn hausdorff_distance(source: &PointCloud, reference: &PointCloud) -> Result<HausdorffResult> {
    if source.is_empty() || reference.is_empty() {
        return Err(Error::EmptyInput);
    }
    if source.frame != reference.frame {
        return Err(Error::Frame {
            expected: reference.frame.name(),
            found: source.frame.name(),
        });
    }
    let tree = KdTree::new(&reference.points);
    let nn: Vec<(f64, Vector3<f64>)> = source
        .points
        .par_iter()
        .map(|p| {
            let (j, d2) = tree.nearest(p).unwrap();
            (d2.sqrt(), tree.point(j) - p)
        })
        .collect();
    let d_h = nn.iter().map(|(d, _)| *d).fold(0.0, f64::max);
    Ok(HausdorffResult {
        d_h,
        distances: nn.iter().map(|(d, _)| *d).collect(),
        offsets: nn.into_iter().map(|(_, o)| o).collect(),
    })
}

/// Algebraic least-squares sphere followed by one Gauss-Newton step on the
/// geometric residuals. Needs at least four non-coplanar points.
pub fn fit_sphere(points: &[Point3<f64>]) -> Option<Sphere> {
    if points.len() < 4 {
        return None;
    }
    // |p|^2 = 2 c·p + (r^2 - |c|^2)
    let mut ata = Matrix4::zeros();
    let mut atb = Vector4::zeros();
    for p in points {
        let row = Vector4::new(2.0 * p.x, 2.0 * p.y, 2.0 * p.z, 1.0);
        ata += row * row.transpose();
        atb += row * p.coords.norm_squared();
    }
    let sol = ata.lu().solve(&atb)?;
    let center = Point3::new(sol[0], sol[1], sol[2]);
    let r2 = sol[3] + center.coords.norm_squared();
    if !(r2 > 0.0) {
        return None;
    }
    let mut s = Sphere {
        center,
        radius: r2.sqrt(),
    };
    // Gauss-Newton on r_i = |p_i - c| - R over (c, R)
    let mut jtj = Matrix4::zeros();
    let mut jtr = Vector4::zeros();
    for p in points {
        let d = p - s.center;
        let dist = d.norm();
        if dist == 0.0 {
            continue;
        }
        let u = d / dist;
        let j = Vector4::new(-u.x, -u.y, -u.z, -1.0);
        let res = dist - s.radius;
        jtj += j * j.transpose();
        jtr += j * res;
    }
    if let Some(delta) = jtj.lu().solve(&(-jtr)) {
        s.center += Vector3::new(delta[0], delta[1], delta[2]);
        s.radius += delta[3];
    }
    Some(s)
}

/// Minimum supporting points for a sphere target to be scored.
pub const MIN_SPHERE_POINTS: usize = 20;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub bin_width: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Fixed-width bins over `[lo, hi]`; values outside go to the end bins so
    /// the total mass equals the number of values.
    pub fn build(values: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let w = (hi - lo) / bins as f64;
        let mut counts = vec![0; bins];
        for v in values {
            let b = ((v - lo) / w).floor().clamp(0.0, (bins - 1) as f64) as usize;
            counts[b] += 1;
        }
        Histogram {
            lo,
            bin_width: w,
            counts,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetError {
    pub scan: usize,
    pub target: usize,
    pub points: usize,
    /// Fitted center error in meters; `None` when too few points.
    pub error: Option<Vector3<f64>>,
}

/// Registration quality against a reference registration. Lengths in cm.
#[derive(Clone, Debug, PartialEq)]
pub struct RegistrationReport {
    pub label: String,
    pub target_mean_error: f64,
    pub target_horizontal_error: f64,
    pub target_vertical_error: f64,
    pub target_max_error: f64,
    pub targets: Vec<TargetError>,
    /// Largest per-scan mean point error.
    pub max_point_error: f64,
    /// Mean over scans of the per-scan mean point error.
    pub mean_point_error: f64,
    pub per_scan_point_error: Vec<f64>,
    pub hausdorff: f64,
    pub hausdorff_mean: f64,
    pub hausdorff_sd: f64,
    pub histogram_distance: Histogram,
    pub histogram_dx: Histogram,
    pub histogram_dy: Histogram,
    pub histogram_dz: Histogram,
    pub axis_means: [f64; 3],
    pub axis_sds: [f64; 3],
    pub n_points: usize,
}

impl RegistrationReport {
    pub fn csv_header() -> &'static str {
        "method,target_mean_cm,target_horizontal_cm,target_vertical_cm,target_max_cm,max_point_error_cm,mean_point_error_cm,hausdorff_cm,hausdorff_mean_cm,hausdorff_sd_cm,n_points"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{}",
            self.label,
            self.target_mean_error,
            self.target_horizontal_error,
            self.target_vertical_error,
            self.target_max_error,
            self.max_point_error,
            self.mean_point_error,
            self.hausdorff,
            self.hausdorff_mean,
            self.hausdorff_sd,
            self.n_points
        )
    }

    /// Side-by-side table of target and scan-point statistics.
    pub fn summary_table(reports: &[&RegistrationReport]) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<22} | {:>10} {:>10} {:>10} | {:>10} {:>10} | {:>10} {:>8}",
            "Registration method",
            "Mean",
            "Horiz.",
            "Vert.",
            "Max pt",
            "Mean pt",
            "Hausd.mean",
            "SD"
        );
        let _ = writeln!(out, "{}", "-".repeat(104));
        for r in reports {
            let _ = writeln!(
                out,
                "{:<22} | {:>10.2} {:>10.2} {:>10.2} | {:>10.2} {:>10.2} | {:>10.2} {:>8.2}",
                r.label,
                r.target_mean_error,
                r.target_horizontal_error,
                r.target_vertical_error,
                r.max_point_error,
                r.mean_point_error,
                r.hausdorff_mean,
                r.hausdorff_sd
            );
        }
        let _ = writeln!(
            out,
            "(all values in cm; target columns: sphere statistics, pt: scan point statistics)"
        );
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReportParams {
    /// Points drawn per scan for the point and Hausdorff statistics.
    pub subsample: usize,
    pub seed: u64,
}

impl Default for ReportParams {
    fn default() -> Self {
        ReportParams {
            subsample: 10_000,
            seed: 0,
        }
    }
}

/// Scores scans registered with `poses` against the same scans placed with
/// `reference_poses`.
///
/// `scans` are scanner-frame clouds (with labels for sphere points when
/// known); `sphere_truth` are target centers in the reference frame.
/// Point errors use known correspondences: each subsampled point is compared
/// with itself under the reference placement. The Hausdorff statistics
/// compare the merged subsampled cloud with the merged reference cloud.
pub fn registration_report(
    label: &str,
    scans: &[(PointCloud, ScanPose)],
    sphere_truth: &[Point3<f64>],
    reference_poses: &[ScanPose],
    params: &ReportParams,
) -> Result<RegistrationReport> {
    if scans.is_empty() || scans.len() != reference_poses.len() {
        return Err(Error::InsufficientData(
            "need one reference pose per scan".into(),
        ));
    }
    let mut targets = Vec::new();
    let mut per_scan_point_error = Vec::with_capacity(scans.len());
    let mut merged = Vec::new();
    let mut merged_ref = Vec::new();
    for (si, ((cloud, pose), ref_pose)) in scans.iter().zip(reference_poses).enumerate() {
        if cloud.is_empty() {
            return Err(Error::EmptyInput);
        }
        let iso = pose.isometry();
        let ref_iso = ref_pose.isometry();

        for (k, truth) in sphere_truth.iter().enumerate() {
            let label = k as u16 + 1;
            let pts: Vec<Point3<f64>> = cloud
                .points
                .iter()
                .zip(&cloud.labels)
                .filter(|(_, l)| **l == label)
                .map(|(p, _)| iso * p)
                .collect();
            if pts.is_empty() {
                continue;
            }
            let error = if pts.len() >= MIN_SPHERE_POINTS {
                fit_sphere(&pts).map(|s| s.center - truth)
            } else {
                None
            };
            targets.push(TargetError {
                scan: si,
                target: k,
                points: pts.len(),
                error,
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(si as u64));
        let n = params.subsample.min(cloud.len());
        let mut picks = sample(&mut rng, cloud.len(), n).into_vec();
        picks.sort_unstable();
        let mut err_sum = 0.0;
        for &i in &picks {
            let a = iso * cloud.points[i];
            let b = ref_iso * cloud.points[i];
            err_sum += (a - b).norm();
            merged.push(a);
        }
        for p in &cloud.points {
            merged_ref.push(ref_iso * p);
        }
        per_scan_point_error.push(100.0 * err_sum / n as f64);
    }

    let scored: Vec<Vector3<f64>> = targets.iter().filter_map(|t| t.error).collect();
    let mean_of = |f: &dyn Fn(&Vector3<f64>) -> f64| {
        if scored.is_empty() {
            f64::NAN
        } else {
            100.0 * scored.iter().map(f).sum::<f64>() / scored.len() as f64
        }
    };
    let target_mean_error = mean_of(&|e| e.norm());
    let target_horizontal_error = mean_of(&|e| e.x.hypot(e.y));
    let target_vertical_error = mean_of(&|e| e.z.abs());
    let target_max_error = 100.0 * scored.iter().map(|e| e.norm()).fold(0.0, f64::max);

    let h = hausdorff_distance(
        &PointCloud::new(merged, Frame::World),
        &PointCloud::new(merged_ref, Frame::World),
    )?;
    let cm: Vec<f64> = h.distances.iter().map(|d| d * 100.0).collect();
    let axis: Vec<Vec<f64>> = (0..3)
        .map(|a| h.offsets.iter().map(|o| o[a] * 100.0).collect())
        .collect();
    let axis_stats: Vec<_> = axis
        .iter()
        .map(|v| crate::nav::SeriesStats::of(v))
        .collect();
    let stats = crate::nav::SeriesStats::of(&cm);
    Ok(RegistrationReport {
        label: label.to_string(),
        target_mean_error,
        target_horizontal_error,
        target_vertical_error,
        target_max_error,
        targets,
        max_point_error: per_scan_point_error.iter().copied().fold(0.0, f64::max),
        mean_point_error: per_scan_point_error.iter().sum::<f64>()
            / per_scan_point_error.len() as f64,
        per_scan_point_error,
        hausdorff: h.d_h * 100.0,
        hausdorff_mean: stats.mean,
        hausdorff_sd: stats.sd,
        histogram_distance: Histogram::build(&cm, 0.0, 10.0, 40),
        histogram_dx: Histogram::build(&axis[0], -5.0, 5.0, 40),
        histogram_dy: Histogram::build(&axis[1], -5.0, 5.0, 40),
        histogram_dz: Histogram::build(&axis[2], -5.0, 5.0, 40),
        axis_means: [axis_stats[0].mean, axis_stats[1].mean, axis_stats[2].mean],
        axis_sds: [axis_stats[0].sd, axis_stats[1].sd, axis_stats[2].sd],
        n_points: cm.len(),
    })
}

/// Sequential cloud-to-cloud registration. The first scan stays at its pose
/// estimate. Each following step picks the unregistered scan with the most
/// points near the registered union (ties to the lower index) and refines it
/// against that union. Returns the refined pose of every scan, in input
/// order.
pub fn register_sequential(
    scans: &[(PointCloud, ScanPose)],
    params: &IcpParams,
) -> Result<Vec<ScanPose>> {
    let mut out: Vec<Option<ScanPose>> = vec![None; scans.len()];
    if scans.is_empty() {
        return Ok(Vec::new());
    }
    let placed: Vec<PointCloud> = scans
        .iter()
        .map(|(c, p)| register_from_pose(c, p))
        .collect::<Result<_>>()?;
    out[0] = Some(scans[0].1);
    let mut union = placed[0].points.clone();
    let gate_sq = params.max_correspondence * params.max_correspondence;
    for _ in 1..scans.len() {
        let tree = KdTree::new(&union);
        let next = (0..scans.len())
            .filter(|&i| out[i].is_none())
            .map(|i| {
                let stride = placed[i].len().div_ceil(OVERLAP_PROBES).max(1);
                let near = placed[i]
                    .points
                    .par_iter()
                    .step_by(stride)
                    .filter(|p| tree.nearest(p).is_some_and(|(_, d)| d <= gate_sq))
                    .count();
                (
                    i,
                    near as f64 / placed[i].len().div_ceil(stride).max(1) as f64,
                )
            })
            .fold(None, |best: Option<(usize, f64)>, (i, f)| match best {
                Some((_, bf)) if bf >= f => best,
                _ => Some((i, f)),
            })
            .map(|(i, _)| i)
            .unwrap_or(0);
        let reference = PointCloud::new(union.clone(), Frame::World);
        let icp = c2c_refine(&placed[next], &reference, params)?;
        let pose = Pose::from_isometry(&(icp.transform * scans[next].1.isometry()));
        union.extend(icp.refined.points);
        out[next] = Some(pose);
    }
    Ok(out.into_iter().flatten().collect())
}

/// Rigid transform `G` minimizing the squared distance between every scan's
/// points placed at its registered pose and at `G` times its true pose,
/// using every `stride`-th point. Composing the true poses with `G` gives a
/// reference in the registration's own frame.
pub fn best_fit_frame(
    scans: &[(PointCloud, ScanPose)],
    truth: &[ScanPose],
    stride: usize,
) -> Isometry3<f64> {
    let mut placed = Vec::new();
    let mut reference = Vec::new();
    for ((cloud, pose), t) in scans.iter().zip(truth) {
        let (pi, ti) = (pose.isometry(), t.isometry());
        for p in cloud.points.iter().step_by(stride.max(1)) {
            placed.push(pi * p);
            reference.push(ti * p);
        }
    }
    best_rigid_transform(&reference, &placed)
}

/// Points sampled per scan when ranking overlap with the registered union.
const OVERLAP_PROBES: usize = 4000;
