//! File-based pipeline stages: plan, route, simulate, evaluate.
//!
//! Each stage reads the previous stage's files from the output directory and
//! writes its own. Data files start with a `#` line naming the stage and seed
//! and contain no timestamps, so reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{Point2, Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{ReferenceFrame, RunConfig};
use crate::cover::{greedy_cover, greedy_cover_with_size, CoverSolution};
use crate::error::{Error, Result};
use crate::field::{
    candidate_scan_locations, cells_csv, digitize_field, CandidateSet, PlotBox, ScanLocation,
};
use crate::geometry::Pose;
use crate::nav::{
    navigation_metrics, simulate_mission, stationary_pose_stats, NavMetrics, Phase, RobotState,
    TrajectoryLog,
};
use crate::raycast::{visibility_analysis, VisibilityTable};
use crate::registration::{
    best_fit_frame, register_sequential, registration_report, synthesize_scan, PointCloud,
    RegistrationReport, Scene, Sphere,
};
use crate::routing::{
    decompose_route, default_origin, nearest_neighbor_route, solve_tsp, solve_tsp_dfj,
    DistanceGraph, Metric, Tour, WaypointPlan, MAX_EXACT_NODES,
};
use crate::svg;

pub const CELLS: &str = "cells.csv";
pub const CANDIDATES: &str = "candidates.csv";
pub const VISIBILITY_CSV: &str = "visibility.csv";
pub const VISIBILITY_BIN: &str = "visibility.bin";
pub const COVER: &str = "cover.csv";
pub const ROUTES: &str = "routes.csv";
pub const WAYPOINTS: &str = "waypoints.csv";
pub const TRAJECTORY: &str = "trajectory.csv";
pub const NAV_METRICS: &str = "nav_metrics.csv";
pub const STATIONARY: &str = "stationary.csv";
pub const SCAN_POSES: &str = "scan_poses.csv";
pub const REGISTRATION: &str = "registration.csv";
pub const TARGETS: &str = "targets.csv";

fn header(cfg: &RunConfig, stage: &str) -> String {
    format!("# tls-planner {stage} seed={}\n", cfg.seed)
}

struct Writer<'a> {
    dir: &'a Path,
    preamble: String,
    written: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a RunConfig, stage: &str) -> Result<Self> {
        fs::create_dir_all(&cfg.output_dir)?;
        Ok(Writer {
            dir: &cfg.output_dir,
            preamble: header(cfg, stage),
            written: Vec::new(),
        })
    }

    fn data(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, format!("{}{body}", self.preamble))?;
        self.written.push(path);
        Ok(())
    }

    fn svg(&mut self, name: &str, body: &str) -> Result<()> {
        let comment = self.preamble.trim_start_matches("# ").trim_end();
        let path = self.dir.join(name);
        fs::write(&path, format!("<!-- {comment} -->\n{body}"))?;
        self.written.push(path);
        Ok(())
    }

    fn bytes(&mut self, name: &str, body: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body)?;
        self.written.push(path);
        Ok(())
    }
}

fn read_input(dir: &Path, name: &str, stage: &str) -> Result<(PathBuf, String)> {
    let path = dir.join(name);
    match fs::read_to_string(&path) {
        Ok(text) => Ok((path, text)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::InsufficientData(
            format!("{} not found; run `{stage}` first", path.display()),
        )),
        Err(e) => Err(e.into()),
    }
}

fn candidates_csv(set: &CandidateSet) -> String {
    let mut out = String::from("location_id,x,y,kind,clearance\n");
    for l in &set.locations {
        let kind = match l.kind {
            crate::field::LocationKind::AlleyRowIntersection => "alley_row_intersection",
            crate::field::LocationKind::HeadlandIntersection => "headland_intersection",
        };
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{kind},{:.6}",
            l.id, l.position.x, l.position.y, l.clearance
        );
    }
    out
}

fn candidates(cfg: &RunConfig) -> Result<CandidateSet> {
    let set = candidate_scan_locations(
        &cfg.field,
        cfg.planning.min_scan_distance,
        cfg.planning.robot_clearance,
    )?;
    if set.locations.is_empty() {
        return Err(Error::validation(
            "planning.min_scan_distance",
            set.diagnostic.clone().unwrap_or_default(),
        ));
    }
    Ok(set)
}

pub struct PlanOutcome {
    pub plots: Vec<PlotBox>,
    pub candidates: CandidateSet,
    pub table: VisibilityTable,
    pub cover: CoverSolution,
    pub files: Vec<PathBuf>,
}

/// Digitizes the field, scores every candidate and selects the greedy cover.
pub fn run_plan(cfg: &RunConfig) -> Result<PlanOutcome> {
    let plots = digitize_field(&cfg.field)?;
    let candidates = candidates(cfg)?;
    let table = visibility_analysis(&plots, &candidates.locations, &cfg.scanner);
    let cover = greedy_cover(&table);

    let mut w = Writer::new(cfg, "plan")?;
    w.data(CELLS, &cells_csv(&plots))?;
    w.data(CANDIDATES, &candidates_csv(&candidates))?;
    w.data(VISIBILITY_CSV, &table.to_csv())?;
    w.bytes(VISIBILITY_BIN, &table.to_bytes())?;
    w.data(COVER, &cover.to_csv())?;
    w.svg(
        "layout.svg",
        &svg::layout_svg(&plots, &candidates.locations, &cover.selected),
    )?;
    let files = w.written;
    Ok(PlanOutcome {
        plots,
        candidates,
        table,
        cover,
        files,
    })
}

impl PlanOutcome {
    pub fn summary(&self) -> String {
        format!(
            "candidates: {}\nselected: {} {:?}\nreduction: {:.1}%\nuncoverable cells: {} of {}\n",
            self.candidates.locations.len(),
            self.cover.selected.len(),
            self.cover.selected,
            100.0 * self.cover.reduction(),
            self.cover.uncoverable.len(),
            self.cover.n_cells
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RouteRow {
    /// `greedy` or `forced`.
    pub set: &'static str,
    pub size: usize,
    pub metric: Metric,
    /// Exact optimum; `None` when the set is too large for the exact solver.
    pub tsp: Option<f64>,
    pub nearest_neighbor: f64,
}

impl RouteRow {
    pub fn improvement(&self) -> Option<f64> {
        self.tsp
            .map(|t| 100.0 * (self.nearest_neighbor - t) / self.nearest_neighbor)
    }
}

pub struct RouteOutcome {
    pub rows: Vec<RouteRow>,
    /// Locations routed for the mission, in greedy order.
    pub mission_set: Vec<usize>,
    pub tour: Tour,
    pub plan: WaypointPlan,
    pub files: Vec<PathBuf>,
}

fn route_nodes(
    cfg: &RunConfig,
    set: &[usize],
    candidates: &[ScanLocation],
) -> Result<Vec<(usize, Point2<f64>)>> {
    let origin = cfg
        .planning
        .origin
        .map_or_else(|| default_origin(&cfg.field), Point2::from);
    let mut nodes = vec![(0, origin)];
    for id in set {
        let loc = candidates
            .iter()
            .find(|l| l.id == *id)
            .ok_or_else(|| Error::Format(format!("cover names unknown location {id}")))?;
        nodes.push((*id, loc.position));
    }
    Ok(nodes)
}

/// Exact tour by dynamic programming, cross-checked against the
/// subtour-elimination solver.
pub fn exact_tour(graph: &DistanceGraph) -> Result<Tour> {
    let dp = solve_tsp(graph)?;
    let lp = solve_tsp_dfj(graph)?;
    if (dp.total_length - lp.total_length).abs() > 1e-6 * dp.total_length.max(1.0) {
        return Err(Error::Infeasible(format!(
            "solvers disagree: {} vs {}",
            dp.total_length, lp.total_length
        )));
    }
    Ok(dp)
}

/// Routes the cover under both metrics and decomposes the mission tour for
/// the configured metric into waypoints. With `planning.route_set_size` the
/// first greedy picks of that size are routed as well and become the mission.
pub fn run_route(cfg: &RunConfig) -> Result<RouteOutcome> {
    let dir = &cfg.output_dir;
    let (_, cover_text) = read_input(dir, COVER, "plan")?;
    let greedy: Vec<usize> = CoverSolution::selected_from_csv(&cover_text)?
        .into_iter()
        .map(|(id, _)| id)
        .collect();
    if greedy.is_empty() {
        return Err(Error::InsufficientData("cover selects no locations".into()));
    }
    let candidates = candidates(cfg)?;

    let mut sets: Vec<(&'static str, Vec<usize>)> = vec![("greedy", greedy.clone())];
    if let Some(k) = cfg.planning.route_set_size.filter(|&k| k != greedy.len()) {
        let bin = fs::read(dir.join(VISIBILITY_BIN)).map_err(|_| {
            Error::InsufficientData(format!("{VISIBILITY_BIN} not found; run `plan` first"))
        })?;
        let table = VisibilityTable::from_bytes(&bin)?;
        sets.push(("forced", greedy_cover_with_size(&table, k).selected));
    }

    let mut rows = Vec::new();
    let mut mission: Option<(Vec<usize>, Tour, DistanceGraph)> = None;
    let mission_idx = sets.len() - 1;
    for (si, (name, set)) in sets.iter().enumerate() {
        let nodes = route_nodes(cfg, set, &candidates.locations)?;
        for metric in [Metric::Aha, Metric::Br] {
            let graph = DistanceGraph::build(&nodes, metric, &cfg.field);
            let nn = nearest_neighbor_route(&graph, 0)?;
            let tour = if graph.len() <= MAX_EXACT_NODES {
                Some(exact_tour(&graph)?)
            } else {
                None
            };
            rows.push(RouteRow {
                set: name,
                size: set.len(),
                metric,
                tsp: tour.as_ref().map(|t| t.total_length),
                nearest_neighbor: nn.total_length,
            });
            if metric == cfg.planning.metric && si == mission_idx {
                let tour = match tour {
                    Some(t) => t,
                    None => {
                        return Err(Error::TooLarge {
                            nodes: graph.len(),
                            max: MAX_EXACT_NODES,
                        })
                    }
                };
                mission = Some((set.clone(), tour, graph));
            }
        }
    }
    let (mission_set, tour, graph) = mission.expect("mission metric is always routed");
    let plan = decompose_route(&tour, &graph, &cfg.field)?;

    let mut table = String::from("set,size,metric,tsp_length,nn_length,improvement_pct\n");
    for r in &rows {
        let tsp = r.tsp.map(|t| format!("{t:.4}")).unwrap_or_default();
        let imp = r
            .improvement()
            .map(|t| format!("{t:.4}"))
            .unwrap_or_default();
        let _ = writeln!(
            table,
            "{},{},{},{tsp},{:.4},{imp}",
            r.set, r.size, r.metric, r.nearest_neighbor
        );
    }
    let plots = digitize_field(&cfg.field)?;
    let mut w = Writer::new(cfg, "route")?;
    w.data(ROUTES, &table)?;
    w.data(
        &format!("tour_{}.csv", cfg.planning.metric),
        &tour.to_csv(&graph),
    )?;
    w.data(WAYPOINTS, &plan.to_csv())?;
    w.svg("route.svg", &svg::route_svg(&plots, &plan))?;
    let files = w.written;
    Ok(RouteOutcome {
        rows,
        mission_set,
        tour,
        plan,
        files,
    })
}

impl RouteOutcome {
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let tsp = r.tsp.map_or(
                "n/a (too many nodes for the exact solver)".to_string(),
                |t| format!("{t:.2} m"),
            );
            let imp = r
                .improvement()
                .map_or(String::new(), |i| format!(", improvement {i:.1}%"));
            let _ = writeln!(
                out,
                "{} set ({} locations) {}: TSP {tsp}, NN {:.2} m{imp}",
                r.set, r.size, r.metric, r.nearest_neighbor
            );
        }
        let seq: Vec<String> = self
            .tour
            .sequence
            .iter()
            .map(|&i| {
                if i == 0 {
                    "Origin".into()
                } else {
                    i.to_string()
                }
            })
            .collect();
        let _ = writeln!(out, "mission tour: {}", seq.join("-"));
        out
    }
}

pub struct SimOutcome {
    pub log: TrajectoryLog,
    pub metrics: NavMetrics,
    pub files: Vec<PathBuf>,
}

fn read_plan(cfg: &RunConfig) -> Result<WaypointPlan> {
    let (path, text) = read_input(&cfg.output_dir, WAYPOINTS, "route")?;
    let plan = WaypointPlan::from_csv(&text, &path)?;
    if plan.waypoints.is_empty() {
        return Err(Error::Parse {
            path,
            line: 1,
            reason: "plan has no waypoints".into(),
        });
    }
    Ok(plan)
}

/// Drives the waypoint plan in simulation and scores the tracking.
pub fn run_simulate(cfg: &RunConfig) -> Result<SimOutcome> {
    let plan = read_plan(cfg)?;
    let start = &plan.waypoints[0];
    let log = simulate_mission(
        &plan,
        &cfg.sim,
        &cfg.noise_model(),
        RobotState::at_rest(start.position, start.heading),
    )?;
    let metrics = navigation_metrics(&log, &plan);

    let mut stationary =
        String::from("waypoint_idx,location_id,samples,sd_x,sd_y,sd_heading,absolute_error\n");
    for (idx, samples) in crate::nav::dwell_samples(&log) {
        let planned = plan.waypoints[idx].position;
        let s = stationary_pose_stats(&samples, &planned)?;
        let _ = writeln!(
            stationary,
            "{idx},{},{},{:.9},{:.9},{:.9},{:.9}",
            plan.waypoints[idx].location_id.unwrap_or(0),
            samples.len(),
            s.x.sd,
            s.y.sd,
            s.heading.sd,
            s.absolute_error
        );
    }

    let plots = digitize_field(&cfg.field)?;
    let path: Vec<Point2<f64>> = log.samples.iter().map(|s| s.state.position).collect();
    let mut w = Writer::new(cfg, "simulate")?;
    w.data(TRAJECTORY, &log.to_csv())?;
    w.data(NAV_METRICS, &metrics.to_csv())?;
    w.data(STATIONARY, &stationary)?;
    w.svg("xte.svg", &svg::xte_svg(&plots, &path, &metrics.xte))?;
    let files = w.written;
    Ok(SimOutcome {
        log,
        metrics,
        files,
    })
}

impl SimOutcome {
    pub fn summary(&self) -> String {
        let m = &self.metrics;
        format!(
            "samples: {}\npath length: {:.2} m\nmean |XTE| while tracking: {:.2} cm (max {:.2} cm)\nmean |heading error| while tracking: {:.2} deg\nXTE < 5 cm: {:.1}%  < 10 cm: {:.1}%\n",
            self.log.samples.len(),
            self.log.path_length(),
            100.0 * m.xte_stats.mean,
            100.0 * m.xte_stats.max_abs,
            m.heading_stats.mean.to_degrees(),
            100.0 * m.frac_below_5cm,
            100.0 * m.frac_below_10cm
        )
    }
}

/// One scan position of the mission: where the scanner really stood and
/// what the platform reported.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanStation {
    pub location_id: usize,
    pub truth: Pose,
    pub estimate: Pose,
}

/// Scanner poses at every dwell of the trajectory. Truth comes from the
/// simulated state, the estimate from the mean localization plus the
/// configured tilt, yaw and height errors.
pub fn scan_stations(
    cfg: &RunConfig,
    log: &TrajectoryLog,
    plan: &WaypointPlan,
) -> Result<Vec<ScanStation>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5CA4_57A7);
    let e = &cfg.eval;
    let tilt = Normal::new(0.0, e.tilt_sigma_deg.to_radians()).unwrap();
    let yaw = Normal::new(0.0, e.yaw_sigma_deg.to_radians()).unwrap();
    let height = Normal::new(0.0, e.height_sigma).unwrap();
    let ground = e.platform_tilt_deg.to_radians();
    let mh = cfg.scanner.mount_height;

    let mut out = Vec::new();
    let dwell: Vec<_> = log
        .samples
        .iter()
        .filter(|s| s.phase == Phase::Dwell)
        .collect();
    let mut i = 0;
    while i < dwell.len() {
        let idx = dwell[i].waypoint_idx;
        let group: Vec<_> = dwell[i..]
            .iter()
            .take_while(|s| s.waypoint_idx == idx)
            .collect();
        i += group.len();
        let Some(wp) = plan.waypoints.get(idx) else {
            return Err(Error::Format(format!(
                "trajectory references waypoint {idx} not in the plan"
            )));
        };
        let location_id = wp.location_id.unwrap_or(0);
        let last = group.last().unwrap().state;
        let est: Vec<(Point2<f64>, f64)> = group.iter().map(|s| s.estimate).collect();
        let stats = stationary_pose_stats(&est, &wp.position)?;
        let (roll, pitch) = if ground > 0.0 {
            (
                rng.random_range(-ground..=ground),
                rng.random_range(-ground..=ground),
            )
        } else {
            (0.0, 0.0)
        };
        let truth = Pose::new(
            Vector3::new(last.position.x, last.position.y, mh),
            roll,
            pitch,
            last.heading,
        );
        let estimate = Pose::new(
            Vector3::new(
                stats.mean_position.x,
                stats.mean_position.y,
                mh + height.sample(&mut rng),
            ),
            roll + tilt.sample(&mut rng),
            pitch + tilt.sample(&mut rng),
            stats.mean_heading + yaw.sample(&mut rng),
        );
        out.push(ScanStation {
            location_id,
            truth,
            estimate,
        });
    }
    Ok(out)
}

/// Sphere targets at corridor intersections the mission does not scan from,
/// spread evenly through the candidate list, heights from 1.4 to 2.0 m.
/// Points per scan used to fit the best-fit reference frame.
const BEST_FIT_STRIDE: usize = 20;

pub fn place_targets(candidates: &[ScanLocation], visited: &[usize], n: usize) -> Vec<Point3<f64>> {
    let free: Vec<&ScanLocation> = candidates
        .iter()
        .filter(|l| !visited.contains(&l.id))
        .collect();
    if free.is_empty() || n == 0 {
        return Vec::new();
    }
    (0..n)
        .map(|k| {
            let l = free[(2 * k + 1) * free.len() / (2 * n)];
            let z = if n > 1 {
                1.4 + 0.6 * k as f64 / (n - 1) as f64
            } else {
                1.7
            };
            Point3::new(l.position.x, l.position.y, z)
        })
        .collect()
}

pub struct EvalOutcome {
    pub stations: Vec<ScanStation>,
    pub pose_only: RegistrationReport,
    pub refined: RegistrationReport,
    pub refined_poses: Vec<Pose>,
    pub files: Vec<PathBuf>,
}

fn pose_row(p: &Pose) -> String {
    format!(
        "{:.6},{:.6},{:.6},{:.9},{:.9},{:.9}",
        p.translation.x, p.translation.y, p.translation.z, p.roll, p.pitch, p.yaw
    )
}

/// Synthesizes a scan at every dwell pose, registers the scans from the
/// pose estimates alone and after cloud-to-cloud refinement, and scores
/// both against the true relative registration.
///
/// The refined registration keeps the first scan at its estimate. With
/// `reference = "first_scan"` the truth is expressed in that scan's estimated
/// frame; with `"best_fit"` each registration is scored against the truth
/// moved into the rigid frame that fits it best.
pub fn run_evaluate(cfg: &RunConfig) -> Result<EvalOutcome> {
    let plan = read_plan(cfg)?;
    let (tpath, ttext) = read_input(&cfg.output_dir, TRAJECTORY, "simulate")?;
    let log = TrajectoryLog::from_csv(&ttext, &tpath)?;
    let stations = scan_stations(cfg, &log, &plan)?;
    if stations.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "registration needs at least 2 scans, the trajectory has {}",
            stations.len()
        )));
    }

    let plots = digitize_field(&cfg.field)?;
    let candidates = candidates(cfg)?;
    let visited: Vec<usize> = stations.iter().map(|s| s.location_id).collect();
    let targets = cfg
        .eval
        .explicit_targets()
        .unwrap_or_else(|| place_targets(&candidates.locations, &visited, cfg.eval.n_targets));
    let spheres: Vec<Sphere> = targets
        .iter()
        .map(|c| Sphere {
            center: *c,
            radius: cfg.eval.target_radius,
        })
        .collect();

    let mut scene = Scene::new(&plots, &spheres);
    if cfg.eval.ground {
        let (length, width) = cfg.field.extent();
        let [x0, y0] = cfg.field.origin;
        scene = scene.with_ground(x0, y0, x0 + length, y0 + width);
    }
    let spec = cfg.eval_scanner();
    let scans: Vec<(PointCloud, Pose)> = stations
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut cloud = synthesize_scan(
                &scene,
                &s.truth,
                &spec,
                cfg.eval.range_noise,
                cfg.seed.wrapping_add(1000 + i as u64),
            );
            cloud.source_location_id = Some(s.location_id);
            (cloud, s.estimate)
        })
        .collect();
    if let Some((i, _)) = scans.iter().enumerate().find(|(_, (c, _))| c.is_empty()) {
        return Err(Error::InsufficientData(format!("scan {i} hit nothing")));
    }

    let truth: Vec<Pose> = stations.iter().map(|s| s.truth).collect();
    let report_params = cfg.eval.report(cfg.seed);
    let score = |label: &str, placed: &[(PointCloud, Pose)]| {
        let frame = match cfg.eval.reference {
            ReferenceFrame::FirstScan => {
                stations[0].estimate.isometry() * stations[0].truth.isometry().inverse()
            }
            ReferenceFrame::BestFit => best_fit_frame(placed, &truth, BEST_FIT_STRIDE),
        };
        let reference: Vec<Pose> = truth
            .iter()
            .map(|t| Pose::from_isometry(&(frame * t.isometry())))
            .collect();
        let targets_ref: Vec<Point3<f64>> = targets.iter().map(|c| frame * c).collect();
        registration_report(label, placed, &targets_ref, &reference, &report_params)
    };
    let pose_only = score("Pose estimates only", &scans)?;
    let refined_poses = register_sequential(&scans, &cfg.eval.icp())?;
    let refined_scans: Vec<(PointCloud, Pose)> = scans
        .iter()
        .zip(&refined_poses)
        .map(|((c, _), p)| (c.clone(), *p))
        .collect();
    let refined = score("Pose + C2C", &refined_scans)?;

    let mut w = Writer::new(cfg, "evaluate")?;
    let mut reg = format!("{}\n", RegistrationReport::csv_header());
    for r in [&pose_only, &refined] {
        let _ = writeln!(reg, "{}", r.csv_row());
    }
    w.data(REGISTRATION, &reg)?;
    w.data(
        "registration_summary.txt",
        &RegistrationReport::summary_table(&[&pose_only, &refined]),
    )?;

    let mut poses = String::from(
        "scan,location_id,true_x,true_y,true_z,true_roll,true_pitch,true_yaw,est_x,est_y,est_z,est_roll,est_pitch,est_yaw,c2c_x,c2c_y,c2c_z,c2c_roll,c2c_pitch,c2c_yaw,points,pose_only_error_cm,c2c_error_cm\n",
    );
    for (i, s) in stations.iter().enumerate() {
        let _ = writeln!(
            poses,
            "{i},{},{},{},{},{},{:.4},{:.4}",
            s.location_id,
            pose_row(&s.truth),
            pose_row(&s.estimate),
            pose_row(&refined_poses[i]),
            scans[i].0.len(),
            pose_only.per_scan_point_error[i],
            refined.per_scan_point_error[i]
        );
    }
    w.data(SCAN_POSES, &poses)?;

    let mut tcsv = String::from("method,scan,target,points,dx_cm,dy_cm,dz_cm,usable\n");
    for r in [&pose_only, &refined] {
        for t in &r.targets {
            let (d, ok) = match t.error {
                Some(e) => (
                    format!("{:.4},{:.4},{:.4}", 100.0 * e.x, 100.0 * e.y, 100.0 * e.z),
                    true,
                ),
                None => (",,".to_string(), false),
            };
            let _ = writeln!(
                tcsv,
                "{},{},{},{},{d},{ok}",
                r.label, t.scan, t.target, t.points
            );
        }
    }
    w.data(TARGETS, &tcsv)?;

    for (name, r) in [("pose_only", &pose_only), ("c2c", &refined)] {
        let placed = if name == "c2c" {
            &refined_scans
        } else {
            &scans
        };
        let merged: Vec<Point3<f64>> = placed
            .iter()
            .flat_map(|(c, p)| {
                let iso = p.isometry();
                c.points.iter().step_by(10).map(move |q| iso * q)
            })
            .collect();
        w.data(
            &format!("registered_{name}.xyz"),
            &PointCloud::new(merged, crate::registration::Frame::World).to_ascii(),
        )?;
        w.svg(
            &format!("hist_{name}_distance.svg"),
            &svg::histogram_svg(
                &r.histogram_distance,
                &format!("{}: nearest distance", r.label),
                "distance (cm)",
            ),
        )?;
        for (axis, h) in [
            ("x", &r.histogram_dx),
            ("y", &r.histogram_dy),
            ("z", &r.histogram_dz),
        ] {
            w.svg(
                &format!("hist_{name}_d{axis}.svg"),
                &svg::histogram_svg(
                    h,
                    &format!("{}: d{}", r.label, axis.to_uppercase()),
                    "offset (cm)",
                ),
            )?;
        }
    }
    if cfg.eval.write_scans {
        for (i, (c, _)) in scans.iter().enumerate() {
            w.data(&format!("scan_{i:02}.xyz"), &c.to_ascii())?;
        }
    }
    let files = w.written;
    Ok(EvalOutcome {
        stations,
        pose_only,
        refined,
        refined_poses,
        files,
    })
}

impl EvalOutcome {
    pub fn summary(&self) -> String {
        let mut out = format!("scans: {}\n", self.stations.len());
        out.push_str(&RegistrationReport::summary_table(&[
            &self.pose_only,
            &self.refined,
        ]));
        out
    }
}
