//! Waypoint mission simulation with in-place rotations and pure-pursuit
//! tracking, plus the navigation and stationary pose statistics.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{Point2, Vector2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::normalize_angle;
use crate::routing::WaypointPlan;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobotState {
    pub position: Point2<f64>,
    /// Radians in `(-pi, pi]`.
    pub heading: f64,
    pub v: f64,
    pub omega: f64,
    pub time: f64,
}

impl RobotState {
    pub fn at_rest(position: Point2<f64>, heading: f64) -> Self {
        RobotState {
            position,
            heading: normalize_angle(heading),
            v: 0.0,
            omega: 0.0,
            time: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PurePursuitParams {
    pub look_ahead: f64,
    pub cruise_speed: f64,
    pub max_speed: f64,
    /// In-place rotation rate, rad/s.
    pub rotation_rate: f64,
    pub goal_position_tolerance: f64,
    /// Radians.
    pub goal_heading_tolerance: f64,
    pub control_period: f64,
    /// Time spent stationary at every scan location, seconds.
    pub scan_dwell: f64,
    /// Minimum per-leg timeout; longer legs get proportionally more time.
    pub leg_timeout: f64,
}

impl Default for PurePursuitParams {
    fn default() -> Self {
        PurePursuitParams {
            look_ahead: 1.0,
            cruise_speed: 0.5,
            max_speed: 1.0,
            rotation_rate: 0.5,
            goal_position_tolerance: 0.05,
            goal_heading_tolerance: 2f64.to_radians(),
            control_period: 0.1,
            scan_dwell: 10.0,
            leg_timeout: 60.0,
        }
    }
}

impl PurePursuitParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("sim.look_ahead", self.look_ahead),
            ("sim.cruise_speed", self.cruise_speed),
            ("sim.max_speed", self.max_speed),
            ("sim.rotation_rate", self.rotation_rate),
            ("sim.goal_position_tolerance", self.goal_position_tolerance),
            ("sim.goal_heading_tolerance", self.goal_heading_tolerance),
            ("sim.control_period", self.control_period),
            ("sim.leg_timeout", self.leg_timeout),
        ];
        for (name, v) in checks {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(name, format!("must be > 0, got {v}")));
            }
        }
        if self.cruise_speed > self.max_speed {
            return Err(Error::validation("sim.cruise_speed", "exceeds max_speed"));
        }
        if !(self.scan_dwell >= 0.0) {
            return Err(Error::validation("sim.scan_dwell", "must be >= 0"));
        }
        Ok(())
    }
}

/// Perturbations applied in simulation. Measurement noise corrupts the pose
/// the controller sees; slip scales the executed velocities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseModel {
    pub position_sigma: f64,
    pub heading_sigma: f64,
    pub wheel_slip_sigma: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            position_sigma: 0.0,
            heading_sigma: 0.0,
            wheel_slip_sigma: 0.0,
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("noise.position_sigma", self.position_sigma),
            ("noise.heading_sigma", self.heading_sigma),
            ("noise.wheel_slip_sigma", self.wheel_slip_sigma),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::validation(name, format!("must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub start: Point2<f64>,
    pub end: Point2<f64>,
}

impl Segment {
    pub fn new(start: Point2<f64>, end: Point2<f64>) -> Self {
        Segment { start, end }
    }

    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    pub fn bearing(&self) -> f64 {
        let d = self.end - self.start;
        d.y.atan2(d.x)
    }

    fn unit(&self) -> Vector2<f64> {
        (self.end - self.start) / self.length()
    }

    /// Along-track coordinate of the projection of `p`.
    pub fn progress(&self, p: &Point2<f64>) -> f64 {
        (p - self.start).dot(&self.unit())
    }

    /// Signed distance from `p` to the segment's line, positive to the left.
    pub fn cross_track(&self, p: &Point2<f64>) -> f64 {
        let u = self.unit();
        let r = p - self.start;
        u.x * r.y - u.y * r.x
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PursuitCommand {
    pub v: f64,
    pub omega: f64,
    pub curvature: f64,
    /// Bearing of the target point relative to the robot heading.
    pub alpha: f64,
    pub target: Point2<f64>,
    /// Distance from the robot to the target point (the arc chord).
    pub chord: f64,
}

impl PursuitCommand {
    /// Radius of the arc through the robot and the target, `chord / (2 sin alpha)`.
    pub fn radius(&self) -> f64 {
        self.chord / (2.0 * self.alpha.sin())
    }
}

/// One pure-pursuit control step toward `path.end`.
///
/// The target is the forward intersection of the look-ahead circle with the
/// path line, clamped to the segment; when the circle misses the line the
/// nearest path point is targeted instead. The arc curvature is
/// `2 sin(alpha) / chord`, which is `2 sin(alpha) / look_ahead` whenever the
/// circle meets the path.
pub fn pure_pursuit_step(
    state: &RobotState,
    path: &Segment,
    params: &PurePursuitParams,
) -> PursuitCommand {
    let len = path.length();
    let s = path.progress(&state.position);
    let e = path.cross_track(&state.position);
    let ld = params.look_ahead;
    let target_s = if e.abs() <= ld {
        (s + (ld * ld - e * e).sqrt()).clamp(0.0, len)
    } else {
        s.clamp(0.0, len)
    };
    let target = path.start + path.unit() * target_s;
    let to_target = target - state.position;
    let chord = to_target.norm();
    let alpha = if chord > 0.0 {
        normalize_angle(to_target.y.atan2(to_target.x) - state.heading)
    } else {
        0.0
    };
    let curvature = if chord > 0.0 {
        2.0 * alpha.sin() / chord
    } else {
        0.0
    };
    let remaining = (len - s).max(0.0);
    let v = params
        .cruise_speed
        .min(params.max_speed)
        .min(remaining / params.control_period);
    PursuitCommand {
        v,
        omega: v * curvature,
        curvature,
        alpha,
        target,
        chord,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Start,
    Rotate,
    Track,
    Dwell,
}

impl Phase {
    fn as_str(self) -> &'static str {
        match self {
            Phase::Start => "start",
            Phase::Rotate => "rotate",
            Phase::Track => "track",
            Phase::Dwell => "dwell",
        }
    }
}

impl FromStr for Phase {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "start" => Phase::Start,
            "rotate" => Phase::Rotate,
            "track" => Phase::Track,
            "dwell" => Phase::Dwell,
            _ => return Err(format!("unknown phase {s:?}")),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    /// Ground-truth state; `v`/`omega` are the commanded velocities.
    pub state: RobotState,
    /// Pose as measured by the (noisy) localization: x, y, heading.
    pub estimate: (Point2<f64>, f64),
    /// Index of the waypoint being driven to (or dwelt at).
    pub waypoint_idx: usize,
    pub phase: Phase,
    /// Curvature used by pure pursuit at this step (0 otherwise).
    pub curvature: f64,
    /// Arc radius `chord / (2 sin alpha)`, infinite when alpha is 0.
    pub radius: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryLog {
    pub samples: Vec<Sample>,
}

impl TrajectoryLog {
    pub fn path_length(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| (w[1].state.position - w[0].state.position).norm())
            .sum()
    }

    pub const CSV_HEADER: &'static str =
        "t,x,y,psi,v,omega,waypoint_idx,phase,est_x,est_y,est_psi,curvature";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let st = &s.state;
            let _ = writeln!(
                out,
                "{:.3},{:.9},{:.9},{:.12},{:.9},{:.12},{},{},{:.9},{:.9},{:.12},{:.12}",
                st.time,
                st.position.x,
                st.position.y,
                st.heading,
                st.v,
                st.omega,
                s.waypoint_idx,
                s.phase.as_str(),
                s.estimate.0.x,
                s.estimate.0.y,
                s.estimate.1,
                s.curvature
            );
        }
        out
    }

    pub fn from_csv(text: &str, path: &std::path::Path) -> Result<Self> {
        let err = |line: usize, reason: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let mut lines = crate::data_lines(text);
        match lines.next() {
            Some((_, h)) if h.trim() == Self::CSV_HEADER => {}
            other => {
                return Err(err(
                    other.map_or(1, |(n, _)| n),
                    "missing trajectory header".into(),
                ))
            }
        }
        let mut samples = Vec::new();
        for (ln, line) in lines {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 12 {
                return Err(err(ln, format!("expected 12 fields, found {}", f.len())));
            }
            let num = |i: usize| {
                f[i].parse::<f64>()
                    .map_err(|_| err(ln, format!("bad number {:?}", f[i])))
            };
            let curvature = num(11)?;
            samples.push(Sample {
                state: RobotState {
                    position: Point2::new(num(1)?, num(2)?),
                    heading: num(3)?,
                    v: num(4)?,
                    omega: num(5)?,
                    time: num(0)?,
                },
                estimate: (Point2::new(num(8)?, num(9)?), num(10)?),
                waypoint_idx: f[6]
                    .parse()
                    .map_err(|_| err(ln, format!("bad waypoint index {:?}", f[6])))?,
                phase: f[7].parse().map_err(|e| err(ln, e))?,
                curvature,
                radius: f64::NAN,
            });
        }
        Ok(TrajectoryLog { samples })
    }
}

struct Simulator<'a> {
    params: &'a PurePursuitParams,
    noise: &'a NoiseModel,
    rng: ChaCha8Rng,
    state: RobotState,
    log: TrajectoryLog,
    step: u64,
}

impl Simulator<'_> {
    fn gauss(&mut self, sigma: f64) -> f64 {
        if sigma > 0.0 {
            Normal::new(0.0, sigma).unwrap().sample(&mut self.rng)
        } else {
            0.0
        }
    }

    fn measure(&mut self) -> (Point2<f64>, f64) {
        let (ps, hs) = (self.noise.position_sigma, self.noise.heading_sigma);
        let p = self.state.position + Vector2::new(self.gauss(ps), self.gauss(ps));
        let h = normalize_angle(self.state.heading + self.gauss(hs));
        (p, h)
    }

    fn record(
        &mut self,
        estimate: (Point2<f64>, f64),
        waypoint_idx: usize,
        phase: Phase,
        cmd: Option<&PursuitCommand>,
    ) {
        self.log.samples.push(Sample {
            state: self.state,
            estimate,
            waypoint_idx,
            phase,
            curvature: cmd.map_or(0.0, |c| c.curvature),
            radius: cmd.map_or(f64::INFINITY, |c| c.radius()),
        });
    }

    /// Applies (v, omega) for one control period to the true state.
    fn integrate(&mut self, v: f64, omega: f64) {
        let slip = self.noise.wheel_slip_sigma;
        let (kv, kw) = (1.0 + self.gauss(slip), 1.0 + self.gauss(slip));
        let dt = self.params.control_period;
        let (va, wa) = (v * kv, omega * kw);
        let h = self.state.heading;
        self.state.position += Vector2::new(h.cos(), h.sin()) * va * dt;
        self.state.heading = normalize_angle(h + wa * dt);
        self.state.v = v;
        self.state.omega = omega;
        self.step += 1;
        self.state.time = self.step as f64 * dt;
    }
}

/// Drives the plan leg by leg: rotate in place to the leg bearing, track the
/// leg with pure pursuit, and dwell at scan locations. The controller acts on
/// the noisy pose estimate; every control period is logged.
pub fn simulate_mission(
    plan: &WaypointPlan,
    params: &PurePursuitParams,
    noise: &NoiseModel,
    initial: RobotState,
) -> Result<TrajectoryLog> {
    params.validate()?;
    noise.validate()?;
    let mut sim = Simulator {
        params,
        noise,
        rng: ChaCha8Rng::seed_from_u64(noise.seed),
        state: RobotState {
            time: 0.0,
            ..initial
        },
        log: TrajectoryLog::default(),
        step: 0,
    };
    let est = sim.measure();
    sim.record(est, 0, Phase::Start, None);
    if plan.waypoints.len() < 2 {
        return Ok(sim.log);
    }
    let dt = params.control_period;
    let dwell_steps = (params.scan_dwell / dt).round() as usize;

    let dwell = |sim: &mut Simulator, idx: usize| {
        for _ in 0..dwell_steps {
            sim.integrate(0.0, 0.0);
            let est = sim.measure();
            sim.record(est, idx, Phase::Dwell, None);
        }
    };
    if plan.waypoints[0].location_id.is_some_and(|id| id != 0) {
        dwell(&mut sim, 0);
    }

    for leg in 0..plan.waypoints.len() - 1 {
        let target = leg + 1;
        let seg = Segment::new(
            plan.waypoints[leg].position,
            plan.waypoints[target].position,
        );
        let leg_start = sim.state.time;
        let budget = params
            .leg_timeout
            .max(4.0 * seg.length() / params.cruise_speed);
        let check_timeout = |sim: &Simulator| {
            let elapsed = sim.state.time - leg_start;
            if elapsed > budget {
                Err(Error::LegTimeout { leg, elapsed })
            } else {
                Ok(())
            }
        };

        let bearing = seg.bearing();
        let mut est = sim.measure();
        loop {
            let err = normalize_angle(bearing - est.1);
            if err.abs() <= params.goal_heading_tolerance {
                break;
            }
            let omega = err.signum() * params.rotation_rate.min(err.abs() / dt);
            sim.integrate(0.0, omega);
            est = sim.measure();
            sim.record(est, target, Phase::Rotate, None);
            check_timeout(&sim)?;
        }

        loop {
            let seen = RobotState {
                position: est.0,
                heading: est.1,
                ..sim.state
            };
            let dist = (seg.end - seen.position).norm();
            if dist <= params.goal_position_tolerance
                || seg.progress(&seen.position) >= seg.length()
            {
                break;
            }
            let cmd = pure_pursuit_step(&seen, &seg, params);
            sim.integrate(cmd.v, cmd.omega);
            est = sim.measure();
            sim.record(est, target, Phase::Track, Some(&cmd));
            check_timeout(&sim)?;
        }

        if plan.waypoints[target].location_id.is_some_and(|id| id != 0) {
            dwell(&mut sim, target);
        }
    }
    Ok(sim.log)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SeriesStats {
    pub mean: f64,
    pub sd: f64,
    pub max_abs: f64,
}

impl SeriesStats {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return SeriesStats::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        SeriesStats { mean, sd, max_abs }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NavMetrics {
    /// Unsigned cross-track error per sample, meters.
    pub xte: Vec<f64>,
    /// Estimated heading minus segment bearing, radians.
    pub heading_error: Vec<f64>,
    pub phases: Vec<Phase>,
    pub xte_stats: SeriesStats,
    pub heading_stats: SeriesStats,
    pub frac_below_5cm: f64,
    pub frac_below_10cm: f64,
}

impl NavMetrics {
    /// XTE values for samples whose phase passes `keep`.
    pub fn xte_where(&self, keep: impl Fn(Phase) -> bool) -> Vec<f64> {
        self.xte
            .iter()
            .zip(&self.phases)
            .filter(|(_, p)| keep(**p))
            .map(|(x, _)| *x)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample,phase,xte_m,heading_error_rad\n");
        for (i, ((x, h), p)) in self
            .xte
            .iter()
            .zip(&self.heading_error)
            .zip(&self.phases)
            .enumerate()
        {
            let _ = writeln!(out, "{i},{},{x:.9},{h:.12}", p.as_str());
        }
        out
    }
}

/// Cross-track and heading error of every logged estimate against the
/// segment active at that sample. All samples are included, in-place
/// rotations and dwells too.
pub fn navigation_metrics(log: &TrajectoryLog, plan: &WaypointPlan) -> NavMetrics {
    let mut xte = Vec::with_capacity(log.samples.len());
    let mut heading_error = Vec::with_capacity(log.samples.len());
    let mut phases = Vec::with_capacity(log.samples.len());
    if plan.waypoints.len() >= 2 {
        for s in &log.samples {
            let idx = s.waypoint_idx.clamp(1, plan.waypoints.len() - 1);
            let seg = Segment::new(
                plan.waypoints[idx - 1].position,
                plan.waypoints[idx].position,
            );
            if seg.length() == 0.0 {
                continue;
            }
            xte.push(seg.cross_track(&s.estimate.0).abs());
            heading_error.push(normalize_angle(s.estimate.1 - seg.bearing()));
            phases.push(s.phase);
        }
    }
    let n = xte.len().max(1) as f64;
    NavMetrics {
        xte_stats: SeriesStats::of(&xte),
        heading_stats: SeriesStats::of(&heading_error),
        frac_below_5cm: xte.iter().filter(|&&x| x < 0.05).count() as f64 / n,
        frac_below_10cm: xte.iter().filter(|&&x| x < 0.10).count() as f64 / n,
        xte,
        heading_error,
        phases,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationaryStats {
    pub mean_position: Point2<f64>,
    pub mean_heading: f64,
    pub residuals_x: Vec<f64>,
    pub residuals_y: Vec<f64>,
    pub residuals_heading: Vec<f64>,
    pub x: SeriesStats,
    pub y: SeriesStats,
    pub heading: SeriesStats,
    /// Distance from the planned location to the mean position.
    pub absolute_error: f64,
}

/// Pose statistics for a stationary scan: residuals against the sample mean
/// (circular mean for heading) and the absolute offset of the mean from the
/// planned location.
pub fn stationary_pose_stats(
    samples: &[(Point2<f64>, f64)],
    planned: &Point2<f64>,
) -> Result<StationaryStats> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "stationary statistics need at least 2 samples, got {}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let mean_position = Point2::from(samples.iter().map(|s| s.0.coords).sum::<Vector2<f64>>() / n);
    let (ss, cs) = samples
        .iter()
        .fold((0.0, 0.0), |(s, c), p| (s + p.1.sin(), c + p.1.cos()));
    let mean_heading = ss.atan2(cs);
    let residuals_x: Vec<f64> = samples.iter().map(|s| s.0.x - mean_position.x).collect();
    let residuals_y: Vec<f64> = samples.iter().map(|s| s.0.y - mean_position.y).collect();
    let residuals_heading: Vec<f64> = samples
        .iter()
        .map(|s| normalize_angle(s.1 - mean_heading))
        .collect();
    Ok(StationaryStats {
        x: SeriesStats::of(&residuals_x),
        y: SeriesStats::of(&residuals_y),
        heading: SeriesStats::of(&residuals_heading),
        absolute_error: (mean_position - planned).norm(),
        mean_position,
        mean_heading,
        residuals_x,
        residuals_y,
        residuals_heading,
    })
}

/// Estimated `(position, heading)` samples.
pub type PoseSamples = Vec<(Point2<f64>, f64)>;

/// Estimated poses logged while dwelling at each scan location, keyed by
/// waypoint index, in plan order.
pub fn dwell_samples(log: &TrajectoryLog) -> Vec<(usize, PoseSamples)> {
    let mut out: Vec<(usize, PoseSamples)> = Vec::new();
    for s in log.samples.iter().filter(|s| s.phase == Phase::Dwell) {
        match out.last_mut() {
            Some((idx, v)) if *idx == s.waypoint_idx => v.push(s.estimate),
            _ => out.push((s.waypoint_idx, vec![s.estimate])),
        }
    }
    out
}
