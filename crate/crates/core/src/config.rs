//! Run configuration loaded from TOML.
//!
//! ```toml
//! seed = 7
//! output_dir = "out/engr"
//!
//! [field]        # FieldLayout, meters
//! [scanner]      # ScannerSpec, angles in degrees
//! [planning]     # min_scan_distance, robot_clearance, metric, origin, route_set_size
//! [sim]          # PurePursuitParams, radians and seconds
//! [noise]        # localization noise seen by the controller
//! [eval]         # scan synthesis, pose error model, registration scoring
//! ```
//!
//! Every section except `[field]` may be omitted; missing keys take their
//! defaults. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use nalgebra::Point3;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::field::FieldLayout;
use crate::nav::{NoiseModel, PurePursuitParams};
use crate::raycast::ScannerSpec;
use crate::registration::{IcpMetric, IcpParams, ReportParams};
use crate::routing::Metric;

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanningConfig {
    pub min_scan_distance: f64,
    pub robot_clearance: f64,
    pub metric: Metric,
    /// Route start and end; defaults to the southeast headland intersection.
    pub origin: Option<[f64; 2]>,
    /// Also route the first `n` greedy picks (padded if the cover is smaller).
    pub route_set_size: Option<usize>,
}

impl Default for PlanningConfig {
    fn default() -> Self {
        PlanningConfig {
            min_scan_distance: 0.8,
            robot_clearance: 0.3,
            metric: Metric::Aha,
            origin: None,
            route_set_size: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub position_sigma: f64,
    /// Radians.
    pub heading_sigma: f64,
    pub wheel_slip_sigma: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            position_sigma: 0.005,
            heading_sigma: 0.3f64.to_radians(),
            wheel_slip_sigma: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Correspondence gate for cloud-to-cloud refinement, meters.
    pub gate: f64,
    /// Finest gate of the coarse-to-fine schedule.
    pub min_gate: f64,
    pub icp_metric: IcpMetric,
    /// Per gate stage.
    pub max_iters: usize,
    /// Points drawn per scan for the error statistics.
    pub subsample: usize,
    /// Angular step for synthesized scans; defaults to the scanner's.
    pub angular_step: Option<f64>,
    /// Range noise of synthesized points, meters.
    pub range_noise: f64,
    /// True ground tilt at each scan, uniform in +-this, degrees.
    pub platform_tilt_deg: f64,
    /// Error of the roll/pitch reported by the tilt compensator, degrees.
    pub tilt_sigma_deg: f64,
    /// Extra yaw error on top of the localization estimate, degrees.
    pub yaw_sigma_deg: f64,
    /// Error of the scanner height estimate, meters.
    pub height_sigma: f64,
    pub target_radius: f64,
    /// Explicit sphere centers; otherwise `n_targets` are placed at unused
    /// corridor intersections with heights spread over 1.4-2.0 m.
    pub targets: Option<Vec<[f64; 3]>>,
    pub n_targets: usize,
    /// Also write every scan in its scanner frame.
    pub write_scans: bool,
    /// Add a ground plane at z = 0 over the field to the synthesized scene.
    pub ground: bool,
    pub reference: ReferenceFrame,
}

/// Frame in which the true registration is expressed for scoring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceFrame {
    /// The first scan's estimated frame, which both registrations keep fixed.
    FirstScan,
    /// The rigid frame that best fits each registration as a whole.
    BestFit,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            gate: 0.30,
            min_gate: 0.03,
            icp_metric: IcpMetric::PointToPlane,
            max_iters: 50,
            subsample: 10_000,
            angular_step: None,
            range_noise: 0.002,
            platform_tilt_deg: 2.0,
            tilt_sigma_deg: 0.6,
            yaw_sigma_deg: 0.1,
            height_sigma: 0.01,
            target_radius: 0.1,
            targets: None,
            n_targets: 5,
            write_scans: false,
            ground: false,
            reference: ReferenceFrame::FirstScan,
        }
    }
}

impl EvalConfig {
    pub fn icp(&self) -> IcpParams {
        IcpParams {
            max_correspondence: self.gate,
            min_correspondence: self.min_gate,
            metric: self.icp_metric,
            max_iters: self.max_iters,
            ..IcpParams::default()
        }
    }

    pub fn report(&self, seed: u64) -> ReportParams {
        ReportParams {
            subsample: self.subsample,
            seed,
        }
    }

    pub fn explicit_targets(&self) -> Option<Vec<Point3<f64>>> {
        self.targets
            .as_ref()
            .map(|t| t.iter().map(|c| Point3::from(*c)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub field: FieldLayout,
    #[serde(default)]
    pub scanner: ScannerSpec,
    #[serde(default)]
    pub planning: PlanningConfig,
    #[serde(default)]
    pub sim: PurePursuitParams,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub eval: EvalConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| {
                text[..s.start.min(text.len())].matches('\n').count() + 1
            });
            Error::Parse {
                path: path.to_path_buf(),
                line,
                reason: e.message().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        self.field.validate()?;
        self.scanner.validate()?;
        self.sim.validate()?;
        self.noise_model().validate()?;
        let p = &self.planning;
        for (name, v) in [
            ("planning.min_scan_distance", p.min_scan_distance),
            ("planning.robot_clearance", p.robot_clearance),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::validation(name, format!("must be >= 0, got {v}")));
            }
        }
        if p.route_set_size == Some(0) {
            return Err(Error::validation(
                "planning.route_set_size",
                "must be at least 1",
            ));
        }
        let e = &self.eval;
        for (name, v) in [
            ("eval.range_noise", e.range_noise),
            ("eval.platform_tilt_deg", e.platform_tilt_deg),
            ("eval.tilt_sigma_deg", e.tilt_sigma_deg),
            ("eval.yaw_sigma_deg", e.yaw_sigma_deg),
            ("eval.height_sigma", e.height_sigma),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::validation(name, format!("must be >= 0, got {v}")));
            }
        }
        if !(e.gate > 0.0) {
            return Err(Error::validation("eval.gate", "must be > 0"));
        }
        if !(e.min_gate > 0.0 && e.min_gate <= e.gate) {
            return Err(Error::validation("eval.min_gate", "must be in (0, gate]"));
        }
        if !(e.target_radius > 0.0) {
            return Err(Error::validation("eval.target_radius", "must be > 0"));
        }
        if e.subsample == 0 {
            return Err(Error::validation("eval.subsample", "must be at least 1"));
        }
        if let Some(step) = e.angular_step {
            if !(step > 0.0) {
                return Err(Error::validation("eval.angular_step", "must be > 0"));
            }
        }
        Ok(())
    }

    pub fn noise_model(&self) -> NoiseModel {
        NoiseModel {
            position_sigma: self.noise.position_sigma,
            heading_sigma: self.noise.heading_sigma,
            wheel_slip_sigma: self.noise.wheel_slip_sigma,
            seed: self.seed,
        }
    }

    /// Scanner used to synthesize evaluation scans.
    pub fn eval_scanner(&self) -> ScannerSpec {
        ScannerSpec {
            angular_step: self.eval.angular_step.unwrap_or(self.scanner.angular_step),
            ..self.scanner.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[field]
n_rows = 2
plots_per_row = 2
plot_length = 3.0
plot_width = 1.0
plot_height = 1.9
row_spacing = 1.8
alley_width = 1.5
headland_depth = 1.5
"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = RunConfig::from_toml(MINIMAL, Path::new("c.toml")).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.scanner, ScannerSpec::default());
        assert_eq!(cfg.planning.metric, Metric::Aha);
        assert_eq!(cfg.eval.gate, 0.30);
        assert_eq!(cfg.field.voxel_size, [0.5, 0.5, 0.33]);
    }

    #[test]
    fn bad_values_are_validation_errors() {
        let text = MINIMAL.replace("n_rows = 2", "n_rows = 0");
        let err = RunConfig::from_toml(&text, Path::new("c.toml")).unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("n_rows"));
    }

    #[test]
    fn syntax_errors_name_the_line() {
        let text = format!("{MINIMAL}\n[planning]\nmetric = \"diagonal\"\n");
        match RunConfig::from_toml(&text, Path::new("c.toml")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 13),
            other => panic!("{other:?}"),
        }
        let unknown = format!("{MINIMAL}colour = 3\n");
        assert!(RunConfig::from_toml(&unknown, Path::new("c.toml"))
            .unwrap_err()
            .is_validation());
    }
}
