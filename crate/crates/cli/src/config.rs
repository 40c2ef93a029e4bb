//! Experiment configuration: one parameter block per subcommand.
//!
//! Every block has serde defaults, so a JSON file only needs the fields it
//! changes. Unknown fields are rejected.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use pwsynth_core::counterexample::MembershipGrid;
use pwsynth_core::hilbert::PvConfig;
use pwsynth_core::radius::RadiusConfig;
use pwsynth_core::sequences::PolyaCriteria;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::registry;

/// Environment variable holding the default mantissa width.
pub const PRECISION_ENV: &str = "PWSYNTH_PRECISION_BITS";
pub const MIN_BITS: u32 = 53;
pub const MAX_BITS: u32 = 8192;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Mantissa bits; `None` defers to the environment, then to the
    /// subcommand's default. Reports always echo the resolved value.
    #[serde(default)]
    pub precision_bits: Option<u32>,
    #[serde(default)]
    pub output: OutputConfig,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: ReportFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("pwsynth-out"),
            format: ReportFormat::Pretty,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    #[default]
    Pretty,
    Compact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand", content = "params")]
pub enum Experiment {
    VerifyCounterexample(CounterexampleParams),
    Density(DensityParams),
    Completeness(CompletenessParams),
    Radius(RadiusParams),
    Hilbert(HilbertParams),
    Polya(PolyaParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::VerifyCounterexample(_) => "verify-counterexample",
            Experiment::Density(_) => "density",
            Experiment::Completeness(_) => "completeness",
            Experiment::Radius(_) => "radius",
            Experiment::Hilbert(_) => "hilbert",
            Experiment::Polya(_) => "polya",
        }
    }

    /// Bits used when neither the config nor the environment sets them.
    pub fn default_bits(&self) -> u32 {
        match self {
            Experiment::VerifyCounterexample(_) => 256,
            _ => MIN_BITS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CounterexampleParams {
    /// Moments `k = 0..=kmax`.
    pub kmax: u32,
    /// Zeros of `U` and `V` up to `4^cutoff_exp + 1`.
    pub cutoff_exp: u32,
    /// Test points of the interpolation identity.
    pub points: Vec<Complex64>,
    pub moment_tolerance: f64,
    pub interpolation_tolerance: f64,
    pub decay_powers: Vec<u32>,
    pub decay_threshold: u64,
    /// Decay rows become pass/fail checks instead of evidence.
    pub strict_decay: bool,
    /// Monomial degrees `P(z) = z^d` for the membership evidence; empty
    /// skips it.
    pub membership_degrees: Vec<u32>,
    pub membership_grid: MembershipGrid,
}

impl Default for CounterexampleParams {
    fn default() -> Self {
        Self {
            kmax: 5,
            cutoff_exp: 12,
            points: vec![Complex64::new(0.5, 0.0), Complex64::new(10.3, 0.0), Complex64::new(2.0, 3.0)],
            moment_tolerance: 1e-8,
            interpolation_tolerance: 1e-8,
            decay_powers: (1..=10).collect(),
            decay_threshold: 1000,
            strict_decay: false,
            membership_degrees: vec![0, 1, 3],
            membership_grid: MembershipGrid::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DensityParams {
    pub sequence: String,
    pub r: f64,
    /// Window starts; default `[-5r, 5r]` for generated sequences and every
    /// window meeting the points of a finite one.
    pub scan_start: Option<f64>,
    pub scan_end: Option<f64>,
    /// Default `r / 100`.
    pub step: Option<f64>,
    /// With `expect`, the estimate is checked against it.
    pub expect: Option<f64>,
    pub tolerance: f64,
}

impl Default for DensityParams {
    fn default() -> Self {
        Self {
            sequence: "builtin:lambda-section4".into(),
            r: 1e4,
            scan_start: None,
            scan_end: None,
            step: None,
            expect: None,
            tolerance: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GChoice {
    /// `sin(pi z)`.
    #[default]
    Sin,
    /// `sin(pi z) / (U V)`.
    Section4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompletenessParams {
    pub g: GChoice,
    pub lambda1: String,
    pub lambda2: String,
    pub target: String,
    pub window: i64,
    /// Column counts; default doubles up to every point in the window.
    pub ms: Option<Vec<usize>>,
    /// Upper bound on the last residual of the curve, if checked.
    pub max_final_residual: Option<f64>,
    pub rank_tol: f64,
}

impl Default for CompletenessParams {
    fn default() -> Self {
        Self {
            g: GChoice::Sin,
            lambda1: "none".into(),
            lambda2: "builtin:integers".into(),
            target: "kernel:0.37".into(),
            window: 200,
            ms: None,
            max_final_residual: None,
            rank_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadiusParams {
    pub sequence: String,
    /// Interval lengths `a` of `L^2[0, a]`.
    pub a: Vec<f64>,
    pub truncations: Vec<usize>,
    /// Target `e^{i omega t}`.
    pub omega: f64,
    pub solver: RadiusConfig,
}

impl Default for RadiusParams {
    fn default() -> Self {
        use std::f64::consts::PI;
        Self {
            sequence: "builtin:even-integers".into(),
            a: vec![PI - 0.3, PI, PI + 0.3],
            truncations: vec![64, 256],
            omega: 0.45,
            solver: RadiusConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HilbertParams {
    /// CSV with columns `t,u`, strictly increasing `t`.
    pub input: PathBuf,
    pub points: Vec<f64>,
    /// Power-law tail `c |t|^-p` fitted to the outer samples; `None` needs
    /// samples that vanish at both ends.
    pub tail_exponent: Option<f64>,
    /// Bound on the quadrature error estimate at each point.
    pub max_error_estimate: f64,
    pub pv: PvConfig,
}

impl Default for HilbertParams {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            points: vec![0.0],
            tail_exponent: Some(2.0),
            max_error_estimate: 1e-6,
            pv: PvConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolyaParams {
    pub sequence: String,
    /// Candidate systems: `dyadic:FIRST:COUNT`, `dyadic-heads:FIRST:COUNT`
    /// or `unit:COUNT`.
    pub systems: Vec<String>,
    pub criteria: PolyaCriteria,
    /// Checked against the search outcome when set.
    pub expect_witness: Option<bool>,
}

impl Default for PolyaParams {
    fn default() -> Self {
        Self {
            sequence: "builtin:squares".into(),
            systems: vec!["dyadic:1:40".into(), "dyadic-heads:1:40".into()],
            criteria: PolyaCriteria::default(),
            expect_witness: None,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            precision_bits: None,
            output: OutputConfig::default(),
            experiment,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Fixes `precision_bits`: explicit value, else `env`, else the
    /// subcommand default.
    pub fn resolve_precision(&mut self, env: Option<&str>) -> Result<u32> {
        let bits = match (self.precision_bits, env) {
            (Some(b), _) => b,
            (None, Some(s)) => s
                .trim()
                .parse()
                .map_err(|_| CliError::config(format!("{PRECISION_ENV}={s:?} is not an integer")))?,
            (None, None) => self.experiment.default_bits(),
        };
        if !(MIN_BITS..=MAX_BITS).contains(&bits) {
            return Err(CliError::config(format!(
                "precision_bits must lie in [{MIN_BITS}, {MAX_BITS}], got {bits}"
            )));
        }
        self.precision_bits = Some(bits);
        Ok(bits)
    }

    /// Schema checks beyond what deserialization enforces.
    pub fn validate(&self) -> Result<()> {
        if let Some(b) = self.precision_bits {
            if !(MIN_BITS..=MAX_BITS).contains(&b) {
                return Err(CliError::config(format!(
                    "precision_bits must lie in [{MIN_BITS}, {MAX_BITS}], got {b}"
                )));
            }
        }
        match &self.experiment {
            Experiment::VerifyCounterexample(p) => {
                if !(2..=25).contains(&p.cutoff_exp) {
                    return Err(CliError::config(format!("cutoff_exp must lie in [2, 25], got {}", p.cutoff_exp)));
                }
                positive("moment_tolerance", p.moment_tolerance)?;
                positive("interpolation_tolerance", p.interpolation_tolerance)?;
                if p.points.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(CliError::config("test points must be finite"));
                }
                if p.membership_grid.sample_cutoffs.is_empty() && !p.membership_degrees.is_empty() {
                    return Err(CliError::config("membership_grid.sample_cutoffs is empty"));
                }
            }
            Experiment::Density(p) => {
                registry::sequence(&p.sequence)?;
                positive("r", p.r)?;
                if let Some(s) = p.step {
                    positive("step", s)?;
                }
                positive("tolerance", p.tolerance)?;
            }
            Experiment::Completeness(p) => {
                registry::sequence(&p.lambda1)?;
                registry::sequence(&p.lambda2)?;
                registry::target(&p.target)?;
                if p.window < 1 {
                    return Err(CliError::config(format!("window must be at least 1, got {}", p.window)));
                }
                if p.ms.as_ref().is_some_and(|m| m.is_empty()) {
                    return Err(CliError::config("ms is empty"));
                }
                positive("rank_tol", p.rank_tol)?;
            }
            Experiment::Radius(p) => {
                registry::sequence(&p.sequence)?;
                if p.a.is_empty() || p.truncations.is_empty() {
                    return Err(CliError::config("a and truncations must be nonempty"));
                }
                for &a in &p.a {
                    positive("a", a)?;
                }
                if p.truncations.contains(&0) {
                    return Err(CliError::config("truncations must be positive"));
                }
                if !p.omega.is_finite() {
                    return Err(CliError::config("omega must be finite"));
                }
            }
            Experiment::Hilbert(p) => {
                if p.input.as_os_str().is_empty() {
                    return Err(CliError::config("hilbert needs an input CSV"));
                }
                if p.points.is_empty() || p.points.iter().any(|x| !x.is_finite()) {
                    return Err(CliError::config("points must be nonempty and finite"));
                }
                if let Some(e) = p.tail_exponent {
                    positive("tail_exponent", e)?;
                }
                positive("max_error_estimate", p.max_error_estimate)?;
            }
            Experiment::Polya(p) => {
                registry::sequence(&p.sequence)?;
                if p.systems.is_empty() {
                    return Err(CliError::config("systems is empty"));
                }
                for s in &p.systems {
                    registry::interval_system(s)?;
                }
            }
        }
        Ok(())
    }
}
