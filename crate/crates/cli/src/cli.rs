//! Command-line surface. Flags override the config file, which overrides
//! the defaults.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::config::{
    CompletenessParams, CounterexampleParams, DensityParams, Experiment, ExperimentConfig, GChoice, HilbertParams,
    PolyaParams, RadiusParams, ReportFormat, PRECISION_ENV,
};
use crate::error::{CliError, Result};
use crate::registry::parse_complex;
use crate::report::{read_report, Status};
use crate::run::execute;

#[derive(Debug, Parser)]
#[command(name = "pwsynth", version, about = "Paley-Wiener experiments: run, check, and record")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON experiment configuration; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for report.json and the CSV files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Mantissa bits (default: $PWSYNTH_PRECISION_BITS, then per subcommand).
    #[arg(long, global = true)]
    pub precision_bits: Option<u32>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<ReportFormat>,
    /// Print the resolved configuration as JSON and exit without running.
    #[arg(long, global = true)]
    pub print_config: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moment, interpolation, decay and membership checks of the lacunary construction.
    VerifyCounterexample(CounterexampleArgs),
    /// Windowed upper density of a sequence.
    Density(DensityArgs),
    /// Residual curve of a mixed kernel / divided-difference system.
    Completeness(CompletenessArgs),
    /// Empirical radius of completeness of exponentials.
    Radius(RadiusArgs),
    /// Conjugate function of sampled boundary data.
    Hilbert(HilbertArgs),
    /// Search for long interval systems witnessing a non-Pólya sequence.
    Polya(PolyaArgs),
    /// Run whatever experiment the --config file describes.
    Run,
    /// Re-derive every check status of a report from its values and tolerances.
    Recheck {
        report: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    #[arg(long)]
    pub kmax: Option<u32>,
    #[arg(long)]
    pub cutoff_exp: Option<u32>,
    /// Comma-separated complex test points, e.g. `0.5,10.3,2+3i`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = complex_arg)]
    pub points: Option<Vec<Complex64>>,
    #[arg(long)]
    pub moment_tolerance: Option<f64>,
    #[arg(long)]
    pub interpolation_tolerance: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub decay_powers: Option<Vec<u32>>,
    #[arg(long)]
    pub decay_threshold: Option<u64>,
    /// Treat the decay rows as pass/fail checks.
    #[arg(long)]
    pub strict_decay: bool,
    #[arg(long, value_delimiter = ',', conflicts_with = "no_membership")]
    pub membership_degrees: Option<Vec<u32>>,
    #[arg(long)]
    pub no_membership: bool,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// `builtin:NAME`, `list:x1,x2,...` or `none`.
    #[arg(long)]
    pub sequence: Option<String>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub scan_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub scan_end: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Check the estimate against this value.
    #[arg(long)]
    pub expect: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CompletenessArgs {
    #[arg(long, value_enum)]
    pub g: Option<GChoice>,
    #[arg(long)]
    pub lambda1: Option<String>,
    #[arg(long)]
    pub lambda2: Option<String>,
    /// `kernel:<point>`.
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<String>,
    #[arg(long)]
    pub window: Option<i64>,
    #[arg(long, value_delimiter = ',')]
    pub ms: Option<Vec<usize>>,
    #[arg(long)]
    pub max_final_residual: Option<f64>,
    #[arg(long)]
    pub rank_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RadiusArgs {
    #[arg(long)]
    pub sequence: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub a: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub truncations: Option<Vec<usize>>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
}

#[derive(Debug, Args)]
pub struct HilbertArgs {
    /// CSV with columns `t,u`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub points: Option<Vec<f64>>,
    /// Exponent of the fitted tail `c |t|^-p`, or `none`.
    #[arg(long, value_parser = tail_arg)]
    pub tail_exponent: Option<TailArg>,
    #[arg(long)]
    pub max_error_estimate: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct TailArg(pub Option<f64>);

#[derive(Debug, Args)]
pub struct PolyaArgs {
    #[arg(long)]
    pub sequence: Option<String>,
    /// Comma-separated `dyadic:FIRST:COUNT`, `dyadic-heads:FIRST:COUNT`, `unit:COUNT`.
    #[arg(long, value_delimiter = ',')]
    pub systems: Option<Vec<String>>,
    #[arg(long)]
    pub ratio_tol: Option<f64>,
    #[arg(long)]
    pub longness_threshold: Option<f64>,
    #[arg(long)]
    pub min_tail_term: Option<f64>,
    #[arg(long)]
    pub expect_witness: Option<bool>,
}

fn complex_arg(s: &str) -> std::result::Result<Complex64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

fn tail_arg(s: &str) -> std::result::Result<TailArg, String> {
    if s == "none" {
        return Ok(TailArg(None));
    }
    s.parse::<f64>()
        .map(|p| TailArg(Some(p)))
        .map_err(|_| format!("{s:?} is neither a number nor `none`"))
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl CounterexampleArgs {
    fn apply(self, p: &mut CounterexampleParams) {
        set(&mut p.kmax, self.kmax);
        set(&mut p.cutoff_exp, self.cutoff_exp);
        set(&mut p.points, self.points);
        set(&mut p.moment_tolerance, self.moment_tolerance);
        set(&mut p.interpolation_tolerance, self.interpolation_tolerance);
        set(&mut p.decay_powers, self.decay_powers);
        set(&mut p.decay_threshold, self.decay_threshold);
        p.strict_decay |= self.strict_decay;
        set(&mut p.membership_degrees, self.membership_degrees);
        if self.no_membership {
            p.membership_degrees.clear();
        }
    }
}

impl DensityArgs {
    fn apply(self, p: &mut DensityParams) {
        set(&mut p.sequence, self.sequence);
        set(&mut p.r, self.r);
        if self.scan_start.is_some() {
            p.scan_start = self.scan_start;
        }
        if self.scan_end.is_some() {
            p.scan_end = self.scan_end;
        }
        if self.step.is_some() {
            p.step = self.step;
        }
        if self.expect.is_some() {
            p.expect = self.expect;
        }
        set(&mut p.tolerance, self.tolerance);
    }
}

impl CompletenessArgs {
    fn apply(self, p: &mut CompletenessParams) {
        set(&mut p.g, self.g);
        set(&mut p.lambda1, self.lambda1);
        set(&mut p.lambda2, self.lambda2);
        set(&mut p.target, self.target);
        set(&mut p.window, self.window);
        if self.ms.is_some() {
            p.ms = self.ms;
        }
        if self.max_final_residual.is_some() {
            p.max_final_residual = self.max_final_residual;
        }
        set(&mut p.rank_tol, self.rank_tol);
    }
}

impl RadiusArgs {
    fn apply(self, p: &mut RadiusParams) {
        set(&mut p.sequence, self.sequence);
        set(&mut p.a, self.a);
        set(&mut p.truncations, self.truncations);
        set(&mut p.omega, self.omega);
    }
}

impl HilbertArgs {
    fn apply(self, p: &mut HilbertParams) {
        set(&mut p.input, self.input);
        set(&mut p.points, self.points);
        if let Some(TailArg(t)) = self.tail_exponent {
            p.tail_exponent = t;
        }
        set(&mut p.max_error_estimate, self.max_error_estimate);
    }
}

impl PolyaArgs {
    fn apply(self, p: &mut PolyaParams) {
        set(&mut p.sequence, self.sequence);
        set(&mut p.systems, self.systems);
        set(&mut p.criteria.ratio_tol, self.ratio_tol);
        set(&mut p.criteria.longness.threshold, self.longness_threshold);
        set(&mut p.criteria.longness.min_tail_term, self.min_tail_term);
        if self.expect_witness.is_some() {
            p.expect_witness = self.expect_witness;
        }
    }
}

/// The experiment a subcommand asks for, starting from `base` when it is
/// the same subcommand.
fn experiment_for(command: Command, base: Option<Experiment>) -> Result<Experiment> {
    macro_rules! merge {
        ($variant:ident, $args:expr) => {{
            let mut p = match base {
                None => Default::default(),
                Some(Experiment::$variant(p)) => p,
                Some(other) => {
                    return Err(CliError::config(format!(
                        "config file describes `{}`, not `{}`",
                        other.name(),
                        Experiment::$variant(Default::default()).name()
                    )))
                }
            };
            $args.apply(&mut p);
            Experiment::$variant(p)
        }};
    }
    Ok(match command {
        Command::VerifyCounterexample(a) => merge!(VerifyCounterexample, a),
        Command::Density(a) => merge!(Density, a),
        Command::Completeness(a) => merge!(Completeness, a),
        Command::Radius(a) => merge!(Radius, a),
        Command::Hilbert(a) => merge!(Hilbert, a),
        Command::Polya(a) => merge!(Polya, a),
        Command::Run => base.ok_or_else(|| CliError::config("`run` needs --config"))?,
        Command::Recheck { .. } => unreachable!("handled before config assembly"),
    })
}

/// Assembles the configuration from the file, the flags and the defaults.
/// Precision is left for [`ExperimentConfig::resolve_precision`].
pub fn build_config(global: &GlobalArgs, command: Command) -> Result<ExperimentConfig> {
    let file = global.config.as_deref().map(ExperimentConfig::load).transpose()?;
    let (mut cfg, base) = match file {
        Some(f) => {
            let exp = f.experiment.clone();
            (f, Some(exp))
        }
        None => (ExperimentConfig::new(Experiment::Density(Default::default())), None),
    };
    cfg.experiment = experiment_for(command, base)?;
    if global.precision_bits.is_some() {
        cfg.precision_bits = global.precision_bits;
    }
    set(&mut cfg.output.dir, global.out.clone());
    set(&mut cfg.output.format, global.format);
    Ok(cfg)
}

fn print_checks(report: &crate::report::Report) {
    for c in &report.checks {
        let tag = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Evidence => "EVIDENCE",
        };
        println!("{tag:<8} {} = {:?}", c.name, c.value);
    }
}

fn recheck(path: &std::path::Path) -> Result<bool> {
    let report = read_report(path)?;
    let mut ok = true;
    for c in &report.checks {
        let s = c.recompute();
        if s != c.status {
            println!("MISMATCH {}: recorded {:?}, recomputed {:?}", c.name, c.status, s);
            ok = false;
        }
        ok &= s != Status::Fail;
    }
    print_checks(&report);
    Ok(ok)
}

/// Entry point shared by the binary and the tests.
pub fn main_with(cli: Cli) -> ExitCode {
    let result = (|| -> Result<bool> {
        if let Command::Recheck { report } = &cli.command {
            return recheck(report);
        }
        let cfg = build_config(&cli.global, cli.command)?;
        let env = std::env::var(PRECISION_ENV).ok();
        if cli.global.print_config {
            let mut cfg = cfg;
            cfg.resolve_precision(env.as_deref())?;
            cfg.validate()?;
            println!("{}", cfg.to_json());
            return Ok(true);
        }
        let (report, path) = execute(cfg, env.as_deref())?;
        print_checks(&report);
        println!("report: {}", path.display());
        Ok(report.passed())
    })();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
