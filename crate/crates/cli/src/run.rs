//! Orchestration: one function per subcommand producing checks, tables and
//! a JSON summary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use pwsynth_core::counterexample::{
    coefficients_a, verify_decay, verify_interpolation_nb1, verify_orthogonality, verify_pw_membership,
    ConstructionTable, CounterexampleConfig, Multiplier,
};
use pwsynth_core::hilbert::{conjugate_function, SampledFunction, TailModel};
use pwsynth_core::pw::{residual_curve, GeneratingFunction, MixedSystemSpec, PwConfig};
use pwsynth_core::radius::{radius_of_completeness_empirical, RadiusTarget};
use pwsynth_core::sequences::{evaluate_polya_candidate, polya_witness_search, upper_density_estimate, DensityScan};
use pwsynth_core::PrecisionConfig;
use serde_json::json;

use crate::config::{
    CompletenessParams, CounterexampleParams, DensityParams, Experiment, ExperimentConfig, GChoice, HilbertParams,
    PolyaParams, RadiusParams,
};
use crate::error::{CliError, ModuleContext, Result};
use crate::registry;
use crate::report::{fmt_f64, write_outputs, Check, Report, Table, SCHEMA_VERSION};

/// What a subcommand hands back before anything is written.
pub struct Outcome {
    pub report: Report,
    pub tables: Vec<Table>,
}

struct Partial {
    checks: Vec<Check>,
    tables: Vec<Table>,
    data: serde_json::Value,
    bits_used: u32,
}

/// Runs a validated configuration whose precision is already resolved.
pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    config.validate()?;
    let bits = config
        .precision_bits
        .ok_or_else(|| CliError::config("precision_bits is unresolved"))?;
    let start = Instant::now();
    let part = match &config.experiment {
        Experiment::VerifyCounterexample(p) => counterexample(p, bits)?,
        Experiment::Density(p) => density(p)?,
        Experiment::Completeness(p) => completeness(p, bits)?,
        Experiment::Radius(p) => radius(p)?,
        Experiment::Hilbert(p) => hilbert(p)?,
        Experiment::Polya(p) => polya(p)?,
    };
    let report = Report {
        schema_version: SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: config.experiment.name().to_string(),
        config: config.clone(),
        precision_bits_used: part.bits_used,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        checks: part.checks,
        files: part.tables.iter().map(|t| t.file_name.clone()).collect(),
        data: part.data,
    };
    Ok(Outcome {
        report,
        tables: part.tables,
    })
}

/// Resolves precision against `env`, runs, and writes everything under the
/// configured output directory. Returns the report and its path.
pub fn execute(mut config: ExperimentConfig, env: Option<&str>) -> Result<(Report, PathBuf)> {
    config.resolve_precision(env)?;
    let out = run(&config)?;
    let dir: &Path = &config.output.dir;
    let path = write_outputs(dir, &out.report, &out.tables, config.output.format)?;
    Ok((out.report, path))
}

fn opt(v: Option<u64>) -> String {
    v.map(|n| n.to_string()).unwrap_or_default()
}

fn counterexample(p: &CounterexampleParams, bits: u32) -> Result<Partial> {
    let cfg = CounterexampleConfig {
        moment_kmax: p.kmax,
        precision: PrecisionConfig::with_bits(bits),
        test_points: p.points.clone(),
        moment_tolerance: p.moment_tolerance,
        interpolation_tolerance: p.interpolation_tolerance,
        ..CounterexampleConfig::default().with_cutoff_exponent(p.cutoff_exp)
    };
    let table = ConstructionTable::build(&cfg).context(|| "building the construction table".into())?;
    let mut checks = Vec::new();

    let interp = verify_interpolation_nb1(&table, &p.points, p.interpolation_tolerance)
        .context(|| "interpolation identity".into())?;
    let mut interp_csv = Table::new(
        "interpolation.csv",
        vec!["re", "im", "log10_abs_lhs", "log10_abs_rhs", "residual"],
    );
    for r in &interp {
        checks.push(Check::at_most(format!("interpolation[{}]", r.z), r.residual, r.tolerance));
        interp_csv.push(vec![
            fmt_f64(r.z.re),
            fmt_f64(r.z.im),
            fmt_f64(r.lhs.log10_abs()),
            fmt_f64(r.rhs.log10_abs()),
            fmt_f64(r.residual),
        ]);
    }

    let moments = verify_orthogonality(&table, p.kmax, p.moment_tolerance).context(|| "moment sums".into())?;
    let mut moments_csv = Table::new(
        "moments.csv",
        vec!["k", "log10_abs_sum", "log10_max_term", "relative_residual", "omitted_relative"],
    );
    for m in &moments {
        checks.push(Check::at_most(
            format!("moment[{}].relative_residual", m.k),
            m.relative_residual,
            m.tolerance,
        ));
        checks.push(Check::at_most(
            format!("moment[{}].omitted_relative", m.k),
            m.omitted_relative,
            m.tolerance,
        ));
        moments_csv.push(vec![
            m.k.to_string(),
            fmt_f64(m.log10_abs_sum),
            fmt_f64(m.log10_max_term),
            fmt_f64(m.relative_residual),
            fmt_f64(m.omitted_relative),
        ]);
    }

    let coeffs = coefficients_a(&table);
    let decay = verify_decay(&coeffs, &p.decay_powers, p.decay_threshold);
    let mut coeff_csv = Table::new("coefficients.csv", vec!["n", "log10_abs_a"]);
    for &(n, l) in &decay.table {
        coeff_csv.push(vec![n.to_string(), fmt_f64(l)]);
    }
    let mut decay_csv = Table::new(
        "decay.csv",
        vec![
            "power",
            "threshold",
            "max_log10_scaled",
            "decreasing",
            "first_increase",
            "first_at_least_one",
            "envelope_below_one_from",
        ],
    );
    for row in &decay.rows {
        let max = Check::new(
            format!("decay[{}].max_log10_scaled", row.power),
            row.max_log10_scaled,
            if p.strict_decay {
                crate::report::Comparison::AtMost { tolerance: 0.0 }
            } else {
                crate::report::Comparison::Evidence
            },
        );
        let mono = Check::flag(
            format!("decay[{}].decreasing", row.power),
            row.decreasing,
            p.strict_decay.then_some(true),
        );
        let note = format!(
            "first increase at {}; envelope below 1 from {}",
            opt(row.first_increase),
            opt(row.envelope_below_one_from)
        );
        checks.push(max.with_note(note.clone()));
        checks.push(mono.with_note(note));
        decay_csv.push(vec![
            row.power.to_string(),
            row.threshold.to_string(),
            fmt_f64(row.max_log10_scaled),
            row.decreasing.to_string(),
            opt(row.first_increase),
            opt(row.first_at_least_one),
            opt(row.envelope_below_one_from),
        ]);
    }

    let mut tables = vec![coeff_csv, moments_csv, interp_csv, decay_csv];
    let mut membership = Vec::new();
    if !p.membership_degrees.is_empty() {
        let mults: Vec<Multiplier> = p.membership_degrees.iter().map(|&d| Multiplier::Monomial(d)).collect();
        membership =
            verify_pw_membership(&table, &mults, &p.membership_grid).context(|| "membership evidence".into())?;
        let mut csv = Table::new("membership.csv", vec!["degree", "cutoff", "partial_sum"]);
        for (ev, &d) in membership.iter().zip(&p.membership_degrees) {
            for &(n, s) in &ev.partial_sums {
                csv.push(vec![d.to_string(), n.to_string(), fmt_f64(s)]);
            }
            let rel = match (ev.increments.last(), ev.partial_sums.last()) {
                (Some(i), Some(&(_, s))) if s != 0.0 => i / s,
                _ => 0.0,
            };
            checks.push(Check::evidence(format!("membership[z^{d}].last_relative_increment"), rel));
            checks.push(Check::flag(format!("membership[z^{d}].decaying"), ev.decaying, None));
        }
        tables.push(csv);
    }

    let data = json!({
        "zero_cutoff": table.zero_cutoff,
        "support_size": table.len(),
        "decay": decay.rows,
        "membership": membership,
        "strict_decay": p.strict_decay,
    });
    Ok(Partial {
        checks,
        tables,
        data,
        bits_used: table.precision.mantissa_bits,
    })
}

fn density(p: &DensityParams) -> Result<Partial> {
    let seq = registry::sequence(&p.sequence)?;
    let mut scan = if seq.is_finite() {
        DensityScan::covering(&seq, p.r).unwrap_or(DensityScan::new(0.0, 0.0))
    } else {
        DensityScan::new(-5.0 * p.r, 5.0 * p.r)
    };
    scan.start = p.scan_start.unwrap_or(scan.start);
    scan.end = p.scan_end.unwrap_or(scan.end);
    scan.step = p.step.or(scan.step);
    let est = upper_density_estimate(&seq, p.r, &scan).context(|| format!("density of {}", p.sequence))?;
    let check = match p.expect {
        Some(t) => Check::within("density_estimate", est.value, t, p.tolerance),
        None => Check::evidence("density_estimate", est.value),
    };
    let mut csv = Table::new(
        "density.csv",
        vec!["r", "estimate", "max_count", "argmax_window_start", "windows_scanned"],
    );
    csv.push(vec![
        fmt_f64(est.window_r),
        fmt_f64(est.value),
        est.max_count.to_string(),
        fmt_f64(est.argmax_window_start),
        est.windows_scanned.to_string(),
    ]);
    Ok(Partial {
        checks: vec![check],
        tables: vec![csv],
        data: json!({ "estimate": est, "scan": scan }),
        bits_used: 53,
    })
}

/// `1, 2, 4, ...` below `total`, then `total`.
pub fn doubling_schedule(total: usize) -> Vec<usize> {
    if total == 0 {
        return vec![0];
    }
    let mut ms: Vec<usize> = std::iter::successors(Some(1usize), |m| Some(m * 2))
        .take_while(|&m| m < total)
        .collect();
    ms.push(total);
    ms
}

fn completeness(p: &CompletenessParams, bits: u32) -> Result<Partial> {
    let g = match p.g {
        GChoice::Sin => GeneratingFunction::Sine,
        GChoice::Section4 => GeneratingFunction::SectionFour,
    };
    let l1 = registry::sequence(&p.lambda1)?;
    let l2 = registry::sequence(&p.lambda2)?;
    let n = p.window as f64;
    let available = (l1.count_in(-n, n, true) + l2.count_in(-n, n, true)) as usize;
    let spec = MixedSystemSpec::new(g, l1, l2).context(|| "mixed system".into())?;
    let target = registry::target(&p.target)?;
    let ms = p.ms.clone().unwrap_or_else(|| doubling_schedule(available));
    let cfg = PwConfig {
        precision: PrecisionConfig::with_bits(bits),
        rank_tol: p.rank_tol,
    };
    let curve = residual_curve(&spec, &target, &ms, &[p.window], &cfg)
        .context(|| format!("residual curve for {}", target.label()))?;

    let mut checks = Vec::new();
    let mut csv = Table::new("residuals.csv", vec!["m", "window_N", "residual", "rank", "condition_estimate"]);
    for pt in &curve {
        checks.push(Check::evidence(format!("residual[m={}]", pt.m), pt.residual));
        csv.push(vec![
            pt.m.to_string(),
            pt.window.to_string(),
            fmt_f64(pt.residual),
            pt.rank.to_string(),
            fmt_f64(pt.condition_estimate),
        ]);
    }
    if let (Some(tol), Some(last)) = (p.max_final_residual, curve.last()) {
        checks.push(Check::at_most("final_residual", last.residual, tol));
    }
    Ok(Partial {
        checks,
        tables: vec![csv],
        data: json!({ "target": target.label(), "points_in_window": available, "curve": curve }),
        bits_used: bits,
    })
}

fn radius(p: &RadiusParams) -> Result<Partial> {
    let seq = registry::sequence(&p.sequence)?;
    let target = RadiusTarget::Exponential { omega: p.omega };
    let mut checks = Vec::new();
    let mut csv = Table::new(
        "radius.csv",
        vec![
            "truncation",
            "a",
            "residual",
            "rank",
            "condition_estimate",
            "ill_conditioned",
            "gram_discrepancy",
        ],
    );
    let mut curves = Vec::new();
    for &t in &p.truncations {
        let curve = radius_of_completeness_empirical(&seq, &p.a, t, &target, &p.solver)
            .context(|| format!("radius curve with {t} frequencies"))?;
        for pt in &curve.points {
            checks.push(Check::evidence(
                format!("residual[n={},a={}]", curve.truncation, fmt_f64(pt.a)),
                pt.residual,
            ));
            csv.push(vec![
                curve.truncation.to_string(),
                fmt_f64(pt.a),
                fmt_f64(pt.residual),
                pt.rank.to_string(),
                fmt_f64(pt.condition_estimate),
                pt.ill_conditioned.to_string(),
                fmt_f64(pt.gram_discrepancy),
            ]);
        }
        curves.push(json!({ "truncation": curve.truncation, "points": curve.points }));
    }
    Ok(Partial {
        checks,
        tables: vec![csv],
        data: json!({ "curves": curves }),
        bits_used: 53,
    })
}

/// Two numeric columns `t,u`; a non-numeric first row is a header.
pub fn read_samples(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let (mut t, mut u) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.len() < 2 {
            return Err(CliError::config(format!("{}: row {} has fewer than two columns", path.display(), i + 1)));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                t.push(a);
                u.push(b);
            }
            _ if i == 0 => continue,
            _ => {
                return Err(CliError::config(format!("{}: row {} is not numeric", path.display(), i + 1)));
            }
        }
    }
    Ok((t, u))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            _ => unreachable!(),
        }
    } else {
        CliError::config(format!("{}: {e}", path.display()))
    }
}

fn hilbert(p: &HilbertParams) -> Result<Partial> {
    let (grid, values) = read_samples(&p.input)?;
    let mut u = SampledFunction::new(grid.clone(), values.clone()).context(|| "input samples".into())?;
    let mut checks = Vec::new();
    let mut tail = None;
    if let Some(e) = p.tail_exponent {
        let model = TailModel::fit(&grid, &values, e).context(|| "tail fit".into())?;
        let misfit = model.misfit(&grid, &values).context(|| "tail fit".into())?;
        checks.push(Check::evidence("tail_misfit", misfit));
        u = u.with_tail(model).context(|| "tail model".into())?;
        tail = Some(model);
    }
    let mut csv = Table::new("conjugate.csv", vec!["x", "value", "error_estimate", "rho"]);
    let mut values_out = Vec::new();
    for &x in &p.points {
        let v = conjugate_function(&u, x, &p.pv).context(|| format!("conjugate at {x}"))?;
        checks.push(Check::at_most(
            format!("conjugate[{}].error_estimate", fmt_f64(x)),
            v.error_estimate,
            p.max_error_estimate,
        ));
        csv.push(vec![fmt_f64(x), fmt_f64(v.value), fmt_f64(v.error_estimate), fmt_f64(v.rho)]);
        values_out.push(json!({ "x": x, "value": v.value, "error_estimate": v.error_estimate }));
    }
    Ok(Partial {
        checks,
        tables: vec![csv],
        data: json!({ "samples": grid.len(), "tail": tail, "values": values_out }),
        bits_used: 53,
    })
}

fn polya(p: &PolyaParams) -> Result<Partial> {
    let seq = registry::sequence(&p.sequence)?;
    let systems = p
        .systems
        .iter()
        .map(|s| registry::interval_system(s))
        .collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    let mut csv = Table::new("polya.csv", vec!["system", "k", "a", "b", "ratio", "partial_sum"]);
    for (label, sys) in p.systems.iter().zip(&systems) {
        let ev = evaluate_polya_candidate(&seq, sys, &p.criteria);
        for (k, ((&(a, b), &r), &s)) in sys.intervals().iter().zip(&ev.ratios).zip(&ev.partial_sums).enumerate() {
            csv.push(vec![label.clone(), k.to_string(), fmt_f64(a), fmt_f64(b), fmt_f64(r), fmt_f64(s)]);
        }
        checks.push(Check::flag(format!("system[{label}].long"), ev.long, None));
        checks.push(Check::flag(format!("system[{label}].ratios_vanish"), ev.ratios_vanish, None));
    }
    let witness = polya_witness_search(&seq, &systems, &p.criteria);
    checks.push(Check::flag("witness_found", witness.is_some(), p.expect_witness));
    Ok(Partial {
        checks,
        tables: vec![csv],
        data: json!({
            "witness_system": witness.as_ref().map(|w| p.systems[w.candidate].clone()),
            "witness": witness,
        }),
        bits_used: 53,
    })
}
