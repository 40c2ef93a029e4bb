use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pwsynth_cli::config::{CounterexampleParams, DensityParams, Experiment, ExperimentConfig, HilbertParams};
use pwsynth_cli::report::{read_report, Status};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pwsynth"));
    c.env_remove("PWSYNTH_PRECISION_BITS");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn counterexample_example_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["verify-counterexample", "--kmax", "5", "--cutoff-exp", "12", "--precision-bits", "256"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep = read_report(&dir.path().join("report.json")).unwrap();
    assert_eq!(rep.precision_bits_used, 256);
    let moments: Vec<_> = rep
        .checks
        .iter()
        .filter(|c| c.name.starts_with("moment[") && c.name.ends_with("relative_residual"))
        .collect();
    assert_eq!(moments.len(), 6);
    assert!(moments.iter().all(|c| c.status == Status::Pass && c.value <= 1e-8));
    // Decay is evidence unless asked for.
    assert!(rep
        .checks
        .iter()
        .filter(|c| c.name.starts_with("decay["))
        .all(|c| c.status == Status::Evidence));

    let coeffs = csv_rows(&dir.path().join("coefficients.csv"));
    assert_eq!(coeffs.len(), 4108);
    assert_eq!(coeffs[0][0], "1");
    assert_eq!(csv_rows(&dir.path().join("moments.csv")).len(), 6);
}

#[test]
fn strict_decay_fails_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["verify-counterexample", "--cutoff-exp", "10", "--precision-bits", "256", "--no-membership", "--strict-decay"],
        dir.path(),
    );
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    let rep = read_report(&dir.path().join("report.json")).unwrap();
    assert!(rep.failures().all(|c| c.name.starts_with("decay[")));
    assert!(rep.failures().count() > 0);
}

#[test]
fn density_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["density", "--sequence", "builtin:lambda-section4", "--r", "10000", "--expect", "1", "--tolerance", "0.02"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep = read_report(&dir.path().join("report.json")).unwrap();
    assert!((rep.checks[0].value - 1.0001).abs() < 1e-12, "{}", rep.checks[0].value);
}

#[test]
fn failed_check_gives_exit_one_and_evidence_never_does() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["density", "--sequence", "squares", "--r", "100", "--expect", "1"], dir.path());
    assert_eq!(code(&o), 1);
    let o = run(&["density", "--sequence", "squares", "--r", "100"], dir.path());
    assert_eq!(code(&o), 0);
}

#[test]
fn completeness_example_reaches_zero_residual() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "completeness", "--g", "sin", "--lambda2", "integers", "--target", "kernel:0.37", "--window", "200",
            "--max-final-residual", "1e-10",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("residuals.csv"));
    let last = rows.last().unwrap();
    assert_eq!(last[0], "401");
    assert_eq!(last[1], "200");
    assert!(last[2].parse::<f64>().unwrap() < 1e-10);
    // Residuals never increase with m.
    let r: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(r.windows(2).all(|w| w[1] <= w[0] + 1e-14));
}

#[test]
fn identical_config_gives_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["completeness", "--g", "section4", "--lambda2", "lambda-section4", "--window", "40"];
    assert_eq!(code(&run(&args, a.path())), 0);
    assert_eq!(code(&run(&args, b.path())), 0);
    let read = |d: &Path| std::fs::read(d.join("residuals.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));

    // Re-running from the echoed config reproduces the data too.
    let rep = read_report(&a.path().join("report.json")).unwrap();
    let c = tempfile::tempdir().unwrap();
    let cfg = c.path().join("cfg.json");
    std::fs::write(&cfg, rep.config.to_json()).unwrap();
    let o = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(c.path().join("again"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read(a.path()), read(&c.path().join("again")));
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"precision_bits": 64, "experiment": {"subcommand": "density", "params": {"sequence": "even-integers", "r": 50}}}"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = bin()
        .args(["density", "--r", "20", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep = read_report(&out.join("report.json")).unwrap();
    assert_eq!(rep.config.precision_bits, Some(64));
    let Experiment::Density(p) = &rep.config.experiment else {
        panic!("wrong experiment")
    };
    assert_eq!(p.sequence, "even-integers");
    assert_eq!(p.r, 20.0);
    // 11 even integers in a closed window of length 20.
    assert_eq!(rep.checks[0].value, 11.0 / 20.0);

    // A file for another subcommand is rejected.
    let o = bin().args(["radius", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("density"));
}

#[test]
fn schema_errors_are_config_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"experiment": {"subcommand": "density", "params": {"radius": 5}}}"#).unwrap();
    let o = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unknown field"), "{}", stderr(&o));

    let o = run(&["completeness", "--window", "0"], dir.path());
    assert_eq!(code(&o), 2);
    let o = run(&["density", "--precision-bits", "12"], dir.path());
    assert_eq!(code(&o), 2);
    let o = run(&["polya", "--systems", "dyadic:1"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn module_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    // A kernel column outside the sampling window.
    let o = run(&["completeness", "--window", "5", "--ms", "20"], dir.path());
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("residual curve"));
    let o = run(&["hilbert", "--input", "/nonexistent/samples.csv"], dir.path());
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

#[test]
fn precision_from_environment() {
    let print = |env: Option<&str>, extra: &[&str]| -> ExperimentConfig {
        let mut c = bin();
        if let Some(e) = env {
            c.env("PWSYNTH_PRECISION_BITS", e);
        }
        let o = c.args(["completeness", "--print-config"]).args(extra).output().unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        ExperimentConfig::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap()
    };
    assert_eq!(print(None, &[]).precision_bits, Some(53));
    assert_eq!(print(Some("128"), &[]).precision_bits, Some(128));
    assert_eq!(print(Some("128"), &["--precision-bits", "96"]).precision_bits, Some(96));
    let o = bin().env("PWSYNTH_PRECISION_BITS", "lots").args(["density"]).output().unwrap();
    assert_eq!(code(&o), 2);
}

fn poisson_csv(dir: &Path) -> PathBuf {
    let p = dir.join("u.csv");
    let mut s = String::from("t,u\n");
    for i in -8000..=8000 {
        let t = i as f64 / 8.0;
        s.push_str(&format!("{t},{}\n", 1.0 / (1.0 + t * t)));
    }
    std::fs::write(&p, s).unwrap();
    p
}

#[test]
fn hilbert_of_sampled_poisson_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let input = poisson_csv(dir.path());
    let o = bin()
        .args(["hilbert", "--points", "-2,0.5,3", "--input"])
        .arg(&input)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("conjugate.csv"));
    // Up to an additive constant the conjugate is x / (1 + x^2); piecewise
    // linear samples on a 1/8 grid limit the accuracy.
    let v: Vec<(f64, f64)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    let exact = |x: f64| x / (1.0 + x * x);
    for w in v.windows(2) {
        let d = (w[1].1 - w[0].1) - (exact(w[1].0) - exact(w[0].0));
        assert!(d.abs() < 1e-3, "{w:?}");
    }
}

#[test]
fn polya_expectations() {
    let dir = tempfile::tempdir().unwrap();
    for (seq, expect) in [("squares", "true"), ("lacunary", "true"), ("integers", "false")] {
        let o = run(&["polya", "--sequence", seq, "--expect-witness", expect], dir.path());
        assert_eq!(code(&o), 0, "{seq}: {}", String::from_utf8_lossy(&o.stdout));
    }
    let o = run(&["polya", "--sequence", "integers", "--expect-witness", "true"], dir.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn radius_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["radius", "--a", "2.5,4", "--truncations", "32,64"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("radius.csv"));
    assert_eq!(rows.len(), 4);
    let r = |i: usize| rows[i][2].parse::<f64>().unwrap();
    // Below pi the residual falls with the truncation; above it stalls.
    assert!(r(2) < r(0) / 10.0);
    assert!(r(3) > r(1) / 2.0);
}

#[test]
fn outputs_are_written_atomically_and_listed() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["density", "--sequence", "list:1,2,3,10", "--r", "3"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["density.csv", "report.json"]);
    let rep = read_report(&dir.path().join("report.json")).unwrap();
    assert_eq!(rep.files, ["density.csv"]);
    assert_eq!(rep.checks[0].value, 1.0);
}

#[test]
fn recheck_catches_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["density", "--sequence", "integers", "--r", "10", "--expect", "1.1", "--tolerance", "1e-9"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let path = dir.path().join("report.json");
    let ok = bin().arg("recheck").arg(&path).output().unwrap();
    assert_eq!(code(&ok), 0);
    let text = std::fs::read_to_string(&path).unwrap().replace("\"value\": 1.1,", "\"value\": 1.2,");
    std::fs::write(&path, text).unwrap();
    let bad = bin().arg("recheck").arg(&path).output().unwrap();
    assert_eq!(code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stdout).contains("MISMATCH"));
}

#[test]
fn default_configs_round_trip() {
    let exps = [
        Experiment::VerifyCounterexample(CounterexampleParams::default()),
        Experiment::Density(DensityParams::default()),
        Experiment::Completeness(Default::default()),
        Experiment::Radius(Default::default()),
        Experiment::Hilbert(HilbertParams {
            tail_exponent: None,
            ..Default::default()
        }),
        Experiment::Polya(Default::default()),
    ];
    for e in exps {
        let mut cfg = ExperimentConfig::new(e);
        cfg.precision_bits = Some(77);
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }
}
