use num_complex::Complex64;
use proptest::prelude::*;
use pwsynth_cli::config::{CounterexampleParams, DensityParams, Experiment, ExperimentConfig};
use pwsynth_cli::report::{fmt_f64, Check, Comparison, Report, Status};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |x| x.is_finite()), -1e6f64..1e6]
}

fn any_value() -> impl Strategy<Value = f64> {
    prop_oneof![finite(), Just(f64::NAN), Just(f64::INFINITY), Just(f64::NEG_INFINITY)]
}

proptest! {
    #[test]
    fn csv_floats_round_trip(x in any::<f64>().prop_filter("not nan", |x| !x.is_nan())) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn counterexample_config_round_trips(
        kmax in 0u32..10,
        e in 2u32..20,
        pts in prop::collection::vec((finite(), finite()), 0..5),
        tol in 1e-30f64..1.0,
        strict in any::<bool>(),
        bits in prop::option::of(53u32..2048),
    ) {
        let p = CounterexampleParams {
            kmax,
            cutoff_exp: e,
            points: pts.iter().map(|&(a, b)| Complex64::new(a, b)).collect(),
            moment_tolerance: tol,
            strict_decay: strict,
            ..Default::default()
        };
        let mut cfg = ExperimentConfig::new(Experiment::VerifyCounterexample(p));
        cfg.precision_bits = bits;
        prop_assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn density_config_round_trips(r in 1e-3f64..1e9, start in prop::option::of(finite()), expect in prop::option::of(finite())) {
        let p = DensityParams { r, scan_start: start, expect, ..Default::default() };
        let cfg = ExperimentConfig::new(Experiment::Density(p));
        prop_assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    // Every check survives serialization with a status a reader can
    // recompute from the value and tolerance alone.
    #[test]
    fn check_status_is_recomputable(v in any_value(), t in finite(), tol in 0.0f64..10.0, kind in 0u8..3) {
        let cmp = match kind {
            0 => Comparison::AtMost { tolerance: tol },
            1 => Comparison::Within { target: t, tolerance: tol },
            _ => Comparison::Evidence,
        };
        let c = Check::new("c", v, cmp);
        if v.is_nan() && kind < 2 {
            prop_assert_eq!(c.status, Status::Fail);
        }
        let json = serde_json::to_string(&c).unwrap();
        let back: Check = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.recompute(), c.status);
        prop_assert_eq!(back.status, c.status);
        prop_assert!(back.value.to_bits() == v.to_bits() || (v.is_nan() && back.value.is_nan()));
    }

    #[test]
    fn report_passes_iff_no_check_fails(vals in prop::collection::vec((any_value(), 0u8..3), 0..12)) {
        let checks: Vec<Check> = vals
            .iter()
            .enumerate()
            .map(|(i, &(v, k))| match k {
                0 => Check::at_most(format!("c{i}"), v, 1.0),
                1 => Check::within(format!("c{i}"), v, 0.0, 1.0),
                _ => Check::evidence(format!("c{i}"), v),
            })
            .collect();
        let expect = checks.iter().all(|c| c.status != Status::Fail);
        let rep = Report {
            schema_version: 1,
            artifact_version: "0".into(),
            subcommand: "density".into(),
            config: ExperimentConfig::new(Experiment::Density(Default::default())),
            precision_bits_used: 53,
            wall_clock_seconds: 0.0,
            checks,
            files: vec![],
            data: serde_json::Value::Null,
        };
        prop_assert_eq!(rep.passed(), expect);
        let back: Report = serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
        prop_assert_eq!(back.passed(), expect);
    }
}
