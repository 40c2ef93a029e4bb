//! Named sequences, targets and interval systems.
//!
//! Sequences are written `builtin:NAME` (the prefix may be omitted),
//! `list:x1,x2,...` for a finite real sequence, or `none` for the empty one.

use num_complex::Complex64;
use pwsynth_core::pw::Target;
use pwsynth_core::sequences::{Generator, IntervalSystem, ZeroSequence};

use crate::error::{CliError, Result};

pub const BUILTINS: &[(&str, Generator)] = &[
    ("integers", Generator::Integers),
    ("even-integers", Generator::EvenIntegers),
    ("squares", Generator::Squares),
    ("lacunary", Generator::Lacunary),
    ("lambda-section4", Generator::LambdaSectionFour),
];

pub fn builtin(name: &str) -> Option<Generator> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, g)| *g)
}

pub fn sequence(spec: &str) -> Result<ZeroSequence> {
    let spec = spec.trim();
    if spec == "none" || spec == "empty" {
        return Ok(ZeroSequence::from_reals(&[]).expect("empty sequence"));
    }
    if let Some(list) = spec.strip_prefix("list:") {
        let values = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::config(format!("{s:?} in {spec:?} is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        return ZeroSequence::from_reals(&values).map_err(|e| CliError::config(format!("{spec}: {e}")));
    }
    let name = spec.strip_prefix("builtin:").unwrap_or(spec);
    builtin(name).map(ZeroSequence::generated).ok_or_else(|| {
        let names: Vec<&str> = BUILTINS.iter().map(|(n, _)| *n).collect();
        CliError::config(format!(
            "unknown sequence {spec:?}; expected builtin:{{{}}}, list:..., or none",
            names.join(",")
        ))
    })
}

/// `kernel:c` with `c` real or complex, e.g. `kernel:0.37`, `kernel:1+0.5i`.
pub fn target(spec: &str) -> Result<Target> {
    let at = spec
        .trim()
        .strip_prefix("kernel:")
        .ok_or_else(|| CliError::config(format!("unknown target {spec:?}; expected kernel:<point>")))?;
    let z = parse_complex(at)?;
    Ok(Target::Kernel(z))
}

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let z: Complex64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("{s:?} is not a complex number")))?;
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(CliError::config(format!("{s:?} is not finite")));
    }
    Ok(z)
}

/// `dyadic:FIRST:COUNT`, `dyadic-heads:FIRST:COUNT` or `unit:COUNT`.
pub fn interval_system(spec: &str) -> Result<IntervalSystem> {
    let bad = || CliError::config(format!("bad interval system {spec:?}"));
    let parts: Vec<&str> = spec.trim().split(':').collect();
    let num = |s: &str| s.parse::<u32>().map_err(|_| bad());
    match parts.as_slice() {
        [kind @ ("dyadic" | "dyadic-heads"), first, count] => {
            let (first, count) = (num(first)?, num(count)?);
            if count == 0 || first.saturating_add(count) > 1000 {
                return Err(CliError::config(format!(
                    "{spec:?}: need count >= 1 and first + count <= 1000"
                )));
            }
            Ok(if *kind == "dyadic" {
                IntervalSystem::dyadic(first, count)
            } else {
                IntervalSystem::dyadic_heads(first, count)
            })
        }
        ["unit", count] => {
            let count = num(count)?;
            if count == 0 {
                return Err(bad());
            }
            Ok(IntervalSystem::unit(count))
        }
        _ => Err(bad()),
    }
}
