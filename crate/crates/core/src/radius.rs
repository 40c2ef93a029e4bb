//! Empirical radius of completeness: how well `span{e^{iλt}}` over a finite
//! truncation of a sequence approximates a target in `L^2[0, a]`.
//!
//! The least-squares problem is solved on a Gauss–Legendre discretization
//! `A_{jk} = sqrt(w_j) e^{i λ_k t_j}`, whose Gram matrix `A^*A` reproduces the
//! analytic Gram `∫_0^a e^{i(λ - conj μ) t} dt` to quadrature accuracy; the
//! analytic Gram is evaluated on a sample of pairs as a check. Working on the
//! factor rather than the Gram matrix avoids squaring the condition number.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pivoted_qr_residual, CMatrix};
use crate::quad::Rule;
use crate::sequences::ZeroSequence;

/// The function approximated on `[0, a]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum RadiusTarget {
    /// `e^{i omega t}`.
    Exponential { omega: f64 },
}

impl Default for RadiusTarget {
    fn default() -> Self {
        RadiusTarget::Exponential { omega: 0.45 }
    }
}

impl RadiusTarget {
    pub fn eval(&self, t: f64) -> Complex64 {
        match *self {
            RadiusTarget::Exponential { omega } => Complex64::from_polar(1.0, omega * t),
        }
    }

    fn frequency(&self) -> f64 {
        match *self {
            RadiusTarget::Exponential { omega } => omega.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusConfig {
    /// Pivoted QR stops at `rank_tol * |R_00|`.
    pub rank_tol: f64,
    /// Condition estimates above this set the ill-conditioned flag.
    pub condition_bound: f64,
    /// Quadrature nodes beyond the `omega_max * a / 2` oscillation count.
    pub extra_nodes: usize,
}

impl Default for RadiusConfig {
    fn default() -> Self {
        Self {
            rank_tol: 1e-12,
            condition_bound: 1e12,
            extra_nodes: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusPoint {
    pub a: f64,
    /// `dist(target, span)^2 / ||target||^2` in `L^2[0, a]`.
    pub residual: f64,
    pub rank: usize,
    pub condition_estimate: f64,
    pub ill_conditioned: bool,
    /// Largest deviation of the discrete Gram entries from the analytic
    /// ones, relative to `a`, over the sampled pairs.
    pub gram_discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusCurve {
    pub truncation: usize,
    pub frequencies: Vec<Complex64>,
    pub points: Vec<RadiusPoint>,
}

/// The first `n` points of `seq` ordered by modulus (negative real part
/// first on ties), repeated according to multiplicity.
pub fn truncate_by_modulus(seq: &ZeroSequence, n: usize) -> Result<Vec<Complex64>> {
    let key = |z: &Complex64| (z.norm(), z.re, z.im);
    let collect = |r: f64| -> Vec<Complex64> {
        let mut pts: Vec<Complex64> = seq
            .enumerate(-r, r)
            .into_iter()
            .filter(|p| p.value.norm() <= r)
            .flat_map(|p| std::iter::repeat_n(p.value, p.multiplicity as usize))
            .collect();
        pts.sort_by(|a, b| {
            let (ka, kb) = (key(a), key(b));
            ka.0.total_cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(ka.2.total_cmp(&kb.2))
        });
        pts
    };
    if seq.is_finite() {
        let mut pts = collect(f64::INFINITY);
        pts.truncate(n);
        return Ok(pts);
    }
    let mut r = (n as f64).max(16.0);
    loop {
        let pts = collect(r);
        if pts.len() >= n {
            // Everything of modulus <= r is present, so the prefix is exact.
            return Ok(pts.into_iter().take(n).collect());
        }
        if r > 1e15 {
            return Err(Error::InvalidInput("sequence too sparse to truncate".into()));
        }
        r *= 2.0;
    }
}

/// `∫_0^a e^{i d t} dt`.
fn exp_integral(d: Complex64, a: f64) -> Complex64 {
    let x = d * a;
    if x.norm() < 1e-3 {
        // a (1 + ix/2 + (ix)^2/6 + (ix)^3/24)
        let ix = Complex64::i() * x;
        return (Complex64::new(1.0, 0.0) + ix / 2.0 + ix * ix / 6.0 + ix * ix * ix / 24.0) * a;
    }
    ((Complex64::i() * x).exp() - 1.0) / (Complex64::i() * d)
}

fn radius_point(freqs: &[Complex64], a: f64, target: &RadiusTarget, cfg: &RadiusConfig) -> RadiusPoint {
    let wmax = freqs
        .iter()
        .map(|z| z.norm())
        .fold(target.frequency(), f64::max);
    let nodes = (wmax * a / 2.0).ceil() as usize + cfg.extra_nodes + freqs.len();
    let rule = Rule::new(nodes);
    let tw: Vec<(f64, f64)> = rule.mapped(0.0, a).collect();

    // Multiplicity m at λ contributes t^j e^{iλt}, j < m.
    let mut power = vec![0i32; freqs.len()];
    for k in 1..freqs.len() {
        if freqs[k] == freqs[k - 1] {
            power[k] = power[k - 1] + 1;
        }
    }
    let columns: Vec<Vec<Complex64>> = freqs
        .iter()
        .zip(&power)
        .map(|(&lam, &p)| {
            tw.iter()
                .map(|&(t, w)| (Complex64::i() * lam * t).exp() * (w.sqrt() * t.powi(p)))
                .collect()
        })
        .collect();
    let b: Vec<Complex64> = tw.iter().map(|&(t, w)| target.eval(t) * w.sqrt()).collect();

    // Check a spread of simple columns against the analytic Gram.
    let simple: Vec<usize> = (0..freqs.len()).filter(|&k| power[k] == 0).collect();
    let stride = (simple.len() / 48).max(1);
    let sample: Vec<usize> = simple.iter().copied().step_by(stride).collect();
    let mut gram_discrepancy: f64 = 0.0;
    for &j in &sample {
        for &k in &sample {
            let discrete: Complex64 = columns[k]
                .iter()
                .zip(&columns[j])
                .map(|(x, y)| x.conj() * y)
                .sum();
            let exact = exp_integral(freqs[j] - freqs[k].conj(), a);
            gram_discrepancy = gram_discrepancy.max((discrete - exact).norm() / a);
        }
    }

    let ls = pivoted_qr_residual(&CMatrix::from_columns(&columns), &b, cfg.rank_tol);
    let condition_estimate = ls.condition_estimate();
    RadiusPoint {
        a,
        residual: ls.relative_residual(),
        rank: ls.rank,
        condition_estimate,
        ill_conditioned: condition_estimate > cfg.condition_bound || ls.rank < freqs.len(),
        gram_discrepancy,
    }
}

/// Residual curve over `a_sweep` for the first `truncation` points of `seq`.
pub fn radius_of_completeness_empirical(
    seq: &ZeroSequence,
    a_sweep: &[f64],
    truncation: usize,
    target: &RadiusTarget,
    cfg: &RadiusConfig,
) -> Result<RadiusCurve> {
    if a_sweep.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(Error::InvalidInput("interval lengths must be positive".into()));
    }
    let freqs = truncate_by_modulus(seq, truncation)?;
    if freqs.is_empty() {
        return Err(Error::InvalidInput("empty truncation".into()));
    }
    let points = a_sweep
        .par_iter()
        .map(|&a| radius_point(&freqs, a, target, cfg))
        .collect();
    Ok(RadiusCurve {
        truncation: freqs.len(),
        frequencies: freqs,
        points,
    })
}
