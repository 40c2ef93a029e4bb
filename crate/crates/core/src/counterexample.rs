//! The lacunary construction
//!
//! ```text
//! U(z) = sin(pi sqrt z) / (pi sqrt z)            zeros n^2
//! V(z) = prod (1 - z / (4^n + 1))
//! W(z) = prod (1 - z / (100 * 4^n - 1/2))
//! T(z) = sin(pi sqrt(z + 1/2) / 10) / (W(z) sqrt(z + 1/2))
//! G(z) = sin(pi z) / (U(z) V(z))                 zeros Λ = Z \ (Z_U ∪ Z_V)
//! a_n  = (-1)^n T(n) on Z_U ∪ Z_V, 0 elsewhere
//! S(z) = (1/pi) U(z) V(z) sum_n T(n) / (z - n)
//! ```
//!
//! and the numerical checks of its three properties: `G·P` lies in the
//! Paley–Wiener space, `G S = sum a_n k_n` with rapidly decaying `a_n`, and
//! `G S` is orthogonal to `z^k G` for every `k`. Everything here runs in
//! extended precision; see [`CounterexampleConfig`].

use astro_float::BigFloat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    product_derivative_mp, product_mp, shifted_sine_sqrt_mp, sine_sqrt_mp, LogComplex, ProductSpec,
    ZeroRule,
};
use crate::error::{Error, Result};
use crate::mp::{self, MpComplex, MpContext};
use crate::precision::PrecisionConfig;
use crate::pw::CardinalSeries;
use crate::sequences::ZeroSequence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleConfig {
    /// The support `Z_U ∪ Z_V` is enumerated up to this bound.
    pub zero_cutoff: u64,
    pub moment_kmax: u32,
    pub precision: PrecisionConfig,
    pub test_points: Vec<Complex64>,
    /// Tolerance for the relative moment residuals and for the omitted-term
    /// check.
    pub moment_tolerance: f64,
    pub interpolation_tolerance: f64,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self {
            zero_cutoff: 4u64.pow(12) + 1,
            moment_kmax: 5,
            precision: PrecisionConfig::with_bits(256),
            test_points: vec![
                Complex64::new(0.5, 0.0),
                Complex64::new(10.3, 0.0),
                Complex64::new(2.0, 3.0),
            ],
            moment_tolerance: 1e-8,
            interpolation_tolerance: 1e-8,
        }
    }
}

impl CounterexampleConfig {
    pub fn with_cutoff_exponent(mut self, e: u32) -> Self {
        self.zero_cutoff = 4u64.pow(e) + 1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.precision.validate()?;
        if self.zero_cutoff < 17 {
            return Err(Error::InvalidInput(format!(
                "zero_cutoff must be at least 17, got {}",
                self.zero_cutoff
            )));
        }
        if self.zero_cutoff > 1u64 << 50 {
            return Err(Error::InvalidInput("zero_cutoff too large".into()));
        }
        Ok(())
    }
}

/// The four zero sets of the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Component {
    U,
    V,
    W,
    TNumerator,
}

impl Component {
    fn rule(self) -> ZeroRule {
        match self {
            Component::U => ZeroRule::Squares,
            Component::V => ZeroRule::Lacunary,
            Component::W => ZeroRule::ShiftedLacunary,
            Component::TNumerator => ZeroRule::ShiftedSquares,
        }
    }
}

/// Zeros of a component not exceeding `cutoff`, increasing.
pub fn zeros_of(component: Component, cutoff: f64) -> ZeroSequence {
    ZeroSequence::from_reals(&component.rule().zeros_up_to(cutoff))
        .expect("generated zeros are finite")
}

fn lacunary() -> ProductSpec {
    ProductSpec::new(ZeroRule::Lacunary)
}

fn shifted_lacunary() -> ProductSpec {
    ProductSpec::new(ZeroRule::ShiftedLacunary)
}

fn sign(n: u64) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `T(z)`. Every zero `100 4^j - 1/2` of `W` is also a zero of the
/// numerator, so there `T` takes the limit `pi / (20 (z + 1/2)) / W'(z)`.
fn t_mp(ctx: &mut MpContext, z: &MpComplex, zf: Complex64, cfg: &PrecisionConfig) -> Result<MpComplex> {
    if zf.im == 0.0 {
        if let Some(j) = ZeroRule::ShiftedLacunary.index_of(zf.re) {
            let wp = product_derivative_mp(ctx, &ZeroRule::ShiftedLacunary, j, cfg)?;
            let shifted = ctx.add(&z.re, &ctx.real(0.5));
            let np = ctx.div(&ctx.pi(), &ctx.mul(&ctx.uint(20), &shifted));
            return Ok(ctx.from_real(ctx.div(&np, &wp)));
        }
    }
    let num = shifted_sine_sqrt_mp(ctx, z);
    let w = product_mp(ctx, &shifted_lacunary(), z, cfg)?;
    Ok(ctx.cdiv(&num, &w))
}

fn uv_mp(ctx: &mut MpContext, z: &MpComplex, cfg: &PrecisionConfig) -> Result<MpComplex> {
    let u = sine_sqrt_mp(ctx, z);
    let v = product_mp(ctx, &lacunary(), z, cfg)?;
    Ok(ctx.cmul(&u, &v))
}

/// Which factor of `U V` vanishes at a support point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family", content = "index")]
pub enum Family {
    /// `n = m^2`.
    Square(u64),
    /// `n = 4^j + 1`.
    Lacunary(u32),
}

/// `(UV)'(n)` at a support point: `U'(m^2) V(m^2)` with
/// `U'(m^2) = (-1)^m / (2 m^2)`, or `U(z_j) V'(z_j)`.
fn uv_prime_mp(ctx: &mut MpContext, n: u64, family: Family, cfg: &PrecisionConfig) -> Result<BigFloat> {
    let nm = ctx.from_real(ctx.uint(n));
    match family {
        Family::Square(m) => {
            let up = ctx.div(&ctx.real(sign(m)), &ctx.mul(&ctx.uint(2), &ctx.uint(n)));
            let v = product_mp(ctx, &lacunary(), &nm, cfg)?;
            Ok(ctx.mul(&up, &v.re))
        }
        Family::Lacunary(j) => {
            let u = sine_sqrt_mp(ctx, &nm);
            let vp = product_derivative_mp(ctx, &ZeroRule::Lacunary, j as usize, cfg)?;
            Ok(ctx.mul(&u.re, &vp))
        }
    }
}

/// One point of `Z_U ∪ Z_V` with the quantities every check needs.
#[derive(Debug, Clone)]
pub struct SupportPoint {
    pub n: u64,
    pub family: Family,
    /// `T(n)`.
    pub t: BigFloat,
    /// `(UV)'(n)`.
    pub uv_prime: BigFloat,
}

impl SupportPoint {
    fn compute(ctx: &mut MpContext, n: u64, family: Family, cfg: &PrecisionConfig) -> Result<Self> {
        let z = ctx.from_real(ctx.uint(n));
        let t = t_mp(ctx, &z, Complex64::new(n as f64, 0.0), cfg)?.re;
        let uv_prime = uv_prime_mp(ctx, n, family, cfg)?;
        Ok(Self {
            n,
            family,
            t,
            uv_prime,
        })
    }

    /// `a_n G(n) = pi T(n) / (UV)'(n)`.
    fn weight(&self, ctx: &MpContext) -> BigFloat {
        ctx.div(&ctx.mul(&ctx.pi(), &self.t), &self.uv_prime)
    }

    /// `G(n) = pi (-1)^n / (UV)'(n)`.
    fn g_value(&self, ctx: &MpContext) -> BigFloat {
        ctx.div(&ctx.mul(&ctx.real(sign(self.n)), &ctx.pi()), &self.uv_prime)
    }
}

fn support_indices(cutoff: u64) -> Result<Vec<(u64, Family)>> {
    let mut pts = Vec::new();
    let mut m = 1u64;
    while m * m <= cutoff {
        pts.push((m * m, Family::Square(m)));
        m += 1;
    }
    let mut j = 1u32;
    while 4u64.pow(j) + 1 <= cutoff {
        let n = 4u64.pow(j) + 1;
        if ZeroRule::Squares.index_of(n as f64).is_some() {
            return Err(Error::DoubleZero(n as f64));
        }
        pts.push((n, Family::Lacunary(j)));
        j += 1;
    }
    pts.sort_by_key(|p| p.0);
    if pts.windows(2).any(|w| w[0].0 == w[1].0) {
        let d = pts.windows(2).find(|w| w[0].0 == w[1].0).expect("duplicate")[0].0;
        return Err(Error::DoubleZero(d as f64));
    }
    Ok(pts)
}

/// The points just beyond the cutoff: the next 64 squares and the next two
/// lacunary points.
fn probe_indices(cutoff: u64) -> Vec<(u64, Family)> {
    let mut m = 1u64;
    while m * m <= cutoff {
        m += 1;
    }
    let mut j = 1u32;
    while 4u64.pow(j) + 1 <= cutoff {
        j += 1;
    }
    let mut pts: Vec<(u64, Family)> = (m..m + 64).map(|m| (m * m, Family::Square(m))).collect();
    pts.extend((j..j + 2).map(|j| (4u64.pow(j) + 1, Family::Lacunary(j))));
    pts.sort_by_key(|p| p.0);
    pts
}

fn compute_points(indices: &[(u64, Family)], cfg: &PrecisionConfig) -> Result<Vec<SupportPoint>> {
    indices
        .par_iter()
        .map_init(
            || MpContext::new(cfg.mantissa_bits),
            |ctx, &(n, fam)| SupportPoint::compute(ctx, n, fam, cfg),
        )
        .collect()
}

/// Support of the coefficients with `T(n)` and `(UV)'(n)` precomputed.
#[derive(Debug, Clone)]
pub struct ConstructionTable {
    pub zero_cutoff: u64,
    pub precision: PrecisionConfig,
    pub points: Vec<SupportPoint>,
    /// Points just beyond the cutoff, used to bound what truncation omits.
    pub probes: Vec<SupportPoint>,
}

impl ConstructionTable {
    pub fn build(cfg: &CounterexampleConfig) -> Result<Self> {
        cfg.validate()?;
        let points = compute_points(&support_indices(cfg.zero_cutoff)?, &cfg.precision)?;
        let probes = compute_points(&probe_indices(cfg.zero_cutoff), &cfg.precision)?;
        Ok(Self {
            zero_cutoff: cfg.zero_cutoff,
            precision: cfg.precision,
            points,
            probes,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn ctx(&self) -> MpContext {
        MpContext::new(self.precision.mantissa_bits)
    }

    pub fn find(&self, n: u64) -> Option<&SupportPoint> {
        self.points
            .binary_search_by_key(&n, |p| p.n)
            .ok()
            .map(|i| &self.points[i])
    }
}

fn real_log(ctx: &mut MpContext, x: &BigFloat) -> LogComplex {
    LogComplex::from_mp(ctx, &ctx.from_real(x.clone()))
}

/// `G(z) = sin(pi z) / (U(z) V(z))`; at points of `Z_U ∪ Z_V` the limit
/// `pi (-1)^n / (UV)'(n)`, at the other integers an exact zero.
pub fn eval_g_lambda(z: Complex64, cfg: &PrecisionConfig) -> Result<LogComplex> {
    cfg.validate()?;
    let mut ctx = MpContext::new(cfg.mantissa_bits);
    if z.im == 0.0 && z.re == z.re.round() {
        let n = z.re;
        if n >= 1.0 {
            let family = if let Some(m) = ZeroRule::Squares.index_of(n) {
                Some(Family::Square(m as u64))
            } else {
                ZeroRule::Lacunary
                    .index_of(n)
                    .map(|j| Family::Lacunary(j as u32))
            };
            if let Some(family) = family {
                let d = uv_prime_mp(&mut ctx, n as u64, family, cfg)?;
                let g = ctx.div(&ctx.mul(&ctx.real(sign(n as u64)), &ctx.pi()), &d);
                return Ok(real_log(&mut ctx, &g));
            }
        }
        return Ok(LogComplex::ZERO);
    }
    let zm = ctx.complex(z);
    let pz = ctx.cscale(&zm, &ctx.pi());
    let s = ctx.csin(&pz);
    let uv = uv_prime_free(&mut ctx, &zm, cfg)?;
    let g = ctx.cdiv(&s, &uv);
    Ok(LogComplex::from_mp(&mut ctx, &g))
}

fn uv_prime_free(ctx: &mut MpContext, z: &MpComplex, cfg: &PrecisionConfig) -> Result<MpComplex> {
    uv_mp(ctx, z, cfg)
}

/// `G'(λ) = pi (-1)^λ / (U(λ) V(λ))` at a zero `λ ∈ Λ`.
pub fn g_lambda_derivative_at(lambda: i64, cfg: &PrecisionConfig) -> Result<LogComplex> {
    let x = lambda as f64;
    if lambda >= 1
        && (ZeroRule::Squares.index_of(x).is_some() || ZeroRule::Lacunary.index_of(x).is_some())
    {
        return Err(Error::NotAZero(x));
    }
    let mut ctx = MpContext::new(cfg.mantissa_bits);
    let z = ctx.from_real(ctx.int(lambda));
    let uv = uv_mp(&mut ctx, &z, cfg)?;
    let s = ctx.mul(&ctx.real(sign(lambda.unsigned_abs())), &ctx.pi());
    let d = ctx.div(&s, &uv.re);
    Ok(real_log(&mut ctx, &d))
}

/// `T(z)` with the principal square root. `T` is even in the root, so it is
/// entire and the branch choice does not matter; `z = -1/2` gives the limit
/// `pi / (10 W(-1/2))`.
pub fn eval_t(z: Complex64, cfg: &PrecisionConfig) -> Result<LogComplex> {
    cfg.validate()?;
    if z.im == 0.0
        && ZeroRule::ShiftedSquares.index_of(z.re).is_some()
        && ZeroRule::ShiftedLacunary.index_of(z.re).is_none()
    {
        return Ok(LogComplex::ZERO);
    }
    let mut ctx = MpContext::new(cfg.mantissa_bits);
    let zm = ctx.complex(z);
    let t = t_mp(&mut ctx, &zm, z, cfg)?;
    Ok(LogComplex::from_mp(&mut ctx, &t))
}

/// Nonzero coefficients `a_n = (-1)^n T(n)` in log form; every other
/// integer has `a_n = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub zero_cutoff: u64,
    pub entries: Vec<(u64, LogComplex)>,
}

impl CoefficientTable {
    pub fn get(&self, n: i64) -> LogComplex {
        if n < 1 {
            return LogComplex::ZERO;
        }
        match self.entries.binary_search_by_key(&(n as u64), |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => LogComplex::ZERO,
        }
    }

    /// `G S = sum a_n k_n` restricted to `|n| <= window`.
    pub fn to_cardinal_series(&self, window: i64) -> CardinalSeries {
        CardinalSeries::from_fn(window, |n| self.get(n).to_complex_flush().unwrap_or_default())
    }
}

pub fn coefficients_a(table: &ConstructionTable) -> CoefficientTable {
    let mut ctx = table.ctx();
    let entries = table
        .points
        .iter()
        .map(|p| {
            let a = ctx.mul(&ctx.real(sign(p.n)), &p.t);
            (p.n, real_log(&mut ctx, &a))
        })
        .collect();
    CoefficientTable {
        zero_cutoff: table.zero_cutoff,
        entries,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub power: u32,
    /// Support points `n >= threshold` are examined.
    pub threshold: u64,
    /// `max log10(|a_n| n^N)` over the examined points.
    pub max_log10_scaled: f64,
    pub below_one: bool,
    /// First examined point with `|a_n| n^N >= 1`.
    pub first_at_least_one: Option<u64>,
    /// `|a_n| n^N` strictly decreasing along the examined points.
    pub decreasing: bool,
    /// First examined point where the sequence increases.
    pub first_increase: Option<u64>,
    /// Smallest support point beyond which the least nonincreasing majorant
    /// of `|a_n| n^N` stays below 1, if any within the cutoff.
    pub envelope_below_one_from: Option<u64>,
}

impl DecayRow {
    pub fn passed(&self) -> bool {
        self.below_one && self.decreasing
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    /// `(n, log10|a_n|)` over the support.
    pub table: Vec<(u64, f64)>,
}

/// Tabulates `|a_n| n^N` on the support beyond `threshold`.
pub fn verify_decay(coeffs: &CoefficientTable, powers: &[u32], threshold: u64) -> DecayReport {
    let table: Vec<(u64, f64)> = coeffs
        .entries
        .iter()
        .map(|(n, a)| (*n, a.log10_abs()))
        .collect();
    let tail: Vec<(u64, f64)> = table.iter().copied().filter(|(n, _)| *n >= threshold).collect();
    let rows = powers
        .iter()
        .map(|&power| {
            let scaled: Vec<(u64, f64)> = tail
                .iter()
                .map(|&(n, l)| (n, l + power as f64 * (n as f64).log10()))
                .collect();
            let max_log10_scaled = scaled.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
            let first_at_least_one = scaled.iter().find(|s| s.1 >= 0.0).map(|s| s.0);
            let first_increase = scaled.windows(2).find(|w| w[1].1 >= w[0].1).map(|w| w[1].0);
            // Suffix maxima: the least nonincreasing majorant.
            let mut envelope_below_one_from = None;
            let mut running = f64::NEG_INFINITY;
            for &(n, s) in scaled.iter().rev() {
                running = running.max(s);
                if running < 0.0 {
                    envelope_below_one_from = Some(n);
                } else {
                    break;
                }
            }
            DecayRow {
                power,
                threshold,
                max_log10_scaled,
                below_one: first_at_least_one.is_none(),
                first_at_least_one,
                decreasing: first_increase.is_none(),
                first_increase,
                envelope_below_one_from,
            }
        })
        .collect();
    DecayReport { rows, table }
}

/// How `S` is evaluated at points of the support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoleMode {
    /// Support points are poles of the series: error.
    Reject,
    /// Use the residue rule `S(n) = T(n) (UV)'(n) / pi`.
    Limit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SValue {
    pub value: LogComplex,
    /// `|U V / pi| sum |T(n) / (z - n)|` over the probe points beyond the
    /// cutoff: an estimate of the omitted part, not a rigorous bound.
    pub omitted_estimate: f64,
}

/// `S(z) = (1/pi) U(z) V(z) sum_n T(n) / (z - n)` over the table's support.
pub fn eval_s(table: &ConstructionTable, z: Complex64, mode: PoleMode) -> Result<SValue> {
    let cfg = &table.precision;
    let mut ctx = table.ctx();
    if z.im == 0.0 && z.re == z.re.round() && z.re >= 1.0 {
        if let Some(p) = table.find(z.re as u64) {
            if mode == PoleMode::Reject {
                return Err(Error::PoleHit(z.re));
            }
            let s = ctx.div(&ctx.mul(&p.t, &p.uv_prime), &ctx.pi());
            return Ok(SValue {
                value: real_log(&mut ctx, &s),
                omitted_estimate: 0.0,
            });
        }
    }
    let zm = ctx.complex(z);
    let series = |ctx: &MpContext, pts: &[SupportPoint]| -> MpComplex {
        let mut acc = ctx.from_real(ctx.zero());
        for p in pts {
            let den = ctx.csub(&zm, &ctx.from_real(ctx.uint(p.n)));
            acc = ctx.cadd(&acc, &ctx.cdiv(&ctx.from_real(p.t.clone()), &den));
        }
        acc
    };
    let sum = series(&ctx, &table.points);
    let uv = uv_mp(&mut ctx, &zm, cfg)?;
    let pre = ctx.cdiv_real(&uv, &ctx.pi());
    let s = ctx.cmul(&pre, &sum);
    let omitted: f64 = table
        .probes
        .iter()
        .map(|p| {
            let den = ctx.csub(&zm, &ctx.from_real(ctx.uint(p.n)));
            let term = ctx.cdiv(&ctx.cmul(&pre, &ctx.from_real(p.t.clone())), &den);
            ctx.cabs(&term)
        })
        .map(|b| mp::to_f64(&b))
        .sum();
    Ok(SValue {
        value: LogComplex::from_mp(&mut ctx, &s),
        omitted_estimate: omitted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationResidual {
    pub z: Complex64,
    /// `T(z) / (U(z) V(z))`.
    pub lhs: LogComplex,
    /// `sum_n T(n) / ((UV)'(n) (z - n))`.
    pub rhs: LogComplex,
    /// `|lhs - rhs| / (|lhs| + |rhs|)`.
    pub residual: f64,
    pub tolerance: f64,
    pub mantissa_bits: u32,
}

impl InterpolationResidual {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// Checks `T/(UV) = sum T(n) / ((UV)'(n)(z - n))` at the configured points.
pub fn verify_interpolation_nb1(
    table: &ConstructionTable,
    points: &[Complex64],
    tolerance: f64,
) -> Result<Vec<InterpolationResidual>> {
    let cfg = &table.precision;
    points
        .par_iter()
        .map(|&z| {
            if z.im == 0.0 && z.re == z.re.round() && z.re >= 1.0 && table.find(z.re as u64).is_some() {
                return Err(Error::PoleHit(z.re));
            }
            let mut ctx = table.ctx();
            let zm = ctx.complex(z);
            let t = t_mp(&mut ctx, &zm, z, cfg)?;
            let uv = uv_mp(&mut ctx, &zm, cfg)?;
            let lhs = ctx.cdiv(&t, &uv);
            let mut rhs = ctx.from_real(ctx.zero());
            for p in &table.points {
                let den = ctx.cscale(
                    &ctx.csub(&zm, &ctx.from_real(ctx.uint(p.n))),
                    &p.uv_prime,
                );
                rhs = ctx.cadd(&rhs, &ctx.cdiv(&ctx.from_real(p.t.clone()), &den));
            }
            let diff = ctx.cabs(&ctx.csub(&lhs, &rhs));
            let scale = ctx.add(&ctx.cabs(&lhs), &ctx.cabs(&rhs));
            let residual = mp::to_f64(&ctx.div(&diff, &scale));
            Ok(InterpolationResidual {
                z,
                lhs: LogComplex::from_mp(&mut ctx, &lhs),
                rhs: LogComplex::from_mp(&mut ctx, &rhs),
                residual,
                tolerance,
                mantissa_bits: cfg.mantissa_bits,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentResidual {
    pub k: u32,
    /// `log10 |sum_n n^k a_n G(n)|`.
    pub log10_abs_sum: f64,
    /// `log10 max_n |n^k a_n G(n)|`: the cancellation depth.
    pub log10_max_term: f64,
    /// `|sum| / max term`.
    pub relative_residual: f64,
    /// Largest probe term beyond the cutoff relative to the max term.
    pub omitted_relative: f64,
    pub tolerance: f64,
    pub mantissa_bits: u32,
}

impl MomentResidual {
    pub fn passed(&self) -> bool {
        self.relative_residual <= self.tolerance && self.omitted_relative <= self.tolerance
    }
}

/// `sum_n n^k a_n G(n)` for `k = 0..=kmax` with `a_n G(n) = pi T(n)/(UV)'(n)`.
///
/// Errors with [`Error::CutoffInsufficient`] when a probe term beyond the
/// cutoff is not below `tolerance` relative to the largest term.
pub fn verify_orthogonality(
    table: &ConstructionTable,
    kmax: u32,
    tolerance: f64,
) -> Result<Vec<MomentResidual>> {
    let bits = table.precision.mantissa_bits;
    let mut ctx = table.ctx();
    let weights: Vec<BigFloat> = table.points.iter().map(|p| p.weight(&ctx)).collect();
    let probe_weights: Vec<BigFloat> = table.probes.iter().map(|p| p.weight(&ctx)).collect();
    let mut out = Vec::new();
    for k in 0..=kmax {
        let term = |ctx: &MpContext, n: u64, w: &BigFloat| ctx.mul(&ctx.powi(&ctx.uint(n), k as usize), w);
        let mut sum = ctx.zero();
        let mut max_term = ctx.zero();
        for (p, w) in table.points.iter().zip(&weights) {
            let t = term(&ctx, p.n, w);
            let a = t.abs();
            if a.cmp(&max_term).is_some_and(|o| o > 0) {
                max_term = a;
            }
            sum = ctx.add(&sum, &t);
        }
        let mut probe_max = ctx.zero();
        for (p, w) in table.probes.iter().zip(&probe_weights) {
            let a = term(&ctx, p.n, w).abs();
            if a.cmp(&probe_max).is_some_and(|o| o > 0) {
                probe_max = a;
            }
        }
        let omitted_relative = mp::to_f64(&ctx.div(&probe_max, &max_term));
        if !(omitted_relative <= tolerance) {
            return Err(Error::CutoffInsufficient {
                tail: omitted_relative,
                tolerance,
            });
        }
        let relative_residual = mp::to_f64(&ctx.div(&sum.abs(), &max_term));
        out.push(MomentResidual {
            k,
            log10_abs_sum: mp::log10_abs(&mut ctx, &sum),
            log10_max_term: mp::log10_abs(&mut ctx, &max_term),
            relative_residual,
            omitted_relative,
            tolerance,
            mantissa_bits: bits,
        });
    }
    Ok(out)
}

/// Polynomial multiplier for the membership check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Multiplier {
    Zero,
    Monomial(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipGrid {
    /// Partial sums of `|G(n) P(n)|^2` are reported at these cutoffs
    /// (clamped to the table's cutoff).
    pub sample_cutoffs: Vec<u64>,
    /// Midpoints `k + 1/2` are sampled in the bands `±[2^j, 2^(j+1))`,
    /// `j < bands`.
    pub bands: u32,
    pub samples_per_band: u32,
    /// Convergence is declared when the last Cauchy increment is below
    /// this fraction of the partial sum.
    pub increment_tolerance: f64,
}

impl Default for MembershipGrid {
    fn default() -> Self {
        Self {
            sample_cutoffs: vec![100, 1_000, 10_000, 100_000, 1_000_000, 10_000_000],
            bands: 20,
            samples_per_band: 32,
            increment_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipEvidence {
    pub multiplier: Multiplier,
    /// `(N, sum_{|n| <= N} |G(n) P(n)|^2)`.
    pub partial_sums: Vec<(u64, f64)>,
    pub increments: Vec<f64>,
    pub converged: bool,
    /// `(j, max |G(x) P(x)|)` over sampled midpoints with `|x|` in band `j`.
    pub band_maxima: Vec<(u32, f64)>,
    /// The last band maximum is the smallest of the second half of the
    /// bands and lies below the peak.
    pub decaying: bool,
}

/// Numerical evidence that `G P` has square-summable samples and decays
/// along the real axis.
pub fn verify_pw_membership(
    table: &ConstructionTable,
    multipliers: &[Multiplier],
    grid: &MembershipGrid,
) -> Result<Vec<MembershipEvidence>> {
    let cfg = table.precision;
    let mut ctx = table.ctx();
    // G(n) vanishes on Λ, which contains every integer n <= 0.
    let g2: Vec<(u64, f64)> = table
        .points
        .iter()
        .map(|p| {
            let g = p.g_value(&ctx);
            (p.n, mp::to_f64(&ctx.mul(&g, &g)))
        })
        .collect();

    let midpoints: Vec<(u32, f64)> = (0..grid.bands)
        .flat_map(|j| {
            let lo = 2f64.powi(j as i32);
            let width = lo;
            let s = grid.samples_per_band.max(1);
            (0..s).flat_map(move |i| {
                let x = (lo + width * i as f64 / s as f64).floor() + 0.5;
                [(j, x), (j, -x)]
            })
        })
        .collect();
    let g_mid: Vec<(u32, f64, f64)> = midpoints
        .par_iter()
        .map_init(
            || MpContext::new(cfg.mantissa_bits),
            |ctx, &(j, x)| -> Result<(u32, f64, f64)> {
                let z = ctx.from_real(ctx.real(x));
                let uv = uv_mp(ctx, &z, &cfg)?;
                // |sin(pi (k + 1/2))| = 1
                Ok((j, x, -ctx.ln_abs(&uv)))
            },
        )
        .collect::<Result<_>>()?;
    let _ = &mut ctx;

    Ok(multipliers
        .iter()
        .map(|&mult| {
            let p2 = |n: f64| -> f64 {
                match mult {
                    Multiplier::Zero => 0.0,
                    Multiplier::Monomial(d) => n.powi(2 * d as i32),
                }
            };
            let mut partial_sums = Vec::new();
            for &cut in &grid.sample_cutoffs {
                let cut = cut.min(table.zero_cutoff);
                let s: f64 = g2
                    .iter()
                    .filter(|(n, _)| *n <= cut)
                    .map(|(n, g)| g * p2(*n as f64))
                    .sum();
                if partial_sums.last().is_none_or(|&(c, _)| c < cut) {
                    partial_sums.push((cut, s));
                }
            }
            let increments: Vec<f64> = partial_sums.windows(2).map(|w| w[1].1 - w[0].1).collect();
            let converged = match (increments.last(), partial_sums.last()) {
                (Some(&inc), Some(&(_, s))) => inc.abs() <= grid.increment_tolerance * s.max(f64::MIN_POSITIVE),
                _ => true,
            };
            let band_maxima: Vec<(u32, f64)> = (0..grid.bands)
                .map(|j| {
                    let m = g_mid
                        .iter()
                        .filter(|e| e.0 == j)
                        .map(|&(_, x, lg)| match mult {
                            Multiplier::Zero => 0.0,
                            Multiplier::Monomial(d) => (lg + d as f64 * x.abs().ln()).exp(),
                        })
                        .fold(0.0, f64::max);
                    (j, m)
                })
                .collect();
            // Finite-data rule: the last band is the smallest of the second
            // half and below the peak.
            let decaying = match band_maxima.last() {
                Some(&(_, last)) => {
                    let half = &band_maxima[band_maxima.len() / 2..];
                    let peak = band_maxima.iter().map(|b| b.1).fold(0.0, f64::max);
                    half.iter().all(|b| last <= b.1) && (last < peak || peak == 0.0)
                }
                None => true,
            };
            MembershipEvidence {
                multiplier: mult,
                partial_sums,
                increments,
                converged,
                band_maxima,
                decaying,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn small_cfg() -> CounterexampleConfig {
        CounterexampleConfig {
            precision: PrecisionConfig::with_bits(192),
            ..CounterexampleConfig::default().with_cutoff_exponent(6)
        }
    }

    #[test]
    fn zero_sets() {
        let re = |s: ZeroSequence| s.real_parts(f64::NEG_INFINITY, f64::INFINITY);
        assert_eq!(re(zeros_of(Component::V, 300.0)), vec![5.0, 17.0, 65.0, 257.0]);
        assert_eq!(re(zeros_of(Component::U, 10.0)), vec![1.0, 4.0, 9.0]);
        assert_eq!(re(zeros_of(Component::W, 2000.0)), vec![399.5, 1599.5]);
        assert_eq!(re(zeros_of(Component::TNumerator, 900.0)), vec![99.5, 399.5, 899.5]);
    }

    #[test]
    fn support_is_disjoint_union() {
        let s = support_indices(4u64.pow(12) + 1).unwrap();
        assert_eq!(s.len(), 4096 + 12);
        assert!(s.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn g_lambda_values() {
        let cfg = PrecisionConfig::with_bits(128);
        assert_eq!(eval_g_lambda(Complex64::new(0.0, 0.0), &cfg).unwrap(), LogComplex::ZERO);
        assert_eq!(eval_g_lambda(Complex64::new(2.0, 0.0), &cfg).unwrap(), LogComplex::ZERO);
        // G(1) = 2 pi / V(1)
        let v1: f64 = (1..60).map(|n| 1.0 - 1.0 / (4f64.powi(n) + 1.0)).product();
        let g1 = eval_g_lambda(Complex64::new(1.0, 0.0), &cfg).unwrap().to_complex().unwrap();
        assert_relative_eq!(g1.re, 2.0 * PI / v1, max_relative = 1e-14);
        // G(1/2) = 1 / (U(1/2) V(1/2)), U(1/2) = sin(pi/sqrt 2) / (pi / sqrt 2)
        let s = 0.5f64.sqrt();
        let u = (PI * s).sin() / (PI * s);
        let v: f64 = (1..60).map(|n| 1.0 - 0.5 / (4f64.powi(n) + 1.0)).product();
        let g = eval_g_lambda(Complex64::new(0.5, 0.0), &cfg).unwrap().to_complex().unwrap();
        assert_relative_eq!(g.re, 1.0 / (u * v), max_relative = 1e-14);
    }

    #[test]
    fn t_values() {
        let cfg = PrecisionConfig::with_bits(128);
        assert_eq!(eval_t(Complex64::new(99.5, 0.0), &cfg).unwrap(), LogComplex::ZERO);
        // 399.5 = 100 * 2^2 - 1/2 zeros both W and the numerator: removable.
        let at = eval_t(Complex64::new(399.5, 0.0), &cfg).unwrap().to_complex().unwrap();
        let near = eval_t(Complex64::new(399.5, 1e-12), &cfg).unwrap().to_complex().unwrap();
        assert!(at.re != 0.0);
        assert_relative_eq!(at.re, near.re, max_relative = 1e-10);
        // Direct f64 oracle at z = 1.
        let w1: f64 = (1..40).map(|n| 1.0 - 1.0 / (100.0 * 4f64.powi(n) - 0.5)).product();
        let r = 1.5f64.sqrt();
        let oracle = (PI * r / 10.0).sin() / (w1 * r);
        let t1 = eval_t(Complex64::new(1.0, 0.0), &cfg).unwrap().to_complex().unwrap();
        assert_relative_eq!(t1.re, oracle, max_relative = 1e-14);
        assert!((t1.re - 0.308).abs() < 1e-3);
        // Entire through the branch point.
        let at = eval_t(Complex64::new(-0.5, 0.0), &cfg).unwrap().to_complex().unwrap();
        let w: f64 = (1..40).map(|n| 1.0 + 0.5 / (100.0 * 4f64.powi(n) - 0.5)).product();
        assert_relative_eq!(at.re, PI / (10.0 * w), max_relative = 1e-14);
        let below = eval_t(Complex64::new(-3.0, 0.0), &cfg).unwrap().to_complex().unwrap();
        let above = eval_t(Complex64::new(-3.0, 1e-30), &cfg).unwrap().to_complex().unwrap();
        assert_relative_eq!(below.re, above.re, max_relative = 1e-14);
    }

    #[test]
    fn coefficient_signs() {
        let table = ConstructionTable::build(&small_cfg()).unwrap();
        let a = coefficients_a(&table);
        assert_eq!(a.get(2), LogComplex::ZERO);
        let t1 = eval_t(Complex64::new(1.0, 0.0), &table.precision).unwrap().to_complex().unwrap();
        let t4 = eval_t(Complex64::new(4.0, 0.0), &table.precision).unwrap().to_complex().unwrap();
        assert_relative_eq!(a.get(1).to_complex().unwrap().re, -t1.re, max_relative = 1e-15);
        assert_relative_eq!(a.get(4).to_complex().unwrap().re, t4.re, max_relative = 1e-15);
    }

    #[test]
    fn u_prime_closed_form_matches_difference_quotient() {
        let mut ctx = MpContext::new(256);
        let h = ctx.real(1e-25);
        for m in 1..=30u64 {
            let n = ctx.uint(m * m);
            let up = ctx.from_real(ctx.add(&n, &h));
            let dn = ctx.from_real(ctx.sub(&n, &h));
            let fp = sine_sqrt_mp(&mut ctx, &up).re;
            let fm = sine_sqrt_mp(&mut ctx, &dn).re;
            let fd = ctx.div(&ctx.sub(&fp, &fm), &ctx.mul(&ctx.real(2.0), &h));
            let closed = ctx.div(&ctx.real(sign(m)), &ctx.mul(&ctx.real(2.0), &n));
            let rel = mp::to_f64(&ctx.div(&ctx.sub(&fd, &closed).abs(), &closed.abs()));
            assert!(rel <= 1e-20, "m = {m}: {rel:e}");
        }
    }

    #[test]
    fn g_limit_matches_symmetric_difference_and_weights() {
        // G(n) from sin(pi z)/(UV) at n ± eps against pi (-1)^n / (UV)'(n),
        // and a_n G(n) against the weight pi T(n) / (UV)'(n).
        let table = ConstructionTable::build(&small_cfg()).unwrap();
        let a = coefficients_a(&table);
        let mut ctx = table.ctx();
        let eps = ctx.real(1e-20);
        for p in table.points.iter().filter(|p| p.n <= 10_000) {
            let mut acc = ctx.zero();
            for e in [eps.clone(), eps.neg()] {
                let z = ctx.from_real(ctx.add(&ctx.uint(p.n), &e));
                let pz = ctx.cscale(&z, &ctx.pi());
                let s = ctx.csin(&pz);
                let uv = uv_mp(&mut ctx, &z, &table.precision).unwrap();
                acc = ctx.add(&acc, &ctx.cdiv(&s, &uv).re);
            }
            let limit = ctx.div(&acc, &ctx.real(2.0));
            let g = p.g_value(&ctx);
            let rel = mp::to_f64(&ctx.div(&ctx.sub(&limit, &g).abs(), &g.abs()));
            assert!(rel < 1e-25, "n = {}: {rel:e}", p.n);

            let an = a.get(p.n as i64).to_complex().unwrap().re;
            let lhs = an * mp::to_f64(&g);
            let rhs = mp::to_f64(&p.weight(&ctx));
            assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
        }
    }

    #[test]
    fn g_s_reproduces_coefficients_on_support() {
        // G(n + eps) S(n + eps) -> a_n, evaluated from the definitions.
        let table = ConstructionTable::build(&small_cfg()).unwrap();
        let a = coefficients_a(&table);
        for n in [1u64, 4, 5, 17, 64, 65, 256, 257, 4096] {
            let z = Complex64::new(n as f64 + 1e-9, 0.0);
            let g = eval_g_lambda(z, &table.precision).unwrap();
            let s = eval_s(&table, z, PoleMode::Reject).unwrap().value;
            let gs = g.mul(&s).to_complex().unwrap().re;
            let an = a.get(n as i64).to_complex().unwrap().re;
            assert!(((gs - an) / an).abs() < 1e-7, "n = {n}");
            // Limit mode: G(n) S(n) exactly reproduces a_n.
            let sl = eval_s(&table, Complex64::new(n as f64, 0.0), PoleMode::Limit).unwrap().value;
            let gl = eval_g_lambda(Complex64::new(n as f64, 0.0), &table.precision).unwrap();
            assert_relative_eq!(gl.mul(&sl).to_complex().unwrap().re, an, max_relative = 1e-10);
        }
        assert_eq!(
            eval_s(&table, Complex64::new(17.0, 0.0), PoleMode::Reject).unwrap_err(),
            Error::PoleHit(17.0)
        );
    }

    #[test]
    fn s_consistency_with_cauchy_transform() {
        // G S / sin(pi z) = (1/pi) sum (-1)^n a_n / (z - n) at z = 1/4.
        let table = ConstructionTable::build(&small_cfg()).unwrap();
        let z = Complex64::new(0.25, 0.0);
        let g = eval_g_lambda(z, &table.precision).unwrap().to_complex().unwrap();
        let s = eval_s(&table, z, PoleMode::Reject).unwrap().value.to_complex().unwrap();
        let lhs = g * s / (PI * 0.25).sin();
        let a = coefficients_a(&table);
        let coeffs = crate::analytic::SparseSeries::new(
            a.entries
                .iter()
                .map(|(n, v)| (*n as i64, sign(*n) * v.to_complex().unwrap().re))
                .collect(),
        );
        let c = crate::analytic::cauchy_transform(&coeffs, z, &PrecisionConfig::with_bits(192)).unwrap();
        assert!((lhs - c.value / PI).norm() < 1e-13 * lhs.norm());
        let si = eval_s(&table, Complex64::new(0.0, 1.0), PoleMode::Reject).unwrap().value.to_complex().unwrap();
        assert!(si.im.abs() > 0.0 && si.norm().is_finite());
    }

    #[test]
    fn under_truncated_moments_are_rejected() {
        let cfg = CounterexampleConfig {
            zero_cutoff: 300,
            precision: PrecisionConfig::with_bits(128),
            ..CounterexampleConfig::default()
        };
        let table = ConstructionTable::build(&cfg).unwrap();
        match verify_orthogonality(&table, 0, 1e-8) {
            Err(Error::CutoffInsufficient { tail, .. }) => assert!(tail > 1e-8),
            Ok(r) => assert!(r[0].relative_residual > 1e-8),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn moment_residuals_improve_with_cutoff_and_precision() {
        let mut prev = f64::INFINITY;
        for (e, bits) in [(6, 128), (8, 192), (9, 256)] {
            let cfg = CounterexampleConfig {
                precision: PrecisionConfig::with_bits(bits),
                ..CounterexampleConfig::default().with_cutoff_exponent(e)
            };
            let table = ConstructionTable::build(&cfg).unwrap();
            let r = match verify_orthogonality(&table, 0, 1.0) {
                Ok(r) => r[0].relative_residual,
                Err(e) => panic!("{e}"),
            };
            assert!(r <= prev, "cutoff 4^{e}: {r:e} > {prev:e}");
            prev = r;
        }
    }

    #[test]
    fn membership_for_zero_multiplier_is_trivial() {
        let table = ConstructionTable::build(&small_cfg()).unwrap();
        let grid = MembershipGrid {
            bands: 6,
            samples_per_band: 4,
            ..MembershipGrid::default()
        };
        let ev = verify_pw_membership(&table, &[Multiplier::Zero, Multiplier::Monomial(0)], &grid).unwrap();
        assert!(ev[0].partial_sums.iter().all(|s| s.1 == 0.0));
        assert!(ev[0].band_maxima.iter().all(|b| b.1 == 0.0));
        assert!(ev[1].partial_sums.iter().all(|s| s.1 > 0.0));
    }
}
