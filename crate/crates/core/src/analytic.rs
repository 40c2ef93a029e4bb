//! Sinc kernels, genus-zero canonical products and Cauchy-type series.
//!
//! Products are accumulated in extended precision and reported as
//! [`LogComplex`] so that the superpolynomial growth of lacunary products
//! never over- or underflows.

use std::f64::consts::PI;

use astro_float::BigFloat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mp::{MpComplex, MpContext};
use crate::precision::PrecisionConfig;

/// A complex value stored as `exp(log_magnitude + i*phase)`.
///
/// Exact zero is encoded as `log_magnitude = -inf`, `phase = 0`. Phases
/// produced by this crate are principal values in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub log_magnitude: f64,
    pub phase: f64,
}

// ln(f64::MAX) and ln of the smallest positive subnormal.
const LN_MAX: f64 = 709.782712893384;
const LN_MIN: f64 = -744.4400719213812;

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_magnitude: f64::NEG_INFINITY,
        phase: 0.0,
    };

    pub const ONE: LogComplex = LogComplex {
        log_magnitude: 0.0,
        phase: 0.0,
    };

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            return Self::ZERO;
        }
        Self {
            log_magnitude: z.norm().ln(),
            phase: z.arg(),
        }
    }

    pub fn from_mp(ctx: &mut MpContext, z: &MpComplex) -> Self {
        if z.is_zero() {
            return Self::ZERO;
        }
        Self {
            log_magnitude: ctx.ln_abs(z),
            phase: ctx.atan2(&z.im, &z.re),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    /// Converts back to an ordinary complex number; values outside the
    /// double range are an error rather than a silent clamp.
    pub fn to_complex(&self) -> Result<Complex64> {
        if self.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if !(LN_MIN..=LN_MAX).contains(&self.log_magnitude) {
            return Err(Error::Unrepresentable(self.log_magnitude));
        }
        Ok(Complex64::from_polar(self.log_magnitude.exp(), self.phase))
    }

    /// Like [`to_complex`](Self::to_complex) but flushes underflow to zero.
    pub fn to_complex_flush(&self) -> Result<Complex64> {
        if self.log_magnitude < LN_MIN {
            return Ok(Complex64::new(0.0, 0.0));
        }
        self.to_complex()
    }

    pub fn log10_abs(&self) -> f64 {
        self.log_magnitude / std::f64::consts::LN_10
    }

    pub fn mul(&self, other: &LogComplex) -> LogComplex {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        LogComplex {
            log_magnitude: self.log_magnitude + other.log_magnitude,
            phase: wrap_phase(self.phase + other.phase),
        }
    }

    pub fn div(&self, other: &LogComplex) -> Result<LogComplex> {
        if other.is_zero() {
            return Err(Error::InvalidInput("division by an exact zero".into()));
        }
        if self.is_zero() {
            return Ok(Self::ZERO);
        }
        Ok(LogComplex {
            log_magnitude: self.log_magnitude - other.log_magnitude,
            phase: wrap_phase(self.phase - other.phase),
        })
    }
}

fn wrap_phase(p: f64) -> f64 {
    let mut q = p % (2.0 * PI);
    if q <= -PI {
        q += 2.0 * PI;
    } else if q > PI {
        q -= 2.0 * PI;
    }
    q
}

/// `sin(pi x)` with exact argument reduction, so integers give exact zeros.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let n = x.round();
    let r = x - n;
    let s = (PI * r).sin();
    if n.rem_euclid(2.0) == 1.0 {
        -s
    } else {
        s
    }
}

/// `cos(pi x)` with exact argument reduction.
pub fn cos_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let n = x.round();
    let r = x - n;
    let c = (PI * r).cos();
    if n.rem_euclid(2.0) == 1.0 {
        -c
    } else {
        c
    }
}

/// `sin(pi w)` for complex `w`.
pub fn sin_pi_complex(w: Complex64) -> Complex64 {
    let y = PI * w.im;
    Complex64::new(sin_pi(w.re) * y.cosh(), cos_pi(w.re) * y.sinh())
}

/// Normalized sinc `sin(pi w) / (pi w)`, equal to 1 at the origin.
pub fn sinc_pi(w: Complex64) -> Complex64 {
    if w.im == 0.0 && w.re == w.re.round() {
        return if w.re == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    let pw = w * PI;
    if pw.norm() < 1e-4 {
        let p2 = pw * pw;
        return Complex64::new(1.0, 0.0) - p2 / 6.0 + p2 * p2 / 120.0;
    }
    sin_pi_complex(w) / pw
}

/// Reproducing kernel of the Paley-Wiener space,
/// `k_lambda(z) = sin(pi (z - conj(lambda))) / (pi (z - conj(lambda)))`.
///
/// Integer differences return exact Kronecker deltas.
pub fn eval_sinc_kernel(lambda: Complex64, z: Complex64, cfg: &PrecisionConfig) -> Complex64 {
    let w = z - lambda.conj();
    if cfg.is_double() || (w.im == 0.0 && w.re == w.re.round()) {
        return sinc_pi(w);
    }
    let mut ctx = MpContext::new(cfg.mantissa_bits);
    let wm = ctx.complex(w);
    let pw = ctx.cscale(&wm, &ctx.pi());
    let s = ctx.csin(&pw);
    ctx.cdiv(&s, &pw).to_complex64()
}

/// Zero sequences that generate the canonical products used here. All
/// sequences are positive except explicit lists, and are indexed from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroRule {
    /// Finite list of nonzero zeros, kept sorted by absolute value.
    Explicit(Vec<f64>),
    /// `n^2`, `n >= 1`.
    Squares,
    /// `4^n + 1`, `n >= 1`.
    Lacunary,
    /// `100 * 4^n - 1/2`, `n >= 1`.
    ShiftedLacunary,
    /// `100 n^2 - 1/2`, `n >= 1`.
    ShiftedSquares,
}

impl ZeroRule {
    pub fn explicit(mut zeros: Vec<f64>) -> Result<Self> {
        if zeros.iter().any(|x| !x.is_finite() || *x == 0.0) {
            return Err(Error::InvalidInput(
                "explicit zeros must be finite and nonzero".into(),
            ));
        }
        zeros.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
        Ok(ZeroRule::Explicit(zeros))
    }

    /// The `k`-th zero, `k >= 1`.
    pub fn zero(&self, k: usize) -> Option<f64> {
        if k == 0 {
            return None;
        }
        let kf = k as f64;
        match self {
            ZeroRule::Explicit(v) => v.get(k - 1).copied(),
            ZeroRule::Squares => Some(kf * kf),
            ZeroRule::Lacunary => Some(4f64.powi(k as i32) + 1.0),
            ZeroRule::ShiftedLacunary => Some(100.0 * 4f64.powi(k as i32) - 0.5),
            ZeroRule::ShiftedSquares => Some(100.0 * kf * kf - 0.5),
        }
    }

    /// The `k`-th zero as an exact extended-precision value.
    pub(crate) fn zero_mp(&self, ctx: &MpContext, k: usize) -> Option<BigFloat> {
        if k == 0 {
            return None;
        }
        let half = ctx.real(0.5);
        Some(match self {
            ZeroRule::Explicit(v) => ctx.real(*v.get(k - 1)?),
            ZeroRule::Squares => ctx.uint((k as u64) * (k as u64)),
            ZeroRule::Lacunary => ctx.add(&ctx.powi(&ctx.uint(4), k), &ctx.one()),
            ZeroRule::ShiftedLacunary => {
                ctx.sub(&ctx.mul(&ctx.uint(100), &ctx.powi(&ctx.uint(4), k)), &half)
            }
            ZeroRule::ShiftedSquares => {
                ctx.sub(&ctx.uint(100 * (k as u64) * (k as u64)), &half)
            }
        })
    }

    /// Number of zeros, `None` for infinite sequences.
    pub fn len(&self) -> Option<usize> {
        match self {
            ZeroRule::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Upper bound on `sum_{j > k} 1 / |x_j|`.
    pub fn tail_reciprocal_sum(&self, k: usize) -> f64 {
        let kf = k as f64;
        match self {
            ZeroRule::Explicit(v) => v.iter().skip(k).map(|x| 1.0 / x.abs()).sum(),
            ZeroRule::Squares => {
                if k == 0 {
                    PI * PI / 6.0
                } else {
                    1.0 / kf
                }
            }
            // 4^j + 1 > 4^j
            ZeroRule::Lacunary => 4f64.powi(-(k as i32)) / 3.0,
            // 100 * 4^j - 1/2 > 99 * 4^j
            ZeroRule::ShiftedLacunary => 4f64.powi(-(k as i32)) / (3.0 * 99.0),
            // 100 j^2 - 1/2 > 99 j^2
            ZeroRule::ShiftedSquares => {
                if k == 0 {
                    PI * PI / (6.0 * 99.0)
                } else {
                    1.0 / (99.0 * kf)
                }
            }
        }
    }

    /// All zeros not exceeding `bound`, in increasing order.
    pub fn zeros_up_to(&self, bound: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if let ZeroRule::Explicit(v) = self {
            out.extend(v.iter().copied().filter(|x| *x <= bound));
            out.sort_by(f64::total_cmp);
            return out;
        }
        let mut k = 1;
        while let Some(x) = self.zero(k) {
            if x > bound || !x.is_finite() {
                break;
            }
            out.push(x);
            k += 1;
        }
        out
    }

    /// Index `k` with `zero(k) == x`, if `x` is exactly a zero.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        if !x.is_finite() {
            return None;
        }
        let perfect_square = |y: f64| -> Option<usize> {
            if y < 1.0 || y > 9.0e15 {
                return None;
            }
            let m = y.sqrt().round();
            (m * m == y).then_some(m as usize)
        };
        let power_of_four = |y: f64| -> Option<usize> {
            if y < 4.0 || y > 9.0e15 || y != y.round() {
                return None;
            }
            let y = y as u64;
            (y.is_power_of_two() && y.trailing_zeros() % 2 == 0)
                .then_some((y.trailing_zeros() / 2) as usize)
        };
        match self {
            ZeroRule::Explicit(v) => v.iter().position(|z| *z == x).map(|p| p + 1),
            ZeroRule::Squares => perfect_square(x),
            ZeroRule::Lacunary => power_of_four(x - 1.0),
            ZeroRule::ShiftedLacunary => {
                let y = (x + 0.5) / 100.0;
                (y * 100.0 == x + 0.5).then(|| power_of_four(y)).flatten()
            }
            ZeroRule::ShiftedSquares => {
                let y = (x + 0.5) / 100.0;
                (y * 100.0 == x + 0.5).then(|| perfect_square(y)).flatten()
            }
        }
    }

    pub fn has_closed_form(&self) -> bool {
        matches!(self, ZeroRule::Squares | ZeroRule::ShiftedSquares)
    }
}

/// A genus-zero canonical product `prod_k (1 - z / x_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSpec {
    pub rule: ZeroRule,
    /// Use the sine closed form when the rule has one.
    pub closed_form: bool,
}

impl ProductSpec {
    pub fn new(rule: ZeroRule) -> Self {
        let closed_form = rule.has_closed_form();
        Self { rule, closed_form }
    }

    pub fn truncated(rule: ZeroRule) -> Self {
        Self {
            rule,
            closed_form: false,
        }
    }
}

/// Smallest truncation index whose relative tail error is within tolerance.
fn truncation_index(rule: &ZeroRule, modulus: f64, cfg: &PrecisionConfig) -> Result<usize> {
    if let Some(n) = rule.len() {
        return Ok(n);
    }
    let mut best = f64::INFINITY;
    for k in 0..=cfg.product_cutoff {
        let next = rule.zero(k + 1).unwrap_or(f64::INFINITY).abs();
        if modulus > 0.5 * next {
            continue;
        }
        // |log prod_{j>k}(1 - z/x_j)| <= 2 |z| sum_{j>k} 1/|x_j| when |z/x_j| <= 1/2.
        let s = 2.0 * modulus * rule.tail_reciprocal_sum(k);
        let bound = s.exp_m1();
        if bound <= cfg.tail_tolerance {
            return Ok(k);
        }
        best = best.min(bound);
    }
    Err(Error::TailBoundExceeded {
        cutoff: cfg.product_cutoff,
        tolerance: cfg.tail_tolerance,
        best_bound: best,
    })
}

/// `sin(pi sqrt(z)) / (pi sqrt(z))`, the closed form of the squares product.
pub(crate) fn sine_sqrt_mp(ctx: &mut MpContext, z: &MpComplex) -> MpComplex {
    let w = ctx.csqrt(z);
    if w.is_zero() {
        return ctx.from_real(ctx.one());
    }
    let pw = ctx.cscale(&w, &ctx.pi());
    let s = ctx.csin(&pw);
    ctx.cdiv(&s, &pw)
}

/// `sin(pi sqrt(z + 1/2) / 10) / sqrt(z + 1/2)`, entire in `z` (even in the
/// square root) with value `pi/10` at `z = -1/2`.
pub(crate) fn shifted_sine_sqrt_mp(ctx: &mut MpContext, z: &MpComplex) -> MpComplex {
    let shifted = ctx.cadd(z, &ctx.from_real(ctx.real(0.5)));
    let w = ctx.csqrt(&shifted);
    if w.is_zero() {
        return ctx.from_real(ctx.div(&ctx.pi(), &ctx.uint(10)));
    }
    let arg = ctx.cdiv_real(&ctx.cscale(&w, &ctx.pi()), &ctx.uint(10));
    let s = ctx.csin(&arg);
    ctx.cdiv(&s, &w)
}

/// Evaluates the product in extended precision.
pub(crate) fn product_mp(
    ctx: &mut MpContext,
    spec: &ProductSpec,
    z: &MpComplex,
    cfg: &PrecisionConfig,
) -> Result<MpComplex> {
    if spec.closed_form {
        match spec.rule {
            ZeroRule::Squares => return Ok(sine_sqrt_mp(ctx, z)),
            ZeroRule::ShiftedSquares => {
                let num = shifted_sine_sqrt_mp(ctx, z);
                let at_zero = shifted_sine_sqrt_mp(ctx, &ctx.from_real(ctx.zero()));
                return Ok(ctx.cdiv(&num, &at_zero));
            }
            _ => {}
        }
    }
    let modulus = z.to_complex64().norm();
    let k_max = truncation_index(&spec.rule, modulus, cfg)?;
    let mut acc = ctx.from_real(ctx.one());
    for k in 1..=k_max {
        let x = spec.rule.zero_mp(ctx, k).expect("index within truncation");
        let factor = ctx.csub(&ctx.from_real(ctx.one()), &ctx.cdiv_real(z, &x));
        acc = ctx.cmul(&acc, &factor);
    }
    Ok(acc)
}

/// Derivative of the product at its `j`-th zero:
/// `-(1/x_j) prod_{k != j} (1 - x_j / x_k)`.
pub(crate) fn product_derivative_mp(
    ctx: &mut MpContext,
    rule: &ZeroRule,
    j: usize,
    cfg: &PrecisionConfig,
) -> Result<BigFloat> {
    let xj = rule
        .zero_mp(ctx, j)
        .ok_or_else(|| Error::InvalidInput(format!("zero index {j} out of range")))?;
    let modulus = rule.zero(j).unwrap_or(f64::INFINITY).abs();
    let k_max = truncation_index(rule, modulus, cfg)?.max(j);
    let mut acc = ctx.div(&ctx.one(), &xj).neg();
    for k in (1..=k_max).filter(|k| *k != j) {
        let xk = rule.zero_mp(ctx, k).expect("index within truncation");
        acc = ctx.mul(&acc, &ctx.sub(&ctx.one(), &ctx.div(&xj, &xk)));
    }
    Ok(acc)
}

/// Value of the canonical product at `z`.
///
/// Closed forms are used for the square-type rules when `spec.closed_form`
/// is set; otherwise the product is truncated where its tail bound drops
/// below `cfg.tail_tolerance` (relative). Enumerated zeros give an exact
/// zero.
pub fn eval_product(spec: &ProductSpec, z: Complex64, cfg: &PrecisionConfig) -> Result<LogComplex> {
    cfg.validate()?;
    if z.im == 0.0 && spec.rule.index_of(z.re).is_some() {
        return Ok(LogComplex::ZERO);
    }
    let mut ctx = MpContext::new(cfg.mantissa_bits);
    let zm = ctx.complex(z);
    let value = product_mp(&mut ctx, spec, &zm, cfg)?;
    Ok(LogComplex::from_mp(&mut ctx, &value))
}

/// Derivative of the canonical product at its `j`-th zero (`j >= 1`).
pub fn product_derivative_at_zero(
    rule: &ZeroRule,
    j: usize,
    cfg: &PrecisionConfig,
) -> Result<LogComplex> {
    cfg.validate()?;
    let mut ctx = MpContext::new(cfg.mantissa_bits);
    let d = product_derivative_mp(&mut ctx, rule, j, cfg)?;
    let dz = ctx.from_real(d);
    Ok(LogComplex::from_mp(&mut ctx, &dz))
}

/// Coefficients `c_n` on a finite integer support, plus a bound on the
/// absolute sum of the coefficients that were left out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSeries {
    terms: Vec<(i64, f64)>,
    pub omitted_abs_sum: f64,
}

impl SparseSeries {
    pub fn new(mut terms: Vec<(i64, f64)>) -> Self {
        terms.sort_by_key(|t| t.0);
        terms.dedup_by_key(|t| t.0);
        Self {
            terms,
            omitted_abs_sum: 0.0,
        }
    }

    pub fn with_omitted(mut self, abs_sum: f64) -> Self {
        self.omitted_abs_sum = abs_sum;
        self
    }

    pub fn terms(&self) -> &[(i64, f64)] {
        &self.terms
    }
}

/// A series value with a bound on what truncation left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// `sum_n c_n / (z - n)` over the support, accumulated at the configured
/// precision.
pub fn cauchy_transform(
    coeffs: &SparseSeries,
    z: Complex64,
    cfg: &PrecisionConfig,
) -> Result<SeriesValue> {
    cfg.validate()?;
    if z.im == 0.0 && coeffs.terms.iter().any(|(n, _)| *n as f64 == z.re) {
        return Err(Error::PoleHit(z.re));
    }
    let ctx = MpContext::new(cfg.mantissa_bits);
    let zm = ctx.complex(z);
    let mut acc = ctx.from_real(ctx.zero());
    for (n, c) in &coeffs.terms {
        let den = ctx.csub(&zm, &ctx.from_real(ctx.int(*n)));
        let term = ctx.cdiv(&ctx.from_real(ctx.real(*c)), &den);
        acc = ctx.cadd(&acc, &term);
    }
    let tail_bound = if coeffs.omitted_abs_sum == 0.0 {
        0.0
    } else {
        let (lo, hi) = match (coeffs.terms.first(), coeffs.terms.last()) {
            (Some(a), Some(b)) => (a.0 as f64, b.0 as f64),
            _ => (0.0, -1.0),
        };
        // Omitted indices lie outside [lo, hi].
        let real_gap = if z.re >= lo && z.re <= hi {
            (z.re - (lo - 1.0)).min((hi + 1.0) - z.re)
        } else {
            let nearest = z.re.round();
            (z.re - nearest).abs()
        };
        let dist = real_gap.hypot(z.im);
        if dist > 0.0 {
            coeffs.omitted_abs_sum / dist
        } else {
            f64::INFINITY
        }
    };
    Ok(SeriesValue {
        value: acc.to_complex64(),
        tail_bound,
    })
}
