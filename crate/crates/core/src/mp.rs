//! Extended-precision real and complex arithmetic.
//!
//! A thin layer over `astro_float::BigFloat` that fixes the precision and
//! rounding mode once per [`MpContext`], so the numerical code reads as
//! ordinary arithmetic instead of threading `(p, rm, &mut cc)` through
//! every call.

use astro_float::{BigFloat, Consts, RoundingMode};
use num_complex::Complex64;

const RM: RoundingMode = RoundingMode::ToEven;

/// Precision, rounding mode and constant cache for one computation.
///
/// Contexts are cheap to create; parallel code builds one per task.
pub struct MpContext {
    prec: usize,
    consts: Consts,
    pi: BigFloat,
}

impl MpContext {
    pub fn new(mantissa_bits: u32) -> Self {
        // astro-float rejects precisions that are not whole 64-bit words.
        let prec = (mantissa_bits.max(53) as usize).div_ceil(64) * 64;
        let mut consts = Consts::new().expect("astro-float constant cache");
        let pi = consts.pi(prec, RM);
        Self { prec, consts, pi }
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn real(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.prec)
    }

    pub fn int(&self, n: i64) -> BigFloat {
        BigFloat::from_i64(n, self.prec)
    }

    pub fn uint(&self, n: u64) -> BigFloat {
        BigFloat::from_u64(n, self.prec)
    }

    pub fn zero(&self) -> BigFloat {
        BigFloat::from_word(0, self.prec)
    }

    pub fn one(&self) -> BigFloat {
        BigFloat::from_word(1, self.prec)
    }

    pub fn pi(&self) -> BigFloat {
        self.pi.clone()
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.prec, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.prec, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.prec, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.prec, RM)
    }

    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.prec, RM)
    }

    pub fn powi(&self, a: &BigFloat, n: usize) -> BigFloat {
        a.powi(n, self.prec, RM)
    }

    pub fn sin(&mut self, a: &BigFloat) -> BigFloat {
        a.sin(self.prec, RM, &mut self.consts)
    }

    pub fn cos(&mut self, a: &BigFloat) -> BigFloat {
        a.cos(self.prec, RM, &mut self.consts)
    }

    pub fn sinh(&mut self, a: &BigFloat) -> BigFloat {
        a.sinh(self.prec, RM, &mut self.consts)
    }

    pub fn cosh(&mut self, a: &BigFloat) -> BigFloat {
        a.cosh(self.prec, RM, &mut self.consts)
    }

    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.prec, RM, &mut self.consts)
    }

    pub fn atan2(&mut self, y: &BigFloat, x: &BigFloat) -> f64 {
        // Phases are reported in double precision; no need for a big atan2.
        let (yf, xf) = (to_f64(y), to_f64(x));
        if yf.is_finite() && xf.is_finite() && (yf != 0.0 || xf != 0.0) {
            return yf.atan2(xf);
        }
        // Both parts overflow or underflow the double range: rescale first.
        let ey = y.exponent().unwrap_or(0);
        let ex = x.exponent().unwrap_or(0);
        let shift = ey.max(ex);
        let mut ys = y.clone();
        let mut xs = x.clone();
        if !y.is_zero() {
            ys.set_exponent(ey - shift);
        }
        if !x.is_zero() {
            xs.set_exponent(ex - shift);
        }
        to_f64(&ys).atan2(to_f64(&xs))
    }

    // ---- complex ----

    pub fn complex(&self, z: Complex64) -> MpComplex {
        MpComplex {
            re: self.real(z.re),
            im: self.real(z.im),
        }
    }

    pub fn from_real(&self, re: BigFloat) -> MpComplex {
        MpComplex {
            re,
            im: self.zero(),
        }
    }

    pub fn cadd(&self, a: &MpComplex, b: &MpComplex) -> MpComplex {
        MpComplex {
            re: self.add(&a.re, &b.re),
            im: self.add(&a.im, &b.im),
        }
    }

    pub fn csub(&self, a: &MpComplex, b: &MpComplex) -> MpComplex {
        MpComplex {
            re: self.sub(&a.re, &b.re),
            im: self.sub(&a.im, &b.im),
        }
    }

    pub fn cmul(&self, a: &MpComplex, b: &MpComplex) -> MpComplex {
        MpComplex {
            re: self.sub(&self.mul(&a.re, &b.re), &self.mul(&a.im, &b.im)),
            im: self.add(&self.mul(&a.re, &b.im), &self.mul(&a.im, &b.re)),
        }
    }

    pub fn cscale(&self, a: &MpComplex, s: &BigFloat) -> MpComplex {
        MpComplex {
            re: self.mul(&a.re, s),
            im: self.mul(&a.im, s),
        }
    }

    pub fn cdiv(&self, a: &MpComplex, b: &MpComplex) -> MpComplex {
        let den = self.add(&self.mul(&b.re, &b.re), &self.mul(&b.im, &b.im));
        let re = self.add(&self.mul(&a.re, &b.re), &self.mul(&a.im, &b.im));
        let im = self.sub(&self.mul(&a.im, &b.re), &self.mul(&a.re, &b.im));
        MpComplex {
            re: self.div(&re, &den),
            im: self.div(&im, &den),
        }
    }

    pub fn cdiv_real(&self, a: &MpComplex, s: &BigFloat) -> MpComplex {
        MpComplex {
            re: self.div(&a.re, s),
            im: self.div(&a.im, s),
        }
    }

    pub fn cabs2(&self, a: &MpComplex) -> BigFloat {
        self.add(&self.mul(&a.re, &a.re), &self.mul(&a.im, &a.im))
    }

    pub fn cabs(&self, a: &MpComplex) -> BigFloat {
        self.sqrt(&self.cabs2(a))
    }

    /// Principal square root, branch cut on the negative real axis; the cut
    /// itself maps to the upper half-plane.
    pub fn csqrt(&self, a: &MpComplex) -> MpComplex {
        if a.im.is_zero() {
            return if a.re.is_negative() {
                MpComplex {
                    re: self.zero(),
                    im: self.sqrt(&a.re.neg()),
                }
            } else {
                self.from_real(self.sqrt(&a.re))
            };
        }
        let r = self.cabs(a);
        let two = self.real(2.0);
        if !a.re.is_negative() {
            let t = self.sqrt(&self.div(&self.add(&r, &a.re), &two));
            let im = self.div(&a.im, &self.mul(&two, &t));
            MpComplex { re: t, im }
        } else {
            let t = self.sqrt(&self.div(&self.sub(&r, &a.re), &two));
            let re = self.div(&a.im.abs(), &self.mul(&two, &t));
            let im = if a.im.is_negative() { t.neg() } else { t };
            MpComplex { re, im }
        }
    }

    pub fn csin(&mut self, a: &MpComplex) -> MpComplex {
        if a.im.is_zero() {
            let s = self.sin(&a.re);
            return self.from_real(s);
        }
        let (s, c) = (self.sin(&a.re), self.cos(&a.re));
        let (sh, ch) = (self.sinh(&a.im), self.cosh(&a.im));
        MpComplex {
            re: self.mul(&s, &ch),
            im: self.mul(&c, &sh),
        }
    }

    /// Natural log of `|a|`; `-inf` for zero.
    pub fn ln_abs(&mut self, a: &MpComplex) -> f64 {
        if a.is_zero() {
            return f64::NEG_INFINITY;
        }
        let half = self.real(0.5);
        let l = self.ln(&self.cabs2(a));
        to_f64(&self.mul(&half, &l))
    }
}

/// Complex number with extended-precision parts.
#[derive(Debug, Clone)]
pub struct MpComplex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl MpComplex {
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }
}

/// Rounds a `BigFloat` to the nearest double (up to one ulp of double
/// rounding). Overflow gives an infinity, underflow a signed zero.
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if x.is_zero() {
        return 0.0;
    }
    let Some((words, _, sign, exponent, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let top = *words.last().expect("non-zero mantissa");
    // Value is 0.m * 2^exponent with the top word holding the leading bits.
    let mut v = top as f64;
    let mut shift = exponent as i64 - 64;
    if shift > 1100 {
        v = f64::INFINITY;
    } else if shift < -1200 {
        v = 0.0;
    } else {
        while shift > 1000 {
            v *= 2f64.powi(1000);
            shift -= 1000;
        }
        while shift < -1000 {
            v *= 2f64.powi(-1000);
            shift += 1000;
        }
        v *= 2f64.powi(shift as i32);
    }
    if sign.is_negative() {
        -v
    } else {
        v
    }
}

/// `log10 |x|`, computed without passing `x` through a double.
pub fn log10_abs(ctx: &mut MpContext, x: &BigFloat) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let l = ctx.ln(&x.abs());
    to_f64(&l) / std::f64::consts::LN_10
}
