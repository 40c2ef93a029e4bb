//! Conjugate functions on the real line, argument bookkeeping, and the
//! boundary representation `arg f = pi x + (conjugate term) + c`.
//!
//! The conjugate function uses the compensated kernel
//!
//! ```text
//! u~(x) = (1/pi) p.v. ∫ (1/(x - t) + t/(t^2 + 1)) u(t) dt
//! ```
//!
//! which converges for bounded `u`. The principal value is taken by
//! symmetric excision at radii `rho, rho/2, rho/4` followed by two
//! Richardson steps.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gl16, gl8};
use crate::sequences::ZeroSequence;

/// Algebraic tail `u(t) ≈ c |t|^(-p)` beyond the sampled range, with
/// separate constants on each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub exponent: f64,
    pub left: f64,
    pub right: f64,
}

impl TailModel {
    pub fn symmetric(constant: f64, exponent: f64) -> Self {
        Self {
            exponent,
            left: constant,
            right: constant,
        }
    }

    pub fn zero() -> Self {
        Self::symmetric(0.0, 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let c = if t < 0.0 { self.left } else { self.right };
        if c == 0.0 {
            return 0.0;
        }
        c * t.abs().powf(-self.exponent)
    }

    /// Least-squares constants for a given exponent from the outermost 10%
    /// of the samples on each side.
    pub fn fit(grid: &[f64], values: &[f64], exponent: f64) -> Result<Self> {
        let (left, right) = outer_indices(grid)?;
        let fit_side = |idx: &[usize]| -> f64 {
            // minimize sum (v - c w)^2 with w = |t|^-p
            let (mut num, mut den) = (0.0, 0.0);
            for &i in idx {
                let w = grid[i].abs().powf(-exponent);
                num += values[i] * w;
                den += w * w;
            }
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        };
        Ok(Self {
            exponent,
            left: fit_side(&left),
            right: fit_side(&right),
        })
    }

    /// Largest deviation of the outermost 10% of samples from the model,
    /// relative to the model's magnitude there (absolute when it vanishes).
    pub fn misfit(&self, grid: &[f64], values: &[f64]) -> Result<f64> {
        let (left, right) = outer_indices(grid)?;
        let mut worst: f64 = 0.0;
        for i in left.into_iter().chain(right) {
            let m = self.eval(grid[i]);
            let scale = if m != 0.0 { m.abs() } else { 1.0 };
            worst = worst.max((values[i] - m).abs() / scale);
        }
        Ok(worst)
    }
}

fn outer_indices(grid: &[f64]) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = grid.len();
    let k = (n / 10).max(2);
    if n < 2 * k {
        return Err(Error::InvalidInput("too few samples to fit a tail model".into()));
    }
    let left = (0..k).filter(|&i| grid[i] != 0.0).collect();
    let right = (n - k..n).filter(|&i| grid[i] != 0.0).collect();
    Ok((left, right))
}

/// A function known through samples on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction<T = f64> {
    grid: Vec<f64>,
    values: Vec<T>,
    tail: Option<TailModel>,
}

impl<T: Copy> SampledFunction<T> {
    pub fn new(grid: Vec<f64>, values: Vec<T>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "grid has {} points but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < 2 {
            return Err(Error::InvalidInput("need at least two samples".into()));
        }
        if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("grid must be finite and strictly increasing".into()));
        }
        Ok(Self {
            grid,
            values,
            tail: None,
        })
    }

    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> T) -> Result<Self> {
        let values = grid.iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// Relative misfit allowed when attaching a tail model to samples.
pub const TAIL_MODEL_TOLERANCE: f64 = 0.05;

impl SampledFunction<f64> {
    /// Attaches a tail model after checking it against the outermost 10% of
    /// the samples.
    pub fn with_tail(mut self, model: TailModel) -> Result<Self> {
        let misfit = model.misfit(&self.grid, &self.values)?;
        if !(misfit <= TAIL_MODEL_TOLERANCE) {
            return Err(Error::InvalidInput(format!(
                "tail model misfit {misfit:e} on the outer samples exceeds {TAIL_MODEL_TOLERANCE}"
            )));
        }
        self.tail = Some(model);
        Ok(self)
    }

    pub fn tail_model(&self) -> Option<TailModel> {
        self.tail
    }

    /// Cubic interpolation through the four nearest samples (linear on a
    /// two-point grid).
    pub fn interpolate(&self, t: f64) -> f64 {
        let n = self.grid.len();
        let j = self.grid.partition_point(|&g| g <= t).clamp(1, n - 1);
        if n < 4 {
            let (a, b) = (self.grid[j - 1], self.grid[j]);
            let s = (t - a) / (b - a);
            return self.values[j - 1] * (1.0 - s) + self.values[j] * s;
        }
        let start = j.saturating_sub(2).min(n - 4);
        let xs = &self.grid[start..start + 4];
        let ys = &self.values[start..start + 4];
        let mut acc = 0.0;
        for i in 0..4 {
            let mut l = 1.0;
            for k in 0..4 {
                if k != i {
                    l *= (t - xs[k]) / (xs[i] - xs[k]);
                }
            }
            acc += l * ys[i];
        }
        acc
    }
}

/// A real function on the line as seen by the quadrature.
pub trait BoundaryFunction: Sync {
    fn eval(&self, t: f64) -> f64;

    /// Finite integration range; outside it the tail model (if any) applies.
    fn domain(&self) -> (f64, f64);

    /// Jumps or kinks; quadrature panels end exactly there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Integrable singularities; panels are graded geometrically toward them.
    fn singular_points(&self) -> Vec<f64> {
        Vec::new()
    }

    fn tail(&self) -> Option<TailModel> {
        None
    }
}

impl BoundaryFunction for SampledFunction<f64> {
    fn eval(&self, t: f64) -> f64 {
        self.interpolate(t)
    }

    fn domain(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    fn tail(&self) -> Option<TailModel> {
        self.tail
    }
}

/// A closure with its quadrature metadata.
pub struct AnalyticFunction<F> {
    f: F,
    domain: (f64, f64),
    breakpoints: Vec<f64>,
    singular_points: Vec<f64>,
    tail: Option<TailModel>,
}

impl<F: Fn(f64) -> f64 + Sync> AnalyticFunction<F> {
    pub fn new(f: F, lo: f64, hi: f64) -> Self {
        Self {
            f,
            domain: (lo, hi),
            breakpoints: Vec::new(),
            singular_points: Vec::new(),
            tail: None,
        }
    }

    pub fn with_breakpoints(mut self, points: Vec<f64>) -> Self {
        self.breakpoints = points;
        self
    }

    pub fn with_singular_points(mut self, points: Vec<f64>) -> Self {
        self.singular_points = points;
        self
    }

    pub fn with_tail(mut self, tail: TailModel) -> Self {
        self.tail = Some(tail);
        self
    }
}

impl<F: Fn(f64) -> f64 + Sync> BoundaryFunction for AnalyticFunction<F> {
    fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }

    fn singular_points(&self) -> Vec<f64> {
        self.singular_points.clone()
    }

    fn tail(&self) -> Option<TailModel> {
        self.tail
    }
}

/// Quadrature knobs for the principal-value integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvConfig {
    /// Largest excision radius; shrunk to a quarter of the distance from
    /// `x` to the nearest breakpoint, singular point or domain end.
    pub excision_radius: f64,
    /// Panel width away from `x` and from singular points.
    pub h_max: f64,
    /// Panels may grow to `far_growth * |t - x|` when that exceeds `h_max`;
    /// zero keeps the width uniform.
    pub far_growth: f64,
    /// Depth of the geometric grading toward singular points.
    pub grading_levels: u32,
    /// Without a tail model, `|u|` at the domain ends must not exceed this.
    pub edge_tolerance: f64,
}

impl Default for PvConfig {
    fn default() -> Self {
        Self {
            excision_radius: 0.01,
            h_max: 0.25,
            far_growth: 0.0,
            grading_levels: 40,
            edge_tolerance: 1e-10,
        }
    }
}

/// Principal value with the Richardson error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateValue {
    pub value: f64,
    pub error_estimate: f64,
    /// Excision radius actually used.
    pub rho: f64,
}

fn kernel(x: f64, t: f64) -> f64 {
    (1.0 + x * t) / ((x - t) * (1.0 + t * t))
}

/// Integral over `[a, b]` split into panels no wider than the local width.
fn panel_sum(a: f64, b: f64, x: f64, cfg: &PvConfig, g: &impl Fn(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    let mut t = a;
    while t < b {
        let mid_dist = (t - x).abs();
        let w = cfg.h_max.max(cfg.far_growth * mid_dist);
        let mut next = (t + w).min(b);
        // Avoid slivers at the end of the interval.
        if b - next < 1e-3 * w {
            next = b;
        }
        acc += gl8().integrate(t, next, g);
        t = next;
    }
    acc
}

/// `∫_hi^∞ g` (or `∫_{-∞}^lo g` when `left`) via `t = end ± L (1 - s)/s`.
fn tail_integral(end: f64, left: bool, g: &impl Fn(f64) -> f64) -> f64 {
    let l = end.abs().max(1.0);
    let h = |s: f64| -> f64 {
        let d = l * (1.0 - s) / s;
        let t = if left { end - d } else { end + d };
        g(t) * l / (s * s)
    };
    // Graded toward s = 0 (infinity) and s = 1 (the domain end).
    let mut knots = vec![0.0, 1.0];
    for k in 1..=40 {
        knots.push(2f64.powi(-k));
        knots.push(1.0 - 2f64.powi(-k - 1));
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    knots
        .windows(2)
        .map(|w| gl8().integrate(w[0], w[1], h))
        .sum()
}

/// Conjugate function `u~(x)` for `x` inside the domain of `u`.
pub fn conjugate_function(
    u: &(impl BoundaryFunction + ?Sized),
    x: f64,
    cfg: &PvConfig,
) -> Result<ConjugateValue> {
    let (lo, hi) = u.domain();
    if !(x > lo && x < hi) || !x.is_finite() {
        return Err(Error::SingularityOnGridEdge(x));
    }
    let tail = match u.tail() {
        Some(t) => t,
        None => {
            let edge = u.eval(lo).abs().max(u.eval(hi).abs());
            if edge > cfg.edge_tolerance {
                return Err(Error::TailModelMissing);
            }
            TailModel::zero()
        }
    };
    let breaks: Vec<f64> = u
        .breakpoints()
        .into_iter()
        .filter(|b| *b > lo && *b < hi)
        .collect();
    let singular: Vec<f64> = u
        .singular_points()
        .into_iter()
        .filter(|s| *s >= lo && *s <= hi)
        .collect();
    let dmin = breaks
        .iter()
        .chain(&singular)
        .chain([lo, hi].iter())
        .map(|p| (p - x).abs())
        .fold(f64::INFINITY, f64::min);
    let rho = cfg.excision_radius.min(dmin / 4.0);
    if !(rho > 1e-12 * x.abs().max(1.0)) {
        return Err(Error::SingularityOnGridEdge(x));
    }

    let ku = |t: f64| kernel(x, t) * u.eval(t);
    let comp = |t: f64| t / (1.0 + t * t) * u.eval(t);

    // Knots for the far field: excision edges, breakpoints, grading toward x
    // and toward singular points.
    let mut knots = vec![lo, hi, x - rho, x + rho];
    knots.extend(&breaks);
    let mut d = 2.0 * rho;
    while d < cfg.h_max {
        knots.push(x - d);
        knots.push(x + d);
        d *= 2.0;
    }
    for &s in &singular {
        knots.push(s);
        for k in 0..cfg.grading_levels as i32 {
            let e = cfg.h_max * 2f64.powi(-k);
            knots.push(s - e);
            knots.push(s + e);
        }
    }
    knots.retain(|k| *k >= lo && *k <= hi && !(*k > x - rho && *k < x + rho));
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let far: f64 = knots
        .windows(2)
        .filter(|w| !(w[0] >= x - rho && w[1] <= x + rho))
        .map(|w| panel_sum(w[0], w[1], x, cfg, &ku))
        .sum();

    let annulus = |inner: f64, outer: f64| -> f64 {
        gl16().integrate(x - outer, x - inner, ku) + gl16().integrate(x + inner, x + outer, ku)
    };
    let compensation = |e: f64| gl16().integrate(x - e, x + e, comp);

    let tails = tail_integral(hi, false, &|t| kernel(x, t) * tail.eval(t))
        + tail_integral(lo, true, &|t| kernel(x, t) * tail.eval(t));

    let i1 = far + compensation(rho);
    let i2 = far + annulus(rho / 2.0, rho) + compensation(rho / 2.0);
    let i4 = far + annulus(rho / 2.0, rho) + annulus(rho / 4.0, rho / 2.0) + compensation(rho / 4.0);
    // I(e) = PV + c1 e + c3 e^3 + ...
    let a1_rho = 2.0 * i2 - i1;
    let a1_half = 2.0 * i4 - i2;
    let a2 = (8.0 * a1_half - a1_rho) / 7.0;
    Ok(ConjugateValue {
        value: (a2 + tails) / PI,
        error_estimate: (a2 - a1_half).abs() / PI,
        rho,
    })
}

/// `∫ |u(t)| / (1 + t^2) dt` over the line, tail model included.
pub fn poisson_l1(u: &(impl BoundaryFunction + ?Sized), cfg: &PvConfig) -> f64 {
    let (lo, hi) = u.domain();
    let mut knots = vec![lo, hi];
    knots.extend(u.breakpoints());
    for s in u.singular_points() {
        knots.push(s);
        for k in 0..cfg.grading_levels as i32 {
            let e = cfg.h_max * 2f64.powi(-k);
            knots.push(s - e);
            knots.push(s + e);
        }
    }
    knots.retain(|k| *k >= lo && *k <= hi);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let g = |t: f64| u.eval(t).abs() / (1.0 + t * t);
    let inner: f64 = knots
        .windows(2)
        .map(|w| panel_sum(w[0], w[1], 0.0, cfg, &g))
        .sum();
    let tail = u.tail().unwrap_or_else(TailModel::zero);
    let tg = |t: f64| tail.eval(t).abs() / (1.0 + t * t);
    inner + tail_integral(hi, false, &tg) + tail_integral(lo, true, &tg)
}

/// An unwrapped argument along a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgumentBranch {
    pub base_points: Vec<f64>,
    pub values: Vec<f64>,
    /// Real zeros crossed, with multiplicity.
    pub zero_ledger: Vec<(f64, u32)>,
}

impl ArgumentBranch {
    /// The additive constant fixing the branch: the value at the first point.
    pub fn constant(&self) -> f64 {
        self.values[0]
    }

    pub fn total_increment(&self) -> f64 {
        self.values[self.values.len() - 1] - self.values[0]
    }
}

fn wrap(p: f64) -> f64 {
    let q = (p + PI).rem_euclid(2.0 * PI) - PI;
    if q == -PI {
        PI
    } else {
        q
    }
}

/// Continuous argument of sampled `f`, jumping by `pi m` across each real
/// zero of multiplicity `m` listed in `real_zeros` (non-real points of the
/// sequence are ignored).
pub fn argument_branch(
    f: &SampledFunction<Complex64>,
    real_zeros: &ZeroSequence,
) -> Result<ArgumentBranch> {
    let grid = f.grid();
    let vals = f.values();
    if let Some(i) = vals.iter().position(|v| v.norm() == 0.0 || !v.norm().is_finite()) {
        return Err(Error::InvalidInput(format!(
            "f vanishes or is not finite at grid point {}",
            grid[i]
        )));
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut ledger = Vec::new();
    values.push(vals[0].arg());
    for i in 0..grid.len() - 1 {
        let (a, b) = (grid[i], grid[i + 1]);
        let mut m = 0u32;
        for p in real_zeros.enumerate(a, b) {
            if p.value.im != 0.0 {
                continue;
            }
            if p.value.re == a || p.value.re == b {
                return Err(Error::InvalidInput(format!(
                    "real zero {} coincides with a grid point",
                    p.value.re
                )));
            }
            m += p.multiplicity;
            ledger.push((p.value.re, p.multiplicity));
        }
        let raw = vals[i + 1].arg() - vals[i].arg();
        let jump = PI * m as f64;
        let w = wrap(raw - jump);
        if w.abs() >= PI / 2.0 {
            return Err(Error::UnwrapAmbiguity(a, b));
        }
        values.push(values[i] + jump + w);
    }
    Ok(ArgumentBranch {
        base_points: grid.to_vec(),
        values,
        zero_ledger: ledger,
    })
}

/// The function whose boundary argument is being represented.
pub struct ArgumInput<'a> {
    /// Values of `f` on the real line.
    pub f: &'a (dyn Fn(f64) -> Complex64 + Sync),
    /// Real zeros of `f` with multiplicity; all other zeros must lie in the
    /// open upper half-plane.
    pub real_zeros: ZeroSequence,
    /// The caller's declaration that the conjugate indicator diagram of `f`
    /// is `[-pi, pi]`; it cannot be checked numerically and is only echoed.
    pub indicator_diagram_declared: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArgumConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub step: f64,
    /// `log|f|` is integrated over `[-u_half_width, u_half_width]` with a
    /// constant tail fitted on the outer 10%.
    pub u_half_width: f64,
    /// Grid points within `exclusion_steps * step` of a real zero are skipped.
    pub exclusion_steps: f64,
    /// Half-width of the interval removed from the `log|f|` integral around
    /// each real zero.
    pub log_excision: f64,
    pub pv: PvConfig,
}

impl Default for ArgumConfig {
    fn default() -> Self {
        Self {
            x_min: -20.0,
            x_max: 20.0,
            step: 0.05,
            u_half_width: 200.0,
            exclusion_steps: 2.0,
            log_excision: 1e-9,
            pv: PvConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArgumPoint {
    pub x: f64,
    pub arg: f64,
    pub conjugate: f64,
    /// `arg f(x) - pi x + u~(x)` with `u = log|f|`.
    pub combination: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgumReport {
    pub constant: f64,
    pub deviation: f64,
    pub points: Vec<ArgumPoint>,
    pub excluded_points: usize,
    pub excised_mass_fraction: f64,
    pub tail: TailModel,
    pub max_quadrature_error: f64,
    pub indicator_diagram_declared: bool,
}

struct LogModulus<'a> {
    f: &'a (dyn Fn(f64) -> Complex64 + Sync),
    half_width: f64,
    excisions: Vec<(f64, f64)>,
    tail: TailModel,
}

impl LogModulus<'_> {
    fn raw(&self, t: f64) -> f64 {
        (self.f)(t).norm().ln()
    }
}

impl BoundaryFunction for LogModulus<'_> {
    fn eval(&self, t: f64) -> f64 {
        if self.excisions.iter().any(|&(a, b)| t > a && t < b) {
            return 0.0;
        }
        self.raw(t)
    }

    fn domain(&self) -> (f64, f64) {
        (-self.half_width, self.half_width)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.excisions.iter().flat_map(|&(a, b)| [a, b]).collect()
    }

    fn singular_points(&self) -> Vec<f64> {
        self.breakpoints()
    }

    fn tail(&self) -> Option<TailModel> {
        Some(self.tail)
    }
}

/// Checks that `arg f(x) - pi x + u~(x)` is constant, with `u = log|f|`
/// (equal to `log|g|` on the line for `g(z) = e^{i pi z} conj(f(conj z))`).
///
/// Reports the largest deviation from the median over the grid.
pub fn verify_argum_representation(input: &ArgumInput<'_>, cfg: &ArgumConfig) -> Result<ArgumReport> {
    if !(cfg.step > 0.0) || !(cfg.x_max > cfg.x_min) {
        return Err(Error::InvalidInput("empty or unordered argument grid".into()));
    }
    let w = cfg.u_half_width;
    if !(w > cfg.x_max.abs().max(cfg.x_min.abs())) {
        return Err(Error::InvalidInput("u_half_width must exceed the grid range".into()));
    }
    let zeros: Vec<(f64, u32)> = input
        .real_zeros
        .enumerate(-w, w)
        .into_iter()
        .filter(|p| p.value.im == 0.0)
        .map(|p| (p.value.re, p.multiplicity))
        .collect();
    let excisions: Vec<(f64, f64)> = zeros
        .iter()
        .map(|&(z, _)| (z - cfg.log_excision, z + cfg.log_excision))
        .collect();

    // Constant tail: mean of log|f| over the outer 10% on each side.
    let outer_mean = |a: f64, b: f64| -> f64 {
        let n = 4000;
        let mut acc = 0.0;
        let mut cnt = 0;
        for k in 0..n {
            let t = a + (b - a) * (k as f64 + 0.5) / n as f64;
            if excisions.iter().any(|&(p, q)| t > p - 1e-3 && t < q + 1e-3) {
                continue;
            }
            acc += (input.f)(t).norm().ln();
            cnt += 1;
        }
        acc / cnt.max(1) as f64
    };
    let tail = TailModel {
        exponent: 0.0,
        left: outer_mean(-w, -0.9 * w),
        right: outer_mean(0.9 * w, w),
    };
    let u = LogModulus {
        f: input.f,
        half_width: w,
        excisions,
        tail,
    };

    // Poisson mass removed by the excisions.
    let excised: f64 = u
        .excisions
        .iter()
        .map(|&(a, b)| {
            let g = |t: f64| u.raw(t).abs() / (1.0 + t * t);
            let m = 0.5 * (a + b);
            // log singularity at the midpoint: grade toward it from both sides
            (0..60)
                .map(|k| {
                    let e1 = (b - m) * 2f64.powi(-k);
                    let e2 = e1 / 2.0;
                    gl8().integrate(m - e1, m - e2, g) + gl8().integrate(m + e2, m + e1, g)
                })
                .sum::<f64>()
        })
        .sum();
    let total = poisson_l1(&u, &cfg.pv) + excised;
    let excised_mass_fraction = if total > 0.0 { excised / total } else { 0.0 };
    if excised_mass_fraction > 0.01 {
        return Err(Error::ExcisionTooWide(excised_mass_fraction));
    }

    let n = ((cfg.x_max - cfg.x_min) / cfg.step + 1e-9).floor() as usize + 1;
    let radius = cfg.exclusion_steps * cfg.step;
    let all: Vec<f64> = (0..n).map(|k| cfg.x_min + k as f64 * cfg.step).collect();
    let kept: Vec<f64> = all
        .iter()
        .copied()
        .filter(|x| zeros.iter().all(|&(z, _)| (x - z).abs() > radius))
        .collect();
    if kept.len() < 2 {
        return Err(Error::InvalidInput("every grid point is excluded".into()));
    }
    let fvals = SampledFunction::from_fn(kept.clone(), |x| (input.f)(x))?;
    let branch = argument_branch(&fvals, &input.real_zeros)?;
    let conj: Vec<ConjugateValue> = kept
        .par_iter()
        .map(|&x| conjugate_function(&u, x, &cfg.pv))
        .collect::<Result<_>>()?;

    let points: Vec<ArgumPoint> = kept
        .iter()
        .zip(&branch.values)
        .zip(&conj)
        .map(|((&x, &arg), c)| ArgumPoint {
            x,
            arg,
            conjugate: c.value,
            combination: arg - PI * x + c.value,
        })
        .collect();
    let mut sorted: Vec<f64> = points.iter().map(|p| p.combination).collect();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let constant = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    let deviation = points
        .iter()
        .map(|p| (p.combination - constant).abs())
        .fold(0.0, f64::max);
    Ok(ArgumReport {
        constant,
        deviation,
        excluded_points: n - kept.len(),
        points,
        excised_mass_fraction,
        tail,
        max_quadrature_error: conj.iter().map(|c| c.error_estimate).fold(0.0, f64::max),
        indicator_diagram_declared: input.indicator_diagram_declared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KolmogorovConfig {
    /// Midpoints of a uniform grid in `theta`, `x = tan(theta)`.
    pub theta_points: usize,
    pub pv: PvConfig,
}

impl Default for KolmogorovConfig {
    fn default() -> Self {
        Self {
            theta_points: 400,
            pv: PvConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KolmogorovRow {
    pub a: f64,
    /// Measure of `{|u~| > A}` with respect to `dx / (1 + x^2)`.
    pub measure: f64,
    /// `measure / ((1/A) ∫ |u| / (1 + x^2))`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KolmogorovTable {
    pub rows: Vec<KolmogorovRow>,
    pub c_hat: f64,
    pub poisson_l1: f64,
    /// Poisson mass of the theta cells where `u~` could not be evaluated
    /// (outside the domain or on a breakpoint).
    pub uncovered_mass: f64,
}

/// Empirical weak-type constant for the conjugate function.
pub fn kolmogorov_weak_check(
    u: &(impl BoundaryFunction + ?Sized),
    a_sweep: &[f64],
    cfg: &KolmogorovConfig,
) -> Result<KolmogorovTable> {
    if cfg.theta_points == 0 || a_sweep.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::InvalidInput("need theta points and positive levels".into()));
    }
    let d_theta = PI / cfg.theta_points as f64;
    let values: Vec<Option<f64>> = (0..cfg.theta_points)
        .into_par_iter()
        .map(|j| {
            let theta = -PI / 2.0 + (j as f64 + 0.5) * d_theta;
            match conjugate_function(u, theta.tan(), &cfg.pv) {
                Ok(v) => Ok(Some(v.value)),
                Err(Error::SingularityOnGridEdge(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let uncovered_mass = values.iter().filter(|v| v.is_none()).count() as f64 * d_theta;
    let l1 = poisson_l1(u, &cfg.pv);
    let rows: Vec<KolmogorovRow> = a_sweep
        .iter()
        .map(|&a| {
            let measure =
                values.iter().flatten().filter(|v| v.abs() > a).count() as f64 * d_theta;
            let ratio = if measure == 0.0 { 0.0 } else { measure * a / l1 };
            KolmogorovRow { a, measure, ratio }
        })
        .collect();
    let c_hat = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(KolmogorovTable {
        rows,
        c_hat,
        poisson_l1: l1,
        uncovered_mass,
    })
}
