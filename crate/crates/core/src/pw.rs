//! The Paley–Wiener space `PW_pi` in sampling coordinates.
//!
//! An element is stored by its integer samples `h(n)`, which are its
//! coordinates in the orthonormal basis `{k_n}`; inner products are plain
//! sums and the only approximation is the window `|n| <= N`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{eval_product, eval_sinc_kernel, product_derivative_at_zero, ProductSpec};
use crate::counterexample::{eval_g_lambda, g_lambda_derivative_at};
use crate::error::{Error, Result};
use crate::linalg::{pivoted_qr_residual, CMatrix};
use crate::precision::PrecisionConfig;
use crate::quad::gl8;
use crate::radius::truncate_by_modulus;
use crate::sequences::{upper_density_estimate, DensityScan, ZeroSequence};

/// `|a_n| <= constant * |n|^(-exponent)` for `|n|` beyond the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayModel {
    pub constant: f64,
    pub exponent: f64,
}

/// `2 sum_{n > n0} n^(-q) <= 2 n0^(1-q) / (q - 1)`.
fn two_sided_tail(n0: f64, q: f64) -> f64 {
    if q <= 1.0 {
        f64::INFINITY
    } else {
        2.0 * n0.powf(1.0 - q) / (q - 1.0)
    }
}

/// `h = sum_{|n| <= N} a_n k_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardinalSeries {
    window: i64,
    coefficients: Vec<Complex64>,
    decay: Option<DecayModel>,
}

impl CardinalSeries {
    /// `coefficients[i]` is `a_{i - N}`.
    pub fn new(window: i64, coefficients: Vec<Complex64>) -> Result<Self> {
        if window < 0 || coefficients.len() as i64 != 2 * window + 1 {
            return Err(Error::InvalidInput(format!(
                "window {window} needs {} coefficients, got {}",
                2 * window.max(0) + 1,
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self {
            window,
            coefficients,
            decay: None,
        })
    }

    pub fn from_fn(window: i64, f: impl Fn(i64) -> Complex64) -> Self {
        let window = window.max(0);
        Self {
            window,
            coefficients: (-window..=window).map(f).collect(),
            decay: None,
        }
    }

    /// Samples of `k_lambda`, with the decay model
    /// `|k_lambda(n)| <= cosh(pi Im λ) / (pi (1 - |λ|/(N+1))) |n|^(-1)`.
    pub fn kernel(lambda: Complex64, window: i64, cfg: &PrecisionConfig) -> Result<Self> {
        if lambda.norm() >= (window + 1) as f64 {
            return Err(Error::WindowTooSmall {
                lambda: lambda.norm(),
                window,
            });
        }
        let coefficients = (-window..=window)
            .map(|n| eval_sinc_kernel(lambda, Complex64::new(n as f64, 0.0), cfg))
            .collect();
        let constant = (std::f64::consts::PI * lambda.im).cosh()
            / (std::f64::consts::PI * (1.0 - lambda.norm() / (window + 1) as f64));
        Ok(Self {
            window,
            coefficients,
            decay: Some(DecayModel {
                constant,
                exponent: 1.0,
            }),
        })
    }

    pub fn with_decay(mut self, model: DecayModel) -> Self {
        self.decay = Some(model);
        self
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    pub fn decay(&self) -> Option<DecayModel> {
        self.decay
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `a_n`, or `None` outside the window.
    pub fn coefficient(&self, n: i64) -> Option<Complex64> {
        (n.abs() <= self.window).then(|| self.coefficients[(n + self.window) as usize])
    }

    /// Restriction to a smaller window; the decay model is kept.
    pub fn restrict(&self, window: i64) -> Result<Self> {
        if window > self.window || window < 0 {
            return Err(Error::InvalidInput(format!(
                "cannot restrict window {} to {window}",
                self.window
            )));
        }
        let off = (self.window - window) as usize;
        Ok(Self {
            window,
            coefficients: self.coefficients[off..off + (2 * window + 1) as usize].to_vec(),
            decay: self.decay,
        })
    }

    /// `sum_n a_n k_n(z)`; at an integer inside the window this is exactly
    /// `a_m`.
    pub fn eval(&self, z: Complex64, cfg: &PrecisionConfig) -> Complex64 {
        if z.im == 0.0 && z.re == z.re.round() {
            if let Some(a) = self.coefficient(z.re as i64) {
                return a;
            }
        }
        (-self.window..=self.window)
            .zip(&self.coefficients)
            .map(|(n, a)| a * eval_sinc_kernel(Complex64::new(n as f64, 0.0), z, cfg))
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerProduct {
    pub value: Complex64,
    /// Bound on the contribution of the indices not summed.
    pub tail_bound: f64,
    /// False when the tail beyond a common window was taken as zero because
    /// a series carries no decay model.
    pub tail_modeled: bool,
}

/// `sum_n f(n) conj(g(n))`, the `L^2(R)` inner product of the two functions.
///
/// Over the common window the sum is exact. Where only one series is known
/// the other is bounded by its decay model; beyond both windows the two
/// models are multiplied. A series without a model is unknown beyond its
/// window, so differing windows then fail with [`Error::TailUnbounded`]; for
/// equal windows the tail is reported as unmodeled and not bounded.
pub fn inner_product(f: &CardinalSeries, g: &CardinalSeries) -> Result<InnerProduct> {
    let (small, big) = if f.window <= g.window { (f, g) } else { (g, f) };
    let m = small.window;
    let mut value = Complex64::new(0.0, 0.0);
    for n in -m..=m {
        let (a, b) = (f.coefficient(n).unwrap(), g.coefficient(n).unwrap());
        value += a * b.conj();
    }
    let mut tail_bound = 0.0;
    if big.window > m {
        let ds = small.decay.ok_or(Error::TailUnbounded)?;
        for n in (m + 1)..=big.window {
            let bound = ds.constant * (n as f64).powf(-ds.exponent);
            tail_bound += (big.coefficient(n).unwrap().norm() + big.coefficient(-n).unwrap().norm()) * bound;
        }
        // Beyond the big window both sides are only known by their models.
        if let Some(db) = big.decay {
            tail_bound += ds.constant * db.constant * two_sided_tail(big.window as f64, ds.exponent + db.exponent);
        }
    }
    let tail_modeled = match (small.decay, big.decay) {
        (Some(a), Some(b)) => {
            if big.window == m {
                tail_bound += a.constant * b.constant * two_sided_tail(m as f64, a.exponent + b.exponent);
            }
            true
        }
        _ => false,
    };
    Ok(InnerProduct {
        value,
        tail_bound,
        tail_modeled,
    })
}

/// Composite Gauss–Legendre grid for [`quadrature_inner_product`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub half_width: f64,
    pub panel_width: f64,
    /// Decay of `|f conj(g)|` beyond `half_width`.
    pub integrand_decay: DecayModel,
    pub tolerance: f64,
}

impl QuadratureGrid {
    /// Grid for a product of two kernels: `|k_a k_b| <= C |x|^(-2)` far out.
    pub fn for_kernels(half_width: f64, a: Complex64, b: Complex64) -> Self {
        let pi = std::f64::consts::PI;
        let ca = (pi * a.im).cosh() / (pi * (1.0 - a.norm() / half_width));
        let cb = (pi * b.im).cosh() / (pi * (1.0 - b.norm() / half_width));
        Self {
            half_width,
            panel_width: 0.5,
            integrand_decay: DecayModel {
                constant: ca * cb,
                exponent: 2.0,
            },
            tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureValue {
    pub value: Complex64,
    /// Tail bound plus the panel-halving difference.
    pub error_estimate: f64,
    pub tail_bound: f64,
}

/// `∫ f conj(g) dx` over `[-L, L]` by composite Gauss–Legendre, with the
/// tail bounded by the integrand's decay model.
pub fn quadrature_inner_product(
    f: &(dyn Fn(f64) -> Complex64 + Sync),
    g: &(dyn Fn(f64) -> Complex64 + Sync),
    grid: &QuadratureGrid,
) -> Result<QuadratureValue> {
    let l = grid.half_width;
    if !(l > 0.0) || !(grid.panel_width > 0.0) {
        return Err(Error::InvalidInput("grid needs positive widths".into()));
    }
    let d = grid.integrand_decay;
    let tail_bound = if d.exponent <= 1.0 {
        f64::INFINITY
    } else {
        2.0 * d.constant * l.powf(1.0 - d.exponent) / (d.exponent - 1.0)
    };
    if !(tail_bound <= grid.tolerance) {
        return Err(Error::SlowDecay {
            estimate: tail_bound,
            tolerance: grid.tolerance,
        });
    }
    let composite = |panels: usize| -> Complex64 {
        let h = 2.0 * l / panels as f64;
        (0..panels)
            .into_par_iter()
            .map(|i| {
                let a = -l + i as f64 * h;
                gl8().integrate(a, a + h, |x| f(x) * g(x).conj())
            })
            .sum()
    };
    let panels = ((2.0 * l / grid.panel_width).ceil() as usize).max(2);
    let fine = composite(panels);
    let coarse = composite(panels.div_ceil(2));
    Ok(QuadratureValue {
        value: fine,
        error_estimate: tail_bound + (fine - coarse).norm(),
        tail_bound,
    })
}

/// Generating function `G` of a mixed system; every `G` here is real on `R`
/// with simple zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratingFunction {
    /// `sin(pi z)`.
    Sine,
    /// `sin(pi z) / (U(z) V(z))` from the lacunary construction.
    SectionFour,
    Canonical(ProductSpec),
}

fn as_integer(z: Complex64) -> Option<i64> {
    (z.im == 0.0 && z.re == z.re.round() && z.re.abs() < 9e15).then_some(z.re as i64)
}

impl GeneratingFunction {
    pub fn is_zero(&self, lambda: Complex64) -> bool {
        match self {
            GeneratingFunction::Sine => as_integer(lambda).is_some(),
            GeneratingFunction::SectionFour => {
                as_integer(lambda).is_some_and(|n| n <= 0 || {
                    let x = n as f64;
                    crate::analytic::ZeroRule::Squares.index_of(x).is_none()
                        && crate::analytic::ZeroRule::Lacunary.index_of(x).is_none()
                })
            }
            GeneratingFunction::Canonical(spec) => lambda.im == 0.0 && spec.rule.index_of(lambda.re).is_some(),
        }
    }

    /// `G(n)` at an integer, exactly zero on the zero set.
    pub fn sample(&self, n: i64, cfg: &PrecisionConfig) -> Result<Complex64> {
        let z = Complex64::new(n as f64, 0.0);
        match self {
            GeneratingFunction::Sine => Ok(Complex64::new(0.0, 0.0)),
            GeneratingFunction::SectionFour => eval_g_lambda(z, cfg)?.to_complex_flush(),
            GeneratingFunction::Canonical(spec) => eval_product(spec, z, cfg)?.to_complex_flush(),
        }
    }

    /// `G'(λ)` at a zero.
    pub fn derivative_at_zero(&self, lambda: Complex64, cfg: &PrecisionConfig) -> Result<Complex64> {
        if !self.is_zero(lambda) {
            return Err(Error::NotAZero(lambda.re));
        }
        match self {
            GeneratingFunction::Sine => {
                let n = as_integer(lambda).unwrap();
                let s = if n % 2 == 0 { 1.0 } else { -1.0 };
                Ok(Complex64::new(s * std::f64::consts::PI, 0.0))
            }
            GeneratingFunction::SectionFour => {
                g_lambda_derivative_at(as_integer(lambda).unwrap(), cfg)?.to_complex_flush()
            }
            GeneratingFunction::Canonical(spec) => {
                let j = spec.rule.index_of(lambda.re).unwrap();
                product_derivative_at_zero(&spec.rule, j, cfg)?.to_complex_flush()
            }
        }
    }
}

/// `{k_λ : λ ∈ Λ2} ∪ {G(z)/(z - λ) : λ ∈ Λ1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedSystemSpec {
    pub g: GeneratingFunction,
    pub lambda1: ZeroSequence,
    pub lambda2: ZeroSequence,
}

impl MixedSystemSpec {
    /// Finite sequences are validated here; generated ones when columns are
    /// selected.
    pub fn new(g: GeneratingFunction, lambda1: ZeroSequence, lambda2: ZeroSequence) -> Result<Self> {
        let spec = Self { g, lambda1, lambda2 };
        for seq in [&spec.lambda1, &spec.lambda2] {
            if seq.is_finite() {
                for p in seq.enumerate(f64::NEG_INFINITY, f64::INFINITY) {
                    spec.check_point(p.value, p.multiplicity)?;
                }
            }
        }
        if spec.lambda1.is_finite() && spec.lambda2.is_finite() {
            let l2 = spec.lambda2.enumerate(f64::NEG_INFINITY, f64::INFINITY);
            if let Some(p) = spec
                .lambda1
                .enumerate(f64::NEG_INFINITY, f64::INFINITY)
                .into_iter()
                .find(|p| l2.iter().any(|q| q.value == p.value))
            {
                return Err(Error::InvalidInput(format!("{} lies in both Λ1 and Λ2", p.value)));
            }
        }
        Ok(spec)
    }

    fn check_point(&self, lambda: Complex64, multiplicity: u32) -> Result<()> {
        if multiplicity > 1 {
            return Err(Error::InvalidInput(format!(
                "{lambda} repeated but G has simple zeros"
            )));
        }
        if !self.g.is_zero(lambda) {
            return Err(Error::NotAZero(lambda.re));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    /// `k_λ`, `λ ∈ Λ2`.
    Kernel,
    /// `G(z) / (z - λ)`, `λ ∈ Λ1`.
    DividedDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnLabel {
    pub lambda: Complex64,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedSystemMatrix {
    pub window: i64,
    pub labels: Vec<ColumnLabel>,
    /// Row `i` is the sample at `n = i - window`.
    pub matrix: CMatrix,
}

/// The first `m` points of `Λ1 ∪ Λ2` by modulus, negative real part first
/// on ties.
pub fn select_columns(spec: &MixedSystemSpec, m: usize) -> Result<Vec<ColumnLabel>> {
    let tag = |seq: &ZeroSequence, kind| -> Result<Vec<ColumnLabel>> {
        Ok(truncate_by_modulus(seq, m)?
            .into_iter()
            .map(|lambda| ColumnLabel { lambda, kind })
            .collect())
    };
    let mut all = tag(&spec.lambda1, ColumnKind::DividedDifference)?;
    all.extend(tag(&spec.lambda2, ColumnKind::Kernel)?);
    all.sort_by(|a, b| {
        let (x, y) = (a.lambda, b.lambda);
        x.norm()
            .total_cmp(&y.norm())
            .then(x.re.total_cmp(&y.re))
            .then(x.im.total_cmp(&y.im))
    });
    if all.len() < m {
        return Err(Error::InvalidInput(format!(
            "system has only {} columns, {m} requested",
            all.len()
        )));
    }
    all.truncate(m);
    for w in all.windows(2) {
        if w[0].lambda == w[1].lambda {
            return Err(Error::InvalidInput(format!(
                "{} selected twice: Λ1 and Λ2 must be disjoint and simple",
                w[0].lambda
            )));
        }
    }
    for c in &all {
        if !spec.g.is_zero(c.lambda) {
            return Err(Error::NotAZero(c.lambda.re));
        }
    }
    Ok(all)
}

/// Samples of `G` at `|n| <= window`, computed once per matrix.
fn g_samples(g: &GeneratingFunction, window: i64, cfg: &PrecisionConfig) -> Result<Vec<Complex64>> {
    (-window..=window)
        .into_par_iter()
        .map(|n| g.sample(n, cfg))
        .collect()
}

/// Integer samples of the first `m` columns of the mixed system.
pub fn mixed_system_matrix(
    spec: &MixedSystemSpec,
    m: usize,
    window: i64,
    cfg: &PrecisionConfig,
) -> Result<MixedSystemMatrix> {
    let labels = select_columns(spec, m)?;
    if let Some(c) = labels.iter().find(|c| c.lambda.norm() > window as f64) {
        return Err(Error::WindowTooSmall {
            lambda: c.lambda.norm(),
            window,
        });
    }
    let needs_g = labels.iter().any(|c| c.kind == ColumnKind::DividedDifference);
    let gs = if needs_g {
        g_samples(&spec.g, window, cfg)?
    } else {
        Vec::new()
    };
    let columns: Vec<Vec<Complex64>> = labels
        .par_iter()
        .map(|c| -> Result<Vec<Complex64>> {
            match c.kind {
                ColumnKind::Kernel => Ok((-window..=window)
                    .map(|n| eval_sinc_kernel(c.lambda, Complex64::new(n as f64, 0.0), cfg))
                    .collect()),
                ColumnKind::DividedDifference => {
                    let at = as_integer(c.lambda);
                    let dg = if at.is_some() {
                        Some(spec.g.derivative_at_zero(c.lambda, cfg)?)
                    } else {
                        None
                    };
                    Ok((-window..=window)
                        .zip(&gs)
                        .map(|(n, &gn)| match (at, dg) {
                            (Some(l), Some(d)) if l == n => d,
                            _ => gn / (Complex64::new(n as f64, 0.0) - c.lambda),
                        })
                        .collect())
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(MixedSystemMatrix {
        window,
        labels,
        matrix: CMatrix::from_columns(&columns),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PwConfig {
    pub precision: PrecisionConfig,
    /// Relative pivot threshold of the rank-revealing QR.
    pub rank_tol: f64,
}

impl Default for PwConfig {
    fn default() -> Self {
        Self {
            precision: PrecisionConfig::double(),
            rank_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub m: usize,
    pub window: i64,
    /// `dist(target, span)^2 / ||target||^2` in window coordinates.
    pub residual: f64,
    pub rank: usize,
    pub condition_estimate: f64,
}

/// Squared relative distance from `target` to the span of `matrix`.
pub fn residual_of_columns(matrix: &CMatrix, target: &[Complex64], rank_tol: f64) -> (f64, usize, f64) {
    if matrix.cols() == 0 {
        let t: f64 = target.iter().map(|z| z.norm_sqr()).sum();
        return (if t == 0.0 { 0.0 } else { 1.0 }, 0, 1.0);
    }
    let ls = pivoted_qr_residual(matrix, target, rank_tol);
    (ls.relative_residual(), ls.rank, ls.condition_estimate())
}

/// Distance from `target` to the first `m` columns, in the coordinates of
/// the window `|n| <= window`.
pub fn completeness_residual(
    spec: &MixedSystemSpec,
    target: &CardinalSeries,
    m: usize,
    window: i64,
    cfg: &PwConfig,
) -> Result<ResidualPoint> {
    let t = target.restrict(window)?;
    let (residual, rank, condition_estimate) = if m == 0 {
        residual_of_columns(&CMatrix::zeros(t.coefficients().len(), 0), t.coefficients(), cfg.rank_tol)
    } else {
        let mat = mixed_system_matrix(spec, m, window, &cfg.precision)?;
        residual_of_columns(&mat.matrix, t.coefficients(), cfg.rank_tol)
    };
    Ok(ResidualPoint {
        m,
        window,
        residual,
        rank,
        condition_estimate,
    })
}

/// A target for residual experiments, materialized per window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Kernel(Complex64),
    Series(CardinalSeries),
}

impl Default for Target {
    fn default() -> Self {
        Target::Kernel(Complex64::new(0.37, 0.0))
    }
}

impl Target {
    pub fn series(&self, window: i64, cfg: &PrecisionConfig) -> Result<CardinalSeries> {
        match self {
            Target::Kernel(g) => CardinalSeries::kernel(*g, window, cfg),
            Target::Series(s) => s.restrict(window),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Target::Kernel(g) if g.im == 0.0 => format!("kernel:{}", g.re),
            Target::Kernel(g) => format!("kernel:{}{:+}i", g.re, g.im),
            Target::Series(s) => format!("series:N={}", s.window()),
        }
    }
}

/// Residuals over every `(m, window)` pair, in parallel.
pub fn residual_curve(
    spec: &MixedSystemSpec,
    target: &Target,
    ms: &[usize],
    windows: &[i64],
    cfg: &PwConfig,
) -> Result<Vec<ResidualPoint>> {
    let pairs: Vec<(usize, i64)> = windows
        .iter()
        .flat_map(|&w| ms.iter().map(move |&m| (m, w)))
        .collect();
    pairs
        .par_iter()
        .map(|&(m, w)| completeness_residual(spec, &target.series(w, &cfg.precision)?, m, w, cfg))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub label: String,
    pub lambda1: ZeroSequence,
    pub lambda2: ZeroSequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub partition: String,
    pub target: String,
    /// Windowed upper density estimate of `Λ2`, window length `window / 4`.
    pub lambda2_density: f64,
    pub curve: Vec<ResidualPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub window: i64,
    pub rows: Vec<SweepRow>,
}

/// Residual curves for several partitions of the zero set of `G`, side by
/// side with the density of `Λ2`. Exploratory: nothing is asserted.
pub fn density_transition_sweep(
    g: &GeneratingFunction,
    partitions: &[Partition],
    targets: &[Target],
    ms: &[usize],
    window: i64,
    cfg: &PwConfig,
) -> Result<SweepReport> {
    let mut rows = Vec::new();
    for p in partitions {
        let spec = MixedSystemSpec::new(g.clone(), p.lambda1.clone(), p.lambda2.clone())?;
        let r = (window as f64 / 4.0).max(1.0);
        let lambda2_density = if p.lambda2.count_in(-(window as f64), window as f64, true) == 0 {
            0.0
        } else {
            upper_density_estimate(&p.lambda2, r, &DensityScan::new(-(window as f64), window as f64 - r))?.value
        };
        for t in targets {
            let curve = residual_curve(&spec, t, ms, &[window], cfg)?;
            rows.push(SweepRow {
                partition: p.label.clone(),
                target: t.label(),
                lambda2_density,
                curve,
            });
        }
    }
    Ok(SweepReport { window, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::Generator;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dbl() -> PrecisionConfig {
        PrecisionConfig::double()
    }

    fn integers(lo: i64, hi: i64, skip: &[i64]) -> ZeroSequence {
        let v: Vec<f64> = (lo..=hi).filter(|n| !skip.contains(n)).map(|n| n as f64).collect();
        ZeroSequence::from_reals(&v).unwrap()
    }

    fn empty() -> ZeroSequence {
        ZeroSequence::from_reals(&[]).unwrap()
    }

    #[test]
    fn kernel_orthonormality_is_exact() {
        let k0 = CardinalSeries::kernel(c(0.0, 0.0), 50, &dbl()).unwrap();
        let k1 = CardinalSeries::kernel(c(1.0, 0.0), 50, &dbl()).unwrap();
        assert_eq!(inner_product(&k0, &k0).unwrap().value, c(1.0, 0.0));
        assert_eq!(inner_product(&k0, &k1).unwrap().value, c(0.0, 0.0));
    }

    #[test]
    fn half_integer_kernel_has_unit_norm() {
        // sum_n sinc^2(n - 1/2) = (4/pi^2) sum_n 1/(2n-1)^2 = 1
        let n = 20_000;
        let k = CardinalSeries::kernel(c(0.5, 0.0), n, &dbl()).unwrap();
        let ip = inner_product(&k, &k).unwrap();
        let oracle: f64 = (-n..=n)
            .map(|j| {
                let d = j as f64 - 0.5;
                (4.0 / (PI * PI)) / (4.0 * d * d)
            })
            .sum();
        assert!((ip.value.re - oracle).abs() < 1e-12);
        assert!((ip.value.re - 1.0).abs() <= ip.tail_bound);
        assert!(ip.tail_bound < 1e-4);
    }

    #[test]
    fn differing_windows_need_a_model() {
        let a = CardinalSeries::from_fn(3, |_| c(1.0, 0.0));
        let b = CardinalSeries::from_fn(5, |_| c(1.0, 0.0));
        assert_eq!(inner_product(&a, &b), Err(Error::TailUnbounded));
        let a = a.with_decay(DecayModel {
            constant: 1.0,
            exponent: 2.0,
        });
        assert!(inner_product(&a, &b).unwrap().tail_bound > 0.0);
        let same = inner_product(&b, &b).unwrap();
        assert_eq!(same.value, c(11.0, 0.0));
        assert!(!same.tail_modeled);
    }

    #[test]
    fn reproducing_property() {
        // <f, k_λ> = f(λ) for f = k_0.2 + 2i k_{-3}.
        let cfg = dbl();
        let n = 4000;
        let f = CardinalSeries::from_fn(n, |j| {
            let z = c(j as f64, 0.0);
            eval_sinc_kernel(c(0.2, 0.0), z, &cfg) + c(0.0, 2.0) * eval_sinc_kernel(c(-3.0, 0.0), z, &cfg)
        })
        .with_decay(DecayModel {
            constant: 3.0 / PI * 1.01,
            exponent: 1.0,
        });
        for lam in [c(0.7, 0.0), c(-1.3, 0.5), c(2.0, 0.0)] {
            let k = CardinalSeries::kernel(lam, n, &cfg).unwrap();
            let ip = inner_product(&f, &k).unwrap();
            let direct = eval_sinc_kernel(c(0.2, 0.0), lam, &cfg) + c(0.0, 2.0) * eval_sinc_kernel(c(-3.0, 0.0), lam, &cfg);
            assert!((ip.value - direct).norm() <= ip.tail_bound, "{lam}");
            assert!((f.eval(lam, &cfg) - direct).norm() < 1e-3);
        }
        assert_eq!(f.eval(c(-3.0, 0.0), &cfg), f.coefficient(-3).unwrap());
    }

    #[test]
    fn quadrature_agrees_with_sampling() {
        let cfg = dbl();
        let grid = QuadratureGrid::for_kernels(2000.0, c(0.0, 0.0), c(3.0, 0.0));
        let k0 = |x: f64| eval_sinc_kernel(c(0.0, 0.0), c(x, 0.0), &cfg);
        let k3 = |x: f64| eval_sinc_kernel(c(3.0, 0.0), c(x, 0.0), &cfg);
        let q = quadrature_inner_product(&k0, &k0, &grid).unwrap();
        assert!((q.value.re - 1.0).abs() < 1e-3 && q.error_estimate < 1e-3);
        let q = quadrature_inner_product(&k0, &k3, &grid).unwrap();
        assert!(q.value.norm() < 1e-3);
        let zero = |_: f64| c(0.0, 0.0);
        assert_eq!(quadrature_inner_product(&zero, &zero, &grid).unwrap().value, c(0.0, 0.0));
    }

    #[test]
    fn slow_decay_is_rejected() {
        let one = |_: f64| c(1.0, 0.0);
        let grid = QuadratureGrid {
            half_width: 100.0,
            panel_width: 0.5,
            integrand_decay: DecayModel {
                constant: 1.0,
                exponent: 1.0,
            },
            tolerance: 1e-3,
        };
        assert!(matches!(
            quadrature_inner_product(&one, &one, &grid),
            Err(Error::SlowDecay { .. })
        ));
    }

    #[test]
    fn sine_divided_difference_is_scaled_kernel() {
        // sin(pi z)/(z - n) = (-1)^n pi k_n(z)
        let spec = MixedSystemSpec::new(GeneratingFunction::Sine, integers(0, 0, &[]), empty()).unwrap();
        let mat = mixed_system_matrix(&spec, 1, 10, &dbl()).unwrap();
        for (i, v) in mat.matrix.col(0).iter().enumerate() {
            let n = i as i64 - 10;
            let expect = if n == 0 { PI } else { 0.0 };
            assert_eq!(*v, c(expect, 0.0));
        }
        let spec = MixedSystemSpec::new(GeneratingFunction::Sine, empty(), integers(5, 5, &[])).unwrap();
        let mat = mixed_system_matrix(&spec, 1, 10, &dbl()).unwrap();
        assert_eq!(mat.matrix.col(0)[15], c(1.0, 0.0));
        assert_eq!(mat.matrix.col(0).iter().filter(|v| v.norm() != 0.0).count(), 1);
    }

    #[test]
    fn section_four_divided_difference_at_its_zero() {
        // 2 ∈ Λ: the sample at n = 2 is G'(2) = pi / (U(2) V(2)).
        let cfg = PrecisionConfig::with_bits(128);
        let spec = MixedSystemSpec::new(GeneratingFunction::SectionFour, integers(2, 2, &[]), empty()).unwrap();
        let mat = mixed_system_matrix(&spec, 1, 20, &cfg).unwrap();
        let s2 = 2f64.sqrt();
        let u2 = (PI * s2).sin() / (PI * s2);
        let v2: f64 = (1..60).map(|k| 1.0 - 2.0 / (4f64.powi(k) + 1.0)).product();
        let got = mat.matrix.col(0)[22];
        assert!((got.re - PI / (u2 * v2)).abs() < 1e-12 * got.re.abs());
        // n = 1 is a sample G(1)/(1 - 2) = -2pi/V(1).
        let v1: f64 = (1..60).map(|k| 1.0 - 1.0 / (4f64.powi(k) + 1.0)).product();
        assert!((mat.matrix.col(0)[21].re + 2.0 * PI / v1).abs() < 1e-12);
        assert!(matches!(
            MixedSystemSpec::new(GeneratingFunction::SectionFour, integers(1, 1, &[]), empty()),
            Err(Error::NotAZero(_))
        ));
    }

    #[test]
    fn window_too_small() {
        let spec = MixedSystemSpec::new(GeneratingFunction::Sine, empty(), integers(-30, 30, &[])).unwrap();
        assert_eq!(
            mixed_system_matrix(&spec, 40, 10, &dbl()).unwrap_err(),
            Error::WindowTooSmall {
                lambda: 11.0,
                window: 10
            }
        );
    }

    #[test]
    fn residual_equals_sinc_tail() {
        let n = 40;
        let cfg = PwConfig::default();
        let spec = MixedSystemSpec::new(GeneratingFunction::Sine, empty(), integers(-n, n, &[])).unwrap();
        let t = CardinalSeries::kernel(c(0.37, 0.0), n, &cfg.precision).unwrap();
        let s2 = |x: f64| ((PI * x).sin() / (PI * x)).powi(2);
        let total: f64 = (-n..=n).map(|j| s2(j as f64 - 0.37)).sum();
        let mut prev = f64::INFINITY;
        for m in [1usize, 5, 11, 41, 81] {
            let r = completeness_residual(&spec, &t, m, n, &cfg).unwrap();
            // Columns are ordered 0, -1, 1, -2, 2, ...
            let k = (m as i64 - 1) / 2;
            let mut chosen: Vec<i64> = (-k..=k).collect();
            if m % 2 == 0 {
                chosen.push(-k - 1);
            }
            let tail: f64 = (-n..=n).filter(|j| !chosen.contains(j)).map(|j| s2(j as f64 - 0.37)).sum();
            assert!((r.residual - tail / total).abs() < 1e-13, "m = {m}");
            assert!(r.residual <= prev);
            prev = r.residual;
        }
        assert!(prev < 1e-20);
    }

    #[test]
    fn orthonormal_complement_and_rescaled_basis() {
        let n = 25;
        let cfg = PwConfig::default();
        let k0 = CardinalSeries::kernel(c(0.0, 0.0), n, &cfg.precision).unwrap();
        let spec = MixedSystemSpec::new(GeneratingFunction::Sine, empty(), integers(-n, n, &[0])).unwrap();
        for m in [1, 10, 50] {
            let r = completeness_residual(&spec, &k0, m, n, &cfg).unwrap();
            assert!((r.residual - 1.0).abs() < 1e-14);
        }
        let spec = MixedSystemSpec::new(GeneratingFunction::Sine, integers(-n, n, &[]), empty()).unwrap();
        assert!(completeness_residual(&spec, &k0, 1, n, &cfg).unwrap().residual < 1e-28);
    }

    #[test]
    fn sweep_records_every_partition() {
        let n = 30;
        let evens: Vec<f64> = (-n / 2..=n / 2).map(|k| 2.0 * k as f64).collect();
        let odds: Vec<f64> = (-n / 2..n / 2).map(|k| 2.0 * k as f64 + 1.0).collect();
        let parts = vec![
            Partition {
                label: "evens".into(),
                lambda1: empty(),
                lambda2: ZeroSequence::from_reals(&evens).unwrap(),
            },
            Partition {
                label: "mixed".into(),
                lambda1: ZeroSequence::from_reals(&odds).unwrap(),
                lambda2: ZeroSequence::from_reals(&evens).unwrap(),
            },
        ];
        let rep = density_transition_sweep(
            &GeneratingFunction::Sine,
            &parts,
            &[Target::default()],
            &[1, 5, 20],
            n,
            &PwConfig::default(),
        )
        .unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert!((rep.rows[0].lambda2_density - 0.5).abs() < 0.1);
        let c0 = &rep.rows[0].curve;
        assert!(c0.windows(2).all(|w| w[1].residual <= w[0].residual + 1e-15));
        let _ = Generator::Integers;
    }

    proptest! {
        #[test]
        fn kernel_inner_product_is_hermitian(a in -5.0f64..5.0, b in -5.0f64..5.0, ai in -0.5f64..0.5) {
            let cfg = dbl();
            let ka = CardinalSeries::kernel(c(a, ai), 200, &cfg).unwrap();
            let kb = CardinalSeries::kernel(c(b, 0.0), 200, &cfg).unwrap();
            let x = inner_product(&ka, &kb).unwrap().value;
            let y = inner_product(&kb, &ka).unwrap().value;
            prop_assert!((x - y.conj()).norm() < 1e-12);
        }

        #[test]
        fn residual_is_monotone_in_m(lam in -3.0f64..3.0) {
            let n = 15;
            let cfg = PwConfig::default();
            let evens: Vec<f64> = (-7..=7).map(|k| 2.0 * k as f64).collect();
            let spec = MixedSystemSpec::new(GeneratingFunction::Sine, empty(), ZeroSequence::from_reals(&evens).unwrap()).unwrap();
            let t = CardinalSeries::kernel(c(lam, 0.0), n, &cfg.precision).unwrap();
            let mut prev = f64::INFINITY;
            for m in 0..=15 {
                let r = completeness_residual(&spec, &t, m, n, &cfg).unwrap().residual;
                prop_assert!(r <= prev + 1e-14);
                prev = r;
            }
        }

        #[test]
        fn full_residual_is_permutation_invariant(
            perm in Just((0..13).collect::<Vec<usize>>()).prop_shuffle()
        ) {
            let n = 12;
            let cfg = PwConfig::default();
            let lam1: Vec<f64> = (-4..4).map(|k| 2.0 * k as f64 + 1.0).collect();
            let lam2 = [-6.0, -2.0, 0.0, 4.0, 8.0];
            let spec = MixedSystemSpec::new(
                GeneratingFunction::Sine,
                ZeroSequence::from_reals(&lam1).unwrap(),
                ZeroSequence::from_reals(&lam2).unwrap(),
            ).unwrap();
            let mat = mixed_system_matrix(&spec, 13, n, &cfg.precision).unwrap();
            let t = CardinalSeries::kernel(c(0.37, 0.0), n, &cfg.precision).unwrap();
            let (r0, _, _) = residual_of_columns(&mat.matrix, t.coefficients(), cfg.rank_tol);
            let cols: Vec<Vec<Complex64>> = perm.iter().map(|&j| mat.matrix.col(j).to_vec()).collect();
            let (r1, _, _) = residual_of_columns(&CMatrix::from_columns(&cols), t.coefficients(), cfg.rank_tol);
            prop_assert!((r0 - r1).abs() < 1e-12);
        }
    }
}
