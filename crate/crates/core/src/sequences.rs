//! Zero sequences, counting functions, density estimates and the
//! long-interval / Pólya-sequence machinery.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::SampledFunction;

/// Infinite sequences with a closed-form enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// All of `Z`.
    Integers,
    /// `2Z`.
    EvenIntegers,
    /// `n^2`, `n >= 1`.
    Squares,
    /// `4^n + 1`, `n >= 1`.
    Lacunary,
    /// `Z` minus the squares and the lacunary points `4^n + 1`; the zero set
    /// of `sin(pi z) / (U V)` in the lacunary construction.
    LambdaSectionFour,
}

/// A point with multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub value: Complex64,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Source {
    Finite(Vec<Point>),
    Generated(Generator),
}

/// A discrete multiset in the plane, ordered by real part.
///
/// Either a finite list of points (possibly complex) or one of the
/// [`Generator`] rules, optionally translated along the real axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSequence {
    source: Source,
    shift: f64,
}

// Largest magnitude handled by the closed-form counts; integers above this
// are no longer exact in f64 arithmetic.
const EXACT_LIMIT: f64 = 4.0e15;

fn isqrt_floor(t: f64) -> u64 {
    // floor(sqrt(t)) for 0 <= t < 2^53, corrected for rounding.
    if t < 1.0 {
        return 0;
    }
    let n = t.floor() as u64;
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

impl ZeroSequence {
    /// Finite sequence of real points; repeated values add multiplicity.
    pub fn from_reals(values: &[f64]) -> Result<Self> {
        Self::from_points(values.iter().map(|&x| Point {
            value: Complex64::new(x, 0.0),
            multiplicity: 1,
        }))
    }

    pub fn from_points(points: impl IntoIterator<Item = Point>) -> Result<Self> {
        let mut pts: Vec<Point> = points.into_iter().collect();
        for p in &pts {
            if !p.value.re.is_finite() || !p.value.im.is_finite() {
                return Err(Error::InvalidInput("sequence points must be finite".into()));
            }
            if p.multiplicity == 0 {
                return Err(Error::InvalidInput("multiplicities must be at least 1".into()));
            }
        }
        pts.sort_by(|a, b| {
            a.value
                .re
                .total_cmp(&b.value.re)
                .then(a.value.im.total_cmp(&b.value.im))
        });
        let mut merged: Vec<Point> = Vec::with_capacity(pts.len());
        for p in pts {
            match merged.last_mut() {
                Some(last) if last.value == p.value => last.multiplicity += p.multiplicity,
                _ => merged.push(p),
            }
        }
        Ok(Self {
            source: Source::Finite(merged),
            shift: 0.0,
        })
    }

    pub fn generated(generator: Generator) -> Self {
        Self {
            source: Source::Generated(generator),
            shift: 0.0,
        }
    }

    /// The sequence translated by `c` along the real axis.
    pub fn translate(&self, c: f64) -> Self {
        match &self.source {
            Source::Finite(pts) => Self {
                source: Source::Finite(
                    pts.iter()
                        .map(|p| Point {
                            value: p.value + c,
                            multiplicity: p.multiplicity,
                        })
                        .collect(),
                ),
                shift: 0.0,
            },
            Source::Generated(_) => Self {
                source: self.source.clone(),
                shift: self.shift + c,
            },
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.source, Source::Finite(_))
    }

    pub fn generator(&self) -> Option<Generator> {
        match self.source {
            Source::Generated(g) => Some(g),
            Source::Finite(_) => None,
        }
    }

    /// Smallest and largest real part, for finite sequences.
    pub fn real_extent(&self) -> Option<(f64, f64)> {
        match &self.source {
            Source::Finite(pts) => Some((pts.first()?.value.re, pts.last()?.value.re)),
            Source::Generated(_) => None,
        }
    }

    /// Points with real part in `[lo, hi]`, ordered by real part.
    pub fn enumerate(&self, lo: f64, hi: f64) -> Vec<Point> {
        if !(lo <= hi) {
            return Vec::new();
        }
        match &self.source {
            Source::Finite(pts) => pts
                .iter()
                .filter(|p| p.value.re >= lo && p.value.re <= hi)
                .copied()
                .collect(),
            Source::Generated(g) => {
                let (a, b) = (lo - self.shift, hi - self.shift);
                generated_points(*g, a, b)
                    .into_iter()
                    .map(|x| Point {
                        value: Complex64::new(x + self.shift, 0.0),
                        multiplicity: 1,
                    })
                    .collect()
            }
        }
    }

    /// Real parts in `[lo, hi]` with multiplicity expanded, sorted.
    pub fn real_parts(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for p in self.enumerate(lo, hi) {
            for _ in 0..p.multiplicity {
                out.push(p.value.re);
            }
        }
        out
    }

    /// Number of points (with multiplicity) whose real part lies in the
    /// interval from `lo` to `hi`; the right end is included when
    /// `closed` is set, the left end always is.
    pub fn count_in(&self, lo: f64, hi: f64, closed: bool) -> u64 {
        if !(lo <= hi) || (!closed && lo == hi) {
            return 0;
        }
        match &self.source {
            Source::Finite(pts) => {
                let start = pts.partition_point(|p| p.value.re < lo);
                let end = if closed {
                    pts.partition_point(|p| p.value.re <= hi)
                } else {
                    pts.partition_point(|p| p.value.re < hi)
                };
                pts[start..end.max(start)]
                    .iter()
                    .map(|p| p.multiplicity as u64)
                    .sum()
            }
            Source::Generated(g) => generated_count(*g, lo - self.shift, hi - self.shift, closed),
        }
    }
}

fn lacunary_points(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut p = 4.0f64;
    while p + 1.0 <= hi && p < EXACT_LIMIT {
        if p + 1.0 >= lo {
            out.push(p + 1.0);
        }
        p *= 4.0;
    }
    out
}

fn is_lacunary(n: i64) -> bool {
    if n < 5 {
        return false;
    }
    let m = (n - 1) as u64;
    m.is_power_of_two() && m.trailing_zeros() % 2 == 0
}

fn is_square(n: i64) -> bool {
    if n < 1 {
        return false;
    }
    let r = isqrt_floor(n as f64);
    r * r == n as u64
}

fn generated_points(g: Generator, lo: f64, hi: f64) -> Vec<f64> {
    let lo = lo.max(-EXACT_LIMIT);
    let hi = hi.min(EXACT_LIMIT);
    if lo > hi {
        return Vec::new();
    }
    match g {
        Generator::Integers => (lo.ceil() as i64..=hi.floor() as i64).map(|n| n as f64).collect(),
        Generator::EvenIntegers => ((lo / 2.0).ceil() as i64..=(hi / 2.0).floor() as i64)
            .map(|n| 2.0 * n as f64)
            .collect(),
        Generator::Squares => {
            let first = isqrt_floor(lo.max(0.0).ceil() - 1.0) + 1;
            let last = isqrt_floor(hi.max(0.0));
            (first.max(1)..=last).map(|n| (n * n) as f64).collect()
        }
        Generator::Lacunary => lacunary_points(lo, hi),
        Generator::LambdaSectionFour => (lo.ceil() as i64..=hi.floor() as i64)
            .filter(|&n| !is_square(n) && !is_lacunary(n))
            .map(|n| n as f64)
            .collect(),
    }
}

/// Counts of the generated sequence in `[lo, hi]` / `[lo, hi)` without
/// enumerating it.
fn generated_count(g: Generator, lo: f64, hi: f64, closed: bool) -> u64 {
    // Number of integers k in [lo, hi] (closed) or [lo, hi).
    let int_count = |lo: f64, hi: f64| -> u64 {
        let first = lo.ceil();
        let last = if closed { hi.floor() } else { hi.ceil() - 1.0 };
        if last < first {
            0
        } else {
            (last - first) as u64 + 1
        }
    };
    // Squares n^2 (n >= 1) not exceeding t, or strictly below t.
    let squares_upto = |t: f64, inclusive: bool| -> u64 {
        if t < 1.0 {
            return 0;
        }
        let r = isqrt_floor(t);
        if !inclusive && (r * r) as f64 == t {
            r - 1
        } else {
            r
        }
    };
    let squares = |lo: f64, hi: f64| -> u64 {
        let upper = squares_upto(hi, closed);
        let below = squares_upto(lo, false);
        upper.saturating_sub(below)
    };
    let lacunary = |lo: f64, hi: f64| -> u64 {
        lacunary_points(lo, hi)
            .into_iter()
            .filter(|&x| closed || x < hi)
            .count() as u64
    };
    match g {
        Generator::Integers => int_count(lo, hi),
        Generator::EvenIntegers => int_count(lo / 2.0, hi / 2.0),
        Generator::Squares => squares(lo, hi),
        Generator::Lacunary => lacunary(lo, hi),
        Generator::LambdaSectionFour => {
            int_count(lo, hi) - squares(lo, hi) - lacunary(lo, hi)
        }
    }
}

/// Signed counting function: `card(X ∩ [0, t))` for `t >= 0` and
/// `-card(X ∩ [t, 0))` for `t < 0`, by real part and with multiplicity.
pub fn counting_function(x: &ZeroSequence, t: f64) -> i64 {
    if t >= 0.0 {
        x.count_in(0.0, t, false) as i64
    } else {
        -(x.count_in(t, 0.0, false) as i64)
    }
}

/// Window starts scanned by [`upper_density_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityScan {
    /// First window start.
    pub start: f64,
    /// Last admissible window start.
    pub end: f64,
    /// Grid step; `None` means `r / 100`.
    pub step: Option<f64>,
}

impl DensityScan {
    pub fn new(start: f64, end: f64) -> Self {
        Self {
            start,
            end,
            step: None,
        }
    }

    /// Window starts covering a finite sequence: every window that can meet
    /// one of its points.
    pub fn covering(seq: &ZeroSequence, r: f64) -> Option<Self> {
        let (lo, hi) = seq.real_extent()?;
        Some(Self::new(lo - r, hi))
    }
}

/// Result of a windowed density scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub window_r: f64,
    pub value: f64,
    pub argmax_window_start: f64,
    pub max_count: u64,
    pub windows_scanned: usize,
}

/// `sup_x card{λ : Re λ ∈ [x, x + r]} / r` over the window starts of `scan`.
pub fn upper_density_estimate(
    seq: &ZeroSequence,
    r: f64,
    scan: &DensityScan,
) -> Result<DensityEstimate> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput(format!("window length must be positive, got {r}")));
    }
    let step = scan.step.unwrap_or(r / 100.0);
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!("scan step must be positive, got {step}")));
    }
    if !scan.start.is_finite() || !scan.end.is_finite() || scan.end < scan.start {
        return Err(Error::EmptyScanRange);
    }
    let n = ((scan.end - scan.start) / step).floor() as usize + 1;
    let (count, start) = (0..n)
        .into_par_iter()
        .map(|k| {
            let x = scan.start + k as f64 * step;
            (seq.count_in(x, x + r, true), x)
        })
        // Highest count, earliest start on ties.
        .reduce(
            || (0, f64::INFINITY),
            |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 <= b.1) {
                    a
                } else {
                    b
                }
            },
        );
    Ok(DensityEstimate {
        window_r: r,
        value: count as f64 / r,
        argmax_window_start: if start.is_finite() { start } else { scan.start },
        max_count: count,
        windows_scanned: n,
    })
}

/// Finitely many intervals with disjoint interiors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSystem {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSystem {
    /// Intervals are sorted by left end; they may share endpoints but not
    /// overlap.
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &intervals {
            if !a.is_finite() || !b.is_finite() || !(b > a) {
                return Err(Error::InvalidInput(format!(
                    "interval [{a}, {b}] must be finite with positive length"
                )));
            }
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        if intervals.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(Error::InvalidInput("intervals overlap".into()));
        }
        Ok(Self { intervals })
    }

    /// `[2^n, 2^(n+1)]` for `n = first, .., first + count - 1`.
    pub fn dyadic(first: u32, count: u32) -> Self {
        Self {
            intervals: (first..first + count)
                .map(|n| (2f64.powi(n as i32), 2f64.powi(n as i32 + 1)))
                .collect(),
        }
    }

    /// `[2^n, 2^n + 2^(n-1)]` for `n = first, .., first + count - 1`.
    pub fn dyadic_heads(first: u32, count: u32) -> Self {
        Self {
            intervals: (first..first + count)
                .map(|n| {
                    let a = 2f64.powi(n as i32);
                    (a, a + a / 2.0)
                })
                .collect(),
        }
    }

    /// `[n, n + 1]` for `n = 1, .., count`.
    pub fn unit(count: u32) -> Self {
        Self {
            intervals: (1..=count).map(|n| (n as f64, n as f64 + 1.0)).collect(),
        }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// `|I|^2 / (1 + dist(0, I)^2)`.
pub fn longness_term(a: f64, b: f64) -> f64 {
    let dist = if a <= 0.0 && b >= 0.0 {
        0.0
    } else {
        a.abs().min(b.abs())
    };
    (b - a).powi(2) / (1.0 + dist * dist)
}

/// Partial sums of `sum |I_k|^2 / (1 + dist(0, I_k)^2)` over the first
/// `n_terms` intervals (fewer if the system is shorter).
pub fn long_system_partial_sums(system: &IntervalSystem, n_terms: usize) -> Vec<f64> {
    let mut acc = 0.0;
    system
        .intervals
        .iter()
        .take(n_terms)
        .map(|&(a, b)| {
            acc += longness_term(a, b);
            acc
        })
        .collect()
}

/// Finite-data rule for calling a system long.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongnessRule {
    /// The final partial sum must exceed this.
    pub threshold: f64,
    /// Every term in the second half must be at least this.
    pub min_tail_term: f64,
}

impl Default for LongnessRule {
    fn default() -> Self {
        Self {
            threshold: 10.0,
            min_tail_term: 0.05,
        }
    }
}

impl LongnessRule {
    pub fn is_long(&self, partial_sums: &[f64]) -> bool {
        let Some(&last) = partial_sums.last() else {
            return false;
        };
        let terms: Vec<f64> = partial_sums
            .iter()
            .scan(0.0, |prev, &s| {
                let t = s - *prev;
                *prev = s;
                Some(t)
            })
            .collect();
        last > self.threshold && terms[terms.len() / 2..].iter().all(|&t| t >= self.min_tail_term)
    }
}

/// `Δ*_I(γ) = inf_{I+} γ − sup_{I−} γ` with `I− = [a, (2a+b)/3]` and
/// `I+ = [(a+2b)/3, b]`, over the samples of `gamma` in each third.
pub fn delta_star(gamma: &SampledFunction, a: f64, b: f64) -> Result<f64> {
    if !(b > a) {
        return Err(Error::InvalidInput(format!("interval [{a}, {b}] is empty")));
    }
    let left_end = (2.0 * a + b) / 3.0;
    let right_start = (a + 2.0 * b) / 3.0;
    let mut sup_left = f64::NEG_INFINITY;
    let mut inf_right = f64::INFINITY;
    let (mut n_left, mut n_right) = (0usize, 0usize);
    for (&t, &v) in gamma.grid().iter().zip(gamma.values()) {
        if t >= a && t <= left_end {
            sup_left = sup_left.max(v);
            n_left += 1;
        }
        if t >= right_start && t <= b {
            inf_right = inf_right.min(v);
            n_right += 1;
        }
    }
    if n_left < 2 {
        return Err(Error::InsufficientSamples("left"));
    }
    if n_right < 2 {
        return Err(Error::InsufficientSamples("right"));
    }
    Ok(inf_right - sup_left)
}

/// Thresholds for [`polya_witness_search`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyaCriteria {
    /// The last windowed ratio must fall below this.
    pub ratio_tol: f64,
    pub longness: LongnessRule,
}

impl Default for PolyaCriteria {
    fn default() -> Self {
        Self {
            ratio_tol: 0.01,
            longness: LongnessRule::default(),
        }
    }
}

/// Evidence that `X` is not a Pólya sequence along a long system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyaWitness {
    /// Index of the winning candidate.
    pub candidate: usize,
    /// `card(X ∩ I_k) / |I_k|`, counted on half-open `[a_k, b_k)`.
    pub ratios: Vec<f64>,
    pub partial_sums: Vec<f64>,
}

/// Per-candidate diagnostics, whether or not it wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyaCandidateEval {
    pub ratios: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub long: bool,
    pub ratios_vanish: bool,
}

/// Windowed ratios and longness for one candidate system.
pub fn evaluate_polya_candidate(
    x: &ZeroSequence,
    system: &IntervalSystem,
    criteria: &PolyaCriteria,
) -> PolyaCandidateEval {
    let ratios: Vec<f64> = system
        .intervals
        .iter()
        .map(|&(a, b)| x.count_in(a, b, false) as f64 / (b - a))
        .collect();
    let partial_sums = long_system_partial_sums(system, system.len());
    let long = criteria.longness.is_long(&partial_sums);
    let ratios_vanish = match ratios.last() {
        None => false,
        Some(&last) => {
            let half = ratios.len() / 2;
            let max_first = ratios[..half.max(1)].iter().copied().fold(0.0, f64::max);
            let max_second = ratios[half..].iter().copied().fold(0.0, f64::max);
            last <= criteria.ratio_tol && max_second <= max_first
        }
    };
    PolyaCandidateEval {
        ratios,
        partial_sums,
        long,
        ratios_vanish,
    }
}

/// First candidate system that is long and along which the relative counts
/// `card(X ∩ I_k) / |I_k|` tend to zero.
pub fn polya_witness_search(
    x: &ZeroSequence,
    candidates: &[IntervalSystem],
    criteria: &PolyaCriteria,
) -> Option<PolyaWitness> {
    candidates.iter().enumerate().find_map(|(i, sys)| {
        let eval = evaluate_polya_candidate(x, sys, criteria);
        (eval.long && eval.ratios_vanish).then_some(PolyaWitness {
            candidate: i,
            ratios: eval.ratios,
            partial_sums: eval.partial_sums,
        })
    })
}
