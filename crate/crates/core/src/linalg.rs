//! Rank-revealing least squares: complex Householder QR with column
//! pivoting by remaining column norm.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Dense column-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// All columns must have the same length.
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Self {
        let rows = columns.first().map_or(0, Vec::len);
        assert!(columns.iter().all(|c| c.len() == rows), "ragged columns");
        Self {
            rows,
            cols: columns.len(),
            data: columns.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[j * self.rows + i] = v;
    }
}

/// Outcome of projecting a target onto the column span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeastSquares {
    /// `||b - P b||^2` where `P` projects onto the retained pivoted columns.
    pub residual_sq: f64,
    pub target_norm_sq: f64,
    pub rank: usize,
    /// `|R_kk|` for the retained steps, nonincreasing.
    pub r_diag: Vec<f64>,
    /// Column order chosen by the pivoting.
    pub pivots: Vec<usize>,
}

impl LeastSquares {
    /// `||b - P b||^2 / ||b||^2`, zero for a zero target.
    pub fn relative_residual(&self) -> f64 {
        if self.target_norm_sq == 0.0 {
            0.0
        } else {
            self.residual_sq / self.target_norm_sq
        }
    }

    /// `|R_00| / |R_rr|` over the retained rank; a lower bound for the
    /// 2-norm condition number of the retained columns.
    pub fn condition_estimate(&self) -> f64 {
        match (self.r_diag.first(), self.r_diag.last()) {
            (Some(&a), Some(&b)) if b > 0.0 => a / b,
            _ => 1.0,
        }
    }
}

fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |acc, z| acc + z.norm_sqr())
}

/// Applies `I - 2 v v^* / (v^* v)` to `x`.
fn reflect(v: &[Complex64], vnorm_sq: f64, x: &mut [Complex64]) {
    let dot: Complex64 = v.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum();
    let s = dot * (2.0 / vnorm_sq);
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= vi * s;
    }
}

/// Householder QR with column pivoting applied to `[A | b]`; stops once the
/// largest remaining column norm falls to `rel_tol * |R_00|`.
pub fn pivoted_qr_residual(a: &CMatrix, b: &[Complex64], rel_tol: f64) -> LeastSquares {
    assert_eq!(a.rows, b.len(), "target length must match the row count");
    let (m, n) = (a.rows, a.cols);
    let mut work = a.clone();
    let mut rhs = b.to_vec();
    let target_norm_sq = norm_sq(b);
    let mut pivots: Vec<usize> = (0..n).collect();
    let mut r_diag = Vec::new();
    let steps = m.min(n);
    let mut r00 = 0.0;
    for k in 0..steps {
        // Pick the remaining column with the largest trailing norm.
        let (p, best) = (k..n)
            .map(|j| (j, norm_sq(&work.col(j)[k..])))
            .fold((k, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        let best = best.sqrt();
        if k == 0 {
            r00 = best;
        }
        if best == 0.0 || best <= rel_tol * r00 {
            break;
        }
        if p != k {
            for i in 0..m {
                let (x, y) = (work.get(i, k), work.get(i, p));
                work.set(i, k, y);
                work.set(i, p, x);
            }
            pivots.swap(k, p);
        }
        let mut v: Vec<Complex64> = work.col(k)[k..].to_vec();
        let phase = if v[0].norm() > 0.0 {
            v[0] / v[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * best;
        v[0] -= alpha;
        let vnorm_sq = norm_sq(&v);
        if vnorm_sq > 0.0 {
            for j in k..n {
                reflect(&v, vnorm_sq, &mut work.col_mut(j)[k..]);
            }
            reflect(&v, vnorm_sq, &mut rhs[k..]);
        }
        r_diag.push(best);
    }
    let rank = r_diag.len();
    LeastSquares {
        residual_sq: norm_sq(&rhs[rank..]),
        target_norm_sq,
        rank,
        r_diag,
        pivots,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn residual_of_simple_projection() {
        // span{e1, e2} in C^3, b = (1, 2, 3) -> residual 9.
        let a = CMatrix::from_columns(&[vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], vec![
            c(0.0, 0.0),
            c(0.0, 2.0),
            c(0.0, 0.0),
        ]]);
        let ls = pivoted_qr_residual(&a, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)], 1e-12);
        assert_eq!(ls.rank, 2);
        assert!((ls.residual_sq - 9.0).abs() < 1e-12);
        assert_eq!(ls.pivots[0], 1);
    }

    #[test]
    fn detects_rank_deficiency() {
        let col = vec![c(1.0, 1.0), c(2.0, 0.0), c(0.0, -1.0)];
        let twice: Vec<Complex64> = col.iter().map(|z| z * 2.0).collect();
        let a = CMatrix::from_columns(&[col.clone(), twice]);
        let ls = pivoted_qr_residual(&a, &col, 1e-12);
        assert_eq!(ls.rank, 1);
        assert!(ls.residual_sq < 1e-24);
    }

    proptest! {
        #[test]
        fn residual_matches_gram_schmidt_oracle(
            entries in prop::collection::vec(-1.0f64..1.0, 24),
            rhs in prop::collection::vec(-1.0f64..1.0, 8),
        ) {
            // 4x3 complex system; oracle via Gram-Schmidt in plain arithmetic.
            let cols: Vec<Vec<Complex64>> = (0..3)
                .map(|j| (0..4).map(|i| c(entries[2 * (4 * j + i)], entries[2 * (4 * j + i) + 1])).collect())
                .collect();
            let b: Vec<Complex64> = (0..4).map(|i| c(rhs[2 * i], rhs[2 * i + 1])).collect();
            let mut basis: Vec<Vec<Complex64>> = Vec::new();
            for col in &cols {
                let mut v = col.clone();
                for q in &basis {
                    let d: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (vi, qi) in v.iter_mut().zip(q) { *vi -= qi * d; }
                }
                let nv = norm_sq(&v).sqrt();
                prop_assume!(nv > 1e-3);
                basis.push(v.iter().map(|z| z / nv).collect());
            }
            let mut r = b.clone();
            for q in &basis {
                let d: Complex64 = q.iter().zip(&r).map(|(a, b)| a.conj() * b).sum();
                for (ri, qi) in r.iter_mut().zip(q) { *ri -= qi * d; }
            }
            let ls = pivoted_qr_residual(&CMatrix::from_columns(&cols), &b, 1e-14);
            prop_assert_eq!(ls.rank, 3);
            prop_assert!((ls.residual_sq - norm_sq(&r)).abs() < 1e-10);
        }

        #[test]
        fn adding_columns_never_increases_residual(
            entries in prop::collection::vec(-1.0f64..1.0, 40),
            rhs in prop::collection::vec(-1.0f64..1.0, 10),
        ) {
            let cols: Vec<Vec<Complex64>> = (0..4)
                .map(|j| (0..5).map(|i| c(entries[2 * (5 * j + i)], entries[2 * (5 * j + i) + 1])).collect())
                .collect();
            let b: Vec<Complex64> = (0..5).map(|i| c(rhs[2 * i], rhs[2 * i + 1])).collect();
            let mut prev = f64::INFINITY;
            for m in 0..=4 {
                let r = if m == 0 {
                    norm_sq(&b)
                } else {
                    pivoted_qr_residual(&CMatrix::from_columns(&cols[..m]), &b, 1e-12).residual_sq
                };
                prop_assert!(r <= prev + 1e-12);
                prev = r;
            }
        }
    }
}
