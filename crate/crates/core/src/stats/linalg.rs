//! Householder QR for tall column-major matrices.

use crate::{Error, Result};

/// Columns with `|R_jj| <= RANK_TOL * ||x_j||` are treated as linear
/// combinations of the columns before them.
const RANK_TOL: f64 = 1e-10;

pub(crate) struct Qr {
    m: usize,
    /// Householder vectors below the diagonal, R on and above it.
    a: Vec<Vec<f64>>,
    r_diag: Vec<f64>,
    /// Unit-norm reflector for each column, or `None` when skipped.
    reflectors: Vec<Option<Vec<f64>>>,
    col_norms: Vec<f64>,
}

impl Qr {
    pub fn new(columns: &[Vec<f64>], m: usize) -> Self {
        let p = columns.len();
        let mut a: Vec<Vec<f64>> = columns.to_vec();
        let col_norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();
        let mut r_diag = vec![0.0; p];
        let mut reflectors = Vec::with_capacity(p);
        for k in 0..p.min(m) {
            let x = &a[k][k..];
            let alpha = norm(x);
            if alpha == 0.0 {
                reflectors.push(None);
                continue;
            }
            let alpha = if x[0] > 0.0 { -alpha } else { alpha };
            let mut v: Vec<f64> = x.to_vec();
            v[0] -= alpha;
            let vn = norm(&v);
            if vn == 0.0 {
                r_diag[k] = alpha;
                reflectors.push(None);
                continue;
            }
            v.iter_mut().for_each(|e| *e /= vn);
            for col in a.iter_mut().skip(k) {
                reflect(&v, &mut col[k..]);
            }
            r_diag[k] = a[k][k];
            reflectors.push(Some(v));
        }
        Qr {
            m,
            a,
            r_diag,
            reflectors,
            col_norms,
        }
    }

    /// Indices of columns that are (numerically) dependent on earlier ones.
    pub fn deficient(&self) -> Vec<usize> {
        (0..self.a.len())
            .filter(|&j| j >= self.m || self.r_diag[j].abs() <= RANK_TOL * self.col_norms[j].max(f64::MIN_POSITIVE))
            .collect()
    }

    pub fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.r_diag[j]
        } else {
            self.a[j][i]
        }
    }

    /// `Q^T y`.
    pub fn qt_mul(&self, y: &[f64]) -> Vec<f64> {
        let mut out = y.to_vec();
        for (k, v) in self.reflectors.iter().enumerate() {
            if let Some(v) = v {
                reflect(v, &mut out[k..]);
            }
        }
        out
    }

    /// Solves `R x = b[..p]` for full-rank R.
    pub fn solve_r(&self, b: &[f64]) -> Vec<f64> {
        let p = self.a.len();
        let mut x = vec![0.0; p];
        for i in (0..p).rev() {
            let mut s = b[i];
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                s -= self.r(i, j) * xj;
            }
            x[i] = s / self.r(i, i);
        }
        x
    }

    /// Least-squares solution of `X b = y`.
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        self.solve_r(&self.qt_mul(y))
    }

    /// `R^{-1}` as rows.
    pub fn r_inverse(&self) -> Vec<Vec<f64>> {
        let p = self.a.len();
        let mut inv = vec![vec![0.0; p]; p];
        for j in 0..p {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            let col = self.solve_r(&e);
            for i in 0..p {
                inv[i][j] = col[i];
            }
        }
        inv
    }

    /// Diagonal of `(X^T X)^{-1} = R^{-1} R^{-T}`.
    pub fn xtx_inverse_diag(&self) -> Vec<f64> {
        self.r_inverse()
            .iter()
            .map(|row| row.iter().map(|v| v * v).sum())
            .collect()
    }
}

fn norm(x: &[f64]) -> f64 {
    // scaled to avoid overflow on large columns
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

/// Applies `I - 2 v v^T` to `x` in place.
fn reflect(v: &[f64], x: &mut [f64]) {
    let d: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= 2.0 * d * vi;
    }
}

/// Errors with the names of every column involved in a linear dependence.
pub(crate) fn check_rank(columns: &[Vec<f64>], names: &[String], m: usize) -> Result<Qr> {
    let qr = Qr::new(columns, m);
    let bad = qr.deficient();
    if bad.is_empty() {
        return Ok(qr);
    }
    let mut involved: Vec<usize> = Vec::new();
    for &j in &bad {
        let basis: Vec<usize> = (0..j.min(columns.len())).filter(|i| !bad.contains(i)).collect();
        if !basis.is_empty() && j < m {
            let sub: Vec<Vec<f64>> = basis.iter().map(|&i| columns[i].clone()).collect();
            let coef = Qr::new(&sub, m).solve(&columns[j]);
            let scale = coef.iter().fold(0.0f64, |a, c| a.max(c.abs()));
            for (&i, c) in basis.iter().zip(&coef) {
                if c.abs() > 1e-8 * scale.max(1.0) && !involved.contains(&i) {
                    involved.push(i);
                }
            }
        }
        involved.push(j);
    }
    involved.sort_unstable();
    involved.dedup();
    Err(Error::RankDeficient(involved.iter().map(|&i| names[i].clone()).collect()))
}
