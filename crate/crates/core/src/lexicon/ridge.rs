//! Ridge regression `argmin ‖Xw − y‖² + λ‖w‖²` solved on the normal
//! equations `(XᵀX + λI) w = Xᵀy` by conjugate gradient.
//!
//! The solver only touches `X` through sparse matrix-vector products, so the
//! normal matrix is never formed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RidgeOptions {
    /// Convergence when `‖r‖ ≤ tolerance · ‖Xᵀy‖`.
    pub tolerance: f64,
    /// Iteration cap as a multiple of the number of features.
    pub max_iter_factor: usize,
    /// Parallel matrix-vector products. Results are identical either way.
    pub parallel: bool,
}

impl Default for RidgeOptions {
    fn default() -> Self {
        RidgeOptions {
            tolerance: 1e-10,
            max_iter_factor: 10,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RidgeFit {
    pub weights: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual.
    pub residual: f64,
}

struct NormalOperator<'a> {
    x: &'a CsrMatrix,
    xt: CsrMatrix,
    lambda: f64,
    parallel: bool,
}

impl NormalOperator<'_> {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let xv = self.x.matvec(v, self.parallel);
        let mut out = self.xt.matvec(&xv, self.parallel);
        for (o, vi) in out.iter_mut().zip(v) {
            *o += self.lambda * vi;
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn conjugate_gradient(
    op: &NormalOperator<'_>,
    b: &[f64],
    x0: Vec<f64>,
    opts: &RidgeOptions,
) -> Result<RidgeFit> {
    let m = b.len();
    let b_norm = norm(b);
    let max_iter = opts.max_iter_factor.saturating_mul(m).max(1);
    let threshold = opts.tolerance * b_norm;

    let mut x = x0;
    let ax = op.apply(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut p = r.clone();
    let mut rs = dot(&r, &r);
    if b_norm == 0.0 && rs == 0.0 {
        return Ok(RidgeFit {
            weights: x,
            iterations: 0,
            residual: 0.0,
        });
    }

    let relative = |rs: f64| rs.sqrt() / b_norm.max(f64::MIN_POSITIVE);
    for it in 0..max_iter {
        if rs.sqrt() <= threshold {
            return Ok(RidgeFit {
                weights: x,
                iterations: it,
                residual: relative(rs),
            });
        }
        let ap = op.apply(&p);
        let curvature = dot(&p, &ap);
        if curvature <= 0.0 || !curvature.is_finite() {
            return Err(Error::NonConvergence(format!(
                "non-positive curvature {curvature:e} at iteration {it}; normal matrix is singular"
            )));
        }
        let alpha = rs / curvature;
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_next = dot(&r, &r);
        let beta = rs_next / rs;
        for i in 0..m {
            p[i] = r[i] + beta * p[i];
        }
        rs = rs_next;
    }
    if rs.sqrt() <= threshold {
        return Ok(RidgeFit {
            weights: x,
            iterations: max_iter,
            residual: relative(rs),
        });
    }
    Err(Error::NonConvergence(format!(
        "relative residual {:e} after {max_iter} iterations",
        relative(rs)
    )))
}

/// Fits ridge weights for design `x` and targets `y`.
///
/// With `lambda == 0` the system is only solvable uniquely when `X` has full
/// column rank. A second solve from a random starting point exposes any null
/// space (its component of the start vector survives CG untouched), and a
/// disagreement is reported as non-convergence.
pub fn fit_ridge(x: &CsrMatrix, y: &[f64], lambda: f64, opts: &RidgeOptions) -> Result<RidgeFit> {
    if x.n_rows() != y.len() {
        return Err(Error::Argument(format!(
            "design has {} rows but {} targets",
            x.n_rows(),
            y.len()
        )));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Argument(format!("lambda must be finite and ≥ 0, got {lambda}")));
    }
    let m = x.n_cols();
    let op = NormalOperator {
        x,
        xt: x.transpose(),
        lambda,
        parallel: opts.parallel,
    };
    let b = op.xt.matvec(y, opts.parallel);
    let fit = conjugate_gradient(&op, &b, vec![0.0; m], opts)?;

    if lambda == 0.0 && m > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1dea);
        let start: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let probe = conjugate_gradient(&op, &b, start, opts)?;
        let gap: f64 = fit
            .weights
            .iter()
            .zip(&probe.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let scale = 1.0 + fit.weights.iter().map(|w| w.abs()).fold(0.0, f64::max);
        if gap > 1e-6 * scale {
            return Err(Error::NonConvergence(format!(
                "lambda = 0 with rank-deficient design: solutions from different starts differ by {gap:e}"
            )));
        }
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[f64]]) -> CsrMatrix {
        CsrMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_system() {
        let x = dense(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let fit = fit_ridge(&x, &[1.0, 0.0], 0.0, &RidgeOptions::default()).unwrap();
        assert!((fit.weights[0] - 1.0).abs() < 1e-12);
        assert!(fit.weights[1].abs() < 1e-12);
    }

    #[test]
    fn one_column_closed_form() {
        let x = dense(&[&[1.0], &[1.0]]);
        let fit = fit_ridge(&x, &[1.0, 0.0], 1.0, &RidgeOptions::default()).unwrap();
        assert!((fit.weights[0] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_without_penalty_is_reported() {
        // duplicated column
        let x = dense(&[&[1.0, 1.0], &[2.0, 2.0], &[0.5, 0.5]]);
        let err = fit_ridge(&x, &[1.0, 0.0, 1.0], 0.0, &RidgeOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NonConvergence(_)), "{err}");
        // the same design is fine once penalized
        assert!(fit_ridge(&x, &[1.0, 0.0, 1.0], 0.5, &RidgeOptions::default()).is_ok());
    }

    #[test]
    fn zero_column_without_penalty_is_reported() {
        let x = dense(&[&[1.0, 0.0], &[2.0, 0.0]]);
        assert!(fit_ridge(&x, &[1.0, 0.0], 0.0, &RidgeOptions::default()).is_err());
    }

    #[test]
    fn argument_checks() {
        let x = dense(&[&[1.0]]);
        assert!(fit_ridge(&x, &[1.0, 2.0], 1.0, &RidgeOptions::default()).is_err());
        assert!(fit_ridge(&x, &[1.0], -1.0, &RidgeOptions::default()).is_err());
        assert!(fit_ridge(&x, &[1.0], f64::NAN, &RidgeOptions::default()).is_err());
    }

    #[test]
    fn zero_targets_give_zero_weights() {
        let x = dense(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let fit = fit_ridge(&x, &[0.0, 0.0], 1.0, &RidgeOptions::default()).unwrap();
        assert_eq!(fit.weights, vec![0.0, 0.0]);
    }

    #[test]
    fn parallel_solve_is_bit_identical() {
        let rows: Vec<Vec<f64>> = (0..25)
            .map(|r| (0..6).map(|c| ((r * 13 + c * 7) as f64).cos()).collect())
            .collect();
        let x = CsrMatrix::from_dense(&rows).unwrap();
        let y: Vec<f64> = (0..25).map(|i| (i % 2) as f64).collect();
        let serial = fit_ridge(&x, &y, 1.0, &RidgeOptions::default()).unwrap();
        let par = fit_ridge(
            &x,
            &y,
            1.0,
            &RidgeOptions {
                parallel: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(serial.weights, par.weights);
    }
}
