use super::{linalg::check_rank, linalg::Qr, ols::assemble, DesignMatrix, RegressionFit};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticOptions {
    /// Stop once the largest coefficient change falls below this.
    pub tolerance: f64,
    pub max_iter: usize,
    /// A linear predictor beyond this magnitude is taken as evidence of
    /// (quasi-)complete separation.
    pub separation_eta: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        LogisticOptions {
            tolerance: 1e-8,
            max_iter: 100,
            separation_eta: 30.0,
        }
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(eta))` without overflow.
fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

/// Logistic regression by iteratively reweighted least squares, starting from
/// zero. Each step solves the weighted least-squares problem by QR.
pub fn logistic_fit(x: &DesignMatrix, y: &[f64], opts: LogisticOptions) -> Result<RegressionFit> {
    let (n, p) = (x.n_rows(), x.n_cols());
    if y.len() != n {
        return Err(Error::Argument(format!("y has {} rows, design has {n}", y.len())));
    }
    if p == 0 || n < p {
        return Err(Error::Argument(format!("logistic fit needs at least as many rows ({n}) as columns ({p})")));
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::Argument("logistic response must be 0 or 1".into()));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::Argument("logistic response is constant".into()));
    }
    check_rank(x.columns(), x.names(), n)?;

    let mut beta = vec![0.0; p];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let eta = x.mul_vec(&beta);
        let mut weighted_cols = vec![vec![0.0; n]; p];
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mu = sigmoid(eta[i]);
            let w = mu * (1.0 - mu);
            if w <= 0.0 {
                return Err(Error::Separation(format!("fitted probability of row {i} is 0 or 1")));
            }
            let sw = w.sqrt();
            z[i] = sw * (eta[i] + (y[i] - mu) / w);
            for (j, col) in weighted_cols.iter_mut().enumerate() {
                col[i] = sw * x.get(i, j);
            }
        }
        let next = Qr::new(&weighted_cols, n).solve(&z);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Separation("coefficients diverged".into()));
        }
        let change = next
            .iter()
            .zip(&beta)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        beta = next;
        let max_eta = x.mul_vec(&beta).iter().fold(0.0f64, |m, e| m.max(e.abs()));
        if max_eta > opts.separation_eta {
            return Err(Error::Separation(format!(
                "linear predictor reached {max_eta:.1} after {iterations} iterations"
            )));
        }
        if change < opts.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "IRLS did not converge in {} iterations",
            opts.max_iter
        )));
    }

    let eta = x.mul_vec(&beta);
    let mut weighted_cols = vec![vec![0.0; n]; p];
    let mut log_likelihood = 0.0;
    for i in 0..n {
        let mu = sigmoid(eta[i]);
        let sw = (mu * (1.0 - mu)).sqrt();
        for (j, col) in weighted_cols.iter_mut().enumerate() {
            col[i] = sw * x.get(i, j);
        }
        log_likelihood += y[i] * eta[i] - softplus(eta[i]);
    }
    let std_errors: Vec<f64> = Qr::new(&weighted_cols, n)
        .xtx_inverse_diag()
        .iter()
        .map(|d| d.sqrt())
        .collect();
    Ok(assemble(x, beta, std_errors, n, None, None, Some(log_likelihood), Some(iterations)))
}

/// Score vector `X^T (y - mu)` at `beta`.
pub fn logistic_gradient(x: &DesignMatrix, y: &[f64], beta: &[f64]) -> Vec<f64> {
    let resid: Vec<f64> = x
        .mul_vec(beta)
        .iter()
        .zip(y)
        .map(|(&e, &yi)| yi - sigmoid(e))
        .collect();
    x.t_mul_vec(&resid)
}
