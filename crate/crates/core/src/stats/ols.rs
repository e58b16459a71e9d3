use super::{linalg::check_rank, normal_two_sided, DesignMatrix, RegressionFit, Z95};
use crate::{Error, Result};

/// Ordinary least squares via Householder QR.
///
/// Standard errors are classical (`sigma^2 (X^T X)^{-1}` with
/// `sigma^2 = RSS / (n - p)`); intervals and p-values use the normal
/// quantile. R^2 is centred and reported only when `y` varies.
pub fn ols_fit(x: &DesignMatrix, y: &[f64]) -> Result<RegressionFit> {
    let (n, p) = (x.n_rows(), x.n_cols());
    if y.len() != n {
        return Err(Error::Argument(format!("y has {} rows, design has {n}", y.len())));
    }
    if p == 0 || n <= p {
        return Err(Error::Argument(format!("OLS needs more rows ({n}) than columns ({p})")));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("response has non-finite values".into()));
    }
    let qr = check_rank(x.columns(), x.names(), n)?;
    let beta = qr.solve(y);
    let fitted = x.mul_vec(&beta);
    let rss: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum();
    let df = (n - p) as f64;
    let sigma2 = rss / df;
    let std_errors: Vec<f64> = qr.xtx_inverse_diag().iter().map(|d| (sigma2 * d).sqrt()).collect();

    let mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let (r_squared, adj_r_squared) = if tss > 0.0 {
        let r2 = 1.0 - rss / tss;
        (Some(r2), Some(1.0 - (1.0 - r2) * (n as f64 - 1.0) / df))
    } else {
        (None, None)
    };
    Ok(assemble(x, beta, std_errors, n, r_squared, adj_r_squared, None, None))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble(
    x: &DesignMatrix,
    estimates: Vec<f64>,
    std_errors: Vec<f64>,
    n: usize,
    r_squared: Option<f64>,
    adj_r_squared: Option<f64>,
    log_likelihood: Option<f64>,
    iterations: Option<usize>,
) -> RegressionFit {
    let statistics: Vec<f64> = estimates
        .iter()
        .zip(&std_errors)
        .map(|(&b, &se)| {
            if se > 0.0 {
                b / se
            } else if b == 0.0 {
                0.0
            } else {
                b.signum() * f64::INFINITY
            }
        })
        .collect();
    let p_values = statistics
        .iter()
        .map(|&s| if s.is_infinite() { 0.0 } else { normal_two_sided(s) })
        .collect();
    RegressionFit {
        names: x.names().to_vec(),
        ci_lower: estimates.iter().zip(&std_errors).map(|(b, se)| b - Z95 * se).collect(),
        ci_upper: estimates.iter().zip(&std_errors).map(|(b, se)| b + Z95 * se).collect(),
        estimates,
        std_errors,
        statistics,
        p_values,
        n,
        r_squared,
        adj_r_squared,
        log_likelihood,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs: Vec<f64> = (1..=6).map(f64::from).collect();
        let y: Vec<f64> = xs.iter().map(|v| 2.0 * v).collect();
        let x = DesignMatrix::with_intercept(6).column_builder("x", xs).unwrap();
        let fit = ols_fit(&x, &y).unwrap();
        assert!(fit.estimates[0].abs() < 1e-12);
        assert!((fit.estimates[1] - 2.0).abs() < 1e-12);
        assert!((fit.r_squared.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_design_names_columns() {
        let a: Vec<f64> = (0..8).map(f64::from).collect();
        let b: Vec<f64> = a.iter().map(|v| 3.0 * v + 1.0).collect();
        let x = DesignMatrix::with_intercept(8)
            .column_builder("a", a)
            .unwrap()
            .column_builder("b", b)
            .unwrap();
        match ols_fit(&x, &[0.0, 1.0, 0.0, 2.0, 1.0, 3.0, 2.0, 4.0]) {
            Err(Error::RankDeficient(names)) => assert_eq!(names, ["(Intercept)", "a", "b"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ci_brackets_estimate() {
        let xs = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let y = vec![1.2, 1.9, 3.2, 3.8, 5.3, 5.9, 7.4];
        let x = DesignMatrix::with_intercept(7).column_builder("x", xs).unwrap();
        let fit = ols_fit(&x, &y).unwrap();
        for j in 0..2 {
            assert!(fit.ci_lower[j] <= fit.estimates[j] && fit.estimates[j] <= fit.ci_upper[j]);
        }
        assert!(fit.adj_r_squared.unwrap() <= fit.r_squared.unwrap());
    }
}
