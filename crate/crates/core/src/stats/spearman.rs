use super::{rank::average_ranks, sign, t_two_sided, TestResult};
use crate::{Error, Result};

/// Spearman's rho as the Pearson correlation of average ranks. The p-value
/// uses `t = rho sqrt((n - 2) / (1 - rho^2))` with `n - 2` degrees of freedom.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::Argument(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Argument("Spearman correlation needs at least 3 pairs".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Argument("Spearman input contains NaN".into()));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (da, db) = (a - mean, b - mean);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Argument("Spearman correlation undefined for a constant vector".into()));
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = n as f64 - 2.0;
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        t_two_sided(rho * (df / (1.0 - rho * rho)).sqrt(), df)
    };
    Ok(TestResult {
        test_name: "Spearman rho".into(),
        statistic: rho,
        p_value,
        sizes: vec![n],
        direction: sign(rho),
        notes: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| v.exp()).collect();
        assert_eq!(spearman_rho(&x, &y).unwrap().statistic, 1.0);
    }

    #[test]
    fn hand_example() {
        let r = spearman_rho(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap();
        assert!((r.statistic + 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_rejected() {
        assert!(spearman_rho(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }
}
