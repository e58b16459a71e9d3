//! Statistical kernel. Every function is pure.

mod chisq;
mod design;
mod linalg;
mod logistic;
mod mwu;
mod ols;
mod rank;
mod spearman;

pub use chisq::chi_squared_2x2;
pub use design::DesignMatrix;
pub use logistic::{logistic_fit, logistic_gradient, LogisticOptions};
pub use mwu::{mann_whitney_u, mwu_exact_p, MwuMethod, MwuOptions, EXACT_LIMIT};
pub use ols::ols_fit;
pub use rank::{average_ranks, tie_sizes};
pub use spearman::spearman_rho;

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

/// Two-sided 95% normal quantile used for all confidence intervals.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub test_name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub sizes: Vec<usize>,
    /// Sign of the effect: +1 when the first group (or first variable) is
    /// larger / positively associated, -1 for the reverse, 0 for none.
    pub direction: i8,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub ci_lower: Vec<f64>,
    pub ci_upper: Vec<f64>,
    /// t statistics for OLS, Wald z statistics for logistic fits.
    pub statistics: Vec<f64>,
    pub p_values: Vec<f64>,
    pub n: usize,
    pub r_squared: Option<f64>,
    pub adj_r_squared: Option<f64>,
    pub log_likelihood: Option<f64>,
    pub iterations: Option<usize>,
}

impl RegressionFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.estimates[i])
    }
}

pub(crate) fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

pub(crate) fn normal_two_sided(z: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * n.sf(z.abs())).min(1.0)
}

pub(crate) fn chi2_sf(x: f64, df: f64) -> f64 {
    ChiSquared::new(df).expect("positive df").sf(x).clamp(0.0, 1.0)
}

pub(crate) fn t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive df");
    (2.0 * dist.sf(t.abs())).min(1.0)
}
