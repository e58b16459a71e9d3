use super::{normal_two_sided, rank::average_ranks, rank::tie_sizes, sign, TestResult};
use crate::{Error, Result};

/// `Auto` switches from the exact distribution to the normal approximation
/// once `n1 * n2` exceeds this.
pub const EXACT_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MwuMethod {
    #[default]
    Auto,
    Exact,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwuOptions {
    pub method: MwuMethod,
    /// Continuity correction for the normal approximation.
    pub continuity: bool,
}

impl Default for MwuOptions {
    fn default() -> Self {
        MwuOptions {
            method: MwuMethod::Auto,
            continuity: true,
        }
    }
}

/// Two-sided Mann-Whitney U test. The statistic is U for `a`:
/// `R_a - n_a (n_a + 1) / 2`.
pub fn mann_whitney_u(a: &[f64], b: &[f64], opts: MwuOptions) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Argument("Mann-Whitney U needs two nonempty samples".into()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::Argument("Mann-Whitney U input contains NaN".into()));
    }
    let (n1, n2) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = average_ranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let u = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let mean = (n1 * n2) as f64 / 2.0;

    let mut notes = Vec::new();
    let exact = match opts.method {
        MwuMethod::Exact => true,
        MwuMethod::Asymptotic => false,
        MwuMethod::Auto => n1 * n2 <= EXACT_LIMIT,
    };
    let p_value = if pooled.iter().all(|&v| v == pooled[0]) {
        log::warn!("Mann-Whitney U: pooled data are constant; p set to 1");
        notes.push("constant pooled data".to_string());
        1.0
    } else if exact {
        notes.push("exact".to_string());
        mwu_exact_p(&ranks, n1)
    } else {
        notes.push(if opts.continuity {
            "normal approximation, tie and continuity corrected".to_string()
        } else {
            "normal approximation, tie corrected".to_string()
        });
        let n = (n1 + n2) as f64;
        let ties: f64 = tie_sizes(&pooled).iter().map(|&t| (t * t * t - t) as f64).sum();
        let var = (n1 * n2) as f64 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
        if var <= 0.0 {
            1.0
        } else {
            let cc = if opts.continuity { 0.5 } else { 0.0 };
            let z = ((u - mean).abs() - cc).max(0.0) / var.sqrt();
            normal_two_sided(z)
        }
    };
    Ok(TestResult {
        test_name: "Mann-Whitney U".into(),
        statistic: u,
        p_value,
        sizes: vec![n1, n2],
        direction: sign(u - mean),
        notes,
    })
}

/// Exact two-sided p-value under the permutation null, conditional on the
/// observed tie pattern. `ranks` are the pooled average ranks with the first
/// `n1` belonging to the first sample.
///
/// Average ranks are multiples of one half, so doubled ranks are integers and
/// the distribution of the doubled rank sum is counted by dynamic
/// programming over subsets of size `n1`.
pub fn mwu_exact_p(ranks: &[f64], n1: usize) -> f64 {
    let n = ranks.len();
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    // counts[k][s]: subsets of size k with doubled sum s
    let mut counts = vec![vec![0f64; max_sum + 1]; n1 + 1];
    counts[0][0] = 1.0;
    for (i, &d) in doubled.iter().enumerate() {
        for k in (1..=n1.min(i + 1)).rev() {
            let (lo, hi) = counts.split_at_mut(k);
            let prev = &lo[k - 1];
            let cur = &mut hi[0];
            for s in (d..=max_sum).rev() {
                if prev[s - d] != 0.0 {
                    cur[s] += prev[s - d];
                }
            }
        }
    }
    // 2U = S2 - n1 (n1 + 1); compare |2U - n1 n2| on integers
    let n2 = n - n1;
    let offset = (n1 * (n1 + 1)) as i64;
    let centre = (n1 * n2) as i64;
    let observed: i64 = doubled[..n1].iter().sum::<usize>() as i64 - offset;
    let obs_dev = (observed - centre).abs();
    let mut total = 0.0;
    let mut extreme = 0.0;
    for (s, &c) in counts[n1].iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        total += c;
        if (s as i64 - offset - centre).abs() >= obs_dev {
            extreme += c;
        }
    }
    (extreme / total).min(1.0)
}
