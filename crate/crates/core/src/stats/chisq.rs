use super::{chi2_sf, sign, TestResult};
use crate::{Error, Result};

/// Pearson chi-squared test of independence on a 2x2 table, one degree of
/// freedom. With `correction`, Yates' continuity correction subtracts 0.5
/// from each `|O - E|`, floored at zero.
pub fn chi_squared_2x2(table: [[f64; 2]; 2], correction: bool) -> Result<TestResult> {
    if table.iter().flatten().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(Error::Argument("contingency counts must be finite and non-negative".into()));
    }
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    let total = rows[0] + rows[1];
    if rows.contains(&0.0) || cols.contains(&0.0) {
        return Err(Error::Argument("contingency table has a zero margin".into()));
    }
    let mut stat = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let expected = rows[i] * cols[j] / total;
            let mut dev = (table[i][j] - expected).abs();
            if correction {
                dev = (dev - 0.5).max(0.0);
            }
            stat += dev * dev / expected;
        }
    }
    let cross = table[0][0] * table[1][1] - table[0][1] * table[1][0];
    Ok(TestResult {
        test_name: "chi-squared 2x2".into(),
        statistic: stat,
        p_value: chi2_sf(stat, 1.0),
        sizes: vec![total as usize],
        direction: sign(cross),
        notes: vec![if correction { "Yates corrected" } else { "uncorrected" }.to_string()],
    })
}
