use crate::{Error, Result};

/// Named design matrix stored by column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n_rows: usize,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl DesignMatrix {
    pub fn new(n_rows: usize) -> Self {
        DesignMatrix {
            n_rows,
            names: Vec::new(),
            columns: Vec::new(),
        }
    }

    /// Starts a matrix whose first column is the constant 1, named `(Intercept)`.
    pub fn with_intercept(n_rows: usize) -> Self {
        let mut m = DesignMatrix::new(n_rows);
        m.names.push("(Intercept)".into());
        m.columns.push(vec![1.0; n_rows]);
        m
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.n_rows {
            return Err(Error::Argument(format!(
                "column `{name}` has {} rows, expected {}",
                values.len(),
                self.n_rows
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("column `{name}` has non-finite values")));
        }
        self.names.push(name);
        self.columns.push(values);
        Ok(())
    }

    pub fn column_builder(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        self.push_column(name, values)?;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.columns[j][i]
    }

    /// `X b`.
    pub fn mul_vec(&self, b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows];
        for (col, &bj) in self.columns.iter().zip(b) {
            for (o, &x) in out.iter_mut().zip(col) {
                *o += x * bj;
            }
        }
        out
    }

    /// `X^T v`.
    pub fn t_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|col| col.iter().zip(v).map(|(x, y)| x * y).sum())
            .collect()
    }
}
