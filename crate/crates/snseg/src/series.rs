//! Input container: an `n x p` matrix of observations, one row per time
//! point, stored column-major so each component series is contiguous.

use crate::error::{Error, Result};

/// Time indices in the public API are 1-based (`t = 1..=n`), matching the
/// usual change-point notation; storage is 0-based internally.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesMatrix {
    n: usize,
    p: usize,
    /// Column-major: series `s` occupies `values[s*n..(s+1)*n]`.
    values: Vec<f64>,
}

impl TimeSeriesMatrix {
    /// Build from per-series columns, all of equal length `n >= 2`.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let p = columns.len();
        if p == 0 {
            return Err(Error::input("time series needs at least one column"));
        }
        let n = columns[0].len();
        if n < 2 {
            return Err(Error::input(format!(
                "time series needs at least 2 observations, got {n}"
            )));
        }
        let mut values = Vec::with_capacity(n * p);
        for (s, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::input(format!(
                    "column {s} has length {}, expected {n}",
                    col.len()
                )));
            }
            values.extend_from_slice(col);
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite observation {bad}")));
        }
        Ok(Self { n, p, values })
    }

    /// Single-series convenience constructor.
    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::from_columns(vec![values])
    }

    /// Adopt an already column-major buffer (trusted internal callers:
    /// simulated data known to be finite and well-shaped).
    pub(crate) fn from_column_major(values: Vec<f64>, n: usize, p: usize) -> Self {
        debug_assert_eq!(values.len(), n * p);
        debug_assert!(n >= 2 && p >= 1);
        Self { n, p, values }
    }

    /// Number of time points.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of component series.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Contiguous slice of series `s` (0-based column index).
    pub fn column(&self, s: usize) -> &[f64] {
        &self.values[s * self.n..(s + 1) * self.n]
    }

    /// Observation of series `s` at time `t` (1-based time index).
    #[inline]
    pub fn value(&self, t: usize, s: usize) -> f64 {
        debug_assert!(t >= 1 && t <= self.n);
        self.values[s * self.n + (t - 1)]
    }

    /// Copy of row `t` (1-based) as a `p`-vector.
    pub fn row(&self, t: usize) -> Vec<f64> {
        (0..self.p).map(|s| self.value(t, s)).collect()
    }

    /// Materialize the subsample rows `a..=b` (1-based, inclusive) as a new
    /// `(b-a+1) x p` matrix. Used by generic user functionals, which receive
    /// the raw subsample.
    pub fn subsample(&self, a: usize, b: usize) -> Subsample {
        debug_assert!(a >= 1 && a <= b && b <= self.n);
        let m = b - a + 1;
        let mut values = Vec::with_capacity(m * self.p);
        for s in 0..self.p {
            values.extend_from_slice(&self.column(s)[a - 1..b]);
        }
        Subsample {
            m,
            p: self.p,
            values,
        }
    }
}

/// A materialized `m x p` subsample handed to generic functionals.
/// Unlike [`TimeSeriesMatrix`] it may hold a single row.
#[derive(Debug, Clone)]
pub struct Subsample {
    m: usize,
    p: usize,
    values: Vec<f64>,
}

impl Subsample {
    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.p
    }

    /// Contiguous slice of column `s` (0-based).
    pub fn column(&self, s: usize) -> &[f64] {
        &self.values[s * self.m..(s + 1) * self.m]
    }

    /// Entry at 0-based (row, col).
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[col * self.m + row]
    }
}
