//! Trimming / window-size / threshold resolution.
//!
//! Users pick either a relative trimming `epsilon` or an absolute window
//! size `grid_size` (`h = floor(n * epsilon)`), plus a confidence level; the
//! detection threshold is then looked up (with linear interpolation) in the
//! critical-value table matching the functional's output dimension.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::critval::{lookup_critical_value, CriticalValueTable};
use crate::error::{Error, Result};

pub const EPSILON_MIN: f64 = 0.05;
pub const EPSILON_MAX: f64 = 0.5;

/// Confidence levels with tabulated critical values.
pub const SUPPORTED_CONFIDENCE: [f64; 5] = [0.9, 0.95, 0.99, 0.995, 0.999];

/// Structured, non-fatal resolution notices. The library never prints;
/// front-ends decide how to render these.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConfigWarning {
    /// Requested trimming below 0.05 was raised to 0.05.
    EpsilonClampedLow { given: f64 },
    /// Requested trimming above 0.5 was lowered to 0.5.
    EpsilonClampedHigh { given: f64 },
}

impl fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigWarning::EpsilonClampedLow { given } => {
                write!(f, "trimming {given} is less than 0.05; set to exactly 0.05")
            }
            ConfigWarning::EpsilonClampedHigh { given } => {
                write!(f, "trimming {given} is greater than 0.5; set to exactly 0.5")
            }
        }
    }
}

/// Resolved detector configuration. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SNConfig {
    /// Trimming after clamping into `[0.05, 0.5]`; drives the threshold
    /// lookup.
    pub epsilon: f64,
    /// Local window size `h`. Derived as `floor(n * epsilon)` when epsilon
    /// was given; kept verbatim when the user supplied it directly.
    pub grid_size_h: usize,
    pub confidence_q: f64,
    /// Detection threshold `K_n` (interpolated critical value).
    pub threshold_kn: f64,
    pub warnings: Vec<ConfigWarning>,
}

/// The high-dimensional variant resolves its threshold the same way, from
/// its own table; the p >= 10 recommendation is advisory, not enforced.
pub type UStatConfig = SNConfig;

/// Clamp trimming into `[0.05, 0.5]`, reporting which side was hit.
pub fn clamp_epsilon(eps: f64) -> (f64, Option<ConfigWarning>) {
    if eps < EPSILON_MIN {
        (EPSILON_MIN, Some(ConfigWarning::EpsilonClampedLow { given: eps }))
    } else if eps > EPSILON_MAX {
        (EPSILON_MAX, Some(ConfigWarning::EpsilonClampedHigh { given: eps }))
    } else {
        (eps, None)
    }
}

pub fn supported_confidence(q: f64) -> bool {
    SUPPORTED_CONFIDENCE.iter().any(|s| (s - q).abs() < 1e-9)
}

/// Resolve `(epsilon | grid_size, q)` into a full [`SNConfig`].
///
/// `grid_size_opt` takes precedence when both are supplied; the trimming is
/// then `grid_size / n`, clamped like a direct epsilon before the threshold
/// lookup (the window size itself is kept as given). `dim_d` must match the
/// dimension of an SNCP table; it is ignored for SNHD tables.
pub fn resolve_config(
    n: usize,
    epsilon_opt: Option<f64>,
    grid_size_opt: Option<usize>,
    q: f64,
    dim_d: usize,
    table: &CriticalValueTable,
) -> Result<SNConfig> {
    if n < 2 {
        return Err(Error::config(format!("series length {n} is too short")));
    }
    if !supported_confidence(q) {
        return Err(Error::config(format!(
            "confidence {q} is unsupported; choose one of {SUPPORTED_CONFIDENCE:?}"
        )));
    }
    table.check_dimension(dim_d)?;
    let mut warnings = Vec::new();
    let (epsilon, grid_size_h) = match (grid_size_opt, epsilon_opt) {
        (Some(h), _) => {
            if h == 0 {
                return Err(Error::config("grid_size must be positive"));
            }
            if h >= n {
                return Err(Error::config(format!(
                    "grid_size {h} must be smaller than the series length {n}"
                )));
            }
            let (eps, warn) = clamp_epsilon(h as f64 / n as f64);
            warnings.extend(warn);
            (eps, h)
        }
        (None, Some(eps_given)) => {
            let (eps, warn) = clamp_epsilon(eps_given);
            warnings.extend(warn);
            let h = (n as f64 * eps).floor() as usize;
            if h == 0 {
                return Err(Error::config(format!(
                    "window size floor(n * epsilon) = 0 for n = {n}, epsilon = {eps}"
                )));
            }
            (eps, h)
        }
        (None, None) => {
            return Err(Error::config("either epsilon or grid_size must be supplied"));
        }
    };
    let threshold_kn = lookup_critical_value(table, epsilon, q)?;
    Ok(SNConfig {
        epsilon,
        grid_size_h,
        confidence_q: q,
        threshold_kn,
        warnings,
    })
}
