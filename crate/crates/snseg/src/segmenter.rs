//! Recursive multiple change-point estimation.
//!
//! Starting from the full sample: sweep the maximal windowed statistic,
//! take its argmax (ties toward the smallest index), stop if it does not
//! clear the threshold, otherwise record the split and recurse on `[s, khat]`
//! and `[khat+1, e]`. Segments shorter than `2h` stop immediately. Only the
//! top-level sweep is retained for inspection and plotting; recursive
//! sweeps are internal.

use crate::config::SNConfig;
use crate::error::{Error, Result};
use crate::functionals::{build_prefix_cache, estimate_subsample, SubsampleEstimate};
use crate::params::ParameterSpec;
use crate::series::TimeSeriesMatrix;
use crate::snstat::{SnEngine, SweepResult};

/// Which detector produced a result.
#[derive(Debug, Clone)]
pub enum MethodKind {
    Sncp(ParameterSpec),
    Snhd,
}

/// Ordered change-point estimates plus everything needed to interpret them.
#[derive(Debug, Clone)]
pub struct SegmentationResult {
    /// Strictly increasing change-point locations (1-based; a change-point
    /// at `k` ends the segment `..=k`).
    pub est_cp: Vec<usize>,
    /// The full-sample sweep: per-anchor maxima and all window records.
    pub sweep: SweepResult,
    pub config: SNConfig,
    pub method: MethodKind,
    /// Filled on demand via [`segment_estimates`].
    pub segment_estimates: Option<Vec<ComponentEstimates>>,
}

impl SegmentationResult {
    /// Segment boundaries `(a, b)` implied by the change-points, covering
    /// `1..=n`.
    pub fn segments(&self, n: usize) -> Vec<(usize, usize)> {
        segment_bounds(&self.est_cp, n)
    }
}

/// Per-segment estimates of one spec component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentEstimates {
    pub label: String,
    /// One entry per segment; `None` where the estimator is degenerate or
    /// the segment is shorter than the component's minimum support.
    pub per_segment: Vec<Option<Vec<f64>>>,
}

pub(crate) fn segment_bounds(est_cp: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut bounds = Vec::with_capacity(est_cp.len() + 1);
    let mut prev = 0;
    for &cp in est_cp {
        bounds.push((prev + 1, cp));
        prev = cp;
    }
    bounds.push((prev + 1, n));
    bounds
}

/// The shared recursion. `sweep_fn(s, e, collect_records)` produces the
/// subsample sweep; `top` short-circuits the first call when the caller has
/// already swept the full range.
pub(crate) fn recurse_segments(
    sweep_fn: &mut dyn FnMut(usize, usize, bool) -> Result<SweepResult>,
    top: Option<&SweepResult>,
    s: usize,
    e: usize,
    h: usize,
    threshold: f64,
    found: &mut Vec<usize>,
) -> Result<()> {
    if e - s + 1 < 2 * h {
        return Ok(());
    }
    let owned;
    let sw = match top {
        Some(t) => t,
        None => {
            owned = sweep_fn(s, e, false)?;
            &owned
        }
    };
    let (khat, stat) = sw.argmax();
    if stat <= threshold {
        return Ok(());
    }
    found.push(khat);
    recurse_segments(sweep_fn, None, s, khat, h, threshold, found)?;
    recurse_segments(sweep_fn, None, khat + 1, e, h, threshold, found)
}

/// Multiple change-point estimation for the given functional spec.
pub fn sncp_segment(
    ts: &TimeSeriesMatrix,
    spec: &ParameterSpec,
    config: &SNConfig,
) -> Result<SegmentationResult> {
    let n = ts.n();
    let h = config.grid_size_h;
    if h < 1 {
        return Err(Error::config("window size h must be at least 1"));
    }
    if 2 * h > n {
        return Err(Error::config(format!(
            "window size {h} too large: need 2h <= n = {n}"
        )));
    }
    if !config.threshold_kn.is_finite() || config.threshold_kn <= 0.0 {
        return Err(Error::config(format!(
            "threshold {} is not a positive critical value",
            config.threshold_kn
        )));
    }
    let cache = build_prefix_cache(ts, spec);
    let mut engine = SnEngine::new(spec, ts, Some(&cache))?;
    let top = engine.sweep(1, n, h, true)?;
    let mut est_cp = Vec::new();
    recurse_segments(
        &mut |s, e, collect| engine.sweep(s, e, h, collect),
        Some(&top),
        1,
        n,
        h,
        config.threshold_kn,
        &mut est_cp,
    )?;
    est_cp.sort_unstable();
    Ok(SegmentationResult {
        est_cp,
        sweep: top,
        config: config.clone(),
        method: MethodKind::Sncp(spec.clone()),
        segment_estimates: None,
    })
}

/// Parameter estimates on the segments separated by `est_cp` (which must be
/// strictly increasing, within `1..n`). Segments a component cannot handle
/// (too short, degenerate) yield `None` rather than failing the rest.
pub fn segment_estimates(
    ts: &TimeSeriesMatrix,
    spec: &ParameterSpec,
    est_cp: &[usize],
) -> Result<Vec<ComponentEstimates>> {
    let n = ts.n();
    for w in est_cp.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::input("est_cp must be strictly increasing"));
        }
    }
    if let (Some(&first), Some(&last)) = (est_cp.first(), est_cp.last()) {
        if first < 1 || last >= n {
            return Err(Error::input(format!(
                "change-points must lie in [1, {})",
                n
            )));
        }
    }
    let bounds = segment_bounds(est_cp, n);
    let cache = build_prefix_cache(ts, spec);
    let mut out = Vec::with_capacity(spec.components().len());
    for c in spec.components() {
        let single = ParameterSpec::single(c.clone(), ts.p())?;
        let mut per_segment = Vec::with_capacity(bounds.len());
        for &(a, b) in &bounds {
            if b - a + 1 < c.min_support() {
                per_segment.push(None);
                continue;
            }
            match estimate_subsample(&single, ts, a, b, Some(&cache))? {
                SubsampleEstimate::Values(v) => per_segment.push(Some(v)),
                SubsampleEstimate::Degenerate => per_segment.push(None),
            }
        }
        out.push(ComponentEstimates {
            label: c.label(),
            per_segment,
        });
    }
    Ok(out)
}
