//! Subsample parameter estimators.
//!
//! Every estimator is the plug-in functional of the empirical distribution
//! of a subsample `Y_a..Y_b` (inclusive, 1-based): variances and covariances
//! divide by the subsample length `m`, not `m - 1`. Two evaluation routes
//! exist and must agree: a naive route working directly on the raw window,
//! and a fast route answering from a [`PrefixCache`] in O(1) per query for
//! the moment-based estimators. Quantiles and user functionals have no
//! linear structure and always pay per-window cost.
//!
//! The cache accumulates globally centered values (each column shifted by
//! its full-sample mean) so long prefix differences do not lose precision on
//! data with a large common offset; centering cancels exactly in every
//! estimator except the means, which add the offset back.

use crate::error::{Error, Result};
use crate::params::{Component, ParameterSpec};
use crate::series::TimeSeriesMatrix;

/// Values whose centered spread falls below `m * (DEGENERACY_REL * scale)^2`
/// count as constant: ratio estimators signal degeneracy instead of
/// dividing rounding noise by rounding noise.
const DEGENERACY_REL: f64 = 1e-12;

/// Result of one subsample estimation: either the stacked estimate or a
/// degeneracy signal (zero-variance denominator somewhere). Callers inside
/// the sweep map degenerate windows to a zero statistic.
#[derive(Debug, Clone, PartialEq)]
pub enum SubsampleEstimate {
    Values(Vec<f64>),
    Degenerate,
}

/// Cumulative sums over the (globally centered) series: plain sums, and
/// where the spec needs them, pairwise products and lag-1 products. Indexed
/// so that `sum(a..=b) = pre[b] - pre[a-1]`.
#[derive(Debug, Clone)]
pub struct PrefixCache {
    n: usize,
    p: usize,
    /// Per-column full-sample means (the centering offsets).
    col_means: Vec<f64>,
    /// Per-column max |raw value|; reference scale for degeneracy tests.
    col_scale: Vec<f64>,
    /// Per column: n+1 prefix sums of centered values.
    sums: Vec<f64>,
    /// Per upper-triangle pair (i <= j), packed row-major: n+1 prefix sums
    /// of centered products c_i * c_j. Present iff a second-moment
    /// component is in the spec. The diagonal doubles as the sum of squares.
    cross: Vec<f64>,
    /// Per column: n+1 prefix sums of c_t * c_{t+1} (entry t covers lags up
    /// to t, t+1; the last index never starts a lag pair).
    lag: Vec<f64>,
}

#[inline]
fn pair_index(p: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < p);
    i * p - i * (i + 1) / 2 + j
}

impl PrefixCache {
    #[inline]
    fn sum(&self, col: usize, a: usize, b: usize) -> f64 {
        let base = col * (self.n + 1);
        self.sums[base + b] - self.sums[base + a - 1]
    }

    #[inline]
    fn cross_sum(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let base = pair_index(self.p, i, j) * (self.n + 1);
        self.cross[base + b] - self.cross[base + a - 1]
    }

    /// Sum of c_t * c_{t+1} for t in a..=b-1.
    #[inline]
    fn lag_sum(&self, col: usize, a: usize, b: usize) -> f64 {
        let base = col * (self.n + 1);
        self.lag[base + (b - 1)] - self.lag[base + (a - 1)]
    }

    #[inline]
    fn centered(&self, ts: &TimeSeriesMatrix, t: usize, col: usize) -> f64 {
        ts.value(t, col) - self.col_means[col]
    }

    #[inline]
    fn degeneracy_floor(&self, col: usize, m: usize) -> f64 {
        let eps = DEGENERACY_REL * self.col_scale[col];
        m as f64 * eps * eps
    }
}

/// Build the prefix sums a spec needs. Pure bookkeeping: a spec with only
/// quantile or generic components still gets the (cheap) plain sums.
pub fn build_prefix_cache(ts: &TimeSeriesMatrix, spec: &ParameterSpec) -> PrefixCache {
    let n = ts.n();
    let p = ts.p();
    let needs_cross = spec.components().iter().any(|c| {
        matches!(
            c,
            Component::Variance
                | Component::AcfLag1
                | Component::BivariateCorrelation
                | Component::CovarianceMatrix
        )
    });
    let needs_lag = spec
        .components()
        .iter()
        .any(|c| matches!(c, Component::AcfLag1));

    let mut col_means = Vec::with_capacity(p);
    let mut col_scale = Vec::with_capacity(p);
    for s in 0..p {
        let col = ts.column(s);
        col_means.push(col.iter().sum::<f64>() / n as f64);
        col_scale.push(col.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    }

    let mut sums = vec![0.0; p * (n + 1)];
    for s in 0..p {
        let col = ts.column(s);
        let mu = col_means[s];
        let base = s * (n + 1);
        let mut acc = 0.0;
        for (t, v) in col.iter().enumerate() {
            acc += v - mu;
            sums[base + t + 1] = acc;
        }
    }

    let mut cross = Vec::new();
    if needs_cross {
        cross = vec![0.0; p * (p + 1) / 2 * (n + 1)];
        for i in 0..p {
            let ci = ts.column(i);
            let mi = col_means[i];
            for j in i..p {
                let cj = ts.column(j);
                let mj = col_means[j];
                let base = pair_index(p, i, j) * (n + 1);
                let mut acc = 0.0;
                for t in 0..n {
                    acc += (ci[t] - mi) * (cj[t] - mj);
                    cross[base + t + 1] = acc;
                }
            }
        }
    }

    let mut lag = Vec::new();
    if needs_lag {
        lag = vec![0.0; p * (n + 1)];
        for s in 0..p {
            let col = ts.column(s);
            let mu = col_means[s];
            let base = s * (n + 1);
            let mut acc = 0.0;
            for t in 0..n {
                if t + 1 < n {
                    acc += (col[t] - mu) * (col[t + 1] - mu);
                }
                lag[base + t + 1] = acc;
            }
        }
    }

    PrefixCache {
        n,
        p,
        col_means,
        col_scale,
        sums,
        cross,
        lag,
    }
}

/// Order-statistic quantile with linear interpolation at 1 + (m-1)*tau.
pub(crate) fn quantile_sorted(sorted: &[f64], tau: f64) -> f64 {
    let m = sorted.len();
    debug_assert!(m >= 1);
    let pos = 1.0 + (m as f64 - 1.0) * tau;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let vlo = sorted[lo - 1];
    if hi > lo {
        let frac = pos - lo as f64;
        vlo + frac * (sorted[hi - 1] - vlo)
    } else {
        vlo
    }
}

/// Estimate every component of `spec` on rows `a..=b`. With a cache the
/// moment-based components answer in O(1); without one, or for quantile and
/// generic components, the window is visited directly.
pub fn estimate_subsample(
    spec: &ParameterSpec,
    ts: &TimeSeriesMatrix,
    a: usize,
    b: usize,
    cache: Option<&PrefixCache>,
) -> Result<SubsampleEstimate> {
    if a < 1 || a > b || b > ts.n() {
        return Err(Error::input(format!(
            "subsample [{a}, {b}] out of range for n = {}",
            ts.n()
        )));
    }
    let m = b - a + 1;
    for c in spec.components() {
        if m < c.min_support() {
            return Err(Error::estimator(format!(
                "subsample length {m} below minimum support {} of {}",
                c.min_support(),
                c.label()
            )));
        }
    }
    let mut out = vec![0.0; spec.dim_d()];
    let mut scratch = EvalScratch::default();
    match eval_into(spec, ts, cache, a, b, &mut out, &mut scratch)? {
        true => Ok(SubsampleEstimate::Values(out)),
        false => Ok(SubsampleEstimate::Degenerate),
    }
}

/// Reusable buffers for the direct (uncached) route.
#[derive(Default)]
pub(crate) struct EvalScratch {
    sorting: Vec<f64>,
}

/// Write the stacked estimate into `out`; `false` flags a degenerate ratio.
/// Callers guarantee the support precondition.
pub(crate) fn eval_into(
    spec: &ParameterSpec,
    ts: &TimeSeriesMatrix,
    cache: Option<&PrefixCache>,
    a: usize,
    b: usize,
    out: &mut [f64],
    scratch: &mut EvalScratch,
) -> Result<bool> {
    debug_assert_eq!(out.len(), spec.dim_d());
    for (c, &off) in spec.components().iter().zip(spec.offsets().iter()) {
        let slot = &mut out[off..off + c.dim(ts.p())];
        if !eval_component(c, ts, cache, a, b, slot, scratch)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Estimate a single component on `[a, b]` into `out`; `false` flags a
/// degenerate ratio. Quantiles sort the window; the sweep engine overrides
/// them with its incremental multisets.
pub(crate) fn eval_component(
    c: &Component,
    ts: &TimeSeriesMatrix,
    cache: Option<&PrefixCache>,
    a: usize,
    b: usize,
    out: &mut [f64],
    scratch: &mut EvalScratch,
) -> Result<bool> {
    let ok = match (c, cache) {
        (Component::Quantile(tau), _) => {
            let col = ts.column(0);
            scratch.sorting.clear();
            scratch.sorting.extend_from_slice(&col[a - 1..b]);
            scratch
                .sorting
                .sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
            out[0] = quantile_sorted(&scratch.sorting, *tau);
            true
        }
        (Component::Generic(g), _) => {
            let sub = ts.subsample(a, b);
            let vals = g.eval(&sub)?;
            out.copy_from_slice(&vals);
            true
        }
        (comp, Some(cache)) => eval_cached(comp, ts, cache, a, b, out),
        (comp, None) => eval_direct(comp, ts, a, b, out),
    };
    Ok(ok)
}

fn eval_cached(
    c: &Component,
    ts: &TimeSeriesMatrix,
    cache: &PrefixCache,
    a: usize,
    b: usize,
    out: &mut [f64],
) -> bool {
    let m = (b - a + 1) as f64;
    match c {
        Component::Mean => {
            out[0] = cache.sum(0, a, b) / m + cache.col_means[0];
            true
        }
        Component::MultivariateMean => {
            for s in 0..ts.p() {
                out[s] = cache.sum(s, a, b) / m + cache.col_means[s];
            }
            true
        }
        Component::Variance => {
            let s = cache.sum(0, a, b);
            let q = cache.cross_sum(0, 0, a, b);
            out[0] = ((q - s * s / m) / m).max(0.0);
            true
        }
        Component::AcfLag1 => {
            let s = cache.sum(0, a, b);
            let q = cache.cross_sum(0, 0, a, b);
            let cbar = s / m;
            let den = q - m * cbar * cbar;
            if den <= cache.degeneracy_floor(0, b - a + 1) {
                return false;
            }
            let ca = cache.centered(ts, a, 0);
            let cb = cache.centered(ts, b, 0);
            let num = cache.lag_sum(0, a, b) - cbar * (2.0 * s - ca - cb) + (m - 1.0) * cbar * cbar;
            out[0] = num / den;
            true
        }
        Component::BivariateCorrelation => {
            let sx = cache.sum(0, a, b);
            let sy = cache.sum(1, a, b);
            let vx = cache.cross_sum(0, 0, a, b) - sx * sx / m;
            let vy = cache.cross_sum(1, 1, a, b) - sy * sy / m;
            if vx <= cache.degeneracy_floor(0, b - a + 1)
                || vy <= cache.degeneracy_floor(1, b - a + 1)
            {
                return false;
            }
            let cxy = cache.cross_sum(0, 1, a, b) - sx * sy / m;
            out[0] = (cxy / (vx * vy).sqrt()).clamp(-1.0, 1.0);
            true
        }
        Component::CovarianceMatrix => {
            // vech order: diagonal + lower triangle, row-major.
            let p = ts.p();
            let mut idx = 0;
            for i in 0..p {
                let si = cache.sum(i, a, b);
                for j in 0..=i {
                    let sj = cache.sum(j, a, b);
                    let mut v = (cache.cross_sum(j, i, a, b) - si * sj / m) / m;
                    if i == j {
                        v = v.max(0.0);
                    }
                    out[idx] = v;
                    idx += 1;
                }
            }
            true
        }
        Component::Quantile(_) | Component::Generic(_) => unreachable!("handled by caller"),
    }
}

fn eval_direct(c: &Component, ts: &TimeSeriesMatrix, a: usize, b: usize, out: &mut [f64]) -> bool {
    let m = (b - a + 1) as f64;
    let window = |s: usize| &ts.column(s)[a - 1..b];
    let mean_of = |w: &[f64]| w.iter().sum::<f64>() / m;
    match c {
        Component::Mean => {
            out[0] = mean_of(window(0));
            true
        }
        Component::MultivariateMean => {
            for s in 0..ts.p() {
                out[s] = mean_of(window(s));
            }
            true
        }
        Component::Variance => {
            let w = window(0);
            let mu = mean_of(w);
            out[0] = w.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / m;
            true
        }
        Component::AcfLag1 => {
            let w = window(0);
            let mu = mean_of(w);
            let den: f64 = w.iter().map(|v| (v - mu) * (v - mu)).sum();
            let scale = w.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            let eps = DEGENERACY_REL * scale;
            if den <= m * eps * eps {
                return false;
            }
            let num: f64 = w.windows(2).map(|pair| (pair[0] - mu) * (pair[1] - mu)).sum();
            out[0] = num / den;
            true
        }
        Component::BivariateCorrelation => {
            let wx = window(0);
            let wy = window(1);
            let mx = mean_of(wx);
            let my = mean_of(wy);
            let vx: f64 = wx.iter().map(|v| (v - mx) * (v - mx)).sum();
            let vy: f64 = wy.iter().map(|v| (v - my) * (v - my)).sum();
            let sx = wx.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            let sy = wy.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            let ex = DEGENERACY_REL * sx;
            let ey = DEGENERACY_REL * sy;
            if vx <= m * ex * ex || vy <= m * ey * ey {
                return false;
            }
            let cxy: f64 = wx.iter().zip(wy).map(|(x, y)| (x - mx) * (y - my)).sum();
            out[0] = (cxy / (vx * vy).sqrt()).clamp(-1.0, 1.0);
            true
        }
        Component::CovarianceMatrix => {
            let p = ts.p();
            let means: Vec<f64> = (0..p).map(|s| mean_of(window(s))).collect();
            let mut idx = 0;
            for i in 0..p {
                let wi = window(i);
                for j in 0..=i {
                    let wj = window(j);
                    let mut v = wi
                        .iter()
                        .zip(wj)
                        .map(|(x, y)| (x - means[i]) * (y - means[j]))
                        .sum::<f64>()
                        / m;
                    if i == j {
                        v = v.max(0.0);
                    }
                    out[idx] = v;
                    idx += 1;
                }
            }
            true
        }
        Component::Quantile(_) | Component::Generic(_) => unreachable!("handled by caller"),
    }
}

/// Multiset over rank-compressed values with Fenwick counts: O(log n)
/// insert/remove and k-th order statistic. Backs the incremental quantile
/// scans inside self-normalizer loops, where subsamples grow or shrink by
/// one element per step.
#[derive(Debug, Clone)]
pub(crate) struct RankIndex {
    sorted_unique: Vec<f64>,
    /// 1-based rank of each observation (time order, 0-based slot).
    ranks: Vec<u32>,
}

impl RankIndex {
    pub(crate) fn build(col: &[f64]) -> Self {
        let mut sorted: Vec<f64> = col.to_vec();
        sorted.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
        sorted.dedup();
        let ranks = col
            .iter()
            .map(|v| {
                let pos = sorted.partition_point(|u| u < v);
                (pos + 1) as u32
            })
            .collect();
        Self {
            sorted_unique: sorted,
            ranks,
        }
    }

    /// Rank of the observation at 1-based time t.
    #[inline]
    pub(crate) fn rank_at(&self, t: usize) -> u32 {
        self.ranks[t - 1]
    }

    #[inline]
    pub(crate) fn value_of_rank(&self, rank: usize) -> f64 {
        self.sorted_unique[rank - 1]
    }

    pub(crate) fn universe(&self) -> usize {
        self.sorted_unique.len()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct FenwickMultiset {
    tree: Vec<u32>,
    universe: usize,
    count: usize,
    mask: usize,
}

impl FenwickMultiset {
    pub(crate) fn new(universe: usize) -> Self {
        let mut mask = 1;
        while mask * 2 <= universe {
            mask *= 2;
        }
        Self {
            tree: vec![0; universe + 1],
            universe,
            count: 0,
            mask,
        }
    }

    pub(crate) fn clear(&mut self) {
        self.tree.fill(0);
        self.count = 0;
    }

    #[inline]
    pub(crate) fn insert(&mut self, rank: u32) {
        let mut i = rank as usize;
        while i <= self.universe {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
        self.count += 1;
    }

    #[inline]
    pub(crate) fn remove(&mut self, rank: u32) {
        let mut i = rank as usize;
        while i <= self.universe {
            self.tree[i] -= 1;
            i += i & i.wrapping_neg();
        }
        self.count -= 1;
    }

    pub(crate) fn len(&self) -> usize {
        self.count
    }

    /// Rank (1-based) of the k-th smallest stored element, k in 1..=len.
    #[inline]
    pub(crate) fn kth(&self, k: usize) -> usize {
        debug_assert!(k >= 1 && k <= self.count);
        let mut idx = 0usize;
        let mut rem = k as u32;
        let mut step = self.mask;
        while step > 0 {
            let next = idx + step;
            if next <= self.universe && self.tree[next] < rem {
                idx = next;
                rem -= self.tree[next];
            }
            step >>= 1;
        }
        idx + 1
    }

    /// Interpolated quantile of the stored multiset.
    pub(crate) fn quantile(&self, index: &RankIndex, tau: f64) -> f64 {
        let m = self.count;
        let pos = 1.0 + (m as f64 - 1.0) * tau;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let vlo = index.value_of_rank(self.kth(lo));
        if hi > lo {
            let frac = pos - lo as f64;
            vlo + frac * (index.value_of_rank(self.kth(hi)) - vlo)
        } else {
            vlo
        }
    }
}
