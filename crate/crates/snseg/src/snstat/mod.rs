//! The self-normalized test statistic and its nested-window maximization.
//!
//! For a window `(t1, k, t2)` the statistic is `T = D' V^{-1} D`, where `D`
//! contrasts the parameter estimates before and after `k` and `V` stacks the
//! same kind of contrast over every interior split of the two half-windows,
//! so the unknown long-run variance cancels between numerator and
//! denominator. `T` is maximized over the nested window set `H(k)`: all
//! pairs `(k - j1*h + 1, k + j2*h)` inside the current segment.
//!
//! Degeneracy never aborts a sweep: windows whose estimates are undefined
//! (constant stretch under a ratio estimator, sides below the minimum
//! support, normalizer without usable range) score zero.

mod kernel;

pub(crate) use kernel::{KernelScratch, MeanKernel};

use crate::error::{Error, Result};
use crate::functionals::{self, EvalScratch, FenwickMultiset, PrefixCache, RankIndex};
use crate::linalg::quad_form_spd;
use crate::params::{Component, ParameterSpec};
use crate::series::TimeSeriesMatrix;

/// Nested local windows anchored at `k`, restricted to the segment `[s, e]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSet {
    pub k: usize,
    /// `(t1, t2)` pairs, `j1` outer ascending, `j2` inner ascending.
    pub pairs: Vec<(usize, usize)>,
}

/// Enumerate `H_{s:e}(k)`: left endpoints `k - j1*h + 1`, right endpoints
/// `k + j2*h`, intersected with `[s, e]`. Exactly
/// `floor((k-s+1)/h) * floor((e-k)/h)` pairs; empty near the boundary.
pub fn nested_windows(k: usize, h: usize, s: usize, e: usize) -> WindowSet {
    assert!(h >= 1, "window size h must be at least 1");
    assert!(s <= k && k <= e, "need s <= k <= e");
    let a_count = (k - s + 1) / h;
    let b_count = (e - k) / h;
    let mut pairs = Vec::with_capacity(a_count * b_count);
    for j1 in 1..=a_count {
        let t1 = k - j1 * h + 1;
        for j2 in 1..=b_count {
            pairs.push((t1, k + j2 * h));
        }
    }
    WindowSet { k, pairs }
}

/// One evaluated window: the statistic and where it was computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub stat: f64,
    pub k: usize,
    pub t1: usize,
    pub t2: usize,
}

/// Per-anchor maxima over a sweep range plus every evaluated window.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub s: usize,
    pub e: usize,
    /// `max_stats[k - s]` is `T_{s,e}(k)`; zero where the window set is
    /// empty.
    pub max_stats: Vec<f64>,
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    pub fn stat_at(&self, k: usize) -> f64 {
        self.max_stats[k - self.s]
    }

    /// Anchor with the largest maximal statistic, ties broken toward the
    /// smallest index.
    pub fn argmax(&self) -> (usize, f64) {
        let mut best_k = self.s;
        let mut best = f64::NEG_INFINITY;
        for (i, &v) in self.max_stats.iter().enumerate() {
            if v > best {
                best = v;
                best_k = self.s + i;
            }
        }
        (best_k, best)
    }
}

/// Contrast between the parameter estimates on `[t1, k]` and `[k+1, t2]`,
/// scaled by `(k-t1+1)(t2-k) / (t2-t1+1)^{3/2}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Contrast {
    Values(Vec<f64>),
    /// An estimate on either side was degenerate; the window statistic is 0.
    Degenerate,
}

fn check_window(ts: &TimeSeriesMatrix, t1: usize, k: usize, t2: usize) -> Result<()> {
    if t1 < 1 || t1 > k || k >= t2 || t2 > ts.n() {
        return Err(Error::input(format!(
            "window (t1={t1}, k={k}, t2={t2}) violates 1 <= t1 <= k < t2 <= n={}",
            ts.n()
        )));
    }
    Ok(())
}

/// `D(t1, k, t2)`, length `dim_d`.
pub fn contrast(
    spec: &ParameterSpec,
    ts: &TimeSeriesMatrix,
    t1: usize,
    k: usize,
    t2: usize,
    cache: Option<&PrefixCache>,
) -> Result<Contrast> {
    check_window(ts, t1, k, t2)?;
    let ms = spec.min_support();
    if k - t1 + 1 < ms || t2 - k < ms {
        return Err(Error::estimator(format!(
            "window sides ({}, {}) below minimum support {ms}",
            k - t1 + 1,
            t2 - k
        )));
    }
    let mut engine = SnEngine::new(spec, ts, cache)?;
    Ok(match engine.contrast_vec(t1, k, t2)? {
        Some(d) => Contrast::Values(d),
        None => Contrast::Degenerate,
    })
}

/// Self-normalizer `V = L + R` for the window, as a dense symmetric
/// `d x d` row-major matrix. Inner splits with insufficient support or
/// degenerate estimates contribute zero, which keeps `V` positive
/// semidefinite.
pub fn self_normalizer(
    spec: &ParameterSpec,
    ts: &TimeSeriesMatrix,
    t1: usize,
    k: usize,
    t2: usize,
    cache: Option<&PrefixCache>,
) -> Result<Vec<f64>> {
    check_window(ts, t1, k, t2)?;
    let mut engine = SnEngine::new(spec, ts, cache)?;
    engine.normalizer_matrix(t1, k, t2)
}

/// The window statistic `T = D' V^{-1} D`, with the generalized inverse on
/// singular normalizers and 0 whenever the window carries no evidence.
pub fn test_statistic(
    spec: &ParameterSpec,
    ts: &TimeSeriesMatrix,
    t1: usize,
    k: usize,
    t2: usize,
    cache: Option<&PrefixCache>,
) -> Result<f64> {
    check_window(ts, t1, k, t2)?;
    let mut engine = SnEngine::new(spec, ts, cache)?;
    engine.statistic(t1, k, t2)
}

/// Maximal statistic `T_{s,e}(k)` for every `k in [s, e]`, with all window
/// records. `max over the empty window set = 0`.
pub fn max_sweep(
    spec: &ParameterSpec,
    ts: &TimeSeriesMatrix,
    s: usize,
    e: usize,
    h: usize,
    cache: Option<&PrefixCache>,
) -> Result<SweepResult> {
    let mut engine = SnEngine::new(spec, ts, cache)?;
    engine.sweep(s, e, h, true)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum EstFlag {
    Ok,
    Degenerate,
    Short,
}

struct QuantScan {
    index: RankIndex,
    grow: FenwickMultiset,
    shrink: FenwickMultiset,
}

/// Reusable evaluation state for sweeps over one series/spec pair. The
/// segmenter keeps a single engine alive across its whole recursion.
pub(crate) struct SnEngine<'a> {
    spec: &'a ParameterSpec,
    ts: &'a TimeSeriesMatrix,
    cache: Option<&'a PrefixCache>,
    d: usize,
    ms: usize,
    quant: Option<QuantScan>,
    kernel: Option<(MeanKernel, KernelScratch)>,
    eval_scratch: EvalScratch,
    est_a: Vec<f64>,
    est_b: Vec<f64>,
    lmats: Vec<f64>,
    rmats: Vec<f64>,
    lests: Vec<f64>,
    rests: Vec<f64>,
    lflags: Vec<EstFlag>,
    rflags: Vec<EstFlag>,
    vfull: Vec<f64>,
    dvec: Vec<f64>,
    spd: Vec<f64>,
}

impl<'a> SnEngine<'a> {
    pub(crate) fn new(
        spec: &'a ParameterSpec,
        ts: &'a TimeSeriesMatrix,
        cache: Option<&'a PrefixCache>,
    ) -> Result<Self> {
        if spec.p() != ts.p() {
            return Err(Error::input(format!(
                "spec built for p = {}, series has p = {}",
                spec.p(),
                ts.p()
            )));
        }
        let d = spec.dim_d();
        let has_quantile = spec
            .components()
            .iter()
            .any(|c| matches!(c, Component::Quantile(_)));
        let quant = if has_quantile {
            let index = RankIndex::build(ts.column(0));
            let universe = index.universe();
            Some(QuantScan {
                index,
                grow: FenwickMultiset::new(universe),
                shrink: FenwickMultiset::new(universe),
            })
        } else {
            None
        };
        let kernel = match spec.components() {
            [Component::Mean] => Some(MeanKernel::from_ts(ts, &[0])),
            [Component::MultivariateMean] => {
                let cols: Vec<usize> = (0..ts.p()).collect();
                Some(MeanKernel::from_ts(ts, &cols))
            }
            _ => None,
        }
        .map(|k| (k, KernelScratch::default()));
        Ok(Self {
            spec,
            ts,
            cache,
            d,
            ms: spec.min_support(),
            quant,
            kernel,
            eval_scratch: EvalScratch::default(),
            est_a: vec![0.0; d],
            est_b: vec![0.0; d],
            lmats: Vec::new(),
            rmats: Vec::new(),
            lests: Vec::new(),
            rests: Vec::new(),
            lflags: Vec::new(),
            rflags: Vec::new(),
            vfull: vec![0.0; d * d],
            dvec: vec![0.0; d],
            spd: vec![0.0; 2 * d * d],
        })
    }

    /// One-shot estimate of `[a, b]`; `None` flags degeneracy.
    fn eval_once(&mut self, a: usize, b: usize, into_a: bool) -> Result<Option<()>> {
        let out = if into_a {
            &mut self.est_a
        } else {
            &mut self.est_b
        };
        let ok = eval_stacked(
            self.spec,
            self.ts,
            self.cache,
            None,
            a,
            b,
            out,
            &mut self.eval_scratch,
        )?;
        Ok(ok.then_some(()))
    }

    fn contrast_vec(&mut self, t1: usize, k: usize, t2: usize) -> Result<Option<Vec<f64>>> {
        let ms = self.ms;
        if k - t1 + 1 < ms || t2 - k < ms {
            return Ok(None);
        }
        if self.eval_once(t1, k, true)?.is_none() {
            return Ok(None);
        }
        if self.eval_once(k + 1, t2, false)?.is_none() {
            return Ok(None);
        }
        let m = (k - t1 + 1) as f64;
        let mp = (t2 - k) as f64;
        let wl = (t2 - t1 + 1) as f64;
        let coef = m * mp / (wl * wl.sqrt());
        let d: Vec<f64> = self
            .est_a
            .iter()
            .zip(self.est_b.iter())
            .map(|(l, r)| coef * (l - r))
            .collect();
        Ok(Some(d))
    }

    /// Accumulate the unnormalized left branch
    /// `sum_i ((i-t1+1)(k-i) (est(t1,i) - est(i+1,k)))^{x2}` into `out`
    /// (packed upper triangle).
    fn branch_left(&mut self, t1: usize, k: usize, out_off: usize) -> Result<()> {
        let d = self.d;
        let dd = d * (d + 1) / 2;
        let Self {
            spec,
            ts,
            cache,
            quant,
            eval_scratch,
            est_a,
            est_b,
            lmats,
            ms,
            ..
        } = self;
        let out = &mut lmats[out_off..out_off + dd];
        out.fill(0.0);
        if let Some(q) = quant.as_mut() {
            q.grow.clear();
            q.shrink.clear();
            q.grow.insert(q.index.rank_at(t1));
            for t in t1 + 1..=k {
                q.shrink.insert(q.index.rank_at(t));
            }
        }
        for i in t1..k {
            let len_l = i - t1 + 1;
            let len_r = k - i;
            if len_l >= *ms && len_r >= *ms {
                let ok_l = eval_stacked(
                    spec,
                    ts,
                    *cache,
                    quant.as_ref().map(|q| (&q.index, &q.grow)),
                    t1,
                    i,
                    est_a,
                    eval_scratch,
                )?;
                let ok_r = ok_l
                    && eval_stacked(
                        spec,
                        ts,
                        *cache,
                        quant.as_ref().map(|q| (&q.index, &q.shrink)),
                        i + 1,
                        k,
                        est_b,
                        eval_scratch,
                    )?;
                if ok_l && ok_r {
                    let w = (len_l * len_r) as f64;
                    accumulate_outer(out, est_a, est_b, w, d);
                }
            }
            if let Some(q) = quant.as_mut() {
                if i + 1 <= k {
                    let r = q.index.rank_at(i + 1);
                    q.grow.insert(r);
                    q.shrink.remove(r);
                }
            }
        }
        Ok(())
    }

    /// Mirror branch over `j in k+1..t2-1`:
    /// `sum_j ((j-k)(t2-j) (est(j+1,t2) - est(k+1,j)))^{x2}`.
    fn branch_right(&mut self, k: usize, t2: usize, out_off: usize) -> Result<()> {
        let d = self.d;
        let dd = d * (d + 1) / 2;
        let Self {
            spec,
            ts,
            cache,
            quant,
            eval_scratch,
            est_a,
            est_b,
            rmats,
            ms,
            ..
        } = self;
        let out = &mut rmats[out_off..out_off + dd];
        out.fill(0.0);
        if let Some(q) = quant.as_mut() {
            q.grow.clear();
            q.shrink.clear();
            q.grow.insert(q.index.rank_at(k + 1));
            for t in k + 2..=t2 {
                q.shrink.insert(q.index.rank_at(t));
            }
        }
        for j in k + 1..t2 {
            let len_l = j - k;
            let len_r = t2 - j;
            if len_l >= *ms && len_r >= *ms {
                let ok_a = eval_stacked(
                    spec,
                    ts,
                    *cache,
                    quant.as_ref().map(|q| (&q.index, &q.shrink)),
                    j + 1,
                    t2,
                    est_a,
                    eval_scratch,
                )?;
                let ok_b = ok_a
                    && eval_stacked(
                        spec,
                        ts,
                        *cache,
                        quant.as_ref().map(|q| (&q.index, &q.grow)),
                        k + 1,
                        j,
                        est_b,
                        eval_scratch,
                    )?;
                if ok_a && ok_b {
                    let w = (len_l * len_r) as f64;
                    accumulate_outer(out, est_a, est_b, w, d);
                }
            }
            if let Some(q) = quant.as_mut() {
                if j + 1 <= t2 {
                    let r = q.index.rank_at(j + 1);
                    q.grow.insert(r);
                    q.shrink.remove(r);
                }
            }
        }
        Ok(())
    }

    fn normalizer_matrix(&mut self, t1: usize, k: usize, t2: usize) -> Result<Vec<f64>> {
        let d = self.d;
        let dd = d * (d + 1) / 2;
        self.lmats.resize(dd, 0.0);
        self.rmats.resize(dd, 0.0);
        self.branch_left(t1, k, 0)?;
        self.branch_right(k, t2, 0)?;
        let wl = (t2 - t1 + 1) as f64;
        let m = (k - t1 + 1) as f64;
        let mp = (t2 - k) as f64;
        let lscale = 1.0 / (wl * wl * m * m);
        let rscale = 1.0 / (wl * wl * mp * mp);
        let mut full = vec![0.0; d * d];
        let mut idx = 0;
        for r in 0..d {
            for c in r..d {
                let v = self.lmats[idx] * lscale + self.rmats[idx] * rscale;
                full[r * d + c] = v;
                full[c * d + r] = v;
                idx += 1;
            }
        }
        Ok(full)
    }

    fn statistic(&mut self, t1: usize, k: usize, t2: usize) -> Result<f64> {
        let Some(dvec) = self.contrast_vec(t1, k, t2)? else {
            return Ok(0.0);
        };
        let v = self.normalizer_matrix(t1, k, t2)?;
        Ok(quad_form_spd(&v, self.d, &dvec, &mut self.spd))
    }

    /// Sweep `k` over `[s, e]` with all nested windows; `collect_records`
    /// retains per-window rows (the recursion skips them).
    pub(crate) fn sweep(
        &mut self,
        s: usize,
        e: usize,
        h: usize,
        collect_records: bool,
    ) -> Result<SweepResult> {
        if h < 1 {
            return Err(Error::config("window size h must be at least 1"));
        }
        if s < 1 || s >= e || e > self.ts.n() {
            return Err(Error::input(format!(
                "sweep range [{s}, {e}] invalid for n = {}",
                self.ts.n()
            )));
        }
        if let Some((kernel, scratch)) = self.kernel.as_mut() {
            return Ok(kernel.sweep(s, e, h, collect_records, scratch));
        }

        let d = self.d;
        let dd = d * (d + 1) / 2;
        let cap = (e - s + 1) / h + 1;
        self.lmats.resize(cap * dd, 0.0);
        self.rmats.resize(cap * dd, 0.0);
        self.lests.resize(cap * d, 0.0);
        self.rests.resize(cap * d, 0.0);
        self.lflags.resize(cap, EstFlag::Short);
        self.rflags.resize(cap, EstFlag::Short);

        let mut max_stats = vec![0.0; e - s + 1];
        let mut records = Vec::new();

        for k in s..=e {
            let a_count = (k - s + 1) / h;
            let b_count = (e - k) / h;
            if a_count == 0 || b_count == 0 {
                continue;
            }
            for j1 in 1..=a_count {
                let t1 = k - j1 * h + 1;
                self.lflags[j1 - 1] = if j1 * h >= self.ms {
                    match self.eval_once(t1, k, true)? {
                        Some(()) => {
                            self.lests[(j1 - 1) * d..j1 * d].copy_from_slice(&self.est_a);
                            EstFlag::Ok
                        }
                        None => EstFlag::Degenerate,
                    }
                } else {
                    EstFlag::Short
                };
                self.branch_left(t1, k, (j1 - 1) * dd)?;
            }
            for j2 in 1..=b_count {
                let t2 = k + j2 * h;
                self.rflags[j2 - 1] = if j2 * h >= self.ms {
                    match self.eval_once(k + 1, t2, false)? {
                        Some(()) => {
                            self.rests[(j2 - 1) * d..j2 * d].copy_from_slice(&self.est_b);
                            EstFlag::Ok
                        }
                        None => EstFlag::Degenerate,
                    }
                } else {
                    EstFlag::Short
                };
                self.branch_right(k, t2, (j2 - 1) * dd)?;
            }
            let mut best = 0.0_f64;
            for j1 in 1..=a_count {
                let t1 = k - j1 * h + 1;
                let m = (j1 * h) as f64;
                for j2 in 1..=b_count {
                    let t2 = k + j2 * h;
                    let mp = (j2 * h) as f64;
                    let stat = if self.lflags[j1 - 1] == EstFlag::Ok
                        && self.rflags[j2 - 1] == EstFlag::Ok
                    {
                        let wl = ((j1 + j2) * h) as f64;
                        let wl2 = wl * wl;
                        let lscale = 1.0 / (wl2 * m * m);
                        let rscale = 1.0 / (wl2 * mp * mp);
                        let lmat = &self.lmats[(j1 - 1) * dd..j1 * dd];
                        let rmat = &self.rmats[(j2 - 1) * dd..j2 * dd];
                        let mut idx = 0;
                        for r in 0..d {
                            for c in r..d {
                                let v = lmat[idx] * lscale + rmat[idx] * rscale;
                                self.vfull[r * d + c] = v;
                                self.vfull[c * d + r] = v;
                                idx += 1;
                            }
                        }
                        let coef = m * mp / (wl * wl.sqrt());
                        let lest = &self.lests[(j1 - 1) * d..j1 * d];
                        let rest = &self.rests[(j2 - 1) * d..j2 * d];
                        for j in 0..d {
                            self.dvec[j] = coef * (lest[j] - rest[j]);
                        }
                        quad_form_spd(&self.vfull, d, &self.dvec, &mut self.spd)
                    } else {
                        0.0
                    };
                    if stat > best {
                        best = stat;
                    }
                    if collect_records {
                        records.push(SweepRecord { stat, k, t1, t2 });
                    }
                }
            }
            max_stats[k - s] = best;
        }

        Ok(SweepResult {
            s,
            e,
            max_stats,
            records,
        })
    }
}

/// Stacked estimate of `[a, b]` into `out`; quantile components answer from
/// the supplied order-statistic multiset when one is active.
#[allow(clippy::too_many_arguments)]
fn eval_stacked(
    spec: &ParameterSpec,
    ts: &TimeSeriesMatrix,
    cache: Option<&PrefixCache>,
    quant: Option<(&RankIndex, &FenwickMultiset)>,
    a: usize,
    b: usize,
    out: &mut [f64],
    scratch: &mut EvalScratch,
) -> Result<bool> {
    let offsets = spec.offsets();
    for (c, &off) in spec.components().iter().zip(offsets.iter()) {
        let slot_len = c.dim(ts.p());
        let slot = &mut out[off..off + slot_len];
        let ok = match (c, quant) {
            (Component::Quantile(tau), Some((index, set))) => {
                debug_assert_eq!(set.len(), b - a + 1);
                slot[0] = set.quantile(index, *tau);
                true
            }
            _ => functionals::eval_component(c, ts, cache, a, b, slot, scratch)?,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `out += (w * (ea - eb)) (w * (ea - eb))'`, packed upper triangle.
#[inline]
fn accumulate_outer(out: &mut [f64], ea: &[f64], eb: &[f64], w: f64, d: usize) {
    if d == 1 {
        let v = w * (ea[0] - eb[0]);
        out[0] += v * v;
        return;
    }
    let mut idx = 0;
    for r in 0..d {
        let vr = w * (ea[r] - eb[r]);
        for c in r..d {
            let vc = w * (ea[c] - eb[c]);
            out[idx] += vr * vc;
            idx += 1;
        }
    }
}
