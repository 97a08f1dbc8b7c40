//! Change-point estimation in the mean of a high-dimensional series.
//!
//! The contrast is a two-sample U-statistic: summed inner products of
//! cross-sample differences, estimating the squared norm of the mean shift.
//! Written out, it only involves sums of `Y_u . Y_v` over index rectangles,
//! so a 2-D cumulative Gram table answers any subsample contrast in O(1);
//! the quartic-cost literal sum exists only as a test oracle. The
//! self-normalizer stacks squared contrasts over interior splits, divided by
//! the full sample length n wherever it is evaluated.

use crate::config::UStatConfig;
use crate::error::{Error, Result};
use crate::segmenter::{recurse_segments, MethodKind, SegmentationResult};
use crate::series::TimeSeriesMatrix;
use crate::snstat::{SweepRecord, SweepResult};

/// A window side must hold at least this many points to contribute: two per
/// side for the contrast itself, four so the normalizer's interior split
/// ranges are nonempty.
pub(crate) const MIN_SIDE: usize = 4;

/// Cumulative Gram machinery for one series; O(n^2 p) to build, O(1) per
/// contrast afterwards.
pub(crate) struct UStatEngine {
    n: usize,
    /// (n+1)^2 row-major: gamma[a][b] = sum_{u<=a, v<=b} Y_u . Y_v.
    gamma: Vec<f64>,
    /// qnorm[t] = sum_{u<=t} ||Y_u||^2.
    qnorm: Vec<f64>,
}

impl UStatEngine {
    pub(crate) fn new(ts: &TimeSeriesMatrix) -> Self {
        let n = ts.n();
        let p = ts.p();
        // Row-major copy so the Gram dot products stream contiguously.
        let mut rows = vec![0.0; n * p];
        for s in 0..p {
            let col = ts.column(s);
            for t in 0..n {
                rows[t * p + s] = col[t];
            }
        }
        let w = n + 1;
        let mut gamma = vec![0.0; w * w];
        for a in 1..=n {
            let ra = &rows[(a - 1) * p..a * p];
            for b in a..=n {
                let rb = &rows[(b - 1) * p..b * p];
                let dot: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
                gamma[a * w + b] = dot;
                gamma[b * w + a] = dot;
            }
        }
        let mut qnorm = vec![0.0; n + 1];
        for t in 1..=n {
            qnorm[t] = qnorm[t - 1] + gamma[t * w + t];
        }
        // In-place 2-D prefix sum.
        for a in 1..=n {
            for b in 1..=n {
                gamma[a * w + b] +=
                    gamma[(a - 1) * w + b] + gamma[a * w + b - 1] - gamma[(a - 1) * w + b - 1];
            }
        }
        Self { n, gamma, qnorm }
    }

    /// sum_{u<=a, v<=b} Y_u . Y_v
    #[inline]
    fn gam(&self, a: usize, b: usize) -> f64 {
        self.gamma[a * (self.n + 1) + b]
    }

    /// The U-statistic contrast over sides [t1, k] and [k+1, t2], both of
    /// length >= 2. Expansion of the four-index sum into rectangle sums:
    /// with S_A, S_B the side sums and Q_A, Q_B the squared-norm sums,
    ///
    ///   D = m2(m2-1)(S_A.S_A - Q_A) + m1(m1-1)(S_B.S_B - Q_B)
    ///       - 2(m1-1)(m2-1) S_A.S_B
    #[inline]
    pub(crate) fn contrast(&self, t1: usize, k: usize, t2: usize) -> f64 {
        let m1 = (k - t1 + 1) as f64;
        let m2 = (t2 - k) as f64;
        let saa = self.gam(k, k) - 2.0 * self.gam(t1 - 1, k) + self.gam(t1 - 1, t1 - 1);
        let sbb = self.gam(t2, t2) - 2.0 * self.gam(k, t2) + self.gam(k, k);
        let sab = self.gam(k, t2) - self.gam(k, k) - self.gam(t1 - 1, t2) + self.gam(t1 - 1, k);
        let qa = self.qnorm[k] - self.qnorm[t1 - 1];
        let qb = self.qnorm[t2] - self.qnorm[k];
        m2 * (m2 - 1.0) * (saa - qa) + m1 * (m1 - 1.0) * (sbb - qb)
            - 2.0 * (m1 - 1.0) * (m2 - 1.0) * sab
    }

    /// Self-normalizer: (1/n) [ sum_{t=t1+1}^{k-2} D(t1,t,k)^2
    ///                        + sum_{t=k+2}^{t2-2} D(k+1,t,t2)^2 ],
    /// with n the full sample length, empty ranges contributing zero.
    pub(crate) fn normalizer(&self, t1: usize, k: usize, t2: usize) -> f64 {
        (self.left_inner(t1, k) + self.right_inner(k, t2)) / self.n as f64
    }

    fn left_inner(&self, t1: usize, k: usize) -> f64 {
        let mut acc = 0.0;
        if k >= t1 + 3 {
            for t in (t1 + 1)..=(k - 2) {
                let d = self.contrast(t1, t, k);
                acc += d * d;
            }
        }
        acc
    }

    fn right_inner(&self, k: usize, t2: usize) -> f64 {
        let mut acc = 0.0;
        if t2 >= k + 4 {
            for t in (k + 2)..=(t2 - 2) {
                let d = self.contrast(k + 1, t, t2);
                acc += d * d;
            }
        }
        acc
    }

    /// Window statistic D^2 / V, zero when a side is shorter than
    /// [`MIN_SIDE`] or the normalizer vanishes.
    pub(crate) fn statistic(&self, t1: usize, k: usize, t2: usize) -> f64 {
        if k - t1 + 1 < MIN_SIDE || t2 - k < MIN_SIDE {
            return 0.0;
        }
        let v = self.normalizer(t1, k, t2);
        if v <= 0.0 {
            return 0.0;
        }
        let d = self.contrast(t1, k, t2);
        d * d / v
    }

    /// Maximal statistic over the nested windows of every anchor in [s, e].
    /// Inner split sums are shared between windows with a common side.
    pub(crate) fn sweep(
        &self,
        s: usize,
        e: usize,
        h: usize,
        collect_records: bool,
    ) -> SweepResult {
        let n_inv = 1.0 / self.n as f64;
        let mut max_stats = vec![0.0; e - s + 1];
        let mut records = Vec::new();
        let cap = (e - s + 1) / h + 1;
        let mut fl = vec![0.0; cap];
        let mut fr = vec![0.0; cap];
        for k in s..=e {
            let a_count = (k - s + 1) / h;
            let b_count = (e - k) / h;
            if a_count == 0 || b_count == 0 {
                continue;
            }
            for j1 in 1..=a_count {
                fl[j1 - 1] = self.left_inner(k - j1 * h + 1, k);
            }
            for j2 in 1..=b_count {
                fr[j2 - 1] = self.right_inner(k, k + j2 * h);
            }
            let mut best = 0.0_f64;
            for j1 in 1..=a_count {
                let t1 = k - j1 * h + 1;
                for j2 in 1..=b_count {
                    let t2 = k + j2 * h;
                    let stat = if j1 * h >= MIN_SIDE && j2 * h >= MIN_SIDE {
                        let v = (fl[j1 - 1] + fr[j2 - 1]) * n_inv;
                        if v > 0.0 {
                            let d = self.contrast(t1, k, t2);
                            d * d / v
                        } else {
                            0.0
                        }
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
        SweepResult {
            s,
            e,
            max_stats,
            records,
        }
    }
}

fn check_window(n: usize, t1: usize, k: usize, t2: usize) -> Result<()> {
    if t1 < 1 || t1 > k || k >= t2 || t2 > n {
        return Err(Error::input(format!(
            "window (t1={t1}, k={k}, t2={t2}) violates 1 <= t1 <= k < t2 <= n={n}"
        )));
    }
    Ok(())
}

/// U-statistic contrast over `[t1, k]` vs `[k+1, t2]`; both sides need at
/// least two points.
pub fn u_contrast(ts: &TimeSeriesMatrix, t1: usize, k: usize, t2: usize) -> Result<f64> {
    check_window(ts.n(), t1, k, t2)?;
    if k - t1 + 1 < 2 || t2 - k < 2 {
        return Err(Error::input(
            "u_contrast needs at least two points on each side",
        ));
    }
    Ok(UStatEngine::new(ts).contrast(t1, k, t2))
}

/// Self-normalizer of the U-statistic contrast; zero when both interior
/// split ranges are empty.
pub fn u_self_normalizer(ts: &TimeSeriesMatrix, t1: usize, k: usize, t2: usize) -> Result<f64> {
    check_window(ts.n(), t1, k, t2)?;
    Ok(UStatEngine::new(ts).normalizer(t1, k, t2))
}

/// The windowed SNHD statistic; degenerate windows score zero.
pub fn u_statistic(ts: &TimeSeriesMatrix, t1: usize, k: usize, t2: usize) -> Result<f64> {
    check_window(ts.n(), t1, k, t2)?;
    Ok(UStatEngine::new(ts).statistic(t1, k, t2))
}

/// Recursive multiple change-point estimation in the high-dimensional mean,
/// thresholding the maximal windowed U-statistic.
pub fn snhd_segment(ts: &TimeSeriesMatrix, config: &UStatConfig) -> Result<SegmentationResult> {
    let n = ts.n();
    let h = config.grid_size_h;
    if ts.p() < 2 {
        return Err(Error::input("snhd_segment needs a multivariate series (p >= 2)"));
    }
    if 2 * h > n {
        return Err(Error::config(format!(
            "window size {h} too large: need 2h <= n = {n}"
        )));
    }
    let engine = UStatEngine::new(ts);
    let top = engine.sweep(1, n, h, true);
    let mut est_cp = Vec::new();
    recurse_segments(
        &mut |s, e, collect| Ok(engine.sweep(s, e, h, collect)),
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
        method: MethodKind::Snhd,
        segment_estimates: None,
    })
}
