//! Closed-form sweep kernel for the mean functional.
//!
//! For means, every inner contrast in the self-normalizer is a linear
//! combination of prefix sums: with P_t the centered prefix-sum vector,
//! the weighted left-branch summand at split i inside (t1..k) collapses to
//!
//!   (i-t1+1)(k-i) * (mean(t1..i) - mean(i+1..k)) = m*P_i - i*S + g,
//!
//! a vector affine in (P_i, i). Sums of squares of such terms over i are
//! answered in O(d^2) from cumulative moments of (P_i, i*P_i, P_i P_i'),
//! independent of the window length. That turns a full maximal-statistic
//! sweep into O(n * windows) work and makes the Monte Carlo null tables
//! affordable; the generic engine reproduces the same numbers (to rounding)
//! one inner loop at a time, which the oracle tests assert.

use super::{SweepRecord, SweepResult};
use crate::linalg::quad_form_pinv;
use crate::series::TimeSeriesMatrix;

pub(crate) struct MeanKernel {
    n: usize,
    d: usize,
    /// Packed symmetric size d*(d+1)/2.
    dd: usize,
    /// (n+1) x d: centered prefix sums P_t, P_0 = 0.
    pre: Vec<f64>,
    /// (n+1) x d: cumulative sums of P_u.
    sum_p: Vec<f64>,
    /// (n+1) x d: cumulative sums of u * P_u.
    sum_ip: Vec<f64>,
    /// (n+1) x dd: cumulative packed outer products P_u P_u'.
    sum_pp: Vec<f64>,
}

/// Scratch reused across sweeps so the hot loop never allocates.
#[derive(Default)]
pub(crate) struct KernelScratch {
    svec: Vec<f64>,
    gvec: Vec<f64>,
    lmats: Vec<f64>,
    rmats: Vec<f64>,
    lests: Vec<f64>,
    rests: Vec<f64>,
    vfull: Vec<f64>,
    mlow: Vec<f64>,
    dvec: Vec<f64>,
    wvec: Vec<f64>,
    invvec: Vec<f64>,
    lfacs: Vec<f64>,
    linvs: Vec<f64>,
    lfac_ok: Vec<bool>,
}

#[inline]
fn sum_sq_to(x: usize) -> f64 {
    // 1^2 + ... + x^2
    let x = x as f64;
    x * (x + 1.0) * (2.0 * x + 1.0) / 6.0
}

impl MeanKernel {
    /// Build from selected columns of a series (all columns for the
    /// multivariate mean, column 0 for the univariate one).
    pub(crate) fn from_ts(ts: &TimeSeriesMatrix, cols: &[usize]) -> Self {
        let n = ts.n();
        let d = cols.len();
        let mut raw = Vec::with_capacity(n * d);
        for &c in cols {
            raw.extend_from_slice(ts.column(c));
        }
        Self::from_columns(&raw, n, d)
    }

    /// `data` is column-major: column j occupies `data[j*n..(j+1)*n]`.
    pub(crate) fn from_columns(data: &[f64], n: usize, d: usize) -> Self {
        debug_assert_eq!(data.len(), n * d);
        let dd = d * (d + 1) / 2;
        let mut pre = vec![0.0; (n + 1) * d];
        let mut sum_p = vec![0.0; (n + 1) * d];
        let mut sum_ip = vec![0.0; (n + 1) * d];
        let mut sum_pp = vec![0.0; (n + 1) * dd];

        let means: Vec<f64> = (0..d)
            .map(|j| data[j * n..(j + 1) * n].iter().sum::<f64>() / n as f64)
            .collect();

        for t in 1..=n {
            let (prev, cur) = pre.split_at_mut(t * d);
            let prev = &prev[(t - 1) * d..];
            for j in 0..d {
                cur[j] = prev[j] + (data[j * n + t - 1] - means[j]);
            }
            let cur = &pre[t * d..(t + 1) * d];
            for j in 0..d {
                sum_p[t * d + j] = sum_p[(t - 1) * d + j] + cur[j];
                sum_ip[t * d + j] = sum_ip[(t - 1) * d + j] + t as f64 * cur[j];
            }
            let mut idx = 0;
            for r in 0..d {
                for c in r..d {
                    sum_pp[t * dd + idx] = sum_pp[(t - 1) * dd + idx] + cur[r] * cur[c];
                    idx += 1;
                }
            }
        }

        Self {
            n,
            d,
            dd,
            pre,
            sum_p,
            sum_ip,
            sum_pp,
        }
    }

    #[inline]
    fn p_at(&self, t: usize) -> &[f64] {
        &self.pre[t * self.d..(t + 1) * self.d]
    }

    /// out[packed] = sum over i in lo..=hi of (a*P_i + i*b + g)(a*P_i + i*b + g)'
    #[inline]
    fn weighted_sq_sum(&self, lo: usize, hi: usize, a: f64, b: &[f64], g: &[f64], out: &mut [f64]) {
        let d = self.d;
        let cnt = (hi - lo + 1) as f64;
        let sum_i = (lo + hi) as f64 * cnt / 2.0;
        let sum_i2 = sum_sq_to(hi) - sum_sq_to(lo - 1);
        let pp_hi = &self.sum_pp[hi * self.dd..(hi + 1) * self.dd];
        let pp_lo = &self.sum_pp[(lo - 1) * self.dd..lo * self.dd];
        let p_hi = &self.sum_p[hi * d..(hi + 1) * d];
        let p_lo = &self.sum_p[(lo - 1) * d..lo * d];
        let ip_hi = &self.sum_ip[hi * d..(hi + 1) * d];
        let ip_lo = &self.sum_ip[(lo - 1) * d..lo * d];
        let a2 = a * a;
        let mut idx = 0;
        for r in 0..d {
            let spr = p_hi[r] - p_lo[r];
            let sipr = ip_hi[r] - ip_lo[r];
            for c in r..d {
                let spc = p_hi[c] - p_lo[c];
                let sipc = ip_hi[c] - ip_lo[c];
                out[idx] = a2 * (pp_hi[idx] - pp_lo[idx])
                    + a * (sipr * b[c] + sipc * b[r])
                    + a * (spr * g[c] + spc * g[r])
                    + sum_i2 * b[r] * b[c]
                    + sum_i * (b[r] * g[c] + g[r] * b[c])
                    + cnt * g[r] * g[c];
                idx += 1;
            }
        }
    }

    /// Unnormalized left branch: sum over i in t1..k of
    /// ((i-t1+1)(k-i) * (mean(t1..i) - mean(i+1..k)))^{x2}, packed.
    /// `svec` receives S = P_k - P_{t1-1}.
    fn left_raw(&self, t1: usize, k: usize, svec: &mut [f64], gvec: &mut [f64], out: &mut [f64]) {
        let d = self.d;
        let m = (k - t1 + 1) as f64;
        let pk = self.p_at(k);
        let p0 = self.p_at(t1 - 1);
        for j in 0..d {
            let s = pk[j] - p0[j];
            svec[j] = -s;
            gvec[j] = (t1 - 1) as f64 * s - m * p0[j];
        }
        // b = -S so each term is m*P_i - i*S + g.
        self.weighted_sq_sum(t1, k, m, svec, gvec, out);
        for j in 0..d {
            svec[j] = -svec[j];
        }
    }

    /// Mirror for the right branch over j in k..t2-1 with
    /// ((t2-j)(j-k) * (mean(j+1..t2) - mean(k+1..j)))^{x2}.
    fn right_raw(&self, k: usize, t2: usize, svec: &mut [f64], gvec: &mut [f64], out: &mut [f64]) {
        let d = self.d;
        let mp = (t2 - k) as f64;
        let pt2 = self.p_at(t2);
        let pk = self.p_at(k);
        for j in 0..d {
            let s = pt2[j] - pk[j];
            svec[j] = s;
            gvec[j] = -(k as f64) * s + mp * pk[j];
        }
        self.weighted_sq_sum(k, t2 - 1, -mp, svec, gvec, out);
    }

    /// Scalar branch sum for d = 1:
    /// sum over i in lo..=hi of (a*P_i + i*b + g)^2.
    #[inline]
    fn weighted_sq_sum_scalar(&self, lo: usize, hi: usize, a: f64, b: f64, g: f64) -> f64 {
        let cnt = (hi - lo + 1) as f64;
        let sum_i = (lo + hi) as f64 * cnt / 2.0;
        let sum_i2 = sum_sq_to(hi) - sum_sq_to(lo - 1);
        let spp = self.sum_pp[hi] - self.sum_pp[lo - 1];
        let sp = self.sum_p[hi] - self.sum_p[lo - 1];
        let sip = self.sum_ip[hi] - self.sum_ip[lo - 1];
        a * a * spp
            + 2.0 * a * (sip * b + sp * g)
            + sum_i2 * b * b
            + 2.0 * sum_i * b * g
            + cnt * g * g
    }

    /// Univariate sweep with every matrix collapsed to a scalar; this is
    /// the Monte Carlo hot loop.
    fn sweep_d1(
        &self,
        s: usize,
        e: usize,
        h: usize,
        collect_records: bool,
        scratch: &mut KernelScratch,
    ) -> SweepResult {
        let mut max_stats = vec![0.0; e - s + 1];
        let mut records = Vec::new();
        let a_cap = (e - s + 1) / h + 1;
        scratch.lmats.resize(a_cap, 0.0);
        scratch.rmats.resize(a_cap, 0.0);
        scratch.lests.resize(a_cap, 0.0);
        scratch.rests.resize(a_cap, 0.0);
        // Side lengths are multiples of h; their reciprocals are shared by
        // every anchor.
        scratch.invvec.resize(2 * (a_cap + 1), 0.0);
        for j in 1..=a_cap {
            let side = (j * h) as f64;
            scratch.invvec[2 * j] = 1.0 / side;
            scratch.invvec[2 * j + 1] = 1.0 / (side * side);
        }

        for k in s..=e {
            let a_count = (k - s + 1) / h;
            let b_count = (e - k) / h;
            if a_count == 0 || b_count == 0 {
                continue;
            }
            let pk = self.pre[k];
            for j1 in 1..=a_count {
                let t1 = k - j1 * h + 1;
                let m = (j1 * h) as f64;
                let p0 = self.pre[t1 - 1];
                let sv = pk - p0;
                let g = (t1 - 1) as f64 * sv - m * p0;
                scratch.lmats[j1 - 1] =
                    self.weighted_sq_sum_scalar(t1, k, m, -sv, g) * scratch.invvec[2 * j1 + 1];
                scratch.lests[j1 - 1] = sv * scratch.invvec[2 * j1];
            }
            for j2 in 1..=b_count {
                let t2 = k + j2 * h;
                let mp = (t2 - k) as f64;
                let sv = self.pre[t2] - pk;
                let g = -(k as f64) * sv + mp * pk;
                scratch.rmats[j2 - 1] =
                    self.weighted_sq_sum_scalar(k, t2 - 1, -mp, sv, g) * scratch.invvec[2 * j2 + 1];
                scratch.rests[j2 - 1] = sv * scratch.invvec[2 * j2];
            }
            let mut best = 0.0_f64;
            if collect_records {
                for j1 in 1..=a_count {
                    let m = (j1 * h) as f64;
                    let lraw = scratch.lmats[j1 - 1];
                    let lest = scratch.lests[j1 - 1];
                    for j2 in 1..=b_count {
                        let mp = (j2 * h) as f64;
                        let wl = ((j1 + j2) * h) as f64;
                        let v = (lraw + scratch.rmats[j2 - 1]) / (wl * wl);
                        let stat = if v > 0.0 {
                            let dd =
                                m * mp / (wl * wl.sqrt()) * (lest - scratch.rests[j2 - 1]);
                            let t = dd * dd / v;
                            if t.is_finite() {
                                t
                            } else {
                                0.0
                            }
                        } else {
                            0.0
                        };
                        if stat > best {
                            best = stat;
                        }
                        records.push(SweepRecord {
                            stat,
                            k,
                            t1: k - j1 * h + 1,
                            t2: k + j2 * h,
                        });
                    }
                }
            } else {
                // Divide-free max search: stat = (m mp)^2 d^2 / (wl (l+r)),
                // so stat > best iff (m mp)^2 d^2 > best wl (l+r). Only an
                // improving window pays the division.
                for j1 in 1..=a_count {
                    let m2 = ((j1 * h) * (j1 * h)) as f64;
                    let lraw = scratch.lmats[j1 - 1];
                    let lest = scratch.lests[j1 - 1];
                    for j2 in 1..=b_count {
                        let sum = lraw + scratch.rmats[j2 - 1];
                        if sum <= 0.0 {
                            continue;
                        }
                        let diff = lest - scratch.rests[j2 - 1];
                        let mp2 = ((j2 * h) * (j2 * h)) as f64;
                        let lhs = m2 * mp2 * diff * diff;
                        let denom = ((j1 + j2) * h) as f64 * sum;
                        if lhs > best * denom {
                            let stat = lhs / denom;
                            if stat.is_finite() {
                                best = stat;
                            }
                        }
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

    /// Full sweep over `k in s..=e` with window size `h`. Equivalent to the
    /// generic engine on a pure mean spec.
    pub(crate) fn sweep(
        &self,
        s: usize,
        e: usize,
        h: usize,
        collect_records: bool,
        scratch: &mut KernelScratch,
    ) -> SweepResult {
        if self.d == 1 {
            return self.sweep_d1(s, e, h, collect_records, scratch);
        }
        let d = self.d;
        let dd = self.dd;
        let mut max_stats = vec![0.0; e - s + 1];
        let mut records = Vec::new();

        let a_cap = (e - s + 1) / h + 1;
        scratch.svec.resize(d, 0.0);
        scratch.gvec.resize(d, 0.0);
        scratch.lmats.resize(a_cap * dd, 0.0);
        scratch.rmats.resize(a_cap * dd, 0.0);
        scratch.lests.resize(a_cap * d, 0.0);
        scratch.rests.resize(a_cap * d, 0.0);
        scratch.vfull.resize(d * d, 0.0);
        scratch.mlow.resize(d * d, 0.0);
        scratch.dvec.resize(d, 0.0);
        scratch.wvec.resize(d, 0.0);
        scratch.invvec.resize(d, 0.0);

        for k in s..=e {
            let a_count = (k - s + 1) / h;
            let b_count = (e - k) / h;
            if a_count == 0 || b_count == 0 {
                continue;
            }
            // Branch matrices pre-divided by their side length squared, so
            // each window only adds two matrices and rescales by 1/wl^2.
            for j1 in 1..=a_count {
                let t1 = k - j1 * h + 1;
                let m = (j1 * h) as f64;
                self.left_raw(
                    t1,
                    k,
                    &mut scratch.svec,
                    &mut scratch.gvec,
                    &mut scratch.lmats[(j1 - 1) * dd..j1 * dd],
                );
                let inv_m2 = 1.0 / (m * m);
                for v in scratch.lmats[(j1 - 1) * dd..j1 * dd].iter_mut() {
                    *v *= inv_m2;
                }
                for j in 0..d {
                    scratch.lests[(j1 - 1) * d + j] = scratch.svec[j] / m;
                }
            }
            for j2 in 1..=b_count {
                let t2 = k + j2 * h;
                let mp = (j2 * h) as f64;
                self.right_raw(
                    k,
                    t2,
                    &mut scratch.svec,
                    &mut scratch.gvec,
                    &mut scratch.rmats[(j2 - 1) * dd..j2 * dd],
                );
                let inv_mp2 = 1.0 / (mp * mp);
                for v in scratch.rmats[(j2 - 1) * dd..j2 * dd].iter_mut() {
                    *v *= inv_mp2;
                }
                for j in 0..d {
                    scratch.rests[(j2 - 1) * d + j] = scratch.svec[j] / mp;
                }
            }
            let mut best = 0.0_f64;
            for j1 in 1..=a_count {
                let t1 = k - j1 * h + 1;
                let m = (j1 * h) as f64;
                let lmat = &scratch.lmats[(j1 - 1) * dd..j1 * dd];
                let lest = &scratch.lests[(j1 - 1) * d..j1 * d];
                for j2 in 1..=b_count {
                    let t2 = k + j2 * h;
                    let mp = (j2 * h) as f64;
                    let wl = ((j1 + j2) * h) as f64;
                    let rmat = &scratch.rmats[(j2 - 1) * dd..j2 * dd];
                    let rest = &scratch.rests[(j2 - 1) * d..j2 * d];

                    // With M = L/m^2 + R/mp^2, the statistic is
                    // (m mp)^2 / wl * delta' M^{-1} delta.
                    let mut idx = 0;
                    for r in 0..d {
                        for c in r..d {
                            scratch.mlow[c * d + r] = lmat[idx] + rmat[idx];
                            idx += 1;
                        }
                    }
                    for j in 0..d {
                        scratch.dvec[j] = lest[j] - rest[j];
                    }
                    let scale = (m * mp) * (m * mp) / wl;
                    let stat = match crate::linalg::ldl_quad_form(
                        &mut scratch.mlow,
                        d,
                        &mut scratch.dvec,
                        &mut scratch.wvec,
                        &mut scratch.invvec,
                    ) {
                        Some(q) => {
                            let t = scale * q;
                            if t.is_finite() && t > 0.0 {
                                t
                            } else {
                                0.0
                            }
                        }
                        None => {
                            // Near-singular normalizer: evaluate V at its
                            // defining scale and take the generalized
                            // inverse with the range test.
                            let wl2 = wl * wl;
                            let mut idx = 0;
                            for r in 0..d {
                                for c in r..d {
                                    let v = (lmat[idx] + rmat[idx]) / wl2;
                                    scratch.vfull[r * d + c] = v;
                                    scratch.vfull[c * d + r] = v;
                                    idx += 1;
                                }
                            }
                            let coef = m * mp / (wl * wl.sqrt());
                            for j in 0..d {
                                scratch.dvec[j] = coef * (lest[j] - rest[j]);
                            }
                            quad_form_pinv(&scratch.vfull, d, &scratch.dvec)
                        }
                    };
                    if stat > best {
                        best = stat;
                    }
                    if collect_records {
                        records.push(SweepRecord {
                            stat,
                            k,
                            t1,
                            t2,
                        });
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

    /// Largest maximal statistic over the full range; the Monte Carlo
    /// drivers only need this scalar. The multivariate path prunes against
    /// the running best with the exact bound
    /// `delta' M^{-1} delta <= delta' Lhat^{-1} delta` for `M = Lhat + Rhat`
    /// (both branches positive semidefinite), so most windows never
    /// factorize their full normalizer.
    pub(crate) fn max_statistic(&self, h: usize, scratch: &mut KernelScratch) -> f64 {
        if self.d == 1 {
            let swept = self.sweep_d1(1, self.n, h, false, scratch);
            return swept.max_stats.iter().cloned().fold(0.0, f64::max);
        }
        self.max_statistic_md(h, scratch)
    }

    fn max_statistic_md(&self, h: usize, scratch: &mut KernelScratch) -> f64 {
        let (s, e) = (1, self.n);
        let d = self.d;
        let dd = self.dd;
        let a_cap = (e - s + 1) / h + 1;
        scratch.svec.resize(d, 0.0);
        scratch.gvec.resize(d, 0.0);
        scratch.lmats.resize(a_cap * dd, 0.0);
        scratch.rmats.resize(a_cap * dd, 0.0);
        scratch.lests.resize(a_cap * d, 0.0);
        scratch.rests.resize(a_cap * d, 0.0);
        scratch.lfacs.resize(a_cap * d * d, 0.0);
        scratch.linvs.resize(a_cap * d, 0.0);
        scratch.lfac_ok.resize(a_cap, false);
        scratch.mlow.resize(d * d, 0.0);
        scratch.dvec.resize(d, 0.0);
        scratch.wvec.resize(d, 0.0);
        scratch.invvec.resize(d, 0.0);
        scratch.vfull.resize(d * d, 0.0);

        let mut best = 0.0_f64;
        for k in s..=e {
            let a_count = (k - s + 1) / h;
            let b_count = (e - k) / h;
            if a_count == 0 || b_count == 0 {
                continue;
            }
            for j1 in 1..=a_count {
                let t1 = k - j1 * h + 1;
                let m = (j1 * h) as f64;
                self.left_raw(
                    t1,
                    k,
                    &mut scratch.svec,
                    &mut scratch.gvec,
                    &mut scratch.lmats[(j1 - 1) * dd..j1 * dd],
                );
                let inv_m2 = 1.0 / (m * m);
                for v in scratch.lmats[(j1 - 1) * dd..j1 * dd].iter_mut() {
                    *v *= inv_m2;
                }
                for j in 0..d {
                    scratch.lests[(j1 - 1) * d + j] = scratch.svec[j] / m;
                }
                // Factor the left branch alone for the pruning bound.
                let fac = &mut scratch.lfacs[(j1 - 1) * d * d..j1 * d * d];
                let mut idx = 0;
                for r in 0..d {
                    for c in r..d {
                        fac[c * d + r] = scratch.lmats[(j1 - 1) * dd + idx];
                        idx += 1;
                    }
                }
                scratch.lfac_ok[j1 - 1] = crate::linalg::ldl_factor(
                    fac,
                    d,
                    &mut scratch.wvec,
                    &mut scratch.linvs[(j1 - 1) * d..j1 * d],
                );
            }
            for j2 in 1..=b_count {
                let t2 = k + j2 * h;
                let mp = (j2 * h) as f64;
                self.right_raw(
                    k,
                    t2,
                    &mut scratch.svec,
                    &mut scratch.gvec,
                    &mut scratch.rmats[(j2 - 1) * dd..j2 * dd],
                );
                let inv_mp2 = 1.0 / (mp * mp);
                for v in scratch.rmats[(j2 - 1) * dd..j2 * dd].iter_mut() {
                    *v *= inv_mp2;
                }
                for j in 0..d {
                    scratch.rests[(j2 - 1) * d + j] = scratch.svec[j] / mp;
                }
            }
            for j1 in 1..=a_count {
                let m = (j1 * h) as f64;
                let lmat = &scratch.lmats[(j1 - 1) * dd..j1 * dd];
                let lest = &scratch.lests[(j1 - 1) * d..j1 * d];
                let lfac = &scratch.lfacs[(j1 - 1) * d * d..j1 * d * d];
                let linv = &scratch.linvs[(j1 - 1) * d..j1 * d];
                let lok = scratch.lfac_ok[j1 - 1];
                for j2 in 1..=b_count {
                    let mp = (j2 * h) as f64;
                    let wl = ((j1 + j2) * h) as f64;
                    let rest = &scratch.rests[(j2 - 1) * d..j2 * d];
                    let scale = (m * mp) * (m * mp) / wl;
                    if lok {
                        for j in 0..d {
                            scratch.dvec[j] = lest[j] - rest[j];
                        }
                        let bound = scale
                            * crate::linalg::ldl_solve_quad(lfac, d, linv, &mut scratch.dvec);
                        if !(bound > best) {
                            continue;
                        }
                    }
                    let rmat = &scratch.rmats[(j2 - 1) * dd..j2 * dd];
                    let mut idx = 0;
                    for r in 0..d {
                        for c in r..d {
                            scratch.mlow[c * d + r] = lmat[idx] + rmat[idx];
                            idx += 1;
                        }
                    }
                    for j in 0..d {
                        scratch.dvec[j] = lest[j] - rest[j];
                    }
                    let stat = match crate::linalg::ldl_quad_form(
                        &mut scratch.mlow,
                        d,
                        &mut scratch.dvec,
                        &mut scratch.wvec,
                        &mut scratch.invvec,
                    ) {
                        Some(q) => {
                            let t = scale * q;
                            if t.is_finite() && t > 0.0 {
                                t
                            } else {
                                0.0
                            }
                        }
                        None => {
                            let wl2 = wl * wl;
                            let mut idx = 0;
                            for r in 0..d {
                                for c in r..d {
                                    let v = (lmat[idx] + rmat[idx]) / wl2;
                                    scratch.vfull[r * d + c] = v;
                                    scratch.vfull[c * d + r] = v;
                                    idx += 1;
                                }
                            }
                            let coef = m * mp / (wl * wl.sqrt());
                            for j in 0..d {
                                scratch.dvec[j] = coef * (lest[j] - rest[j]);
                            }
                            quad_form_pinv(&scratch.vfull, d, &scratch.dvec)
                        }
                    };
                    if stat > best {
                        best = stat;
                    }
                }
            }
        }
        best
    }
}
