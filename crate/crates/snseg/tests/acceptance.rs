//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS/FAIL line (run with `cargo test --test acceptance -- --nocapture`
//! to see them). Thresholds, tolerances and replication counts are pinned
//! here; reference numbers are reproduced statistically under fixed seeds.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use snseg::{
    adjusted_rand_index, gen_model_stream, hausdorff_distances, load_default_table,
    lookup_critical_value, max_sweep, nested_windows, resolve_config, simulate_null_table_at,
    simulate_snhd_table_with_dim, sncp_segment, snhd_segment, u_contrast, u_statistic, Component,
    GenericFunctional, ModelSpec, ParameterSpec, SNConfig, TableKind, TimeSeriesMatrix,
};

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

fn config_for(
    n: usize,
    dim: usize,
    epsilon: f64,
    q: f64,
    kind: TableKind,
) -> SNConfig {
    let table = load_default_table(kind).expect("shipped table");
    resolve_config(n, Some(epsilon), None, q, dim, &table).expect("resolve config")
}

#[test]
fn criterion_01_critical_value_reproduction() {
    let start = Instant::now();
    // Same generation parameters and seeds as the shipped tables, restricted
    // to the entries under test; the shared stream discipline makes the
    // restricted runs reproduce the shipped entries exactly.
    let d1 = simulate_null_table_at(TableKind::Sncp { dim: 1 }, 5000, 20000, 202601, &[0.05, 0.09, 0.10])
        .unwrap();
    let d2 =
        simulate_null_table_at(TableKind::Sncp { dim: 2 }, 4000, 20000, 202602, &[0.10]).unwrap();
    let d5 =
        simulate_null_table_at(TableKind::Sncp { dim: 5 }, 2500, 20000, 202605, &[0.05]).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let v_d1_005 = lookup_critical_value(&d1, 0.05, 0.9).unwrap();
    let v_d1_010 = lookup_critical_value(&d1, 0.10, 0.9).unwrap();
    let v_d2_010 = lookup_critical_value(&d2, 0.10, 0.9).unwrap();
    let v_d5_005 = lookup_critical_value(&d5, 0.05, 0.9).unwrap();
    let v_interp = lookup_critical_value(&d1, 102.0 / 1024.0, 0.9).unwrap();

    let checks = [
        (v_d1_005, 141.8941, "d=1 eps=0.05"),
        (v_d1_010, 110.9993, "d=1 eps=0.10"),
        (v_d2_010, 167.4226, "d=2 eps=0.10"),
        (v_d5_005, 415.8649, "d=5 eps=0.05"),
        (v_interp, 111.1472, "d=1 eps=102/1024 interpolated"),
    ];
    let mut worst = 0.0_f64;
    let mut detail = String::new();
    for (value, reference, label) in checks {
        let err = rel_err(value, reference);
        worst = worst.max(err);
        detail.push_str(&format!("{label}: {value:.4} vs {reference} ({:+.2}%); ", 100.0 * (value / reference - 1.0)));
    }

    // Regenerated entries agree with the shipped tables bit for bit.
    let shipped = load_default_table(TableKind::Sncp { dim: 1 }).unwrap();
    let same_as_shipped = (lookup_critical_value(&shipped, 0.05, 0.9).unwrap() - v_d1_005).abs()
        == 0.0
        && (lookup_critical_value(&shipped, 0.10, 0.9).unwrap() - v_d1_010).abs() == 0.0;

    detail.push_str(&format!("runtime {elapsed:.0}s; shipped-match {same_as_shipped}"));
    report(
        "1 (critical-value reproduction)",
        worst <= 0.03 && elapsed <= 600.0 && same_as_shipped,
        &detail,
    );
}

#[test]
fn criterion_02_size_control() {
    let start = Instant::now();
    let reps = 500;
    let config = config_for(1000, 1, 0.05, 0.9, TableKind::Sncp { dim: 1 });
    let spec = ParameterSpec::single(Component::Mean, 1).unwrap();
    let zeroes: usize = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let g = gen_model_stream(&ModelSpec::Ar1 { n: 1000, rho: 0.0 }, 90002, rep as u64)
                .unwrap();
            let r = sncp_segment(&g.ts, &spec, &config).unwrap();
            usize::from(r.est_cp.is_empty())
        })
        .sum();
    let frac = zeroes as f64 / reps as f64;
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "2 (size control)",
        (0.87..=0.95).contains(&frac) && elapsed <= 900.0,
        &format!("no-change fraction {frac:.3} over {reps} reps (target [0.87, 0.95]), runtime {elapsed:.0}s"),
    );
}

#[test]
fn criterion_03_power_on_mean_shifts() {
    let start = Instant::now();
    let reps = 200;
    let config = config_for(1000, 1, 0.05, 0.9, TableKind::Sncp { dim: 1 });
    let spec = ParameterSpec::single(Component::Mean, 1).unwrap();
    let outcomes: Vec<(usize, f64, f64)> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let g = gen_model_stream(&ModelSpec::M { rho: 0.0 }, 90003, rep as u64).unwrap();
            let r = sncp_segment(&g.ts, &spec, &config).unwrap();
            let (_, _, dh) = hausdorff_distances(g.true_cp(), &r.est_cp, 1000);
            let ari = adjusted_rand_index(g.true_cp(), &r.est_cp, 1000);
            (r.est_cp.len(), ari, dh)
        })
        .collect();
    let exact4 = outcomes.iter().filter(|o| o.0 == 4).count() as f64 / reps as f64;
    let mean_ari = outcomes.iter().map(|o| o.1).sum::<f64>() / reps as f64;
    let mean_dh = outcomes.iter().map(|o| o.2).sum::<f64>() / reps as f64;
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "3 (power, four mean shifts)",
        exact4 >= 0.95 && mean_ari >= 0.97 && mean_dh <= 8.0 && elapsed <= 600.0,
        &format!("m=4 fraction {exact4:.3} (>=0.95), mean ARI {mean_ari:.4} (>=0.97), mean dH {mean_dh:.2} (<=8), runtime {elapsed:.0}s"),
    );
}

#[test]
fn criterion_04_variance_segmentation() {
    let reps = 100;
    let config = config_for(1024, 1, 0.05, 0.9, TableKind::Sncp { dim: 1 });
    let spec = ParameterSpec::single(Component::Variance, 1).unwrap();
    let good: usize = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let g = gen_model_stream(&ModelSpec::V1, 90004, rep as u64).unwrap();
            let r = sncp_segment(&g.ts, &spec, &config).unwrap();
            let (_, _, dh) = hausdorff_distances(g.true_cp(), &r.est_cp, 1024);
            usize::from(r.est_cp.len() == 2 && dh <= 30.0)
        })
        .sum();
    let frac = good as f64 / reps as f64;
    report(
        "4 (variance segmentation)",
        frac >= 0.90,
        &format!("two change-points within dH<=30 in {frac:.2} of {reps} reps (>=0.90)"),
    );
}

#[test]
fn criterion_05_high_dimensional_mean() {
    let reps = 50;
    let config = config_for(600, 0, 0.05, 0.9, TableKind::Snhd);
    let good: usize = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let g = gen_model_stream(&ModelSpec::Hd, 90005, rep as u64).unwrap();
            let r = snhd_segment(&g.ts, &config).unwrap();
            let ok = r.est_cp.len() == 5
                && r.est_cp
                    .iter()
                    .zip(g.true_cp())
                    .all(|(e, t)| e.abs_diff(*t) <= 20);
            usize::from(ok)
        })
        .sum();
    let frac = good as f64 / reps as f64;
    report(
        "5 (high-dimensional mean)",
        frac >= 0.80,
        &format!("five change-points, all within 20, in {frac:.2} of {reps} reps (>=0.80)"),
    );
}

#[test]
fn criterion_06_multi_parameter() {
    let reps = 100;
    let config = config_for(1000, 2, 0.10, 0.9, TableKind::Sncp { dim: 2 });
    let spec = ParameterSpec::new(vec![Component::Variance, Component::Quantile(0.9)], 1).unwrap();
    let exact2: usize = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let g = gen_model_stream(&ModelSpec::Mp1, 90006, rep as u64).unwrap();
            let r = sncp_segment(&g.ts, &spec, &config).unwrap();
            usize::from(r.est_cp.len() == 2)
        })
        .sum();
    let frac = exact2 as f64 / reps as f64;
    report(
        "6 (variance + upper-quantile)",
        frac >= 0.75,
        &format!("m=2 fraction {frac:.2} over {reps} reps (>=0.75)"),
    );
}

/// From-scratch composition of the statistic for criterion 7: independent
/// estimators, literal weights and index ranges, its own linear solve.
mod oracle {
    #[derive(Clone, Copy)]
    pub enum OComp {
        Mean,
        Var,
        Acf,
        Quant(f64),
        /// Column mean of the given column index.
        ColMean(usize),
    }

    pub fn estimate(cols: &[Vec<f64>], comp: OComp, a: usize, b: usize) -> Option<f64> {
        let support = match comp {
            OComp::Mean | OComp::Quant(_) | OComp::ColMean(_) => 1,
            OComp::Var | OComp::Acf => 2,
        };
        if b - a + 1 < support {
            return None;
        }
        let w = &cols[0][a - 1..b];
        let m = w.len() as f64;
        match comp {
            OComp::Mean => Some(w.iter().sum::<f64>() / m),
            OComp::ColMean(c) => {
                let wc = &cols[c][a - 1..b];
                Some(wc.iter().sum::<f64>() / m)
            }
            OComp::Var => {
                let mu = w.iter().sum::<f64>() / m;
                Some(w.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / m)
            }
            OComp::Acf => {
                let mu = w.iter().sum::<f64>() / m;
                let den: f64 = w.iter().map(|v| (v - mu) * (v - mu)).sum();
                if den <= 0.0 {
                    return None;
                }
                let num: f64 = w.windows(2).map(|p| (p[0] - mu) * (p[1] - mu)).sum();
                Some(num / den)
            }
            OComp::Quant(tau) => {
                let mut s = w.to_vec();
                s.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
                let pos = 1.0 + (m - 1.0) * tau;
                let lo = pos.floor() as usize;
                let hi = pos.ceil() as usize;
                let vlo = s[lo - 1];
                Some(if hi > lo {
                    vlo + (pos - lo as f64) * (s[hi - 1] - vlo)
                } else {
                    vlo
                })
            }
        }
    }

    fn estimate_vec(cols: &[Vec<f64>], comps: &[OComp], a: usize, b: usize) -> Option<Vec<f64>> {
        comps.iter().map(|&c| estimate(cols, c, a, b)).collect()
    }

    fn min_support(comps: &[OComp]) -> usize {
        comps
            .iter()
            .map(|c| match c {
                OComp::Mean | OComp::Quant(_) | OComp::ColMean(_) => 1,
                OComp::Var | OComp::Acf => 2,
            })
            .max()
            .unwrap()
    }

    /// Literal evaluation of the defining formulas: contrast, both
    /// normalizer branches, then the quadratic form through a partial-pivot
    /// solve.
    pub fn statistic(cols: &[Vec<f64>], comps: &[OComp], t1: usize, k: usize, t2: usize) -> f64 {
        let d = comps.len();
        let ms = min_support(comps);
        let m = (k - t1 + 1) as f64;
        let mp = (t2 - k) as f64;
        let wl = (t2 - t1 + 1) as f64;
        if ((k - t1 + 1) < ms) || ((t2 - k) < ms) {
            return 0.0;
        }
        let (Some(left), Some(right)) = (
            estimate_vec(cols, comps, t1, k),
            estimate_vec(cols, comps, k + 1, t2),
        ) else {
            return 0.0;
        };
        let dvec: Vec<f64> = left
            .iter()
            .zip(&right)
            .map(|(l, r)| m * mp / wl.powf(1.5) * (l - r))
            .collect();

        let mut v = vec![0.0; d * d];
        for i in t1..=k {
            let len_l = i - t1 + 1;
            let len_r = k - i;
            if len_l < ms || len_r < ms {
                continue;
            }
            let w = ((len_l * len_r) as f64).powi(2) / (wl * wl * m * m);
            let (Some(ea), Some(eb)) = (
                estimate_vec(cols, comps, t1, i),
                estimate_vec(cols, comps, i + 1, k),
            ) else {
                continue;
            };
            for r in 0..d {
                for c in 0..d {
                    v[r * d + c] += w * (ea[r] - eb[r]) * (ea[c] - eb[c]);
                }
            }
        }
        for i in (k + 1)..=t2 {
            let len_l = t2 - i + 1;
            let len_r = i - 1 - k;
            if len_l < ms || len_r < ms {
                continue;
            }
            let w = ((len_l * len_r) as f64).powi(2) / (wl * wl * mp * mp);
            let (Some(ea), Some(eb)) = (
                estimate_vec(cols, comps, i, t2),
                estimate_vec(cols, comps, k + 1, i - 1),
            ) else {
                continue;
            };
            for r in 0..d {
                for c in 0..d {
                    v[r * d + c] += w * (ea[r] - eb[r]) * (ea[c] - eb[c]);
                }
            }
        }
        // Solve V x = D by Gaussian elimination with partial pivoting.
        let mut a = v;
        let mut x = dvec.clone();
        for col in 0..d {
            let (pivot_row, pivot) = (col..d)
                .map(|r| (r, a[r * d + col].abs()))
                .max_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
                .unwrap();
            if pivot <= 1e-300 {
                return 0.0;
            }
            if pivot_row != col {
                for c in 0..d {
                    a.swap(col * d + c, pivot_row * d + c);
                }
                x.swap(col, pivot_row);
            }
            for r in (col + 1)..d {
                let f = a[r * d + col] / a[col * d + col];
                for c in col..d {
                    a[r * d + c] -= f * a[col * d + c];
                }
                x[r] -= f * x[col];
            }
        }
        for col in (0..d).rev() {
            x[col] /= a[col * d + col];
            for r in 0..col {
                x[r] -= a[r * d + col] * x[col];
            }
        }
        dvec.iter().zip(&x).map(|(di, xi)| di * xi).sum()
    }
}

#[test]
fn criterion_07_oracle_equivalence() {
    use oracle::OComp;
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(90007);
    let mut worst = 0.0_f64;
    let mut checked_windows = 0usize;
    let mut checked_sweeps = 0usize;

    for inst in 0..200 {
        let full_sweep = inst % 4 == 0;
        let n = if full_sweep {
            rng.random_range(60..=90)
        } else {
            rng.random_range(100..=300)
        };
        let kind = rng.random_range(0..9u32);
        let p = match kind {
            7 => 2,
            8 => 3,
            _ => 1,
        };
        // Stationary AR(1)-flavored noise, mirroring the i.i.d.-noise
        // fixtures the per-operation checks use.
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(p);
        for _ in 0..p {
            let mut x = 0.0;
            let col: Vec<f64> = (0..n)
                .map(|_| {
                    x = 0.4 * x + rng.random::<f64>() - 0.5;
                    x
                })
                .collect();
            cols.push(col);
        }
        let tau = 0.2 + 0.6 * rng.random::<f64>();
        let (components, ocomps): (Vec<Component>, Vec<OComp>) = match kind {
            0 => (vec![Component::Mean], vec![OComp::Mean]),
            1 => (vec![Component::Variance], vec![OComp::Var]),
            2 => (vec![Component::AcfLag1], vec![OComp::Acf]),
            3 => (vec![Component::Quantile(tau)], vec![OComp::Quant(tau)]),
            4 => (
                vec![Component::Mean, Component::Variance],
                vec![OComp::Mean, OComp::Var],
            ),
            5 => (
                vec![Component::Variance, Component::Quantile(tau)],
                vec![OComp::Var, OComp::Quant(tau)],
            ),
            6 => (
                vec![Component::Mean, Component::AcfLag1, Component::Quantile(tau)],
                vec![OComp::Mean, OComp::Acf, OComp::Quant(tau)],
            ),
            _ => (
                vec![Component::MultivariateMean],
                (0..p).map(OComp::ColMean).collect(),
            ),
        };
        let spec = ParameterSpec::new(components, p).unwrap();
        let ts = TimeSeriesMatrix::from_columns(cols.clone()).unwrap();
        let cache = snseg::build_prefix_cache(&ts, &spec);

        if full_sweep {
            // Entire sweep against the brute-force composition.
            let h = rng.random_range(8..=12);
            let sw = max_sweep(&spec, &ts, 1, n, h, Some(&cache)).unwrap();
            for k in 1..=n {
                let windows = nested_windows(k, h, 1, n);
                let want = windows
                    .pairs
                    .iter()
                    .map(|&(t1, t2)| oracle::statistic(&cols, &ocomps, t1, k, t2))
                    .fold(0.0_f64, f64::max);
                let got = sw.stat_at(k);
                let err = (got - want).abs() / want.abs().max(1.0);
                assert!(
                    err <= 1e-10,
                    "instance {inst} kind {kind} full sweep at k={k}: {got} vs {want}"
                );
                worst = worst.max(err);
            }
            checked_sweeps += 1;
        } else {
            // Sampled windows with comfortable sides.
            for _ in 0..4 {
                let side = rng.random_range(8..=n / 3);
                let k = rng.random_range(side..=n - side);
                let t1 = k + 1 - side;
                let t2 = k + side;
                let got = snseg::test_statistic(&spec, &ts, t1, k, t2, Some(&cache)).unwrap();
                let want = oracle::statistic(&cols, &ocomps, t1, k, t2);
                let err = (got - want).abs() / want.abs().max(1.0);
                assert!(
                    err <= 1e-10,
                    "instance {inst} kind {kind} window ({t1},{k},{t2}): {got} vs {want}"
                );
                worst = worst.max(err);
                checked_windows += 1;
            }
        }
    }

    // The high-dimensional contrast against the literal four-index sum on
    // integer fixtures: exact equality.
    let mut exact = true;
    for _ in 0..30 {
        let n = rng.random_range(8..=16);
        let p = rng.random_range(2..=4);
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.random_range(-3..=3) as f64).collect())
            .collect();
        let ts = TimeSeriesMatrix::from_columns(cols.clone()).unwrap();
        let k = rng.random_range(2..=n - 2);
        let t1 = rng.random_range(1..=k - 1);
        let t2 = rng.random_range(k + 2..=n);
        let fast = u_contrast(&ts, t1, k, t2).unwrap();
        let mut slow = 0.0;
        for j1 in t1..=k {
            for j3 in t1..=k {
                if j1 == j3 {
                    continue;
                }
                for j2 in (k + 1)..=t2 {
                    for j4 in (k + 1)..=t2 {
                        if j2 == j4 {
                            continue;
                        }
                        slow += (0..p)
                            .map(|s| {
                                (cols[s][j1 - 1] - cols[s][j2 - 1])
                                    * (cols[s][j3 - 1] - cols[s][j4 - 1])
                            })
                            .sum::<f64>();
                    }
                }
            }
        }
        exact &= fast == slow;
    }

    let elapsed = start.elapsed().as_secs_f64();
    report(
        "7 (oracle equivalence)",
        worst <= 1e-10 && exact,
        &format!(
            "{checked_windows} windows + {checked_sweeps} full sweeps within 1e-10 (worst {worst:.2e}); U-contrast exact on integers: {exact}; runtime {elapsed:.0}s"
        ),
    );
}

#[test]
fn criterion_08_generic_functional_parity() {
    let start = Instant::now();
    let reps = 20;
    let config = config_for(1024, 1, 0.05, 0.9, TableKind::Sncp { dim: 1 });
    let builtin_spec = ParameterSpec::single(Component::Variance, 1).unwrap();
    let identical: usize = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let g = gen_model_stream(&ModelSpec::V1, 90008, rep as u64).unwrap();
            let builtin = sncp_segment(&g.ts, &builtin_spec, &config).unwrap();
            let generic_spec = ParameterSpec::single(
                Component::Generic(GenericFunctional::new("var", 1, 2, |sub| {
                    let w = sub.column(0);
                    let m = w.len() as f64;
                    let mu = w.iter().sum::<f64>() / m;
                    vec![w.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / m]
                })),
                1,
            )
            .unwrap();
            let generic = sncp_segment(&g.ts, &generic_spec, &config).unwrap();
            usize::from(builtin.est_cp == generic.est_cp && !builtin.est_cp.is_empty())
        })
        .sum();
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "8 (generic-functional parity)",
        identical == reps,
        &format!("{identical}/{reps} replicates with identical nonempty est_cp; runtime {elapsed:.0}s"),
    );
}

#[test]
fn criterion_09_performance() {
    let g = gen_model_stream(&ModelSpec::V1, 90009, 0).unwrap();
    let config = config_for(1024, 1, 0.05, 0.9, TableKind::Sncp { dim: 1 });

    let builtin_spec = ParameterSpec::single(Component::Variance, 1).unwrap();
    let t0 = Instant::now();
    let builtin = sncp_segment(&g.ts, &builtin_spec, &config).unwrap();
    let builtin_secs = t0.elapsed().as_secs_f64();

    let generic_spec = ParameterSpec::single(
        Component::Generic(GenericFunctional::new("var", 1, 2, |sub| {
            let w = sub.column(0);
            let m = w.len() as f64;
            let mu = w.iter().sum::<f64>() / m;
            vec![w.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / m]
        })),
        1,
    )
    .unwrap();
    let t1 = Instant::now();
    let generic = sncp_segment(&g.ts, &generic_spec, &config).unwrap();
    let generic_secs = t1.elapsed().as_secs_f64();

    report(
        "9 (performance)",
        builtin_secs <= 5.0 && generic_secs <= 600.0 && builtin.est_cp == generic.est_cp,
        &format!(
            "built-in variance {builtin_secs:.2}s (<=5s), generic functional {generic_secs:.1}s (<=600s), est_cp {:?}",
            builtin.est_cp
        ),
    );
}

#[test]
fn criterion_10_invariant_suites() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(90010);
    let mut failures: Vec<String> = Vec::new();

    // Scale/shift invariance of T (mean and variance specs) and of the
    // high-dimensional statistic.
    {
        let n = 120;
        let data: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let mapped: Vec<f64> = data.iter().map(|v| -2.5 * v + 40.0).collect();
        for comp in [Component::Mean, Component::Variance] {
            let spec = ParameterSpec::single(comp.clone(), 1).unwrap();
            let ts1 = TimeSeriesMatrix::univariate(data.clone()).unwrap();
            let ts2 = TimeSeriesMatrix::univariate(mapped.clone()).unwrap();
            for (t1, k, t2) in [(5usize, 40usize, 100usize), (10, 60, 120)] {
                let a = snseg::test_statistic(&spec, &ts1, t1, k, t2, None).unwrap();
                let b = snseg::test_statistic(&spec, &ts2, t1, k, t2, None).unwrap();
                if (a - b).abs() > 1e-8 * a.max(1.0) {
                    failures.push(format!("T not affine-invariant for {}: {a} vs {b}", comp.label()));
                }
            }
        }
        let cols: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..60).map(|_| rng.random::<f64>()).collect())
            .collect();
        let shifted: Vec<Vec<f64>> = cols
            .iter()
            .map(|c| c.iter().map(|v| 3.0 * v + 7.0).collect())
            .collect();
        let ts1 = TimeSeriesMatrix::from_columns(cols).unwrap();
        let ts2 = TimeSeriesMatrix::from_columns(shifted).unwrap();
        let a = u_statistic(&ts1, 10, 30, 55).unwrap();
        let b = u_statistic(&ts2, 10, 30, 55).unwrap();
        if (a - b).abs() > 1e-8 * a.max(1.0) {
            failures.push(format!("U-statistic not scale/shift invariant: {a} vs {b}"));
        }
    }

    // Positive semidefiniteness of the normalizer: quadratic form in random
    // directions stays above -1e-10 * ||V||.
    {
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..80).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect())
            .collect();
        let ts = TimeSeriesMatrix::from_columns(cols).unwrap();
        let spec = ParameterSpec::single(Component::MultivariateMean, 3).unwrap();
        for (t1, k, t2) in [(1usize, 25usize, 60usize), (10, 40, 80), (20, 30, 44)] {
            let v = snseg::self_normalizer(&spec, &ts, t1, k, t2, None).unwrap();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for _ in 0..200 {
                let x: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
                let xn: f64 = x.iter().map(|v| v * v).sum::<f64>();
                let q: f64 = (0..3)
                    .map(|r| (0..3).map(|c| x[r] * v[r * 3 + c] * x[c]).sum::<f64>())
                    .sum();
                if q < -1e-10 * norm * xn {
                    failures.push(format!("normalizer not PSD at ({t1},{k},{t2}): q={q}"));
                    break;
                }
            }
        }
    }

    // Window-count identity on random anchors.
    for _ in 0..300 {
        let e = rng.random_range(20..400);
        let s = rng.random_range(1..e);
        let k = rng.random_range(s..=e);
        let h = rng.random_range(1..=25);
        let w = nested_windows(k, h, s, e);
        if w.pairs.len() != ((k - s + 1) / h) * ((e - k) / h) {
            failures.push(format!("window count broken at k={k}, h={h}, s={s}, e={e}"));
        }
    }

    // Reported change-points: spacing >= h and defining statistics above
    // the threshold (subsegment windows are subsets of full-sample windows,
    // so the top-level maxima dominate).
    {
        let config = config_for(1000, 1, 0.05, 0.9, TableKind::Sncp { dim: 1 });
        let spec = ParameterSpec::single(Component::Mean, 1).unwrap();
        for rep in 0..20 {
            let g = gen_model_stream(&ModelSpec::M { rho: 0.4 }, 90011, rep).unwrap();
            let r = sncp_segment(&g.ts, &spec, &config).unwrap();
            for w in r.est_cp.windows(2) {
                if w[1] - w[0] < config.grid_size_h {
                    failures.push(format!("gap below h: {:?}", r.est_cp));
                }
            }
            for &cp in &r.est_cp {
                if r.sweep.stat_at(cp) <= config.threshold_kn {
                    failures.push(format!("reported cp {cp} below threshold"));
                }
            }
            // Argmax location for the strong-shift fixture: within h of a
            // true change (checked on the first replicate batch).
            if rep < 10 && !r.est_cp.is_empty() {
                let (khat, _) = r.sweep.argmax();
                let near = g.true_cp().iter().any(|t| khat.abs_diff(*t) <= config.grid_size_h);
                if !near {
                    failures.push(format!("argmax {khat} not near any true change"));
                }
            }
        }
    }

    // Monotone threshold: raising the confidence never finds more
    // change-points on at least 95% of fixtures.
    {
        let spec = ParameterSpec::single(Component::Mean, 1).unwrap();
        let lo = config_for(1000, 1, 0.05, 0.9, TableKind::Sncp { dim: 1 });
        let hi = config_for(1000, 1, 0.05, 0.99, TableKind::Sncp { dim: 1 });
        let monotone: usize = (0..60u64)
            .into_par_iter()
            .map(|rep| {
                let g = gen_model_stream(&ModelSpec::M { rho: 0.4 }, 90012, rep).unwrap();
                let a = sncp_segment(&g.ts, &spec, &lo).unwrap().est_cp.len();
                let b = sncp_segment(&g.ts, &spec, &hi).unwrap().est_cp.len();
                usize::from(b <= a)
            })
            .sum();
        if (monotone as f64) < 0.95 * 60.0 {
            failures.push(format!("threshold monotonicity only {monotone}/60"));
        }
    }

    // Table monotonicity: shipped tables increase strictly in q, and in d
    // for d in 1..=5 at matching (epsilon, q).
    {
        let tables: Vec<_> = (1..=5)
            .map(|d| load_default_table(TableKind::Sncp { dim: d }).unwrap())
            .collect();
        for t in &tables {
            for row in &t.values {
                if !(row[0] < row[1] && row[1] < row[2] && row[2] < row[3] && row[3] < row[4]) {
                    failures.push(format!("q-monotonicity broken in d={:?}", t.kind));
                }
            }
        }
        let hd = load_default_table(TableKind::Snhd).unwrap();
        for row in &hd.values {
            if !(row[0] < row[4]) {
                failures.push("q-monotonicity broken in the SNHD table".into());
            }
        }
        for pair in tables.windows(2) {
            for (ei, _) in pair[0].epsilons.iter().enumerate() {
                for qi in 0..5 {
                    if pair[0].values[ei][qi] >= pair[1].values[ei][qi] {
                        failures.push(format!(
                            "d-monotonicity broken at eps index {ei}, q index {qi}"
                        ));
                    }
                }
            }
        }
    }

    // Determinism under fixed seeds: generation and segmentation.
    {
        let a = gen_model_stream(&ModelSpec::V1, 4711, 3).unwrap();
        let b = gen_model_stream(&ModelSpec::V1, 4711, 3).unwrap();
        if a.ts != b.ts {
            failures.push("generator nondeterministic".into());
        }
        let spec = ParameterSpec::single(Component::Variance, 1).unwrap();
        let config = config_for(1024, 1, 0.05, 0.9, TableKind::Sncp { dim: 1 });
        let r1 = sncp_segment(&a.ts, &spec, &config).unwrap();
        let r2 = sncp_segment(&b.ts, &spec, &config).unwrap();
        if r1.est_cp != r2.est_cp {
            failures.push("segmentation nondeterministic".into());
        }
    }

    // Monte Carlo convergence: doubling the replication count moves the
    // q=0.9 entry by less than 1.5%.
    {
        let kind = TableKind::Sncp { dim: 1 };
        let t1 = simulate_null_table_at(kind, 1000, 20000, 90013, &[0.10]).unwrap();
        let t2 = simulate_null_table_at(kind, 1000, 40000, 90013, &[0.10]).unwrap();
        let drift = rel_err(t2.values[0][0], t1.values[0][0]);
        if drift >= 0.015 {
            failures.push(format!("doubling R moved q=0.9 by {:.2}%", 100.0 * drift));
        }
    }

    // Pivotality of the high-dimensional null in p: quantiles simulated at
    // p=50 and p=100 agree within Monte Carlo error.
    {
        let a = simulate_snhd_table_with_dim(50, 300, 1500, 90014, &[0.15]).unwrap();
        let b = simulate_snhd_table_with_dim(100, 300, 1500, 90014, &[0.15]).unwrap();
        let gap = rel_err(b.values[0][0], a.values[0][0]);
        if gap >= 0.10 {
            failures.push(format!("SNHD p=50 vs p=100 differ by {:.1}%", 100.0 * gap));
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    report(
        "10 (invariant suites)",
        failures.is_empty(),
        &if failures.is_empty() {
            format!("scale/shift invariance, PSD normalizers, window counts, spacing/threshold, monotone threshold, table monotonicity, determinism, R-convergence, p-pivotality all hold; runtime {elapsed:.0}s")
        } else {
            failures.join("; ")
        },
    );
}
