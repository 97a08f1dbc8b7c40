//! Scoring of estimated change-point sets against a ground truth:
//! directed over/under-segmentation distances, their maximum (the Hausdorff
//! distance), the adjusted Rand index of the induced partitions, and
//! replication-study summaries. These score any estimate, including ones
//! produced by external methods.

use crate::error::{Error, Result};

/// Check a change-point set for use with the metrics: strictly increasing,
/// inside `(0, n)`.
pub fn validate_cp_set(cps: &[usize], n: usize) -> Result<()> {
    for w in cps.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Input("change-points must be strictly increasing".into()));
        }
    }
    if let (Some(&first), Some(&last)) = (cps.first(), cps.last()) {
        if first < 1 || last >= n {
            return Err(Error::Input(format!(
                "change-points must lie strictly inside (0, {n})"
            )));
        }
    }
    Ok(())
}

/// `(d1, d2, dH)`: `d1` is the worst distance from an estimated point to the
/// truth (over-segmentation), `d2` the worst distance from a true point to
/// the estimate (under-segmentation), `dH` their maximum. An empty estimate
/// scores `(0, n, n)` against a nonempty truth, and symmetrically; two empty
/// sets agree perfectly.
pub fn hausdorff_distances(truth: &[usize], estimate: &[usize], n: usize) -> (f64, f64, f64) {
    match (truth.is_empty(), estimate.is_empty()) {
        (true, true) => return (0.0, 0.0, 0.0),
        (false, true) => return (0.0, n as f64, n as f64),
        (true, false) => return (n as f64, 0.0, n as f64),
        _ => {}
    }
    let directed = |from: &[usize], to: &[usize]| -> f64 {
        from.iter()
            .map(|&a| {
                to.iter()
                    .map(|&b| a.abs_diff(b))
                    .min()
                    .expect("nonempty target set")
            })
            .max()
            .expect("nonempty source set") as f64
    };
    let d1 = directed(estimate, truth);
    let d2 = directed(truth, estimate);
    (d1, d2, d1.max(d2))
}

fn choose2(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index between the partitions of `1..=n` induced by the two
/// change-point sets. 1 for identical partitions; 0 in expectation for
/// unrelated ones (in particular, the single-cluster partition scores 0
/// against any nontrivial truth).
pub fn adjusted_rand_index(truth: &[usize], estimate: &[usize], n: usize) -> f64 {
    let seg_sizes = |cps: &[usize]| -> Vec<f64> {
        let mut sizes = Vec::with_capacity(cps.len() + 1);
        let mut prev = 0usize;
        for &c in cps {
            sizes.push((c - prev) as f64);
            prev = c;
        }
        sizes.push((n - prev) as f64);
        sizes
    };
    let a_sizes = seg_sizes(truth);
    let b_sizes = seg_sizes(estimate);

    // Cells of the contingency table are overlaps of the two interval
    // partitions: walk the merged boundaries.
    let mut sum_cells = 0.0;
    let mut prev = 0usize;
    let mut ti = 0usize;
    let mut ei = 0usize;
    while prev < n {
        let t_end = truth.get(ti).copied().unwrap_or(n);
        let e_end = estimate.get(ei).copied().unwrap_or(n);
        let end = t_end.min(e_end);
        sum_cells += choose2((end - prev) as f64);
        if t_end == end {
            ti += 1;
        }
        if e_end == end {
            ei += 1;
        }
        prev = end;
    }

    let sum_a: f64 = a_sizes.iter().map(|&s| choose2(s)).sum();
    let sum_b: f64 = b_sizes.iter().map(|&s| choose2(s)).sum();
    let total = choose2(n as f64);
    let expected = sum_a * sum_b / total;
    let maximum = 0.5 * (sum_a + sum_b);
    if (maximum - expected).abs() < 1e-12 {
        return 1.0; // both partitions trivial, hence identical
    }
    (sum_cells - expected) / (maximum - expected)
}

/// One replication outcome for a study summary.
#[derive(Debug, Clone)]
pub struct ReplicationRecord {
    pub truth: Vec<usize>,
    pub estimate: Vec<usize>,
    pub elapsed_secs: f64,
}

/// Aggregate over replications: the histogram of `m_hat - m0` (buckets
/// `<=-3, -2, -1, 0, 1, 2, >=3`), mean quality metrics and total wall
/// clock.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSummary {
    pub reps: usize,
    pub buckets: [usize; 7],
    pub mean_ari: f64,
    pub mean_d1: f64,
    pub mean_d2: f64,
    pub mean_dh: f64,
    pub total_elapsed_secs: f64,
}

pub const BUCKET_LABELS: [&str; 7] = ["<=-3", "-2", "-1", "0", "1", "2", ">=3"];

impl ReplicationSummary {
    /// Fraction of replications whose estimated count matched the truth.
    pub fn exact_count_fraction(&self) -> f64 {
        self.buckets[3] as f64 / self.reps as f64
    }

    /// Human-readable two-line table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str("m_hat-m0    ");
        for l in BUCKET_LABELS {
            out.push_str(&format!("{l:>8}"));
        }
        out.push_str(&format!(
            "{:>8}{:>8}{:>8}{:>8}{:>10}\n",
            "ARI", "d1", "d2", "dH", "time(s)"
        ));
        out.push_str(&format!("reps={:<7}", self.reps));
        for b in self.buckets {
            out.push_str(&format!("{b:>8}"));
        }
        out.push_str(&format!(
            "{:>8.3}{:>8.2}{:>8.2}{:>8.2}{:>10.2}\n",
            self.mean_ari, self.mean_d1, self.mean_d2, self.mean_dh, self.total_elapsed_secs
        ));
        out
    }

    /// Machine-readable row (CSV); pair with [`Self::csv_header`].
    pub fn csv_row(&self) -> String {
        let b = &self.buckets;
        format!(
            "{},{},{},{},{},{},{},{},{:.6},{:.4},{:.4},{:.4},{:.3}",
            self.reps,
            b[0],
            b[1],
            b[2],
            b[3],
            b[4],
            b[5],
            b[6],
            self.mean_ari,
            self.mean_d1,
            self.mean_d2,
            self.mean_dh,
            self.total_elapsed_secs
        )
    }

    pub fn csv_header() -> &'static str {
        "reps,le_m3,m2,m1,zero,p1,p2,ge_p3,mean_ari,mean_d1,mean_d2,mean_dh,elapsed_secs"
    }
}

/// Summarize replication outcomes against a common series length `n`.
pub fn summarize_replications(records: &[ReplicationRecord], n: usize) -> Result<ReplicationSummary> {
    if records.is_empty() {
        return Err(Error::Input("no replications to summarize".into()));
    }
    let mut buckets = [0usize; 7];
    let mut sum_ari = 0.0;
    let mut sum_d1 = 0.0;
    let mut sum_d2 = 0.0;
    let mut sum_dh = 0.0;
    let mut elapsed = 0.0;
    for r in records {
        validate_cp_set(&r.truth, n)?;
        validate_cp_set(&r.estimate, n)?;
        let diff = r.estimate.len() as i64 - r.truth.len() as i64;
        let idx = (diff.clamp(-3, 3) + 3) as usize;
        buckets[idx] += 1;
        let (d1, d2, dh) = hausdorff_distances(&r.truth, &r.estimate, n);
        sum_d1 += d1;
        sum_d2 += d2;
        sum_dh += dh;
        sum_ari += adjusted_rand_index(&r.truth, &r.estimate, n);
        elapsed += r.elapsed_secs;
    }
    let k = records.len() as f64;
    Ok(ReplicationSummary {
        reps: records.len(),
        buckets,
        mean_ari: sum_ari / k,
        mean_d1: sum_d1 / k,
        mean_d2: sum_d2 / k,
        mean_dh: sum_dh / k,
        total_elapsed_secs: elapsed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_sets_score_zero_distance() {
        assert_eq!(hausdorff_distances(&[100, 300], &[100, 300], 500), (0.0, 0.0, 0.0));
        assert_eq!(hausdorff_distances(&[], &[], 500), (0.0, 0.0, 0.0));
    }

    #[test]
    fn hand_enumerated_distances() {
        let (d1, d2, dh) = hausdorff_distances(&[200, 400], &[210, 390, 500], 600);
        assert_eq!((d1, d2, dh), (100.0, 10.0, 100.0));
    }

    #[test]
    fn empty_set_conventions() {
        assert_eq!(hausdorff_distances(&[300], &[], 600), (0.0, 600.0, 600.0));
        assert_eq!(hausdorff_distances(&[], &[300], 600), (600.0, 0.0, 600.0));
    }

    #[test]
    fn ari_of_identical_partitions_is_one() {
        assert_eq!(adjusted_rand_index(&[5], &[5], 10), 1.0);
        assert_eq!(adjusted_rand_index(&[], &[], 10), 1.0);
        assert_eq!(adjusted_rand_index(&[2, 7], &[2, 7], 9), 1.0);
    }

    #[test]
    fn single_cluster_estimate_scores_zero() {
        let ari = adjusted_rand_index(&[5], &[], 10);
        assert!(ari.abs() < 1e-12, "ari {ari}");
    }

    /// Brute-force pair counting over all C(n,2) pairs.
    fn ari_oracle(truth: &[usize], estimate: &[usize], n: usize) -> f64 {
        let labels = |cps: &[usize]| -> Vec<usize> {
            let mut lab = vec![0usize; n];
            let mut seg = 0;
            let mut next = cps.first().copied();
            let mut ci = 0;
            for (t, l) in lab.iter_mut().enumerate() {
                if let Some(b) = next {
                    if t + 1 > b {
                        seg += 1;
                        ci += 1;
                        next = cps.get(ci).copied();
                    }
                }
                *l = seg;
            }
            lab
        };
        let la = labels(truth);
        let lb = labels(estimate);
        let (mut a, mut b, mut ab) = (0.0, 0.0, 0.0);
        for i in 0..n {
            for j in (i + 1)..n {
                let same_a = la[i] == la[j];
                let same_b = lb[i] == lb[j];
                if same_a {
                    a += 1.0;
                }
                if same_b {
                    b += 1.0;
                }
                if same_a && same_b {
                    ab += 1.0;
                }
            }
        }
        let total = n as f64 * (n as f64 - 1.0) / 2.0;
        let expected = a * b / total;
        let maximum = 0.5 * (a + b);
        (ab - expected) / (maximum - expected)
    }

    #[test]
    fn ari_matches_pair_counting_oracle() {
        let cases: Vec<(Vec<usize>, Vec<usize>, usize)> = vec![
            (vec![5], vec![4], 10),
            (vec![3, 7], vec![4], 12),
            (vec![2, 4, 9], vec![2, 5, 9], 14),
            (vec![10], vec![1, 2, 3], 20),
            (vec![7, 14, 21], vec![7, 14, 21], 30),
        ];
        for (truth, est, n) in cases {
            let fast = adjusted_rand_index(&truth, &est, n);
            let want = ari_oracle(&truth, &est, n);
            assert!(
                (fast - want).abs() < 1e-12,
                "truth {truth:?} est {est:?}: {fast} vs {want}"
            );
        }
    }

    #[test]
    fn summary_buckets_and_means() {
        let records = vec![
            ReplicationRecord {
                truth: vec![50],
                estimate: vec![50],
                elapsed_secs: 0.5,
            },
            ReplicationRecord {
                truth: vec![50],
                estimate: vec![20, 50],
                elapsed_secs: 0.5,
            },
            ReplicationRecord {
                truth: vec![50],
                estimate: vec![],
                elapsed_secs: 1.0,
            },
        ];
        let s = summarize_replications(&records, 100).unwrap();
        assert_eq!(s.reps, 3);
        assert_eq!(s.buckets, [0, 0, 1, 1, 1, 0, 0]);
        assert!((s.total_elapsed_secs - 2.0).abs() < 1e-12);
        assert!(s.mean_dh > 0.0);
        assert!(s.render_table().contains("reps=3"));
        // All-exact case.
        let exact = vec![
            ReplicationRecord {
                truth: vec![30, 60],
                estimate: vec![30, 60],
                elapsed_secs: 0.1,
            };
            4
        ];
        let s = summarize_replications(&exact, 90).unwrap();
        assert_eq!(s.buckets[3], 4);
        assert_eq!(s.mean_ari, 1.0);
        assert_eq!(s.mean_dh, 0.0);
        assert!(summarize_replications(&[], 90).is_err());
    }

    #[test]
    fn validation_catches_bad_sets() {
        assert!(validate_cp_set(&[3, 3], 10).is_err());
        assert!(validate_cp_set(&[0], 10).is_err());
        assert!(validate_cp_set(&[10], 10).is_err());
        assert!(validate_cp_set(&[2, 5, 9], 10).is_ok());
        assert!(validate_cp_set(&[], 10).is_ok());
    }
}
