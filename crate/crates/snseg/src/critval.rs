//! Critical-value tables for the pivotal null distributions.
//!
//! Under no change the maximal statistic has a limiting distribution free of
//! everything but the trimming `epsilon` (and, for SNCP, the functional's
//! output dimension `d`), so thresholds can be tabulated once: simulate
//! i.i.d. standard normal data, sweep the maximal statistic with the mean
//! functional, and record empirical quantiles of the per-replication maxima.
//! Tables ship with the crate and are regenerable; `SNSEG_TABLE_DIR`
//! overrides the table directory at runtime.
//!
//! Replicate `r` always draws from stream `r` of the seeded generator, so
//! parallel generation is deterministic and independent of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use std::path::Path;

use crate::dist::phi_inv;
use crate::error::{Error, Result};
use crate::functionals::quantile_sorted;
use crate::series::TimeSeriesMatrix;
use crate::snhd::UStatEngine;
use crate::snstat::{KernelScratch, MeanKernel};

mod embedded;

/// Confidence levels carried by every table, ascending.
pub const QUANTILE_LEVELS: [f64; 5] = [0.9, 0.95, 0.99, 0.995, 0.999];

/// Largest SNCP dimension shipped with the crate.
pub const MAX_SHIPPED_DIM: usize = 10;

/// Default simulated length and replication count for production tables.
pub const DEFAULT_N_SIM: usize = 1000;
pub const DEFAULT_N_SIM_HD: usize = 600;
pub const DEFAULT_REPS: usize = 20000;

/// Data dimension used when simulating the SNHD null.
pub const SNHD_SIM_DIM: usize = 50;

/// The tabulated trimming grid: 0.05..0.15 in steps of 0.01, then
/// 0.20..0.50 in steps of 0.05.
pub fn epsilon_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (5..=15).map(|i| i as f64 / 100.0).collect();
    grid.extend((4..=10).map(|i| i as f64 / 20.0));
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    /// Fixed-dimensional SNCP statistic with functional dimension `dim`.
    Sncp { dim: usize },
    /// High-dimensional mean statistic (dimension-free lookup).
    Snhd,
}

impl TableKind {
    fn token(&self) -> &'static str {
        match self {
            TableKind::Sncp { .. } => "sncp",
            TableKind::Snhd => "snhd",
        }
    }

    /// Conventional file name inside a table directory.
    pub fn file_name(&self) -> String {
        match self {
            TableKind::Sncp { dim } => format!("sncp_d{dim}.txt"),
            TableKind::Snhd => "snhd.txt".to_string(),
        }
    }
}

/// One simulated table: per-epsilon critical values at the five confidence
/// levels, plus generation metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalValueTable {
    pub kind: TableKind,
    /// Data dimension used in the simulation: `dim` for SNCP, the sampled
    /// `p` for SNHD.
    pub sim_dim: usize,
    pub n_sim: usize,
    pub reps: usize,
    pub seed: u64,
    pub epsilons: Vec<f64>,
    /// `values[i][qi]` pairs with `epsilons[i]` and `QUANTILE_LEVELS[qi]`.
    pub values: Vec<[f64; 5]>,
}

impl CriticalValueTable {
    pub(crate) fn check_dimension(&self, dim_d: usize) -> Result<()> {
        match self.kind {
            TableKind::Sncp { dim } if dim != dim_d => Err(Error::table(format!(
                "table was simulated for dimension {dim}, spec has dimension {dim_d}"
            ))),
            _ => Ok(()),
        }
    }

    /// Plain-text serialization: one header line
    /// `kind d n_sim reps seed`, then `epsilon q value` rows with the value
    /// at 10 significant digits. Loading and re-saving is byte-identical.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            self.kind.token(),
            self.sim_dim,
            self.n_sim,
            self.reps,
            self.seed
        ));
        for (eps, row) in self.epsilons.iter().zip(self.values.iter()) {
            for (q, v) in QUANTILE_LEVELS.iter().zip(row.iter()) {
                out.push_str(&format!("{} {} {:.9e}\n", eps, q, v));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::table("empty table file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::table(format!(
                "header needs 5 fields (kind d n_sim reps seed), got {}",
                fields.len()
            )));
        }
        let sim_dim: usize = parse_field(fields[1], "d")?;
        let kind = match fields[0] {
            "sncp" => TableKind::Sncp { dim: sim_dim },
            "snhd" => TableKind::Snhd,
            other => return Err(Error::table(format!("unknown table kind '{other}'"))),
        };
        let n_sim = parse_field(fields[2], "n_sim")?;
        let reps = parse_field(fields[3], "reps")?;
        let seed = parse_field(fields[4], "seed")?;

        let mut epsilons: Vec<f64> = Vec::new();
        let mut values: Vec<[f64; 5]> = Vec::new();
        let mut qi = 0usize;
        for line in lines {
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 3 {
                return Err(Error::table(format!("bad row '{line}'")));
            }
            let eps: f64 = parse_field(cols[0], "epsilon")?;
            let q: f64 = parse_field(cols[1], "q")?;
            let v: f64 = parse_field(cols[2], "value")?;
            if qi == 0 {
                if let Some(&last) = epsilons.last() {
                    if eps <= last {
                        return Err(Error::table("epsilon grid must be strictly increasing"));
                    }
                }
                epsilons.push(eps);
                values.push([0.0; 5]);
            } else if (eps - *epsilons.last().unwrap()).abs() > 1e-12 {
                return Err(Error::table(format!(
                    "expected {} quantile rows per epsilon",
                    QUANTILE_LEVELS.len()
                )));
            }
            if (q - QUANTILE_LEVELS[qi]).abs() > 1e-9 {
                return Err(Error::table(format!(
                    "expected q = {} in row '{line}'",
                    QUANTILE_LEVELS[qi]
                )));
            }
            values.last_mut().unwrap()[qi] = v;
            qi = (qi + 1) % QUANTILE_LEVELS.len();
        }
        if qi != 0 || epsilons.is_empty() {
            return Err(Error::table("truncated table"));
        }
        for row in &values {
            for w in row.windows(2) {
                if w[1] < w[0] {
                    return Err(Error::table(
                        "critical values must be non-decreasing in the confidence level",
                    ));
                }
            }
        }
        Ok(Self {
            kind,
            sim_dim,
            n_sim,
            reps,
            seed,
            epsilons,
            values,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::table(format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(&text)
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, name: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::table(format!("cannot parse {name} from '{s}'")))
}

/// Critical value at `(epsilon, q)`: exact grid hits return the tabulated
/// value, anything between two grid points is linearly interpolated.
pub fn lookup_critical_value(table: &CriticalValueTable, epsilon: f64, q: f64) -> Result<f64> {
    let qi = QUANTILE_LEVELS
        .iter()
        .position(|s| (s - q).abs() < 1e-9)
        .ok_or_else(|| {
            Error::table(format!(
                "confidence {q} unsupported; tabulated: {QUANTILE_LEVELS:?}"
            ))
        })?;
    let eps = &table.epsilons;
    let lo = eps[0];
    let hi = eps[eps.len() - 1];
    if epsilon < lo - 1e-9 || epsilon > hi + 1e-9 {
        return Err(Error::table(format!(
            "epsilon {epsilon} outside the tabulated range [{lo}, {hi}]"
        )));
    }
    // Exact hit.
    if let Some(i) = eps.iter().position(|e| (e - epsilon).abs() < 1e-9) {
        return Ok(table.values[i][qi]);
    }
    let upper = eps.partition_point(|e| *e < epsilon);
    let (i0, i1) = (upper - 1, upper);
    let w = (epsilon - eps[i0]) / (eps[i1] - eps[i0]);
    Ok((1.0 - w) * table.values[i0][qi] + w * table.values[i1][qi])
}

/// Simulate a table over the full trimming grid.
pub fn simulate_null_table(
    kind: TableKind,
    n_sim: usize,
    reps: usize,
    seed: u64,
) -> Result<CriticalValueTable> {
    simulate_null_table_at(kind, n_sim, reps, seed, &epsilon_grid())
}

/// Simulate a table restricted to the given trimming values (ascending,
/// within the standard grid range). Replicate `r` draws one series from
/// stream `r` and is swept at every trimming, so restricting the grid only
/// restricts the work.
pub fn simulate_null_table_at(
    kind: TableKind,
    n_sim: usize,
    reps: usize,
    seed: u64,
    epsilons: &[f64],
) -> Result<CriticalValueTable> {
    simulate_null_table_impl(kind, SNHD_SIM_DIM, n_sim, reps, seed, epsilons)
}

/// SNHD table simulated at a non-default data dimension; the limit is
/// pivotal in `p`, which the robustness checks verify empirically.
pub fn simulate_snhd_table_with_dim(
    data_dim: usize,
    n_sim: usize,
    reps: usize,
    seed: u64,
    epsilons: &[f64],
) -> Result<CriticalValueTable> {
    if data_dim < 2 {
        return Err(Error::config("SNHD simulation needs p >= 2"));
    }
    simulate_null_table_impl(TableKind::Snhd, data_dim, n_sim, reps, seed, epsilons)
}

fn simulate_null_table_impl(
    kind: TableKind,
    hd_dim: usize,
    n_sim: usize,
    reps: usize,
    seed: u64,
    epsilons: &[f64],
) -> Result<CriticalValueTable> {
    if n_sim < 100 {
        return Err(Error::config(format!(
            "n_sim = {n_sim} too small to approximate the null (need >= 100; production tables use >= 500)"
        )));
    }
    if reps < 100 {
        return Err(Error::config(format!("reps = {reps} too small (need >= 100)")));
    }
    if epsilons.is_empty() {
        return Err(Error::config("need at least one epsilon"));
    }
    for w in epsilons.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::config("epsilons must be strictly increasing"));
        }
    }
    let sim_dim = match kind {
        TableKind::Sncp { dim } => {
            if dim == 0 {
                return Err(Error::config("dimension must be positive"));
            }
            dim
        }
        TableKind::Snhd => hd_dim,
    };
    let min_h = match kind {
        TableKind::Sncp { .. } => 1,
        // SNHD windows need four points per side to contribute at all.
        TableKind::Snhd => crate::snhd::MIN_SIDE,
    };
    let windows: Vec<usize> = epsilons
        .iter()
        .map(|eps| {
            let h = (n_sim as f64 * eps).floor() as usize;
            if h < min_h || 2 * h > n_sim {
                Err(Error::config(format!(
                    "epsilon {eps} gives window {h}, unusable for n_sim = {n_sim}"
                )))
            } else {
                Ok(h)
            }
        })
        .collect::<Result<_>>()?;

    // maxima[r][e]: per-replication maxima across the trimming grid.
    let maxima: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(rep as u64);
            let data = draw_standard_normal(&mut rng, n_sim * sim_dim);
            match kind {
                TableKind::Sncp { dim } => {
                    let kernel = MeanKernel::from_columns(&data, n_sim, dim);
                    let mut scratch = KernelScratch::default();
                    windows
                        .iter()
                        .map(|&h| kernel.max_statistic(h, &mut scratch))
                        .collect()
                }
                TableKind::Snhd => {
                    let ts = TimeSeriesMatrix::from_column_major(data, n_sim, sim_dim);
                    let engine = UStatEngine::new(&ts);
                    windows
                        .iter()
                        .map(|&h| {
                            let sw = engine.sweep(1, n_sim, h, false);
                            sw.max_stats.iter().cloned().fold(0.0, f64::max)
                        })
                        .collect()
                }
            }
        })
        .collect();

    let mut values = Vec::with_capacity(epsilons.len());
    let mut column = vec![0.0; reps];
    for ei in 0..epsilons.len() {
        for (r, row) in maxima.iter().enumerate() {
            column[r] = row[ei];
        }
        column.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let mut row = [0.0; 5];
        for (qi, q) in QUANTILE_LEVELS.iter().enumerate() {
            row[qi] = quantile_sorted(&column, *q);
        }
        values.push(row);
    }

    Ok(CriticalValueTable {
        kind,
        sim_dim,
        n_sim,
        reps,
        seed,
        epsilons: epsilons.to_vec(),
        values,
    })
}

/// Inverse-transform standard normals: reproducible for a given stream.
pub(crate) fn draw_standard_normal(rng: &mut ChaCha12Rng, count: usize) -> Vec<f64> {
    (0..count)
        .map(|_| {
            loop {
                let u: f64 = rng.random();
                if u > 0.0 {
                    return phi_inv(u);
                }
            }
        })
        .collect()
}

/// Load the table for `kind`: from `SNSEG_TABLE_DIR` when set, otherwise
/// the tables shipped inside the crate (SNCP dimensions 1..=10 and SNHD).
pub fn load_default_table(kind: TableKind) -> Result<CriticalValueTable> {
    if let Ok(dir) = std::env::var("SNSEG_TABLE_DIR") {
        if !dir.is_empty() {
            let path = Path::new(&dir).join(kind.file_name());
            return CriticalValueTable::load(&path);
        }
    }
    match embedded::table_text(kind) {
        Some(text) => CriticalValueTable::from_text(text),
        None => match kind {
            TableKind::Sncp { dim } => Err(Error::table(format!(
                "no shipped table for dimension {dim} (shipped: 1..={MAX_SHIPPED_DIM}); \
                 generate one with `snseg critval --kind sncp --d {dim}` and point \
                 SNSEG_TABLE_DIR at its directory"
            ))),
            TableKind::Snhd => Err(Error::table(
                "no shipped SNHD table; generate one with `snseg critval --kind snhd`",
            )),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_table() -> CriticalValueTable {
        CriticalValueTable {
            kind: TableKind::Sncp { dim: 1 },
            sim_dim: 1,
            n_sim: 500,
            reps: 200,
            seed: 3,
            epsilons: vec![0.05, 0.10, 0.15],
            values: vec![
                [140.0, 180.0, 260.0, 300.0, 380.0],
                [110.0, 140.0, 210.0, 240.0, 310.0],
                [90.0, 120.0, 180.0, 210.0, 280.0],
            ],
        }
    }

    #[test]
    fn text_roundtrip_is_byte_identical() {
        let table = toy_table();
        let text = table.to_text();
        let parsed = CriticalValueTable::from_text(&text).unwrap();
        assert_eq!(parsed, table);
        assert_eq!(parsed.to_text(), text);
    }

    #[test]
    fn lookup_interpolates_between_grid_points() {
        let table = toy_table();
        assert_eq!(lookup_critical_value(&table, 0.10, 0.9).unwrap(), 110.0);
        // Midpoint of [0.05, 0.10] at q=0.9: (140 + 110) / 2.
        let v = lookup_critical_value(&table, 0.075, 0.9).unwrap();
        assert!((v - 125.0).abs() < 1e-9);
        // Weighted toward the nearer grid point.
        let v = lookup_critical_value(&table, 0.0996, 0.9).unwrap();
        let w = (0.0996 - 0.05) / 0.05;
        assert!((v - ((1.0 - w) * 140.0 + w * 110.0)).abs() < 1e-9);
        assert!(lookup_critical_value(&table, 0.10, 0.91).is_err());
        assert!(lookup_critical_value(&table, 0.199, 0.9).is_err());
        assert!(lookup_critical_value(&table, 0.01, 0.9).is_err());
    }

    #[test]
    fn grid_has_the_documented_shape() {
        let grid = epsilon_grid();
        assert_eq!(grid.len(), 18);
        assert!((grid[0] - 0.05).abs() < 1e-12);
        assert!((grid[10] - 0.15).abs() < 1e-12);
        assert!((grid[11] - 0.20).abs() < 1e-12);
        assert!((grid[17] - 0.50).abs() < 1e-12);
    }

    #[test]
    fn small_simulation_is_deterministic_and_monotone() {
        let kind = TableKind::Sncp { dim: 1 };
        let eps = [0.10, 0.15];
        let t1 = simulate_null_table_at(kind, 120, 150, 9, &eps).unwrap();
        let t2 = simulate_null_table_at(kind, 120, 150, 9, &eps).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(t1.to_text(), t2.to_text());
        for row in &t1.values {
            for w in row.windows(2) {
                assert!(w[1] >= w[0], "quantiles must be monotone: {row:?}");
            }
        }
        assert!(t1.values[0][0] > 0.0);
        // A different seed changes the draw.
        let t3 = simulate_null_table_at(kind, 120, 150, 10, &eps).unwrap();
        assert_ne!(t1.values, t3.values);
    }

    #[test]
    fn rejects_unusable_parameters() {
        let kind = TableKind::Sncp { dim: 1 };
        assert!(simulate_null_table_at(kind, 50, 200, 1, &[0.1]).is_err());
        assert!(simulate_null_table_at(kind, 200, 50, 1, &[0.1]).is_err());
        assert!(simulate_null_table_at(kind, 200, 200, 1, &[]).is_err());
        assert!(simulate_null_table_at(kind, 200, 200, 1, &[0.2, 0.1]).is_err());
        // 2h > n_sim.
        assert!(simulate_null_table_at(kind, 200, 200, 1, &[0.6]).is_err());
    }

    #[test]
    fn table_dir_override_is_honored() {
        // Not set in the test environment by default; a bogus dir must fail
        // loudly rather than fall back.
        let dir = std::env::temp_dir().join("snseg_missing_tables_test");
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        let table = toy_table();
        let path = dir.join(TableKind::Sncp { dim: 1 }.file_name());
        table.save(&path).unwrap();
        let loaded = CriticalValueTable::load(&path).unwrap();
        assert_eq!(loaded, table);
        let _ = std::fs::remove_dir_all(&dir);
    }
}
