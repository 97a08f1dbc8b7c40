use anyhow::{bail, Context, Result};
use clap::Args;
use std::path::PathBuf;
use std::time::Instant;

use snseg::{simulate_null_table_at, TableKind};

use crate::io::write_atomic;

#[derive(Args)]
pub struct CritvalArgs {
    /// Which null distribution: `sncp` or `snhd`.
    #[arg(long)]
    kind: String,
    /// Functional output dimension (SNCP only).
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Simulated series length.
    #[arg(long)]
    nsim: Option<usize>,
    /// Monte Carlo replications.
    #[arg(long, default_value_t = 20000)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Restrict to these trimming values (comma-separated); default is the
    /// full tabulated grid.
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// Output table file.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: CritvalArgs) -> Result<()> {
    let kind = match args.kind.as_str() {
        "sncp" => TableKind::Sncp { dim: args.d },
        "snhd" => TableKind::Snhd,
        other => bail!("unknown table kind '{other}' (sncp or snhd)"),
    };
    let n_sim = args.nsim.unwrap_or(match kind {
        TableKind::Sncp { .. } => 1000,
        TableKind::Snhd => 600,
    });
    let epsilons = args.epsilons.unwrap_or_else(snseg::epsilon_grid);
    let start = Instant::now();
    let table = simulate_null_table_at(kind, n_sim, args.reps, args.seed, &epsilons)
        .context("simulating the null table")?;
    write_atomic(&args.out, table.to_text().as_bytes())?;
    println!(
        "wrote {} ({} trimming values x {} levels, n_sim={}, reps={}, seed={}) in {:.1}s",
        args.out.display(),
        table.epsilons.len(),
        snseg::QUANTILE_LEVELS.len(),
        table.n_sim,
        table.reps,
        table.seed,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
