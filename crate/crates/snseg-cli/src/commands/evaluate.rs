use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;
use std::path::PathBuf;
use std::time::Instant;

use snseg::{
    gen_model_stream, load_default_table, resolve_config, sncp_segment, snhd_segment,
    summarize_replications, ParameterSpec, ReplicationRecord, ReplicationSummary, TableKind,
};

use crate::io::write_atomic;

#[derive(Args)]
pub struct EvaluateArgs {
    /// Model name: V1, MP1, M2, HD, M, SA or AR1.
    #[arg(long)]
    model: String,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 200)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Parameters under test (as in `segment`); defaults to `mean`.
    #[arg(long, value_delimiter = ',', conflicts_with = "hd")]
    params: Option<Vec<String>>,
    #[arg(long)]
    hd: bool,
    #[arg(long, default_value_t = 0.9)]
    confidence: f64,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    grid_size: Option<usize>,
    /// Append the summary as a machine-readable CSV row.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: EvaluateArgs) -> Result<()> {
    let summary = evaluate(&args)?;
    print!("{}", summary.render_table());
    println!(
        "exact recovery fraction: {:.3}",
        summary.exact_count_fraction()
    );
    if let Some(path) = &args.out {
        let csv = format!("{}\n{}\n", ReplicationSummary::csv_header(), summary.csv_row());
        write_atomic(path, csv.as_bytes())?;
    }
    Ok(())
}

fn evaluate(args: &EvaluateArgs) -> Result<ReplicationSummary> {
    let model = super::parse_model(&args.model, args.rho, args.delta, args.n)?;
    // Probe once for shapes and to fail fast on configuration errors.
    let probe = gen_model_stream(&model, args.seed, 0)?;
    let n = probe.ts.n();
    let p = probe.ts.p();

    let (spec, table) = if args.hd {
        (None, load_default_table(TableKind::Snhd)?)
    } else {
        let names = args.params.clone().unwrap_or_else(|| vec!["mean".to_string()]);
        let spec = ParameterSpec::parse_components(&names, p)?;
        let table = load_default_table(TableKind::Sncp { dim: spec.dim_d() })?;
        (Some(spec), table)
    };
    let dim = spec.as_ref().map(|s| s.dim_d()).unwrap_or(0);
    let config = resolve_config(
        n,
        args.epsilon.or(Some(0.05)),
        args.grid_size,
        args.confidence,
        dim,
        &table,
    )?;

    let records: Vec<ReplicationRecord> = (0..args.reps)
        .into_par_iter()
        .map(|rep| -> snseg::Result<ReplicationRecord> {
            let generated = gen_model_stream(&model, args.seed, rep as u64)?;
            let start = Instant::now();
            let result = match &spec {
                Some(spec) => sncp_segment(&generated.ts, spec, &config)?,
                None => snhd_segment(&generated.ts, &config)?,
            };
            Ok(ReplicationRecord {
                truth: generated.true_cp().to_vec(),
                estimate: result.est_cp,
                elapsed_secs: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<snseg::Result<Vec<_>>>()
        .context("running replications")?;

    Ok(summarize_replications(&records, n)?)
}
