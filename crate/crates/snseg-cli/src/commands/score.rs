use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;
use std::path::PathBuf;

use snseg::{summarize_replications, validate_cp_set, ReplicationRecord, ReplicationSummary};

use crate::io::write_atomic;

/// Scoring hook for change-point sets produced by any method: a JSON array
/// of `{ "n": ..., "truth": [...], "estimate": [...] }` records.
#[derive(Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pairs: PathBuf,
    /// Append the summary as a machine-readable CSV row.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct PairDoc {
    n: usize,
    truth: Vec<usize>,
    estimate: Vec<usize>,
    #[serde(default)]
    elapsed_secs: f64,
}

pub fn run(args: ScoreArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.pairs)
        .with_context(|| format!("reading {}", args.pairs.display()))?;
    let pairs: Vec<PairDoc> = serde_json::from_str(&text).context("parsing the pairs file")?;
    if pairs.is_empty() {
        bail!("the pairs file holds no records");
    }
    let n = pairs[0].n;
    let mut records = Vec::with_capacity(pairs.len());
    for (i, pair) in pairs.iter().enumerate() {
        if pair.n != n {
            bail!("record {i}: series length {} differs from {}", pair.n, n);
        }
        validate_cp_set(&pair.truth, n).with_context(|| format!("record {i}: truth"))?;
        validate_cp_set(&pair.estimate, n).with_context(|| format!("record {i}: estimate"))?;
        records.push(ReplicationRecord {
            truth: pair.truth.clone(),
            estimate: pair.estimate.clone(),
            elapsed_secs: pair.elapsed_secs,
        });
    }
    let summary = summarize_replications(&records, n)?;
    print!("{}", summary.render_table());
    if let Some(path) = &args.out {
        let csv = format!("{}\n{}\n", ReplicationSummary::csv_header(), summary.csv_row());
        write_atomic(path, csv.as_bytes())?;
    }
    Ok(())
}
