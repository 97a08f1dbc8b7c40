use anyhow::Result;
use clap::Args;
use serde::Serialize;
use std::path::PathBuf;

use snseg::gen_model;

use crate::io::{matrix_to_csv, write_atomic};

#[derive(Args)]
pub struct SimulateArgs {
    /// Model name: V1, MP1, M2, HD, M, SA or AR1.
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// AR(1) coefficient for models M and AR1.
    #[arg(long)]
    rho: Option<f64>,
    /// Shift size for model SA.
    #[arg(long)]
    delta: Option<f64>,
    /// Series length for model AR1.
    #[arg(long)]
    n: Option<usize>,
    /// Output CSV; the design truth goes to `<out>.truth.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct TruthDoc {
    n: usize,
    true_cp: Vec<usize>,
}

pub fn run(args: SimulateArgs) -> Result<()> {
    let spec = super::parse_model(&args.model, args.rho, args.delta, args.n)?;
    let generated = gen_model(&spec, args.seed)?;
    write_atomic(&args.out, matrix_to_csv(&generated.ts).as_bytes())?;
    let truth = TruthDoc {
        n: generated.ts.n(),
        true_cp: generated.true_cp().to_vec(),
    };
    let mut sidecar = args.out.clone();
    sidecar.set_extension(match args.out.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{ext}.truth.json"),
        None => "truth.json".to_string(),
    });
    let mut json = serde_json::to_string_pretty(&truth)?;
    json.push('\n');
    write_atomic(&sidecar, json.as_bytes())?;
    println!(
        "wrote {} ({} x {}) and {} (true change-points: {:?})",
        args.out.display(),
        generated.ts.n(),
        generated.ts.p(),
        sidecar.display(),
        generated.true_cp()
    );
    Ok(())
}
