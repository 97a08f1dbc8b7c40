use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use snseg::{
    load_default_table, resolve_config, segment_estimates, sncp_segment, snhd_segment, Component,
    ParameterSpec, SegmentationResult, TableKind, TimeSeriesMatrix,
};

use crate::io::{read_csv_matrix, write_atomic};
use crate::svg::render_segmentation;

#[derive(Args)]
pub struct SegmentArgs {
    /// Input CSV, one column per series (single header row auto-detected).
    #[arg(long)]
    input: PathBuf,
    /// Parameters under test, comma-separated: mean, variance, acf, bivcor,
    /// covariance, or quantile levels like q0.9.
    #[arg(long, value_delimiter = ',', conflicts_with = "hd")]
    params: Option<Vec<String>>,
    /// High-dimensional mean detection instead of a parameter list.
    #[arg(long)]
    hd: bool,
    #[arg(long, default_value_t = 0.9)]
    confidence: f64,
    /// Trimming parameter (window = floor(n * epsilon)).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Window size; takes precedence over --epsilon.
    #[arg(long)]
    grid_size: Option<usize>,
    /// Estimate the parameters on each fitted segment.
    #[arg(long)]
    estimates: bool,
    /// Write a two-panel SVG plot.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Write every evaluated window as CSV rows `stat,k,t1,t2`.
    #[arg(long)]
    sweep_out: Option<PathBuf>,
    /// Write the result document as JSON.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Versioned result document; field order is the emitted order.
#[derive(Serialize, Deserialize, PartialEq, Debug)]
pub struct ResultDoc {
    pub schema: u32,
    pub command: String,
    pub input: String,
    pub method: String,
    pub params: Vec<String>,
    pub n: usize,
    pub p: usize,
    pub epsilon: f64,
    pub grid_size: usize,
    pub confidence: f64,
    pub critical_value: f64,
    pub warnings: Vec<String>,
    pub est_cp: Vec<usize>,
    pub max_stats: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segment_estimates: Option<Vec<EstimatesDoc>>,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
pub struct EstimatesDoc {
    pub component: String,
    pub per_segment: Vec<Option<Vec<f64>>>,
}

pub fn run(args: SegmentArgs) -> Result<()> {
    let ts = read_csv_matrix(&args.input)?;
    let (result, spec_labels, estimate_spec) = run_detection(&args, &ts)?;

    for w in &result.config.warnings {
        eprintln!("warning: {w}");
    }

    let estimates = if args.estimates {
        let est = segment_estimates(&ts, &estimate_spec, &result.est_cp)?;
        Some(
            est.into_iter()
                .map(|c| EstimatesDoc {
                    component: c.label,
                    per_segment: c.per_segment,
                })
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };

    let doc = ResultDoc {
        schema: 1,
        command: "segment".into(),
        input: args.input.display().to_string(),
        method: if args.hd { "snhd" } else { "sncp" }.into(),
        params: spec_labels,
        n: ts.n(),
        p: ts.p(),
        epsilon: result.config.epsilon,
        grid_size: result.config.grid_size_h,
        confidence: result.config.confidence_q,
        critical_value: result.config.threshold_kn,
        warnings: result.config.warnings.iter().map(|w| w.to_string()).collect(),
        est_cp: result.est_cp.clone(),
        max_stats: result.sweep.max_stats.clone(),
        segment_estimates: estimates,
    };

    if result.est_cp.is_empty() {
        println!("no change-points detected (critical value {:.4})", doc.critical_value);
    } else {
        let cps: Vec<String> = result.est_cp.iter().map(|c| c.to_string()).collect();
        println!(
            "detected {} change-point(s) at {} (grid_size {}, critical value {:.4})",
            result.est_cp.len(),
            cps.join(", "),
            doc.grid_size,
            doc.critical_value
        );
    }

    if let Some(path) = &args.output {
        let mut json = serde_json::to_string_pretty(&doc)?;
        json.push('\n');
        write_atomic(path, json.as_bytes())?;
    }
    if let Some(path) = &args.sweep_out {
        let mut csv = String::from("stat,k,t1,t2\n");
        for r in &result.sweep.records {
            csv.push_str(&format!("{:.10e},{},{},{}\n", r.stat, r.k, r.t1, r.t2));
        }
        write_atomic(path, csv.as_bytes())?;
    }
    if let Some(path) = &args.plot {
        let svg = render_segmentation(
            &ts,
            &result.est_cp,
            &result.sweep.max_stats,
            doc.critical_value,
        );
        write_atomic(path, svg.as_bytes())?;
    }
    Ok(())
}

fn run_detection(
    args: &SegmentArgs,
    ts: &TimeSeriesMatrix,
) -> Result<(SegmentationResult, Vec<String>, ParameterSpec)> {
    if args.hd {
        if ts.p() < 2 {
            bail!("--hd needs a multivariate series; the input has one column");
        }
        let table = load_default_table(TableKind::Snhd)?;
        let config = resolve_config(
            ts.n(),
            args.epsilon.or(Some(0.05)),
            args.grid_size,
            args.confidence,
            0,
            &table,
        )?;
        let result = snhd_segment(ts, &config)?;
        // Per-segment estimates for the high-dimensional path are the
        // multivariate means.
        let est_spec = ParameterSpec::single(Component::MultivariateMean, ts.p())?;
        return Ok((result, vec!["hd-mean".into()], est_spec));
    }
    let names = args
        .params
        .clone()
        .unwrap_or_else(|| vec!["mean".to_string()]);
    let spec = ParameterSpec::parse_components(&names, ts.p())
        .context("interpreting --params for this input")?;
    let table = load_default_table(TableKind::Sncp { dim: spec.dim_d() })?;
    let config = resolve_config(
        ts.n(),
        args.epsilon.or(Some(0.05)),
        args.grid_size,
        args.confidence,
        spec.dim_d(),
        &table,
    )?;
    let result = sncp_segment(ts, &spec, &config)?;
    let labels = spec.labels();
    Ok((result, labels, spec))
}
