//! Self-normalized change-point estimation (SNCP) for univariate and
//! multivariate time series, plus a U-statistic variant (SNHD) for changes
//! in the mean of high-dimensional series.
//!
//! The detector compares parameter estimates before and after each candidate
//! split point with a CUSUM-type contrast, normalizes it by a data-driven
//! quadratic form (so no long-run variance ever has to be estimated), and
//! maximizes the resulting statistic over a nested set of local windows.
//! Change-points are declared wherever the maximal statistic exceeds a
//! critical value tabulated by Monte Carlo from the pivotal null limit.
//!
//! Crate layout:
//! - [`series`], [`params`], [`config`]: input matrix, functional selection,
//!   trimming/threshold resolution.
//! - [`functionals`]: subsample estimators with prefix-sum fast paths.
//! - [`snstat`]: contrast, self-normalizer, test statistic and window sweeps.
//! - [`segmenter`]: recursive multiple change-point estimation.
//! - [`snhd`]: high-dimensional mean variant.
//! - [`critval`]: critical-value tables (generation, persistence, lookup).
//! - [`simgen`]: seeded benchmark data generators.
//! - [`metrics`]: Hausdorff distances, adjusted Rand index, replication
//!   summaries.

pub mod config;
pub mod critval;
pub mod functionals;
pub mod metrics;
pub mod params;
pub mod segmenter;
pub mod series;
pub mod simgen;
pub mod snhd;
pub mod snstat;

mod dist;
mod error;
mod linalg;

pub use config::{clamp_epsilon, resolve_config, ConfigWarning, SNConfig, UStatConfig};
pub use critval::{
    epsilon_grid, load_default_table, lookup_critical_value, simulate_null_table,
    simulate_null_table_at, simulate_snhd_table_with_dim, CriticalValueTable, TableKind,
    QUANTILE_LEVELS,
};
pub use error::{Error, Result};
pub use functionals::{build_prefix_cache, estimate_subsample, PrefixCache, SubsampleEstimate};
pub use metrics::{
    adjusted_rand_index, hausdorff_distances, summarize_replications, validate_cp_set,
    ReplicationRecord, ReplicationSummary,
};
pub use params::{Component, GenericFunctional, ParameterSpec};
pub use segmenter::{
    segment_estimates, sncp_segment, ComponentEstimates, MethodKind, SegmentationResult,
};
pub use series::{Subsample, TimeSeriesMatrix};
pub use simgen::{
    gaugpd_quantile, gen_ar1, gen_ar1_stream, gen_model, gen_model_stream, GeneratedSeries,
    ModelSpec,
};
pub use snhd::{snhd_segment, u_contrast, u_self_normalizer, u_statistic};
pub use snstat::{
    contrast, max_sweep, nested_windows, self_normalizer, test_statistic, Contrast, SweepRecord,
    SweepResult, WindowSet,
};
