pub mod critval;
pub mod evaluate;
pub mod score;
pub mod segment;
pub mod simulate;

use anyhow::{bail, Result};
use snseg::ModelSpec;

/// Model selection shared by `simulate` and `evaluate`.
pub fn parse_model(name: &str, rho: Option<f64>, delta: Option<f64>, n: Option<usize>) -> Result<ModelSpec> {
    let spec = match name.to_ascii_lowercase().as_str() {
        "v1" => ModelSpec::V1,
        "mp1" => ModelSpec::Mp1,
        "m2" => ModelSpec::M2,
        "hd" => ModelSpec::Hd,
        "m" => ModelSpec::M {
            rho: rho.unwrap_or(0.0),
        },
        "sa" => ModelSpec::Sa {
            delta: delta.unwrap_or_else(|| 3.0_f64.sqrt()),
        },
        "ar1" => ModelSpec::Ar1 {
            n: n.unwrap_or(1000),
            rho: rho.unwrap_or(0.0),
        },
        other => bail!("unknown model '{other}' (choose V1, MP1, M2, HD, M, SA or AR1)"),
    };
    Ok(spec)
}
