//! Selection of the functional under test: which parameter(s) of the
//! marginal distribution the detector watches for changes.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::series::Subsample;

/// A user-supplied functional evaluated on raw subsamples.
///
/// `dim` is the declared output length; every call must return exactly that
/// many finite values. `min_support` is the smallest subsample length the
/// functional accepts; shorter subsamples are skipped inside the
/// self-normalizer sums exactly like the built-in estimators skip theirs.
#[derive(Clone)]
pub struct GenericFunctional {
    pub name: String,
    pub dim: usize,
    pub min_support: usize,
    func: Arc<dyn Fn(&Subsample) -> Vec<f64> + Send + Sync>,
}

impl GenericFunctional {
    pub fn new<F>(name: impl Into<String>, dim: usize, min_support: usize, func: F) -> Self
    where
        F: Fn(&Subsample) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            min_support: min_support.max(1),
            func: Arc::new(func),
        }
    }

    pub(crate) fn eval(&self, sub: &Subsample) -> Result<Vec<f64>> {
        let out = (self.func)(sub);
        if out.len() != self.dim {
            return Err(Error::estimator(format!(
                "functional '{}' returned {} values, declared {}",
                self.name,
                out.len(),
                self.dim
            )));
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::estimator(format!(
                "functional '{}' returned a non-finite value",
                self.name
            )));
        }
        Ok(out)
    }
}

impl fmt::Debug for GenericFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericFunctional")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("min_support", &self.min_support)
            .finish()
    }
}

/// One component of the functional under test.
#[derive(Debug, Clone)]
pub enum Component {
    Mean,
    Variance,
    AcfLag1,
    BivariateCorrelation,
    /// Quantile at level `tau` in (0, 1).
    Quantile(f64),
    MultivariateMean,
    CovarianceMatrix,
    Generic(GenericFunctional),
}

impl Component {
    /// Scalar output dimension given the series dimension `p`.
    pub fn dim(&self, p: usize) -> usize {
        match self {
            Component::Mean
            | Component::Variance
            | Component::AcfLag1
            | Component::BivariateCorrelation
            | Component::Quantile(_) => 1,
            Component::MultivariateMean => p,
            Component::CovarianceMatrix => p * (p + 1) / 2,
            Component::Generic(g) => g.dim,
        }
    }

    /// Smallest subsample length on which the estimator is defined.
    pub fn min_support(&self) -> usize {
        match self {
            Component::Mean | Component::Quantile(_) => 1,
            Component::Variance
            | Component::AcfLag1
            | Component::BivariateCorrelation
            | Component::CovarianceMatrix => 2,
            Component::MultivariateMean => 1,
            Component::Generic(g) => g.min_support,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Component::Mean => "mean".into(),
            Component::Variance => "variance".into(),
            Component::AcfLag1 => "acf".into(),
            Component::BivariateCorrelation => "bivcor".into(),
            Component::Quantile(tau) => format!("q{tau}"),
            Component::MultivariateMean => "mean".into(),
            Component::CovarianceMatrix => "covariance".into(),
            Component::Generic(g) => g.name.clone(),
        }
    }

    fn is_univariate(&self) -> bool {
        matches!(
            self,
            Component::Mean | Component::Variance | Component::AcfLag1 | Component::Quantile(_)
        )
    }
}

/// The ordered list of components under test, validated against the series
/// dimension `p`. The total scalar dimension `dim_d` drives the critical
/// value lookup.
#[derive(Debug, Clone)]
pub struct ParameterSpec {
    components: Vec<Component>,
    p: usize,
    dim_d: usize,
    offsets: Vec<usize>,
}

impl ParameterSpec {
    pub fn new(components: Vec<Component>, p: usize) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::config("at least one component is required"));
        }
        if p == 0 {
            return Err(Error::config("series dimension p must be positive"));
        }
        let n_uni = components.iter().filter(|c| c.is_univariate()).count();
        let n_generic = components
            .iter()
            .filter(|c| matches!(c, Component::Generic(_)))
            .count();
        for c in &components {
            match c {
                Component::Quantile(tau) => {
                    if !(*tau > 0.0 && *tau < 1.0) {
                        return Err(Error::config(format!(
                            "quantile level must be in (0,1), got {tau}"
                        )));
                    }
                }
                Component::BivariateCorrelation => {
                    if p != 2 {
                        return Err(Error::config(format!(
                            "bivariate correlation requires p = 2, got p = {p}"
                        )));
                    }
                    if components.len() != 1 {
                        return Err(Error::config(
                            "bivariate correlation cannot be combined with other components",
                        ));
                    }
                }
                Component::MultivariateMean | Component::CovarianceMatrix => {
                    if p < 2 {
                        return Err(Error::config(format!(
                            "{} requires p >= 2, got p = {p}",
                            c.label()
                        )));
                    }
                    if components.len() != 1 {
                        return Err(Error::config(format!(
                            "{} cannot be combined with other components",
                            c.label()
                        )));
                    }
                }
                Component::Generic(g) => {
                    if g.dim == 0 {
                        return Err(Error::config(format!(
                            "functional '{}' must declare a positive output length",
                            g.name
                        )));
                    }
                }
                _ => {}
            }
        }
        // Univariate built-ins only make sense on a single series; mixing
        // them (with each other or with generic functionals) needs p = 1.
        if n_uni > 0 && p != 1 {
            return Err(Error::config(format!(
                "univariate components require p = 1, got p = {p}"
            )));
        }
        if n_generic > 0 && n_uni > 0 && p != 1 {
            return Err(Error::config(
                "generic functionals mix with univariate components only when p = 1",
            ));
        }
        let mut offsets = Vec::with_capacity(components.len());
        let mut dim_d = 0;
        for c in &components {
            offsets.push(dim_d);
            dim_d += c.dim(p);
        }
        Ok(Self {
            components,
            p,
            dim_d,
            offsets,
        })
    }

    /// Single-component convenience constructor.
    pub fn single(component: Component, p: usize) -> Result<Self> {
        Self::new(vec![component], p)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Total scalar output dimension of the functional.
    pub fn dim_d(&self) -> usize {
        self.dim_d
    }

    /// Largest minimum support over the components: subsamples shorter than
    /// this contribute nothing to contrasts or self-normalizer sums.
    pub fn min_support(&self) -> usize {
        self.components
            .iter()
            .map(|c| c.min_support())
            .max()
            .unwrap_or(1)
    }

    /// Offset of each component in the stacked estimate vector.
    pub(crate) fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn labels(&self) -> Vec<String> {
        self.components.iter().map(|c| c.label()).collect()
    }

    /// Parse CLI-style component names: `mean`, `variance`, `acf`, `bivcor`,
    /// `covariance`, or `q<level>` such as `q0.9`.
    pub fn parse_components(names: &[String], p: usize) -> Result<Self> {
        let mut comps = Vec::with_capacity(names.len());
        for name in names {
            let c = match name.trim() {
                "mean" => {
                    if p == 1 {
                        Component::Mean
                    } else {
                        Component::MultivariateMean
                    }
                }
                "variance" | "var" => Component::Variance,
                "acf" => Component::AcfLag1,
                "bivcor" => Component::BivariateCorrelation,
                "covariance" | "cov" => Component::CovarianceMatrix,
                q if q.starts_with('q') => {
                    let tau: f64 = q[1..]
                        .parse()
                        .map_err(|_| Error::config(format!("cannot parse quantile level '{q}'")))?;
                    Component::Quantile(tau)
                }
                other => {
                    return Err(Error::config(format!("unknown parameter '{other}'")));
                }
            };
            comps.push(c);
        }
        Self::new(comps, p)
    }
}
