//! One sample, one method: quartiles, model fit, testing and fences, folded
//! into a drawable [`BoxplotSummary`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::{Family, ReferenceModel};
use crate::error::{Error, Result};
use crate::estimation::{estimate_chisq, estimate_normal};
use crate::fences::{bgl_fences, fences_from_threshold_general, fences_from_threshold_normal, tukey_fences, Fences};
use crate::stats::{quartile_summary, QuartileSummary, Sample};
use crate::testing::{test, Procedure, Tail};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "procedure", rename_all = "snake_case")]
pub enum Method {
    Tukey,
    Bgl,
    Pipeline(Procedure),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub method: Method,
    pub family: Family,
    pub tail: Tail,
}

impl MethodConfig {
    pub fn tukey() -> Self {
        Self { method: Method::Tukey, family: Family::Normal, tail: Tail::TwoSided }
    }

    pub fn bgl() -> Self {
        Self { method: Method::Bgl, family: Family::Normal, tail: Tail::TwoSided }
    }

    pub fn pipeline(procedure: Procedure, family: Family, tail: Tail) -> Self {
        Self { method: Method::Pipeline(procedure), family, tail }
    }

    /// Two-sided normal pipeline.
    pub fn normal(procedure: Procedure) -> Self {
        Self::pipeline(procedure, Family::Normal, Tail::TwoSided)
    }

    /// The IQR rules ignore family and tail; pin them so equal rules compare equal.
    pub fn normalized(self) -> Self {
        match self.method {
            Method::Tukey => Self::tukey(),
            Method::Bgl => Self::bgl(),
            Method::Pipeline(_) => self,
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for MethodConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.method {
            Method::Tukey => f.write_str("PCER (Tukey)"),
            Method::Bgl => f.write_str("BGL"),
            Method::Pipeline(p) => {
                write!(f, "{p}")?;
                match (self.family, self.tail) {
                    (Family::Normal, Tail::TwoSided) => Ok(()),
                    (Family::Normal, tail) => write!(f, " [normal, {tail}]"),
                    (Family::ChiSquare, tail) => write!(f, " [chi-square, {tail}]"),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotSummary {
    pub label: String,
    pub n: usize,
    pub quartiles: QuartileSummary,
    pub fences: Fences,
    pub whisker_low: f64,
    pub whisker_high: f64,
    /// Ascending indices into the sorted sample.
    pub outlier_indices: Vec<usize>,
    pub outlier_values: Vec<f64>,
    pub threshold: Option<f64>,
    pub model: Option<ReferenceModel>,
    pub config: MethodConfig,
    pub sentinel_threshold: bool,
}

/// Runs the full pipeline (or a fixed IQR rule) for one method.
pub fn analyze(sample: &Sample, config: MethodConfig) -> Result<BoxplotSummary> {
    analyze_inner(sample, config.normalized())
        .map_err(|source| Error::Analysis { method: config.normalized().label(), source: Box::new(source) })
}

fn analyze_inner(sample: &Sample, config: MethodConfig) -> Result<BoxplotSummary> {
    let quartiles = quartile_summary(sample)?;
    let label = config.label();
    let values = sample.values();

    let (mut fences, outlier_indices, threshold, model, sentinel) = match config.method {
        Method::Tukey | Method::Bgl => {
            let fences = match config.method {
                Method::Tukey => tukey_fences(&quartiles),
                _ => bgl_fences(&quartiles, sample.n()),
            };
            let outliers = (0..values.len()).filter(|&i| fences.excludes(values[i])).collect();
            (fences, outliers, None, None, false)
        }
        Method::Pipeline(procedure) => match config.family {
            Family::Normal => {
                let params = estimate_normal(&quartiles, sample)?;
                let model = params.model();
                let outcome = test(sample, &model, config.tail, procedure)?;
                let fences = fences_from_threshold_normal(&params, outcome.threshold, config.tail, label.clone())?;
                (fences, outcome.rejected, Some(outcome.threshold), Some(model), outcome.sentinel)
            }
            Family::ChiSquare => {
                let model = estimate_chisq(sample)?;
                let outcome = test(sample, &model, config.tail, procedure)?;
                let fences = fences_from_threshold_general(&model, outcome.threshold, config.tail, label.clone())?;
                (fences, outcome.rejected, Some(outcome.threshold), Some(model), outcome.sentinel)
            }
        },
    };

    let (whisker_low, whisker_high) = whiskers(values, &outlier_indices, &quartiles, &fences);

    // A retained point can sit a rounding error outside a fence that was
    // placed exactly on it; widen the fence to the point.
    if let Some(lf) = fences.lower.as_mut() {
        *lf = lf.min(whisker_low);
    }
    if let Some(uf) = fences.upper.as_mut() {
        *uf = uf.max(whisker_high);
    }

    let outlier_values = outlier_indices.iter().map(|&i| values[i]).collect();
    Ok(BoxplotSummary {
        label,
        n: sample.n(),
        quartiles,
        fences,
        whisker_low,
        whisker_high,
        outlier_indices,
        outlier_values,
        threshold,
        model,
        config,
        sentinel_threshold: sentinel,
    })
}

/// Most extreme retained observations; with nothing retained, the median
/// clamped into the fences.
fn whiskers(values: &[f64], outliers: &[usize], quartiles: &QuartileSummary, fences: &Fences) -> (f64, f64) {
    let mut flagged = outliers.iter().peekable();
    let mut low = f64::INFINITY;
    let mut high = f64::NEG_INFINITY;
    for (i, &x) in values.iter().enumerate() {
        if flagged.peek() == Some(&&i) {
            flagged.next();
            continue;
        }
        low = low.min(x);
        high = high.max(x);
    }
    if low.is_finite() {
        return (low, high);
    }
    let mut center = quartiles.median;
    if let Some(lf) = fences.lower {
        center = center.max(lf);
    }
    if let Some(uf) = fences.upper {
        center = center.min(uf);
    }
    (center, center)
}

/// Analyzes one sample under several methods, preserving their order.
pub fn analyze_all(sample: &Sample, configs: &[MethodConfig]) -> Result<Vec<BoxplotSummary>> {
    configs.iter().map(|&c| analyze(sample, c)).collect()
}
