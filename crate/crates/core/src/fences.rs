//! Turning a significance threshold, or a fixed IQR rule, into fences.

use serde::{Deserialize, Serialize};

use crate::distributions::{normal_quantile, ReferenceModel};
use crate::error::{Error, Result};
use crate::estimation::{RobustNormalParams, IQR_TO_SIGMA};
use crate::stats::QuartileSummary;
use crate::testing::Tail;

pub const TUKEY_COEFFICIENT: f64 = 1.5;

/// Cutoffs beyond which observations are drawn as outliers.
///
/// A one-sided rule leaves the untested side `None`. `coefficient` is the
/// multiplier `k` in `Q1 - k IQR` / `Q3 + k IQR`, present only when the rule
/// can be written that way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fences {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub coefficient: Option<f64>,
    pub rule_label: String,
}

impl Fences {
    /// True when `x` lies strictly beyond a present fence.
    pub fn excludes(&self, x: f64) -> bool {
        self.lower.is_some_and(|lf| x < lf) || self.upper.is_some_and(|uf| x > uf)
    }
}

/// IQR-scale coefficient equivalent to a normal z cutoff.
pub fn coefficient_from_z(z: f64) -> f64 {
    z / IQR_TO_SIGMA - 0.5
}

/// z cutoff matching threshold `t`; two-sided splits `t` across both tails.
fn z_for_threshold(t_adj: f64, tail: Tail) -> Result<f64> {
    let tail_mass = match tail {
        Tail::TwoSided if t_adj > 0.0 && t_adj <= 1.0 => t_adj / 2.0,
        Tail::Upper | Tail::Lower if t_adj > 0.0 && t_adj < 1.0 => t_adj,
        _ => {
            return Err(Error::domain(format!("threshold {t_adj} out of range for {tail} fences")));
        }
    };
    Ok(-normal_quantile(tail_mass))
}

/// Fences `mu_hat -/+ z sigma_hat` for the normal pipeline.
pub fn fences_from_threshold_normal(
    params: &RobustNormalParams,
    t_adj: f64,
    tail: Tail,
    rule_label: impl Into<String>,
) -> Result<Fences> {
    let z = z_for_threshold(t_adj, tail)?;
    let lower = params.mu_hat - z * params.sigma_hat;
    let upper = params.mu_hat + z * params.sigma_hat;
    let (lower, upper) = match tail {
        Tail::TwoSided => (Some(lower), Some(upper)),
        Tail::Upper => (None, Some(upper)),
        Tail::Lower => (Some(lower), None),
    };
    Ok(Fences { lower, upper, coefficient: Some(coefficient_from_z(z)), rule_label: rule_label.into() })
}

/// Fences at quantiles of an arbitrary fitted model.
pub fn fences_from_threshold_general(
    model: &ReferenceModel,
    t_adj: f64,
    tail: Tail,
    rule_label: impl Into<String>,
) -> Result<Fences> {
    // Validates the range the same way as the normal path.
    z_for_threshold(t_adj, tail)?;
    let (lower, upper) = match tail {
        Tail::TwoSided => {
            let half = t_adj / 2.0;
            (Some(model.quantile(half)?), Some(model.upper_quantile(half)?))
        }
        Tail::Upper => (None, Some(model.upper_quantile(t_adj)?)),
        Tail::Lower => (Some(model.quantile(t_adj)?), None),
    };
    Ok(Fences { lower, upper, coefficient: None, rule_label: rule_label.into() })
}

fn iqr_fences(summary: &QuartileSummary, k: f64, rule_label: &str) -> Fences {
    Fences {
        lower: Some(summary.q1 - k * summary.iqr),
        upper: Some(summary.q3 + k * summary.iqr),
        coefficient: Some(k),
        rule_label: rule_label.to_string(),
    }
}

pub fn tukey_fences(summary: &QuartileSummary) -> Fences {
    iqr_fences(summary, TUKEY_COEFFICIENT, "PCER (Tukey)")
}

/// `1.5 [1 + 0.1 log10(n / 10)]`.
pub fn bgl_coefficient(n: usize) -> f64 {
    TUKEY_COEFFICIENT * (1.0 + 0.1 * (n as f64 / 10.0).log10())
}

pub fn bgl_fences(summary: &QuartileSummary, n: usize) -> Fences {
    iqr_fences(summary, bgl_coefficient(n), "BGL")
}

/// Closed-form Chauvenet coefficient, `Phi^-1(1 - 0.25/n) / 1.35 - 0.5`.
pub fn chauvenet_coefficient(n: usize) -> f64 {
    coefficient_from_z(-normal_quantile(0.25 / n as f64))
}
