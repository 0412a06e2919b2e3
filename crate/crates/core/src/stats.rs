//! Order statistics: the sorted [`Sample`], type-7 quantiles, quartiles and MAD.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest sample for which quartile-based inference is attempted.
pub const MIN_QUARTILE_N: usize = 5;

/// A nonempty set of finite observations, stored in ascending order.
///
/// Every index reported elsewhere in the crate (p-values, rejected sets,
/// outliers) refers to a position in this sorted order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    values: Vec<f64>,
    label: Option<String>,
}

impl Sample {
    /// Sorts `values` ascending. NaN and infinities are rejected, never dropped.
    pub fn new(mut values: Vec<f64>, label: Option<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values, label })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec(), None)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn median(&self) -> f64 {
        quantile_sorted(&self.values, 0.5)
    }

    /// Maps every observation through `f`, which must be monotone
    /// nondecreasing so the order (and therefore every index) is kept.
    pub fn map_monotone(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&x| f(x)).collect(), self.label.clone())
    }
}

/// Sample quartiles with the interquartile range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuartileSummary {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub iqr: f64,
}

/// Hyndman–Fan type 7 quantile: linear interpolation at `h = 1 + p(n-1)`.
pub fn quantile_type7(sample: &Sample, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("quantile probability {p} outside [0, 1]")));
    }
    Ok(quantile_sorted(&sample.values, p))
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = 1.0 + p * (n - 1) as f64;
    let lo = h.floor() as usize;
    if lo >= n {
        return sorted[n - 1];
    }
    let below = sorted[lo - 1];
    below + (h - lo as f64) * (sorted[lo] - below)
}

pub fn quartile_summary(sample: &Sample) -> Result<QuartileSummary> {
    let n = sample.n();
    if n < MIN_QUARTILE_N {
        return Err(Error::SampleTooSmall { n, min: MIN_QUARTILE_N });
    }
    let q1 = quantile_sorted(&sample.values, 0.25);
    let median = quantile_sorted(&sample.values, 0.5);
    let q3 = quantile_sorted(&sample.values, 0.75);
    Ok(QuartileSummary { q1, median, q3, iqr: q3 - q1 })
}

/// Median absolute deviation from the median, unscaled.
pub fn mad(sample: &Sample) -> f64 {
    let center = sample.median();
    let mut deviations: Vec<f64> = sample.values.iter().map(|x| (x - center).abs()).collect();
    deviations.sort_by(f64::total_cmp);
    quantile_sorted(&deviations, 0.5)
}
