//! p-values against the fitted model, and the multiplicity adjustments that
//! turn them into a single significance threshold.
//!
//! Every procedure ends in the same shape: a threshold `t` such that the
//! rejected set is exactly `{ i : p[i] <= t }`. For the step procedures `t`
//! is the largest rejected p-value. When a step procedure rejects nothing,
//! `t` is the largest double strictly below the smallest p-value, so the
//! fences pass through the most extreme observation and flag nothing.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::ReferenceModel;
use crate::error::{Error, Result};
use crate::stats::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    #[default]
    TwoSided,
    Upper,
    Lower,
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tail::TwoSided => "two-sided",
            Tail::Upper => "upper",
            Tail::Lower => "lower",
        })
    }
}

/// Multiple-testing procedure with its level parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "level", rename_all = "snake_case")]
pub enum Procedure {
    /// Unadjusted per-comparison level.
    Pcer(f64),
    Bonferroni(f64),
    Holm(f64),
    /// Benjamini–Hochberg step-up at FDR level alpha.
    Bh(f64),
    /// Expected number of false flags; threshold gamma / n.
    Pfer(f64),
}

impl Procedure {
    pub fn level(&self) -> f64 {
        match *self {
            Procedure::Pcer(l)
            | Procedure::Bonferroni(l)
            | Procedure::Holm(l)
            | Procedure::Bh(l)
            | Procedure::Pfer(l) => l,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let level = self.level();
        let ok = match self {
            Procedure::Pfer(_) => level > 0.0 && level.is_finite(),
            _ => level > 0.0 && level < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid level {level} for {self}")))
        }
    }

    pub fn is_step(&self) -> bool {
        matches!(self, Procedure::Holm(_) | Procedure::Bh(_))
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Procedure::Pcer(t) => write!(f, "PCER at {t}"),
            Procedure::Bonferroni(a) => write!(f, "FWER (Bonferroni) at {a}"),
            Procedure::Holm(a) => write!(f, "FWER (Holm) at {a}"),
            Procedure::Bh(a) => write!(f, "FDR (BH) at {a}"),
            Procedure::Pfer(g) => write!(f, "PFER (Chauvenet) at {g}"),
        }
    }
}

/// p-values aligned with the sorted sample, tagged with the tail they test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValues {
    pub values: Vec<f64>,
    pub tail: Tail,
}

impl PValues {
    pub fn new(values: Vec<f64>, tail: Tail) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(p) = values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::domain(format!("p-value {p} outside [0, 1]")));
        }
        Ok(Self { values, tail })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub pvalues: Vec<f64>,
    pub threshold: f64,
    /// Ascending indices into the p-value list.
    pub rejected: Vec<usize>,
    pub procedure: Procedure,
    pub tail: Tail,
    /// True when a step procedure rejected nothing and the threshold is the
    /// no-rejection fallback.
    pub sentinel: bool,
}

pub fn compute_pvalues(sample: &Sample, model: &ReferenceModel, tail: Tail) -> PValues {
    let values = sample
        .values()
        .iter()
        .map(|&x| match tail {
            Tail::Upper => model.sf(x),
            Tail::Lower => model.cdf(x),
            Tail::TwoSided => two_sided(model, x),
        })
        .collect();
    PValues { values, tail }
}

fn two_sided(model: &ReferenceModel, x: f64) -> f64 {
    match *model {
        ReferenceModel::Normal { location, scale } => {
            let z = ((x - location) / scale).abs();
            2.0 * crate::distributions::normal_sf(z)
        }
        ReferenceModel::ChiSquare { .. } => (2.0 * model.cdf(x).min(model.sf(x))).min(1.0),
    }
}

/// Applies `procedure` and returns the threshold with its rejected set.
pub fn adjust(pvalues: &PValues, procedure: Procedure) -> Result<TestOutcome> {
    procedure.validate()?;
    let p = &pvalues.values;
    let n = p.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let nf = n as f64;

    let (threshold, sentinel) = match procedure {
        Procedure::Pcer(t0) => (t0, false),
        Procedure::Bonferroni(alpha) => (alpha / nf, false),
        Procedure::Pfer(gamma) => {
            let t = gamma / nf;
            if t >= 1.0 {
                return Err(Error::domain(format!("PFER level {gamma} must be below the sample size {n}")));
            }
            (t, false)
        }
        Procedure::Holm(alpha) => {
            let sorted = sorted_pvalues(p);
            // Step down: reject while p_(i) <= alpha / (n - i + 1), 1-based i.
            let rejections = sorted.iter().enumerate().take_while(|&(i, &pi)| pi <= alpha / (n - i) as f64).count();
            step_threshold(&sorted, rejections)
        }
        Procedure::Bh(alpha) => {
            let sorted = sorted_pvalues(p);
            // Step up: largest i with p_(i) <= i alpha / n.
            let cutoff = sorted
                .iter()
                .enumerate()
                .rev()
                .find(|&(i, &pi)| pi <= (i + 1) as f64 * alpha / nf)
                .map_or(0, |(i, _)| i + 1);
            step_threshold(&sorted, cutoff)
        }
    };

    let threshold = if threshold > 0.0 { threshold } else { positive_threshold(p) };

    let rejected = p.iter().enumerate().filter(|&(_, &pi)| pi <= threshold).map(|(i, _)| i).collect();
    Ok(TestOutcome { pvalues: p.clone(), threshold, rejected, procedure, tail: pvalues.tail, sentinel })
}

fn sorted_pvalues(p: &[f64]) -> Vec<f64> {
    let mut sorted = p.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
}

// Only exact zeros were rejected; keep the same set with a positive threshold.
fn positive_threshold(p: &[f64]) -> f64 {
    let smallest_positive = p.iter().copied().filter(|&x| x > 0.0).fold(1.0, f64::min);
    f64::MIN_POSITIVE.min(smallest_positive.next_down())
}

fn step_threshold(sorted: &[f64], rejections: usize) -> (f64, bool) {
    if rejections > 0 {
        (sorted[rejections - 1], false)
    } else {
        (sorted[0].next_down(), true)
    }
}

/// p-values against `model` followed by the adjustment.
pub fn test(sample: &Sample, model: &ReferenceModel, tail: Tail, procedure: Procedure) -> Result<TestOutcome> {
    adjust(&compute_pvalues(sample, model, tail), procedure)
}
