//! Monte Carlo harness: scenario generators, per-replicate analysis and
//! aggregation of fence coefficients and flag counts.
//!
//! Replicate `r` draws from its own ChaCha8 stream keyed by `(seed, r)`, and
//! results are reduced in replicate order, so reports do not depend on how
//! many worker threads ran them.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::normal_quantile;
use crate::engine::{analyze, MethodConfig};
use crate::error::{Error, Result};
use crate::stats::{Sample, MIN_QUARTILE_N};

pub const REPORT_SCHEMA_VERSION: &str = "abox.simulation/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    /// `(1 - eps) N(0, 1) + eps N(mu_out, 1)`.
    NormalMixture {
        eps: f64,
        mu_out: f64,
    },
    ChiSquare {
        df: f64,
    },
}

impl ScenarioKind {
    /// 1% contamination shifted by five standard deviations.
    pub fn default_mixture() -> Self {
        ScenarioKind::NormalMixture { eps: 0.01, mu_out: 5.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ScenarioKind::NormalMixture { eps, mu_out } => {
                if !(0.0..1.0).contains(&eps) || !mu_out.is_finite() {
                    return Err(Error::domain(format!("invalid mixture (eps={eps}, mu_out={mu_out})")));
                }
            }
            ScenarioKind::ChiSquare { df } => {
                if !(df > 0.0 && df.is_finite()) {
                    return Err(Error::domain(format!("invalid chi-square df {df}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub n: usize,
}

impl Scenario {
    pub fn new(kind: ScenarioKind, n: usize) -> Result<Self> {
        kind.validate()?;
        if n < MIN_QUARTILE_N {
            return Err(Error::SampleTooSmall { n, min: MIN_QUARTILE_N });
        }
        Ok(Self { kind, n })
    }
}

/// Random stream for one replicate.
pub struct ReplicateRng(ChaCha8Rng);

impl ReplicateRng {
    pub fn new(seed: u64, replicate: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replicate);
        Self(rng)
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.0.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by inversion.
    pub fn normal(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }

    pub fn chi_square(&mut self, df: f64) -> f64 {
        if df.fract() == 0.0 && df <= 100.0 {
            (0..df as u32).map(|_| self.normal().powi(2)).sum()
        } else {
            2.0 * self.gamma(0.5 * df)
        }
    }

    /// Unit-scale gamma variate (Marsaglia–Tsang).
    fn gamma(&mut self, shape: f64) -> f64 {
        if shape < 1.0 {
            let u = self.uniform();
            return self.gamma(shape + 1.0) * u.powf(1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let z = self.normal();
            let v = (1.0 + c * z).powi(3);
            if v <= 0.0 {
                continue;
            }
            let u = self.uniform();
            if u.ln() < 0.5 * z * z + d - d * v + d * v.ln() {
                return d * v;
            }
        }
    }
}

/// A generated sample with ground-truth contamination labels aligned to
/// the sorted order (all `false` outside the mixture scenario).
#[derive(Debug, Clone)]
pub struct Generated {
    pub sample: Sample,
    pub is_outlier: Vec<bool>,
}

pub fn generate(scenario: &Scenario, rng: &mut ReplicateRng) -> Generated {
    let mut draws: Vec<(f64, bool)> = (0..scenario.n)
        .map(|_| match scenario.kind {
            ScenarioKind::NormalMixture { eps, mu_out } => {
                let contaminated = rng.uniform() < eps;
                let z = rng.normal();
                if contaminated {
                    (mu_out + z, true)
                } else {
                    (z, false)
                }
            }
            ScenarioKind::ChiSquare { df } => (rng.chi_square(df), false),
        })
        .collect();
    draws.sort_by(|a, b| a.0.total_cmp(&b.0));
    let is_outlier = draws.iter().map(|d| d.1).collect();
    let values = draws.into_iter().map(|d| d.0).collect();
    let sample = Sample::new(values, None).expect("generated draws are finite and nonempty");
    Generated { sample, is_outlier }
}

/// Aggregates for one (method, n) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub config: MethodConfig,
    pub n: usize,
    pub replicates: usize,
    /// Absent when the method's fences are not IQR multiples.
    pub mean_coefficient: Option<f64>,
    pub coefficient_std_error: Option<f64>,
    pub mean_flagged: f64,
    /// Mixture scenario only: flags raised on uncontaminated draws.
    pub mean_flagged_bulk: Option<f64>,
    pub sentinel_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub schema_version: String,
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub replicates: usize,
    pub rows: Vec<ReportRow>,
}

impl SimulationReport {
    pub fn empty(scenario: ScenarioKind, seed: u64, replicates: usize) -> Self {
        Self { schema_version: REPORT_SCHEMA_VERSION.to_string(), scenario, seed, replicates, rows: Vec::new() }
    }

    pub fn row(&self, config: &MethodConfig, n: usize) -> Option<&ReportRow> {
        let config = config.normalized();
        self.rows.iter().find(|r| r.n == n && r.config == config)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, Copy)]
struct MethodDraw {
    coefficient: Option<f64>,
    flagged: usize,
    flagged_bulk: usize,
    sentinel: bool,
}

fn run_replicate(scenario: &Scenario, methods: &[MethodConfig], seed: u64, r: usize) -> Result<Vec<MethodDraw>> {
    let mut rng = ReplicateRng::new(seed, r as u64);
    let generated = generate(scenario, &mut rng);
    methods
        .iter()
        .map(|&config| {
            let summary = analyze(&generated.sample, config)?;
            let flagged_bulk = summary.outlier_indices.iter().filter(|&&i| !generated.is_outlier[i]).count();
            Ok(MethodDraw {
                coefficient: summary.fences.coefficient,
                flagged: summary.outlier_indices.len(),
                flagged_bulk,
                sentinel: summary.sentinel_threshold,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|source| Error::Replicate { index: r, source: Box::new(source) })
}

/// Runs `replicates` independent draws of `scenario` through every method.
///
/// `threads` caps the worker pool (`None` uses rayon's default); it never
/// changes the result.
pub fn run_scenario(
    scenario: &Scenario,
    methods: &[MethodConfig],
    replicates: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<SimulationReport> {
    if replicates == 0 {
        return Err(Error::domain("replicates must be at least 1"));
    }
    scenario.kind.validate()?;
    let methods: Vec<MethodConfig> = methods.iter().map(|m| m.normalized()).collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder.build().map_err(|e| Error::domain(format!("thread pool: {e}")))?;
    let draws: Vec<Vec<MethodDraw>> = pool.install(|| {
        (0..replicates).into_par_iter().map(|r| run_replicate(scenario, &methods, seed, r)).collect::<Result<Vec<_>>>()
    })?;

    let mixture = matches!(scenario.kind, ScenarioKind::NormalMixture { .. });
    let reps = replicates as f64;
    let rows = methods
        .iter()
        .enumerate()
        .map(|(m, &config)| {
            let column: Vec<MethodDraw> = draws.iter().map(|d| d[m]).collect();
            let coefficients: Option<Vec<f64>> = column.iter().map(|d| d.coefficient).collect();
            let (mean_coefficient, coefficient_std_error) = match coefficients {
                Some(c) => {
                    let mean = c.iter().sum::<f64>() / reps;
                    let se = if replicates > 1 {
                        let var = c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1.0);
                        Some((var / reps).sqrt())
                    } else {
                        None
                    };
                    (Some(mean), se)
                }
                None => (None, None),
            };
            ReportRow {
                method: config.label(),
                config,
                n: scenario.n,
                replicates,
                mean_coefficient,
                coefficient_std_error,
                mean_flagged: column.iter().map(|d| d.flagged as f64).sum::<f64>() / reps,
                mean_flagged_bulk: mixture.then(|| column.iter().map(|d| d.flagged_bulk as f64).sum::<f64>() / reps),
                sentinel_fraction: column.iter().filter(|d| d.sentinel).count() as f64 / reps,
            }
        })
        .collect();

    Ok(SimulationReport { rows, ..SimulationReport::empty(scenario.kind, seed, replicates) })
}

/// [`run_scenario`] over several sample sizes, rows concatenated by size.
pub fn run_sizes(
    kind: ScenarioKind,
    sizes: &[usize],
    methods: &[MethodConfig],
    replicates: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<SimulationReport> {
    let mut report = SimulationReport::empty(kind, seed, replicates);
    for &n in sizes {
        let part = run_scenario(&Scenario::new(kind, n)?, methods, replicates, seed, threads)?;
        report.rows.extend(part.rows);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::Procedure;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn uniform_stays_open() {
        let mut rng = ReplicateRng::new(1, 0);
        for _ in 0..100_000 {
            let u = rng.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, r| {
            let mut g = ReplicateRng::new(seed, r);
            (0..8).map(|_| g.uniform()).collect::<Vec<_>>()
        };
        assert_eq!(draw(42, 3), draw(42, 3));
        assert_ne!(draw(42, 3), draw(42, 4));
        assert_ne!(draw(42, 3), draw(43, 3));
    }

    #[test]
    fn normal_moments() {
        let mut rng = ReplicateRng::new(7, 0);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let (m, v) = mean_var(&xs);
        // 4 sigma CLT bands: sd(mean) = 1e-3, sd(var) = sqrt(2/n) ~ 1.41e-3.
        assert!(m.abs() < 4e-3, "mean {m}");
        assert!((v - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt(), "var {v}");
    }

    #[test]
    fn gamma_path_moments() {
        let mut rng = ReplicateRng::new(11, 0);
        for df in [0.7, 3.5, 150.0] {
            let n = 200_000;
            let xs: Vec<f64> = (0..n).map(|_| rng.chi_square(df)).collect();
            let (m, v) = mean_var(&xs);
            let sd_mean = (2.0 * df / n as f64).sqrt();
            assert!((m - df).abs() < 4.0 * sd_mean, "df={df} mean={m}");
            assert!((v / (2.0 * df) - 1.0).abs() < 0.05, "df={df} var={v}");
        }
    }

    #[test]
    fn mixture_without_contamination() {
        let s = Scenario::new(ScenarioKind::NormalMixture { eps: 0.0, mu_out: 5.0 }, 1000).unwrap();
        let g = generate(&s, &mut ReplicateRng::new(42, 0));
        assert!(g.is_outlier.iter().all(|&o| !o));
        let mean = g.sample.values().iter().sum::<f64>() / 1000.0;
        assert!(mean.abs() < 0.15);
    }

    #[test]
    fn mixture_contamination_count() {
        let s = Scenario::new(ScenarioKind::default_mixture(), 5000).unwrap();
        let g = generate(&s, &mut ReplicateRng::new(42, 0));
        let k = g.is_outlier.iter().filter(|&&o| o).count();
        assert!((25..=75).contains(&k), "k={k}");
        // Labels follow the values through the sort.
        let mean_out: f64 =
            g.sample.values().iter().zip(&g.is_outlier).filter(|(_, &o)| o).map(|(x, _)| x).sum::<f64>() / k as f64;
        assert!((mean_out - 5.0).abs() < 1.0);
    }

    #[test]
    fn chi_square_mean() {
        let s = Scenario::new(ScenarioKind::ChiSquare { df: 10.0 }, 5000).unwrap();
        let g = generate(&s, &mut ReplicateRng::new(42, 0));
        let mean = g.sample.values().iter().sum::<f64>() / 5000.0;
        assert!((9.5..=10.5).contains(&mean), "mean={mean}");
    }

    #[test]
    fn chauvenet_and_bgl_have_zero_variance() {
        let s = Scenario::new(ScenarioKind::default_mixture(), 50).unwrap();
        let methods = [MethodConfig::normal(Procedure::Pfer(0.5)), MethodConfig::bgl()];
        let report = run_scenario(&s, &methods, 40, 3, None).unwrap();
        let chauv = &report.rows[0];
        assert!((chauv.mean_coefficient.unwrap() - 1.41).abs() < 0.005);
        assert!(chauv.coefficient_std_error.unwrap() < 1e-12);
        assert!(report.rows[1].coefficient_std_error.unwrap() < 1e-12);
    }

    #[test]
    fn thread_count_does_not_change_report() {
        let s = Scenario::new(ScenarioKind::default_mixture(), 200).unwrap();
        let methods = [MethodConfig::normal(Procedure::Bh(0.01)), MethodConfig::tukey()];
        let one = run_scenario(&s, &methods, 64, 9, Some(1)).unwrap();
        let many = run_scenario(&s, &methods, 64, 9, Some(4)).unwrap();
        assert_eq!(one.to_json().unwrap(), many.to_json().unwrap());
    }

    #[test]
    fn chi_square_family_has_no_coefficient() {
        let s = Scenario::new(ScenarioKind::ChiSquare { df: 10.0 }, 100).unwrap();
        let cfg = MethodConfig::pipeline(Procedure::Bh(0.01), crate::Family::ChiSquare, crate::Tail::Upper);
        let report = run_scenario(&s, &[cfg], 10, 1, None).unwrap();
        assert!(report.rows[0].mean_coefficient.is_none());
        assert!(report.rows[0].mean_flagged_bulk.is_none());
    }

    #[test]
    fn invalid_inputs() {
        assert!(Scenario::new(ScenarioKind::default_mixture(), 4).is_err());
        assert!(Scenario::new(ScenarioKind::NormalMixture { eps: 1.0, mu_out: 5.0 }, 50).is_err());
        assert!(Scenario::new(ScenarioKind::ChiSquare { df: 0.0 }, 50).is_err());
        let s = Scenario::new(ScenarioKind::default_mixture(), 50).unwrap();
        assert!(run_scenario(&s, &[MethodConfig::tukey()], 0, 1, None).is_err());
    }
}
