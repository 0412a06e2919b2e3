//! Acceptance criteria, one test per criterion.
//!
//! Each test prints a single `criterion N: PASS|FAIL` line with the observed
//! values before asserting, so `cargo test --test acceptance -- --nocapture`
//! doubles as a report. Tolerances are fixed; do not loosen them to go green.

use std::process::Command;

use abox::distributions::ReferenceModel;
use abox::engine::{analyze, MethodConfig};
use abox::estimation::estimate_normal;
use abox::fences::{bgl_coefficient, chauvenet_coefficient};
use abox::simulation::{run_sizes, ReplicateRng, ScenarioKind, SimulationReport};
use abox::stats::{quartile_summary, Sample};
use abox::testing::{adjust, compute_pvalues, PValues, Procedure, Tail};
use abox::Family;

const TOY: [f64; 11] = [9., 16., 18., 20., 20., 22., 22., 24., 26., 36., 50.];
const SIZES: [usize; 3] = [50, 500, 5000];
const SEED: u64 = 42;
const MC_TOL: f64 = 0.06;

struct Checks {
    id: u32,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn new(id: u32) -> Self {
        Self { id, failures: Vec::new(), notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn near(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol, format!("{name}={got:.4} (want {want}±{tol})"));
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("criterion {}: PASS [{}]", self.id, self.notes.join("; "));
        } else {
            println!("criterion {}: FAIL [{}]", self.id, self.failures.join("; "));
        }
        assert!(self.failures.is_empty(), "criterion {} failed: {:?}", self.id, self.failures);
    }
}

fn toy() -> Sample {
    Sample::from_slice(&TOY).unwrap()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn coefficient(report: &SimulationReport, cfg: MethodConfig, n: usize) -> f64 {
    report.row(&cfg, n).and_then(|r| r.mean_coefficient).expect("coefficient row")
}

#[test]
fn criterion_1_toy_example() {
    let mut c = Checks::new(1);
    let s = toy();
    let q = quartile_summary(&s).unwrap();
    c.check(q.q1 == 19.0 && q.q3 == 25.0, format!("Q1={} Q3={}", q.q1, q.q3));
    let params = estimate_normal(&q, &s).unwrap();
    c.near("mu", params.mu_hat, 22.0, 0.0);
    c.near("sigma", params.sigma_hat, 4.4444, 1e-3);

    let p = compute_pvalues(&s, &params.model(), Tail::TwoSided);
    let mut ps = p.values.clone();
    ps.sort_by(f64::total_cmp);
    for (got, want) in ps.iter().zip([2.98e-10, 1.63e-3, 3.44e-3, 0.177]) {
        c.check((got / want - 1.0).abs() <= 0.02, format!("p={got:.3e} (want {want:.3e}±2%)"));
    }

    let tukey = analyze(&s, MethodConfig::tukey()).unwrap();
    c.check(
        tukey.fences.lower == Some(10.0) && tukey.fences.upper == Some(34.0),
        format!("Tukey fences {:?}/{:?}", tukey.fences.lower, tukey.fences.upper),
    );

    let bh = analyze(&s, MethodConfig::normal(Procedure::Bh(0.01))).unwrap();
    c.check(sorted(bh.outlier_values.clone()) == vec![36.0, 50.0], format!("BH outliers {:?}", bh.outlier_values));
    c.near("BH lower", bh.fences.lower.unwrap(), 8.0, 0.1);
    c.near("BH upper", bh.fences.upper.unwrap(), 36.0, 0.1);

    let holm = analyze(&s, MethodConfig::normal(Procedure::Holm(0.01))).unwrap();
    c.check(holm.outlier_values == vec![50.0], format!("Holm outliers {:?}", holm.outlier_values));
    c.near("Holm lower", holm.fences.lower.unwrap(), -6.0, 0.2);
    c.near("Holm upper", holm.fences.upper.unwrap(), 50.0, 0.2);

    let pfer = analyze(&s, MethodConfig::normal(Procedure::Pfer(0.5))).unwrap();
    c.check(
        sorted(pfer.outlier_values.clone()) == vec![9.0, 36.0, 50.0],
        format!("PFER outliers {:?}", pfer.outlier_values),
    );
    c.finish();
}

#[test]
fn criterion_2_deterministic_coefficients() {
    let mut c = Checks::new(2);
    for (n, want) in SIZES.iter().zip([1.41, 1.93, 2.38]) {
        c.near(&format!("chauvenet({n})"), chauvenet_coefficient(*n), want, 0.005);
    }
    for (n, want) in SIZES.iter().zip([1.60, 1.75, 1.90]) {
        c.near(&format!("bgl({n})"), bgl_coefficient(*n), want, 0.005);
    }
    c.finish();
}

#[test]
fn criterion_3_mixture_coefficients() {
    let mut c = Checks::new(3);
    let bh = MethodConfig::normal(Procedure::Bh(0.01));
    let holm = MethodConfig::normal(Procedure::Holm(0.01));
    let report = run_sizes(ScenarioKind::default_mixture(), &SIZES, &[bh, holm], 1000, SEED, None).unwrap();
    for (n, want) in SIZES.iter().zip([2.08, 2.82, 2.46]) {
        c.near(&format!("BH n={n}"), coefficient(&report, bh, *n), want, MC_TOL);
    }
    for (n, want) in SIZES.iter().zip([2.11, 3.02, 3.06]) {
        c.near(&format!("Holm n={n}"), coefficient(&report, holm, *n), want, MC_TOL);
    }
    c.finish();
}

#[test]
fn criterion_4_chi_square_misspecified() {
    let mut c = Checks::new(4);
    let bh = MethodConfig::normal(Procedure::Bh(0.01));
    let holm = MethodConfig::normal(Procedure::Holm(0.01));
    let report = run_sizes(ScenarioKind::ChiSquare { df: 10.0 }, &SIZES, &[bh, holm], 1000, SEED, None).unwrap();
    for (n, want) in SIZES.iter().zip([1.82, 2.65, 2.78]) {
        c.near(&format!("BH n={n}"), coefficient(&report, bh, *n), want, MC_TOL);
    }
    for (n, want) in SIZES.iter().zip([1.84, 2.73, 3.17]) {
        c.near(&format!("Holm n={n}"), coefficient(&report, holm, *n), want, MC_TOL);
    }
    c.finish();
}

#[test]
fn criterion_5_chi_square_correct_model() {
    let mut c = Checks::new(5);
    let cfg = |p| MethodConfig::pipeline(p, Family::ChiSquare, Tail::Upper);
    let methods = [cfg(Procedure::Bh(0.01)), cfg(Procedure::Holm(0.01)), cfg(Procedure::Pfer(0.5))];
    let report = run_sizes(ScenarioKind::ChiSquare { df: 10.0 }, &SIZES, &methods, 500, SEED, None).unwrap();
    for n in SIZES {
        for (m, bound) in methods.iter().zip([0.1, 0.1, 1.0]) {
            let flagged = report.row(m, n).unwrap().mean_flagged;
            c.check(flagged <= bound, format!("{} n={n} flagged={flagged:.3} (<= {bound})", m.label()));
        }
    }
    c.finish();
}

#[test]
fn criterion_6_tukey_linear_growth() {
    let mut c = Checks::new(6);
    let tukey = MethodConfig::tukey();
    let report = run_sizes(ScenarioKind::default_mixture(), &[500, 5000], &[tukey], 500, SEED, None).unwrap();
    let small = report.row(&tukey, 500).unwrap().mean_flagged_bulk.unwrap();
    let large = report.row(&tukey, 5000).unwrap().mean_flagged_bulk.unwrap();
    let ratio = large / small;
    c.check(
        (8.0..=12.0).contains(&ratio),
        format!("bulk flags {small:.3} -> {large:.3}, ratio={ratio:.3} (in [8, 12])"),
    );
    c.finish();
}

#[test]
fn criterion_7_numerical_kernel() {
    let mut c = Checks::new(7);
    let mut grid = Vec::new();
    for i in 0..=90 {
        let p = 10f64.powf(-10.0 + i as f64 * (10.0 - 0.5f64.log10().abs()) / 90.0);
        grid.push(p.min(0.5));
        grid.push(1.0 - p.min(0.5));
    }
    let mut models = vec![("normal".to_string(), ReferenceModel::normal(0.0, 1.0).unwrap())];
    for k in [1.0, 5.0, 10.0, 50.0] {
        models.push((format!("chisq({k})"), ReferenceModel::chi_square(k).unwrap()));
    }
    for (name, model) in &models {
        let worst = grid.iter().map(|&p| (model.cdf(model.quantile(p).unwrap()) - p).abs()).fold(0.0, f64::max);
        c.check(worst <= 1e-8, format!("{name} max|cdf(q(p))-p|={worst:.1e}"));
    }
    let tail = ReferenceModel::normal(0.0, 1.0).unwrap().sf(6.3);
    c.check((tail / 1.49e-10 - 1.0).abs() <= 0.01, format!("1-Phi(6.3)={tail:.4e}"));
    c.finish();
}

fn random_pvalues(rng: &mut ReplicateRng) -> Vec<f64> {
    let n = 1 + (rng.uniform() * 20.0) as usize;
    (0..n)
        .map(|_| {
            let u = rng.uniform();
            match (rng.uniform() * 4.0) as u32 {
                0 => u.powi(6) * 0.05,
                1 => (u * 20.0).round() / 20.0,
                _ => u,
            }
        })
        .collect()
}

fn bh_oracle(p: &[f64], alpha: f64) -> Vec<usize> {
    let n = p.len();
    let mut sorted = p.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = (1..=n).rev().find(|&i| sorted[i - 1] <= alpha * i as f64 / n as f64);
    match k {
        None => Vec::new(),
        Some(k) => (0..n).filter(|&i| p[i] <= sorted[k - 1]).collect(),
    }
}

#[test]
fn criterion_8_procedure_properties() {
    let mut c = Checks::new(8);
    let mut rng = ReplicateRng::new(SEED, 8);
    let (mut nesting, mut oracle, mut consistency) = (0, 0, 0);
    let trials = 10_000;
    for _ in 0..trials {
        let raw = random_pvalues(&mut rng);
        let p = PValues::new(raw.clone(), Tail::TwoSided).unwrap();
        let alpha = [0.01, 0.05, 0.1, 0.25][(rng.uniform() * 4.0) as usize];
        let outcomes: Vec<_> = [Procedure::Bonferroni(alpha), Procedure::Holm(alpha), Procedure::Bh(alpha)]
            .into_iter()
            .map(|proc| adjust(&p, proc).unwrap())
            .collect();
        let subset = |a: &[usize], b: &[usize]| a.iter().all(|i| b.contains(i));
        if subset(&outcomes[0].rejected, &outcomes[1].rejected) && subset(&outcomes[1].rejected, &outcomes[2].rejected)
        {
            nesting += 1;
        }
        if outcomes[2].rejected == bh_oracle(&raw, alpha) {
            oracle += 1;
        }
        if outcomes.iter().all(|o| o.rejected == (0..raw.len()).filter(|&i| raw[i] <= o.threshold).collect::<Vec<_>>())
        {
            consistency += 1;
        }
    }
    c.check(nesting == trials, format!("nesting {nesting}/{trials}"));
    c.check(oracle == trials, format!("BH oracle {oracle}/{trials}"));
    c.check(consistency == trials, format!("rejected == {{p <= t}} {consistency}/{trials}"));
    c.finish();
}

fn simulate_json(threads: &str) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_abox"))
        .args(["simulate", "--n", "50,500", "--replicates", "200", "--seed", "42", "--format", "json"])
        .env("ABOX_THREADS", threads)
        .output()
        .expect("run abox");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

#[test]
fn criterion_9_thread_count_determinism() {
    let mut c = Checks::new(9);
    let one = simulate_json("1");
    let four = simulate_json("4");
    c.check(!one.is_empty(), format!("{} bytes", one.len()));
    c.check(one == four, "ABOX_THREADS=1 and =4 reports byte-identical");
    c.finish();
}
