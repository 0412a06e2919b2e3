//! Command-line surface: `analyze`, `simulate` and `render`.

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::distributions::Family;
use crate::engine::{analyze_all, MethodConfig};
use crate::error::{Error, Result};
use crate::io::{
    emit, read_csv_column, unix_ms, AnalysisDocument, ColumnSelector, Document, Format, InputDescriptor, Timestamps,
};
use crate::render::{render_svg, RenderOptions};
use crate::simulation::{run_sizes, ScenarioKind};
use crate::testing::{Procedure, Tail};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping simulation worker threads.
pub const THREADS_ENV: &str = "ABOX_THREADS";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodName {
    Tukey,
    Holm,
    Chauvenet,
    Bh,
    Bgl,
    Bonferroni,
    Pcer(f64),
}

impl MethodName {
    pub const DEFAULTS: [MethodName; 5] =
        [MethodName::Tukey, MethodName::Holm, MethodName::Chauvenet, MethodName::Bh, MethodName::Bgl];

    pub fn config(self, levels: &Levels) -> MethodConfig {
        let pipeline = |p| MethodConfig::pipeline(p, levels.family.into(), levels.tail.into());
        match self {
            MethodName::Tukey => MethodConfig::tukey(),
            MethodName::Bgl => MethodConfig::bgl(),
            MethodName::Holm => pipeline(Procedure::Holm(levels.alpha)),
            MethodName::Bh => pipeline(Procedure::Bh(levels.alpha)),
            MethodName::Bonferroni => pipeline(Procedure::Bonferroni(levels.alpha)),
            MethodName::Chauvenet => pipeline(Procedure::Pfer(levels.gamma)),
            MethodName::Pcer(t0) => pipeline(Procedure::Pcer(t0)),
        }
    }
}

impl FromStr for MethodName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tukey" => Ok(MethodName::Tukey),
            "holm" => Ok(MethodName::Holm),
            "chauvenet" => Ok(MethodName::Chauvenet),
            "bh" => Ok(MethodName::Bh),
            "bgl" => Ok(MethodName::Bgl),
            "bonferroni" => Ok(MethodName::Bonferroni),
            other => match other.strip_prefix("pcer:") {
                Some(t0) => Ok(MethodName::Pcer(parse_unit_level(t0)?)),
                None => Err(format!(
                    "unknown method {other:?} (expected tukey, holm, chauvenet, bh, bgl, bonferroni or pcer:<t0>)"
                )),
            },
        }
    }
}

impl fmt::Display for MethodName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodName::Tukey => f.write_str("tukey"),
            MethodName::Holm => f.write_str("holm"),
            MethodName::Chauvenet => f.write_str("chauvenet"),
            MethodName::Bh => f.write_str("bh"),
            MethodName::Bgl => f.write_str("bgl"),
            MethodName::Bonferroni => f.write_str("bonferroni"),
            MethodName::Pcer(t0) => write!(f, "pcer:{t0}"),
        }
    }
}

fn parse_unit_level(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1)"))
    }
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be positive and finite"))
    }
}

fn parse_finite(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not finite"))
    }
}

fn parse_fraction(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1)"))
    }
}

fn parse_size(s: &str) -> std::result::Result<usize, String> {
    let n: usize = s.trim().parse().map_err(|_| format!("{s:?} is not a sample size"))?;
    if n >= crate::stats::MIN_QUARTILE_N {
        Ok(n)
    } else {
        Err(format!("sample size {n} is below {}", crate::stats::MIN_QUARTILE_N))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Normal,
    #[value(alias = "chi-square")]
    Chisq,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Normal => Family::Normal,
            FamilyArg::Chisq => Family::ChiSquare,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailArg {
    TwoSided,
    Upper,
    Lower,
}

impl From<TailArg> for Tail {
    fn from(t: TailArg) -> Self {
        match t {
            TailArg::TwoSided => Tail::TwoSided,
            TailArg::Upper => Tail::Upper,
            TailArg::Lower => Tail::Lower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Table,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    NormalMixture,
    ChiSquare,
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "abox", version, about = "Boxplot outlier fences from multiple-testing procedures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Flag outliers in one CSV column under each method.
    Analyze(AnalyzeArgs),
    /// Monte Carlo comparison of methods over sample sizes.
    Simulate(SimulateArgs),
    /// Draw one boxplot per method as SVG.
    Render(RenderArgs),
}

/// Levels and model shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Args)]
pub struct Levels {
    /// Comma-separated: tukey, holm, chauvenet, bh, bgl, bonferroni, pcer:<t0>.
    #[arg(long, value_delimiter = ',', default_values_t = MethodName::DEFAULTS.to_vec())]
    pub methods: Vec<MethodName>,
    /// FWER/FDR level for holm, bh and bonferroni.
    #[arg(long, default_value_t = 0.01, value_parser = parse_unit_level)]
    pub alpha: f64,
    /// Expected false flags for chauvenet (PFER).
    #[arg(long, default_value_t = 0.5, value_parser = parse_positive)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = FamilyArg::Normal)]
    pub family: FamilyArg,
    #[arg(long, value_enum, default_value_t = TailArg::TwoSided)]
    pub tail: TailArg,
}

impl Levels {
    pub fn configs(&self) -> Vec<MethodConfig> {
        self.methods.iter().map(|m| m.config(self)).collect()
    }

    fn to_args(&self) -> Vec<String> {
        let methods: Vec<String> = self.methods.iter().map(ToString::to_string).collect();
        vec![
            kv("methods", methods.join(",")),
            kv("alpha", self.alpha),
            kv("gamma", self.gamma),
            kv("family", value_name(self.family)),
            kv("tail", value_name(self.tail)),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Header name, or a 0-based index.
    #[arg(long, default_value = "0")]
    pub column: String,
    /// Treat the first row as data.
    #[arg(long)]
    pub no_header: bool,
}

impl InputArgs {
    fn to_args(&self) -> Vec<String> {
        let mut args = vec![kv("input", self.input.display()), kv("column", &self.column)];
        if self.no_header {
            args.push("--no-header".into());
        }
        args
    }

    fn selector(&self) -> ColumnSelector {
        ColumnSelector::parse(&self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub levels: Levels,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    pub format: FormatArg,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = ScenarioArg::NormalMixture)]
    pub scenario: ScenarioArg,
    /// Comma-separated sample sizes.
    #[arg(long = "n", value_delimiter = ',', default_values_t = vec![50usize, 500, 5000], value_parser = parse_size)]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub replicates: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Contamination fraction of the mixture.
    #[arg(long, default_value_t = 0.01, value_parser = parse_fraction)]
    pub eps: f64,
    /// Mean of the contaminating component.
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub mu_out: f64,
    /// Degrees of freedom of the chi-square scenario.
    #[arg(long, default_value_t = 10.0, value_parser = parse_positive)]
    pub df: f64,
    #[command(flatten)]
    pub levels: Levels,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    pub format: FormatArg,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl SimulateArgs {
    pub fn scenario_kind(&self) -> ScenarioKind {
        match self.scenario {
            ScenarioArg::NormalMixture => ScenarioKind::NormalMixture { eps: self.eps, mu_out: self.mu_out },
            ScenarioArg::ChiSquare => ScenarioKind::ChiSquare { df: self.df },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub levels: Levels,
    #[arg(long, default_value_t = 720, value_parser = clap::value_parser!(u32).range(100..))]
    pub width: u32,
    #[arg(long, default_value_t = 480, value_parser = clap::value_parser!(u32).range(100..))]
    pub height: u32,
    #[arg(long)]
    pub no_fences: bool,
    #[arg(long, requires = "y_max", allow_negative_numbers = true, value_parser = parse_finite)]
    pub y_min: Option<f64>,
    #[arg(long, requires = "y_min", allow_negative_numbers = true, value_parser = parse_finite)]
    pub y_max: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl RenderArgs {
    pub fn options(&self) -> RenderOptions {
        RenderOptions {
            width_px: self.width,
            height_px: self.height,
            methods: Vec::new(),
            show_fences: !self.no_fences,
            y_domain: self.y_min.zip(self.y_max),
        }
    }
}

/// `--key=value`, so values that look like flags survive a round trip.
fn kv(key: &str, value: impl fmt::Display) -> String {
    format!("--{key}={value}")
}

fn push_output(args: &mut Vec<String>, output: &Option<PathBuf>) {
    if let Some(path) = output {
        args.push(kv("output", path.display()));
    }
}

impl Command {
    /// Fully explicit argv that parses back to `self`.
    pub fn to_args(&self) -> Vec<String> {
        let mut args = vec!["abox".to_string()];
        match self {
            Command::Analyze(a) => {
                args.push("analyze".into());
                args.extend(a.input.to_args());
                args.extend(a.levels.to_args());
                args.push(kv("format", value_name(a.format)));
                push_output(&mut args, &a.output);
            }
            Command::Simulate(s) => {
                args.push("simulate".into());
                let sizes: Vec<String> = s.sizes.iter().map(ToString::to_string).collect();
                args.extend([
                    kv("scenario", value_name(s.scenario)),
                    kv("n", sizes.join(",")),
                    kv("replicates", s.replicates),
                    kv("seed", s.seed),
                    kv("eps", s.eps),
                    kv("mu-out", s.mu_out),
                    kv("df", s.df),
                ]);
                args.extend(s.levels.to_args());
                args.push(kv("format", value_name(s.format)));
                push_output(&mut args, &s.output);
            }
            Command::Render(r) => {
                args.push("render".into());
                args.extend(r.input.to_args());
                args.extend(r.levels.to_args());
                args.extend([kv("width", r.width), kv("height", r.height)]);
                if r.no_fences {
                    args.push("--no-fences".into());
                }
                if let (Some(lo), Some(hi)) = (r.y_min, r.y_max) {
                    args.extend([kv("y-min", lo), kv("y-max", hi)]);
                }
                push_output(&mut args, &r.output);
            }
        }
        args
    }
}

pub fn parse_args<I, T>(argv: I) -> std::result::Result<Command, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(argv).map(|cli| cli.command)
}

/// Worker cap from `ABOX_THREADS`; unset or empty means no cap.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::domain(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
        },
        _ => Ok(None),
    }
}

/// Writes via a sibling temp file so a failed run leaves no partial output.
pub fn write_output(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
                // A closed downstream pipe (`| head`) is not a failure.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.persist(path).map_err(|e| Error::Io(e.error))?;
        }
    }
    Ok(())
}

fn input_descriptor(input: &InputArgs, n: usize) -> InputDescriptor {
    InputDescriptor { source: input.input.display().to_string(), column: input.column.clone(), n }
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Analyze(a) => {
            let started = unix_ms();
            let sample = read_csv_column(&a.input.input, &a.input.selector(), !a.input.no_header)?;
            let results = analyze_all(&sample, &a.levels.configs())?;
            let timestamps = Timestamps { started_unix_ms: started, finished_unix_ms: unix_ms() };
            let doc = AnalysisDocument::new(input_descriptor(&a.input, sample.n()), results, timestamps)?;
            write_output(a.output.as_deref(), &emit(Document::Analysis(&doc), a.format.into())?)
        }
        Command::Simulate(s) => {
            let threads = threads_from_env()?;
            let report =
                run_sizes(s.scenario_kind(), &s.sizes, &s.levels.configs(), s.replicates as usize, s.seed, threads)?;
            let mut text = emit(Document::Simulation(&report), s.format.into())?;
            if !text.ends_with('\n') {
                text.push('\n');
            }
            write_output(s.output.as_deref(), &text)
        }
        Command::Render(r) => {
            let sample = read_csv_column(&r.input.input, &r.input.selector(), !r.input.no_header)?;
            let results = analyze_all(&sample, &r.levels.configs())?;
            write_output(r.output.as_deref(), &render_svg(&results, &r.options())?)
        }
    }
}

/// Runs a parsed command, reporting failures on stderr; returns the exit code.
pub fn run(command: &Command) -> i32 {
    match execute(command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
