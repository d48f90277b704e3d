//! Command-line front end. Exit codes: 0 success, 1 runtime failure,
//! 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::cdf_models::{auto_kernel_estimator, Dataset, EstimatorSpec};
use crate::conjecture::{test_conjecture, Decision, NullSpec};
use crate::error::{Error, Result};
use crate::experiments::{
    default_sweep_sizes, estimate_cvp, sweep_sample_sizes, var_backtest, write_sweep_csv, BacktestConfig, EstimatorKind,
    HeteroReturns, Profile, ReturnsSeries, StudyMethod, SyntheticConfig, VarMethod,
};
use crate::pi_methods::{build_interval, CandidateGrid, CpMode, MethodSpec, MfbConfig, MfbVariant, PredictionInterval, Predictor, Scheme, Side};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "predint", version, about = "Model-free prediction intervals")]
pub struct RunConfig {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Prediction interval for one future covariate.
    Predict(PredictArgs),
    /// Test a conjecture about the future response.
    Conjecture(ConjectureArgs),
    /// Monte Carlo coverage study on the synthetic model.
    SimulateCoverage(CoverageArgs),
    /// Coverage study over a range of sample sizes.
    Sweep(SweepArgs),
    /// Rolling VaR backtest on a returns series.
    VarBacktest(BacktestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Qe,
    Cp,
    Mfb,
    TIid,
    TLs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorArg {
    Kernel,
    Qr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyEstimatorArg {
    Kernel,
    Qr,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyMethodArg {
    Qe,
    Cp,
    Mfb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarMethodArg {
    Qe,
    MfbL1,
    MfbL2,
    Cp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileArg {
    Desk,
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideArg {
    Two,
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictorArg {
    L1,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    Random,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    Standard,
    Limit,
    Predictive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CpModeArg {
    Exact,
    RankApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullArg {
    Point,
    AtLeast,
    AtMost,
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(a) if a > 0.0 && a < 1.0 => Ok(a),
        _ => Err("alpha must be in (0,1)".into()),
    }
}

fn parse_positive(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

fn parse_input(s: &str) -> std::result::Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("input file {s:?} not found"))
    }
}

/// Flags shared by `predict` and `conjecture`.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct IntervalArgs {
    /// CSV with columns x1..xd,y.
    #[arg(long, value_parser = parse_input)]
    pub data: PathBuf,
    /// Future covariate, comma separated when d > 1.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub xf: Vec<f64>,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Mfb)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Kernel)]
    pub estimator: EstimatorArg,
    /// Covariate bandwidth; chosen by the KS criterion when omitted.
    #[arg(long, requires = "h0")]
    pub h: Option<f64>,
    /// Response bandwidth.
    #[arg(long, requires = "h")]
    pub h0: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 1000, value_parser = parse_positive)]
    pub b: usize,
    #[arg(long, value_enum, default_value_t = PredictorArg::L2)]
    pub predictor: PredictorArg,
    #[arg(long, value_enum, default_value_t = SchemeArg::Random)]
    pub scheme: SchemeArg,
    #[arg(long, value_enum, default_value_t = VariantArg::Standard)]
    pub variant: VariantArg,
    #[arg(long, value_enum)]
    pub cp_mode: Option<CpModeArg>,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PredictArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: IntervalArgs,
    #[arg(long, value_enum, default_value_t = SideArg::Two)]
    pub side: SideArg,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ConjectureArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: IntervalArgs,
    #[arg(long, value_enum)]
    pub null: NullArg,
    #[arg(long, allow_negative_numbers = true)]
    pub y0: f64,
}

/// Flags shared by the synthetic studies.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct StudyArgs {
    #[arg(long, value_enum, default_value_t = ProfileArg::Desk)]
    pub profile: ProfileArg,
    /// Override the profile's dataset count.
    #[arg(long, value_parser = parse_positive)]
    pub k: Option<usize>,
    /// Override the profile's future draws per dataset.
    #[arg(long, value_parser = parse_positive)]
    pub m: Option<usize>,
    /// Override the profile's bootstrap replicates.
    #[arg(long, value_parser = parse_positive)]
    pub b: Option<usize>,
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = [StudyMethodArg::Qe, StudyMethodArg::Cp, StudyMethodArg::Mfb])]
    pub methods: Vec<StudyMethodArg>,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    pub xf: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub cp_mode: Option<CpModeArg>,
    /// Store wall-clock time in the report (breaks byte-identical reruns).
    #[arg(long)]
    pub record_runtime: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CoverageArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub study: StudyArgs,
    #[arg(long, default_value_t = 400, value_parser = parse_positive)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = StudyEstimatorArg::Kernel)]
    pub estimator: StudyEstimatorArg,
    /// JSON report path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub study: StudyArgs,
    /// Sample sizes (default 50,100,...,400).
    #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
    pub n_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = [EstimatorArg::Kernel, EstimatorArg::Qr])]
    pub estimators: Vec<EstimatorArg>,
    /// CSV table path.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional JSON file with the full per-run reports.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BacktestArgs {
    /// Returns CSV (`timestamp,price` or `timestamp,log_return`).
    #[arg(long, value_parser = parse_input, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    pub data: Option<PathBuf>,
    /// Use this many bars from the heteroscedastic generator instead.
    #[arg(long, value_parser = parse_positive)]
    pub synthetic: Option<usize>,
    /// Bars per block.
    #[arg(long, default_value_t = 30)]
    pub m: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.05, 0.1], value_parser = parse_alpha)]
    pub alphas: Vec<f64>,
    /// Training pairs per fit.
    #[arg(long, default_value_t = 34, value_parser = parse_positive)]
    pub window: usize,
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = [VarMethodArg::Qe, VarMethodArg::MfbL1, VarMethodArg::MfbL2, VarMethodArg::Cp])]
    pub methods: Vec<VarMethodArg>,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Kernel)]
    pub estimator: EstimatorArg,
    #[arg(long, default_value_t = 500, value_parser = parse_positive)]
    pub b: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub cp_mode: Option<CpModeArg>,
    #[arg(long)]
    pub record_runtime: bool,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A usage problem, or a request for help/version text.
#[derive(Debug)]
pub struct UsageError {
    pub code: i32,
    pub message: String,
}

/// Parses `argv` (program name first).
pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    RunConfig::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                UsageError { code: if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { EXIT_USAGE } else { EXIT_OK }, message: e.to_string() }
            }
            _ => UsageError { code: EXIT_USAGE, message: one_line(&e) },
        }
    })
}

fn one_line(e: &clap::Error) -> String {
    let text = e.to_string();
    let line = text.lines().next().unwrap_or("invalid usage");
    line.trim_start_matches("error: ").to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictReport {
    pub config: PredictArgs,
    pub estimator: EstimatorSpec,
    pub method: MethodSpec,
    pub interval: PredictionInterval,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub config: ConjectureArgs,
    pub estimator: EstimatorSpec,
    pub method: MethodSpec,
    pub decision: Decision,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepArgs,
    pub reports: Vec<crate::experiments::CoverageReport>,
    pub version: String,
}

/// Runs the command and returns the exit code. Diagnostics go to stderr,
/// the one-line summary to `stdout`.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write) -> i32 {
    let result = match cfg.threads {
        Some(0) => Err(Error::Domain("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Domain(e.to_string()))
            .and_then(|pool| pool.install(|| dispatch(&cfg.command))),
        None => dispatch(&cfg.command),
    };
    match result.and_then(|line| writeln!(stdout, "{line}").map_err(Error::from)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

/// Parses and runs; the whole program.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_args(argv) {
        Ok(cfg) => run(&cfg, &mut std::io::stdout().lock()),
        Err(e) => {
            if e.code == EXIT_OK {
                print!("{}", e.message);
            } else {
                eprintln!("error: {}", e.message);
            }
            e.code
        }
    }
}

fn dispatch(cmd: &Command) -> Result<String> {
    match cmd {
        Command::Predict(a) => predict(a),
        Command::Conjecture(a) => conjecture(a),
        Command::SimulateCoverage(a) => simulate_coverage(a),
        Command::Sweep(a) => sweep(a),
        Command::VarBacktest(a) => backtest(a),
    }
}

impl From<CpModeArg> for CpMode {
    fn from(m: CpModeArg) -> Self {
        match m {
            CpModeArg::Exact => CpMode::Exact,
            CpModeArg::RankApprox => CpMode::RankApprox,
        }
    }
}

impl From<PredictorArg> for Predictor {
    fn from(p: PredictorArg) -> Self {
        match p {
            PredictorArg::L1 => Predictor::Median,
            PredictorArg::L2 => Predictor::Mean,
        }
    }
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Two => Side::Two,
            SideArg::Lower => Side::Lower,
            SideArg::Upper => Side::Upper,
        }
    }
}

impl From<EstimatorArg> for EstimatorKind {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Kernel => EstimatorKind::Kernel,
            EstimatorArg::Qr => EstimatorKind::Qr,
        }
    }
}

impl IntervalArgs {
    fn estimator(&self, data: &Dataset) -> Result<EstimatorSpec> {
        match (self.estimator, self.h, self.h0) {
            (EstimatorArg::Qr, ..) => Ok(EstimatorSpec::quantile_regression()),
            (EstimatorArg::Kernel, Some(h), Some(h0)) => Ok(EstimatorSpec::kernel(h, h0)),
            (EstimatorArg::Kernel, ..) => auto_kernel_estimator(data),
        }
    }

    fn method(&self) -> MethodSpec {
        match self.method {
            MethodArg::Qe => MethodSpec::Qe,
            MethodArg::Cp => MethodSpec::Cp { mode: self.cp_mode.map(Into::into), grid: CandidateGrid::default() },
            MethodArg::Mfb => MethodSpec::Mfb(MfbConfig {
                predictor: self.predictor.into(),
                scheme: match self.scheme {
                    SchemeArg::Random => Scheme::RandomRegressor,
                    SchemeArg::Fixed => Scheme::FixedRegressor,
                },
                variant: match self.variant {
                    VariantArg::Standard => MfbVariant::Standard,
                    VariantArg::Limit => MfbVariant::Limit,
                    VariantArg::Predictive => MfbVariant::Predictive,
                },
                b: self.b,
                seed: self.seed,
            }),
            MethodArg::TIid => MethodSpec::TIid,
            MethodArg::TLs => MethodSpec::TLs,
        }
    }
}

fn predict(a: &PredictArgs) -> Result<String> {
    let c = &a.common;
    let data = Dataset::load_csv(&c.data)?;
    let estimator = c.estimator(&data)?;
    let method = c.method();
    let interval = build_interval(&data, &c.xf, c.alpha, a.side.into(), &estimator, &method)?;
    let line = interval.display();
    if let Some(out) = &c.out {
        let report = PredictReport { config: a.clone(), estimator, method, interval, version: version() };
        write_json(out, &report)?;
    }
    Ok(line)
}

fn conjecture(a: &ConjectureArgs) -> Result<String> {
    let c = &a.common;
    let data = Dataset::load_csv(&c.data)?;
    let estimator = c.estimator(&data)?;
    let method = c.method();
    let null = match a.null {
        NullArg::Point => NullSpec::point(a.y0),
        NullArg::AtLeast => NullSpec::at_least(a.y0),
        NullArg::AtMost => NullSpec::at_most(a.y0),
    };
    let decision = test_conjecture(&data, &c.xf, c.alpha, null, &estimator, &method)?;
    let line = format!(
        "{} (interval {})",
        if decision.reject { "reject" } else { "accept" },
        decision.interval_used.display()
    );
    if let Some(out) = &c.out {
        let report = ConjectureReport { config: a.clone(), estimator, method, decision, version: version() };
        write_json(out, &report)?;
    }
    Ok(line)
}

impl StudyArgs {
    fn config(&self, n: usize, estimator: EstimatorKind) -> SyntheticConfig {
        let profile = match self.profile {
            ProfileArg::Desk => Profile::Desk,
            ProfileArg::Paper => Profile::Paper,
        };
        let mut cfg = SyntheticConfig::new(profile, n, estimator, self.seed);
        if self.k.is_some() || self.m.is_some() || self.b.is_some() {
            let (k, m, b) = (self.k.unwrap_or(cfg.k), self.m.unwrap_or(cfg.m), self.b.unwrap_or(cfg.b));
            cfg = cfg.with_sizes(k, m, b);
        }
        let methods: Vec<StudyMethod> = self
            .methods
            .iter()
            .map(|m| match m {
                StudyMethodArg::Qe => StudyMethod::Qe,
                StudyMethodArg::Cp => StudyMethod::Cp,
                StudyMethodArg::Mfb => StudyMethod::Mfb,
            })
            .collect();
        SyntheticConfig {
            alpha: self.alpha,
            sigma: self.sigma,
            x_f: self.xf,
            cp_mode: self.cp_mode.map(Into::into),
            ..cfg.with_methods(&methods)
        }
    }
}

fn simulate_coverage(a: &CoverageArgs) -> Result<String> {
    let estimator = match a.estimator {
        StudyEstimatorArg::Kernel => EstimatorKind::Kernel,
        StudyEstimatorArg::Qr => EstimatorKind::Qr,
        StudyEstimatorArg::Oracle => EstimatorKind::Oracle,
    };
    let start = Instant::now();
    let mut report = estimate_cvp(&a.study.config(a.n, estimator))?;
    if a.study.record_runtime {
        report.runtime_s = Some(start.elapsed().as_secs_f64());
    }
    write_json(&a.out, &report)?;
    let summary: Vec<String> = report.methods.iter().map(|m| format!("{} {:.4}", m.name, m.cvp_mean)).collect();
    Ok(format!("{} -> {}", summary.join(", "), a.out.display()))
}

fn sweep(a: &SweepArgs) -> Result<String> {
    let n_list = if a.n_list.is_empty() { default_sweep_sizes() } else { a.n_list.clone() };
    let estimators: Vec<EstimatorKind> = a.estimators.iter().map(|&e| e.into()).collect();
    let base = a.study.config(n_list[0], estimators[0]);
    let start = Instant::now();
    let (rows, mut reports) = sweep_sample_sizes(&base, &n_list, &estimators)?;
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf)?;
    write_atomic(&a.out, &buf)?;
    if let Some(path) = &a.report {
        if a.study.record_runtime {
            let t = start.elapsed().as_secs_f64();
            reports.iter_mut().for_each(|r| r.runtime_s = Some(t));
        }
        write_json(path, &SweepReport { config: a.clone(), reports, version: version() })?;
    }
    Ok(format!("{} rows -> {}", rows.len(), a.out.display()))
}

fn backtest(a: &BacktestArgs) -> Result<String> {
    let series = match (&a.data, a.synthetic) {
        (Some(path), _) => ReturnsSeries::load_csv(path)?,
        (None, Some(bars)) => HeteroReturns::default().generate(bars, a.seed)?,
        (None, None) => return Err(Error::Domain("either --data or --synthetic is required".into())),
    };
    let cfg = BacktestConfig {
        m: a.m,
        alphas: a.alphas.clone(),
        window: a.window,
        methods: a
            .methods
            .iter()
            .map(|m| match m {
                VarMethodArg::Qe => VarMethod::Qe,
                VarMethodArg::MfbL1 => VarMethod::MfbL1,
                VarMethodArg::MfbL2 => VarMethod::MfbL2,
                VarMethodArg::Cp => VarMethod::Cp,
            })
            .collect(),
        estimator: a.estimator.into(),
        b: a.b,
        seed: a.seed,
        cp_mode: a.cp_mode.map(Into::into),
    };
    let start = Instant::now();
    let mut report = var_backtest(&series, &cfg)?;
    if a.record_runtime {
        report.runtime_s = Some(start.elapsed().as_secs_f64());
    }
    let cells: Vec<String> = report
        .cells
        .iter()
        .map(|c| match c.acceptance_rate {
            Some(r) => format!("{}@{} {:.3}", c.method.name(), c.alpha, r),
            None => format!("{}@{} failed", c.method.name(), c.alpha),
        })
        .collect();
    let mut line = format!("{} tests: {}", report.tests, cells.join(", "));
    if let Some(out) = &a.out {
        write_json(out, &report)?;
        line.push_str(&format!(" -> {}", out.display()));
    }
    Ok(line)
}

fn version() -> String {
    env!("CARGO_PKG_VERSION").into()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    write_atomic(path, &text)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &str) -> std::result::Result<RunConfig, UsageError> {
        parse_args(std::iter::once("predint").chain(args.split_whitespace()))
    }

    #[test]
    fn profile_defaults() {
        let cfg = parse("simulate-coverage --profile desk --out report.json").unwrap();
        let Command::SimulateCoverage(a) = &cfg.command else { panic!() };
        let s = a.study.config(a.n, EstimatorKind::Kernel);
        assert_eq!((s.k, s.m, s.b), (100, 1000, 500));
        assert_eq!(s.profile, Profile::Desk);
        let cfg = parse("simulate-coverage --profile paper --k 7 --out r.json").unwrap();
        let Command::SimulateCoverage(a) = &cfg.command else { panic!() };
        let s = a.study.config(a.n, EstimatorKind::Kernel);
        assert_eq!((s.k, s.m, s.b, s.profile), (7, 3000, 1000, Profile::Custom));
    }

    #[test]
    fn usage_errors_exit_two() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("d.csv");
        std::fs::write(&data, "x1,y\n0,1\n").unwrap();
        let e = parse(&format!("predict --data {} --xf 0.5 --alpha 1.5", data.display())).unwrap_err();
        assert_eq!(e.code, EXIT_USAGE);
        assert!(e.message.contains("alpha must be in (0,1)"), "{}", e.message);
        assert!(!e.message.contains('\n'));
        assert_eq!(parse("predict --data missing.csv --xf 0.5").unwrap_err().code, EXIT_USAGE);
        assert_eq!(parse("simulate-coverage --out r.json --bogus").unwrap_err().code, EXIT_USAGE);
        assert_eq!(parse("frobnicate").unwrap_err().code, EXIT_USAGE);
        assert_eq!(parse("--help").unwrap_err().code, EXIT_OK);
    }

    #[test]
    fn config_serializes_round_trip() {
        let cfg = parse("sweep --n-list 50,100 --estimators qr --methods qe,cp --out t.csv --seed 4").unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
