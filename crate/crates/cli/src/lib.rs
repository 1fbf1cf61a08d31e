//! Config-driven front end: `construct`, `verify` and `scan`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use finsler_core::classify::{
    scan, verify_theorem, Aggregate, ResidualReport, SuiteOutcome, Theorem, Verdicts,
};
use finsler_core::config::{OutputFormat, RunConfig};
use finsler_core::error::ConfigError;
use finsler_core::phi::{positivity_scan_admissible, Interval, PhiModel};
use finsler_core::IndexMap;
use serde::Serialize;

pub const TOOL_VERSION: &str = concat!("finsler ", env!("CARGO_PKG_VERSION"));

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_COVERAGE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(
    name = "finsler",
    version,
    about = "Berwald and Landsberg checks for general (alpha, beta)-metrics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summarize a model: admissible intervals, phi preview, positivity.
    Construct(CommonArgs),
    /// Run one verification suite.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        theorem: String,
    },
    /// Classify every grid point and write JSON and CSV reports.
    Scan(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Overrides `grid.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overrides every residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::UnknownTheorem(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Data(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Normalized TOML form of a configuration, with every default filled in.
pub fn normalized_toml(cfg: &RunConfig) -> Result<String, CliError> {
    toml::to_string(cfg).map_err(|e| CliError::Data(e.to_string()))
}

/// Configuration after command-line overrides.
pub fn effective_config(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.grid.seed = seed;
    }
    if let Some(dir) = &args.out {
        cfg.output.dir = dir.display().to_string();
    }
    if let Some(tol) = args.tol {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(CliError::Usage(format!(
                "--tol must be a non-negative number, got {tol}"
            )));
        }
        cfg.tolerances = cfg.tolerances.with_override(tol);
    }
    Ok(cfg)
}

#[derive(Debug, Serialize)]
pub struct IntervalSummary {
    pub b: f64,
    pub interval: Interval,
    pub lo_over_b: f64,
    pub hi_over_b: f64,
    /// `(s / b, phi)` on a fixed preview grid; `None` outside the interval.
    pub preview: Vec<(f64, Option<f64>)>,
}

#[derive(Debug, Serialize)]
pub struct ModelSummary {
    pub kind: String,
    pub intervals: Vec<IntervalSummary>,
    pub min_d1_rel: f64,
    pub min_d2_rel: f64,
    pub positivity_violations: usize,
    pub positivity_failures: usize,
    pub tool_version: &'static str,
}

const PREVIEW_FRACTIONS: [f64; 7] = [-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75];
const POSITIVITY_SAMPLES: usize = 64;

fn b_samples(cfg: &RunConfig) -> Vec<f64> {
    let [lo, hi] = cfg.model.b_range;
    let m = cfg.grid.x_points.max(1);
    (0..m)
        .map(|i| {
            if m == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (m - 1) as f64
            }
        })
        .collect()
}

pub fn cmd_construct(cfg: &RunConfig) -> Result<ModelSummary, CliError> {
    let phi: PhiModel = cfg.phi();
    let bs = b_samples(cfg);
    let mut intervals = Vec::with_capacity(bs.len());
    for &b in &bs {
        let iv = phi
            .admissible(b * b)
            .map_err(|e| CliError::Data(e.to_string()))?;
        let preview = PREVIEW_FRACTIONS
            .iter()
            .map(|&f| (f, phi.value(b * b, f * b).ok()))
            .collect();
        intervals.push(IntervalSummary {
            b,
            interval: iv,
            lo_over_b: iv.lo / b,
            hi_over_b: iv.hi / b,
            preview,
        });
    }
    let pos = positivity_scan_admissible(&phi, &bs, POSITIVITY_SAMPLES, cfg.grid.edge_margin)
        .map_err(|e| CliError::Data(e.to_string()))?;
    Ok(ModelSummary {
        kind: phi.kind().to_string(),
        intervals,
        min_d1_rel: pos.min_d1_rel,
        min_d2_rel: pos.min_d2_rel,
        positivity_violations: pos.violations,
        positivity_failures: pos.failures,
        tool_version: TOOL_VERSION,
    })
}

/// Exit status implied by a suite report.
pub fn verify_exit_code(report: &ResidualReport) -> i32 {
    match &report.suite {
        Some(s) if !s.coverage_ok => EXIT_COVERAGE,
        Some(s) if !s.passed => EXIT_FAIL,
        _ => EXIT_OK,
    }
}

pub fn cmd_verify(cfg: &RunConfig, theorem: &str, jobs: usize) -> Result<ResidualReport, CliError> {
    let t = Theorem::parse(theorem)?;
    Ok(verify_theorem(t, cfg, jobs)?)
}

pub fn cmd_scan(cfg: &RunConfig, jobs: usize) -> Result<ResidualReport, CliError> {
    Ok(scan(cfg, jobs)?)
}

#[derive(Serialize)]
struct JsonReport<'a> {
    config: &'a RunConfig,
    aggregates: &'a IndexMap<String, Aggregate>,
    verdicts: &'a Verdicts,
    suite: &'a Option<SuiteOutcome>,
    points: usize,
    tool_version: &'static str,
}

/// Report JSON: `{config, aggregates, verdicts, suite, points, tool_version}`.
pub fn report_json(cfg: &RunConfig, report: &ResidualReport) -> Result<String, CliError> {
    let doc = JsonReport {
        config: cfg,
        aggregates: &report.aggregates,
        verdicts: &report.verdicts,
        suite: &report.suite,
        points: report.points.len(),
        tool_version: TOOL_VERSION,
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Data(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn float(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.16e}")
    }
}

/// Per-point table: coordinates, `b2`, `s`, every residual, verdicts and
/// positivity flags. Floats carry 17 significant digits.
pub fn report_csv(report: &ResidualReport) -> Result<String, CliError> {
    let n = report.points.iter().map(|p| p.x.len()).max().unwrap_or(0);
    let mut names: Vec<&str> = Vec::new();
    for p in &report.points {
        if let Some(v) = &p.verdict {
            for k in v.residuals.keys() {
                if !names.contains(k) {
                    names.push(k);
                }
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = vec!["index".into()];
    header.extend((0..n).map(|i| format!("x{i}")));
    header.extend((0..n).map(|i| format!("y{i}")));
    header.extend(["b2".into(), "s".into()]);
    header.extend(names.iter().map(|s| s.to_string()));
    header.extend(
        [
            "is_berwald",
            "is_landsberg",
            "is_riemannian",
            "positive_d1",
            "positive_d2",
            "error",
        ]
        .map(String::from),
    );
    let csv_err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for (i, p) in report.points.iter().enumerate() {
        let mut row: Vec<String> = vec![i.to_string()];
        for v in [&p.x, &p.y] {
            row.extend((0..n).map(|k| v.get(k).copied().map_or(String::new(), float)));
        }
        row.push(float(p.b2));
        row.push(float(p.s));
        let v = p.verdict.as_ref();
        for name in &names {
            row.push(
                v.and_then(|v| v.residuals.get(name))
                    .map_or(String::new(), |x| float(*x)),
            );
        }
        let flag = |b: Option<bool>| b.map_or(String::new(), |b| b.to_string());
        row.push(flag(v.map(|v| v.berwald)));
        row.push(flag(v.map(|v| v.landsberg)));
        row.push(flag(v.and_then(|v| v.riemannian)));
        row.push(p.positive_d1.to_string());
        row.push(p.positive_d2.to_string());
        row.push(p.error.clone().unwrap_or_default());
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Data(e.to_string()))
}

/// Write the report files selected in `output.formats`; returns their paths.
pub fn write_report(
    cfg: &RunConfig,
    report: &ResidualReport,
    stem: &str,
) -> Result<Vec<PathBuf>, CliError> {
    let dir = PathBuf::from(&cfg.output.dir);
    fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    let mut written = Vec::new();
    for fmt in &cfg.output.formats {
        let (ext, body) = match fmt {
            OutputFormat::Json => ("json", report_json(cfg, report)?),
            OutputFormat::Csv => ("csv", report_csv(report)?),
        };
        let path = dir.join(format!("{stem}.{ext}"));
        fs::write(&path, body).map_err(|e| io_error(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn write_summary(cfg: &RunConfig, summary: &ModelSummary) -> Result<(String, PathBuf), CliError> {
    let dir = PathBuf::from(&cfg.output.dir);
    fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    let mut text =
        serde_json::to_string_pretty(summary).map_err(|e| CliError::Data(e.to_string()))?;
    text.push('\n');
    let path = dir.join("model.json");
    fs::write(&path, &text).map_err(|e| io_error(&path, e))?;
    Ok((text, path))
}

/// Execute a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("finsler: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Construct(args) => {
            let cfg = effective_config(&args)?;
            let summary = cmd_construct(&cfg)?;
            let (text, _) = write_summary(&cfg, &summary)?;
            print!("{text}");
            Ok(EXIT_OK)
        }
        Command::Verify { common, theorem } => {
            // reject unknown names before touching the config file
            let t = Theorem::parse(&theorem)?;
            let cfg = effective_config(&common)?;
            let report = cmd_verify(&cfg, t.name(), common.jobs)?;
            let paths = write_report(&cfg, &report, &format!("verify-{}", t.name()))?;
            let code = verify_exit_code(&report);
            if let Some(s) = &report.suite {
                println!(
                    "{}: {} ({}) -> {}",
                    s.theorem,
                    if s.passed { "pass" } else { "fail" },
                    s.label,
                    paths
                        .iter()
                        .map(|p| p.display().to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                );
            }
            Ok(code)
        }
        Command::Scan(args) => {
            let cfg = effective_config(&args)?;
            let report = cmd_scan(&cfg, args.jobs)?;
            let paths = write_report(&cfg, &report, "scan")?;
            println!(
                "scanned {} points ({} unclassifiable) -> {}",
                report.points.len(),
                report.verdicts.unclassifiable,
                paths
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            let coverage = report.unclassifiable_fraction() <= cfg.tolerances.coverage;
            Ok(if coverage { EXIT_OK } else { EXIT_COVERAGE })
        }
    }
}
