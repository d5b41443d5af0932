//! Command-line front end: analytic tables, ensemble simulation and
//! verification suites.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::aggregation::CenterMethod;
use crate::analytic::{
    b_alpha, basis_vectors, c_alpha, constant_c_default, levy_mass_above, stationary_tail_constant,
    sum_tail_ratio, ModelParams,
};
use crate::error::{Error, Result};
use crate::heavy_tail::ScalingMode;
use crate::sim::{simulate_ensemble, SimConfig};
use crate::verify::{
    check_corollary28, check_forward_tail, check_karamata, check_stationary_tail, check_tail_ratio,
    check_theorem21, check_theorem29, AggregationMode, CheckName, CheckOptions, NSchedule,
    VerificationReport,
};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "GWILAB_OUT";
const DEFAULT_OUT: &str = "gwilab-out";

/// Everything a run needs; parsed from `key = value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub m_xi: f64,
    /// Copies `N` for the characteristic-function checks and `simulate`.
    pub n_copies: u64,
    /// Time scale `n` of the iterated limit.
    pub n: u64,
    pub k: usize,
    pub seed: u64,
    /// Generations after `X_0` written by `simulate`.
    pub horizon: usize,
    /// Copies and horizon of the tail checks.
    pub tail_n_copies: u64,
    pub tail_k: usize,
    pub t_points: Vec<f64>,
    pub karamata_beta: f64,
    pub karamata_x: Vec<f64>,
    pub k_max: usize,
    /// `None` runs every check that applies at `alpha`.
    pub checks: Option<Vec<CheckName>>,
    pub out: Option<PathBuf>,
    pub options: CheckOptions,
    checks_line: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            m_xi: 0.5,
            n_copies: 100_000,
            n: 100,
            k: 1,
            seed: 1,
            horizon: 2,
            tail_n_copies: 1_000_000,
            tail_k: 2,
            t_points: vec![1.0],
            karamata_beta: 2.0,
            karamata_x: vec![10.0, 100.0, 1e3, 1e4],
            k_max: 3,
            checks: None,
            out: None,
            options: CheckOptions::default(),
            checks_line: 0,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    // Integers may be written as 1e5.
    value.parse::<T>().or_else(|_| {
        value
            .parse::<f64>()
            .ok()
            .filter(|v| v.fract() == 0.0 && *v >= 0.0 && *v < 1.8e19)
            .and_then(|v| format!("{}", v as u64).parse::<T>().ok())
            .ok_or_else(|| format!("cannot parse '{value}' as a value for {key}"))
    })
}

fn parse_list(key: &str, value: &str) -> std::result::Result<Vec<f64>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num::<f64>(key, s))
        .collect()
}

impl RunConfig {
    /// Parses a whole config file; nothing is applied unless every line is valid.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected key = value, got '{content}'"),
            })?;
            let key = key.trim();
            if let Some(prev) = seen.insert(key.to_string(), line) {
                return Err(Error::Config {
                    line,
                    message: format!("duplicate key '{key}' (first set on line {prev})"),
                });
            }
            cfg.set(key, value.trim(), line)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one setting; `line` labels diagnostics.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let err = |message: String| Error::Config { line, message };
        let o = &mut self.options;
        match key {
            "alpha" => self.alpha = parse_num(key, value).map_err(err)?,
            "m_xi" => self.m_xi = parse_num(key, value).map_err(err)?,
            "N" => self.n_copies = parse_num(key, value).map_err(err)?,
            "n" => self.n = parse_num(key, value).map_err(err)?,
            "k" => self.k = parse_num(key, value).map_err(err)?,
            "seed" => self.seed = parse_num(key, value).map_err(err)?,
            "horizon" => self.horizon = parse_num(key, value).map_err(err)?,
            "tail_N" => self.tail_n_copies = parse_num(key, value).map_err(err)?,
            "tail_k" => self.tail_k = parse_num(key, value).map_err(err)?,
            "t_points" => self.t_points = parse_list(key, value).map_err(err)?,
            "karamata_beta" => self.karamata_beta = parse_num(key, value).map_err(err)?,
            "karamata_x" => self.karamata_x = parse_list(key, value).map_err(err)?,
            "k_max" => self.k_max = parse_num(key, value).map_err(err)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "checks" => {
                self.checks_line = line;
                self.checks = if value == "default" {
                    None
                } else {
                    Some(
                        value
                            .split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(|s| s.parse::<CheckName>().map_err(|e| err(e.to_string())))
                            .collect::<Result<_>>()?,
                    )
                };
            }
            "z_max" => o.z_max = parse_num(key, value).map_err(err)?,
            "bias_allowance" => o.bias_allowance = parse_num(key, value).map_err(err)?,
            "replications" => o.replications = parse_num(key, value).map_err(err)?,
            "alpha_one_replications" => o.alpha_one_replications = parse_num(key, value).map_err(err)?,
            "center_sample" => o.center_sample = parse_num(key, value).map_err(err)?,
            "center_method" => {
                o.center_method = match value {
                    "auto" => None,
                    "empirical" => Some(CenterMethod::Empirical),
                    "hybrid" => Some(CenterMethod::Hybrid),
                    "mean_minus_tail" => Some(CenterMethod::MeanMinusTail),
                    _ => {
                        return Err(err(format!(
                            "center_method must be auto, empirical, hybrid or mean_minus_tail, got '{value}'"
                        )))
                    }
                }
            }
            "scaling" => {
                o.scaling = match value {
                    "asymptotic" => ScalingMode::Asymptotic,
                    "empirical" => ScalingMode::Empirical,
                    _ => return Err(err(format!("scaling must be asymptotic or empirical, got '{value}'"))),
                }
            }
            "n_schedule" => {
                o.n_schedule = match value {
                    "max_square" => NSchedule::MaxSquare,
                    "max_cube" => NSchedule::MaxCube,
                    _ => match value.strip_prefix("fixed:") {
                        Some(n) => NSchedule::Fixed(parse_num(key, n.trim()).map_err(err)?),
                        None => {
                            return Err(err(format!(
                                "n_schedule must be max_square, max_cube or fixed:<N>, got '{value}'"
                            )))
                        }
                    },
                }
            }
            "quantile" => o.quantile = parse_num(key, value).map_err(err)?,
            "sigma_multiple" => o.sigma_multiple = parse_num(key, value).map_err(err)?,
            "ks_level" => o.ks_level = parse_num(key, value).map_err(err)?,
            "collapse_tolerance" => o.collapse_tolerance = parse_num(key, value).map_err(err)?,
            "karamata_tolerance" => o.karamata_tolerance = parse_num(key, value).map_err(err)?,
            "concentration_mean_tolerance" => {
                o.concentration_mean_tolerance = parse_num(key, value).map_err(err)?
            }
            "concentration_spread" => o.concentration_spread = parse_num(key, value).map_err(err)?,
            _ => return Err(err(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Cross-field checks; problems are reported against the `checks` line
    /// when they concern the check list, line 0 otherwise.
    pub fn validate(&self) -> Result<()> {
        let cfg_err = |line: usize, message: String| Error::Config { line, message };
        self.params().map_err(|e| cfg_err(0, e.to_string()))?;
        self.options.validate().map_err(|e| cfg_err(0, e.to_string()))?;
        if self.n_copies == 0 || self.tail_n_copies == 0 {
            return Err(cfg_err(0, "N and tail_N must be positive".into()));
        }
        if self.n < 2 {
            return Err(cfg_err(0, format!("n must be at least 2, got {}", self.n)));
        }
        if let Some(checks) = &self.checks {
            if let Some(c) = checks.iter().find(|c| !c.applies(self.alpha)) {
                return Err(cfg_err(
                    self.checks_line,
                    format!("check {c} does not apply at alpha = {}", self.alpha),
                ));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.m_xi, self.alpha)
    }

    pub fn check_list(&self) -> Vec<CheckName> {
        self.checks
            .clone()
            .unwrap_or_else(|| CheckName::default_suite(self.alpha))
    }
}

/// Runs one named check under `cfg`.
pub fn run_check(name: CheckName, cfg: &RunConfig) -> Result<VerificationReport> {
    let p = cfg.params()?;
    let o = &cfg.options;
    match name {
        CheckName::Theorem21 => check_theorem21(&p, cfg.k, cfg.n_copies, None, cfg.seed, o),
        CheckName::Corollary28I => check_corollary28(&p, cfg.k, cfg.n_copies, AggregationMode::I, None, cfg.seed, o),
        CheckName::Corollary28Ii => check_corollary28(&p, cfg.k, cfg.n_copies, AggregationMode::Ii, None, cfg.seed, o),
        CheckName::Corollary28Iii => {
            check_corollary28(&p, cfg.k, cfg.n_copies, AggregationMode::Iii, None, cfg.seed, o)
        }
        CheckName::Theorem29 => check_theorem29(&p, cfg.n, &cfg.t_points, None, cfg.seed, o),
        CheckName::TailRatio => check_tail_ratio(&p, cfg.k, cfg.tail_n_copies, o.quantile, cfg.seed, o),
        CheckName::StationaryTail => check_stationary_tail(&p, cfg.tail_n_copies, o.quantile, cfg.seed, o),
        CheckName::ForwardTail => check_forward_tail(&p, cfg.tail_k, cfg.tail_n_copies, cfg.seed, o),
        CheckName::Karamata => check_karamata(&p, cfg.karamata_beta, &cfg.karamata_x, o),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "gwilab", version, about = "Stable limits of aggregated Galton-Watson processes with heavy-tailed immigration")]
pub struct Cli {
    /// key = value config file
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory [default: $GWILAB_OUT, then ./gwilab-out]
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it [default: all cores]
    #[arg(long, global = true, value_name = "INT")]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Config override, applied after the file
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the analytic constants for horizons up to k_max
    Table,
    /// Simulate N stationary copies over `horizon` generations and write ensemble.csv
    Simulate,
    /// Run verification checks and write one report per check
    Verify {
        /// Comma-separated check names; overrides the config
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
    },
}

#[derive(Debug, Serialize)]
struct HorizonRow {
    k: usize,
    sum_tail_ratio: f64,
    levy_mass_above_1: f64,
    basis: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
struct Table {
    alpha: f64,
    m_xi: f64,
    c_alpha: f64,
    c: f64,
    b_alpha: Option<f64>,
    stationary_tail_constant: f64,
    horizons: Vec<HorizonRow>,
}

fn build_table(params: &ModelParams, k_max: usize) -> Result<Table> {
    let horizons = (0..=k_max)
        .map(|k| {
            Ok(HorizonRow {
                k,
                sum_tail_ratio: sum_tail_ratio(k, params),
                levy_mass_above_1: levy_mass_above(k, params, 1.0)?,
                basis: basis_vectors(k, params).vectors,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Table {
        alpha: params.alpha(),
        m_xi: params.m_xi(),
        c_alpha: c_alpha(params.alpha()),
        c: constant_c_default(),
        b_alpha: if params.is_alpha_one() { None } else { Some(b_alpha(params)?) },
        stationary_tail_constant: stationary_tail_constant(params),
        horizons,
    })
}

/// Table of analytic constants, deterministic for given inputs.
pub fn cmd_table(params: &ModelParams, k_max: usize, format: Format) -> Result<String> {
    let t = build_table(params, k_max)?;
    let mut s = String::new();
    match format {
        Format::Json => {
            s = serde_json::to_string_pretty(&t).map_err(|e| Error::Io(e.to_string()))?;
            s.push('\n');
        }
        Format::Csv => {
            s.push_str("quantity,k,j,l,value\n");
            let _ = writeln!(s, "c_alpha,,,,{}", t.c_alpha);
            let _ = writeln!(s, "c,,,,{}", t.c);
            if let Some(b) = t.b_alpha {
                let _ = writeln!(s, "b_alpha,,,,{b}");
            }
            let _ = writeln!(s, "stationary_tail_constant,,,,{}", t.stationary_tail_constant);
            for h in &t.horizons {
                let _ = writeln!(s, "sum_tail_ratio,{},,,{}", h.k, h.sum_tail_ratio);
                let _ = writeln!(s, "levy_mass_above_1,{},,,{}", h.k, h.levy_mass_above_1);
                for (j, v) in h.basis.iter().enumerate() {
                    for (l, x) in v.iter().enumerate() {
                        let _ = writeln!(s, "basis,{},{j},{l},{x}", h.k);
                    }
                }
            }
        }
        Format::Text => {
            let _ = writeln!(s, "alpha = {}, m_xi = {}\n", t.alpha, t.m_xi);
            let _ = writeln!(s, "{:<26} {:>12.6}", "C_alpha", t.c_alpha);
            let _ = writeln!(s, "{:<26} {:>12.6}", "C", t.c);
            match t.b_alpha {
                Some(b) => {
                    let _ = writeln!(s, "{:<26} {:>12.6}", "b_alpha", b);
                }
                None => {
                    let _ = writeln!(s, "{:<26} {:>12}", "b_alpha", "-");
                }
            }
            let _ = writeln!(s, "{:<26} {:>12.6}", "stationary_tail_constant", t.stationary_tail_constant);
            let _ = writeln!(s, "\n{:>3} {:>16} {:>18}  basis v_j", "k", "sum_tail_ratio", "levy_mass_above(1)");
            for h in &t.horizons {
                for (j, v) in h.basis.iter().enumerate() {
                    let vs: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
                    if j == 0 {
                        let _ = write!(s, "{:>3} {:>16.6} {:>18.6}", h.k, h.sum_tail_ratio, h.levy_mass_above_1);
                    } else {
                        let _ = write!(s, "{:>3} {:>16} {:>18}", "", "", "");
                    }
                    let _ = writeln!(s, "  v_{j} = ({})", vs.join(", "));
                }
            }
        }
    }
    Ok(s)
}

/// Writes `ensemble.csv` into `out`; returns its path.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<PathBuf> {
    let params = cfg.params()?;
    let ens = simulate_ensemble(&params, &SimConfig::new(cfg.n_copies, cfg.horizon, cfg.seed))?;
    fs::create_dir_all(out)?;
    let path = out.join("ensemble.csv");
    let mut w = BufWriter::new(fs::File::create(&path)?);
    ens.write_csv(&mut w)?;
    w.flush()?;
    Ok(path)
}

#[derive(Debug, Serialize)]
struct ReportMeta<'a> {
    check: &'a str,
    wall_seconds: f64,
    jobs: usize,
    version: &'a str,
}

/// Outcome of one check in a suite.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteEntry {
    pub check: String,
    pub pass: bool,
    pub max_z: Option<f64>,
    pub max_discrepancy: Option<f64>,
    pub error: Option<String>,
    #[serde(skip)]
    pub wall_seconds: f64,
}

/// Runs the configured checks, writes `<check>.json`, `<check>.meta.json`
/// and, for characteristic-function checks, `<check>.ecf.csv` into `out`.
pub fn cmd_verify(cfg: &RunConfig, out: &Path) -> Result<Vec<SuiteEntry>> {
    let checks = cfg.check_list();
    if checks.is_empty() {
        return Ok(Vec::new());
    }
    fs::create_dir_all(out)?;
    let results: Vec<(CheckName, Result<VerificationReport>, f64)> = checks
        .par_iter()
        .map(|&c| {
            let start = Instant::now();
            let r = run_check(c, cfg);
            (c, r, start.elapsed().as_secs_f64())
        })
        .collect();
    let jobs = rayon::current_num_threads();
    let mut entries = Vec::with_capacity(results.len());
    for (name, result, wall) in results {
        let meta = ReportMeta {
            check: name.as_str(),
            wall_seconds: wall,
            jobs,
            version: env!("CARGO_PKG_VERSION"),
        };
        let meta_json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(out.join(format!("{name}.meta.json")), meta_json + "\n")?;
        match result {
            Ok(report) => {
                fs::write(out.join(format!("{name}.json")), report.to_json()? + "\n")?;
                if !report.points.is_empty() {
                    let mut w = BufWriter::new(fs::File::create(out.join(format!("{name}.ecf.csv")))?);
                    report.write_ecf_csv(&mut w)?;
                    w.flush()?;
                }
                entries.push(SuiteEntry {
                    check: name.to_string(),
                    pass: report.pass,
                    max_z: report.max_z,
                    max_discrepancy: report.max_discrepancy,
                    error: None,
                    wall_seconds: wall,
                });
            }
            Err(e) => {
                fs::write(out.join(format!("{name}.error.txt")), format!("{e}\n"))?;
                entries.push(SuiteEntry {
                    check: name.to_string(),
                    pass: false,
                    max_z: None,
                    max_discrepancy: None,
                    error: Some(e.to_string()),
                    wall_seconds: wall,
                });
            }
        }
    }
    Ok(entries)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
}

/// Suite summary for standard output.
pub fn format_summary(entries: &[SuiteEntry], format: Format) -> Result<String> {
    let mut s = String::new();
    match format {
        Format::Json => {
            s = serde_json::to_string_pretty(entries).map_err(|e| Error::Io(e.to_string()))?;
            s.push('\n');
        }
        Format::Csv => {
            s.push_str("check,result,max_z,max_discrepancy,error\n");
            for e in entries {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    e.check,
                    if e.pass { "pass" } else { "fail" },
                    e.max_z.map_or(String::new(), |v| v.to_string()),
                    e.max_discrepancy.map_or(String::new(), |v| v.to_string()),
                    e.error.as_deref().unwrap_or("").replace(',', ";")
                );
            }
        }
        Format::Text => {
            let _ = writeln!(s, "{:<18} {:<6} {:>8} {:>10} {:>9}", "check", "result", "max z", "max diff", "seconds");
            for e in entries {
                let _ = write!(
                    s,
                    "{:<18} {:<6} {:>8} {:>10} {:>9.1}",
                    e.check,
                    if e.pass { "PASS" } else { "FAIL" },
                    opt(e.max_z),
                    opt(e.max_discrepancy),
                    e.wall_seconds
                );
                if let Some(err) = &e.error {
                    let _ = write!(s, "  error: {err}");
                }
                s.push('\n');
            }
            let passed = entries.iter().filter(|e| e.pass).count();
            let _ = writeln!(s, "{passed}/{} checks passed", entries.len());
        }
    }
    Ok(s)
}

/// Process exit code for an error: 2 for usage and configuration, 3 for I/O, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 3,
        Error::Config { .. } | Error::Usage(_) | Error::InvalidParams(_) | Error::Centering(_) => 2,
        _ => 1,
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    for (i, kv) in cli.set.iter().enumerate() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim(), 0)
            .map_err(|e| Error::Usage(format!("--set #{}: {e}", i + 1)))?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    if let Command::Verify { checks: Some(names) } = &cli.command {
        cfg.checks = Some(
            names
                .iter()
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<CheckName>().map_err(|e| Error::Usage(e.to_string())))
                .collect::<Result<_>>()?,
        );
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn execute(cli: &Cli) -> Result<i32> {
    let cfg = load_config(cli)?;
    let mut stdout = io::stdout().lock();
    match &cli.command {
        Command::Table => {
            let text = cmd_table(&cfg.params()?, cfg.k_max, cli.format.unwrap_or(Format::Text))?;
            stdout.write_all(text.as_bytes())?;
            Ok(0)
        }
        Command::Simulate => {
            if matches!(cli.format, Some(f) if f != Format::Csv) {
                return Err(Error::Usage("simulate writes CSV only".into()));
            }
            let path = cmd_simulate(&cfg, &out_dir(&cfg))?;
            writeln!(stdout, "wrote {}", path.display())?;
            Ok(0)
        }
        Command::Verify { .. } => {
            let entries = cmd_verify(&cfg, &out_dir(&cfg))?;
            let text = format_summary(&entries, cli.format.unwrap_or(Format::Text))?;
            stdout.write_all(text.as_bytes())?;
            Ok(if entries.iter().all(|e| e.pass) { 0 } else { 1 })
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 2;
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_lists() {
        let cfg = RunConfig::parse(
            "# demo\nalpha = 1.5\nm_xi=0.25  # trailing\n\nN = 1e5\nchecks = karamata, tail_ratio\nt_points = 0.5, 1\nn_schedule = fixed:1000\n",
        )
        .unwrap();
        assert_eq!(cfg.alpha, 1.5);
        assert_eq!(cfg.m_xi, 0.25);
        assert_eq!(cfg.n_copies, 100_000);
        assert_eq!(cfg.t_points, vec![0.5, 1.0]);
        assert_eq!(cfg.options.n_schedule, NSchedule::Fixed(1000));
        assert_eq!(cfg.check_list(), vec![CheckName::Karamata, CheckName::TailRatio]);
    }

    fn line_of(text: &str) -> usize {
        match RunConfig::parse(text) {
            Err(Error::Config { line, .. }) => line,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        assert_eq!(line_of("alpha = 0.5\nbogus = 1\n"), 2);
        assert_eq!(line_of("\n\nno equals sign\n"), 3);
        assert_eq!(line_of("alpha = x\n"), 1);
        assert_eq!(line_of("checks = karamata, theorem99\n"), 1);
        assert_eq!(line_of("seed = 1\nseed = 2\n"), 2);
        assert_eq!(line_of("alpha = 0.5\n\nchecks = corollary28_iii\n"), 3);
        assert_eq!(line_of("alpha = 2.5\n"), 0);
        assert_eq!(line_of("k = -1\n"), 1);
    }

    #[test]
    fn empty_check_list() {
        let cfg = RunConfig::parse("checks =\n").unwrap();
        assert!(cfg.check_list().is_empty());
        let cfg = RunConfig::parse("checks = default\nalpha = 1.5\n").unwrap();
        assert!(cfg.check_list().contains(&CheckName::Corollary28Iii));
    }

    #[test]
    fn table_rows() {
        let p = ModelParams::new(0.5, 1.0).unwrap();
        let text = cmd_table(&p, 1, Format::Text).unwrap();
        assert!(text.contains("C_alpha                        1.570796"));
        let p0 = ModelParams::new(0.0, 0.5).unwrap();
        let csv = cmd_table(&p0, 2, Format::Csv).unwrap();
        assert!(csv.contains("stationary_tail_constant,,,,1\n"));
        assert!(csv.contains("sum_tail_ratio,2,,,3\n"));
        let json = cmd_table(&ModelParams::new(0.5, 0.5).unwrap(), 1, Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let r = v["horizons"][1]["sum_tail_ratio"].as_f64().unwrap();
        assert!((r - 1.517_638_090_205_041).abs() < 1e-12);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Io("x".into())), 3);
        assert_eq!(exit_code(&Error::Config { line: 1, message: "x".into() }), 2);
        assert_eq!(exit_code(&Error::InsufficientExceedances { found: 1, needed: 2 }), 1);
    }
}
