//! Command-line front end. Exit codes: 0 success, 2 configuration error,
//! 3 numerical-quality failure, 4 verification failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::averages::{
    inverse_average, mixed_average, product_average, ratio_average, ratio_via_products, two_point_product, two_point_ratio,
    AverageResult, FormulaId,
};
use crate::config::{RawConfig, RunConfig};
use crate::error::{Error, Result};
use crate::measure::{build_quadrature, stieltjes_recurrence};
use crate::report::{list_input, render_records, render_recurrence, Record};
use crate::transforms::CauchyRows;
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "unitary-averages", version, about = "Averages of characteristic polynomials over unitary ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the three-term recurrence table (j, a_j, b_j, c_j^2).
    Recurrence(Settings),
    /// Evaluate one closed-form average.
    Average(Settings),
    /// Run verification suites against the brute-force oracles.
    Verify(Settings),
}

/// Every setting may also come from `--config FILE` (key = value lines); flags win.
#[derive(Debug, Args)]
struct Settings {
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// legendre | gaussian | jacobi | tabulated
    #[arg(long)]
    weight: Option<String>,
    /// truncation point of the gaussian weight
    #[arg(long = "Q", allow_hyphen_values = true)]
    q: Option<String>,
    /// lo,hi
    #[arg(long, allow_hyphen_values = true)]
    support: Option<String>,
    /// comma separated weight parameters (jacobi exponents or tabulated values)
    #[arg(long, allow_hyphen_values = true)]
    params: Option<String>,
    /// quadrature nodes discretizing the weight
    #[arg(long)]
    nodes: Option<String>,
    /// highest recurrence degree
    #[arg(long)]
    nmax: Option<String>,
    /// comma separated roots, complex as re+imi
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    /// comma separated poles, complex as re+imi
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long = "K")]
    k: Option<String>,
    #[arg(long = "M")]
    m: Option<String>,
    /// product | inverse | ratio | mixed | two_point_product | two_point_ratio | ratio_via_products
    #[arg(long)]
    formula: Option<String>,
    #[arg(long)]
    output: Option<String>,
    /// csv | text
    #[arg(long)]
    format: Option<String>,
    #[arg(long = "oracle-nodes")]
    oracle_nodes: Option<String>,
    #[arg(long = "oracle-N")]
    oracle_n: Option<String>,
    #[arg(long = "mc-samples")]
    mc_samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// none | transforms | averages | darboux | all
    #[arg(long)]
    suite: Option<String>,
}

impl Settings {
    fn into_config(self) -> Result<RunConfig> {
        let mut raw = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
                RawConfig::parse_text(&text)?
            }
            None => RawConfig::default(),
        };
        let flags = [
            ("weight", self.weight),
            ("Q", self.q),
            ("support", self.support),
            ("params", self.params),
            ("nodes", self.nodes),
            ("nmax", self.nmax),
            ("mu", self.mu),
            ("eps", self.eps),
            ("N", self.n),
            ("K", self.k),
            ("M", self.m),
            ("formula", self.formula),
            ("output", self.output),
            ("format", self.format),
            ("oracle-nodes", self.oracle_nodes),
            ("oracle-N", self.oracle_n),
            ("mc-samples", self.mc_samples),
            ("seed", self.seed),
            ("suite", self.suite),
        ];
        for (flag, value) in flags {
            if let Some(v) = value {
                raw.set_flag(flag, &v)?;
            }
        }
        raw.into_run_config()
    }
}

/// Maps a library error onto the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_recurrence(cfg: &RunConfig) -> Result<i32> {
    let measure = build_quadrature(&cfg.weight, cfg.nodes)?;
    let table = stieltjes_recurrence(&measure, cfg.n_max)?;
    emit(cfg, &render_recurrence(&table, cfg.format))?;
    Ok(EXIT_OK)
}

fn evaluate(cfg: &RunConfig) -> Result<AverageResult> {
    let mu = &cfg.shift.mu;
    let eps = &cfg.shift.eps;
    let n = cfg.n;
    let measure = build_quadrature(&cfg.weight, cfg.nodes)?;
    let degree = cfg.n_max.max(n + mu.len() + 1);
    let table = stieltjes_recurrence(&measure, degree)?;
    let rows = || CauchyRows::build(&measure, &table, eps, degree);
    match cfg.formula {
        FormulaId::Product => product_average(&table, mu, n),
        FormulaId::Inverse => inverse_average(&table, &rows()?, n),
        FormulaId::Ratio => ratio_average(&table, &rows()?, mu, n),
        FormulaId::Mixed => mixed_average(&table, &rows()?, mu, n),
        FormulaId::TwoPointProduct => {
            if mu.len() % 2 != 0 {
                return Err(Error::Config("field `mu`: two_point_product takes 2K roots (λ then μ)".into()));
            }
            let (lambda, rest) = mu.split_at(mu.len() / 2);
            two_point_product(&table, lambda, rest, n)
        }
        FormulaId::TwoPointRatio => two_point_ratio(&table, &rows()?, mu, n),
        FormulaId::RatioViaProducts => ratio_via_products(&measure, &table, mu, eps, n),
    }
}

fn cmd_average(cfg: &RunConfig) -> Result<i32> {
    let result = evaluate(cfg)?;
    let inputs = format!(
        "weight={} N={} K={} M={} {} {}",
        cfg.weight.family,
        cfg.n,
        cfg.k(),
        cfg.m(),
        list_input("mu", &cfg.shift.mu),
        list_input("eps", &cfg.shift.eps)
    );
    let record = Record::from_average(&result, inputs, cfg.nodes);
    emit(cfg, &render_records(&[record], cfg.format))?;
    Ok(EXIT_OK)
}

fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let report = verify::run(cfg)?;
    emit(cfg, &report.render(cfg.format))?;
    for failure in report.failures() {
        eprintln!("verification failed: {}/{}: {}", failure.suite, failure.name, failure.detail);
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY })
}

/// Parses arguments, runs one command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (settings, command): (Settings, fn(&RunConfig) -> Result<i32>) = match cli.command {
        Command::Recurrence(s) => (s, cmd_recurrence),
        Command::Average(s) => (s, cmd_average),
        Command::Verify(s) => (s, cmd_verify),
    };
    let outcome = settings.into_config().and_then(|cfg| command(&cfg));
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
