//! Complex number text format and key=value run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use crate::averages::FormulaId;
use crate::error::{Error, Result};
use crate::measure::{WeightFamily, WeightSpec, DEFAULT_GAUSSIAN_Q, DEFAULT_NODES};
use crate::oracle::OracleConfig;
use crate::transforms::SpectralShift;
use crate::C64;

/// Formats as `re+imi` / `re-imi` using the shortest round-tripping decimals.
pub fn format_complex(z: C64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Parses `a`, `a+bi`, `a-bi`, `bi`, `i`, `-i`, with optional exponents.
pub fn parse_complex(text: &str) -> Result<C64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Config(format!("cannot parse complex number {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not leading and not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(C64::new(re, imag(&body[k..])?))
        }
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

/// Comma separated list of complex numbers; empty text is an empty list.
pub fn parse_complex_list(text: &str) -> Result<Vec<C64>> {
    if text.trim().is_empty() {
        return Ok(vec![]);
    }
    text.split(',').map(parse_complex).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Text,
}

impl OutputFormat {
    pub fn parse(text: &str) -> Option<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "csv" => Some(OutputFormat::Csv),
            "text" | "structured-text" | "txt" => Some(OutputFormat::Text),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    None,
    Transforms,
    Averages,
    Darboux,
    All,
}

impl Suite {
    pub fn parse(text: &str) -> Option<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "none" => Some(Suite::None),
            "transforms" => Some(Suite::Transforms),
            "averages" => Some(Suite::Averages),
            "darboux" => Some(Suite::Darboux),
            "all" => Some(Suite::All),
            _ => None,
        }
    }
}

/// Where a raw setting came from, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    File { line: usize },
    Flag(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { line } => write!(f, "config line {line}"),
            Origin::Flag(name) => write!(f, "flag --{name}"),
        }
    }
}

/// Recognized keys, in canonical spelling (lower case, `-` separated).
pub const KEYS: [&str; 20] = [
    "weight", "q", "support", "params", "nodes", "nmax", "mu", "eps", "n", "k", "m", "formula", "output", "format",
    "oracle-nodes", "oracle-n", "mc-samples", "seed", "suite", "budget",
];

fn canonical_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

/// Unvalidated key/value settings; later insertions override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Origin)>,
}

impl RawConfig {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(Error::Config(format!("config line {line_no}: expected `key = value`, found {body:?}")));
            };
            let key = canonical_key(key);
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("config line {line_no}: unknown field `{}`", key)));
            }
            raw.entries.insert(key, (value.trim().to_string(), Origin::File { line: line_no }));
        }
        Ok(raw)
    }

    /// Sets a value given on the command line as `--flag`.
    pub fn set_flag(&mut self, flag: &str, value: &str) -> Result<()> {
        let key = canonical_key(flag);
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown field `{flag}`")));
        }
        self.entries.insert(key, (value.to_string(), Origin::Flag(flag.to_string())));
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn field_error(&self, key: &str, msg: impl fmt::Display) -> Error {
        match self.entries.get(key) {
            Some((_, origin)) => Error::Config(format!("field `{key}` ({origin}): {msg}")),
            None => Error::Config(format!("field `{key}`: {msg}")),
        }
    }

    fn parsed<T>(&self, key: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => parse(v).map(Some).ok_or_else(|| self.field_error(key, format!("cannot parse {v:?}"))),
        }
    }

    fn reals(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.parsed(key, |v| v.split(',').map(|x| x.trim().parse::<f64>().ok()).collect())
    }

    fn complexes(&self, key: &str) -> Result<Vec<C64>> {
        match self.get(key) {
            None => Ok(vec![]),
            Some(v) => parse_complex_list(v).map_err(|e| self.field_error(key, e)),
        }
    }

    fn weight(&self) -> Result<WeightSpec> {
        let family = self
            .parsed("weight", WeightFamily::parse)?
            .unwrap_or(WeightFamily::Legendre);
        let q = self.parsed("q", |v| v.trim().parse::<f64>().ok())?;
        let params = self.reals("params")?;
        let support = match self.reals("support")? {
            Some(v) if v.len() == 2 => Some((v[0], v[1])),
            Some(_) => return Err(self.field_error("support", "expected two numbers `lo,hi`")),
            None => None,
        };
        let spec = match family {
            WeightFamily::Legendre => WeightSpec { support: support.unwrap_or((-1.0, 1.0)), ..WeightSpec::legendre() },
            WeightFamily::GaussianTruncated => {
                let q = q.unwrap_or(DEFAULT_GAUSSIAN_Q);
                WeightSpec { support: support.unwrap_or((-q, q)), ..WeightSpec::gaussian(q) }
            }
            WeightFamily::JacobiLike => {
                let (lo, hi) = support.unwrap_or((-1.0, 1.0));
                WeightSpec { family, params: params.clone().unwrap_or_default(), support: (lo, hi) }
            }
            WeightFamily::Tabulated => {
                let (lo, hi) = support.unwrap_or((-1.0, 1.0));
                WeightSpec { family, params: params.clone().unwrap_or_default(), support: (lo, hi) }
            }
        };
        if q.is_some() && family != WeightFamily::GaussianTruncated {
            return Err(self.field_error("q", format!("only applies to the gaussian-truncated weight, not {family}")));
        }
        spec.validate().map_err(|e| {
            let key = if self.get("params").is_some() && matches!(family, WeightFamily::JacobiLike | WeightFamily::Tabulated) {
                "params"
            } else if self.get("q").is_some() {
                "q"
            } else if self.get("support").is_some() {
                "support"
            } else {
                "weight"
            };
            self.field_error(key, e)
        })?;
        Ok(spec)
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        self.parsed(key, |v| v.trim().parse::<usize>().ok())
    }

    /// Validates every field. The pole count is compared with N first.
    pub fn into_run_config(self) -> Result<RunConfig> {
        let n = self.count("n")?.unwrap_or(1);
        let mu = self.complexes("mu")?;
        let eps = self.complexes("eps")?;
        let m = self.count("m")?.unwrap_or(eps.len());
        if m > n {
            return Err(self.field_error("m", format!("M exceeds N (M = {m}, N = {n})")));
        }
        if m != eps.len() {
            return Err(self.field_error("m", format!("M = {m} but {} values of eps were given", eps.len())));
        }
        let k = self.count("k")?.unwrap_or(mu.len());
        if k != mu.len() {
            return Err(self.field_error("k", format!("K = {k} but {} values of mu were given", mu.len())));
        }
        let weight = self.weight()?;
        let nodes = self.count("nodes")?.unwrap_or(DEFAULT_NODES);
        if nodes < 2 {
            return Err(self.field_error("nodes", "need at least 2 nodes"));
        }
        let n_max = self.count("nmax")?.unwrap_or(12);
        let formula = self.parsed("formula", FormulaId::parse)?.unwrap_or(FormulaId::Ratio);
        let format = self.parsed("format", OutputFormat::parse)?.unwrap_or(OutputFormat::Csv);
        let suite = self.parsed("suite", Suite::parse)?.unwrap_or(Suite::All);
        let defaults = OracleConfig::default();
        let oracle = OracleConfig {
            nodes_per_dim: self.count("oracle-nodes")?.unwrap_or(defaults.nodes_per_dim),
            n: self.count("oracle-n")?.unwrap_or(defaults.n),
            mc_samples: self.count("mc-samples")?.unwrap_or(defaults.mc_samples),
            rng_seed: self.parsed("seed", |v| v.trim().parse::<u64>().ok())?.unwrap_or(defaults.rng_seed),
            budget: self.count("budget")?.unwrap_or(defaults.budget),
            refinement_tolerance: defaults.refinement_tolerance,
        };
        if oracle.nodes_per_dim < 2 {
            return Err(self.field_error("oracle-nodes", "need at least 2 nodes"));
        }
        Ok(RunConfig {
            weight,
            nodes,
            n_max,
            shift: SpectralShift::new(mu, eps),
            n,
            formula,
            output: self.get("output").map(PathBuf::from),
            format,
            oracle,
            suite,
        })
    }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub weight: WeightSpec,
    /// Quadrature nodes used to discretize the weight.
    pub nodes: usize,
    pub n_max: usize,
    pub shift: SpectralShift,
    pub n: usize,
    pub formula: FormulaId,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub oracle: OracleConfig,
    pub suite: Suite,
}

impl RunConfig {
    pub fn k(&self) -> usize {
        self.shift.mu.len()
    }

    pub fn m(&self) -> usize {
        self.shift.eps.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_complex("4+1i").unwrap(), C64::new(4.0, 1.0));
        assert_eq!(parse_complex("2").unwrap(), C64::new(2.0, 0.0));
        assert_eq!(parse_complex("-3i").unwrap(), C64::new(0.0, -3.0));
        assert_eq!(parse_complex("i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(parse_complex("1-i").unwrap(), C64::new(1.0, -1.0));
        assert_eq!(parse_complex("1e-3+2.5e2i").unwrap(), C64::new(1e-3, 250.0));
        assert_eq!(parse_complex(" 0.5 + 1i ").unwrap(), C64::new(0.5, 1.0));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
        assert_eq!(format_complex(C64::new(4.0, 1.0)), "4+1i");
        assert_eq!(format_complex(C64::new(2.0, -0.5)), "2-0.5i");
        assert_eq!(parse_complex_list("2, 3+1i").unwrap().len(), 2);
    }

    #[test]
    fn file_then_flags() {
        let text = "# comment\nweight = gaussian\nQ = 5\nmu = 3, 4+1i\nN = 2\n\nformula = product # trailing\n";
        let mut raw = RawConfig::parse_text(text).unwrap();
        raw.set_flag("N", "3").unwrap();
        let cfg = raw.into_run_config().unwrap();
        assert_eq!(cfg.weight, WeightSpec::gaussian(5.0));
        assert_eq!(cfg.n, 3);
        assert_eq!(cfg.k(), 2);
        assert_eq!(cfg.formula, FormulaId::Product);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = RawConfig::parse_text("weight = legendre\nnodes = many\n").unwrap().into_run_config().unwrap_err();
        assert!(err.to_string().contains("`nodes` (config line 2)"), "{err}");
        let err = RawConfig::parse_text("colour = red\n").unwrap_err();
        assert!(err.to_string().contains("line 1") && err.to_string().contains("colour"));
        let err = RawConfig::parse_text("weight legendre\n").unwrap_err();
        assert!(err.to_string().contains("line 1"));
        let mut raw = RawConfig::default();
        raw.set_flag("weight", "hyperbolic").unwrap();
        assert!(raw.into_run_config().unwrap_err().to_string().contains("--weight"));
        let mut raw = RawConfig::default();
        raw.set_flag("weight", "gaussian").unwrap();
        raw.set_flag("Q", "-1").unwrap();
        assert!(raw.into_run_config().unwrap_err().to_string().contains("--Q"));
    }

    #[test]
    fn pole_count_checked_first() {
        let mut raw = RawConfig::default();
        raw.set_flag("M", "3").unwrap();
        raw.set_flag("N", "2").unwrap();
        raw.set_flag("weight", "nonsense").unwrap();
        let err = raw.into_run_config().unwrap_err();
        assert!(err.to_string().contains("M exceeds N"), "{err}");
    }

    proptest! {
        #[test]
        fn complex_round_trip(re in -1e12f64..1e12, im in -1e12f64..1e12) {
            let z = C64::new(re, im);
            prop_assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }

        #[test]
        fn complex_round_trip_any_finite(re in proptest::num::f64::NORMAL | proptest::num::f64::ZERO, im in proptest::num::f64::NORMAL | proptest::num::f64::ZERO) {
            let z = C64::new(re, im);
            prop_assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }
}
