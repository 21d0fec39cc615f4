//! Flag parsing and resolution of a [`RunConfig`] from flags, an optional
//! flat `key = value` file, and defaults (in that order of precedence).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use decoupling_lab::expsum::CoeffRule;
use decoupling_lab::families::{FamilyKind, DEFAULT_BUDGET, DEFAULT_EPS0, DEFAULT_SEP_EXPONENT, DEFAULT_TAIL_CUTOFF, DEFAULT_TRUNC};
use decoupling_lab::mixed_norm::parse_rational;
use decoupling_lab::Exponent;
use num_rational::Rational64;

use crate::error::CliError;

/// Flags shared by every subcommand. Values are kept as strings until
/// merged with the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Spatial dimension d
    #[arg(long)]
    pub d: Option<String>,
    /// Outer (time) exponent; accepts "inf" and fractions like "10/3"
    #[arg(long)]
    pub q: Option<String>,
    /// Inner (space) exponent
    #[arg(long)]
    pub r: Option<String>,
    /// bush, space, time or tunedbush
    #[arg(long)]
    pub family: Option<String>,
    /// Comma-separated scales, e.g. "1/4,1/8,1/16"
    #[arg(long)]
    pub deltas: Option<String>,
    /// Comma-separated exponential-sum lengths, e.g. "8,16,32,64"
    #[arg(long = "N")]
    pub n: Option<String>,
    /// ones, single or random
    #[arg(long)]
    pub coeffs: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Envelope order: decay (1+|t|)^{-2m}
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long)]
    pub hx: Option<String>,
    #[arg(long)]
    pub ht: Option<String>,
    /// Tube dilate covered by the automatic grid
    #[arg(long)]
    pub trunc: Option<String>,
    /// Envelope level below which packets are not evaluated
    #[arg(long = "tail-cutoff")]
    pub tail_cutoff: Option<String>,
    #[arg(long = "sep-exponent")]
    pub sep_exponent: Option<String>,
    #[arg(long)]
    pub eps0: Option<String>,
    /// lattice (default) or origin (the one-point net {0})
    #[arg(long)]
    pub net: Option<String>,
    #[arg(long)]
    pub oversample: Option<String>,
    /// Maximum grid samples per synthesis
    #[arg(long)]
    pub budget: Option<String>,
    /// Slope tolerance for the pass column
    #[arg(long)]
    pub tol: Option<String>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// csv or json
    #[arg(long)]
    pub format: Option<String>,
    /// Restrict selftest to one suite
    #[arg(long)]
    pub suite: Option<String>,
    /// Flat key = value file; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Flags {
    fn entries(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("d", &self.d),
            ("q", &self.q),
            ("r", &self.r),
            ("family", &self.family),
            ("deltas", &self.deltas),
            ("N", &self.n),
            ("coeffs", &self.coeffs),
            ("seed", &self.seed),
            ("m", &self.m),
            ("hx", &self.hx),
            ("ht", &self.ht),
            ("trunc", &self.trunc),
            ("tail-cutoff", &self.tail_cutoff),
            ("sep-exponent", &self.sep_exponent),
            ("eps0", &self.eps0),
            ("net", &self.net),
            ("oversample", &self.oversample),
            ("budget", &self.budget),
            ("tol", &self.tol),
            ("threads", &self.threads),
            ("out", &self.out),
            ("format", &self.format),
            ("suite", &self.suite),
        ]
    }

    /// Merge the config file (if any) with the flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut map = match &self.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        for (k, v) in self.entries() {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        RunConfig::from_map(&map)
    }
}

pub const KEYS: [&str; 23] = [
    "d", "q", "r", "family", "deltas", "N", "coeffs", "seed", "m", "hx", "ht", "trunc", "tail-cutoff", "sep-exponent", "eps0",
    "net", "oversample", "budget", "tol", "threads", "out", "format", "suite",
];

fn canonical_key(k: &str) -> Option<&'static str> {
    let k = k.trim().replace('_', "-");
    match k.as_str() {
        "n" => Some("N"),
        _ => KEYS.iter().copied().find(|c| *c == k),
    }
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = canonical_key(k).ok_or_else(|| CliError::Usage(format!("config line {}: unknown key '{}'", lineno + 1, k.trim())))?;
        map.insert(key.to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetChoice {
    Lattice,
    Origin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub d: usize,
    pub q: Exponent,
    pub r: Exponent,
    pub family: FamilyKind,
    /// Decreasing.
    pub deltas: Vec<f64>,
    /// Increasing.
    pub n_ladder: Vec<usize>,
    pub coeffs: CoeffRule,
    pub seed: u64,
    pub m: u32,
    pub h_x: f64,
    pub h_t: f64,
    pub trunc: f64,
    pub tail_cutoff: f64,
    pub sep_exponent: f64,
    pub eps0: f64,
    pub net: NetChoice,
    pub oversample: usize,
    pub budget: u64,
    pub tol: f64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub suite: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_map(&BTreeMap::new()).expect("defaults are valid")
    }
}

fn usage<T>(msg: String) -> Result<T, CliError> {
    Err(CliError::Usage(msg))
}

fn real(key: &str, v: &str) -> Result<f64, CliError> {
    let v = v.trim();
    if let Some(x) = parse_rational(v) {
        return Ok(rational_f64(x));
    }
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::Usage(format!("--{key}: cannot parse '{v}' as a number")))
}

fn rational_f64(x: Rational64) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn integer<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim().parse().map_err(|_| CliError::Usage(format!("--{key}: cannot parse '{v}' as an integer")))
}

fn exponent(key: &str, v: &str) -> Result<Exponent, CliError> {
    v.parse().map_err(|e| CliError::Usage(format!("--{key}: {e}")))
}

impl RunConfig {
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let get = |k: &str| map.get(k).map(String::as_str);
        let d: usize = get("d").map(|v| integer("d", v)).transpose()?.unwrap_or(1);
        if d == 0 {
            return usage("--d must be >= 1".into());
        }
        let q = get("q").map(|v| exponent("q", v)).transpose()?.unwrap_or(Exponent::integer(2).expect("2 is valid"));
        let r = get("r").map(|v| exponent("r", v)).transpose()?.unwrap_or(Exponent::integer(2).expect("2 is valid"));
        let family = match get("family") {
            Some(v) => v.parse().map_err(|e| CliError::Usage(format!("--family: {e}")))?,
            None => FamilyKind::Bush,
        };
        let mut deltas = match get("deltas") {
            Some(v) => v.split(',').map(|s| real("deltas", s)).collect::<Result<Vec<_>, _>>()?,
            None => vec![0.25, 0.125],
        };
        if deltas.is_empty() || deltas.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return usage("--deltas must be a non-empty list of values in (0, 1)".into());
        }
        deltas.sort_by(|a, b| b.total_cmp(a));
        deltas.dedup();
        let mut n_ladder: Vec<usize> = match get("N") {
            Some(v) => v.split(',').map(|s| integer("N", s)).collect::<Result<Vec<_>, _>>()?,
            None => vec![8, 16, 32, 64],
        };
        if n_ladder.is_empty() || n_ladder.contains(&0) {
            return usage("--N must be a non-empty list of positive integers".into());
        }
        n_ladder.sort_unstable();
        n_ladder.dedup();
        let seed: u64 = get("seed").map(|v| integer("seed", v)).transpose()?.unwrap_or(0);
        let coeffs = CoeffRule::parse(get("coeffs").unwrap_or("ones"), seed).map_err(|e| CliError::Usage(format!("--coeffs: {e}")))?;
        let m: u32 = get("m").map(|v| integer("m", v)).transpose()?.unwrap_or(4);
        if m == 0 || m > 32 {
            return usage("--m must lie in 1..=32".into());
        }
        let h_x = get("hx").map(|v| real("hx", v)).transpose()?.unwrap_or(0.125);
        let h_t = get("ht").map(|v| real("ht", v)).transpose()?.unwrap_or(0.125 / d as f64);
        if !(h_x > 0.0 && h_t > 0.0) {
            return usage("--hx and --ht must be positive".into());
        }
        let trunc = get("trunc").map(|v| real("trunc", v)).transpose()?.unwrap_or(DEFAULT_TRUNC);
        if !(trunc >= 2.0) {
            return usage("--trunc must be >= 2".into());
        }
        let tail_cutoff = get("tail-cutoff").map(|v| real("tail-cutoff", v)).transpose()?.unwrap_or(DEFAULT_TAIL_CUTOFF);
        if !(tail_cutoff >= 0.0) {
            return usage("--tail-cutoff must be >= 0".into());
        }
        let sep_exponent = get("sep-exponent").map(|v| real("sep-exponent", v)).transpose()?.unwrap_or(DEFAULT_SEP_EXPONENT);
        if !(sep_exponent >= 3.0) {
            return usage("--sep-exponent must be >= 3".into());
        }
        let eps0 = get("eps0").map(|v| real("eps0", v)).transpose()?.unwrap_or(DEFAULT_EPS0);
        if !(eps0 > 0.0 && eps0 < 1.0) {
            return usage("--eps0 must lie in (0, 1)".into());
        }
        let net = match get("net").unwrap_or("lattice") {
            "lattice" => NetChoice::Lattice,
            "origin" => NetChoice::Origin,
            other => return usage(format!("--net: expected lattice or origin, got '{other}'")),
        };
        let oversample: usize = get("oversample").map(|v| integer("oversample", v)).transpose()?.unwrap_or(1);
        if oversample == 0 {
            return usage("--oversample must be >= 1".into());
        }
        let budget: u64 = get("budget").map(|v| integer("budget", v)).transpose()?.unwrap_or(DEFAULT_BUDGET);
        let tol = get("tol").map(|v| real("tol", v)).transpose()?.unwrap_or(0.15);
        if !(tol >= 0.0) {
            return usage("--tol must be >= 0".into());
        }
        let threads: Option<usize> = get("threads").map(|v| integer("threads", v)).transpose()?;
        if threads == Some(0) {
            return usage("--threads must be >= 1".into());
        }
        let format = match get("format").unwrap_or("csv") {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return usage(format!("--format: expected csv or json, got '{other}'")),
        };
        let suite = get("suite").map(str::to_string);
        if let Some(s) = &suite {
            if !crate::selftest::SUITES.contains(&s.as_str()) {
                return usage(format!("--suite: unknown suite '{s}' (expected one of {})", crate::selftest::SUITES.join(", ")));
            }
        }
        Ok(RunConfig {
            d,
            q,
            r,
            family,
            deltas,
            n_ladder,
            coeffs,
            seed,
            m,
            h_x,
            h_t,
            trunc,
            tail_cutoff,
            sep_exponent,
            eps0,
            net,
            oversample,
            budget,
            tol,
            threads,
            out: get("out").map(PathBuf::from),
            format,
            suite,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.d, 1);
        assert_eq!(c.h_t, 0.125);
        assert_eq!(c.family, FamilyKind::Bush);
        assert_eq!(c.format, Format::Csv);
    }

    #[test]
    fn file_then_flags() {
        let file = parse_config("# ladder\nd = 2\ndeltas = 1/8, 1/4\nsep_exponent = 3\nq=inf\n").unwrap();
        let flags = Flags { q: Some("10/3".into()), ..Flags::default() };
        let mut map = file;
        for (k, v) in flags.entries() {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        let c = RunConfig::from_map(&map).unwrap();
        assert_eq!(c.d, 2);
        assert_eq!(c.h_t, 1.0 / 16.0);
        assert_eq!(c.deltas, vec![0.25, 0.125]);
        assert_eq!(c.sep_exponent, 3.0);
        assert_eq!(c.q.to_string(), "10/3");
    }

    #[test]
    fn rejects_bad_values() {
        for (k, v) in [("q", "1/2"), ("deltas", "2"), ("format", "xml"), ("suite", "nope"), ("sep-exponent", "2"), ("d", "0")] {
            let mut map = BTreeMap::new();
            map.insert(k.to_string(), v.to_string());
            assert!(matches!(RunConfig::from_map(&map), Err(CliError::Usage(_))), "{k} = {v}");
        }
        assert!(parse_config("bogus = 1").is_err());
        assert!(parse_config("no equals sign").is_err());
    }

    #[test]
    fn key_spellings() {
        let m = parse_config("N = 4,8,16\ntail_cutoff = 1e-6\n").unwrap();
        assert_eq!(m.get("N").map(String::as_str), Some("4,8,16"));
        assert_eq!(m.get("tail-cutoff").map(String::as_str), Some("1e-6"));
        let m = parse_config("n = 4").unwrap();
        assert!(m.contains_key("N"));
    }
}
