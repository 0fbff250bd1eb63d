use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use psibeta::{Modulus, PsiShape};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemma1,
    Lemma2,
    Positivity,
    Representation,
    Zeromean,
    Orthogonality,
    Identity,
    Example1,
}

/// Flags shared by every subcommand. Anything left unset falls back to the
/// `--config` file and then to the built-in default.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// ψ spec, e.g. `power:r=2` or `logpower:gamma=2`.
    #[arg(long)]
    pub psi: Option<String>,
    /// ω spec, e.g. `omega-power:alpha=0.5` or `omega-loginv:alpha=1`.
    #[arg(long)]
    pub omega: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// `8`, `4,8,16`, `4..64` (doubling), `4..64:x4` or `4..64:+4`.
    #[arg(long)]
    pub n: Option<String>,
    /// Relative level spread requested from Remez.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON file with any of the keys psi, omega, beta, n, tol, out, format, suite.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    psi: Option<String>,
    omega: Option<String>,
    beta: Option<f64>,
    n: Option<NValue>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    suite: Option<Suite>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NValue {
    One(u64),
    List(Vec<u64>),
    Text(String),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub psi: PsiShape,
    pub omega: Modulus,
    pub beta: f64,
    /// `None` when neither flag nor file gave n values.
    pub n: Option<Vec<u64>>,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub suite: Option<Suite>,
}

pub const DEFAULT_PSI: &str = "power:r=2";
pub const DEFAULT_OMEGA: &str = "omega-power:alpha=0.5";

impl RunConfig {
    pub fn resolve(args: &CommonArgs, suite: Option<Suite>, default_format: Format) -> Result<Self, String> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                serde_json::from_str::<FileConfig>(&text).map_err(|e| format!("{}: {e}", path.display()))?
            }
            None => FileConfig::default(),
        };
        let psi_text = args.psi.clone().or(file.psi).unwrap_or_else(|| DEFAULT_PSI.into());
        let omega_text = args.omega.clone().or(file.omega).unwrap_or_else(|| DEFAULT_OMEGA.into());
        let psi = PsiShape::from_str(&psi_text).map_err(|e| e.to_string())?;
        let omega = Modulus::from_str(&omega_text).map_err(|e| e.to_string())?;
        let beta = args.beta.or(file.beta).unwrap_or(1.0);
        if !beta.is_finite() {
            return Err(format!("beta must be finite, got {beta}"));
        }
        let n = match (&args.n, file.n) {
            (Some(text), _) => Some(parse_n(text)?),
            (None, Some(NValue::One(v))) => Some(check_increasing(vec![v])?),
            (None, Some(NValue::List(v))) => Some(check_increasing(v)?),
            (None, Some(NValue::Text(t))) => Some(parse_n(&t)?),
            (None, None) => None,
        };
        let tol = args.tol.or(file.tol).unwrap_or(psibeta::best_approx::WITNESS_REMEZ_TOL);
        if !(tol > 0.0 && tol < 1.0) {
            return Err(format!("tol must lie in (0, 1), got {tol}"));
        }
        Ok(RunConfig {
            psi,
            omega,
            beta,
            n,
            tol,
            out: args.out.clone().or(file.out),
            format: args.format.or(file.format).unwrap_or(default_format),
            suite: suite.or(file.suite),
        })
    }

    pub fn n_or(&self, default: &[u64]) -> Vec<u64> {
        self.n.clone().unwrap_or_else(|| default.to_vec())
    }
}

fn check_increasing(v: Vec<u64>) -> Result<Vec<u64>, String> {
    if v.is_empty() {
        return Err("no n values".into());
    }
    if v[0] == 0 {
        return Err("n values must be positive".into());
    }
    if v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(format!("n values must be strictly increasing: {v:?}"));
    }
    Ok(v)
}

/// Parses `8`, `4,8,16`, `a..b`, `a..b:xF` (geometric) or `a..b:+S` (arithmetic).
pub fn parse_n(text: &str) -> Result<Vec<u64>, String> {
    let text = text.trim();
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| format!("bad n value {s:?} in {text:?}"));
    let Some((lo, rest)) = text.split_once("..") else {
        return check_increasing(text.split(',').map(num).collect::<Result<_, _>>()?);
    };
    let (hi, step) = match rest.split_once(':') {
        Some((h, s)) => (h, Some(s.trim())),
        None => (rest, None),
    };
    let (lo, hi) = (num(lo)?, num(hi)?);
    if lo == 0 || hi < lo {
        return Err(format!("bad range {text:?}"));
    }
    let mut out = Vec::new();
    match step {
        None => geometric(lo, hi, 2, &mut out),
        Some(s) if s.starts_with('x') => {
            let f = num(&s[1..])?;
            if f < 2 {
                return Err(format!("geometric factor must be ≥ 2 in {text:?}"));
            }
            geometric(lo, hi, f, &mut out)
        }
        Some(s) if s.starts_with('+') => {
            let d = num(&s[1..])?;
            if d == 0 {
                return Err(format!("arithmetic step must be positive in {text:?}"));
            }
            out.extend((lo..=hi).step_by(d as usize));
        }
        Some(s) => return Err(format!("unknown step {s:?} in {text:?}")),
    }
    check_increasing(out)
}

fn geometric(lo: u64, hi: u64, factor: u64, out: &mut Vec<u64>) {
    let mut v = lo;
    while v <= hi {
        out.push(v);
        match v.checked_mul(factor) {
            Some(next) => v = next,
            None => break,
        }
    }
}
