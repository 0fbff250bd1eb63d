use std::io::Write;
use std::path::Path;

use psibeta::asymptotics::ApproxReport;
use serde::Serialize;

use crate::config::Format;

pub const SCHEMA_LINE: &str = "# psibeta-approx v1";
pub const REPORT_HEADER: &str = "n,main_term,remainder_scale,lower,witness_best,upper,theta_bracket,flags";
pub const VERIFY_HEADER: &str = "case,value,bound,pass";

/// 17 significant digits.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl Verdict {
    pub fn of(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub case: String,
    pub value: f64,
    pub bound: f64,
    pub pass: Verdict,
}

#[derive(Serialize)]
struct ReportJson {
    n: usize,
    main_term: f64,
    remainder_scale: f64,
    lower: f64,
    witness_best: f64,
    upper: f64,
    theta_bracket: Option<f64>,
    c_est: f64,
    flags: String,
}

pub fn render_reports(rows: &[ApproxReport], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut s = format!("{SCHEMA_LINE}\n{REPORT_HEADER}\n");
            for r in rows {
                let theta = r.theta_bracket.map(float).unwrap_or_default();
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.n,
                    float(r.main_term),
                    float(r.remainder_scale),
                    float(r.lower),
                    float(r.witness_best),
                    float(r.upper),
                    theta,
                    r.flags
                ));
            }
            s
        }
        Format::Json => {
            let rows: Vec<ReportJson> = rows
                .iter()
                .map(|r| ReportJson {
                    n: r.n,
                    main_term: r.main_term,
                    remainder_scale: r.remainder_scale,
                    lower: r.lower,
                    witness_best: r.witness_best,
                    upper: r.upper,
                    theta_bracket: r.theta_bracket,
                    c_est: r.c_est,
                    flags: r.flags.to_string(),
                })
                .collect();
            serde_json::to_string_pretty(&rows).expect("report rows serialize") + "\n"
        }
    }
}

pub fn render_verify(rows: &[VerifyRow], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut s = format!("{SCHEMA_LINE}\n{VERIFY_HEADER}\n");
            for r in rows {
                s.push_str(&format!("{},{},{},{}\n", r.case, float(r.value), float(r.bound), r.pass.as_str()));
            }
            s
        }
        Format::Json => serde_json::to_string_pretty(rows).expect("verify rows serialize") + "\n",
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}
