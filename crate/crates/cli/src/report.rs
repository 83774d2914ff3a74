//! Report records and writers. For a fixed config the output bytes are
//! stable: records arrive pre-sorted and floats print in shortest
//! round-trip form.

use crate::config::OutFormat;
use psifrac::LeibnizReport;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

#[derive(Serialize)]
pub struct ParamsOut {
    pub rule: &'static str,
    pub alpha: f64,
    pub beta: f64,
    pub psi: String,
    pub a: f64,
    pub x: f64,
}

/// One verified tuple; serializes with the case and parameters first.
#[derive(Serialize)]
pub struct Record {
    pub case: String,
    pub params: ParamsOut,
    #[serde(flatten)]
    pub report: LeibnizReport,
}

pub fn render(records: &[Record], format: OutFormat) -> Result<String, String> {
    match format {
        OutFormat::Json => json_lines(records),
        OutFormat::Csv => Ok(csv_rows(records)),
    }
}

pub fn json_lines(records: &[Record]) -> Result<String, String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).map_err(|e| e.to_string())?);
        out.push('\n');
    }
    Ok(out)
}

pub fn csv_rows(records: &[Record]) -> String {
    let mut out = String::from(
        "case,rule,alpha,beta,psi,a,x,lhs,rhs,omega,abs_residual,rel_residual,series_terms,omega_terms,last_term_magnitude,converged\n",
    );
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.case,
            r.params.rule,
            r.params.alpha,
            r.params.beta,
            r.params.psi,
            r.params.a,
            r.params.x,
            r.report.lhs,
            r.report.rhs,
            r.report.omega,
            r.report.abs_residual,
            r.report.rel_residual,
            r.report.terms_used.series,
            r.report.terms_used.omega,
            r.report.last_term_magnitude,
            r.report.converged
        ));
    }
    out
}

pub fn write_text(out: Option<&Path>, body: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| format!("writing {}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| e.to_string()),
    }
}
