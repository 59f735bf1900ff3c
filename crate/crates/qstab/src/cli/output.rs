//! Textual output: float formatting, matrix parsing/printing, and the
//! certificate document.
//!
//! Certificate documents are plain text with the sections `[verdict] [P] [K]
//! [beta] [margins] [provenance]`; matrices are written as
//! semicolon-separated rows. Floats carry 9 significant digits.

use super::CliError;
use crate::informativity::{SolverSummary, StabilizationCertificate, Theorem};
use crate::linalg::{Mat, SymMatrix};
use std::fmt::Write as _;

/// 9 significant digits, exponent form.
pub fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

/// "r11,r12;r21,r22" with 9 significant digits per entry.
pub fn mat_to_text(m: &Mat) -> String {
    let mut rows = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| fmt9(m[(i, j)])).collect();
        rows.push(row.join(","));
    }
    rows.join(";")
}

pub fn sym_to_text(m: &SymMatrix) -> String {
    mat_to_text(&m.to_mat())
}

/// Parse "r11,r12;r21,r22" into a rectangular matrix.
pub fn parse_matrix(text: &str, what: &str) -> Result<Mat, CliError> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError(format!("{what}: cannot parse entry '{s}'")))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let cols = rows.first().map(Vec::len).unwrap_or(0);
    if cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(CliError(format!("{what}: rows must be nonempty and of equal length")));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(Mat::from_rows(flat.len() / cols, cols, &flat))
}

pub fn parse_square_sym(text: &str, what: &str) -> Result<SymMatrix, CliError> {
    let m = parse_matrix(text, what)?;
    if m.rows() != m.cols() {
        return Err(CliError(format!("{what}: expected a square matrix")));
    }
    Ok(SymMatrix::from_mat(&m))
}

pub fn parse_vector(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError(format!("{what}: cannot parse entry '{s}'")))
        })
        .collect()
}

pub fn theorem_name(t: Theorem) -> &'static str {
    match t {
        Theorem::ContinuousData => "continuous-data",
        Theorem::SampledData => "sampled-data",
        Theorem::SampledSufficient => "sampled-sufficient",
    }
}

/// Everything the certificate document records besides the certificate.
pub struct CertificateContext<'a> {
    pub verdict: &'a str,
    pub mode: &'a str,
    pub data_path: &'a str,
    pub horizon: f64,
    pub delta: Option<f64>,
    pub q: &'a SymMatrix,
    pub regularity: Option<(&'a str, f64)>,
    pub xdot_estimated: bool,
    pub phase1_margin: f64,
}

pub fn certificate_document(
    ctx: &CertificateContext<'_>,
    cert: Option<&StabilizationCertificate>,
) -> String {
    let mut out = String::new();
    writeln!(out, "[verdict]").unwrap();
    writeln!(out, "{}", ctx.verdict).unwrap();
    if let Some(c) = cert {
        writeln!(out, "theorem = {}", theorem_name(c.theorem)).unwrap();
    }
    writeln!(out, "[P]").unwrap();
    writeln!(out, "{}", cert.map_or("none".into(), |c| sym_to_text(&c.p))).unwrap();
    writeln!(out, "[K]").unwrap();
    writeln!(out, "{}", cert.map_or("none".into(), |c| mat_to_text(&c.k))).unwrap();
    writeln!(out, "[beta]").unwrap();
    writeln!(out, "{}", cert.map_or("none".into(), |c| fmt9(c.beta))).unwrap();
    writeln!(out, "[margins]").unwrap();
    writeln!(out, "phase1_margin = {}", fmt9(ctx.phase1_margin)).unwrap();
    if let Some(c) = cert {
        let SolverSummary { iterations, feasibility_margin, duality_gap, .. } = c.solver;
        writeln!(out, "feasibility_margin = {}", fmt9(feasibility_margin)).unwrap();
        writeln!(out, "duality_gap = {}", fmt9(duality_gap)).unwrap();
        writeln!(out, "newton_steps = {iterations}").unwrap();
        writeln!(out, "p_floor = {}", fmt9(c.p_floor)).unwrap();
        writeln!(out, "b_floor = {}", fmt9(c.b_floor)).unwrap();
        writeln!(out, "p_condition = {}", fmt9(c.p_condition)).unwrap();
    }
    writeln!(out, "[provenance]").unwrap();
    writeln!(out, "data = {}", ctx.data_path).unwrap();
    writeln!(out, "mode = {}", ctx.mode).unwrap();
    writeln!(out, "horizon = {}", fmt9(ctx.horizon)).unwrap();
    if let Some(d) = ctx.delta {
        writeln!(out, "delta = {}", fmt9(d)).unwrap();
    }
    writeln!(out, "q = {}", sym_to_text(ctx.q)).unwrap();
    if let Some((kind, value)) = ctx.regularity {
        writeln!(out, "regularity = {kind} {}", fmt9(value)).unwrap();
    }
    writeln!(out, "xdot_estimated = {}", ctx.xdot_estimated).unwrap();
    out
}
