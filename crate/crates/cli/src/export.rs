//! Deterministic delimited-text exports: datasets, traces, fields, study
//! tables and run summaries. One header line per file, floating point
//! printed with 17 significant digits, byte-identical for identical runs.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use kirchhoff_gp::{
    ChainDiagnostics, Dataset, McmcTrace, NoiseClass, PredictiveSummary, QuantityKind, Real,
    Target,
};

/// 17 significant digits, round-trippable for f64.
pub fn fmt(v: Real) -> String {
    format!("{v:.16e}")
}

fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut file =
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    for line in lines {
        writeln!(file, "{line}")?;
    }
    Ok(())
}

/// One row per observation: `x,y,quantity,value,noise_class`.
pub fn write_dataset(path: &Path, data: &Dataset<Real>) -> Result<()> {
    let mut lines = vec!["x,y,quantity,value,noise_class".to_string()];
    for obs in data.observations() {
        let class = match obs.noise_class {
            NoiseClass::Noisy => "noisy",
            NoiseClass::NoiselessBoundary => "noiseless_bc",
        };
        lines.push(format!(
            "{},{},{},{},{}",
            fmt(obs.location.x),
            fmt(obs.location.y),
            obs.quantity.label(),
            fmt(obs.value),
            class
        ));
    }
    write_lines(path, &lines)
}

/// One row per retained draw: `iteration,<params ...>,log_posterior`.
pub fn write_trace(path: &Path, trace: &McmcTrace<Real>) -> Result<()> {
    let mut header = String::from("iteration");
    for name in trace.names() {
        header.push(',');
        header.push_str(name);
    }
    header.push_str(",log_posterior");
    let mut lines = vec![header];
    for i in 0..trace.len() {
        let mut line = format!("{}", trace.burn_in() + i);
        for &v in trace.draw(i) {
            line.push(',');
            line.push_str(&fmt(v));
        }
        line.push(',');
        line.push_str(&fmt(trace.log_posterior()[i]));
        lines.push(line);
    }
    write_lines(path, &lines)
}

/// Reads a trace file written by [`write_trace`].
pub fn read_trace(path: &Path) -> Result<McmcTrace<Real>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading trace {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().context("empty trace file")?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.first() != Some(&"iteration") || columns.last() != Some(&"log_posterior") {
        bail!("unrecognized trace header: {header}");
    }
    let names: Vec<String> = columns[1..columns.len() - 1]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let noise_kinds: Vec<QuantityKind> = names
        .iter()
        .filter_map(|n| n.strip_prefix("sigma2_"))
        .map(|label| {
            QuantityKind::parse_label(label)
                .with_context(|| format!("unknown quantity label in trace header: {label}"))
        })
        .collect::<Result<_>>()?;

    let mut draws = Vec::new();
    let mut log_posterior = Vec::new();
    let mut first_iteration = 0usize;
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            bail!("trace row {row} has {} fields, expected {}", fields.len(), columns.len());
        }
        if row == 0 {
            first_iteration = fields[0].parse()?;
        }
        let values: Vec<Real> = fields[1..fields.len() - 1]
            .iter()
            .map(|s| s.parse::<Real>().context("parsing trace value"))
            .collect::<Result<_>>()?;
        draws.push(values);
        log_posterior.push(fields[fields.len() - 1].parse::<Real>()?);
    }
    let steps = first_iteration + draws.len();
    Ok(McmcTrace::from_parts(
        names,
        noise_kinds,
        draws,
        log_posterior,
        0,
        steps,
        first_iteration,
    )?)
}

/// One row per target point: `x,y,quantity,mean,variance,q005,q995`.
pub fn write_field(
    path: &Path,
    targets: &[Target<Real>],
    summaries: &[PredictiveSummary<Real>],
) -> Result<()> {
    let mut lines = vec!["x,y,quantity,mean,variance,q005,q995".to_string()];
    for (t, s) in targets.iter().zip(summaries) {
        lines.push(format!(
            "{},{},{},{},{},{},{}",
            fmt(t.location.x),
            fmt(t.location.y),
            t.quantity.label(),
            fmt(s.mean),
            fmt(s.variance),
            fmt(s.lower),
            fmt(s.upper)
        ));
    }
    write_lines(path, &lines)
}

/// Ground-truth export in the field schema (zero variance, degenerate band).
pub fn write_truth_field(path: &Path, targets: &[Target<Real>], values: &[Real]) -> Result<()> {
    let summaries: Vec<PredictiveSummary<Real>> = values
        .iter()
        .map(|&v| PredictiveSummary {
            mean: v,
            variance: 0.0,
            lower: v,
            upper: v,
        })
        .collect();
    write_field(path, targets, &summaries)
}

/// Key-value run summary, fixed key order.
pub fn write_key_values(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let lines: Vec<String> = entries
        .iter()
        .map(|(k, v)| format!("{k} = {v}"))
        .collect();
    write_lines(path, &lines)
}

/// Chain diagnostics: acceptance rate, histograms and correlation matrix.
pub fn write_diagnostics(
    path: &Path,
    names: &[String],
    diag: &ChainDiagnostics<Real>,
) -> Result<()> {
    let mut lines = Vec::new();
    lines.push(format!("acceptance_rate = {}", fmt(diag.acceptance_rate)));
    for (i, name) in names.iter().enumerate() {
        lines.push(format!("degenerate_{name} = {}", diag.degenerate[i]));
    }
    for (i, a) in names.iter().enumerate() {
        for (j, b) in names.iter().enumerate().skip(i + 1) {
            lines.push(format!(
                "correlation_{a}_{b} = {}",
                fmt(diag.correlations[i][j])
            ));
        }
    }
    for (i, name) in names.iter().enumerate() {
        let h = &diag.histograms[i];
        let counts: Vec<String> = h.counts.iter().map(|c| c.to_string()).collect();
        lines.push(format!(
            "histogram_{name} = lo {} hi {} counts {}",
            fmt(h.lo),
            fmt(h.hi),
            counts.join(" ")
        ));
    }
    write_lines(path, &lines)
}

/// Study table: one row per (snr, case, estimator).
pub struct StudyRow {
    pub snr: Real,
    pub case: String,
    pub estimator: String,
    pub mean: Real,
    pub q25: Real,
    pub q75: Real,
    pub min: Real,
    pub max: Real,
    pub used: usize,
    pub excluded: usize,
}

pub fn write_study(path: &Path, rows: &[StudyRow]) -> Result<()> {
    let mut lines = vec!["snr,case,estimator,mean,q25,q75,min,max,used,excluded".to_string()];
    for r in rows {
        lines.push(format!(
            "{},{},{},{},{},{},{},{},{},{}",
            fmt(r.snr),
            r.case,
            r.estimator,
            fmt(r.mean),
            fmt(r.q25),
            fmt(r.q75),
            fmt(r.min),
            fmt(r.max),
            r.used,
            r.excluded
        ));
    }
    write_lines(path, &lines)
}
