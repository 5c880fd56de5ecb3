//! CSV and JSON serialization of gain tables.
//!
//! CSV output starts with a `# spec=<json>` line carrying the full spec, then
//! the column header, then one line per row. Missing values are empty fields.

use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::harness::run::{GainStats, GainTable};
use crate::harness::spec::{ExperimentSpec, OutputFormat};

pub const CSV_COLUMNS: [&str; 13] = [
    "scenario",
    "model",
    "architecture",
    "L",
    "N_I",
    "K",
    "trials",
    "mean_gain",
    "std_err",
    "bound_mean",
    "eta",
    "rho",
    "converged_frac",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn record(r: &GainStats) -> [String; 13] {
    [
        r.scenario.clone(),
        r.model.clone(),
        r.architecture.clone(),
        r.l.to_string(),
        r.n_i.to_string(),
        opt(r.k),
        r.trials.to_string(),
        r.mean_gain.to_string(),
        r.std_err.to_string(),
        r.bound_mean.to_string(),
        opt(r.eta),
        opt(r.rho),
        r.converged_frac.to_string(),
    ]
}

pub fn to_csv(table: &GainTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in &table.rows {
        w.write_record(record(r))?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8");
    Ok(format!("# spec={}\n{body}", table.spec.to_json()))
}

pub fn to_json(table: &GainTable) -> Result<String> {
    Ok(serde_json::to_string_pretty(table)? + "\n")
}

pub fn render(table: &GainTable, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => to_csv(table),
        OutputFormat::Json => to_json(table),
    }
}

pub fn emit(table: &GainTable, format: OutputFormat, path: &Path) -> Result<()> {
    fs::write(path, render(table, format)?)?;
    Ok(())
}

/// Reads back a CSV file written by [`to_csv`].
pub fn parse_csv(text: &str) -> Result<GainTable> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let spec_json = first
        .strip_prefix("# spec=")
        .ok_or_else(|| crate::Error::InvalidInput("missing `# spec=` line".into()))?;
    let spec = ExperimentSpec::from_json(spec_json)?;
    let mut rd = csv::Reader::from_reader(rest.as_bytes());
    let num = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|e| crate::Error::InvalidInput(format!("bad number `{s}`: {e}")))
    };
    let opt_num = |s: &str| -> Result<Option<f64>> { if s.is_empty() { Ok(None) } else { num(s).map(Some) } };
    let int = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|e| crate::Error::InvalidInput(format!("bad count `{s}`: {e}")))
    };
    let mut rows = Vec::new();
    for rec in rd.records() {
        let r = rec?;
        rows.push(GainStats {
            scenario: r[0].to_string(),
            model: r[1].to_string(),
            architecture: r[2].to_string(),
            l: int(&r[3])?,
            n_i: int(&r[4])?,
            k: opt_num(&r[5])?,
            trials: int(&r[6])?,
            mean_gain: num(&r[7])?,
            std_err: num(&r[8])?,
            bound_mean: num(&r[9])?,
            eta: opt_num(&r[10])?,
            rho: opt_num(&r[11])?,
            converged_frac: num(&r[12])?,
        });
    }
    Ok(GainTable { spec, rows })
}
