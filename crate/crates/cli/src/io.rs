//! CSV and text formats read and written by the command-line tool.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use biphoton::bell::BellRecord;
use biphoton::polarization::ProjectiveSetting;
use biphoton::qmatrix::{ComplexMatrix, DensityMatrix};
use biphoton::tomography::CountRecord;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const TOMOGRAPHY_HEADER: [&str; 11] = [
    "nu", "label", "h_a", "q_a", "h_b", "q_b", "n_a", "n_b", "n_c", "t_s", "tau_s",
];
pub const BELL_HEADER: [&str; 8] = [
    "theta_a", "theta_b", "n_a", "n_b", "n_c", "dn_c", "t_s", "tau_s",
];
pub const POWER_HEADER: [&str; 2] = ["power_mw", "cc_rate_cps"];

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TomographyRow {
    nu: usize,
    label: String,
    h_a: f64,
    q_a: f64,
    h_b: f64,
    q_b: f64,
    n_a: f64,
    n_b: f64,
    n_c: f64,
    t_s: f64,
    tau_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PowerRow {
    power_mw: f64,
    cc_rate_cps: f64,
}

fn read_rows<T: for<'de> Deserialize<'de>>(
    source: &str,
    reader: impl Read,
    header: &[&str],
) -> Result<Vec<T>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let found = rdr
        .headers()
        .map_err(|e| CliError::parse(source, 1, e.to_string()))?
        .clone();
    for col in header {
        if !found.iter().any(|h| h == *col) {
            return Err(CliError::parse(
                source,
                1,
                format!("missing column `{col}`"),
            ));
        }
    }
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<T>().enumerate() {
        // header is line 1
        let line = i + 2;
        out.push(row.map_err(|e| {
            let msg = match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => match err.field() {
                    Some(f) => format!(
                        "column `{}`: {}",
                        found.get(f as usize).unwrap_or("?"),
                        err.kind()
                    ),
                    None => err.kind().to_string(),
                },
                _ => e.to_string(),
            };
            CliError::parse(source, line, msg)
        })?);
    }
    Ok(out)
}

fn open(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn check_finite(source: &str, line: usize, values: &[(&str, f64)]) -> Result<(), CliError> {
    for (name, v) in values {
        if !v.is_finite() {
            return Err(CliError::parse(
                source,
                line,
                format!("column `{name}` is not finite"),
            ));
        }
    }
    Ok(())
}

/// Tomography records sorted by `nu`, which must run 1…16.
pub fn parse_tomography(source: &str, reader: impl Read) -> Result<Vec<CountRecord>, CliError> {
    let mut rows: Vec<(usize, TomographyRow)> =
        read_rows::<TomographyRow>(source, reader, &TOMOGRAPHY_HEADER)?
            .into_iter()
            .enumerate()
            .map(|(i, r)| (i + 2, r))
            .collect();
    for (line, r) in &rows {
        check_finite(
            source,
            *line,
            &[
                ("h_a", r.h_a),
                ("q_a", r.q_a),
                ("h_b", r.h_b),
                ("q_b", r.q_b),
                ("n_a", r.n_a),
                ("n_b", r.n_b),
                ("n_c", r.n_c),
                ("t_s", r.t_s),
                ("tau_s", r.tau_s),
            ],
        )?;
        if r.n_c < 0.0 || r.n_a < 0.0 || r.n_b < 0.0 {
            return Err(CliError::parse(source, *line, "negative rate".into()));
        }
    }
    rows.sort_by_key(|(_, r)| r.nu);
    let nus: Vec<usize> = rows.iter().map(|(_, r)| r.nu).collect();
    if nus != (1..=16).collect::<Vec<_>>() {
        return Err(CliError::parse(
            source,
            0,
            format!("expected rows nu = 1..16, found {nus:?}"),
        ));
    }
    Ok(rows
        .into_iter()
        .map(|(_, r)| CountRecord {
            label: r.label,
            setting: ProjectiveSetting::new(r.h_a, r.q_a, r.h_b, r.q_b),
            n_a: r.n_a,
            n_b: r.n_b,
            n_c: r.n_c,
            t_s: r.t_s,
            tau_s: r.tau_s,
        })
        .collect())
}

pub fn read_tomography(path: &Path) -> Result<Vec<CountRecord>, CliError> {
    parse_tomography(&path.display().to_string(), open(path)?)
}

pub fn parse_bell(source: &str, reader: impl Read) -> Result<Vec<BellRecord>, CliError> {
    let rows: Vec<BellRecord> = read_rows(source, reader, &BELL_HEADER)?;
    for (i, r) in rows.iter().enumerate() {
        let line = i + 2;
        check_finite(
            source,
            line,
            &[
                ("theta_a", r.theta_a),
                ("theta_b", r.theta_b),
                ("n_a", r.n_a),
                ("n_b", r.n_b),
                ("n_c", r.n_c),
                ("dn_c", r.dn_c),
                ("t_s", r.t_s),
                ("tau_s", r.tau_s),
            ],
        )?;
        if r.n_c < 0.0 || r.n_a < 0.0 || r.n_b < 0.0 || r.dn_c < 0.0 {
            return Err(CliError::parse(source, line, "negative rate".into()));
        }
    }
    Ok(rows)
}

pub fn read_bell(path: &Path) -> Result<Vec<BellRecord>, CliError> {
    parse_bell(&path.display().to_string(), open(path)?)
}

pub fn parse_power(source: &str, reader: impl Read) -> Result<Vec<(f64, f64)>, CliError> {
    let rows: Vec<PowerRow> = read_rows(source, reader, &POWER_HEADER)?;
    for (i, r) in rows.iter().enumerate() {
        check_finite(
            source,
            i + 2,
            &[("power_mw", r.power_mw), ("cc_rate_cps", r.cc_rate_cps)],
        )?;
    }
    Ok(rows
        .into_iter()
        .map(|r| (r.power_mw, r.cc_rate_cps))
        .collect())
}

pub fn read_power(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    parse_power(&path.display().to_string(), open(path)?)
}

pub fn write_tomography(records: &[CountRecord], out: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for (i, r) in records.iter().enumerate() {
        w.serialize(TomographyRow {
            nu: i + 1,
            label: r.label.clone(),
            h_a: r.setting.h_a,
            q_a: r.setting.q_a,
            h_b: r.setting.h_b,
            q_b: r.setting.q_b,
            n_a: r.n_a,
            n_b: r.n_b,
            n_c: r.n_c,
            t_s: r.t_s,
            tau_s: r.tau_s,
        })
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn write_bell(records: &[BellRecord], out: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn write_power(points: &[(f64, f64)], out: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for &(power_mw, cc_rate_cps) in points {
        w.serialize(PowerRow {
            power_mw,
            cc_rate_cps,
        })
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// A 4×4 real block followed by a 4×4 imaginary block, whitespace or comma
/// separated; blank lines and `#` comments are ignored.
pub fn parse_matrix(source: &str, text: &str) -> Result<ComplexMatrix, CliError> {
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let vals: Result<Vec<f64>, _> = line
            .split(|ch: char| ch.is_whitespace() || ch == ',')
            .filter(|t| !t.is_empty())
            .map(str::parse::<f64>)
            .collect();
        let vals = vals.map_err(|e| CliError::parse(source, i + 1, e.to_string()))?;
        if vals.len() != 4 {
            return Err(CliError::parse(
                source,
                i + 1,
                format!("expected 4 values, found {}", vals.len()),
            ));
        }
        rows.push((i + 1, vals));
    }
    if rows.len() != 8 {
        return Err(CliError::parse(
            source,
            0,
            format!(
                "expected 8 rows (real block then imaginary block), found {}",
                rows.len()
            ),
        ));
    }
    let entries = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| Complex64::new(rows[i].1[j], rows[4 + i].1[j]))
        .collect();
    ComplexMatrix::new(4, entries).map_err(CliError::Core)
}

/// Reads a matrix and symmetrizes and trace-normalizes it.
pub fn read_density_matrix(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let m = parse_matrix(&path.display().to_string(), &text)?;
    DensityMatrix::normalized(m).map_err(CliError::Core)
}

/// Text form accepted by [`parse_matrix`], with full round-trip precision.
pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut s = String::new();
    for part in [|z: Complex64| z.re, |z: Complex64| z.im] {
        for i in 0..4 {
            let row: Vec<String> = (0..4).map(|j| format!("{:?}", part(m[(i, j)]))).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s.push('\n');
    }
    s.pop();
    s
}
