//! CSV rendering and atomic file output.
//!
//! Every float is written as `{:.16e}`, 17 significant digits, which parses
//! back to the identical `f64`. Lines end with `\n`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use contact_bar::assembly::WeightMode;
use contact_bar::experiments::{ErrorReport, ScenarioRun};
use contact_bar::oracle;

pub const TRAJECTORY_HEADER: &str = "t,u0,u1,lambda,energy,denergy";

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_row(out: &mut String, cells: impl IntoIterator<Item = String>) {
    let mut first = true;
    for c in cells {
        if !first {
            out.push(',');
        }
        out.push_str(&c);
        first = false;
    }
    out.push('\n');
}

/// One row per time level. `denergy` is `E(n+1) - E(n)`, zero on the last
/// row.
pub fn trajectory_csv(run: &ScenarioRun) -> String {
    let mut out = String::with_capacity(run.records.len() * 150);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (n, r) in run.records.iter().enumerate() {
        push_row(
            &mut out,
            [r.t, r.u0, r.u1, r.lambda, r.energy, run.ledger.increment(n)].map(fmt_f64),
        );
    }
    out
}

/// Reads back a trajectory CSV as rows of six numbers.
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<[f64; 6]>, OutputError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(TRAJECTORY_HEADER) => {}
        other => {
            return Err(OutputError::Parse {
                line: 1,
                message: format!("expected header '{TRAJECTORY_HEADER}', got {other:?}"),
            })
        }
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let line_no = i + 2;
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 6 {
                return Err(OutputError::Parse {
                    line: line_no,
                    message: format!("expected 6 columns, got {}", cells.len()),
                });
            }
            let mut row = [0.0; 6];
            for (slot, cell) in row.iter_mut().zip(&cells) {
                *slot = cell.parse().map_err(|_| OutputError::Parse {
                    line: line_no,
                    message: format!("not a number: '{cell}'"),
                })?;
            }
            Ok(row)
        })
        .collect()
}

pub fn compare_mods_csv(rows: &[(WeightMode, ErrorReport)]) -> String {
    let mut out = String::from("mod,linf_l2_displacement,l2_contact_displacement,l2_multiplier,energy_drift\n");
    for (mode, e) in rows {
        let mut cells = vec![mode.to_string()];
        cells.extend(
            [e.linf_l2_displacement, e.l2_contact_displacement, e.l2_multiplier, e.energy_drift].map(fmt_f64),
        );
        push_row(&mut out, cells);
    }
    out
}

pub fn temporal_order_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("dt,error\n");
    for (dt, e) in points {
        push_row(&mut out, [fmt_f64(*dt), fmt_f64(*e)]);
    }
    out
}

pub fn spatial_refinement_csv(points: &[(usize, f64)]) -> String {
    let mut out = String::from("m,linf_l2_error\n");
    for (m, e) in points {
        push_row(&mut out, [m.to_string(), fmt_f64(*e)]);
    }
    out
}

/// Exact nodal displacements and multiplier of the benchmark on the grid
/// `x_i = i/m`, `t_n = n dt`.
pub fn oracle_csv(m: usize, dt: f64, steps: usize) -> contact_bar::Result<String> {
    let mut out = String::from("t,lambda");
    for i in 0..=m {
        let _ = write!(out, ",u_{i}");
    }
    out.push('\n');
    for n in 0..=steps {
        let t = n as f64 * dt;
        let mut cells = vec![fmt_f64(t), fmt_f64(oracle::exact_multiplier(t)?)];
        cells.extend(oracle::nodal_displacement(m, t)?.into_iter().map(fmt_f64));
        push_row(&mut out, cells);
    }
    Ok(out)
}

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), OutputError> {
    let io = |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
