//! CSV serialization of the diagnostics time series. Values are written
//! with the shortest round-trip float formatting, so a written series
//! parses back bit-identically; the Riccati column is empty before the
//! growth hypotheses hold and "inf" past the comparison blowup time.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::diagnostics::DiagnosticsRow;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "t,m,Ffun,E,trace,div_res,front,front_bound,bkm,gradu_max,rho_min,riccati_lb";

fn push_field(buf: &mut String, v: f64) {
    use std::fmt::Write as _;
    let _ = write!(buf, "{v}");
}

pub fn format_row(row: &DiagnosticsRow) -> String {
    let mut line = String::with_capacity(192);
    for (idx, v) in [
        row.t,
        row.m,
        row.ffun,
        row.e,
        row.trace,
        row.div_res,
        row.front,
        row.front_bound,
        row.bkm,
        row.gradu_max,
        row.rho_min,
    ]
    .into_iter()
    .enumerate()
    {
        if idx > 0 {
            line.push(',');
        }
        push_field(&mut line, v);
    }
    line.push(',');
    if let Some(v) = row.riccati_lb {
        push_field(&mut line, v);
    }
    line
}

pub fn write_csv<W: Write>(mut w: W, rows: &[DiagnosticsRow]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(w, "{}", format_row(row))?;
    }
    Ok(())
}

pub fn save_csv(path: &Path, rows: &[DiagnosticsRow]) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_csv(&mut w, rows)?;
    w.flush()?;
    Ok(())
}

fn parse_field(s: &str, line_no: usize, col: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Series(format!("line {line_no}: bad {col} value `{s}`")))
}

pub fn read_csv<R: BufRead>(r: R) -> Result<Vec<DiagnosticsRow>> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Series("empty file".into()))??;
    if header.trim_end() != CSV_HEADER {
        return Err(Error::Series(format!("unexpected header `{header}`")));
    }
    let names: Vec<&str> = CSV_HEADER.split(',').collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line_no = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(Error::Series(format!(
                "line {line_no}: expected {} fields, got {}",
                names.len(),
                fields.len()
            )));
        }
        let mut vals = [0.0f64; 11];
        for (slot, (raw, name)) in vals.iter_mut().zip(fields.iter().zip(&names)) {
            *slot = parse_field(raw, line_no, name)?;
        }
        let riccati_lb = if fields[11].is_empty() {
            None
        } else {
            Some(parse_field(fields[11], line_no, names[11])?)
        };
        rows.push(DiagnosticsRow {
            t: vals[0],
            m: vals[1],
            ffun: vals[2],
            e: vals[3],
            trace: vals[4],
            div_res: vals[5],
            front: vals[6],
            front_bound: vals[7],
            bkm: vals[8],
            gradu_max: vals[9],
            rho_min: vals[10],
            riccati_lb,
        });
    }
    Ok(rows)
}

pub fn load_csv(path: &Path) -> Result<Vec<DiagnosticsRow>> {
    let f = std::fs::File::open(path)?;
    read_csv(std::io::BufReader::new(f))
}
