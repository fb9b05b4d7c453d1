//! CSV and JSON artifacts. Reals are written with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::diagnostics::TraceEstimate;
use crate::domain::{CellField, Grid1D};
use crate::error::{Error, Result};
use crate::hyperbolic::Snapshot;

pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// fields.csv: one row per (snapshot, cell); P and Px columns when every
/// snapshot carries a pressure.
pub fn write_fields<'a>(path: &Path, snaps: impl IntoIterator<Item = &'a Snapshot> + Clone) -> Result<()> {
    let with_p = snaps.clone().into_iter().all(|s| s.elliptic.is_some());
    let mut w = csv::Writer::from_path(path)?;
    if with_p {
        w.write_record(["t", "x", "u", "P", "Px"])?;
    } else {
        w.write_record(["t", "x", "u"])?;
    }
    for s in snaps {
        let t = real(s.time());
        let g = s.field.grid();
        for (i, x) in g.centers().enumerate() {
            let mut row = vec![t.clone(), real(x), real(s.field.values()[i])];
            if let (true, Some(e)) = (with_p, &s.elliptic) {
                row.push(real(e.p.values()[i]));
                row.push(real(e.px.values()[i]));
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads fields.csv back into one field per distinct t (rows grouped in
/// file order). Cell centers must match a uniform grid.
pub fn read_fields(path: &Path) -> Result<Vec<CellField>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::invalid(format!("{}: missing column `{name}`", path.display())))
    };
    let (ct, cx, cu) = (col("t")?, col("x")?, col("u")?);
    let mut groups: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |c: usize| -> Result<f64> {
            let s = rec.get(c).unwrap_or("").trim();
            s.parse::<f64>()
                .map_err(|_| Error::invalid(format!("{}: row {}: `{s}` is not a number", path.display(), line + 2)))
        };
        let (t, x, u) = (num(ct)?, num(cx)?, num(cu)?);
        match groups.last_mut() {
            Some((gt, xs, us)) if *gt == t => {
                xs.push(x);
                us.push(u);
            }
            _ => groups.push((t, vec![x], vec![u])),
        }
    }
    if groups.is_empty() {
        return Err(Error::invalid(format!("{}: no data rows", path.display())));
    }
    groups
        .into_iter()
        .map(|(t, xs, us)| {
            let grid = Grid1D::new(xs.len())?;
            for (x, c) in xs.iter().zip(grid.centers()) {
                if (x - c).abs() > 1e-9 {
                    return Err(Error::GridMismatch(format!(
                        "t = {t}: x = {x} is not a cell center of a {}-cell grid",
                        xs.len()
                    )));
                }
            }
            CellField::new(grid, t, us)
        })
        .collect()
}

/// traces.csv: t, side, s_j, layer_avg.
pub fn write_traces(path: &Path, traces: &[TraceEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "side", "s_j", "layer_avg"])?;
    for tr in traces {
        for (j, series) in tr.layer_series.iter().enumerate() {
            for (t, v) in tr.times.iter().zip(series) {
                w.write_record([real(*t), tr.side.name().to_string(), real(tr.layer_offsets[j]), real(*v)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}
