//! Grid refinement studies.
//!
//! The error measure depends on what is known about the scenario:
//! the elliptic case uses the max error of P against its closed form,
//! scenarios with an exact solution use the L¹ error at T, and the rest
//! use the L¹ self-difference between n and 2n cells.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::RunConfig;
use super::io::real;
use super::run::{output_dir, setup_for, solve};
use super::scenarios::ScenarioKind;
use crate::domain::CellField;
use crate::elliptic::EllipticSolver;
use crate::error::{Error, Result};
use crate::hyperbolic::OutputSchedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMeasure {
    EllipticMax,
    ExactL1,
    SelfL1,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StudyRow {
    pub n: usize,
    pub dx: f64,
    pub error: f64,
    /// log(e_prev / e) / log(dx_prev / dx) against the previous row.
    pub order: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyResult {
    pub scenario: String,
    pub measure: ErrorMeasure,
    pub rows: Vec<StudyRow>,
    /// Least-squares slope of log error against log dx.
    pub observed_order: f64,
}

/// Slope of the least-squares line through (ln x, ln y).
pub fn least_squares_order(dx: &[f64], err: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = dx
        .iter()
        .zip(err)
        .filter(|(_, e)| **e > 0.0)
        .map(|(d, e)| (d.ln(), e.ln()))
        .collect();
    let m = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    num / den
}

/// Averages pairs of fine cells onto the coarse grid.
fn restrict(fine: &CellField, coarse_n: usize) -> Result<Vec<f64>> {
    let n = fine.values().len();
    if n != 2 * coarse_n {
        return Err(Error::invalid(format!(
            "self-convergence needs doubling grids, got {coarse_n} then {n}"
        )));
    }
    Ok(fine.values().chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect())
}

fn member(cfg: &RunConfig, n: usize) -> Result<(CellField, Option<f64>)> {
    let mut c = cfg.clone();
    c.n_cells = n;
    let setup = setup_for(&c)?;
    if setup.info.kind == ScenarioKind::Elliptic {
        let f = setup.elliptic_rhs.clone().expect("elliptic scenario carries its right side");
        let sol = EllipticSolver::new(*f.grid(), c.elliptic_backend).solve(&f, 0.0, 0.0)?;
        let exact = setup.exact_field(0.0).expect("closed form");
        let err = sol.p.values().iter().zip(exact.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        return Ok((sol.p, Some(err)));
    }
    if c.dp_enabled {
        setup.dp_config(c.t_end).validate()?;
    }
    let traj = solve(&c, &setup, &setup.u0, &OutputSchedule::Times(vec![c.t_end]), None)?;
    let last = traj.last().clone();
    // an exact solution is only meaningful for the model it solves
    let exact_applies = c.dp_enabled == setup.is_dp();
    let err = match (exact_applies, setup.exact_field(c.t_end)) {
        (true, Some(ex)) => Some(last.l1_distance(&ex)?),
        _ => None,
    };
    Ok((last, err))
}

/// Runs every member (concurrently) and tabulates errors; writes nothing.
pub fn study_errors(cfg: &RunConfig, n_list: &[usize]) -> Result<StudyResult> {
    if n_list.len() < 3 {
        return Err(Error::invalid(format!("a study needs at least 3 grids, got {}", n_list.len())));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid sizes must be strictly ascending"));
    }
    let results: Vec<Result<(CellField, Option<f64>)>> = std::thread::scope(|s| {
        let handles: Vec<_> = n_list.iter().map(|&n| s.spawn(move || member(cfg, n))).collect();
        handles.into_iter().map(|h| h.join().expect("study member panicked")).collect()
    });
    let members = results.into_iter().collect::<Result<Vec<_>>>()?;
    let exact = members.iter().all(|(_, e)| e.is_some());
    let elliptic = setup_for(cfg)?.info.kind == ScenarioKind::Elliptic;
    let measure = if elliptic {
        ErrorMeasure::EllipticMax
    } else if exact {
        ErrorMeasure::ExactL1
    } else {
        ErrorMeasure::SelfL1
    };
    let mut pairs: Vec<(usize, f64)> = Vec::new();
    if exact {
        for (&n, (_, e)) in n_list.iter().zip(&members) {
            pairs.push((n, e.unwrap()));
        }
    } else {
        for (w, nw) in members.windows(2).zip(n_list.windows(2)) {
            let coarse = &w[0].0;
            let r = restrict(&w[1].0, nw[0])?;
            let d: f64 = coarse.values().iter().zip(&r).map(|(a, b)| (a - b).abs()).sum::<f64>() / nw[0] as f64;
            pairs.push((nw[0], d));
        }
    }
    let mut rows: Vec<StudyRow> = Vec::new();
    for (n, e) in pairs {
        let dx = 1.0 / n as f64;
        let order = rows.last().and_then(|p| {
            (p.error > 0.0 && e > 0.0).then(|| (p.error / e).ln() / (p.dx / dx).ln())
        });
        rows.push(StudyRow { n, dx, error: e, order });
    }
    let dxs: Vec<f64> = rows.iter().map(|r| r.dx).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    Ok(StudyResult {
        scenario: cfg.scenario.clone(),
        measure,
        observed_order: least_squares_order(&dxs, &errs),
        rows,
    })
}

/// Runs the study and writes convergence.csv and convergence.gp into the
/// output directory.
pub fn convergence_study(cfg: &RunConfig, n_list: &[usize]) -> Result<StudyResult> {
    let res = study_errors(cfg, n_list)?;
    let dir = output_dir(cfg);
    std::fs::create_dir_all(&dir)?;
    write_table(&dir.join("convergence.csv"), &res)?;
    std::fs::write(dir.join("convergence.gp"), plot_script(&res))?;
    Ok(res)
}

fn write_table(path: &Path, res: &StudyResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "dx", "error", "order"])?;
    for r in &res.rows {
        w.write_record([
            r.n.to_string(),
            real(r.dx),
            real(r.error),
            r.order.map(real).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn plot_script(res: &StudyResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot -p convergence.gp");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set logscale xy");
    let _ = writeln!(s, "set xlabel 'dx'");
    let _ = writeln!(s, "set ylabel '{:?} error'", res.measure);
    let _ = writeln!(s, "set key left top");
    let _ = writeln!(s, "set title '{} (observed order {:.3})'", res.scenario, res.observed_order);
    let (dx0, e0) = res.rows.first().map(|r| (r.dx, r.error)).unwrap_or((1.0, 1.0));
    let _ = writeln!(
        s,
        "plot 'convergence.csv' every ::1 using 2:3 with linespoints title 'error', \\\n     {e0:e}*(x/{dx0:e})**{:.3} with lines dashtype 2 title 'fit'",
        res.observed_order
    );
    s
}
