//! Boundary traces from layer averages.
//!
//! Layer j averages the cells [m_j, 2m_j) counted from the boundary, with
//! m_j = 2^(n_layers−1−j). Offsets s_j = m_j·dx halve toward the wall and
//! the finest layer is the single cell at distance dx. Cell 0 is never
//! used so that every offset is at least one cell.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::Trajectory;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Outward normal.
    pub fn normal(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            _ => Err(Error::invalid(format!("side must be left or right, got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEstimate {
    pub side: Side,
    pub times: Vec<f64>,
    /// Strictly decreasing distances from the wall, each ≥ dx.
    pub layer_offsets: Vec<f64>,
    pub layer_widths: Vec<f64>,
    /// `layer_series[j][n]`: average over layer j at `times[n]`.
    pub layer_series: Vec<Vec<f64>>,
    /// ∫|layer_j − layer_{j+1}| dt, coarsest pair first.
    pub cauchy_defects: Vec<f64>,
}

impl TraceEstimate {
    /// Finest-layer series, the trace estimate itself.
    pub fn values(&self) -> &[f64] {
        self.layer_series.last().expect("at least one layer")
    }

    pub fn finest_defect(&self) -> f64 {
        *self.cauchy_defects.last().unwrap_or(&0.0)
    }

    pub fn coarsest_defect(&self) -> f64 {
        *self.cauchy_defects.first().unwrap_or(&0.0)
    }
}

/// Trapezoid rule for samples on a (possibly nonuniform) time grid.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

pub fn extract_trace(traj: &Trajectory, side: Side, n_layers: usize) -> Result<TraceEstimate> {
    if n_layers < 3 {
        return Err(Error::invalid(format!("need at least 3 layers, got {n_layers}")));
    }
    let grid = *traj.first().grid();
    let n = grid.n_cells();
    if n_layers >= usize::BITS as usize || (1usize << n_layers) > n {
        return Err(Error::invalid(format!(
            "{n} cells cannot hold {n_layers} dyadic layers (need 2^{n_layers})"
        )));
    }
    let dx = grid.dx();
    let times = traj.times();
    let mut offsets = Vec::with_capacity(n_layers);
    let mut widths = Vec::with_capacity(n_layers);
    let mut series = Vec::with_capacity(n_layers);
    for j in 0..n_layers {
        let m = 1usize << (n_layers - 1 - j);
        offsets.push(m as f64 * dx);
        widths.push(m as f64 * dx);
        let avg = traj
            .fields()
            .map(|f| {
                let u = f.values();
                let s: f64 = match side {
                    Side::Left => u[m..2 * m].iter().sum(),
                    Side::Right => u[n - 2 * m..n - m].iter().sum(),
                };
                s / m as f64
            })
            .collect::<Vec<_>>();
        series.push(avg);
    }
    let cauchy_defects = series
        .windows(2)
        .map(|w| {
            let d: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).collect();
            trapezoid(&times, &d)
        })
        .collect();
    Ok(TraceEstimate {
        side,
        times,
        layer_offsets: offsets,
        layer_widths: widths,
        layer_series: series,
        cauchy_defects,
    })
}
