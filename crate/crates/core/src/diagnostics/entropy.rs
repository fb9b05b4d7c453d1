//! Discrete Kruzkov entropy production
//!
//! ```text
//! μᵢ = −[(|uᵢⁿ⁺¹−k| − |uᵢⁿ−k|)/Δt + (Q_{i+½} − Q_{i−½})/Δx − sgn(uᵢⁿ⁺¹−k)·Sᵢⁿ]
//! ```
//!
//! with Q the Crandall–Majda entropy flux of the run's own scheme,
//! F(u∨k, v∨k) − F(u∧k, v∧k) − ε(|v−k| − |u−k|)/Δx. For a monotone scheme
//! on step-resolved data μ ≥ 0 holds up to rounding.

use serde::Serialize;

use super::report::{InequalityReport, Location, MarginTracker};
use crate::domain::{sgn, FluxSpec, SourceSpec};
use crate::error::Result;
use crate::hyperbolic::{kruzkov_numerical_flux, Trajectory};

#[derive(Clone, Debug, Serialize)]
pub struct ProductionField {
    pub k_grid: Vec<f64>,
    pub centers: Vec<f64>,
    /// ∫∫ μ dx dt divided by the covered time span, per k.
    pub mass_rate: Vec<f64>,
    /// `cell_integrated[k][i]` = ∫ μᵢ dt · Δx.
    pub cell_integrated: Vec<Vec<f64>>,
    /// Smallest μ per k.
    pub min_by_k: Vec<f64>,
}

impl ProductionField {
    /// Share of ∫∫|μ| for level `ik` that lies within `half_width` of `x0`.
    pub fn localized_fraction(&self, ik: usize, x0: f64, half_width: f64) -> f64 {
        let row = &self.cell_integrated[ik];
        let total: f64 = row.iter().map(|v| v.abs()).sum();
        if total == 0.0 {
            return 1.0;
        }
        let near: f64 = row
            .iter()
            .zip(&self.centers)
            .filter(|(_, x)| (*x - x0).abs() <= half_width)
            .map(|(v, _)| v.abs())
            .sum();
        near / total
    }
}

/// Range of values (cells and ghosts) visited by the trajectory.
pub fn solution_range(traj: &Trajectory) -> (f64, f64) {
    traj.snapshots.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        (
            lo.min(s.field.min()).min(s.ghosts.0).min(s.ghosts.1),
            hi.max(s.field.max()).max(s.ghosts.0).max(s.ghosts.1),
        )
    })
}

/// 10·Δx·(1 + max|A′|) over the visited range.
pub fn default_tolerance(traj: &Trajectory, flux: &FluxSpec) -> f64 {
    let (lo, hi) = solution_range(traj);
    10.0 * traj.first().grid().dx() * (1.0 + flux.max_speed(lo, hi))
}

pub fn kruzkov_production(
    traj: &Trajectory,
    flux: &FluxSpec,
    k_grid: &[f64],
    source: &SourceSpec,
) -> Result<(InequalityReport, ProductionField)> {
    kruzkov_production_with_tolerance(traj, flux, k_grid, source, default_tolerance(traj, flux))
}

pub fn kruzkov_production_with_tolerance(
    traj: &Trajectory,
    flux: &FluxSpec,
    k_grid: &[f64],
    source: &SourceSpec,
    tolerance: f64,
) -> Result<(InequalityReport, ProductionField)> {
    let grid = *traj.first().grid();
    let n = grid.n_cells();
    let dx = grid.dx();
    let centers: Vec<f64> = grid.centers().collect();
    let scheme = traj.meta.scheme;
    let eps = traj.meta.eps;
    let nk = k_grid.len();
    let mut tracker = MarginTracker::new("kruzkov_production", tolerance);
    let mut cell_integrated = vec![vec![0.0; n]; nk];
    let mut total = vec![0.0; nk];
    let mut min_by_k = vec![f64::INFINITY; nk];
    let mut span = 0.0;
    let mut q = vec![0.0; n + 1];
    let mut src = vec![0.0; n];

    for w in traj.snapshots.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let t = a.time();
        let dt = b.time() - t;
        if dt <= 0.0 {
            continue;
        }
        span += dt;
        let (u, v) = (a.field.values(), b.field.values());
        match &a.source {
            Some(s) => src.copy_from_slice(s),
            None => {
                for (i, s) in src.iter_mut().enumerate() {
                    *s = source.eval(t, centers[i], u[i]);
                }
            }
        }
        let (gl, gr) = a.ghosts;
        for (ik, &k) in k_grid.iter().enumerate() {
            for (j, qj) in q.iter_mut().enumerate() {
                let l = if j == 0 { gl } else { u[j - 1] };
                let r = if j == n { gr } else { u[j] };
                let mut f = kruzkov_numerical_flux(scheme, l, r, k, flux);
                if eps > 0.0 {
                    f -= eps * ((r - k).abs() - (l - k).abs()) / dx;
                }
                *qj = f;
            }
            for i in 0..n {
                let mu = -(((v[i] - k).abs() - (u[i] - k).abs()) / dt + (q[i + 1] - q[i]) / dx
                    - sgn(v[i] - k) * src[i]);
                cell_integrated[ik][i] += mu * dt * dx;
                total[ik] += mu * dt * dx;
                if mu < min_by_k[ik] {
                    min_by_k[ik] = mu;
                    tracker.record(mu, Location::at(t).with_x(centers[i]).with_k(k));
                }
            }
        }
    }
    let mass_rate: Vec<f64> = total.iter().map(|m| if span > 0.0 { m / span } else { 0.0 }).collect();
    for m in &mut min_by_k {
        if m.is_infinite() {
            *m = 0.0;
        }
    }
    tracker.detail("step_resolved", if traj.step_resolved { 1.0 } else { 0.0 });
    tracker.detail("levels", nk as f64);
    Ok((
        tracker.finish(),
        ProductionField {
            k_grid: k_grid.to_vec(),
            centers,
            mass_rate,
            cell_integrated,
            min_by_k,
        },
    ))
}
