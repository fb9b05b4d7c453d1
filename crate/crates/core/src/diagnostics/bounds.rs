//! L∞ bounds on u and on the pressure.

use super::report::{InequalityReport, Location, MarginTracker};
use crate::domain::{BoundarySignals, CellField, SourceSpec};
use crate::elliptic::{green_sup, neumann_lift, EllipticSolution, GREEN_X_SUP};
use crate::hyperbolic::Trajectory;

/// Which maximum principle applies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MaxPrincipleKind {
    /// Zero source: min/max of initial and boundary data, rounding tolerance.
    DataBounds,
    /// ‖u(t)‖ ≤ max(‖u0‖, ‖g‖) + ‖S‖·t, tolerance 2·Δt.
    Sourced,
    /// ‖u(t)‖ ≤ ‖u0‖ + ‖g0‖ + ‖g1‖ + C_T·t with C_T the largest source
    /// sup-norm the run recorded, tolerance 2·Δt.
    Pressure,
}

/// Every time level the scheme visited (snapshot times and step starts).
fn visited_times(traj: &Trajectory) -> Vec<f64> {
    let mut ts = traj.times();
    let mut t = 0.0;
    for dt in &traj.meta.dt_history {
        ts.push(t);
        t += dt;
    }
    ts
}

pub fn max_principle_check(
    traj: &Trajectory,
    u0: &CellField,
    bc: &BoundarySignals,
    source: &SourceSpec,
) -> InequalityReport {
    let kind = if traj.snapshots.iter().any(|s| s.elliptic.is_some()) {
        MaxPrincipleKind::Pressure
    } else if source.is_zero() {
        MaxPrincipleKind::DataBounds
    } else {
        MaxPrincipleKind::Sourced
    };
    max_principle_check_as(traj, u0, bc, source, kind)
}

pub fn max_principle_check_as(
    traj: &Trajectory,
    u0: &CellField,
    bc: &BoundarySignals,
    source: &SourceSpec,
    kind: MaxPrincipleKind,
) -> InequalityReport {
    let times = visited_times(traj);
    let g0 = times.iter().map(|&t| bc.g0(t).abs()).fold(0.0, f64::max);
    let g1 = times.iter().map(|&t| bc.g1(t).abs()).fold(0.0, f64::max);
    let dt = traj.max_dt();
    let centers: Vec<f64> = u0.grid().centers().collect();
    let argmax = |f: &CellField| {
        let (i, _) = f
            .values()
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) });
        centers[i]
    };
    match kind {
        MaxPrincipleKind::DataBounds => {
            let lo = times
                .iter()
                .fold(u0.min(), |m, &t| m.min(bc.g0(t)).min(bc.g1(t)));
            let hi = times
                .iter()
                .fold(u0.max(), |m, &t| m.max(bc.g0(t)).max(bc.g1(t)));
            let mut tr = MarginTracker::new("max_principle", 1e-12);
            for f in traj.fields() {
                for (&v, &x) in f.values().iter().zip(&centers) {
                    tr.record((v - lo).min(hi - v), Location::at(f.time()).with_x(x));
                }
            }
            tr.detail("lower", lo);
            tr.detail("upper", hi);
            tr.finish()
        }
        MaxPrincipleKind::Sourced => {
            let s = source.sup_bound();
            let m = u0.sup_norm().max(g0).max(g1);
            let mut tr = MarginTracker::new("max_principle", 2.0 * dt);
            for f in traj.fields() {
                let bound = m + s * f.time();
                tr.record(bound - f.sup_norm(), Location::at(f.time()).with_x(argmax(f)));
            }
            tr.detail("source_sup", s);
            tr.finish()
        }
        MaxPrincipleKind::Pressure => {
            let c_t = traj
                .snapshots
                .iter()
                .map(|s| match (&s.source, &s.elliptic) {
                    (Some(src), _) => src.iter().map(|v| v.abs()).fold(0.0, f64::max),
                    (None, Some(e)) => e.px.sup_norm(),
                    _ => 0.0,
                })
                .fold(0.0, f64::max);
            let base = u0.sup_norm() + g0 + g1;
            let mut tr = MarginTracker::new("max_principle", 2.0 * dt);
            for f in traj.fields() {
                let bound = base + c_t * f.time();
                tr.record(bound - f.sup_norm(), Location::at(f.time()).with_x(argmax(f)));
            }
            tr.detail("c_t", c_t);
            tr.finish()
        }
    }
}

/// Both sides of the pressure bound chain for one solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PressureBounds {
    pub p_sup: f64,
    pub px_sup: f64,
    pub pxx_sup: f64,
    pub p_bound: f64,
    pub px_bound: f64,
    pub pxx_bound: f64,
}

/// The chain for P = V + Ω with V = ∫G f_V, f_V = f + (ψ1 − ψ0) − Ω:
/// ‖P‖ ≤ ‖G‖·‖f_V‖₁ + ‖Ω‖, ‖Px‖ ≤ ‖Gx‖·‖f_V‖₁ + ‖Ω′‖, ‖Pxx‖ ≤ ‖P‖ + ‖f‖.
/// f is recovered as P − Pxx.
pub fn pressure_bounds(sol: &EllipticSolution) -> PressureBounds {
    let g = sol.p.grid();
    let dx = g.dx();
    let (psi0, psi1) = (sol.psi0, sol.psi1);
    let mut fv_l1 = 0.0;
    let mut f_sup: f64 = 0.0;
    let mut om_sup: f64 = 0.0;
    let mut omx_sup: f64 = 0.0;
    for (i, x) in g.centers().enumerate() {
        let f = sol.p.values()[i] - sol.pxx.values()[i];
        let (om, omx) = neumann_lift(x, psi0, psi1);
        fv_l1 += (f + (psi1 - psi0) - om).abs() * dx;
        f_sup = f_sup.max(f.abs());
        om_sup = om_sup.max(om.abs());
        omx_sup = omx_sup.max(omx.abs());
    }
    let p_sup = sol.p.sup_norm();
    PressureBounds {
        p_sup,
        px_sup: sol.px.sup_norm(),
        pxx_sup: sol.pxx.sup_norm(),
        p_bound: green_sup() * fv_l1 + om_sup,
        px_bound: GREEN_X_SUP * fv_l1 + omx_sup,
        pxx_bound: p_sup + f_sup,
    }
}

/// Checks the chain at every snapshot carrying a pressure solve. The
/// tolerance is 10·Δx² relative to the bound, enough for the finite
/// difference backend.
pub fn p_bounds_check(traj: &Trajectory) -> InequalityReport {
    let dx = traj.first().grid().dx();
    let rel = 10.0 * dx * dx;
    let mut tr = MarginTracker::new("p_bounds", 0.0);
    let mut checked = 0usize;
    for s in &traj.snapshots {
        let Some(sol) = &s.elliptic else { continue };
        checked += 1;
        let b = pressure_bounds(sol);
        let at = Location::at(s.time());
        tr.record(b.p_bound * (1.0 + rel) + 1e-13 - b.p_sup, at);
        tr.record(b.px_bound * (1.0 + rel) + 1e-13 - b.px_sup, at);
        tr.record(b.pxx_bound * (1.0 + 1e-12) + 1e-13 - b.pxx_sup, at);
    }
    tr.detail("snapshots_checked", checked as f64);
    tr.finish()
}
