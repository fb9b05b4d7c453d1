//! Boundary entropy condition on traces:
//!
//! ```text
//! R = [q(uτ) − q(ub) − η′(ub)(A(uτ) − A(ub))]·n̂ ≥ 0,
//! ```
//!
//! n̂ = −1 at x = 0 and +1 at x = 1. For the Kruzkov pair at level k this
//! reduces to (sgn(uτ−k) − sgn(ub−k))(A(uτ) − A(k))·n̂.

use super::report::{InequalityReport, Location, MarginTracker};
use super::trace::{Side, TraceEstimate};
use crate::domain::{kruzkov_pair, sgn, BoundarySignals, EntropyPair, FluxSpec};
use crate::error::{Error, Result};

/// Entropies to test the boundary condition against.
#[derive(Clone, Copy, Debug)]
pub enum EntropyFamily<'a> {
    Kruzkov(&'a [f64]),
    Pairs(&'a [EntropyPair]),
}

/// Residual of one entropy pair at one time sample.
pub fn boundary_residual(pair: &EntropyPair, flux: &FluxSpec, trace: f64, datum: f64, side: Side) -> f64 {
    (pair.q(trace) - pair.q(datum) - pair.eta_prime(datum) * (flux.a(trace) - flux.a(datum))) * side.normal()
}

/// Kruzkov residual in closed form.
pub fn kruzkov_boundary_residual(k: f64, flux: &FluxSpec, trace: f64, datum: f64, side: Side) -> f64 {
    (sgn(trace - k) - sgn(datum - k)) * (flux.a(trace) - flux.a(k)) * side.normal()
}

/// 10·Δx·(1 + max|A′|) over the trace and datum range.
pub fn boundary_tolerance(dx: f64, flux: &FluxSpec, trace: &[f64], datum: &[f64]) -> f64 {
    let (lo, hi) = trace
        .iter()
        .chain(datum)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo > hi {
        return 10.0 * dx;
    }
    10.0 * dx * (1.0 + flux.max_speed(lo, hi))
}

/// `datum[n]` is the boundary value at `trace.times[n]`.
pub fn boundary_entropy_residual_sampled(
    trace: &TraceEstimate,
    datum: &[f64],
    flux: &FluxSpec,
    family: EntropyFamily<'_>,
    tolerance: f64,
) -> Result<InequalityReport> {
    let values = trace.values();
    if datum.len() != values.len() {
        return Err(Error::GridMismatch(format!(
            "trace has {} time samples but the datum has {}",
            values.len(),
            datum.len()
        )));
    }
    let side = trace.side;
    let x = match side {
        Side::Left => 0.0,
        Side::Right => 1.0,
    };
    let mut tracker = MarginTracker::new(format!("boundary_entropy_{side}"), tolerance);
    for ((&t, &ut), &ub) in trace.times.iter().zip(values).zip(datum) {
        match family {
            EntropyFamily::Kruzkov(ks) => {
                for &k in ks {
                    let r = kruzkov_boundary_residual(k, flux, ut, ub, side);
                    tracker.record(r, Location::at(t).with_x(x).with_k(k));
                }
            }
            EntropyFamily::Pairs(pairs) => {
                for p in pairs {
                    tracker.record(boundary_residual(p, flux, ut, ub, side), Location::at(t).with_x(x));
                }
            }
        }
    }
    let max_gap = values.iter().zip(datum).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    tracker.detail("max_trace_datum_gap", max_gap);
    Ok(tracker.finish())
}

/// Samples the datum from `bc` at the trace times and uses the default
/// tolerance for grid spacing `dx`.
pub fn boundary_entropy_residual(
    trace: &TraceEstimate,
    bc: &BoundarySignals,
    flux: &FluxSpec,
    family: EntropyFamily<'_>,
    dx: f64,
) -> Result<InequalityReport> {
    let datum: Vec<f64> = trace
        .times
        .iter()
        .map(|&t| match trace.side {
            Side::Left => bc.g0(t),
            Side::Right => bc.g1(t),
        })
        .collect();
    let tol = boundary_tolerance(dx, flux, trace.values(), &datum);
    boundary_entropy_residual_sampled(trace, &datum, flux, family, tol)
}

/// Kruzkov family check with levels from [−L, L].
pub fn kruzkov_family(flux: &FluxSpec, count: usize) -> Vec<f64> {
    crate::domain::kruzkov_levels(flux.bound(), count)
}

/// Same check through the generic pair formula; used to cross-check the
/// closed form.
pub fn kruzkov_pairs(flux: &FluxSpec, ks: &[f64]) -> Result<Vec<EntropyPair>> {
    ks.iter().map(|&k| kruzkov_pair(k, flux)).collect()
}
