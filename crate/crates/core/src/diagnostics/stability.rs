//! L¹ stability of paired runs:
//! ‖u(t) − v(t)‖₁ ≤ e^{2Ct}‖u0 − v0‖₁ + 10·Δx·t.
//! With C = 0 the check is the pure contraction d(tₙ₊₁) ≤ d(tₙ).

use super::report::{InequalityReport, Location, MarginTracker};
use crate::error::{Error, Result};
use crate::hyperbolic::Trajectory;

fn check_paired(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.snapshots.len() != b.snapshots.len() {
        return Err(Error::GridMismatch(format!(
            "paired runs have {} and {} snapshots",
            a.snapshots.len(),
            b.snapshots.len()
        )));
    }
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        x.field.check_same_grid(&y.field)?;
        if (x.time() - y.time()).abs() > 1e-12 * (1.0 + x.time().abs()) {
            return Err(Error::GridMismatch(format!(
                "snapshot times differ: {} vs {}",
                x.time(),
                y.time()
            )));
        }
        if x.ghosts != y.ghosts {
            return Err(Error::GridMismatch(format!(
                "boundary data differ at t = {}",
                x.time()
            )));
        }
    }
    if a.meta.scheme != b.meta.scheme || a.meta.eps != b.meta.eps {
        return Err(Error::GridMismatch("paired runs use different schemes".into()));
    }
    Ok(())
}

/// Largest ratio ‖s_A − s_B‖₁ / ‖u_A − u_B‖₁ over snapshots where both
/// runs recorded their source.
pub fn measured_source_lipschitz(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    check_paired(a, b)?;
    let dx = a.first().grid().dx();
    let mut c: f64 = 0.0;
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        let (Some(sa), Some(sb)) = (&x.source, &y.source) else { continue };
        let d = x.field.l1_distance(&y.field)?;
        if d <= 0.0 {
            continue;
        }
        let ds: f64 = sa.iter().zip(sb).map(|(p, q)| (p - q).abs()).sum::<f64>() * dx;
        c = c.max(ds / d);
    }
    Ok(c)
}

pub fn l1_stability(a: &Trajectory, b: &Trajectory, lipschitz_c: f64) -> Result<InequalityReport> {
    check_paired(a, b)?;
    if !(lipschitz_c >= 0.0) {
        return Err(Error::invalid(format!("Lipschitz constant must be nonnegative, got {lipschitz_c}")));
    }
    let dx = a.first().grid().dx();
    let dists = a
        .fields()
        .zip(b.fields())
        .map(|(x, y)| x.l1_distance(y))
        .collect::<Result<Vec<f64>>>()?;
    let times = a.times();
    let d0 = dists[0];
    let mut tr;
    if lipschitz_c == 0.0 {
        tr = MarginTracker::new("l1_contraction", 1e-12);
        for (w, t) in dists.windows(2).zip(&times[1..]) {
            tr.record(w[0] - w[1], Location::at(*t));
        }
    } else {
        tr = MarginTracker::new("l1_stability", 0.0);
        for (&d, &t) in dists.iter().zip(&times) {
            let bound = (2.0 * lipschitz_c * t).exp() * d0 + 10.0 * dx * t;
            tr.record(bound - d, Location::at(t));
        }
    }
    tr.detail("initial_distance", d0);
    tr.detail("final_distance", *dists.last().unwrap());
    tr.detail("lipschitz_c", lipschitz_c);
    Ok(tr.finish())
}
