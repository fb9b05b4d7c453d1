//! Diagnostics on a stored fields.csv, without re-running the solver.

use std::path::PathBuf;

use super::config::CheckName;
use super::io::read_fields;
use super::run::{trace_layers, ExitStatus};
use super::scenarios;
use crate::diagnostics::boundary::{boundary_entropy_residual, kruzkov_family, EntropyFamily};
use crate::diagnostics::report::{InequalityReport, Location, MarginTracker};
use crate::diagnostics::{dp_energy, extract_trace, kruzkov_production, max_principle_check, Side};
use crate::domain::{kruzkov_levels, BoundarySignals, FluxSpec, SourceSpec};
use crate::error::{Error, Result};
use crate::hyperbolic::{Scheme, Trajectory};

/// Where the boundary data come from.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundarySource {
    Constant { g0: f64, g1: f64 },
    Scenario(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRequest {
    pub fields: PathBuf,
    pub diag: CheckName,
    pub boundary: BoundarySource,
    /// Scheme used for the discrete entropy flux.
    pub scheme: Scheme,
}

#[derive(Debug)]
pub struct CheckOutcome {
    pub status: ExitStatus,
    pub reports: Vec<InequalityReport>,
}

pub fn check_fields(req: &CheckRequest) -> Result<CheckOutcome> {
    let fields = read_fields(&req.fields)?;
    let grid = *fields[0].grid();
    let t_end = fields.last().unwrap().time();
    let (bc, flux, source) = match &req.boundary {
        BoundarySource::Constant { g0, g1 } => {
            let sup = fields.iter().map(|f| f.sup_norm()).fold(g0.abs().max(g1.abs()), f64::max);
            (BoundarySignals::constant(*g0, *g1), FluxSpec::burgers(sup + 1.0)?, SourceSpec::zero())
        }
        BoundarySource::Scenario(name) => {
            let s = scenarios::build(name, grid, t_end.max(f64::MIN_POSITIVE))?;
            (s.bc, s.flux, s.source)
        }
    };
    let traj = Trajectory::from_fields(fields, &bc, req.scheme)?;
    let dx = grid.dx();
    let mut reports = Vec::new();
    match req.diag {
        CheckName::Trace | CheckName::BoundaryEntropy => {
            let layers = trace_layers(grid.n_cells());
            for side in [Side::Left, Side::Right] {
                let tr = extract_trace(&traj, side, layers)?;
                if req.diag == CheckName::Trace {
                    let mut m = MarginTracker::new(format!("trace_{side}"), 1e-12);
                    m.record(tr.coarsest_defect() - tr.finest_defect(), Location::at(t_end));
                    m.detail("trace_final", *tr.values().last().unwrap());
                    reports.push(m.finish());
                } else {
                    let ks = kruzkov_family(&flux, 64);
                    reports.push(boundary_entropy_residual(&tr, &bc, &flux, EntropyFamily::Kruzkov(&ks), dx)?);
                }
            }
        }
        CheckName::KruzkovProduction => {
            let ks = kruzkov_levels(flux.bound(), 64);
            reports.push(kruzkov_production(&traj, &flux, &ks, &source)?.0);
        }
        CheckName::MaxPrinciple => {
            reports.push(max_principle_check(&traj, traj.first(), &bc, &source));
        }
        CheckName::DpEnergy => {
            let e = dp_energy(&traj, &bc)?;
            let mut m = MarginTracker::new("dp_energy", 0.0);
            if e.norm_ratio_max > 0.0 {
                m.record(e.norm_ratio_min - (1.0 - 1e-12), Location::at(t_end));
                m.record(4.0 * (1.0 + 10.0 * dx) - e.norm_ratio_max, Location::at(t_end));
            }
            if let Some(c) = e.alpha_beta_fit.value() {
                m.detail("c0", c);
            } else {
                m.record(f64::NEG_INFINITY, Location::at(t_end));
            }
            reports.push(m.finish());
        }
        other @ (CheckName::L1Stability | CheckName::PBounds) => {
            return Err(Error::invalid(format!(
                "`{other}` needs a solver run (a second trajectory or pressure fields) and is not available in check mode"
            )));
        }
    }
    Ok(CheckOutcome {
        status: ExitStatus::from_reports(&reports),
        reports,
    })
}
