//! Single runs: solve, evaluate the requested checks, write artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::config::{CheckName, OutputFormat, RunConfig};
use super::io;
use super::scenarios::{self, ScenarioKind, ScenarioSetup};
use crate::diagnostics::boundary::{boundary_entropy_residual, kruzkov_family, EntropyFamily};
use crate::diagnostics::energy::EnergyReport;
use crate::diagnostics::report::{InequalityReport, Location, MarginTracker};
use crate::diagnostics::{
    dp_energy, extract_trace, kruzkov_production, l1_stability, max_principle_check, measured_source_lipschitz,
    p_bounds_check, C0Fit, Side, TraceEstimate,
};
use crate::domain::{kruzkov_levels, uniform_dt, CellField, Grid1D};
use crate::dp::dp_run;
use crate::elliptic::EllipticSolver;
use crate::error::{Error, Result};
use crate::hyperbolic::{run_ibvp, IbvpParams, OutputSchedule, Snapshot, Trajectory};

/// Environment variable that overrides `output.dir`.
pub const OUTPUT_DIR_ENV: &str = "SOLVER_OUTPUT_DIR";

/// Amplitude and support of the bump added to u0 for the stability pair;
/// its L¹ norm is 10⁻³.
const PERTURBATION: (f64, f64, f64) = (5e-3, 0.4, 0.6);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    Pass,
    DiagnosticFailure,
    ConfigError,
    SolverAbort,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Pass => 0,
            ExitStatus::DiagnosticFailure => 1,
            ExitStatus::ConfigError => 2,
            ExitStatus::SolverAbort => 3,
        }
    }

    pub fn from_reports(reports: &[InequalityReport]) -> Self {
        if reports.iter().all(|r| r.passed) {
            ExitStatus::Pass
        } else {
            ExitStatus::DiagnosticFailure
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub status: ExitStatus,
    pub reports: Vec<InequalityReport>,
    pub dir: PathBuf,
    pub failure: Option<String>,
    pub trajectory: Option<Trajectory>,
    pub energy: Option<EnergyReport>,
}

pub fn output_dir(cfg: &RunConfig) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => cfg.output_dir.clone(),
    }
}

/// Number of dyadic trace layers used for an n-cell grid.
pub fn trace_layers(n: usize) -> usize {
    let mut l = 3;
    while l < 5 && (1usize << (l + 1)) <= n {
        l += 1;
    }
    l
}

#[derive(Serialize)]
struct FailureInfo {
    message: String,
    step: Option<usize>,
    time: Option<f64>,
}

#[derive(Serialize)]
struct Meta<'a> {
    status: &'a str,
    config: &'a RunConfig,
    scenario_summary: &'a str,
    flux_bound: Option<f64>,
    fixed_dt: Option<f64>,
    steps: usize,
    dt_history: &'a [f64],
    wall_time_s: f64,
    exit_code: Option<i32>,
    failure: Option<FailureInfo>,
}

/// Model run with the configured scheme and a given initial state.
pub fn solve(cfg: &RunConfig, setup: &ScenarioSetup, u0: &CellField, output: &OutputSchedule, fixed_dt: Option<f64>) -> Result<Trajectory> {
    if cfg.dp_enabled {
        let mut dp = setup.dp_config(cfg.t_end);
        dp.u0 = u0.clone();
        dp.scheme = cfg.scheme;
        dp.eps = cfg.eps;
        dp.cfl = cfg.cfl;
        dp.backend = cfg.elliptic_backend;
        dp.fixed_dt = fixed_dt;
        dp_run(&dp, output)
    } else {
        let mut params = IbvpParams::new(cfg.t_end, cfg.scheme).with_eps(cfg.eps).with_cfl(cfg.cfl).with_coupling(cfg.coupling);
        params.fixed_dt = fixed_dt;
        run_ibvp(u0, &setup.bc, &setup.source, &setup.flux, &params, output)
    }
}

/// Scenario built for the configured grid and time, with the flux bound
/// covering the DP coupling when it is switched on for a scalar scenario.
pub fn setup_for(cfg: &RunConfig) -> Result<ScenarioSetup> {
    let grid = Grid1D::new(cfg.n_cells)?;
    let mut setup = scenarios::build(&cfg.scenario, grid, cfg.t_end)?;
    if cfg.dp_enabled && !setup.is_dp() && setup.info.kind == ScenarioKind::Scalar {
        setup.flux = setup.dp_config(cfg.t_end).flux()?;
    }
    Ok(setup)
}

fn perturbed(u0: &CellField) -> Result<CellField> {
    let (a, lo, hi) = PERTURBATION;
    let g = *u0.grid();
    let vals = u0
        .values()
        .iter()
        .zip(g.centers())
        .map(|(v, x)| if (lo..hi).contains(&x) { v + a } else { *v })
        .collect();
    CellField::new(g, 0.0, vals)
}

fn trace_report(tr: &TraceEstimate, t_end: f64, scale: f64) -> InequalityReport {
    // rounding floor: layer sums of equal values need not be exact
    let mut m = MarginTracker::new(format!("trace_{}", tr.side), 1e-12 * (1.0 + scale) * t_end.max(1.0));
    m.record(tr.coarsest_defect() - tr.finest_defect(), Location::at(t_end));
    m.detail("finest_defect", tr.finest_defect());
    m.detail("coarsest_defect", tr.coarsest_defect());
    m.detail("trace_final", *tr.values().last().unwrap());
    m.finish()
}

fn energy_report(e: &EnergyReport, dx: f64) -> InequalityReport {
    let mut m = MarginTracker::new("dp_energy", 0.0);
    let t = e.times.last().copied().unwrap_or(0.0);
    if e.norm_ratio_max > 0.0 {
        m.record(e.norm_ratio_min - (1.0 - 1e-12), Location::at(t));
        m.record(4.0 * (1.0 + 10.0 * dx) - e.norm_ratio_max, Location::at(t));
    }
    match e.alpha_beta_fit {
        C0Fit::Bounded(c) => m.detail("c0", c),
        C0Fit::Unbounded => m.record(f64::NEG_INFINITY, Location::at(t)),
    }
    m.detail("norm_ratio_min", e.norm_ratio_min);
    m.detail("norm_ratio_max", e.norm_ratio_max);
    m.finish()
}

fn with_tolerance(mut r: InequalityReport, tol: Option<f64>) -> InequalityReport {
    if let Some(t) = tol {
        r.tolerance = t;
        r.passed = r.worst_violation >= -t;
    }
    r
}

/// Evaluates every requested check on a finished run.
pub fn evaluate_checks(
    cfg: &RunConfig,
    setup: &ScenarioSetup,
    traj: &Trajectory,
    schedule: &OutputSchedule,
    fixed_dt: Option<f64>,
) -> Result<(Vec<InequalityReport>, Vec<TraceEstimate>, Option<EnergyReport>)> {
    let grid = *traj.first().grid();
    let dx = grid.dx();
    let mut reports = Vec::new();
    let mut traces = Vec::new();
    let mut energy = None;
    let checks = cfg.active_checks();
    let wants = |c: CheckName| checks.iter().any(|s| s.name == c);
    if wants(CheckName::Trace) || wants(CheckName::BoundaryEntropy) {
        let layers = trace_layers(grid.n_cells());
        for side in [Side::Left, Side::Right] {
            traces.push(extract_trace(traj, side, layers)?);
        }
    }
    let scale = crate::diagnostics::entropy::solution_range(traj);
    let scale = scale.0.abs().max(scale.1.abs());
    for spec in checks {
        let tol = spec.tolerance;
        match spec.name {
            CheckName::Trace => {
                for tr in &traces {
                    reports.push(with_tolerance(trace_report(tr, cfg.t_end, scale), tol));
                }
            }
            CheckName::KruzkovProduction => {
                let ks = kruzkov_levels(setup.flux.bound(), 64);
                let (r, field) = kruzkov_production(traj, &setup.flux, &ks, &setup.source)?;
                let mut r = with_tolerance(r, tol);
                let total: f64 = field.mass_rate.iter().sum::<f64>() / ks.len() as f64;
                r.details.insert("mean_mass_rate".into(), total);
                reports.push(r);
            }
            CheckName::BoundaryEntropy => {
                let ks = kruzkov_family(&setup.flux, 64);
                for tr in &traces {
                    let r = boundary_entropy_residual(tr, &setup.bc, &setup.flux, EntropyFamily::Kruzkov(&ks), dx)?;
                    reports.push(with_tolerance(r, tol));
                }
            }
            CheckName::MaxPrinciple => {
                reports.push(with_tolerance(max_principle_check(traj, traj.first(), &setup.bc, &setup.source), tol));
            }
            CheckName::L1Stability => {
                // same schedule and step as the main run, so the levels coincide
                let v0 = perturbed(traj.first())?;
                let other = solve(cfg, setup, &v0, schedule, fixed_dt)?;
                let c = if cfg.dp_enabled {
                    measured_source_lipschitz(traj, &other)?
                } else {
                    setup.source.lipschitz_c()
                };
                reports.push(with_tolerance(l1_stability(traj, &other, c)?, tol));
            }
            CheckName::PBounds => reports.push(with_tolerance(p_bounds_check(traj), tol)),
            CheckName::DpEnergy => {
                let e = dp_energy(traj, &setup.bc)?;
                reports.push(with_tolerance(energy_report(&e, dx), tol));
                energy = Some(e);
            }
        }
    }
    Ok((reports, traces, energy))
}

fn write_meta(dir: &Path, meta: &Meta<'_>) -> Result<()> {
    io::write_json(&dir.join("meta.json"), meta)
}

/// Output targets written to fields.csv.
fn output_targets(cfg: &RunConfig) -> Option<Vec<f64>> {
    (cfg.output_count > 0).then(|| {
        (1..=cfg.output_count).map(|j| cfg.t_end * j as f64 / cfg.output_count as f64).collect()
    })
}

/// Runs one configured scenario and writes its artifacts. Only I/O
/// problems with the output directory surface as `Err`.
pub fn run_scenario(cfg: &RunConfig) -> Result<RunOutcome> {
    let dir = output_dir(cfg);
    std::fs::create_dir_all(&dir)?;
    let start = Instant::now();
    let info = scenarios::lookup(&cfg.scenario)?;
    let mut meta = Meta {
        status: "running",
        config: cfg,
        scenario_summary: info.summary,
        flux_bound: None,
        fixed_dt: None,
        steps: 0,
        dt_history: &[],
        wall_time_s: 0.0,
        exit_code: None,
        failure: None,
    };
    write_meta(&dir, &meta)?;

    let abort = |meta: &mut Meta<'_>, e: Error, status: ExitStatus| -> Result<RunOutcome> {
        let (step, time) = match &e {
            Error::StepFailed { step, time, .. } => (Some(*step), Some(*time)),
            _ => (None, None),
        };
        let msg = e.to_string();
        meta.status = "failed";
        meta.exit_code = Some(status.code());
        meta.wall_time_s = start.elapsed().as_secs_f64();
        meta.failure = Some(FailureInfo { message: msg.clone(), step, time });
        write_meta(&dir, meta)?;
        Ok(RunOutcome {
            status,
            reports: vec![],
            dir: dir.clone(),
            failure: Some(msg),
            trajectory: None,
            energy: None,
        })
    };

    let setup = match setup_for(cfg) {
        Ok(s) => s,
        Err(e) => return abort(&mut meta, e, ExitStatus::ConfigError),
    };
    if info.kind == ScenarioKind::Elliptic {
        return run_elliptic(cfg, &setup, &dir, meta, start);
    }
    meta.flux_bound = Some(setup.flux.bound());
    if cfg.dp_enabled {
        if let Err(e) = setup.dp_config(cfg.t_end).validate() {
            return abort(&mut meta, e, ExitStatus::ConfigError);
        }
    }
    let fixed_dt = uniform_dt(setup.u0.grid(), &setup.flux, cfg.cfl, cfg.eps);
    meta.fixed_dt = Some(fixed_dt);
    let targets = output_targets(cfg);
    let schedule = OutputSchedule::Resolved(targets.clone().unwrap_or_default());
    let traj = match solve(cfg, &setup, &setup.u0, &schedule, Some(fixed_dt)) {
        Ok(t) => t,
        Err(e) => return abort(&mut meta, e, ExitStatus::SolverAbort),
    };
    let (reports, traces, energy) = match evaluate_checks(cfg, &setup, &traj, &schedule, Some(fixed_dt)) {
        Ok(r) => r,
        Err(e) => return abort(&mut meta, e, ExitStatus::SolverAbort),
    };

    if cfg.has_format(OutputFormat::Csv) {
        let keep: Vec<&Snapshot> = traj
            .snapshots
            .iter()
            .filter(|s| match &targets {
                None => true,
                Some(ts) => s.time() == 0.0 || ts.contains(&s.time()),
            })
            .collect();
        io::write_fields(&dir.join("fields.csv"), keep.iter().copied())?;
        io::write_traces(&dir.join("traces.csv"), &traces)?;
    }
    if cfg.has_format(OutputFormat::Json) {
        io::write_json(&dir.join("diagnostics.json"), &reports)?;
        if let Some(e) = &energy {
            io::write_json(&dir.join("energy.json"), e)?;
        }
    }
    let status = ExitStatus::from_reports(&reports);
    meta.status = "finished";
    meta.steps = traj.steps();
    meta.dt_history = &traj.meta.dt_history;
    meta.exit_code = Some(status.code());
    meta.wall_time_s = start.elapsed().as_secs_f64();
    write_meta(&dir, &meta)?;
    Ok(RunOutcome {
        status,
        reports,
        dir,
        failure: None,
        trajectory: Some(traj),
        energy,
    })
}

fn run_elliptic(cfg: &RunConfig, setup: &ScenarioSetup, dir: &Path, mut meta: Meta<'_>, start: Instant) -> Result<RunOutcome> {
    let f = setup.elliptic_rhs.clone().expect("elliptic scenario carries its right side");
    let sol = EllipticSolver::new(*f.grid(), cfg.elliptic_backend).solve(&f, 0.0, 0.0)?;
    let exact = setup.exact_field(0.0).expect("elliptic scenario has a closed form");
    let err = sol.p.values().iter().zip(exact.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let snap = Snapshot {
        field: f.clone(),
        ghosts: (0.0, 0.0),
        source: None,
        elliptic: Some(sol),
    };
    let traj = Trajectory {
        snapshots: vec![snap],
        boundary_flux_log: vec![],
        meta: crate::hyperbolic::SchemeMeta {
            scheme: cfg.scheme,
            eps: 0.0,
            cfl: cfg.cfl,
            coupling: cfg.coupling,
            dt_history: vec![],
        },
        step_resolved: false,
    };
    let mut reports = Vec::new();
    if cfg.diagnostics.iter().any(|c| c.name == CheckName::PBounds) {
        let mut r = p_bounds_check(&traj);
        r.details.insert("max_error".into(), err);
        reports.push(r);
    }
    if cfg.has_format(OutputFormat::Csv) {
        io::write_fields(&dir.join("fields.csv"), &traj.snapshots)?;
    }
    if cfg.has_format(OutputFormat::Json) {
        io::write_json(&dir.join("diagnostics.json"), &reports)?;
    }
    let status = ExitStatus::from_reports(&reports);
    meta.status = "finished";
    meta.exit_code = Some(status.code());
    meta.wall_time_s = start.elapsed().as_secs_f64();
    write_meta(dir, &meta)?;
    Ok(RunOutcome {
        status,
        reports,
        dir: dir.to_path_buf(),
        failure: None,
        trajectory: Some(traj),
        energy: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(scenario: &str, n: usize, t: f64, dir: &Path) -> RunConfig {
        let mut c = RunConfig::new(scenario, n, t).unwrap();
        c.output_dir = dir.to_path_buf();
        c
    }

    #[test]
    fn trace_layers_fit_grid() {
        assert_eq!(trace_layers(8), 3);
        assert_eq!(trace_layers(16), 4);
        assert_eq!(trace_layers(400), 5);
    }

    #[test]
    fn stationary_shock_run_passes_everything() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_scenario(&cfg("burgers_stationary_shock", 64, 0.2, dir.path())).unwrap();
        assert_eq!(out.status, ExitStatus::Pass, "{:#?}", out.reports);
        for f in ["fields.csv", "traces.csv", "diagnostics.json", "meta.json"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("meta.json")).unwrap()).unwrap();
        assert_eq!(meta["status"], "finished");
        assert_eq!(meta["exit_code"], 0);
    }

    #[test]
    fn dp_constant_fields_stay_constant() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_scenario(&cfg("dp_constant", 32, 0.2, dir.path())).unwrap();
        assert_eq!(out.status, ExitStatus::Pass, "{:#?}", out.reports);
        let fields = io::read_fields(&dir.path().join("fields.csv")).unwrap();
        assert_eq!(fields.len(), 11);
        for f in fields {
            assert!(f.values().iter().all(|v| (v - 0.5).abs() < 1e-12));
        }
        let text = std::fs::read_to_string(dir.path().join("fields.csv")).unwrap();
        assert!(text.starts_with("t,x,u,P,Px\n"));
    }

    #[test]
    fn roe_expansion_run_fails_entropy_check() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = cfg("burgers_rarefaction", 64, 0.1, dir.path());
        c.scheme = crate::hyperbolic::Scheme::Roe;
        let out = run_scenario(&c).unwrap();
        assert_eq!(out.status, ExitStatus::DiagnosticFailure);
        let r = out.reports.iter().find(|r| r.name == "kruzkov_production").unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn elliptic_scenario_writes_pressure() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_scenario(&cfg("elliptic_cosine", 100, 1.0, dir.path())).unwrap();
        assert_eq!(out.status, ExitStatus::Pass);
        assert!(out.reports[0].detail("max_error").unwrap() < 1e-3);
    }

    #[test]
    fn identical_configs_give_identical_csv() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_scenario(&cfg("dp_peakon", 32, 0.05, a.path())).unwrap();
        run_scenario(&cfg("dp_peakon", 32, 0.05, b.path())).unwrap();
        for f in ["fields.csv", "traces.csv"] {
            let x = std::fs::read(a.path().join(f)).unwrap();
            let y = std::fs::read(b.path().join(f)).unwrap();
            assert_eq!(x, y, "{f}");
        }
    }
}
