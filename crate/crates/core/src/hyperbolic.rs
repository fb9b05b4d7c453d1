//! Explicit finite-volume time stepping for ∂t u + ∂x A(u) = S(t, x, u)
//! (+ ε ∂xx u) on (0, 1).
//!
//! Dirichlet data enter only through ghost cells: the boundary face flux
//! is the numerical flux between the datum and the adjacent cell, so the
//! scheme itself decides whether the datum is attained.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{cfl_dt, BoundarySignals, CellField, FluxSpec, SourceSpec};
use crate::elliptic::EllipticSolution;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Godunov,
    EngquistOsher,
    LaxFriedrichs,
    /// Roe upwinding without entropy fix. Not monotone: admits stationary
    /// expansion shocks. Kept as a negative control for the entropy checks.
    Roe,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Godunov,
        Scheme::EngquistOsher,
        Scheme::LaxFriedrichs,
        Scheme::Roe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Godunov => "godunov",
            Scheme::EngquistOsher => "engquist_osher",
            Scheme::LaxFriedrichs => "lax_friedrichs",
            Scheme::Roe => "roe",
        }
    }

    pub fn is_monotone(self) -> bool {
        !matches!(self, Scheme::Roe)
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownScheme {
                name: s.to_string(),
                valid: Self::valid_names(),
            })
    }
}

/// Two-point numerical flux F(uL, uR).
pub fn numerical_flux(scheme: Scheme, ul: f64, ur: f64, flux: &FluxSpec) -> f64 {
    match scheme {
        Scheme::Godunov => {
            if ul <= ur {
                flux.min_over(ul, ur)
            } else {
                flux.max_over(ul, ur)
            }
        }
        Scheme::EngquistOsher => {
            let oriented = if ur >= ul { 1.0 } else { -1.0 } * flux.total_variation(ul, ur);
            0.5 * (flux.a(ul) + flux.a(ur)) - 0.5 * oriented
        }
        Scheme::LaxFriedrichs => {
            let alpha = flux.max_speed(ul, ur);
            0.5 * (flux.a(ul) + flux.a(ur)) - 0.5 * alpha * (ur - ul)
        }
        Scheme::Roe => {
            let speed = if ur != ul {
                (flux.a(ur) - flux.a(ul)) / (ur - ul)
            } else {
                flux.a_prime(ul)
            };
            if speed >= 0.0 {
                flux.a(ul)
            } else {
                flux.a(ur)
            }
        }
    }
}

/// Numerical Kruzkov entropy flux F(uL∨k, uR∨k) − F(uL∧k, uR∧k) of a
/// two-point scheme.
pub fn kruzkov_numerical_flux(scheme: Scheme, ul: f64, ur: f64, k: f64, flux: &FluxSpec) -> f64 {
    numerical_flux(scheme, ul.max(k), ur.max(k), flux) - numerical_flux(scheme, ul.min(k), ur.min(k), flux)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceCoupling {
    /// Forward Euler with S(tⁿ, xᵢ, uᵢⁿ).
    #[default]
    Unsplit,
    /// Half source step, transport step, half source step.
    Strang,
}

#[derive(Clone, Debug)]
pub struct StepResult {
    pub field: CellField,
    /// Total (convective + diffusive) flux through x = 0, positive inward.
    pub flux_in: f64,
    /// Total flux through x = 1, positive outward.
    pub flux_out: f64,
}

/// Largest dt for which the explicit update is a monotone combination.
pub fn monotone_dt_limit(values: &[f64], ghosts: (f64, f64), dx: f64, flux: &FluxSpec, eps: f64) -> f64 {
    let (lo, hi) = values
        .iter()
        .chain([&ghosts.0, &ghosts.1])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let rate = flux.max_speed(lo, hi) / dx + 2.0 * eps / (dx * dx);
    if rate > 0.0 {
        1.0 / rate
    } else {
        f64::INFINITY
    }
}

/// One forward-Euler step of the conservative update with Dirichlet ghost
/// cells g0(t), g1(t) taken at `state.time()`.
pub fn step_hyperbolic(
    state: &CellField,
    bc: &BoundarySignals,
    source: Option<&CellField>,
    dt: f64,
    flux: &FluxSpec,
    scheme: Scheme,
    eps: f64,
) -> Result<StepResult> {
    let t = state.time();
    let ghosts = (bc.g0(t), bc.g1(t));
    if let Some(s) = source {
        state.check_same_grid(s)?;
    }
    step_with_ghosts(state, ghosts, source.map(|s| s.values()), dt, flux, scheme, eps)
}

pub(crate) fn step_with_ghosts(
    state: &CellField,
    ghosts: (f64, f64),
    source: Option<&[f64]>,
    dt: f64,
    flux: &FluxSpec,
    scheme: Scheme,
    eps: f64,
) -> Result<StepResult> {
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    if !(eps >= 0.0) {
        return Err(Error::invalid(format!("viscosity must be nonnegative, got {eps}")));
    }
    let u = state.values();
    let n = u.len();
    let dx = state.grid().dx();
    let limit = monotone_dt_limit(u, ghosts, dx, flux, eps);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, limit });
    }
    let cell = |i: isize| -> f64 {
        if i < 0 {
            ghosts.0
        } else if i as usize >= n {
            ghosts.1
        } else {
            u[i as usize]
        }
    };
    // faces[j] sits between cells j−1 and j, j = 0..=n
    let faces: Vec<f64> = (0..=n as isize)
        .map(|j| {
            let (l, r) = (cell(j - 1), cell(j));
            numerical_flux(scheme, l, r, flux) - eps * (r - l) / dx
        })
        .collect();
    let lambda = dt / dx;
    let next: Vec<f64> = (0..n)
        .map(|i| {
            let s = source.map_or(0.0, |s| s[i]);
            u[i] - lambda * (faces[i + 1] - faces[i]) + dt * s
        })
        .collect();
    let field = CellField::new(*state.grid(), state.time() + dt, next)?;
    Ok(StepResult {
        field,
        flux_in: faces[0],
        flux_out: faces[n],
    })
}

#[derive(Clone, Debug)]
pub struct IbvpParams {
    pub t_end: f64,
    pub scheme: Scheme,
    pub eps: f64,
    pub cfl: f64,
    pub dt_max: f64,
    pub coupling: SourceCoupling,
    /// Use this step instead of the adaptive CFL step (still checked
    /// against the monotonicity limit). Paired runs share it so their
    /// time levels coincide.
    pub fixed_dt: Option<f64>,
}

impl IbvpParams {
    pub fn new(t_end: f64, scheme: Scheme) -> Self {
        Self {
            t_end,
            scheme,
            eps: 0.0,
            cfl: 0.5,
            dt_max: 0.1,
            coupling: SourceCoupling::Unsplit,
            fixed_dt: None,
        }
    }

    pub fn with_fixed_dt(mut self, dt: f64) -> Self {
        self.fixed_dt = Some(dt);
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_coupling(mut self, coupling: SourceCoupling) -> Self {
        self.coupling = coupling;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid(format!("final time must be positive, got {}", self.t_end)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::invalid(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.eps >= 0.0) {
            return Err(Error::invalid(format!("viscosity must be nonnegative, got {}", self.eps)));
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::invalid(format!("fixed dt must be positive, got {dt}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OutputSchedule {
    /// Keep every time level.
    EveryStep,
    /// Keep the levels at these times; steps are shortened to land on them.
    Times(Vec<f64>),
    /// Keep every level and also land exactly on these times.
    Resolved(Vec<f64>),
}

impl OutputSchedule {
    /// `count` equally spaced times in (0, t_end].
    pub fn uniform(t_end: f64, count: usize) -> Self {
        let count = count.max(1);
        OutputSchedule::Times((1..=count).map(|j| t_end * j as f64 / count as f64).collect())
    }
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub field: CellField,
    /// Dirichlet ghost values (g0, g1) at the snapshot time.
    pub ghosts: (f64, f64),
    /// Source values applied by the step that starts at this snapshot.
    pub source: Option<Vec<f64>>,
    /// Pressure solve at this snapshot (nonlocal-source runs only).
    pub elliptic: Option<EllipticSolution>,
}

impl Snapshot {
    pub fn time(&self) -> f64 {
        self.field.time()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryFluxRecord {
    pub time: f64,
    pub dt: f64,
    pub flux_in: f64,
    pub flux_out: f64,
    /// dt · Σ sᵢ dx for the step.
    pub source_mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SchemeMeta {
    pub scheme: Scheme,
    pub eps: f64,
    pub cfl: f64,
    pub coupling: SourceCoupling,
    pub dt_history: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub boundary_flux_log: Vec<BoundaryFluxRecord>,
    pub meta: SchemeMeta,
    /// True when consecutive snapshots are consecutive time levels.
    pub step_resolved: bool,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(Snapshot::time).collect()
    }

    pub fn first(&self) -> &CellField {
        &self.snapshots[0].field
    }

    pub fn last(&self) -> &CellField {
        &self.snapshots[self.snapshots.len() - 1].field
    }

    pub fn fields(&self) -> impl Iterator<Item = &CellField> {
        self.snapshots.iter().map(|s| &s.field)
    }

    pub fn steps(&self) -> usize {
        self.meta.dt_history.len()
    }

    /// Largest dt taken.
    pub fn max_dt(&self) -> f64 {
        self.meta.dt_history.iter().copied().fold(0.0, f64::max)
    }

    /// Builds a trajectory from bare fields, e.g. read back from disk.
    /// Ghost values come from `bc`; no source or flux log is attached.
    pub fn from_fields(fields: Vec<CellField>, bc: &BoundarySignals, scheme: Scheme) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::invalid("trajectory needs at least one field"));
        }
        if fields.windows(2).any(|w| !(w[1].time() > w[0].time())) {
            return Err(Error::invalid("snapshot times must be strictly increasing"));
        }
        let dt_history = fields.windows(2).map(|w| w[1].time() - w[0].time()).collect();
        Ok(Self {
            snapshots: fields
                .into_iter()
                .map(|field| {
                    let t = field.time();
                    Snapshot {
                        field,
                        ghosts: (bc.g0(t), bc.g1(t)),
                        source: None,
                        elliptic: None,
                    }
                })
                .collect(),
            boundary_flux_log: vec![],
            meta: SchemeMeta {
                scheme,
                eps: 0.0,
                cfl: 0.0,
                coupling: SourceCoupling::Unsplit,
                dt_history,
            },
            step_resolved: false,
        })
    }
}

/// Evaluates the source for the current state; nonlocal models also hand
/// back the elliptic solve they used.
pub(crate) trait SourceModel {
    fn evaluate(&mut self, state: &CellField) -> Result<(Vec<f64>, Option<EllipticSolution>)>;
}

struct LocalSource<'a>(&'a SourceSpec);

impl SourceModel for LocalSource<'_> {
    fn evaluate(&mut self, state: &CellField) -> Result<(Vec<f64>, Option<EllipticSolution>)> {
        let t = state.time();
        let g = state.grid();
        Ok((
            state
                .values()
                .iter()
                .enumerate()
                .map(|(i, &u)| self.0.eval(t, g.cell_center(i), u))
                .collect(),
            None,
        ))
    }
}

/// Runs the explicit scheme from `u0` to `params.t_end`.
pub fn run_ibvp(
    u0: &CellField,
    bc: &BoundarySignals,
    source: &SourceSpec,
    flux: &FluxSpec,
    params: &IbvpParams,
    output: &OutputSchedule,
) -> Result<Trajectory> {
    integrate(u0, bc, &mut LocalSource(source), flux, params, output)
}

pub(crate) fn integrate(
    u0: &CellField,
    bc: &BoundarySignals,
    model: &mut dyn SourceModel,
    flux: &FluxSpec,
    params: &IbvpParams,
    output: &OutputSchedule,
) -> Result<Trajectory> {
    params.validate()?;
    let t_end = params.t_end;
    let (step_resolved, mut targets) = match output {
        OutputSchedule::EveryStep => (true, vec![]),
        OutputSchedule::Times(ts) | OutputSchedule::Resolved(ts) => {
            let mut ts: Vec<f64> = ts.iter().copied().filter(|&t| t > 0.0 && t < t_end).collect();
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            (matches!(output, OutputSchedule::Resolved(_)), ts)
        }
    };
    targets.push(t_end);

    let dx = u0.grid().dx();
    let mut state = u0.clone().with_time(0.0);
    let mut t = 0.0;
    let mut snapshots = vec![Snapshot {
        field: state.clone(),
        ghosts: (bc.g0(0.0), bc.g1(0.0)),
        source: None,
        elliptic: None,
    }];
    let mut log = Vec::new();
    let mut dt_history = Vec::new();
    let mut next_target = 0;

    while next_target < targets.len() {
        let step = dt_history.len();
        let wrap = |e: Error, time: f64| Error::StepFailed {
            step,
            time,
            source: Box::new(e),
        };
        let ghosts = (bc.g0(t), bc.g1(t));
        let (src, elliptic) = model.evaluate(&state).map_err(|e| wrap(e, t))?;

        let last = snapshots.last_mut().unwrap();
        if last.time() == t {
            last.source.get_or_insert_with(|| src.clone());
            if last.elliptic.is_none() {
                last.elliptic = elliptic;
            }
        }

        let mut dt = match params.fixed_dt {
            Some(dt) => dt,
            None => cfl_dt(&state, flux, params.cfl, params.eps, params.dt_max)?
                .min(params.cfl * monotone_dt_limit(state.values(), ghosts, dx, flux, params.eps)),
        };
        let target = targets[next_target];
        let mut hit = false;
        if t + dt >= target - 1e-12 * target.max(1.0) {
            dt = target - t;
            hit = true;
        }

        let (next, flux_in, flux_out, source_mass) = match params.coupling {
            SourceCoupling::Unsplit => {
                let r = step_with_ghosts(&state, ghosts, Some(&src), dt, flux, params.scheme, params.eps)
                    .map_err(|e| wrap(e, t))?;
                let sm = dt * src.iter().sum::<f64>() * dx;
                (r.field, r.flux_in, r.flux_out, sm)
            }
            SourceCoupling::Strang => {
                let half: Vec<f64> = state
                    .values()
                    .iter()
                    .zip(&src)
                    .map(|(u, s)| u + 0.5 * dt * s)
                    .collect();
                let mid = CellField::new(*state.grid(), t, half).map_err(|e| wrap(e, t))?;
                let r = step_with_ghosts(&mid, ghosts, None, dt, flux, params.scheme, params.eps)
                    .map_err(|e| wrap(e, t))?;
                let (src2, _) = model.evaluate(&r.field).map_err(|e| wrap(e, t + dt))?;
                let end: Vec<f64> = r
                    .field
                    .values()
                    .iter()
                    .zip(&src2)
                    .map(|(u, s)| u + 0.5 * dt * s)
                    .collect();
                let sm = 0.5 * dt * (src.iter().sum::<f64>() + src2.iter().sum::<f64>()) * dx;
                let field = CellField::new(*state.grid(), t + dt, end).map_err(|e| wrap(e, t + dt))?;
                (field, r.flux_in, r.flux_out, sm)
            }
        };

        log.push(BoundaryFluxRecord {
            time: t,
            dt,
            flux_in,
            flux_out,
            source_mass,
        });
        dt_history.push(dt);
        t = if hit { target } else { t + dt };
        state = next.with_time(t);
        if hit {
            next_target += 1;
        }
        if hit || step_resolved {
            snapshots.push(Snapshot {
                field: state.clone(),
                ghosts: (bc.g0(t), bc.g1(t)),
                source: None,
                elliptic: None,
            });
        }
    }

    // attach the closing source / pressure evaluation to the final level
    let (src, elliptic) = model.evaluate(&state)?;
    let last = snapshots.last_mut().unwrap();
    last.source = Some(src);
    last.elliptic = elliptic;

    Ok(Trajectory {
        snapshots,
        boundary_flux_log: log,
        meta: SchemeMeta {
            scheme: params.scheme,
            eps: params.eps,
            cfl: params.cfl,
            coupling: params.coupling,
            dt_history,
        },
        step_resolved,
    })
}
