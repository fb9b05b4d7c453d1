//! Degasperis–Procesi initial-boundary value problem in hyperbolic–elliptic
//! form:
//!
//! ```text
//! ∂t u + ∂x(u²/2) = −∂x P,     −∂xx P + P = (3/2) u²,
//! u(t,0) = g0,  u(t,1) = g1,   ∂x P(t,0) = ψ0,  ∂x P(t,1) = ψ1,
//! ψ0 = −g0' − g0·h0,           ψ1 = −g1' − g1·h1.
//! ```
//!
//! The pressure is recomputed from uⁿ once per step and enters the
//! transport update as a frozen source.

use std::sync::Arc;

use crate::domain::{default_bound, dp_flux_spec, simpson, BoundarySignals, CellField, FluxSpec, Grid1D, SourceSpec};
use crate::elliptic::{green_eval, neumann_lift, EllipticBackend, EllipticSolution, EllipticSolver, GREEN_X_SUP};
use crate::error::{Error, Result};
use crate::hyperbolic::{integrate, IbvpParams, OutputSchedule, Scheme, SourceModel, Trajectory};

/// Neumann data (ψ0, ψ1) of the pressure at time t.
pub fn neumann_data(bc: &BoundarySignals, t: f64) -> (f64, f64) {
    (
        -bc.g0_dot(t) - bc.g0(t) * bc.h0(t),
        -bc.g1_dot(t) - bc.g1(t) * bc.h1(t),
    )
}

/// Pressure source −∂xP for f = (3/2)u², together with the pressure solve.
pub fn dp_source(
    u: &CellField,
    psi0: f64,
    psi1: f64,
    backend: EllipticBackend,
) -> Result<(CellField, EllipticSolution)> {
    dp_source_with(&EllipticSolver::new(*u.grid(), backend), u, psi0, psi1)
}

pub fn dp_source_with(
    solver: &EllipticSolver,
    u: &CellField,
    psi0: f64,
    psi1: f64,
) -> Result<(CellField, EllipticSolution)> {
    let f = pressure_rhs(u)?;
    let sol = solver.solve(&f, psi0, psi1)?;
    let src = sol.px.values().iter().map(|p| -p).collect();
    Ok((CellField::new(*u.grid(), u.time(), src)?, sol))
}

/// (3/2)u².
pub fn pressure_rhs(u: &CellField) -> Result<CellField> {
    CellField::new(
        *u.grid(),
        u.time(),
        u.values().iter().map(|v| 1.5 * v * v).collect(),
    )
}

#[derive(Clone, Debug)]
pub struct DpConfig {
    pub u0: CellField,
    pub bc: BoundarySignals,
    pub t_end: f64,
    pub scheme: Scheme,
    pub eps: f64,
    pub cfl: f64,
    pub dt_max: f64,
    pub backend: EllipticBackend,
    /// Extra forcing added to −∂xP (manufactured solutions).
    pub forcing: Option<SourceSpec>,
    pub fixed_dt: Option<f64>,
}

impl DpConfig {
    pub fn new(u0: CellField, bc: BoundarySignals, t_end: f64) -> Self {
        Self {
            u0,
            bc,
            t_end,
            scheme: Scheme::Godunov,
            eps: 0.0,
            cfl: 0.5,
            dt_max: 0.1,
            backend: EllipticBackend::Green,
            forcing: None,
            fixed_dt: None,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        self.u0.grid()
    }

    /// u0 must match g0(0), g1(0) to within one cell-to-cell jump of the
    /// initial data.
    pub fn validate(&self) -> Result<()> {
        let u = self.u0.values();
        let n = u.len();
        if n < 4 {
            return Err(Error::invalid("DP runs need at least 4 cells"));
        }
        let check = |side: &str, edge: f64, next: f64, g: f64| -> Result<()> {
            let slack = (next - edge).abs() + 1e-9 * (1.0 + g.abs());
            if (edge - g).abs() > slack {
                return Err(Error::Incompatible(format!(
                    "{side} boundary: u0 = {edge} but g(0) = {g}"
                )));
            }
            Ok(())
        };
        check("left", u[0], u[1], self.bc.g0(0.0))?;
        check("right", u[n - 1], u[n - 2], self.bc.g1(0.0))
    }

    /// Heuristic a priori bound ‖u0‖ + ‖g‖ + C·T + 1 with C the Green
    /// bound on ‖∂xP‖ for the initial mass of (3/2)u².
    pub fn flux(&self) -> Result<FluxSpec> {
        let steps = 64;
        let times: Vec<f64> = (0..=steps).map(|j| self.t_end * j as f64 / steps as f64).collect();
        let g_sup = self.bc.sup_over(&times);
        let m = self.u0.sup_norm() + g_sup;
        let psi_sup = times
            .iter()
            .map(|&t| {
                let (a, b) = neumann_data(&self.bc, t);
                a.abs().max(b.abs())
            })
            .fold(0.0, f64::max);
        let c = GREEN_X_SUP * 1.5 * m * m + 3.0 * psi_sup;
        let forcing = self.forcing.as_ref().map_or(0.0, |f| f.sup_bound());
        dp_flux_spec(default_bound(self.u0.sup_norm(), g_sup, c + forcing, self.t_end))
    }
}

struct DpSource<'a> {
    solver: EllipticSolver,
    bc: &'a BoundarySignals,
    forcing: Option<&'a SourceSpec>,
}

impl SourceModel for DpSource<'_> {
    fn evaluate(&mut self, state: &CellField) -> Result<(Vec<f64>, Option<EllipticSolution>)> {
        let t = state.time();
        let (psi0, psi1) = neumann_data(self.bc, t);
        let (src, sol) = dp_source_with(&self.solver, state, psi0, psi1)?;
        let mut src = src.into_values();
        if let Some(f) = self.forcing {
            let g = state.grid();
            for (i, (s, &u)) in src.iter_mut().zip(state.values()).enumerate() {
                *s += f.eval(t, g.cell_center(i), u);
            }
        }
        Ok((src, Some(sol)))
    }
}

/// Integrates the coupled system; every snapshot carries its pressure solve.
pub fn dp_run(config: &DpConfig, output: &OutputSchedule) -> Result<Trajectory> {
    config.validate()?;
    let flux = config.flux()?;
    let params = IbvpParams {
        t_end: config.t_end,
        scheme: config.scheme,
        eps: config.eps,
        cfl: config.cfl,
        dt_max: config.dt_max,
        coupling: Default::default(),
        fixed_dt: config.fixed_dt,
    };
    let mut model = DpSource {
        solver: EllipticSolver::new(*config.grid(), config.backend),
        bc: &config.bc,
        forcing: config.forcing.as_ref(),
    };
    let mut traj = integrate(&config.u0, &config.bc, &mut model, &flux, &params, output)?;
    // snapshots that were not step starts (output-only levels) still get
    // their pressure
    for snap in traj.snapshots.iter_mut().filter(|s| s.elliptic.is_none()) {
        let (psi0, psi1) = neumann_data(&config.bc, snap.time());
        let (src, sol) = dp_source_with(&model.solver, &snap.field, psi0, psi1)?;
        snap.elliptic = Some(sol);
        if snap.source.is_none() {
            snap.source = Some(src.into_values());
        }
    }
    Ok(traj)
}

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Smooth target u*(t, x) with its first derivatives.
#[derive(Clone)]
pub struct ManufacturedSolution {
    pub u: SpaceTimeFn,
    pub u_t: SpaceTimeFn,
    pub u_x: SpaceTimeFn,
}

impl ManufacturedSolution {
    /// Boundary signals read off u*: g = u*(t, edge), h = ∂x u*(t, edge).
    pub fn boundary_signals(&self) -> BoundarySignals {
        let (u, ut, ux) = (self.u.clone(), self.u_t.clone(), self.u_x.clone());
        let (u1, ut1, ux1) = (self.u.clone(), self.u_t.clone(), self.u_x.clone());
        BoundarySignals::from_fns(
            Arc::new(move |t| u(t, 0.0)),
            Arc::new(move |t| ut(t, 0.0)),
            Arc::new(move |t| u1(t, 1.0)),
            Arc::new(move |t| ut1(t, 1.0)),
        )
        .with_slopes(Arc::new(move |t| ux(t, 0.0)), Arc::new(move |t| ux1(t, 1.0)))
    }
}

/// ∂xP(x) for −P'' + P = (3/2)v², P'(0) = ψ0, P'(1) = ψ1, by Simpson
/// quadrature of the Green representation split at y = x.
pub fn pressure_gradient_at(v: &dyn Fn(f64) -> f64, psi0: f64, psi1: f64, x: f64) -> f64 {
    const PANELS: usize = 64;
    let rhs = |y: f64| 1.5 * v(y) * v(y) + (psi1 - psi0) - neumann_lift(y, psi0, psi1).0;
    let s1 = 1f64.sinh();
    // below the diagonal ∂xG = −cosh(y) sinh(1−x)/sinh 1, above sinh(x) cosh(1−y)/sinh 1
    let lower = simpson(|y| y.cosh() * rhs(y), 0.0, x, PANELS) * (-(1.0 - x).sinh() / s1);
    let upper = simpson(|y| (1.0 - y).cosh() * rhs(y), x, 1.0, PANELS) * (x.sinh() / s1);
    lower + upper + neumann_lift(x, psi0, psi1).1
}

/// Forcing S_m = ∂t u* + u* ∂x u* + ∂xP^{u*} that makes u* an exact
/// solution of the forced system with boundary data `bc_star`.
pub fn manufactured_forcing(ms: &ManufacturedSolution, bc_star: &BoundarySignals) -> Result<SourceSpec> {
    for j in 0..=20 {
        let t = j as f64 / 20.0;
        for (side, x, g) in [("left", 0.0, bc_star.g0(t)), ("right", 1.0, bc_star.g1(t))] {
            let u = (ms.u)(t, x);
            if (u - g).abs() > 1e-9 * (1.0 + u.abs()) {
                return Err(Error::Incompatible(format!(
                    "{side} boundary datum {g} differs from u*({t}, {x}) = {u}"
                )));
            }
        }
    }
    let bc = bc_star.clone();
    let m = ms.clone();
    let s = move |t: f64, x: f64| -> f64 {
        let (psi0, psi1) = neumann_data(&bc, t);
        let u = (m.u)(t, x);
        let px = pressure_gradient_at(&|y| (m.u)(t, y), psi0, psi1, x);
        (m.u_t)(t, x) + u * (m.u_x)(t, x) + px
    };
    let mut sup: f64 = 0.0;
    for a in 0..=8 {
        for b in 0..=8 {
            sup = sup.max(s(a as f64 / 8.0, b as f64 / 8.0).abs());
        }
    }
    Ok(SourceSpec::new(Arc::new(move |t, x, _| s(t, x)), 0.0, sup))
}

/// Pressure gradient of u* at one point through the pointwise Green
/// kernel; used to cross-check [`pressure_gradient_at`].
pub fn pressure_gradient_dense(v: &dyn Fn(f64) -> f64, psi0: f64, psi1: f64, x: f64, m: usize) -> f64 {
    let h = 1.0 / m as f64;
    let mut acc = 0.0;
    for j in 0..m {
        let y = (j as f64 + 0.5) * h;
        let (_, gx) = green_eval(x, y).expect("unit interval");
        let r = 1.5 * v(y) * v(y) + (psi1 - psi0) - neumann_lift(y, psi0, psi1).0;
        acc += gx * r * h;
    }
    acc + neumann_lift(x, psi0, psi1).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn neumann_data_examples() {
        let bc = BoundarySignals::from_fns(
            Arc::new(|t| t),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
        )
        .with_slopes(Arc::new(|_| 2.0), Arc::new(|_| 0.0));
        for t in [0.0, 0.3, 1.0] {
            let (p0, p1) = neumann_data(&bc, t);
            assert!((p0 - (-1.0 - 2.0 * t)).abs() < 1e-15);
            assert_eq!(p1, 0.0);
        }
        let zero = BoundarySignals::constant(0.0, 0.0);
        assert_eq!(neumann_data(&zero, 0.5), (0.0, 0.0));
        let c = BoundarySignals::constant(1.3, -0.2);
        assert_eq!(neumann_data(&c, 0.5), (0.0, 0.0));
    }

    #[test]
    fn constant_state_has_flat_pressure() {
        let g = Grid1D::new(40).unwrap();
        let c = 0.8;
        let u = CellField::constant(g, 0.0, c).unwrap();
        let (src, sol) = dp_source(&u, 0.0, 0.0, EllipticBackend::Fd).unwrap();
        assert!(src.sup_norm() < 1e-12);
        for &p in sol.p.values() {
            assert!((p - 1.5 * c * c).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_wave_pressure_gradient() {
        // f = (3/4)(1 + cos 2πx) ⇒ P = 3/4 + (3/4)cos(2πx)/(1 + 4π²)
        let exact = |x: f64| 0.75 * 2.0 * PI * (2.0 * PI * x).sin() / (1.0 + 4.0 * PI * PI);
        for backend in [EllipticBackend::Green, EllipticBackend::Fd] {
            let mut prev = None;
            for n in [50, 100, 200] {
                let g = Grid1D::new(n).unwrap();
                let u = CellField::from_fn(g, 0.0, |x| (PI * x).cos()).unwrap();
                let (src, _) = dp_source(&u, 0.0, 0.0, backend).unwrap();
                let err = src
                    .values()
                    .iter()
                    .zip(g.centers())
                    .map(|(s, x)| (s - exact(x)).abs())
                    .fold(0.0, f64::max);
                let dx = g.dx();
                assert!(err <= 2.0 * dx * dx, "{backend:?} n={n}: {err}");
                if let Some(p) = prev {
                    let ratio: f64 = p / err;
                    assert!(ratio > 3.0, "{backend:?} ratio {ratio}");
                }
                prev = Some(err);
            }
        }
    }

    #[test]
    fn backends_agree_on_rough_data() {
        let g = Grid1D::new(128).unwrap();
        // deterministic pseudo-random smooth-ish profile
        let u = CellField::from_fn(g, 0.0, |x| (7.0 * x).sin() + 0.3 * (23.0 * x).cos() + 0.5).unwrap();
        let (a, _) = dp_source(&u, 0.2, -0.1, EllipticBackend::Green).unwrap();
        let (b, _) = dp_source(&u, 0.2, -0.1, EllipticBackend::Fd).unwrap();
        let d = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(d < 50.0 * g.dx() * g.dx(), "{d}");
    }

    #[test]
    fn pressure_gradient_closed_form_for_linear_state() {
        // u* = x, ψ0 = 0, ψ1 = −1: P = 1.5x² + 3 − 4 cosh(x)/sinh(1)
        let exact = |x: f64| 3.0 * x - 4.0 * x.sinh() / 1f64.sinh();
        for x in [0.0, 0.2, 0.5, 0.77, 1.0] {
            let a = pressure_gradient_at(&|y| y, 0.0, -1.0, x);
            assert!((a - exact(x)).abs() < 1e-9, "x = {x}: {a} vs {}", exact(x));
            let b = pressure_gradient_dense(&|y| y, 0.0, -1.0, x, 4000);
            assert!((b - exact(x)).abs() < 1e-3);
        }
    }

    #[test]
    fn manufactured_forcing_examples() {
        let c = 0.4;
        let constant = ManufacturedSolution {
            u: Arc::new(move |_, _| c),
            u_t: Arc::new(|_, _| 0.0),
            u_x: Arc::new(|_, _| 0.0),
        };
        let bc = constant.boundary_signals();
        let s = manufactured_forcing(&constant, &bc).unwrap();
        for (t, x) in [(0.0, 0.1), (0.5, 0.5), (1.0, 0.9)] {
            assert!(s.eval(t, x, 123.0).abs() < 1e-8);
        }

        let linear = ManufacturedSolution {
            u: Arc::new(|_, x| x),
            u_t: Arc::new(|_, _| 0.0),
            u_x: Arc::new(|_, _| 1.0),
        };
        let bc = linear.boundary_signals();
        assert_eq!(neumann_data(&bc, 0.3), (0.0, -1.0));
        let s = manufactured_forcing(&linear, &bc).unwrap();
        let g = Grid1D::new(400).unwrap();
        let f = CellField::from_fn(g, 0.0, |x| 1.5 * x * x).unwrap();
        let oracle = crate::elliptic::solve_neumann_fd(&f, 0.0, -1.0).unwrap();
        for (i, x) in g.centers().enumerate().step_by(37) {
            let expected = x + oracle.px.values()[i];
            assert!((s.eval(0.0, x, 0.0) - expected).abs() < 1e-4);
        }

        let wrong = BoundarySignals::constant(1.0, 1.0);
        assert!(manufactured_forcing(&linear, &wrong).is_err());
    }

    #[test]
    fn constant_state_is_steady() {
        let g = Grid1D::new(32).unwrap();
        let u0 = CellField::constant(g, 0.0, 0.6).unwrap();
        let cfg = DpConfig::new(u0.clone(), BoundarySignals::constant(0.6, 0.6), 0.5);
        let traj = dp_run(&cfg, &OutputSchedule::uniform(0.5, 5)).unwrap();
        for f in traj.fields() {
            for &v in f.values() {
                assert!((v - 0.6).abs() < 1e-13);
            }
        }
        assert!(traj.snapshots.iter().all(|s| s.elliptic.is_some()));
    }

    #[test]
    fn incompatible_data_rejected() {
        let g = Grid1D::new(32).unwrap();
        let u0 = CellField::constant(g, 0.0, 0.6).unwrap();
        let cfg = DpConfig::new(u0, BoundarySignals::constant(0.0, 0.6), 0.5);
        assert!(matches!(cfg.validate(), Err(Error::Incompatible(_))));
    }
}
