//! Named test problems.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::domain::{default_bound, BoundarySignals, CellField, FluxSpec, Grid1D, SourceSpec};
use crate::dp::{manufactured_forcing, DpConfig, ManufacturedSolution, SpaceTimeFn};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Scalar law with a local source.
    Scalar,
    /// DP system.
    Dp,
    /// Stationary Neumann problem only.
    Elliptic,
}

#[derive(Clone, Copy, Debug)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub kind: ScenarioKind,
    pub default_t: f64,
    pub summary: &'static str,
}

pub const SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "burgers_stationary_shock",
        kind: ScenarioKind::Scalar,
        default_t: 0.5,
        summary: "Burgers, u0 = 1 | −1 at x = 1/2, g = (1, −1)",
    },
    ScenarioInfo {
        name: "burgers_rarefaction",
        kind: ScenarioKind::Scalar,
        default_t: 0.2,
        summary: "Burgers, u0 = −1 | 1 at x = 1/2, centered fan",
    },
    ScenarioInfo {
        name: "burgers_outflow",
        kind: ScenarioKind::Scalar,
        default_t: 0.5,
        summary: "Burgers, u0 ≡ 1, g0 = 1, g1 = 0 (datum not attained at x = 1)",
    },
    ScenarioInfo {
        name: "linear_advection_inflow",
        kind: ScenarioKind::Scalar,
        default_t: 0.5,
        summary: "A(u) = u, u0 ≡ 0, inflow g0 = 1",
    },
    ScenarioInfo {
        name: "dp_constant",
        kind: ScenarioKind::Dp,
        default_t: 0.5,
        summary: "DP, u ≡ g ≡ 1/2",
    },
    ScenarioInfo {
        name: "dp_peakon",
        kind: ScenarioKind::Dp,
        default_t: 0.2,
        summary: "DP, u0 = exp(−|x − 1/2|/0.1), constant boundary values",
    },
    ScenarioInfo {
        name: "dp_manufactured",
        kind: ScenarioKind::Dp,
        default_t: 0.5,
        summary: "DP forced so that u* = 1/2 + x/2 + t/4 is exact",
    },
    ScenarioInfo {
        name: "dp_boundary_driven",
        kind: ScenarioKind::Dp,
        default_t: 1.0,
        summary: "DP, u0 ≡ 0, g0 = sin²(πt)/2, g1 = 0",
    },
    ScenarioInfo {
        name: "elliptic_cosine",
        kind: ScenarioKind::Elliptic,
        default_t: 0.0,
        summary: "−P″ + P = cos(πx), P′ = 0 at both ends",
    },
];

pub fn scenario_names() -> String {
    SCENARIOS.iter().map(|s| s.name).collect::<Vec<_>>().join(", ")
}

pub fn lookup(name: &str) -> Result<&'static ScenarioInfo> {
    SCENARIOS.iter().find(|s| s.name == name).ok_or_else(|| {
        Error::invalid(format!("unknown scenario `{name}` (valid: {})", scenario_names()))
    })
}

/// Time-dependent scenarios (everything but the elliptic case).
pub fn evolution_scenarios() -> impl Iterator<Item = &'static ScenarioInfo> {
    SCENARIOS.iter().filter(|s| s.kind != ScenarioKind::Elliptic)
}

/// Everything a run needs, built for a grid and final time.
#[derive(Clone)]
pub struct ScenarioSetup {
    pub info: &'static ScenarioInfo,
    pub u0: CellField,
    pub bc: BoundarySignals,
    /// Local source for scalar runs, extra forcing for DP runs.
    pub source: SourceSpec,
    pub flux: FluxSpec,
    /// Exact solution u(t, x), when known.
    pub exact: Option<SpaceTimeFn>,
    /// Right side f for the elliptic scenario.
    pub elliptic_rhs: Option<CellField>,
}

impl ScenarioSetup {
    pub fn is_dp(&self) -> bool {
        self.info.kind == ScenarioKind::Dp
    }

    pub fn dp_config(&self, t_end: f64) -> DpConfig {
        let mut cfg = DpConfig::new(self.u0.clone(), self.bc.clone(), t_end);
        if !self.source.is_zero() {
            cfg.forcing = Some(self.source.clone());
        }
        cfg
    }

    /// Exact field at time t sampled at cell centers.
    pub fn exact_field(&self, t: f64) -> Option<CellField> {
        let u = self.exact.as_ref()?;
        CellField::from_fn(*self.u0.grid(), t, |x| u(t, x)).ok()
    }
}

fn scalar_flux(u0: &CellField, bc: &BoundarySignals, src: &SourceSpec, t_end: f64, linear: bool) -> Result<FluxSpec> {
    let times: Vec<f64> = (0..=32).map(|j| t_end * j as f64 / 32.0).collect();
    let l = default_bound(u0.sup_norm(), bc.sup_over(&times), src.sup_bound(), t_end);
    if linear {
        FluxSpec::linear(1.0, l)
    } else {
        FluxSpec::burgers(l)
    }
}

pub fn manufactured_target() -> ManufacturedSolution {
    ManufacturedSolution {
        u: Arc::new(|t, x| 0.5 + 0.5 * x + 0.25 * t),
        u_t: Arc::new(|_, _| 0.25),
        u_x: Arc::new(|_, _| 0.5),
    }
}

pub fn peakon_profile(x: f64) -> f64 {
    (-(x - 0.5).abs() / 0.1).exp()
}

/// Builds `name` on `grid` for a run to `t_end`.
pub fn build(name: &str, grid: Grid1D, t_end: f64) -> Result<ScenarioSetup> {
    let info = lookup(name)?;
    let zero = SourceSpec::zero();
    let step = |l: f64, r: f64| move |x: f64| if x < 0.5 { l } else { r };
    let setup = match name {
        "burgers_stationary_shock" => {
            let u0 = CellField::from_fn(grid, 0.0, step(1.0, -1.0))?;
            let bc = BoundarySignals::constant(1.0, -1.0);
            let flux = scalar_flux(&u0, &bc, &zero, t_end, false)?;
            let exact: SpaceTimeFn = Arc::new(move |_, x| step(1.0, -1.0)(x));
            (u0, bc, zero, flux, Some(exact))
        }
        "burgers_rarefaction" => {
            let u0 = CellField::from_fn(grid, 0.0, step(-1.0, 1.0))?;
            let bc = BoundarySignals::constant(-1.0, 1.0);
            let flux = scalar_flux(&u0, &bc, &zero, t_end, false)?;
            let exact: SpaceTimeFn = Arc::new(|t, x| {
                if t <= 0.0 {
                    return if x < 0.5 { -1.0 } else { 1.0 };
                }
                ((x - 0.5) / t).clamp(-1.0, 1.0)
            });
            (u0, bc, zero, flux, Some(exact))
        }
        "burgers_outflow" => {
            let u0 = CellField::constant(grid, 0.0, 1.0)?;
            let bc = BoundarySignals::constant(1.0, 0.0);
            let flux = scalar_flux(&u0, &bc, &zero, t_end, false)?;
            let exact: SpaceTimeFn = Arc::new(|_, _| 1.0);
            (u0, bc, zero, flux, Some(exact))
        }
        "linear_advection_inflow" => {
            let u0 = CellField::constant(grid, 0.0, 0.0)?;
            let bc = BoundarySignals::constant(1.0, 0.0);
            let flux = scalar_flux(&u0, &bc, &zero, t_end, true)?;
            let exact: SpaceTimeFn = Arc::new(|t, x| if x < t { 1.0 } else { 0.0 });
            (u0, bc, zero, flux, Some(exact))
        }
        "dp_constant" => {
            let u0 = CellField::constant(grid, 0.0, 0.5)?;
            let bc = BoundarySignals::constant(0.5, 0.5);
            let exact: SpaceTimeFn = Arc::new(|_, _| 0.5);
            (u0, bc, zero, FluxSpec::burgers(1.0)?, Some(exact))
        }
        "dp_peakon" => {
            let u0 = CellField::from_fn(grid, 0.0, peakon_profile)?;
            let bc = BoundarySignals::constant(peakon_profile(0.0), peakon_profile(1.0));
            (u0, bc, zero, FluxSpec::burgers(1.0)?, None)
        }
        "dp_manufactured" => {
            let ms = manufactured_target();
            let bc = ms.boundary_signals();
            let forcing = manufactured_forcing(&ms, &bc)?;
            let u = ms.u.clone();
            let u0 = CellField::from_fn(grid, 0.0, |x| u(0.0, x))?;
            (u0, bc, forcing, FluxSpec::burgers(1.0)?, Some(ms.u))
        }
        "dp_boundary_driven" => {
            let u0 = CellField::constant(grid, 0.0, 0.0)?;
            let bc = BoundarySignals::from_fns(
                Arc::new(|t| 0.5 * (PI * t).sin().powi(2)),
                Arc::new(|t| 0.5 * PI * (2.0 * PI * t).sin()),
                Arc::new(|_| 0.0),
                Arc::new(|_| 0.0),
            );
            (u0, bc, zero, FluxSpec::burgers(1.0)?, None)
        }
        "elliptic_cosine" => {
            let f = CellField::from_fn(grid, 0.0, |x| (PI * x).cos())?;
            let exact: SpaceTimeFn = Arc::new(|_, x| (PI * x).cos() / (1.0 + PI * PI));
            let zero_u = CellField::constant(grid, 0.0, 0.0)?;
            return Ok(ScenarioSetup {
                info,
                u0: zero_u,
                bc: BoundarySignals::constant(0.0, 0.0),
                source: zero,
                flux: FluxSpec::burgers(1.0)?,
                exact: Some(exact),
                elliptic_rhs: Some(f),
            });
        }
        _ => unreachable!("registry and builder disagree on {name}"),
    };
    let (u0, bc, source, mut flux, exact) = setup;
    let mut s = ScenarioSetup {
        info,
        u0,
        bc,
        source,
        flux: flux.clone(),
        exact,
        elliptic_rhs: None,
    };
    if s.is_dp() {
        flux = s.dp_config(t_end).flux()?;
        s.flux = flux;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_registered_scenario_builds() {
        let g = Grid1D::new(64).unwrap();
        for s in SCENARIOS {
            let setup = build(s.name, g, s.default_t.max(0.1)).unwrap();
            assert_eq!(setup.info.name, s.name);
            if setup.is_dp() {
                setup.dp_config(0.1).validate().unwrap();
            }
        }
        assert!(build("weno", g, 1.0).is_err());
    }

    #[test]
    fn rarefaction_fan_is_continuous_inside() {
        let g = Grid1D::new(64).unwrap();
        let s = build("burgers_rarefaction", g, 0.2).unwrap();
        let u = s.exact.unwrap();
        assert_eq!(u(0.2, 0.5), 0.0);
        assert!((u(0.2, 0.6) - 0.5).abs() < 1e-15);
        assert_eq!(u(0.2, 0.9), 1.0);
        assert_eq!(u(0.2, 0.1), -1.0);
    }

    #[test]
    fn manufactured_data_match_target() {
        let g = Grid1D::new(64).unwrap();
        let s = build("dp_manufactured", g, 0.5).unwrap();
        assert!((s.bc.g0(0.4) - 0.6).abs() < 1e-15);
        assert!((s.bc.g1(0.4) - 1.1).abs() < 1e-15);
        assert_eq!(s.bc.h0(0.3), 0.5);
        assert!(!s.source.is_zero());
    }

    #[test]
    fn scalar_bounds_cover_data() {
        let g = Grid1D::new(64).unwrap();
        let s = build("burgers_stationary_shock", g, 0.5).unwrap();
        assert!(s.flux.bound() >= 2.0);
    }
}
