//! Grids, cell fields, flux and entropy specifications, boundary signals,
//! source terms and the kinetic χ-function.
//!
//! Everything here is an immutable value; closures are stored behind
//! `Arc<dyn Fn + Send + Sync>` so specifications can be cloned freely and
//! shared across threads.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SourceFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Sign with the convention `sgn(0) = 0`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Uniform partition of (0, 1) into `n_cells` cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    n_cells: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::invalid("grid needs at least one cell"));
        }
        Ok(Self {
            n_cells,
            dx: 1.0 / n_cells as f64,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(move |i| self.cell_center(i))
    }
}

/// Piecewise-constant cell values on a [`Grid1D`] at one time instant.
#[derive(Clone, Debug, PartialEq)]
pub struct CellField {
    grid: Grid1D,
    time: f64,
    values: Vec<f64>,
}

impl CellField {
    pub fn new(grid: Grid1D, time: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} cells",
                values.len(),
                grid.n_cells()
            )));
        }
        if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { cell });
        }
        Ok(Self { grid, time, values })
    }

    /// Samples `f` at the cell centers.
    pub fn from_fn(grid: Grid1D, time: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, time, grid.centers().map(f).collect())
    }

    pub fn constant(grid: Grid1D, time: f64, c: f64) -> Result<Self> {
        Self::new(grid, time, vec![c; grid.n_cells()])
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// ∫ u dx.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.dx()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.dx()).sqrt()
    }

    pub fn l1_distance(&self, other: &CellField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.dx())
    }

    pub fn check_same_grid(&self, other: &CellField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{} vs {} cells",
                self.grid.n_cells(),
                other.grid.n_cells()
            )));
        }
        Ok(())
    }
}

/// Flux function A with its derivative and an a priori solution bound L.
///
/// `sonic_points` lists every zero of A' (the extrema of A). Godunov and
/// Engquist–Osher fluxes are exact whenever this list is complete.
#[derive(Clone)]
pub struct FluxSpec {
    name: String,
    a: ScalarFn,
    a_prime: ScalarFn,
    bound: f64,
    sonic_points: Vec<f64>,
}

impl fmt::Debug for FluxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FluxSpec")
            .field("name", &self.name)
            .field("bound", &self.bound)
            .field("sonic_points", &self.sonic_points)
            .finish()
    }
}

impl FluxSpec {
    pub fn new(
        name: impl Into<String>,
        a: ScalarFn,
        a_prime: ScalarFn,
        bound: f64,
        mut sonic_points: Vec<f64>,
    ) -> Result<Self> {
        if !(bound > 0.0) || !bound.is_finite() {
            return Err(Error::invalid(format!("flux bound L must be positive, got {bound}")));
        }
        sonic_points.sort_by(f64::total_cmp);
        Ok(Self {
            name: name.into(),
            a,
            a_prime,
            bound,
            sonic_points,
        })
    }

    /// Burgers flux A(u) = u²/2.
    pub fn burgers(bound: f64) -> Result<Self> {
        Self::new(
            "burgers",
            Arc::new(|u| 0.5 * u * u),
            Arc::new(|u| u),
            bound,
            vec![0.0],
        )
    }

    /// Linear transport A(u) = c·u.
    pub fn linear(speed: f64, bound: f64) -> Result<Self> {
        Self::new(
            "linear",
            Arc::new(move |u| speed * u),
            Arc::new(move |_| speed),
            bound,
            vec![],
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn a(&self, u: f64) -> f64 {
        (self.a)(u)
    }

    #[inline]
    pub fn a_prime(&self, u: f64) -> f64 {
        (self.a_prime)(u)
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn sonic_points(&self) -> &[f64] {
        &self.sonic_points
    }

    pub fn with_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound > 0.0) || !bound.is_finite() {
            return Err(Error::invalid(format!("flux bound L must be positive, got {bound}")));
        }
        self.bound = bound;
        Ok(self)
    }

    /// max |A'| over [lo, hi].
    pub fn max_speed(&self, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        // endpoints cover convex and concave fluxes; the interior samples
        // catch an inflection inside the range
        const SAMPLES: usize = 16;
        let mut m = self.a_prime(lo).abs().max(self.a_prime(hi).abs());
        if hi > lo {
            for j in 1..SAMPLES {
                let u = lo + (hi - lo) * j as f64 / SAMPLES as f64;
                m = m.max(self.a_prime(u).abs());
            }
        }
        m
    }

    /// min of A over the closed interval between `a` and `b`.
    pub fn min_over(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        self.sonic_points
            .iter()
            .filter(|&&s| s > lo && s < hi)
            .map(|&s| self.a(s))
            .fold(self.a(lo).min(self.a(hi)), f64::min)
    }

    /// max of A over the closed interval between `a` and `b`.
    pub fn max_over(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        self.sonic_points
            .iter()
            .filter(|&&s| s > lo && s < hi)
            .map(|&s| self.a(s))
            .fold(self.a(lo).max(self.a(hi)), f64::max)
    }

    /// ∫ₐᵇ |A'(s)| ds, exact when the sonic points are complete.
    pub fn total_variation(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let mut prev = lo;
        let mut tv = 0.0;
        for &s in self.sonic_points.iter().filter(|&&s| s > lo && s < hi) {
            tv += (self.a(s) - self.a(prev)).abs();
            prev = s;
        }
        tv + (self.a(hi) - self.a(prev)).abs()
    }

    /// Largest deviation between a forward difference quotient of A and A'
    /// on `samples` points of [-L, L].
    pub fn derivative_defect(&self, h: f64, samples: usize) -> f64 {
        let l = self.bound;
        (0..=samples)
            .map(|j| -l + 2.0 * l * j as f64 / samples as f64)
            .map(|u| ((self.a(u + h) - self.a(u)) / h - self.a_prime(u)).abs())
            .fold(0.0, f64::max)
    }
}

/// The Degasperis–Procesi transport flux A(u) = u²/2.
pub fn dp_flux_spec(bound: f64) -> Result<FluxSpec> {
    FluxSpec::burgers(bound)
}

/// Convex entropy η with derivative η' and flux q, q' = A'η'.
#[derive(Clone)]
pub struct EntropyPair {
    name: String,
    eta: ScalarFn,
    eta_prime: ScalarFn,
    q: ScalarFn,
}

impl fmt::Debug for EntropyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EntropyPair").field("name", &self.name).finish()
    }
}

impl EntropyPair {
    pub fn new(name: impl Into<String>, eta: ScalarFn, eta_prime: ScalarFn, q: ScalarFn) -> Self {
        Self {
            name: name.into(),
            eta,
            eta_prime,
            q,
        }
    }

    /// Builds q(u) = ∫₀ᵘ A'(ξ) η'(ξ) dξ by composite Simpson quadrature.
    pub fn from_convex(
        name: impl Into<String>,
        eta: ScalarFn,
        eta_prime: ScalarFn,
        flux: &FluxSpec,
    ) -> Self {
        let a_prime = flux.a_prime.clone();
        let ep = eta_prime.clone();
        let q: ScalarFn = Arc::new(move |u| simpson(|s| a_prime(s) * ep(s), 0.0, u, 512));
        Self::new(name, eta, eta_prime, q)
    }

    /// η(u) = u² with its flux.
    pub fn quadratic(flux: &FluxSpec) -> Self {
        Self::from_convex("quadratic", Arc::new(|u| u * u), Arc::new(|u| 2.0 * u), flux)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eta(&self, u: f64) -> f64 {
        (self.eta)(u)
    }

    #[inline]
    pub fn eta_prime(&self, u: f64) -> f64 {
        (self.eta_prime)(u)
    }

    #[inline]
    pub fn q(&self, u: f64) -> f64 {
        (self.q)(u)
    }
}

/// Kruzkov pair η(u) = |u−k|, q(u) = sgn(u−k)(A(u) − A(k)).
pub fn kruzkov_pair(k: f64, flux: &FluxSpec) -> Result<EntropyPair> {
    if !(k.abs() <= flux.bound()) {
        return Err(Error::invalid(format!(
            "Kruzkov level k = {k} outside [-L, L] with L = {}",
            flux.bound()
        )));
    }
    let a = flux.a.clone();
    let ak = flux.a(k);
    Ok(EntropyPair::new(
        format!("kruzkov(k={k})"),
        Arc::new(move |u| (u - k).abs()),
        Arc::new(move |u| sgn(u - k)),
        Arc::new(move |u| sgn(u - k) * (a(u) - ak)),
    ))
}

/// `count` Kruzkov levels spread uniformly over [-bound, bound].
pub fn kruzkov_levels(bound: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..count)
            .map(|j| -bound + 2.0 * bound * j as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Kinetic χ-function: 1 on {0 ≤ ξ ≤ v}, −1 on {v ≤ ξ ≤ 0} when v < 0.
#[inline]
pub fn chi(v: f64, xi: f64) -> f64 {
    if 0.0 <= xi && xi <= v {
        1.0
    } else if v <= xi && xi <= 0.0 && v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Dirichlet data g0, g1 with time derivatives, and the derivative data
/// h0, h1 that enter the Neumann data of the Degasperis–Procesi pressure.
#[derive(Clone)]
pub struct BoundarySignals {
    g0: ScalarFn,
    g1: ScalarFn,
    g0_dot: ScalarFn,
    g1_dot: ScalarFn,
    h0: ScalarFn,
    h1: ScalarFn,
}

impl fmt::Debug for BoundarySignals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundarySignals")
            .field("g0(0)", &self.g0(0.0))
            .field("g1(0)", &self.g1(0.0))
            .finish()
    }
}

impl BoundarySignals {
    pub fn constant(g0: f64, g1: f64) -> Self {
        Self {
            g0: Arc::new(move |_| g0),
            g1: Arc::new(move |_| g1),
            g0_dot: Arc::new(|_| 0.0),
            g1_dot: Arc::new(|_| 0.0),
            h0: Arc::new(|_| 0.0),
            h1: Arc::new(|_| 0.0),
        }
    }

    /// Time-dependent Dirichlet data with known derivatives; h0 = h1 = 0.
    pub fn from_fns(g0: ScalarFn, g0_dot: ScalarFn, g1: ScalarFn, g1_dot: ScalarFn) -> Self {
        Self {
            g0,
            g1,
            g0_dot,
            g1_dot,
            h0: Arc::new(|_| 0.0),
            h1: Arc::new(|_| 0.0),
        }
    }

    pub fn with_slopes(mut self, h0: ScalarFn, h1: ScalarFn) -> Self {
        self.h0 = h0;
        self.h1 = h1;
        self
    }

    /// Piecewise-linear data from samples; derivatives by centered
    /// differences on the sample grid (one-sided at the ends).
    pub fn from_samples(
        times: Vec<f64>,
        g0: Vec<f64>,
        g1: Vec<f64>,
        h0: Vec<f64>,
        h1: Vec<f64>,
    ) -> Result<Self> {
        let n = times.len();
        if n < 2 || [g0.len(), g1.len(), h0.len(), h1.len()].iter().any(|&m| m != n) {
            return Err(Error::invalid("boundary samples need ≥ 2 equally sized series"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("sample times must be strictly increasing"));
        }
        let times = Arc::new(times);
        let g0d = centered_differences(&times, &g0);
        let g1d = centered_differences(&times, &g1);
        let interp = |vals: Vec<f64>| -> ScalarFn {
            let t = times.clone();
            Arc::new(move |s| interpolate(&t, &vals, s))
        };
        Ok(Self {
            g0: interp(g0),
            g1: interp(g1),
            g0_dot: interp(g0d),
            g1_dot: interp(g1d),
            h0: interp(h0),
            h1: interp(h1),
        })
    }

    pub fn g0(&self, t: f64) -> f64 {
        (self.g0)(t)
    }
    pub fn g1(&self, t: f64) -> f64 {
        (self.g1)(t)
    }
    pub fn g0_dot(&self, t: f64) -> f64 {
        (self.g0_dot)(t)
    }
    pub fn g1_dot(&self, t: f64) -> f64 {
        (self.g1_dot)(t)
    }
    pub fn h0(&self, t: f64) -> f64 {
        (self.h0)(t)
    }
    pub fn h1(&self, t: f64) -> f64 {
        (self.h1)(t)
    }

    /// Largest mismatch between g0_dot, g1_dot and centered differences of
    /// g0, g1 with step `dt` over the sample times.
    pub fn derivative_defect(&self, times: &[f64], dt: f64) -> f64 {
        times
            .iter()
            .map(|&t| {
                let d0 = (self.g0(t + dt) - self.g0(t - dt)) / (2.0 * dt) - self.g0_dot(t);
                let d1 = (self.g1(t + dt) - self.g1(t - dt)) / (2.0 * dt) - self.g1_dot(t);
                d0.abs().max(d1.abs())
            })
            .fold(0.0, f64::max)
    }

    /// sup over `times` of max(|g0|, |g1|).
    pub fn sup_over(&self, times: &[f64]) -> f64 {
        times
            .iter()
            .map(|&t| self.g0(t).abs().max(self.g1(t).abs()))
            .fold(0.0, f64::max)
    }
}

fn centered_differences(t: &[f64], v: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            (v[b] - v[a]) / (t[b] - t[a])
        })
        .collect()
}

fn interpolate(t: &[f64], v: &[f64], s: f64) -> f64 {
    if s <= t[0] {
        return v[0];
    }
    let n = t.len();
    if s >= t[n - 1] {
        return v[n - 1];
    }
    let j = t.partition_point(|&x| x <= s);
    let (t0, t1) = (t[j - 1], t[j]);
    let w = (s - t0) / (t1 - t0);
    v[j - 1] * (1.0 - w) + v[j] * w
}

/// Source term S(t, x, u) with its Lipschitz constant in u and sup bound.
#[derive(Clone)]
pub struct SourceSpec {
    s: SourceFn,
    lipschitz_c: f64,
    sup_bound: f64,
}

impl fmt::Debug for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceSpec")
            .field("lipschitz_c", &self.lipschitz_c)
            .field("sup_bound", &self.sup_bound)
            .finish()
    }
}

impl SourceSpec {
    pub fn new(s: SourceFn, lipschitz_c: f64, sup_bound: f64) -> Self {
        Self {
            s,
            lipschitz_c,
            sup_bound,
        }
    }

    pub fn zero() -> Self {
        Self::new(Arc::new(|_, _, _| 0.0), 0.0, 0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(Arc::new(move |_, _, _| c), 0.0, c.abs())
    }

    #[inline]
    pub fn eval(&self, t: f64, x: f64, u: f64) -> f64 {
        (self.s)(t, x, u)
    }

    pub fn lipschitz_c(&self) -> f64 {
        self.lipschitz_c
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn is_zero(&self) -> bool {
        self.sup_bound == 0.0
    }

    /// Worst violation of the declared Lipschitz and sup bounds over
    /// sampled (t, x, u, v) quadruples; nonpositive when both hold.
    pub fn bound_defect(&self, t_end: f64, u_bound: f64, samples: usize) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        let m = samples.max(2);
        for a in 0..m {
            let t = t_end * a as f64 / (m - 1) as f64;
            for b in 0..m {
                let x = b as f64 / (m - 1) as f64;
                for c in 0..m {
                    let u = -u_bound + 2.0 * u_bound * c as f64 / (m - 1) as f64;
                    let v = -u;
                    let su = self.eval(t, x, u);
                    worst = worst.max(su.abs() - self.sup_bound);
                    worst = worst.max((su - self.eval(t, x, v)).abs() - self.lipschitz_c * (u - v).abs());
                }
            }
        }
        worst
    }
}

/// Default a priori bound L = ‖u0‖∞ + ‖g‖∞ + sup|S|·T + 1.
pub fn default_bound(u0_sup: f64, g_sup: f64, source_sup: f64, t_end: f64) -> f64 {
    u0_sup + g_sup + source_sup * t_end + 1.0
}

/// Stable time step: cfl·dx/max|A'| over the field's range, also
/// cfl·dx²/(2·eps) when eps > 0, capped by `dt_max`.
pub fn cfl_dt(field: &CellField, flux: &FluxSpec, cfl: f64, eps: f64, dt_max: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::invalid(format!("cfl must lie in (0, 1], got {cfl}")));
    }
    if !(eps >= 0.0) {
        return Err(Error::invalid(format!("viscosity must be nonnegative, got {eps}")));
    }
    if !(dt_max > 0.0 && dt_max.is_finite()) {
        return Err(Error::invalid(format!("dt_max must be positive, got {dt_max}")));
    }
    let dx = field.grid().dx();
    let speed = flux.max_speed(field.min(), field.max());
    let mut dt = dt_max;
    if speed > 0.0 {
        dt = dt.min(cfl * dx / speed);
    }
    if eps > 0.0 {
        dt = dt.min(cfl * dx * dx / (2.0 * eps));
    }
    Ok(dt)
}

/// CFL step from the flux speed over the whole a priori range [−L, L];
/// valid for every state the run can reach, so paired runs can share it.
pub fn uniform_dt(grid: &Grid1D, flux: &FluxSpec, cfl: f64, eps: f64) -> f64 {
    let dx = grid.dx();
    let l = flux.bound();
    cfl / (flux.max_speed(-l, l) / dx + 2.0 * eps / (dx * dx)).max(1e-300)
}

/// Composite Simpson rule with `panels` (rounded up to even) subintervals.
pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = panels + panels % 2;
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for j in 1..m {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + j as f64 * h);
    }
    acc * h / 3.0
}
