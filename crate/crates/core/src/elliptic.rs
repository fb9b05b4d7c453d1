//! Neumann problem −P'' + P = f on (0, 1), P'(0) = ψ0, P'(1) = ψ1.
//!
//! Two independent routes are provided: midpoint quadrature against the
//! closed-form Green's function of 1 − ∂xx (after shifting out the
//! boundary data), and a cell-centered finite-difference discretization
//! solved with the Thomas algorithm. Each one serves as the oracle of the
//! other.

use serde::{Deserialize, Serialize};

use crate::domain::{CellField, Grid1D};
use crate::error::{Error, Result};
use crate::tridiag;

/// sup of G over the unit square, G(0,0) = coth(1).
pub fn green_sup() -> f64 {
    1.0 / 1f64.tanh()
}

/// sup of |∂xG| over the unit square.
pub const GREEN_X_SUP: f64 = 1.0;

/// Green's function of 1 − ∂xx with homogeneous Neumann data, and its
/// x-derivative. On the diagonal the `x < y` branch is returned.
pub fn green_eval(x: f64, y: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(Error::invalid(format!("Green's function arguments ({x}, {y}) outside [0, 1]")));
    }
    let s1 = 1f64.sinh();
    Ok(if x <= y {
        (x.cosh() * (1.0 - y).cosh() / s1, x.sinh() * (1.0 - y).cosh() / s1)
    } else {
        (y.cosh() * (1.0 - x).cosh() / s1, -y.cosh() * (1.0 - x).sinh() / s1)
    })
}

/// Quadratic lift Ω with Ω'(0) = ψ0, Ω'(1) = ψ1. Returns (Ω, Ω').
/// Ω'' = ψ1 − ψ0 is constant.
#[inline]
pub fn neumann_lift(x: f64, psi0: f64, psi1: f64) -> (f64, f64) {
    (
        0.5 * x * x * psi1 + 0.5 * (2.0 * x - x * x) * psi0,
        x * psi1 + (1.0 - x) * psi0,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct EllipticSolution {
    pub p: CellField,
    pub px: CellField,
    pub pxx: CellField,
    pub psi0: f64,
    pub psi1: f64,
}

impl EllipticSolution {
    /// ‖−D²P + P − f‖∞ with the Neumann data built into the ghost cells.
    pub fn discrete_residual(&self, f: &CellField) -> f64 {
        let p = self.p.values();
        let n = p.len();
        let dx = self.p.grid().dx();
        if n < 2 {
            return (p[0] - f.values()[0]).abs();
        }
        let ghost_l = p[0] - self.psi0 * dx;
        let ghost_r = p[n - 1] + self.psi1 * dx;
        (0..n)
            .map(|i| {
                let l = if i == 0 { ghost_l } else { p[i - 1] };
                let r = if i == n - 1 { ghost_r } else { p[i + 1] };
                (-(l - 2.0 * p[i] + r) / (dx * dx) + p[i] - f.values()[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// One-sided slopes (P₁ − P₀)/dx and (P_{n−1} − P_{n−2})/dx minus the
    /// Neumann data.
    pub fn boundary_slope_defect(&self) -> (f64, f64) {
        let p = self.p.values();
        let n = p.len();
        let dx = self.p.grid().dx();
        (
            (p[1] - p[0]) / dx - self.psi0,
            (p[n - 1] - p[n - 2]) / dx - self.psi1,
        )
    }
}

/// Precomputed Green quadrature for one grid.
///
/// The kernel is separable on each side of the diagonal, so the midpoint
/// sums are evaluated with running prefix sums in O(n). Summation order
/// is fixed, so results are reproducible bit for bit.
#[derive(Clone, Debug)]
pub struct GreenOperator {
    grid: Grid1D,
    cosh_x: Vec<f64>,
    cosh_r: Vec<f64>,
    sinh_x: Vec<f64>,
    sinh_r: Vec<f64>,
    sinh1: f64,
}

impl GreenOperator {
    pub fn new(grid: Grid1D) -> Self {
        let xs: Vec<f64> = grid.centers().collect();
        Self {
            grid,
            cosh_x: xs.iter().map(|x| x.cosh()).collect(),
            cosh_r: xs.iter().map(|x| (1.0 - x).cosh()).collect(),
            sinh_x: xs.iter().map(|x| x.sinh()).collect(),
            sinh_r: xs.iter().map(|x| (1.0 - x).sinh()).collect(),
            sinh1: 1f64.sinh(),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Midpoint quadrature of ∫G(x,y)r(y)dy and ∫∂xG(x,y)r(y)dy at the cell
    /// centers. The diagonal cell uses the continuous G and the mean of the
    /// two one-sided limits of ∂xG.
    pub fn apply(&self, rhs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.n_cells();
        assert_eq!(rhs.len(), n);
        let w = self.grid.dx() / self.sinh1;

        // right[i] = Σ_{j>i} cosh(1 − y_j) r_j
        let mut right = vec![0.0; n];
        for i in (0..n.saturating_sub(1)).rev() {
            right[i] = right[i + 1] + self.cosh_r[i + 1] * rhs[i + 1];
        }
        let mut v = Vec::with_capacity(n);
        let mut vx = Vec::with_capacity(n);
        let mut left = 0.0;
        for i in 0..n {
            let diag_g = self.cosh_x[i] * self.cosh_r[i];
            let diag_gx = 0.5 * (self.sinh_x[i] * self.cosh_r[i] - self.cosh_x[i] * self.sinh_r[i]);
            v.push(w * (self.cosh_r[i] * left + self.cosh_x[i] * right[i] + diag_g * rhs[i]));
            vx.push(w * (-self.sinh_r[i] * left + self.sinh_x[i] * right[i] + diag_gx * rhs[i]));
            left += self.cosh_x[i] * rhs[i];
        }
        (v, vx)
    }

    pub fn solve(&self, f: &CellField, psi0: f64, psi1: f64) -> Result<EllipticSolution> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch("Green operator built for another grid".into()));
        }
        let xs: Vec<f64> = self.grid.centers().collect();
        let lift: Vec<(f64, f64)> = xs.iter().map(|&x| neumann_lift(x, psi0, psi1)).collect();
        let omega_xx = psi1 - psi0;
        let rhs: Vec<f64> = f
            .values()
            .iter()
            .zip(&lift)
            .map(|(fv, (om, _))| fv + omega_xx - om)
            .collect();
        let (v, vx) = self.apply(&rhs);
        let p: Vec<f64> = v.iter().zip(&lift).map(|(a, (om, _))| a + om).collect();
        let px: Vec<f64> = vx.iter().zip(&lift).map(|(a, (_, dom))| a + dom).collect();
        assemble(f, p, px, psi0, psi1)
    }
}

fn assemble(f: &CellField, p: Vec<f64>, px: Vec<f64>, psi0: f64, psi1: f64) -> Result<EllipticSolution> {
    let grid = *f.grid();
    let t = f.time();
    let pxx: Vec<f64> = p.iter().zip(f.values()).map(|(a, b)| a - b).collect();
    Ok(EllipticSolution {
        p: CellField::new(grid, t, p)?,
        px: CellField::new(grid, t, px)?,
        pxx: CellField::new(grid, t, pxx)?,
        psi0,
        psi1,
    })
}

/// Green-function route.
pub fn solve_neumann_green(f: &CellField, psi0: f64, psi1: f64) -> Result<EllipticSolution> {
    GreenOperator::new(*f.grid()).solve(f, psi0, psi1)
}

/// Finite-difference route: central second differences with ghost cells
/// P₋₁ = P₀ − ψ0·dx and P_n = P_{n−1} + ψ1·dx, then a tridiagonal solve.
pub fn solve_neumann_fd(f: &CellField, psi0: f64, psi1: f64) -> Result<EllipticSolution> {
    let n = f.grid().n_cells();
    if n < 4 {
        return Err(Error::invalid(format!("finite-difference solver needs ≥ 4 cells, got {n}")));
    }
    let dx = f.grid().dx();
    let k = 1.0 / (dx * dx);
    let lower = vec![-k; n];
    let upper = vec![-k; n];
    let mut diag = vec![1.0 + 2.0 * k; n];
    diag[0] = 1.0 + k;
    diag[n - 1] = 1.0 + k;
    let mut rhs = f.values().to_vec();
    rhs[0] -= psi0 / dx;
    rhs[n - 1] += psi1 / dx;
    let p = tridiag::solve(&lower, &diag, &upper, &rhs)?;
    let px: Vec<f64> = (0..n)
        .map(|i| {
            let l = if i == 0 { p[0] - psi0 * dx } else { p[i - 1] };
            let r = if i == n - 1 { p[n - 1] + psi1 * dx } else { p[i + 1] };
            (r - l) / (2.0 * dx)
        })
        .collect();
    assemble(f, p, px, psi0, psi1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EllipticBackend {
    #[default]
    Green,
    Fd,
}

impl std::str::FromStr for EllipticBackend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "green" => Ok(Self::Green),
            "fd" => Ok(Self::Fd),
            other => Err(Error::invalid(format!(
                "unknown elliptic backend `{other}` (valid: green, fd)"
            ))),
        }
    }
}

/// Backend dispatch with the Green quadrature precomputed once per grid.
#[derive(Clone, Debug)]
pub struct EllipticSolver {
    backend: EllipticBackend,
    green: Option<GreenOperator>,
}

impl EllipticSolver {
    pub fn new(grid: Grid1D, backend: EllipticBackend) -> Self {
        let green = (backend == EllipticBackend::Green).then(|| GreenOperator::new(grid));
        Self { backend, green }
    }

    pub fn backend(&self) -> EllipticBackend {
        self.backend
    }

    pub fn solve(&self, f: &CellField, psi0: f64, psi1: f64) -> Result<EllipticSolution> {
        match &self.green {
            Some(g) => g.solve(f, psi0, psi1),
            None => solve_neumann_fd(f, psi0, psi1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cosine_case(n: usize) -> (CellField, Vec<f64>) {
        let g = Grid1D::new(n).unwrap();
        let f = CellField::from_fn(g, 0.0, |x| (PI * x).cos()).unwrap();
        let exact = g.centers().map(|x| (PI * x).cos() / (1.0 + PI * PI)).collect();
        (f, exact)
    }

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn green_closed_form_values() {
        let (g00, _) = green_eval(0.0, 0.0).unwrap();
        assert!((g00 - 1.0 / 1f64.tanh()).abs() < 1e-12);
        assert!((g00 - 1.31304).abs() < 1e-5);
        let (g01, _) = green_eval(0.0, 1.0).unwrap();
        assert!((g01 - 1.0 / 1f64.sinh()).abs() < 1e-12);
        assert!((g01 - 0.85092).abs() < 1e-5);
        assert!(green_eval(-0.1, 0.5).is_err());
        assert!(green_eval(0.5, 1.2).is_err());
    }

    #[test]
    fn green_symmetric_nonnegative_and_bounded() {
        for a in 0..=20 {
            for b in 0..=20 {
                let (x, y) = (a as f64 / 20.0, b as f64 / 20.0);
                let (gxy, gx) = green_eval(x, y).unwrap();
                let (gyx, _) = green_eval(y, x).unwrap();
                assert!((gxy - gyx).abs() < 1e-14);
                assert!(gxy >= 0.0 && gxy <= green_sup() + 1e-14);
                assert!(gx.abs() <= GREEN_X_SUP + 1e-14);
            }
        }
    }

    #[test]
    fn green_derivative_matches_difference_quotient() {
        let h = 1e-6;
        for (x, y) in [(0.2, 0.7), (0.8, 0.3), (0.5, 0.9)] {
            let (_, gx) = green_eval(x, y).unwrap();
            let fd = (green_eval(x + h, y).unwrap().0 - green_eval(x - h, y).unwrap().0) / (2.0 * h);
            assert!((gx - fd).abs() < 1e-8);
        }
        // unit jump of ∂xG across the diagonal
        let y = 0.4;
        let left = green_eval(y - 1e-12, y).unwrap().1;
        let right = green_eval(y + 1e-12, y).unwrap().1;
        assert!((left - right - 1.0).abs() < 1e-9);
    }

    #[test]
    fn operator_matches_direct_double_loop() {
        let g = Grid1D::new(17).unwrap();
        let op = GreenOperator::new(g);
        let r: Vec<f64> = g.centers().map(|x| (3.0 * x).sin() + x * x).collect();
        let (v, vx) = op.apply(&r);
        for (i, x) in g.centers().enumerate() {
            let sv: f64 = g
                .centers()
                .enumerate()
                .map(|(j, y)| green_eval(x, y).unwrap().0 * r[j] * g.dx())
                .sum();
            assert!((sv - v[i]).abs() < 1e-13);
        }
        // the diagonal ∂xG weight is the mean of the two one-sided limits
        for (i, x) in g.centers().enumerate() {
            let mut svx = 0.0;
            for (j, y) in g.centers().enumerate() {
                let gx = if i == j {
                    let a = x.sinh() * (1.0 - x).cosh() / 1f64.sinh();
                    let b = -x.cosh() * (1.0 - x).sinh() / 1f64.sinh();
                    0.5 * (a + b)
                } else {
                    green_eval(x, y).unwrap().1
                };
                svx += gx * r[j] * g.dx();
            }
            assert!((svx - vx[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn kernel_integrates_to_one() {
        let g = Grid1D::new(400).unwrap();
        let (v, vx) = GreenOperator::new(g).apply(&vec![1.0; 400]);
        assert!(max_err(&v, &vec![1.0; 400]) < 1e-6);
        assert!(vx.iter().all(|d| d.abs() < 1e-3));
    }

    #[test]
    fn constant_rhs_gives_constant() {
        let g = Grid1D::new(64).unwrap();
        let f = CellField::constant(g, 0.0, 1.0).unwrap();
        let s = solve_neumann_green(&f, 0.0, 0.0).unwrap();
        assert!(max_err(s.p.values(), &vec![1.0; 64]) < 1e-4);
        assert!(s.px.sup_norm() < 1e-3);
        for c in [-2.0, 0.0, 3.5] {
            let f = CellField::constant(g, 0.0, c).unwrap();
            let s = solve_neumann_fd(&f, 0.0, 0.0).unwrap();
            assert!(max_err(s.p.values(), &vec![c; 64]) < 1e-12);
        }
    }

    #[test]
    fn cosine_second_order_both_backends() {
        let mut prev: Option<(f64, f64)> = None;
        for n in [50, 100, 200] {
            let (f, exact) = cosine_case(n);
            let eg = max_err(solve_neumann_green(&f, 0.0, 0.0).unwrap().p.values(), &exact);
            let ef = max_err(solve_neumann_fd(&f, 0.0, 0.0).unwrap().p.values(), &exact);
            if let Some((pg, pf)) = prev {
                assert!((pg / eg - 4.0).abs() < 0.4, "green ratio {}", pg / eg);
                assert!((pf / ef - 4.0).abs() < 0.4, "fd ratio {}", pf / ef);
            }
            prev = Some((eg, ef));
        }
    }

    #[test]
    fn cosine_derivative_second_order() {
        let exact_px = |x: f64| -PI * (PI * x).sin() / (1.0 + PI * PI);
        let mut prev = None;
        for n in [50, 100, 200] {
            let (f, _) = cosine_case(n);
            let s = solve_neumann_green(&f, 0.0, 0.0).unwrap();
            let e = s
                .px
                .values()
                .iter()
                .zip(f.grid().centers())
                .map(|(a, x)| (a - exact_px(x)).abs())
                .fold(0.0, f64::max);
            if let Some(p) = prev {
                let ratio: f64 = p / e;
                assert!(ratio > 3.5, "ratio {ratio}");
            }
            prev = Some(e);
        }
    }

    #[test]
    fn inhomogeneous_neumann_backends_agree() {
        for n in [50, 100, 200] {
            let g = Grid1D::new(n).unwrap();
            let f = CellField::constant(g, 0.0, 0.0).unwrap();
            let a = solve_neumann_green(&f, 1.0, 1.0).unwrap();
            let b = solve_neumann_fd(&f, 1.0, 1.0).unwrap();
            let dx = g.dx();
            assert!(max_err(a.p.values(), b.p.values()) <= 2.0 * dx * dx);
            let (d0, d1) = a.boundary_slope_defect();
            assert!(d0.abs() <= 2.0 * dx && d1.abs() <= 2.0 * dx);
        }
    }

    #[test]
    fn closed_form_with_flux_data() {
        // −P'' + P = 0, P'(0) = ψ0, P'(1) = ψ1:
        // P = (ψ1 cosh x − ψ0 cosh(1 − x)) / sinh 1
        let (psi0, psi1) = (0.7, -1.3);
        let n = 200;
        let g = Grid1D::new(n).unwrap();
        let f = CellField::constant(g, 0.0, 0.0).unwrap();
        let exact: Vec<f64> = g
            .centers()
            .map(|x| (psi1 * x.cosh() - psi0 * (1.0 - x).cosh()) / 1f64.sinh())
            .collect();
        let s = solve_neumann_green(&f, psi0, psi1).unwrap();
        assert!(max_err(s.p.values(), &exact) < 5.0 / (n * n) as f64);
        assert!(s.discrete_residual(&f) < 1e-2);
    }

    #[test]
    fn nonnegative_data_gives_nonnegative_p() {
        let g = Grid1D::new(80).unwrap();
        let f = CellField::from_fn(g, 0.0, |x| if (0.3..0.35).contains(&x) { 5.0 } else { 0.0 }).unwrap();
        let s = solve_neumann_green(&f, 0.0, 0.0).unwrap();
        assert!(s.p.min() >= 0.0);
        // ‖P‖∞ ≤ ‖G‖∞‖f‖₁ and ‖Px‖∞ ≤ ‖∂xG‖∞‖f‖₁
        assert!(s.p.sup_norm() <= green_sup() * f.l1_norm());
        assert!(s.px.sup_norm() <= GREEN_X_SUP * f.l1_norm());
    }

    #[test]
    fn fd_rejects_tiny_grid() {
        let g = Grid1D::new(3).unwrap();
        let f = CellField::constant(g, 0.0, 1.0).unwrap();
        assert!(solve_neumann_fd(&f, 0.0, 0.0).is_err());
    }
}
