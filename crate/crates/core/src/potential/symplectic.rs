use std::sync::OnceLock;

use super::{guillemin, CONVEXITY_SLACK, DEFAULT_GRID_N, DEFAULT_WINDOW};
use crate::error::{LabError, Result};
use crate::numerics::grid::{first_derivative, second_derivative};
use crate::numerics::{logistic, softplus, CubicSpline, UniformGrid};

/// Symplectic potential `L = x log x + (1 − x) log(1 − x) + g` sampled through `g`.
#[derive(Debug, Clone)]
pub struct SymplecticPotential {
    grid: UniformGrid,
    g: Vec<f64>,
    window: f64,
    spline: OnceLock<CubicSpline>,
    slope_bound: OnceLock<f64>,
}

/// The radial picture at one value of `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPoint {
    pub s: f64,
    /// Moment coordinate `x = φ'(s)`.
    pub x: f64,
    pub phi: f64,
    /// `φ''(s)`.
    pub curvature: f64,
    /// Kähler potential relative to Fubini–Study, `φ(s) − log(1 + e^s)`.
    pub u: f64,
}

/// Pointwise quantities on the moment grid, with derivatives of `g` by finite differences.
#[derive(Debug, Clone)]
pub struct NodalGeometry {
    pub x: Vec<f64>,
    pub g: Vec<f64>,
    pub gp: Vec<f64>,
    pub gpp: Vec<f64>,
    /// Kähler potential `u` as a function of its own moment coordinate.
    pub u: Vec<f64>,
    /// Density of the reference form `ω_0` against `dx`.
    pub rho0: Vec<f64>,
    /// Inverse Hessian `1 / L''`.
    pub q: Vec<f64>,
    /// Fubini–Study moment coordinate of the point with moment `x`.
    pub x0: Vec<f64>,
}

impl SymplecticPotential {
    /// Build from nodal samples of `g` on a uniform partition of `[0, 1]`.
    pub fn new(g: Vec<f64>) -> Result<Self> {
        Self::with_window(g, DEFAULT_WINDOW)
    }

    pub fn with_window(g: Vec<f64>, window: f64) -> Result<Self> {
        if g.len() < 5 {
            return Err(LabError::Resolution(format!(
                "a symplectic potential needs at least 4 intervals, got {}",
                g.len().saturating_sub(1)
            )));
        }
        if !(window.is_finite() && window > 0.0) {
            return Err(LabError::InvalidArgument(format!("window must be positive, got {window}")));
        }
        let grid = UniformGrid::unit(g.len() - 1);
        validate(&grid, &g)?;
        Ok(Self {
            grid,
            g,
            window,
            spline: OnceLock::new(),
            slope_bound: OnceLock::new(),
        })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(n: usize, f: F) -> Result<Self> {
        let grid = UniformGrid::unit(n);
        Self::new(grid.nodes().into_iter().map(f).collect())
    }

    pub fn fubini_study(n: usize) -> Self {
        Self::new(vec![0.0; n + 1]).expect("Fubini–Study is convex")
    }

    /// Default-resolution Fubini–Study potential.
    pub fn reference() -> Self {
        Self::fubini_study(DEFAULT_GRID_N)
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    /// Number of intervals `N`.
    pub fn n(&self) -> usize {
        self.grid.intervals
    }

    pub fn g_values(&self) -> &[f64] {
        &self.g
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.grid.nodes()
    }

    /// Full potential `L` at the nodes.
    pub fn values(&self) -> Vec<f64> {
        self.grid
            .nodes()
            .iter()
            .zip(&self.g)
            .map(|(&x, g)| guillemin(x) + g)
            .collect()
    }

    /// The metric of `u + c`: the dual shifts by `−c`.
    pub fn add_constant(&self, c: f64) -> Self {
        self.map_g(|_, g| g - c)
    }

    /// Apply `g ↦ f(x, g)` node by node, keeping grid and window.
    ///
    /// Panics if the result is not convex; use [`SymplecticPotential::with_window`] to
    /// handle that case.
    pub fn map_g<F: Fn(f64, f64) -> f64>(&self, f: F) -> Self {
        let g = self.grid.nodes().iter().zip(&self.g).map(|(&x, &g)| f(x, g)).collect();
        Self::with_window(g, self.window).expect("mapped potential must stay convex")
    }

    pub fn try_map_g<F: Fn(f64, f64) -> f64>(&self, f: F) -> Result<Self> {
        let g = self.grid.nodes().iter().zip(&self.g).map(|(&x, &g)| f(x, g)).collect();
        Self::with_window(g, self.window)
    }

    /// Resample onto `n` intervals through the cubic spline of `g`.
    pub fn resample(&self, n: usize) -> Result<Self> {
        if n == self.n() {
            return Ok(self.clone());
        }
        let spline = self.spline();
        let g = UniformGrid::unit(n).nodes().iter().map(|&x| spline.eval(x)).collect();
        Self::with_window(g, self.window)
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.n() != other.n() {
            return Err(LabError::GridMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(())
    }

    /// Cubic spline of `g`; the continuum model used by radial evaluation.
    pub fn spline(&self) -> &CubicSpline {
        self.spline
            .get_or_init(|| CubicSpline::new(self.grid, &self.g))
    }

    fn slope_bound(&self) -> f64 {
        *self.slope_bound.get_or_init(|| {
            let sp = self.spline();
            let h = self.grid.step();
            let mut m: f64 = 0.0;
            for i in 0..self.grid.intervals {
                for k in 0..4 {
                    let x = self.grid.node(i) + h * k as f64 / 3.0;
                    m = m.max(sp.derivative(x).abs());
                }
            }
            m
        })
    }

    /// `L'(x) = log(x / (1 − x)) + g'(x)` in the continuum model.
    pub fn l_prime(&self, x: f64) -> f64 {
        (x / (1.0 - x)).ln() + self.spline().derivative(x)
    }

    /// `L''(x) = 1 / (x (1 − x)) + g''(x)` in the continuum model.
    pub fn l_second(&self, x: f64) -> f64 {
        1.0 / (x * (1.0 - x)) + self.spline().second_derivative(x)
    }

    /// Continuum value of `L(x)`.
    pub fn l_value(&self, x: f64) -> f64 {
        guillemin(x) + self.spline().eval(x)
    }

    /// Solve `L'(x) = s` and return the radial data at `s`.
    pub fn radial_point(&self, s: f64) -> RadialPoint {
        let sp = self.spline();
        let m = self.slope_bound() + 1.0;
        // work in y = logit(x): F(y) = y + g'(σ(y)) − s is increasing
        let (mut lo, mut hi) = (s - m, s + m);
        let mut y = s - sp.derivative(logistic(s));
        if !(y > lo && y < hi) {
            y = 0.5 * (lo + hi);
        }
        for _ in 0..100 {
            let x = logistic(y);
            let w = logistic(y) * logistic(-y);
            let f = y + sp.derivative(x) - s;
            if f > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            let df = 1.0 + w * sp.second_derivative(x);
            let mut next = y - f / df;
            if !(df > 0.0) || !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - y).abs() <= 1e-15 * (1.0 + y.abs());
            y = next;
            if done || hi - lo < 1e-15 * (1.0 + y.abs()) {
                break;
            }
        }
        let x = logistic(y);
        let xm = logistic(-y);
        let w = x * xm;
        let gx = sp.eval(x);
        // φ = x s − L(x), with the entropy terms written through softplus for stability
        let phi = x * s + x * softplus(-y) + xm * softplus(y) - gx;
        let curvature = w / (1.0 + w * sp.second_derivative(x));
        RadialPoint {
            s,
            x,
            phi,
            curvature,
            u: phi - softplus(s),
        }
    }

    /// Radial samples on a uniform `s`-grid.
    pub fn radial_samples(&self, grid: &UniformGrid) -> Vec<RadialPoint> {
        grid.nodes().iter().map(|&s| self.radial_point(s)).collect()
    }

    /// Finite-difference geometry at the nodes of the moment grid.
    pub fn nodal(&self) -> NodalGeometry {
        let h = self.grid.step();
        let x = self.grid.nodes();
        let gp = first_derivative(&self.g, h);
        let gpp = second_derivative(&self.g, h);
        let n = x.len();
        let mut u = vec![0.0; n];
        let mut rho0 = vec![0.0; n];
        let mut q = vec![0.0; n];
        let mut x0 = vec![0.0; n];
        for i in 0..n {
            let xi = x[i];
            let w = xi * (1.0 - xi);
            let e = gp[i].exp();
            let denom = 1.0 - xi + xi * e;
            u[i] = xi * gp[i] - self.g[i] - denom.ln();
            rho0[i] = e * (1.0 + w * gpp[i]) / (denom * denom);
            q[i] = w / (1.0 + w * gpp[i]);
            x0[i] = xi * e / denom;
        }
        NodalGeometry {
            x,
            g: self.g.clone(),
            gp,
            gpp,
            u,
            rho0,
            q,
            x0,
        }
    }

    /// Kähler potential `u` relative to Fubini–Study, on the moment grid.
    pub fn kahler_potential(&self) -> Vec<f64> {
        self.nodal().u
    }
}

fn validate(grid: &UniformGrid, g: &[f64]) -> Result<()> {
    if let Some(index) = g.iter().position(|v| !v.is_finite()) {
        return Err(LabError::NonFinite { index });
    }
    let x = grid.nodes();
    for i in 1..g.len() - 1 {
        let l = |j: usize| guillemin(x[j]) + g[j];
        let d2 = l(i + 1) - 2.0 * l(i) + l(i - 1);
        if d2 < -CONVEXITY_SLACK || d2.is_nan() {
            return Err(LabError::NonConvex { index: i, value: d2 });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fubini_study_radial_point_is_softplus() {
        let fs = SymplecticPotential::fubini_study(64);
        for &s in &[-39.0, -5.0, 0.0, 0.7, 12.0, 39.5] {
            let p = fs.radial_point(s);
            assert!((p.phi - softplus(s)).abs() < 1e-13, "s={s}");
            assert!((p.x - logistic(s)).abs() < 1e-15);
            assert!((p.curvature - logistic(s) * logistic(-s)).abs() < 1e-15);
            assert!(p.u.abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_concave_data() {
        let g: Vec<f64> = (0..=16).map(|i| -40.0 * (i as f64 / 16.0 - 0.5).powi(2)).collect();
        match SymplecticPotential::new(g) {
            Err(LabError::NonConvex { index, .. }) => assert!(index > 0 && index < 16),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_finite() {
        let mut g = vec![0.0; 9];
        g[3] = f64::NAN;
        assert!(matches!(SymplecticPotential::new(g), Err(LabError::NonFinite { index: 3 })));
    }

    #[test]
    fn nodal_fs_geometry() {
        let fs = SymplecticPotential::fubini_study(32);
        let geo = fs.nodal();
        for i in 0..=32 {
            let x = geo.x[i];
            assert!(geo.u[i].abs() < 1e-15);
            assert!((geo.rho0[i] - 1.0).abs() < 1e-15);
            assert!((geo.q[i] - x * (1.0 - x)).abs() < 1e-15);
            assert!((geo.x0[i] - x).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_shift_moves_potential() {
        let p = SymplecticPotential::from_fn(64, |x| 0.1 * (3.0 * x).sin()).unwrap();
        let q = p.add_constant(0.25);
        for &s in &[-3.0, 0.0, 2.0] {
            let (a, b) = (p.radial_point(s), q.radial_point(s));
            assert!((b.phi - a.phi - 0.25).abs() < 1e-12);
            assert!((b.curvature - a.curvature).abs() < 1e-14);
        }
    }

    #[test]
    fn radial_point_inverts_moment_map() {
        let p = SymplecticPotential::from_fn(128, |x| 0.3 * x * x - 0.2 * x).unwrap();
        for &s in &[-8.0, -1.0, 0.5, 6.0] {
            let r = p.radial_point(s);
            assert!((p.l_prime(r.x) - s).abs() < 1e-10);
            assert!((r.curvature - 1.0 / p.l_second(r.x)).abs() < 1e-12);
        }
    }
}
