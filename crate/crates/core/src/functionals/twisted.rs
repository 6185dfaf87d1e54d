use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::energy::{energy_e, energy_et};
use crate::error::{LabError, Result};
use crate::geodesic::{metric_distance, slice_rates, MetricPath, PathKind};
use crate::numerics::quadrature::gauss_legendre;
use crate::numerics::{logistic, logit, UniformGrid};
use crate::potential::{pullback, MomentDensity, SymplecticPotential, TwistForm};

/// `𝓕_μ(u) = ∫ u dμ − (μ(X)/2) 𝓔(u)`.
pub fn twisted_f_mu<M: MomentDensity + ?Sized>(u: &SymplecticPotential, mu: &M) -> f64 {
    energy_et(u, mu) - 0.5 * mu.total_mass() * energy_e(u)
}

/// `𝓕_α(u) = 𝓔^α(u) − (α(X)/2) 𝓔(u)`.
pub fn twisted_f_alpha(u: &SymplecticPotential, alpha: &TwistForm) -> f64 {
    twisted_f_mu(u, alpha)
}

const GL_POINTS: usize = 10;

/// Discrete `𝓜 + 𝓕_α` as a function of the nodal values of `g`.
///
/// The K-energy part is the symplectic form with interior second differences,
/// `−Σ h log(1 + x(1 − x) D²g) + g_0 + g_N − 2 ∫ g`. The twist part is
/// `Σ_cells h B(x_c, D¹g_c) − α(X) g_N + α(X) ∫ g`, where `∂_p B(x, p) = A(σ(logit x + p))`
/// and `A` is the cumulative density of `α` in the reference moment coordinate.
/// Both parts are convex, and for `α = c ω_0` the reference is an exact critical point.
#[derive(Debug, Clone)]
pub struct TwistedFunctional {
    grid: UniformGrid,
    alpha: TwistForm,
    cumulative: Vec<f64>,
    gl: (Vec<f64>, Vec<f64>),
}

impl TwistedFunctional {
    pub fn new(alpha: TwistForm, n: usize) -> Self {
        let ag = *alpha.grid();
        let h = ag.step();
        let d = alpha.density();
        let mut cumulative = vec![0.0; d.len()];
        for i in 1..d.len() {
            cumulative[i] = cumulative[i - 1] + 0.5 * h * (d[i - 1] + d[i]);
        }
        Self {
            grid: UniformGrid::unit(n),
            alpha,
            cumulative,
            gl: gauss_legendre(GL_POINTS),
        }
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn alpha(&self) -> &TwistForm {
        &self.alpha
    }

    /// Piecewise-linear density of `α` and its exact primitive.
    fn density_and_primitive(&self, y: f64) -> (f64, f64) {
        let ag = self.alpha.grid();
        let d = self.alpha.density();
        let y = y.clamp(0.0, 1.0);
        let (i, theta) = ag.locate(y);
        if i >= ag.intervals {
            return (d[ag.intervals], self.cumulative[ag.intervals]);
        }
        let h = ag.step();
        let a = d[i] + theta * (d[i + 1] - d[i]);
        let prim = self.cumulative[i] + h * theta * (d[i] + 0.5 * theta * (d[i + 1] - d[i]));
        (a, prim)
    }

    /// `B(x, p) = ∫_x^{y_1} A(y) / (y (1 − y)) dy` with `y_1 = σ(logit x + p)`, split at the
    /// nodes of `α` so that each piece is smooth.
    fn b(&self, x: f64, p: f64) -> f64 {
        let y1 = logistic(logit(x) + p);
        let (lo, hi, sign) = if y1 >= x { (x, y1, 1.0) } else { (y1, x, -1.0) };
        let ag = self.alpha.grid();
        let mut cuts = vec![lo];
        cuts.extend(ag.nodes().into_iter().filter(|&y| y > lo && y < hi));
        cuts.push(hi);
        let (nodes, weights) = &self.gl;
        let total: f64 = cuts
            .windows(2)
            .map(|c| {
                let (m, r) = (0.5 * (c[0] + c[1]), 0.5 * (c[1] - c[0]));
                r * nodes
                    .iter()
                    .zip(weights)
                    .map(|(z, w)| {
                        let y = m + r * z;
                        w * self.density_and_primitive(y).1 / (y * (1.0 - y))
                    })
                    .sum::<f64>()
            })
            .sum();
        sign * total
    }

    fn check(&self, g: &[f64]) {
        assert_eq!(g.len(), self.grid.len(), "g must live on the functional's grid");
    }

    /// `None` outside the domain `1 + x(1 − x) D²g > 0`.
    pub fn value(&self, g: &[f64]) -> Option<f64> {
        self.check(g);
        let h = self.grid.step();
        let n = self.grid.intervals;
        let mass = self.alpha.mass();
        let mut log_sum = 0.0;
        for i in 1..n {
            let x = self.grid.node(i);
            let arg = 1.0 + x * (1.0 - x) * (g[i + 1] - 2.0 * g[i] + g[i - 1]) / (h * h);
            if !(arg > 0.0) {
                return None;
            }
            log_sum += arg.ln();
        }
        let twist: f64 = (0..n)
            .map(|c| h * self.b(self.grid.node(c) + 0.5 * h, (g[c + 1] - g[c]) / h))
            .sum();
        let mean = self.grid.integrate(g);
        Some(-h * log_sum + g[0] + g[n] - 2.0 * mean + twist - mass * g[n] + mass * mean)
    }

    pub fn gradient(&self, g: &[f64]) -> Vec<f64> {
        self.check(g);
        let h = self.grid.step();
        let n = self.grid.intervals;
        let mass = self.alpha.mass();
        let w = self.grid.trapezoid_weights();
        let mut grad: Vec<f64> = w.iter().map(|w| (mass - 2.0) * w).collect();
        grad[0] += 1.0;
        grad[n] += 1.0 - mass;
        for i in 1..n {
            let x = self.grid.node(i);
            let xx = x * (1.0 - x);
            let q = xx / (1.0 + xx * (g[i + 1] - 2.0 * g[i] + g[i - 1]) / (h * h));
            grad[i - 1] -= q / h;
            grad[i] += 2.0 * q / h;
            grad[i + 1] -= q / h;
        }
        for c in 0..n {
            let xm = self.grid.node(c) + 0.5 * h;
            let a = self.density_and_primitive(logistic(logit(xm) + (g[c + 1] - g[c]) / h)).1;
            grad[c] -= a;
            grad[c + 1] += a;
        }
        grad
    }

    pub fn hessian(&self, g: &[f64]) -> DMatrix<f64> {
        self.check(g);
        let h = self.grid.step();
        let n = self.grid.intervals;
        let mut m = DMatrix::zeros(n + 1, n + 1);
        for i in 1..n {
            let x = self.grid.node(i);
            let xx = x * (1.0 - x);
            let q = xx / (1.0 + xx * (g[i + 1] - 2.0 * g[i] + g[i - 1]) / (h * h));
            let c = q * q / (h * h * h);
            let row = [(i - 1, 1.0), (i, -2.0), (i + 1, 1.0)];
            for &(a, ca) in &row {
                for &(b, cb) in &row {
                    m[(a, b)] += c * ca * cb;
                }
            }
        }
        for c in 0..n {
            let xm = self.grid.node(c) + 0.5 * h;
            let x0 = logistic(logit(xm) + (g[c + 1] - g[c]) / h);
            let k = self.density_and_primitive(x0).0 * x0 * (1.0 - x0) / h;
            m[(c, c)] += k;
            m[(c + 1, c + 1)] += k;
            m[(c, c + 1)] -= k;
            m[(c + 1, c)] -= k;
        }
        m
    }

    /// `sup_i |∂J/∂g_i| / w_i`, the discrete twisted-csc residual.
    pub fn residual(&self, g: &[f64]) -> f64 {
        let w = self.grid.trapezoid_weights();
        self.gradient(g)
            .iter()
            .zip(&w)
            .map(|(d, w)| (d / w).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrictConvexityReport {
    /// `f'(1) − f'(0)` for `f(t) = ∫ u_t dμ`.
    pub gap: f64,
    /// `δ A / C² · d²`.
    pub bound: f64,
    pub delta: f64,
    pub a: f64,
    pub c: f64,
    pub distance: f64,
}

impl StrictConvexityReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.gap >= self.bound - tol
    }
}

/// Grid used for the Poincaré constant and for `A`.
const POINCARE_N: usize = 256;

/// Density ratios above this count as unbounded.
const MAX_RATIO: f64 = 1e12;

/// Smallest nonzero value of `∫ x(1 − x) v'² dμ / ∫ (v − v̄)² dμ` over piecewise-linear `v`
/// on the reference moment interval, `μ` given by its density there.
pub fn poincare_constant<M: MomentDensity + ?Sized>(mu: &M, n: usize) -> Result<f64> {
    let grid = UniformGrid::unit(n);
    let h = grid.step();
    let w = grid.trapezoid_weights();
    let d: Vec<f64> = grid.nodes().iter().map(|&x| mu.moment_density(x)).collect();
    if let Some(i) = d.iter().position(|d| !(*d > 0.0)) {
        return Err(LabError::InvalidArgument(format!(
            "measure density vanishes at reference moment node {i}"
        )));
    }
    let mut k = DMatrix::<f64>::zeros(n + 1, n + 1);
    for c in 0..n {
        let xm = grid.node(c) + 0.5 * h;
        let coef = xm * (1.0 - xm) * mu.moment_density(xm) / h;
        k[(c, c)] += coef;
        k[(c + 1, c + 1)] += coef;
        k[(c, c + 1)] -= coef;
        k[(c + 1, c)] -= coef;
    }
    let scale: Vec<f64> = w.iter().zip(&d).map(|(w, d)| 1.0 / (w * d).sqrt()).collect();
    let b = DMatrix::from_fn(n + 1, n + 1, |i, j| scale[i] * k[(i, j)] * scale[j]);
    let mut ev: Vec<f64> = SymmetricEigen::new(b).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev[1])
}

/// Strict convexity of `f(t) = ∫ u_t dμ` along a (sub)geodesic.
///
/// `f'(t) = −∫ ġ_t dμ` pulled back to the moment coordinate of `u_t`, since at fixed `s`
/// the Legendre envelope gives `∂_t φ_t = −∂_t L_t` at the touching point.
pub fn strict_convexity_imu<M: MomentDensity + Sync + ?Sized>(
    path: &MetricPath,
    mu: &M,
) -> Result<StrictConvexityReport> {
    if path.kind() == PathKind::Generic {
        return Err(LabError::WrongPathKind {
            expected: "geodesic or subgeodesic".into(),
            found: path.kind().name().into(),
        });
    }
    let n = path.len();
    if n < 3 {
        return Err(LabError::PathTooShort { needed: 3, found: n });
    }
    let slope = |i: usize| {
        let u = path.slice(i);
        let rate = slice_rates(path, i);
        let d = pullback(mu, u);
        let f: Vec<f64> = u
            .nodes()
            .iter()
            .zip(&d)
            .map(|(&x, d)| -rate.gdot.eval(x) * d)
            .collect();
        u.grid().integrate(&f)
    };
    let gap = slope(n - 1) - slope(0);
    let a = UniformGrid::unit(4 * POINCARE_N)
        .nodes()
        .iter()
        .map(|&x| mu.moment_density(x))
        .fold(f64::INFINITY, f64::min);
    let c = path
        .slices()
        .iter()
        .flat_map(|p| p.nodal().rho0)
        .map(|r| 1.0 / r)
        .fold(0.0, f64::max);
    if !(c.is_finite() && c < MAX_RATIO) {
        return Err(LabError::UnboundedRatio { measured: c });
    }
    let delta = poincare_constant(mu, POINCARE_N)?;
    let distance = metric_distance(path.first(), path.last())?;
    Ok(StrictConvexityReport {
        gap,
        bound: delta * a / (c * c) * distance * distance,
        delta,
        a,
        c,
        distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::{constant_path, subgeodesic_make, weak_geodesic};
    use crate::potential::{GridMeasure, Coordinate};

    fn bump(n: usize, a: f64) -> SymplecticPotential {
        SymplecticPotential::from_fn(n, |x| a * x * x * (1.0 - x) * (1.0 - x) + 0.1 * x).unwrap()
    }

    #[test]
    fn twisted_functionals_vanish_on_constants() {
        let fs = SymplecticPotential::fubini_study(256);
        let alpha = TwistForm::multiple_of_reference(0.2, 64).unwrap();
        assert!(twisted_f_alpha(&fs.add_constant(0.7), &alpha).abs() < 1e-12);
        let mu = GridMeasure::lebesgue(64);
        assert!(twisted_f_mu(&fs.add_constant(-0.3), &mu).abs() < 1e-12);
        let u = bump(1024, 0.5);
        assert!((twisted_f_mu(&u.add_constant(0.5), &mu) - twisted_f_mu(&u, &mu)).abs() < 1e-6);
    }

    #[test]
    fn f_mu_is_convex_along_geodesics() {
        let mu = GridMeasure::from_fn(Coordinate::Moment, UniformGrid::unit(64), |x| 0.5 + x).unwrap();
        let p = weak_geodesic(&bump(512, -0.5), &bump(512, 0.9), 17).unwrap();
        let v: Vec<f64> = p.slices().iter().map(|u| twisted_f_mu(u, &mu)).collect();
        let scale = v.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        assert!(v.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] >= -1e-9 * scale));
    }

    #[test]
    fn reference_is_critical_for_multiples_of_omega0() {
        for c in [0.0, 0.2, 1.5] {
            let j = TwistedFunctional::new(TwistForm::multiple_of_reference(c, 32).unwrap(), 128);
            assert!(j.residual(&vec![0.0; 129]) < 1e-10, "c={c}");
        }
    }

    #[test]
    fn gradient_and_hessian_match_differences() {
        let alpha = TwistForm::new(UniformGrid::unit(16), (0..17).map(|i| 0.1 + 0.02 * i as f64).collect()).unwrap();
        let j = TwistedFunctional::new(alpha, 32);
        let g: Vec<f64> = j.grid().nodes().iter().map(|x| 0.3 * x * x * (1.0 - x) + 0.1 * x).collect();
        let grad = j.gradient(&g);
        let hess = j.hessian(&g);
        let e = 1e-7;
        for k in [0, 7, 16, 32] {
            let mut gp = g.clone();
            gp[k] += e;
            let mut gm = g.clone();
            gm[k] -= e;
            let fd = (j.value(&gp).unwrap() - j.value(&gm).unwrap()) / (2.0 * e);
            assert!((fd - grad[k]).abs() < 1e-6, "k={k}: {fd} vs {}", grad[k]);
            let (a, b) = (j.gradient(&gp), j.gradient(&gm));
            for m in 0..33 {
                assert!(((a[m] - b[m]) / (2.0 * e) - hess[(m, k)]).abs() < 1e-5 * (1.0 + hess[(m, k)].abs()));
            }
        }
    }

    #[test]
    fn discrete_twist_agrees_with_pullback_form() {
        let alpha = TwistForm::new(UniformGrid::unit(64), (0..65).map(|i| 0.3 + (i as f64 / 64.0).powi(2)).collect()).unwrap();
        let n = 512;
        let u = bump(n, 0.6);
        let j = TwistedFunctional::new(alpha.clone(), n);
        let j0 = TwistedFunctional::new(TwistForm::zero(8), n);
        let discrete = j.value(u.g_values()).unwrap() - j0.value(u.g_values()).unwrap();
        assert!((discrete - twisted_f_alpha(&u, &alpha)).abs() < 1e-4);
    }

    #[test]
    fn poincare_constant_of_the_reference() {
        let d = poincare_constant(&TwistForm::multiple_of_reference(1.0, 8).unwrap(), 256).unwrap();
        assert!((d - 2.0).abs() < 1e-3, "{d}");
    }

    #[test]
    fn strict_convexity_on_paths() {
        let omega0 = TwistForm::multiple_of_reference(1.0, 8).unwrap();
        let r = strict_convexity_imu(&constant_path(&bump(256, 0.4), 5).unwrap(), &omega0).unwrap();
        assert!(r.gap.abs() < 1e-12 && r.bound.abs() < 1e-12);
        let p = weak_geodesic(&SymplecticPotential::fubini_study(256), &bump(256, 0.8), 9).unwrap();
        let r = strict_convexity_imu(&p, &omega0).unwrap();
        assert!(r.gap > 0.0 && r.holds(1e-6), "{r:?}");
        let fs = SymplecticPotential::fubini_study(256);
        let p = subgeodesic_make(&fs, &bump(256, 0.5), 0.1, 9).unwrap();
        assert!(strict_convexity_imu(&p, &omega0).unwrap().holds(1e-6));
    }
}
