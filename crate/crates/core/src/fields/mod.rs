//! Holomorphic gradient fields of the model, their hamiltonians and invariant pairings,
//! the Lichnerowicz operator, and the uniqueness experiments built on them.
//!
//! The holomorphic fields that preserve the radial sector are `V = c z∂/∂z`. The flow
//! of `Re V` translates `s` by `2ct`; `Im V` rotates and fixes every radial datum, so the
//! whole radial space is `Im V`-invariant. Against `ω_u` the hamiltonian of `V`, read in
//! the moment coordinate of `u`, is `c(x − 1/2)`.

mod lichnerowicz;
mod orbit;
mod perturbation;
mod twisted_csc;

use serde::Serialize;

pub use lichnerowicz::{lichnerowicz, solve_linearized, LinearOperatorOnFunctions, LinearizedSolution};
pub use orbit::{orbit_minimize, orbit_point, orbit_ray, OrbitMinimum};
pub use perturbation::{linearized_data, perturbation_order_check, LinearizedData, PerturbationReport};
pub use twisted_csc::{
    sup_distance_mod_affine, sup_distance_mod_constants, twisted_csc_solve, twisted_csc_solve_with,
    DescentOptions, DescentOutcome, DescentStep,
};

use crate::error::Result;
use crate::functionals::FunctionalReport;
use crate::geodesic::{slice_rates, MetricPath};
use crate::numerics::grid::{cumulative_trapezoid, first_derivative, second_derivative};
use crate::numerics::{logistic, UniformGrid};
use crate::potential::{scalar_curvature, SymplecticPotential, R_BAR};

/// `V = c z∂/∂z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientField {
    pub name: String,
    pub scale: f64,
}

impl GradientField {
    /// `z∂/∂z`.
    pub fn model() -> Self {
        Self {
            name: "z d/dz".into(),
            scale: 1.0,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            name: format!("{a} * ({})", self.name),
            scale: a * self.scale,
        }
    }

    /// `c(x − 1/2)` on a moment grid.
    pub fn hamiltonian_in_x(&self, grid: &UniformGrid) -> Vec<f64> {
        grid.nodes().iter().map(|x| self.scale * (x - 0.5)).collect()
    }
}

/// `h^V_{ω_u}` on the moment grid of `u`, from the contraction `i_V ω_u = ∂̄h`.
///
/// Along the axis `dh/ds = c φ''(s)`, so in the moment coordinate
/// `dh/dx = c φ''(L'(x)) L''(x)`; this is integrated from the pole and the constant is
/// fixed by `∫ h ω_u = 0`.
pub fn hamiltonian(v: &GradientField, u: &SymplecticPotential) -> Vec<f64> {
    let x = u.nodes();
    let n = x.len() - 1;
    let rate: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if i == 0 || i == n {
                // φ'' L'' → 1 at the poles
                return v.scale;
            }
            let s = u.l_prime(x);
            v.scale * u.radial_point(s).curvature * u.l_second(x)
        })
        .collect();
    let h = cumulative_trapezoid(&rate, u.grid().step());
    let mean = u.grid().integrate(&h);
    h.iter().map(|h| h - mean).collect()
}

/// `h^V_{ω_0} + V(u)` on the moment grid of `u`, with `V(u) = c ∂_s u` by centered
/// differences at the radial point of each node.
pub fn hamiltonian_from_reference(v: &GradientField, u: &SymplecticPotential) -> Vec<f64> {
    const DS: f64 = 1e-4;
    let x = u.nodes();
    let n = x.len() - 1;
    x.iter()
        .enumerate()
        .map(|(i, &x)| {
            if i == 0 {
                return -0.5 * v.scale;
            }
            if i == n {
                return 0.5 * v.scale;
            }
            let s = u.l_prime(x);
            let du = (u.radial_point(s + DS).u - u.radial_point(s - DS).u) / (2.0 * DS);
            v.scale * (logistic(s) - 0.5) + v.scale * du
        })
        .collect()
}

/// `max |h_contraction − (h_{ω_0} + V(u))|`.
pub fn hamiltonian_residual(v: &GradientField, u: &SymplecticPotential) -> f64 {
    hamiltonian(v, u)
        .iter()
        .zip(hamiltonian_from_reference(v, u))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Both sides of `∫ v dd^c u = −∫ ∇_ω v(u) ω` in the reduced `s`-picture: `∫ v u'' ds`
/// against `−∫ (v' u' / φ'') φ'' ds`, with `ω = φ'' ds` from `metric`.
pub fn ibp_sides(u: &[f64], v: &[f64], metric: &SymplecticPotential, grid: &UniformGrid) -> (f64, f64) {
    assert_eq!(u.len(), grid.len());
    assert_eq!(v.len(), grid.len());
    let h = grid.step();
    let (du, dv, d2u) = (first_derivative(u, h), first_derivative(v, h), second_derivative(u, h));
    let curv: Vec<f64> = grid.nodes().iter().map(|&s| metric.radial_point(s).curvature).collect();
    let lhs: Vec<f64> = v.iter().zip(&d2u).map(|(v, d)| v * d).collect();
    let rhs: Vec<f64> = (0..u.len())
        .map(|i| {
            let c = curv[i].max(f64::MIN_POSITIVE);
            -(dv[i] * du[i] / c) * c
        })
        .collect();
    (grid.integrate(&lhs), grid.integrate(&rhs))
}

/// `|lhs − rhs|` of [`ibp_sides`].
pub fn ibp_identity_check(u: &[f64], v: &[f64], metric: &SymplecticPotential, grid: &UniformGrid) -> f64 {
    let (l, r) = ibp_sides(u, v, metric, grid);
    (l - r).abs()
}

/// `⟨V, W⟩_{ω_u} = ∫ h^V h^W ω_u`.
pub fn inner_product(v: &GradientField, w: &GradientField, u: &SymplecticPotential) -> f64 {
    let (a, b) = (hamiltonian(v, u), hamiltonian(w, u));
    let f: Vec<f64> = a.iter().zip(&b).map(|(a, b)| a * b).collect();
    u.grid().integrate(&f)
}

/// `∫ (S − R̄) h^V ω_u`.
pub fn futaki(v: &GradientField, u: &SymplecticPotential) -> Result<f64> {
    let s = scalar_curvature(u)?;
    let h = hamiltonian(v, u);
    let f: Vec<f64> = s.iter().zip(&h).map(|(s, h)| (s - R_BAR) * h).collect();
    Ok(u.grid().integrate(&f))
}

/// `𝓔_V` along a path, integrated in `t` from its derivative `∫ u̇ h^V ω_u`, normalized
/// to vanish at the first node. At fixed moment `x` the potential moves by `u̇ = −ġ`.
pub fn energy_ev(path: &MetricPath, v: &GradientField) -> Result<FunctionalReport> {
    if path.len() < 2 {
        return Err(crate::error::LabError::PathTooShort { needed: 2, found: path.len() });
    }
    let rates: Vec<f64> = (0..path.len())
        .map(|i| {
            let u = path.slice(i);
            let gdot = slice_rates(path, i).gdot;
            let h = hamiltonian(v, u);
            let f: Vec<f64> = u.nodes().iter().zip(&h).map(|(&x, h)| -gdot.eval(x) * h).collect();
            u.grid().integrate(&f)
        })
        .collect();
    let values = cumulative_trapezoid(&rates, path.t_grid().step());
    Ok(FunctionalReport::new(path.t_nodes(), values))
}
