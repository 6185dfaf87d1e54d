use nalgebra::DVector;
use serde::Serialize;

use super::solve_linearized;
use crate::error::{LabError, Result};
use crate::functionals::TwistedFunctional;
use crate::numerics::{fit_slope, golden_section};
use crate::potential::{SymplecticPotential, TwistForm};

/// `Σ |∇J_0|` at the base point above this means it is not a csc potential.
const BASE_TOL: f64 = 1e-8;
const ORBIT_HALF_WIDTH: f64 = 6.0;
const ORBIT_TOL: f64 = 1e-10;
const NEWTON_STEPS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub s: Vec<f64>,
    /// `Σ |∇J_{sμ}(g* − s v₀)|`.
    pub with_correction: Vec<f64>,
    /// `Σ |∇J_{sμ}(g*)|`.
    pub without_correction: Vec<f64>,
    /// Log-log slope of `with_correction`; two when the first-order correction is right.
    pub slope: f64,
    /// Log-log slope of `without_correction`; one.
    pub control_slope: f64,
    /// Orbit parameter of the base point `g*`.
    pub orbit_t: f64,
    /// `Σ |∇J_0|` at `u0`.
    pub base_norm: f64,
    /// `Σ |∇J_0(g*)|`: zero in exact arithmetic, otherwise the rounding floor of the
    /// second differences of `g*`, below which `with_correction` cannot fall.
    pub rounding_floor: f64,
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|v| v.abs()).sum()
}

fn scaled(mu: &TwistForm, s: f64) -> Result<TwistForm> {
    TwistForm::new(*mu.grid(), mu.density().iter().map(|d| d * s).collect())
}

/// The base point `g*` of the orbit of `z∂/∂z` through the csc potential `u0` at which
/// the twist part of the discrete functional is stationary, and the right-hand side
/// `ν = ∇(J_μ − J_0)(g*)` of the linearized equation, as a density against `dx`.
pub fn linearized_data(u0: &SymplecticPotential, mu: &TwistForm) -> Result<LinearizedData> {
    let n = u0.n();
    let j0 = TwistedFunctional::new(TwistForm::zero(n), n);
    let jmu = TwistedFunctional::new(mu.clone(), n);
    let g0 = u0.g_values();
    let base_norm = l1(&j0.gradient(g0));
    if base_norm > BASE_TOL {
        return Err(LabError::Tolerance(format!(
            "base potential is not csc: gradient norm {base_norm:.3e}"
        )));
    }
    let x = u0.nodes();
    let along = |t: f64| -> Vec<f64> { g0.iter().zip(&x).map(|(g, x)| g - 2.0 * t * (x - 0.5)).collect() };
    let twist = |t: f64| {
        let g = along(t);
        match (jmu.value(&g), j0.value(&g)) {
            (Some(a), Some(b)) => a - b,
            _ => f64::INFINITY,
        }
    };
    let mut orbit_t = golden_section(twist, -ORBIT_HALF_WIDTH, ORBIT_HALF_WIDTH, ORBIT_TOL);
    // golden section only resolves the minimum to about √ε; polish on the derivative
    let dir: Vec<f64> = x.iter().map(|x| -2.0 * (x - 0.5)).collect();
    for _ in 0..NEWTON_STEPS {
        let g = along(orbit_t);
        let (gm, gz) = (jmu.gradient(&g), j0.gradient(&g));
        let slope: f64 = (0..n + 1).map(|i| (gm[i] - gz[i]) * dir[i]).sum();
        let (hm, hz) = (jmu.hessian(&g), j0.hessian(&g));
        let d = DVector::from_column_slice(&dir);
        let curvature = d.dot(&((hm - hz) * &d));
        if !(curvature > 0.0) {
            break;
        }
        orbit_t -= slope / curvature;
    }
    let base = SymplecticPotential::with_window(along(orbit_t), u0.window())?;
    let w = base.grid().trapezoid_weights();
    let (gm, gz) = (jmu.gradient(base.g_values()), j0.gradient(base.g_values()));
    let rounding_floor = l1(&gz);
    let nu = gm.iter().zip(&gz).zip(&w).map(|((a, b), w)| (a - b) / w).collect();
    Ok(LinearizedData {
        base,
        nu,
        orbit_t,
        base_norm,
        rounding_floor,
    })
}

#[derive(Debug, Clone)]
pub struct LinearizedData {
    /// `g*`.
    pub base: SymplecticPotential,
    pub nu: Vec<f64>,
    pub orbit_t: f64,
    /// `Σ |∇J_0|` at `u0`.
    pub base_norm: f64,
    /// `Σ |∇J_0(g*)|`.
    pub rounding_floor: f64,
}

/// Order of the first-order correction to a csc potential under a small twist `sμ`.
///
/// From [`linearized_data`], the correction `v₀` solves `𝔇*𝔇 v₀ = ν`, and then `g* − s v₀`
/// leaves a gradient of size `O(s²)` against `O(s)` for `g*` alone.
pub fn perturbation_order_check(u0: &SymplecticPotential, mu: &TwistForm, s_list: &[f64]) -> Result<PerturbationReport> {
    if s_list.len() < 2 || s_list.iter().any(|s| !(*s > 0.0)) {
        return Err(LabError::InvalidArgument(
            "perturbation check needs at least two positive twist sizes".into(),
        ));
    }
    let n = u0.n();
    let data = linearized_data(u0, mu)?;
    let v0 = solve_linearized(&data.base, &data.nu)?.v;
    let g_star = data.base.g_values();

    let mut with_correction = Vec::with_capacity(s_list.len());
    let mut without_correction = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let js = TwistedFunctional::new(scaled(mu, s)?, n);
        let corrected: Vec<f64> = g_star.iter().zip(&v0).map(|(g, v)| g - s * v).collect();
        with_correction.push(l1(&js.gradient(&corrected)));
        without_correction.push(l1(&js.gradient(g_star)));
    }
    let log_s: Vec<f64> = s_list.iter().map(|s| s.ln()).collect();
    let logs = |v: &[f64]| -> Vec<f64> { v.iter().map(|v| v.ln()).collect() };
    Ok(PerturbationReport {
        s: s_list.to_vec(),
        slope: fit_slope(&log_s, &logs(&with_correction)),
        control_slope: fit_slope(&log_s, &logs(&without_correction)),
        with_correction,
        without_correction,
        orbit_t: data.orbit_t,
        base_norm: data.base_norm,
        rounding_floor: data.rounding_floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::UniformGrid;

    fn skew() -> TwistForm {
        let grid = UniformGrid::unit(64);
        TwistForm::new(grid, grid.nodes().iter().map(|x| 0.5 + x * x).collect()).unwrap()
    }

    #[test]
    fn correction_is_second_order() {
        let u0 = SymplecticPotential::fubini_study(128);
        let r = perturbation_order_check(&u0, &skew(), &[1e-1, 1e-2, 1e-3]).unwrap();
        assert!((r.slope - 2.0).abs() < 0.1, "{r:?}");
        assert!((r.control_slope - 1.0).abs() < 0.05, "{r:?}");
        assert!(r.with_correction.iter().zip(&r.without_correction).all(|(a, b)| a < b));
    }

    #[test]
    fn linearized_data_is_compatible() {
        let d = linearized_data(&SymplecticPotential::fubini_study(128), &skew()).unwrap();
        assert!(d.rounding_floor < 1e-8);
        let sol = solve_linearized(&d.base, &d.nu).unwrap();
        assert!(sol.residual < 1e-8, "{}", sol.residual);
    }

    #[test]
    fn non_csc_base_is_refused() {
        let u = SymplecticPotential::from_fn(64, |x| 0.5 * x * x * (1.0 - x) * (1.0 - x)).unwrap();
        assert!(matches!(
            perturbation_order_check(&u, &skew(), &[1e-3, 2e-3]),
            Err(LabError::Tolerance(_))
        ));
        let fs = SymplecticPotential::fubini_study(64);
        assert!(perturbation_order_check(&fs, &skew(), &[1e-3]).is_err());
    }
}
