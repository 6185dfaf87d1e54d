use serde::Serialize;

use super::GradientField;
use crate::error::{LabError, Result};
use crate::functionals::twisted_f_mu;
use crate::geodesic::{MetricPath, PathKind};
use crate::numerics::{golden_section, UniformGrid};
use crate::potential::{pullback, MomentDensity, SymplecticPotential};

/// Samples of `t ↦ 𝓕_μ(u_t)` used to bracket the minimum.
const BRACKET_SAMPLES: usize = 33;
/// Largest half-width tried when the sampled minimum sits at an end.
const MAX_HALF_WIDTH: f64 = 8.0;
const SEARCH_TOL: f64 = 1e-9;
const SECANT_STEPS: usize = 8;
/// Second differences below `−CONVEXITY_SLACK · (1 + max |𝓕|)` mean the profile is not convex.
const CONVEXITY_SLACK: f64 = 1e-10;

/// `exp(t Re V)^* u_0`: the flow translates `s` by `2ct`, which in the moment coordinate
/// subtracts `2ct(x − 1/2)` from `g`.
pub fn orbit_point(u0: &SymplecticPotential, v: &GradientField, t: f64) -> Result<SymplecticPotential> {
    let c = v.scale;
    let g = u0
        .nodes()
        .iter()
        .zip(u0.g_values())
        .map(|(x, g)| g - 2.0 * t * c * (x - 0.5))
        .collect();
    SymplecticPotential::with_window(g, u0.window())
}

/// The orbit through `u0` on `t ∈ [−t_max, t_max]`, a geodesic line.
pub fn orbit_ray(u0: &SymplecticPotential, v: &GradientField, t_max: f64, t_nodes: usize) -> Result<MetricPath> {
    if t_nodes < 2 {
        return Err(LabError::PathTooShort { needed: 2, found: t_nodes });
    }
    if !(t_max > 0.0) {
        return Err(LabError::InvalidArgument(format!("orbit half-length must be positive, got {t_max}")));
    }
    let grid = UniformGrid::new(-t_max, t_max, t_nodes - 1);
    let slices = grid
        .nodes()
        .iter()
        .map(|&t| orbit_point(u0, v, t))
        .collect::<Result<Vec<_>>>()?;
    MetricPath::new(grid, slices, PathKind::Geodesic)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitMinimum {
    pub t: f64,
    pub value: f64,
    /// `∫ (x − 1/2)(μ_u − μ(X)) dx` at the minimizer; vanishes at a critical point.
    pub pairing: f64,
    /// Smallest second difference of the sampled profile.
    pub min_second_diff: f64,
}

/// Minimize `𝓕_μ` over the orbit of `z∂/∂z` through `u0`.
pub fn orbit_minimize<M: MomentDensity + ?Sized>(u0: &SymplecticPotential, mu: &M) -> Result<OrbitMinimum> {
    let v = GradientField::model();
    let f = |t: f64| orbit_point(u0, &v, t).map(|u| twisted_f_mu(&u, mu));
    let mut half = 1.0;
    let (grid, values) = loop {
        let grid = UniformGrid::new(-half, half, BRACKET_SAMPLES - 1);
        let values = grid.nodes().iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
        let arg = argmin(&values);
        if (arg != 0 && arg != values.len() - 1) || half >= MAX_HALF_WIDTH {
            break (grid, values);
        }
        half *= 2.0;
    };
    let scale = 1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min_second_diff = values
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .fold(f64::INFINITY, f64::min);
    if min_second_diff < -CONVEXITY_SLACK * scale {
        return Err(LabError::Tolerance(format!(
            "twisted functional is not convex along the orbit (second difference {min_second_diff:.3e})"
        )));
    }
    let arg = argmin(&values);
    if arg == 0 || arg == values.len() - 1 {
        return Err(LabError::Tolerance(format!(
            "no interior minimum on the orbit within |t| <= {MAX_HALF_WIDTH}"
        )));
    }
    let lo = grid.node(arg - 1);
    let hi = grid.node(arg + 1);
    let mut t = golden_section(|t| f(t).unwrap_or(f64::INFINITY), lo, hi, SEARCH_TOL);
    // the pairing is the derivative along the orbit; golden section leaves it at about √ε
    let mut prev = (t + 1e-6, pairing(u0, mu, t + 1e-6)?);
    let mut cur = (t, pairing(u0, mu, t)?);
    for _ in 0..SECANT_STEPS {
        let denom = cur.1 - prev.1;
        if cur.1 == 0.0 || denom == 0.0 {
            break;
        }
        let next = (cur.0 - cur.1 * (cur.0 - prev.0) / denom).clamp(lo, hi);
        prev = cur;
        cur = (next, pairing(u0, mu, next)?);
        if cur.1.abs() >= prev.1.abs() {
            cur = prev;
            break;
        }
    }
    t = cur.0;
    let u = orbit_point(u0, &v, t)?;
    Ok(OrbitMinimum {
        t,
        value: twisted_f_mu(&u, mu),
        pairing: cur.1,
        min_second_diff,
    })
}

fn pairing<M: MomentDensity + ?Sized>(u0: &SymplecticPotential, mu: &M, t: f64) -> Result<f64> {
    let u = orbit_point(u0, &GradientField::model(), t)?;
    let d = pullback(mu, &u);
    let mass = mu.total_mass();
    let integrand: Vec<f64> = u.nodes().iter().zip(&d).map(|(x, d)| (x - 0.5) * (d - mass)).collect();
    Ok(u.grid().integrate(&integrand))
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}
