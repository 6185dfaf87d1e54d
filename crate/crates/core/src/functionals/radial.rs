//! The energies and the K-energy on the `s`-axis, as functions of a perturbation `u + t v`.
//!
//! Used as gradient oracles: `φ''` comes from the exact radial point of the potential
//! and `v, v''` analytically, so the only discretization is the trapezoid rule in `s`.

use serde::Serialize;

use crate::error::Result;
use crate::numerics::{logistic, UniformGrid};
use crate::potential::{
    pullback, scalar_curvature, MomentDensity, SymplecticPotential, DEFAULT_S_INTERVALS,
    DEFAULT_WINDOW, R_BAR,
};

/// A radial test direction: `s ↦ (v(s), v''(s))`. Must accept `s = ±∞`.
pub type Direction<'a> = &'a (dyn Fn(f64) -> (f64, f64) + Sync);

/// Default direction `0.3 sech s + 0.1 tanh s`.
pub fn default_direction(s: f64) -> (f64, f64) {
    let sech = 1.0 / s.cosh();
    let tanh = s.tanh();
    let v = 0.3 * sech + 0.1 * tanh;
    let v2 = 0.3 * sech * (1.0 - 2.0 * sech * sech) - 0.2 * sech * sech * tanh;
    (v, v2)
}

pub enum RadialFunctional<'a> {
    Energy,
    Twisted(&'a (dyn MomentDensity + Sync)),
    Mabuchi,
}

impl RadialFunctional<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            RadialFunctional::Energy => "energy",
            RadialFunctional::Twisted(_) => "twisted_energy",
            RadialFunctional::Mabuchi => "mabuchi",
        }
    }
}

/// `u`, `φ''`, `σ'` and quadrature weights on an `s`-grid.
pub struct RadialSamples {
    pub grid: UniformGrid,
    weights: Vec<f64>,
    s: Vec<f64>,
    u: Vec<f64>,
    curvature: Vec<f64>,
    reference: Vec<f64>,
}

impl RadialSamples {
    pub fn new(p: &SymplecticPotential, grid: UniformGrid) -> Self {
        let pts = p.radial_samples(&grid);
        let s = grid.nodes();
        Self {
            weights: grid.trapezoid_weights(),
            reference: s.iter().map(|&s| logistic(s) * logistic(-s)).collect(),
            u: pts.iter().map(|p| p.u).collect(),
            curvature: pts.iter().map(|p| p.curvature).collect(),
            s,
            grid,
        }
    }

    pub fn with_default_grid(p: &SymplecticPotential) -> Self {
        Self::new(p, UniformGrid::new(-DEFAULT_WINDOW, DEFAULT_WINDOW, DEFAULT_S_INTERVALS))
    }

    fn twist_density(&self, t: &dyn MomentDensity) -> Vec<f64> {
        self.s
            .iter()
            .zip(&self.reference)
            .map(|(&s, r)| t.moment_density(logistic(s)) * r)
            .collect()
    }

    /// The functional at `u + t v`.
    pub fn value(&self, f: &RadialFunctional, v: Direction, t: f64) -> f64 {
        let dir: Vec<(f64, f64)> = self.s.iter().map(|&s| v(s)).collect();
        let tau = match f {
            RadialFunctional::Twisted(m) => self.twist_density(*m),
            _ => Vec::new(),
        };
        (0..self.s.len())
            .map(|j| {
                let (v, v2) = dir[j];
                let u = self.u[j] + t * v;
                let c = self.curvature[j] + t * v2;
                let r = self.reference[j];
                let term = match f {
                    RadialFunctional::Energy => u * (c + r),
                    RadialFunctional::Twisted(_) => u * tau[j],
                    RadialFunctional::Mabuchi => u * (c - r) + c * (c / r).ln(),
                };
                self.weights[j] * term
            })
            .sum()
    }

    /// Exact `t`-derivative of [`value`](Self::value).
    pub fn derivative(&self, f: &RadialFunctional, v: Direction, t: f64) -> f64 {
        let tau = match f {
            RadialFunctional::Twisted(m) => self.twist_density(*m),
            _ => Vec::new(),
        };
        (0..self.s.len())
            .map(|j| {
                let (v, v2) = v(self.s[j]);
                let u = self.u[j] + t * v;
                let c = self.curvature[j] + t * v2;
                let r = self.reference[j];
                let term = match f {
                    RadialFunctional::Energy => v * (c + r) + u * v2,
                    RadialFunctional::Twisted(_) => v * tau[j],
                    RadialFunctional::Mabuchi => v * (c - r) + u * v2 + v2 * ((c / r).ln() + 1.0),
                };
                self.weights[j] * term
            })
            .sum()
    }
}

/// The first variation predicted by the pairing formulas, on the moment grid:
/// `2 ∫ v ω_u`, `∫ v T`, `∫ v (R̄ − S) ω_u`.
pub fn predicted_derivative(p: &SymplecticPotential, f: &RadialFunctional, v: Direction) -> Result<f64> {
    let x = p.nodes();
    let n = x.len() - 1;
    let vx: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let s = match i {
                0 => f64::NEG_INFINITY,
                i if i == n => f64::INFINITY,
                _ => p.l_prime(x),
            };
            v(s).0
        })
        .collect();
    let weight: Vec<f64> = match f {
        RadialFunctional::Energy => vec![2.0; n + 1],
        RadialFunctional::Twisted(m) => pullback(*m, p),
        RadialFunctional::Mabuchi => scalar_curvature(p)?.iter().map(|s| R_BAR - s).collect(),
    };
    let g: Vec<f64> = vx.iter().zip(&weight).map(|(v, w)| v * w).collect();
    Ok(p.grid().integrate(&g))
}

/// Step sizes of the central differences in [`gradient_check`].
pub const GRADIENT_STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, Serialize)]
pub struct GradientCheck {
    pub functional: String,
    pub steps: Vec<f64>,
    pub differences: Vec<f64>,
    /// Exact derivative of the quadrature at `t = 0`.
    pub derivative: f64,
    pub errors: Vec<f64>,
    /// Observed order of the central differences; `None` when they are exact to rounding.
    pub order: Option<f64>,
    /// [`predicted_derivative`].
    pub pairing: f64,
}

impl GradientCheck {
    pub fn pairing_gap(&self) -> f64 {
        (self.derivative - self.pairing).abs()
    }

    pub fn passes(&self, min_order: f64, pairing_tol: f64) -> bool {
        self.order.is_none_or(|o| o >= min_order) && self.pairing_gap() <= pairing_tol
    }
}

/// Central differences of `t ↦ F(u + t v)` against the exact derivative and the pairing.
pub fn gradient_check(
    p: &SymplecticPotential,
    f: &RadialFunctional,
    v: Direction,
    steps: &[f64],
) -> Result<GradientCheck> {
    let samples = RadialSamples::with_default_grid(p);
    let f0 = samples.value(f, v, 0.0);
    let derivative = samples.derivative(f, v, 0.0);
    let differences: Vec<f64> = steps
        .iter()
        .map(|&h| (samples.value(f, v, h) - samples.value(f, v, -h)) / (2.0 * h))
        .collect();
    let errors: Vec<f64> = differences.iter().map(|d| (d - derivative).abs()).collect();
    let scale = f0.abs() + derivative.abs() + 1.0;
    let rounding = steps
        .iter()
        .zip(&errors)
        .all(|(h, e)| *e <= 256.0 * f64::EPSILON * scale / h);
    let order = if rounding {
        None
    } else {
        let (lx, ly): (Vec<f64>, Vec<f64>) = steps
            .iter()
            .zip(&errors)
            .map(|(h, e)| (h.ln(), e.max(f64::MIN_POSITIVE).ln()))
            .unzip();
        Some(crate::numerics::fit_slope(&lx, &ly))
    };
    Ok(GradientCheck {
        functional: f.name().into(),
        steps: steps.to_vec(),
        differences,
        derivative,
        errors,
        order,
        pairing: predicted_derivative(p, f, v)?,
    })
}
