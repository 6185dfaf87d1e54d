use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::energy::{calabi_energy, mabuchi};
use super::FunctionalReport;
use crate::error::{LabError, Result};
use crate::geodesic::{hmae_residual, mabuchi_distance, MetricPath, PathKind};
use crate::potential::{scalar_curvature, SymplecticPotential, R_BAR};

/// Largest HMAE residual at which the second-variation identity is tested.
pub const HMAE_THRESHOLD: f64 = 1e-3;

/// `φ''` below this is unresolvable for `Ψ = log φ''`.
const CURVATURE_MASK: f64 = 1e-14;

/// Time step of the one-sided derivative in [`subslope_check`].
const SLOPE_DT: f64 = 1.0 / 1024.0;

/// K-energy along a weak geodesic.
pub fn convexity_scan(path: &MetricPath) -> Result<FunctionalReport> {
    if path.kind() != PathKind::Geodesic {
        return Err(LabError::WrongPathKind {
            expected: PathKind::Geodesic.name().into(),
            found: path.kind().name().into(),
        });
    }
    let values = path.slices().par_iter().map(mabuchi).collect::<Result<Vec<_>>>()?;
    Ok(FunctionalReport::new(path.t_nodes(), values))
}

#[derive(Debug, Clone, Serialize)]
pub struct SecondVariationRow {
    pub t: f64,
    /// Centered second difference of `𝓜(u_t)`.
    pub d2_mabuchi: f64,
    /// `∫ MD(Hess Ψ, Hess Φ) ds`.
    pub pairing: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SecondVariationReport {
    pub discrepancy: f64,
    pub min_integrand: f64,
    /// Moment nodes dropped because `φ''` vanishes there (the poles).
    pub masked: usize,
    pub rows: Vec<SecondVariationRow>,
}

impl SecondVariationReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "d2_mabuchi", "pairing"])?;
        for r in &self.rows {
            w.serialize((r.t, r.d2_mabuchi, r.pairing))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Compare `d²𝓜/dt²` with the integral of the reduced wedge `MD(Hess Ψ, Hess Φ)`.
///
/// On a geodesic `Hess Φ = Φ_ss e eᵀ` with `e = (−ġ', 1)`, so the pairing collapses to
/// `Φ_ss · ∂²_t Ψ` taken along the leaves `x = const`, i.e. along `(1, ġ')` in `(t, s)`.
/// With `ds = L'' dx` the integral becomes `Σ_x w_x ∂²_t log(1/L''_t)`.
pub fn second_variation_check(path: &MetricPath) -> Result<SecondVariationReport> {
    let nt = path.len();
    if nt < 3 {
        return Err(LabError::PathTooShort { needed: 3, found: nt });
    }
    let residual = hmae_residual(path)?;
    if residual > HMAE_THRESHOLD {
        return Err(LabError::Tolerance(format!(
            "HMAE residual {residual:.3e} exceeds {HMAE_THRESHOLD:.0e}; the identity is only tested on geodesics"
        )));
    }
    let m: Vec<f64> = path.slices().par_iter().map(mabuchi).collect::<Result<_>>()?;
    let q: Vec<Vec<f64>> = path.slices().par_iter().map(|p| p.nodal().q).collect();
    let dt = path.t_grid().step();
    let weights = path.first().grid().trapezoid_weights();
    let len = weights.len();
    let mask: Vec<bool> = (0..len).map(|j| q.iter().any(|q| q[j] < CURVATURE_MASK)).collect();
    let masked = mask.iter().filter(|m| **m).count();
    let mut rows = Vec::with_capacity(nt - 2);
    let mut min_integrand = f64::INFINITY;
    for i in 1..nt - 1 {
        let mut pairing = 0.0;
        for j in (0..len).filter(|&j| !mask[j]) {
            let d2 = (q[i + 1][j].ln() - 2.0 * q[i][j].ln() + q[i - 1][j].ln()) / (dt * dt);
            min_integrand = min_integrand.min(q[i][j] * d2);
            pairing += weights[j] * d2;
        }
        rows.push(SecondVariationRow {
            t: path.t_grid().node(i),
            d2_mabuchi: (m[i + 1] - 2.0 * m[i] + m[i - 1]) / (dt * dt),
            pairing,
        });
    }
    let discrepancy = rows
        .iter()
        .map(|r| (r.d2_mabuchi - r.pairing).abs())
        .fold(0.0, f64::max);
    Ok(SecondVariationReport {
        discrepancy,
        min_integrand,
        masked,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubslopeReport {
    /// `𝓜(u_1) − 𝓜(u_0)`.
    pub lhs: f64,
    /// `−d(u_0, u_1) √𝓒(u_0)`.
    pub rhs: f64,
    pub slack: f64,
    /// One-sided derivative of `𝓜` along the geodesic at `t = 0`.
    pub slope: f64,
    /// `∫ (R̄ − S) u̇_0 ω_{u_0}`.
    pub pairing: f64,
}

impl SubslopeReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.slack >= -tol && self.slope >= self.pairing - tol
    }
}

/// The sub-slope inequality `𝓜(u_1) − 𝓜(u_0) ≥ −d(u_0, u_1) √𝓒(u_0)`.
pub fn subslope_check(u0: &SymplecticPotential, u1: &SymplecticPotential) -> Result<SubslopeReport> {
    u0.same_grid(u1)?;
    let lhs = mabuchi(u1)? - mabuchi(u0)?;
    let d = mabuchi_distance(u0, u1)?;
    let rhs = -d * calabi_energy(u0)?.sqrt();
    let (g0, g1) = (u0.g_values(), u1.g_values());
    let at = |t: f64| -> Result<f64> {
        let g = g0.iter().zip(g1).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        mabuchi(&SymplecticPotential::with_window(g, u0.window())?)
    };
    let (f0, f1, f2) = (mabuchi(u0)?, at(SLOPE_DT)?, at(2.0 * SLOPE_DT)?);
    let slope = (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * SLOPE_DT);
    let s = scalar_curvature(u0)?;
    let f: Vec<f64> = (0..g0.len()).map(|i| (R_BAR - s[i]) * (g0[i] - g1[i])).collect();
    let pairing = u0.grid().integrate(&f);
    Ok(SubslopeReport {
        lhs,
        rhs,
        slack: lhs - rhs,
        slope,
        pairing,
    })
}
