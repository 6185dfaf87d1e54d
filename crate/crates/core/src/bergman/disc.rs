use std::f64::consts::PI;

use super::{BergmanDomain, BergmanMeasure};
use crate::error::{LabError, Result};
use crate::numerics::grid::{first_derivative, second_derivative};
use crate::numerics::quadrature::gk15_rule;
use crate::numerics::{logsumexp, CubicSpline, UniformGrid};

/// Laplacians below `−SLACK · (1 + max |Δφ|)` reject the weight.
const SUBHARMONIC_SLACK: f64 = 1e-8;

/// Smoothed `max(r², 1/4)`: quadratic in `ρ = r²` on `|ρ − 1/4| < δ`.
pub fn glued_disc_weight(r: f64, delta: f64) -> f64 {
    let rho = r * r;
    let a = 0.25 - delta;
    if rho <= a {
        0.25
    } else if rho >= 0.25 + delta {
        rho
    } else {
        0.25 + (rho - a) * (rho - a) / (4.0 * delta)
    }
}

/// Radial Laplacian `φ'' + φ'/r` by centered differences, `4(φ_1 − φ_0)/h²` at the origin
/// (even extension), one-sided at the rim.
fn nodal_laplacian(phi: &[f64], h: f64) -> Vec<f64> {
    let d1 = first_derivative(phi, h);
    let d2 = second_derivative(phi, h);
    (0..phi.len())
        .map(|i| {
            if i == 0 {
                4.0 * (phi[1] - phi[0]) / (h * h)
            } else {
                d2[i] + d1[i] / (i as f64 * h)
            }
        })
        .collect()
}

/// Bergman measure of `e^{−kφ}` on the unit disc with the basis `z^j`, `j = 0..k`.
///
/// `φ` is sampled on a uniform partition of the radius `[0, 1]`. The density is
/// `β_k = (1/k) Σ_j |z|^{2j} e^{−kφ} / ‖z^j‖²` against Lebesgue area, with
/// `‖z^j‖² = 2π ∫_0^1 r^{2j+1} e^{−kφ(r)} dr`; its mass over the disc is one.
pub fn disc_bergman(phi: &[f64], k: usize) -> Result<BergmanMeasure> {
    if phi.len() < 5 {
        return Err(LabError::Resolution(format!(
            "disc weight needs at least 4 radial intervals, got {}",
            phi.len().saturating_sub(1)
        )));
    }
    if k == 0 {
        return Err(LabError::InvalidArgument("Bergman level must be positive".into()));
    }
    if let Some(index) = phi.iter().position(|v| !v.is_finite()) {
        return Err(LabError::NonFinite { index });
    }
    let grid = UniformGrid::unit(phi.len() - 1);
    let sp = CubicSpline::new(grid, phi);
    let h = grid.step();
    let lap = nodal_laplacian(phi, h);
    let scale = 1.0 + lap.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(index) = lap.iter().position(|v| *v < -SUBHARMONIC_SLACK * scale) {
        return Err(LabError::NotSubharmonic { index });
    }

    let kf = k as f64;
    let (xi, wk, _) = gk15_rule();
    let mut log_r = Vec::with_capacity(15 * grid.intervals);
    let mut weight = Vec::with_capacity(15 * grid.intervals);
    let mut damp = Vec::with_capacity(15 * grid.intervals);
    for c in 0..grid.intervals {
        let mid = grid.node(c) + 0.5 * h;
        for m in 0..15 {
            let r = mid + 0.5 * h * xi[m];
            log_r.push(r.ln());
            weight.push(0.5 * h * wk[m]);
            damp.push(-kf * sp.eval(r));
        }
    }
    let log_norms: Vec<f64> = (0..k)
        .map(|j| {
            let lf: Vec<f64> = (0..log_r.len())
                .map(|m| (2 * j + 1) as f64 * log_r[m] + damp[m])
                .collect();
            let top = lf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = lf.iter().zip(&weight).map(|(v, w)| w * (v - top).exp()).sum();
            top + sum.ln() + (2.0 * PI).ln()
        })
        .collect();

    let density: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(phi)
        .map(|(&r, &p)| {
            let terms: Vec<f64> = if r == 0.0 {
                vec![-log_norms[0]]
            } else {
                let lr = r.ln();
                log_norms
                    .iter()
                    .enumerate()
                    .map(|(j, l)| 2.0 * j as f64 * lr - l)
                    .collect()
            };
            (logsumexp(&terms) - kf * p - kf.ln()).exp()
        })
        .collect();
    let radial: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(&density)
        .map(|(r, d)| 2.0 * PI * r * d)
        .collect();
    Ok(BergmanMeasure {
        k,
        domain: BergmanDomain::Disc,
        grid,
        mass: grid.integrate(&radial),
        density,
    })
}
