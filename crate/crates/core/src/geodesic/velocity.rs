use rayon::prelude::*;

use super::{MetricPath, PathKind};
use crate::error::{LabError, Result};
use crate::numerics::UniformGrid;
use crate::potential::SymplecticPotential;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Start,
    Finish,
}

/// Time step used by [`mabuchi_distance`] for its one-sided differences.
const DISTANCE_DT: f64 = 1.0 / 1024.0;

/// Values of `Φ(t_k, ·)` at the points whose moment coordinate on `anchor` is `x_i`.
/// At the poles the radial potential is replaced by its limit `−g(0)`, resp. `s − g(1)`.
fn fixed_s_samples(anchor: &SymplecticPotential, others: &[&SymplecticPotential]) -> Vec<Vec<f64>> {
    let x = anchor.nodes();
    let n = x.len() - 1;
    let s: Vec<f64> = (1..n).map(|i| anchor.l_prime(x[i])).collect();
    others
        .par_iter()
        .map(|p| {
            let g = p.g_values();
            let mut v = Vec::with_capacity(n + 1);
            v.push(-g[0]);
            v.extend(s.iter().map(|&s| p.radial_point(s).phi));
            v.push(-g[n]);
            v
        })
        .collect()
}

/// One-sided velocity at an endpoint, first-order differences with one Richardson step.
///
/// The result is `du_t/dt` at fixed `s`, sampled on the moment grid of the endpoint.
pub fn endpoint_velocity(path: &MetricPath, end: End) -> Result<Vec<f64>> {
    let n = path.len();
    if n < 2 {
        return Err(LabError::PathTooShort { needed: 2, found: n });
    }
    let dt = path.t_grid().step();
    let idx: Vec<usize> = match end {
        End::Start => (0..n.min(3)).collect(),
        End::Finish => (0..n.min(3)).map(|k| n - 1 - k).collect(),
    };
    let sign = if end == End::Start { 1.0 } else { -1.0 };
    let slices: Vec<&SymplecticPotential> = idx.iter().map(|&k| path.slice(k)).collect();
    let f = fixed_s_samples(slices[0], &slices);
    let len = f[0].len();
    Ok((0..len)
        .map(|i| {
            let d1 = sign * (f[1][i] - f[0][i]) / dt;
            if f.len() >= 3 {
                let d2 = sign * (f[2][i] - f[0][i]) / (2.0 * dt);
                2.0 * d1 - d2
            } else {
                d1
            }
        })
        .collect())
}

/// Velocity at slice `i` by the most accurate centered or one-sided stencil available.
pub fn slice_velocity(path: &MetricPath, i: usize) -> Result<Vec<f64>> {
    let n = path.len();
    if n < 2 {
        return Err(LabError::PathTooShort { needed: 2, found: n });
    }
    let dt = path.t_grid().step();
    // (offsets, weights) with the derivative equal to Σ w f(i + o) / dt
    let (offsets, weights): (Vec<isize>, Vec<f64>) = if i >= 2 && i + 2 < n {
        (vec![-2, -1, 1, 2], vec![1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0])
    } else if i >= 1 && i + 1 < n {
        (vec![-1, 1], vec![-0.5, 0.5])
    } else if n >= 4 {
        let w = vec![-11.0 / 6.0, 3.0, -1.5, 1.0 / 3.0];
        if i == 0 {
            (vec![0, 1, 2, 3], w)
        } else {
            (vec![0, -1, -2, -3], w.into_iter().map(|v| -v).collect())
        }
    } else {
        let end = if i == 0 { End::Start } else { End::Finish };
        return endpoint_velocity(path, end);
    };
    let slices: Vec<&SymplecticPotential> = offsets
        .iter()
        .map(|&o| path.slice((i as isize + o) as usize))
        .collect();
    let f = fixed_s_samples(path.slice(i), &slices);
    let len = f[0].len();
    Ok((0..len)
        .map(|m| weights.iter().zip(&f).map(|(w, f)| w * f[m]).sum::<f64>() / dt)
        .collect())
}

/// `∫ u̇_t² ω_{u_t}` at every node of the path.
pub fn path_speeds(path: &MetricPath) -> Result<Vec<f64>> {
    (0..path.len())
        .map(|i| {
            let v = slice_velocity(path, i)?;
            let sq: Vec<f64> = v.iter().map(|v| v * v).collect();
            Ok(path.slice(i).grid().integrate(&sq))
        })
        .collect()
}

/// Initial velocity of the geodesic from `u0` to `u1`, on the moment grid of `u0`.
fn initial_velocity(u0: &SymplecticPotential, u1: &SymplecticPotential) -> Result<Vec<f64>> {
    u0.same_grid(u1)?;
    let (g0, g1) = (u0.g_values(), u1.g_values());
    let slices = (0..3)
        .map(|k| {
            if k == 0 {
                return Ok(u0.clone());
            }
            let t = k as f64 * DISTANCE_DT;
            let g = g0.iter().zip(g1).map(|(a, b)| (1.0 - t) * a + t * b).collect();
            SymplecticPotential::with_window(g, u0.window())
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = UniformGrid::new(0.0, 2.0 * DISTANCE_DT, 2);
    let path = MetricPath::new(grid, slices, PathKind::Geodesic)?;
    // velocity of the short path is (t-rescaled) velocity of the unit-time geodesic
    endpoint_velocity(&path, End::Start)
}

/// Length of the weak geodesic: `sqrt ∫ u̇_0² ω_{u_0}`.
pub fn mabuchi_distance(u0: &SymplecticPotential, u1: &SymplecticPotential) -> Result<f64> {
    let v = initial_velocity(u0, u1)?;
    let sq: Vec<f64> = v.iter().map(|v| v * v).collect();
    Ok(u0.grid().integrate(&sq).sqrt())
}

/// Distance between the metrics (potentials modulo constants).
pub fn metric_distance(u0: &SymplecticPotential, u1: &SymplecticPotential) -> Result<f64> {
    let v = initial_velocity(u0, u1)?;
    let grid = u0.grid();
    let mean = grid.integrate(&v);
    let sq: Vec<f64> = v.iter().map(|v| (v - mean) * (v - mean)).collect();
    Ok(grid.integrate(&sq).sqrt())
}
