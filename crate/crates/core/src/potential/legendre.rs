//! Numerical Legendre duality between radial and symplectic potentials.

use super::radial::{self, RadialPotential};
use super::{guillemin, SymplecticPotential};
use crate::error::{LabError, Result};
use crate::numerics::{CubicSpline, UniformGrid};

/// Captured moment mass below `1 − MASS_SLACK` means the window is too narrow.
const MASS_SLACK: f64 = 1e-3;

/// `L(x) = sup_s (x s − φ(s))` on a moment grid with `n` intervals.
pub fn legendre(p: &RadialPotential, n: usize) -> Result<SymplecticPotential> {
    legendre_samples(p.grid(), p.values(), n)
}

/// Legendre transform of raw samples; checks convexity first.
pub fn legendre_samples(grid: &UniformGrid, phi: &[f64], n: usize) -> Result<SymplecticPotential> {
    radial::validate(grid, phi)?;
    let window = grid.end.max(-grid.start);
    let spline = CubicSpline::new(*grid, phi);
    let xs = UniformGrid::unit(n).nodes();
    let s_nodes = grid.nodes();
    let last = s_nodes.len() - 1;
    let mut g = vec![0.0; n + 1];
    // slopes run from ≈0 to ≈1, so the edge values are the envelope limits
    g[0] = -phi[0];
    g[n] = grid.end - phi[last];
    let mut j = 0usize;
    for i in 1..n {
        let x = xs[i];
        // argmax of x s_j − φ_j is nondecreasing in x
        while j < last && x * s_nodes[j + 1] - phi[j + 1] >= x * s_nodes[j] - phi[j] {
            j += 1;
        }
        let lo = s_nodes[j.saturating_sub(1)];
        let hi = s_nodes[(j + 1).min(last)];
        let s_star = refine_stationary(&spline, x, lo, hi, s_nodes[j]);
        let l = x * s_star - spline.eval(s_star);
        g[i] = l - guillemin(x);
    }
    SymplecticPotential::with_window(g, window)
}

/// Root of `φ'(s) = x` in `[lo, hi]` by safeguarded Newton; falls back to `guess`.
fn refine_stationary(spline: &CubicSpline, x: f64, lo: f64, hi: f64, guess: f64) -> f64 {
    let f = |s: f64| spline.derivative(s) - x;
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa > 0.0 || fb < 0.0 {
        return guess;
    }
    let mut s = guess;
    for _ in 0..60 {
        let fs = f(s);
        if fs > 0.0 {
            b = s;
        } else {
            a = s;
        }
        let d = spline.second_derivative(s);
        let mut next = if d > 0.0 { s - fs / d } else { f64::NAN };
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if (next - s).abs() < 1e-14 * (1.0 + s.abs()) {
            return next;
        }
        s = next;
    }
    s
}

/// `φ(s) = sup_x (x s − L(x))` on `[−window, window]` with `intervals` cells.
pub fn inverse_legendre(
    l: &SymplecticPotential,
    window: f64,
    intervals: usize,
) -> Result<RadialPotential> {
    if !(window > 0.0) {
        return Err(LabError::InvalidArgument(format!("window must be positive, got {window}")));
    }
    let captured = l.radial_point(window).x - l.radial_point(-window).x;
    if captured < 1.0 - MASS_SLACK {
        return Err(LabError::WindowTooSmall { window, captured });
    }
    let grid = UniformGrid::new(-window, window, intervals);
    let phi = grid.nodes().iter().map(|&s| l.radial_point(s).phi).collect();
    RadialPotential::new(grid, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::softplus;

    #[test]
    fn fubini_study_dualizes_to_zero() {
        let p = RadialPotential::fubini_study(40.0, 8000);
        let l = legendre(&p, 256).unwrap();
        let err = l.g_values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-9, "max |g| = {err}");
    }

    #[test]
    fn constant_shift_dualizes_to_minus_constant() {
        let p = RadialPotential::fubini_study(40.0, 8000).add_constant(0.7);
        let l = legendre(&p, 128).unwrap();
        assert!(l.g_values().iter().all(|v| (v + 0.7).abs() < 1e-9));
    }

    #[test]
    fn non_convex_samples_report_index() {
        let grid = UniformGrid::new(-10.0, 10.0, 100);
        let mut phi: Vec<f64> = grid.nodes().iter().map(|&s| softplus(s)).collect();
        phi[40] += 0.05;
        match legendre_samples(&grid, &phi, 64) {
            Err(LabError::NonConvex { index, .. }) => assert!((39..=41).contains(&index)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn narrow_window_is_diagnosed() {
        let fs = SymplecticPotential::fubini_study(64);
        assert!(matches!(
            inverse_legendre(&fs, 3.0, 100),
            Err(LabError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn inverse_of_fubini_study_is_softplus() {
        let fs = SymplecticPotential::fubini_study(64);
        let p = inverse_legendre(&fs, 40.0, 800).unwrap();
        for (s, v) in p.grid().nodes().iter().zip(p.values()) {
            if s.abs() <= 10.0 {
                assert!((v - softplus(*s)).abs() < 1e-12);
            }
        }
    }
}
