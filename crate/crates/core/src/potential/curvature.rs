use super::measure::{Coordinate, GridMeasure};
use super::{SymplecticPotential, DEFAULT_S_INTERVALS, DEFAULT_WINDOW};
use crate::error::{LabError, Result};
use crate::numerics::grid::second_derivative;
use crate::numerics::{logistic, UniformGrid};

/// Fourth differences of `1/L''` above this fraction of its peak mean the grid is too coarse.
const OSCILLATION_RATIO: f64 = 0.05;

/// Scalar curvature `S = −(1/L'')''` at every node of the moment grid.
pub fn scalar_curvature(l: &SymplecticPotential) -> Result<Vec<f64>> {
    if l.n() < 16 {
        return Err(LabError::Resolution(format!(
            "scalar curvature needs at least 16 intervals, got {}",
            l.n()
        )));
    }
    let q = l.nodal().q;
    let peak = q.iter().copied().fold(0.0, f64::max);
    let fourth = q
        .windows(5)
        .map(|w| (w[4] - 4.0 * w[3] + 6.0 * w[2] - 4.0 * w[1] + w[0]).abs())
        .fold(0.0, f64::max);
    if fourth > OSCILLATION_RATIO * peak {
        return Err(LabError::Resolution(format!(
            "fourth differences of 1/L'' reach {fourth:.3e} against a peak of {peak:.3e}"
        )));
    }
    Ok(scalar_curvature_unchecked(l))
}

/// As [`scalar_curvature`] without the resolution check.
pub fn scalar_curvature_unchecked(l: &SymplecticPotential) -> Vec<f64> {
    let q = l.nodal().q;
    second_derivative(&q, l.grid().step())
        .into_iter()
        .map(|v| -v)
        .collect()
}

/// `Ric(ω_FS) = 2 ω_FS` as an `s`-axis density.
pub fn ricci_reference() -> GridMeasure {
    let grid = UniformGrid::new(-DEFAULT_WINDOW, DEFAULT_WINDOW, DEFAULT_S_INTERVALS);
    GridMeasure::from_fn(Coordinate::SAxis, grid, |s| 2.0 * logistic(s) * logistic(-s))
        .expect("positive density")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::MomentDensity;

    #[test]
    fn fubini_study_is_constant_two() {
        let s = scalar_curvature(&SymplecticPotential::fubini_study(256)).unwrap();
        assert!(s.iter().all(|v| (v - 2.0).abs() < 1e-6));
    }

    #[test]
    fn mean_is_two_for_a_bump() {
        let l = SymplecticPotential::from_fn(1024, |x| 0.05 * x * x * (1.0 - x) * (1.0 - x)).unwrap();
        let s = scalar_curvature(&l).unwrap();
        let mean = l.grid().integrate(&s);
        assert!((mean - 2.0).abs() < 1e-4, "mean {mean}");
        let spread = s.iter().fold(0.0f64, |m, v| m.max((v - 2.0).abs()));
        assert!(spread > 1e-3);
    }

    #[test]
    fn coarse_oscillation_is_rejected() {
        let l = SymplecticPotential::from_fn(32, |x| {
            0.0005 * (x * 32.0 * std::f64::consts::PI).cos() + 0.5 * x * x
        })
        .unwrap();
        assert!(matches!(scalar_curvature(&l), Err(LabError::Resolution(_))));
    }

    #[test]
    fn ricci_reference_mass_two() {
        let r = ricci_reference();
        assert!((r.mass() - 2.0).abs() < 1e-8);
        assert!((r.moment_density(0.4) - 2.0).abs() < 1e-6);
    }
}
