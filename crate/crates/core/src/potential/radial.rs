use super::{CONVEXITY_SLACK, DEFAULT_S_INTERVALS, DEFAULT_WINDOW};
use crate::error::{LabError, Result};
use crate::numerics::{softplus, UniformGrid};

/// Convex radial potential `φ(s)` sampled on a symmetric window `[−S, S]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPotential {
    grid: UniformGrid,
    phi: Vec<f64>,
}

/// Slopes up to this far outside `[0, 1]` are attributed to rounding.
const SLOPE_SLACK: f64 = 1e-9;

impl RadialPotential {
    pub fn new(grid: UniformGrid, phi: Vec<f64>) -> Result<Self> {
        if grid.len() != phi.len() {
            return Err(LabError::InvalidArgument(format!(
                "{} samples for a grid of {} nodes",
                phi.len(),
                grid.len()
            )));
        }
        validate(&grid, &phi)?;
        Ok(Self { grid, phi })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(window: f64, intervals: usize, f: F) -> Result<Self> {
        let grid = UniformGrid::new(-window, window, intervals);
        let phi = grid.nodes().into_iter().map(f).collect();
        Self::new(grid, phi)
    }

    pub fn fubini_study(window: f64, intervals: usize) -> Self {
        Self::from_fn(window, intervals, softplus).expect("log(1 + e^s) is admissible")
    }

    pub fn reference() -> Self {
        Self::fubini_study(DEFAULT_WINDOW, DEFAULT_S_INTERVALS)
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.phi
    }

    pub fn window(&self) -> f64 {
        self.grid.end
    }

    /// Limits of `φ'` at `∓∞`.
    pub fn slope_limits(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    pub fn add_constant(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            phi: self.phi.iter().map(|p| p + c).collect(),
        }
    }

    /// `φ − log(1 + e^s)` at the nodes.
    pub fn relative_potential(&self) -> Vec<f64> {
        self.grid
            .nodes()
            .iter()
            .zip(&self.phi)
            .map(|(&s, p)| p - softplus(s))
            .collect()
    }
}

pub(crate) fn validate(grid: &UniformGrid, phi: &[f64]) -> Result<()> {
    if let Some(index) = phi.iter().position(|v| !v.is_finite()) {
        return Err(LabError::NonFinite { index });
    }
    for i in 1..phi.len() - 1 {
        let d2 = phi[i + 1] - 2.0 * phi[i] + phi[i - 1];
        if d2 < -CONVEXITY_SLACK {
            return Err(LabError::NonConvex { index: i, value: d2 });
        }
    }
    let h = grid.step();
    let inner = 0.5 * grid.end.max(-grid.start);
    for i in 0..phi.len() - 1 {
        let slope = (phi[i + 1] - phi[i]) / h;
        let mid = grid.node(i) + 0.5 * h;
        let strict = mid.abs() <= inner;
        let ok = if strict {
            slope > 0.0 && slope < 1.0
        } else {
            slope > -SLOPE_SLACK && slope < 1.0 + SLOPE_SLACK
        };
        if !ok {
            return Err(LabError::SlopeOutOfRange { index: i, slope });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fubini_study_is_admissible() {
        let p = RadialPotential::fubini_study(40.0, 8000);
        assert_eq!(p.values().len(), 8001);
        assert!(p.relative_potential().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn rejects_slopes_outside_unit_interval() {
        let e = RadialPotential::from_fn(10.0, 200, |s| 2.0 * softplus(s)).unwrap_err();
        assert!(matches!(e, LabError::SlopeOutOfRange { .. }));
    }

    #[test]
    fn rejects_non_convex() {
        let e = RadialPotential::from_fn(10.0, 200, |s| softplus(s) + 0.3 * (2.0 * s).sin() * (-s * s).exp())
            .unwrap_err();
        assert!(matches!(e, LabError::NonConvex { .. }), "{e:?}");
    }
}
