use serde::{Deserialize, Serialize};

use super::{RadialPotential, SymplecticPotential};
use crate::error::{LabError, Result};
use crate::numerics::grid::second_derivative;
use crate::numerics::{logistic, logit, UniformGrid};

/// Which axis a reduced density lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coordinate {
    /// The moment interval `[0, 1]`.
    #[serde(rename = "moment")]
    Moment,
    /// The log-radial axis `s = log|z|²`.
    #[serde(rename = "s-axis")]
    SAxis,
}

/// A nonnegative reduced density sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure {
    coordinate: Coordinate,
    grid: UniformGrid,
    density: Vec<f64>,
    mass: f64,
}

impl GridMeasure {
    pub fn new(coordinate: Coordinate, grid: UniformGrid, density: Vec<f64>) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(LabError::InvalidArgument(format!(
                "{} density samples for {} nodes",
                density.len(),
                grid.len()
            )));
        }
        if let Some(i) = density.iter().position(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(LabError::InvalidArgument(format!(
                "density must be finite and nonnegative (node {i}: {})",
                density[i]
            )));
        }
        let mass = grid.integrate(&density);
        Ok(Self {
            coordinate,
            grid,
            density,
            mass,
        })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(coordinate: Coordinate, grid: UniformGrid, f: F) -> Result<Self> {
        Self::new(coordinate, grid, grid.nodes().into_iter().map(f).collect())
    }

    /// Lebesgue measure on the moment interval: the area form of any metric.
    pub fn lebesgue(n: usize) -> Self {
        Self::new(Coordinate::Moment, UniformGrid::unit(n), vec![1.0; n + 1]).unwrap()
    }

    pub fn coordinate(&self) -> Coordinate {
        self.coordinate
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.grid.nodes()
    }

    /// Rescale to trapezoid mass one.
    pub fn normalized(&self) -> Result<Self> {
        if !(self.mass > 0.0) {
            return Err(LabError::InvalidArgument("cannot normalize a null measure".into()));
        }
        Self::new(
            self.coordinate,
            self.grid,
            self.density.iter().map(|d| d / self.mass).collect(),
        )
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.coordinate, self.grid, self.density.iter().map(|d| c * d).collect())
    }

    /// `∫ f dμ` for nodal samples `f`.
    pub fn pair(&self, f: &[f64]) -> f64 {
        let w = self.grid.trapezoid_weights();
        w.iter().zip(&self.density).zip(f).map(|((w, d), f)| w * d * f).sum()
    }

    /// Convex combination `(1 − s) self + s other` on a shared grid.
    pub fn mix(&self, other: &Self, s: f64) -> Result<Self> {
        if self.grid != other.grid || self.coordinate != other.coordinate {
            return Err(LabError::GridMismatch {
                left: self.grid.intervals,
                right: other.grid.intervals,
            });
        }
        let d = self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (1.0 - s) * a + s * b)
            .collect();
        Self::new(self.coordinate, self.grid, d)
    }
}

/// A fixed nonnegative (1,1)-form, stored as its density in the Fubini–Study moment coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistForm {
    grid: UniformGrid,
    density: Vec<f64>,
    mass: f64,
}

impl TwistForm {
    pub fn new(grid: UniformGrid, density: Vec<f64>) -> Result<Self> {
        let m = GridMeasure::new(Coordinate::Moment, grid, density)?;
        Ok(Self {
            grid,
            mass: m.mass,
            density: m.density,
        })
    }

    /// `c · ω_0`.
    pub fn multiple_of_reference(c: f64, n: usize) -> Result<Self> {
        Self::new(UniformGrid::unit(n), vec![c; n + 1])
    }

    pub fn zero(n: usize) -> Self {
        Self::multiple_of_reference(0.0, n).unwrap()
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Smallest density, so that `α ≥ A ω_0`.
    pub fn lower_bound(&self) -> f64 {
        self.density.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A measure on the sphere seen through its density in the Fubini–Study moment coordinate.
pub trait MomentDensity {
    fn moment_density(&self, x0: f64) -> f64;
    fn total_mass(&self) -> f64;
}

impl MomentDensity for GridMeasure {
    fn moment_density(&self, x0: f64) -> f64 {
        match self.coordinate {
            Coordinate::Moment => {
                let x = x0.clamp(self.grid.start, self.grid.end);
                self.grid.interpolate_cubic(&self.density, x).max(0.0)
            }
            Coordinate::SAxis => {
                let s = if x0 <= 0.0 {
                    self.grid.start
                } else if x0 >= 1.0 {
                    self.grid.end
                } else {
                    logit(x0).clamp(self.grid.start, self.grid.end)
                };
                let tau = self.grid.interpolate_cubic(&self.density, s).max(0.0);
                tau / (logistic(s) * logistic(-s))
            }
        }
    }

    fn total_mass(&self) -> f64 {
        self.mass
    }
}

impl MomentDensity for TwistForm {
    fn moment_density(&self, x0: f64) -> f64 {
        self.grid.interpolate_cubic(&self.density, x0.clamp(0.0, 1.0)).max(0.0)
    }

    fn total_mass(&self) -> f64 {
        self.mass
    }
}

/// Density against `dx` on the moment grid of `u`.
pub fn pullback<M: MomentDensity + ?Sized>(mu: &M, u: &SymplecticPotential) -> Vec<f64> {
    let geo = u.nodal();
    geo.x0
        .iter()
        .zip(&geo.rho0)
        .map(|(&x0, &r)| mu.moment_density(x0) * r)
        .collect()
}

/// Area form of `p` as an `s`-axis density `φ''(s)`.
pub fn moment_measure(p: &RadialPotential) -> GridMeasure {
    let d2 = second_derivative(p.values(), p.grid().step());
    let density = d2.into_iter().map(|v| v.max(0.0)).collect();
    GridMeasure::new(Coordinate::SAxis, *p.grid(), density).expect("clamped density is admissible")
}
