//! JSON documents for potentials and measures.
//!
//! Floats are written in shortest round-trip form, so `from_json(to_json(x))`
//! reproduces every sample bit for bit.

use serde::{Deserialize, Serialize};

use super::measure::{Coordinate, GridMeasure};
use super::{RadialPotential, SymplecticPotential};
use crate::error::{LabError, Result};
use crate::numerics::UniformGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Symplectic,
    Radial,
}

/// `{grid_n, window, representation, values}`.
///
/// For the symplectic form `values` are the samples of `g` on `[0, 1]`; for the
/// radial form they are `φ` on `[−window, window]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialDocument {
    pub grid_n: usize,
    pub window: f64,
    pub representation: Representation,
    pub values: Vec<f64>,
}

impl PotentialDocument {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn check_len(&self) -> Result<()> {
        if self.values.len() != self.grid_n + 1 {
            return Err(LabError::InvalidArgument(format!(
                "grid_n = {} but {} values",
                self.grid_n,
                self.values.len()
            )));
        }
        Ok(())
    }

    pub fn to_symplectic(&self) -> Result<SymplecticPotential> {
        self.check_len()?;
        match self.representation {
            Representation::Symplectic => SymplecticPotential::with_window(self.values.clone(), self.window),
            Representation::Radial => Err(LabError::InvalidArgument(
                "document holds a radial potential".into(),
            )),
        }
    }

    pub fn to_radial(&self) -> Result<RadialPotential> {
        self.check_len()?;
        match self.representation {
            Representation::Radial => RadialPotential::new(
                UniformGrid::new(-self.window, self.window, self.grid_n),
                self.values.clone(),
            ),
            Representation::Symplectic => Err(LabError::InvalidArgument(
                "document holds a symplectic potential".into(),
            )),
        }
    }
}

impl From<&SymplecticPotential> for PotentialDocument {
    fn from(p: &SymplecticPotential) -> Self {
        Self {
            grid_n: p.n(),
            window: p.window(),
            representation: Representation::Symplectic,
            values: p.g_values().to_vec(),
        }
    }
}

impl From<&RadialPotential> for PotentialDocument {
    fn from(p: &RadialPotential) -> Self {
        Self {
            grid_n: p.grid().intervals,
            window: p.window(),
            representation: Representation::Radial,
            values: p.values().to_vec(),
        }
    }
}

/// `{coordinate, nodes, density}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureDocument {
    pub coordinate: Coordinate,
    pub nodes: Vec<f64>,
    pub density: Vec<f64>,
}

impl MeasureDocument {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_measure(&self) -> Result<GridMeasure> {
        let n = self.nodes.len();
        if n < 2 {
            return Err(LabError::InvalidArgument("a measure needs at least two nodes".into()));
        }
        let grid = UniformGrid::new(self.nodes[0], self.nodes[n - 1], n - 1);
        if grid.nodes() != self.nodes {
            return Err(LabError::InvalidArgument("measure nodes are not uniform".into()));
        }
        GridMeasure::new(self.coordinate, grid, self.density.clone())
    }
}

impl From<&GridMeasure> for MeasureDocument {
    fn from(m: &GridMeasure) -> Self {
        Self {
            coordinate: m.coordinate(),
            nodes: m.nodes(),
            density: m.density().to_vec(),
        }
    }
}
