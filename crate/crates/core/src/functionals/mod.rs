//! Scalar functionals on potentials and their behaviour along paths.
//!
//! Everything is evaluated in the moment coordinate `x` of the potential itself,
//! where `ω_u` is Lebesgue measure and `ω_0` has density `ρ_0` (see
//! [`NodalGeometry`](crate::potential::NodalGeometry)). Two further forms serve as
//! independent oracles: the symplectic form [`donaldson`] and the radial forms in
//! [`radial`], which work on the `s`-axis with exact `φ''`.

mod energy;
mod entropy;
pub mod radial;
mod scans;
mod twisted;

use std::io::Write;

use serde::Serialize;

pub use energy::{calabi_energy, donaldson, energy_e, energy_et, mabuchi, mabuchi_terms, MabuchiTerms};
pub use entropy::{
    entropy, entropy_checked, entropy_legendre_gap, entropy_truncated, log_density, DENSITY_FLOOR,
};
pub use scans::{
    convexity_scan, second_variation_check, HMAE_THRESHOLD, subslope_check, SecondVariationReport, SubslopeReport,
};
pub use twisted::{
    poincare_constant, strict_convexity_imu, twisted_f_alpha, twisted_f_mu, StrictConvexityReport,
    TwistedFunctional,
};

use crate::error::Result;

/// Relative slack for discrete convexity along paths.
pub const CONVEXITY_TOL: f64 = 1e-6;

/// Samples of a functional along a path with their raw differences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalReport {
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `f_{i+1} − f_i`.
    pub first_diffs: Vec<f64>,
    /// `f_{i+2} − 2 f_{i+1} + f_i`.
    pub second_diffs: Vec<f64>,
    pub min_second_diff: f64,
}

impl FunctionalReport {
    pub fn new(t_grid: Vec<f64>, values: Vec<f64>) -> Self {
        let first_diffs = values.windows(2).map(|w| w[1] - w[0]).collect();
        let second_diffs: Vec<f64> = values.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
        let min_second_diff = second_diffs.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            t_grid,
            values,
            first_diffs,
            second_diffs,
            min_second_diff,
        }
    }

    /// `max |f|`, floored at one.
    pub fn scale(&self) -> f64 {
        self.values.iter().fold(1.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_second_diff(&self) -> f64 {
        self.second_diffs.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_convex(&self, rel_tol: f64) -> bool {
        self.second_diffs.is_empty() || self.min_second_diff >= -rel_tol * self.scale()
    }

    /// CSV with columns `t,value,d1,d2`; `d1` is forward, `d2` centered, blank where undefined.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "value", "d1", "d2"])?;
        let n = self.values.len();
        for i in 0..n {
            let d1 = self.first_diffs.get(i).copied();
            let d2 = if i >= 1 && i + 1 < n {
                Some(self.second_diffs[i - 1])
            } else {
                None
            };
            w.serialize((self.t_grid[i], self.values[i], d1, d2))?;
        }
        w.flush()?;
        Ok(())
    }
}
