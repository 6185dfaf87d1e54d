//! S¹-invariant Kähler potentials on the Riemann sphere.
//!
//! A metric in the class of mass one is encoded either by its radial potential
//! `φ(s)`, `s = log|z|²`, or by the Legendre dual `L(x) = sup_s (x s − φ(s))` on the
//! moment interval `[0, 1]`. The dual splits as
//! `L(x) = x log x + (1 − x) log(1 − x) + g(x)` with `g` smooth up to the boundary;
//! `g ≡ 0` is Fubini–Study, `φ_FS(s) = log(1 + e^s)`.
//!
//! Measures are stored by their S¹-reduced densities. In `s` the area form of `φ`
//! is `φ''(s) ds`, whose pushforward under `x = φ'(s)` is Lebesgue measure.

mod curvature;
mod legendre;
mod measure;
mod radial;
mod serial;
mod symplectic;

pub use curvature::{ricci_reference, scalar_curvature, scalar_curvature_unchecked};
pub use legendre::{inverse_legendre, legendre, legendre_samples};
pub use measure::{moment_measure, pullback, Coordinate, GridMeasure, MomentDensity, TwistForm};
pub use radial::RadialPotential;
pub use serial::{MeasureDocument, PotentialDocument, Representation};
pub use symplectic::{NodalGeometry, RadialPoint, SymplecticPotential};

/// Default number of intervals of the moment grid.
pub const DEFAULT_GRID_N: usize = 1024;
/// Default half-width `S` of the radial window `[−S, S]`.
pub const DEFAULT_WINDOW: f64 = 40.0;
/// Default number of intervals of the radial grid (`Δs = 0.01` on `[−40, 40]`).
pub const DEFAULT_S_INTERVALS: usize = 8000;
/// Second differences above `−CONVEXITY_SLACK` count as convex.
pub const CONVEXITY_SLACK: f64 = 1e-12;
/// Average scalar curvature of the model class.
pub const R_BAR: f64 = 2.0;

/// The singular part `x log x + (1 − x) log(1 − x)` of every symplectic potential.
#[inline]
pub fn guillemin(x: f64) -> f64 {
    crate::numerics::xlogx(x) + crate::numerics::xlogx(1.0 - x)
}
