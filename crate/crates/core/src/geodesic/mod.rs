//! Weak geodesics, subgeodesics and the Mabuchi distance in the reduced model.
//!
//! Time is `t = Re τ` on a strip, so a path of radial potentials is a function
//! `Φ(t, s)` of two real variables and plurisubharmonicity is convexity of `Φ`.
//! In symplectic coordinates the geodesic equation linearizes: `g_t` is affine in `t`.

mod hessian;
mod velocity;

use serde::{Deserialize, Serialize};

pub use hessian::{hmae_report, hmae_residual, path_hessian, HessianField, HmaeReport, ScanWindow};
pub(crate) use hessian::{layers, slice_rates};
pub use velocity::{
    endpoint_velocity, mabuchi_distance, metric_distance, path_speeds, slice_velocity, End,
};

use crate::error::{LabError, Result};
use crate::numerics::UniformGrid;
use crate::potential::{
    inverse_legendre, legendre, PotentialDocument, RadialPotential, SymplecticPotential,
    DEFAULT_S_INTERVALS,
};

/// Default number of `t` nodes on a path.
pub const DEFAULT_T_NODES: usize = 65;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Geodesic,
    Subgeodesic,
    Generic,
}

impl PathKind {
    pub fn name(self) -> &'static str {
        match self {
            PathKind::Geodesic => "geodesic",
            PathKind::Subgeodesic => "subgeodesic",
            PathKind::Generic => "generic",
        }
    }
}

/// A one-parameter family of symplectic potentials over a uniform `t`-grid.
#[derive(Debug, Clone)]
pub struct MetricPath {
    t_grid: UniformGrid,
    potentials: Vec<SymplecticPotential>,
    kind: PathKind,
}

impl MetricPath {
    pub fn new(t_grid: UniformGrid, potentials: Vec<SymplecticPotential>, kind: PathKind) -> Result<Self> {
        if potentials.len() != t_grid.len() {
            return Err(LabError::InvalidArgument(format!(
                "{} slices for {} t-nodes",
                potentials.len(),
                t_grid.len()
            )));
        }
        for p in &potentials[1..] {
            potentials[0].same_grid(p)?;
        }
        if kind == PathKind::Geodesic {
            check_affine(&potentials)?;
        }
        Ok(Self {
            t_grid,
            potentials,
            kind,
        })
    }

    pub fn t_grid(&self) -> &UniformGrid {
        &self.t_grid
    }

    pub fn t_nodes(&self) -> Vec<f64> {
        self.t_grid.nodes()
    }

    pub fn len(&self) -> usize {
        self.potentials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.potentials.is_empty()
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn slices(&self) -> &[SymplecticPotential] {
        &self.potentials
    }

    pub fn slice(&self, i: usize) -> &SymplecticPotential {
        &self.potentials[i]
    }

    pub fn first(&self) -> &SymplecticPotential {
        &self.potentials[0]
    }

    pub fn last(&self) -> &SymplecticPotential {
        &self.potentials[self.potentials.len() - 1]
    }

    /// Moment-grid intervals shared by all slices.
    pub fn n(&self) -> usize {
        self.potentials[0].n()
    }

    pub fn to_document(&self) -> PathDocument {
        PathDocument {
            t_grid: self.t_grid.nodes(),
            kind: self.kind,
            slices: self.potentials.iter().map(PotentialDocument::from).collect(),
        }
    }

    pub fn from_document(doc: &PathDocument) -> Result<Self> {
        let n = doc.t_grid.len();
        if n < 2 {
            return Err(LabError::PathTooShort { needed: 2, found: n });
        }
        let grid = UniformGrid::new(doc.t_grid[0], doc.t_grid[n - 1], n - 1);
        let slices = doc
            .slices
            .iter()
            .map(PotentialDocument::to_symplectic)
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, slices, doc.kind)
    }
}

/// `{t_grid, kind, slices}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDocument {
    pub t_grid: Vec<f64>,
    pub kind: PathKind,
    pub slices: Vec<PotentialDocument>,
}

fn check_affine(potentials: &[SymplecticPotential]) -> Result<()> {
    let scale = potentials
        .iter()
        .flat_map(|p| p.g_values().iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    for w in potentials.windows(3) {
        let (a, b, c) = (w[0].g_values(), w[1].g_values(), w[2].g_values());
        for i in 0..a.len() {
            let d2 = a[i] - 2.0 * b[i] + c[i];
            if d2.abs() > 1e-12 * scale {
                return Err(LabError::InvalidArgument(format!(
                    "geodesic slices are not affine in t at node {i} (second difference {d2:.3e})"
                )));
            }
        }
    }
    Ok(())
}

fn t_grid(t_nodes: usize) -> Result<UniformGrid> {
    if t_nodes < 2 {
        return Err(LabError::PathTooShort {
            needed: 2,
            found: t_nodes,
        });
    }
    Ok(UniformGrid::unit(t_nodes - 1))
}

/// The weak geodesic: `g_t = (1 − t) g_0 + t g_1` node by node.
pub fn weak_geodesic(u0: &SymplecticPotential, u1: &SymplecticPotential, t_nodes: usize) -> Result<MetricPath> {
    u0.same_grid(u1)?;
    let grid = t_grid(t_nodes)?;
    let (g0, g1) = (u0.g_values(), u1.g_values());
    let slices = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            if k == 0 {
                return Ok(u0.clone());
            }
            if k == grid.intervals {
                return Ok(u1.clone());
            }
            let g = g0.iter().zip(g1).map(|(a, b)| (1.0 - t) * a + t * b).collect();
            SymplecticPotential::with_window(g, u0.window())
        })
        .collect::<Result<Vec<_>>>()?;
    MetricPath::new(grid, slices, PathKind::Geodesic)
}

/// Profile of the subgeodesic bulge; vanishes at the poles so boundary values stay affine.
pub fn bulge_profile(x: f64) -> f64 {
    4.0 * x * (1.0 - x)
}

/// Subgeodesic `g_t = (1 − t) g_0 + t g_1 + bulge · t(1 − t) · 4x(1 − x)`.
///
/// Concavity of `g_t` in `t` makes `Φ(t, s)` jointly convex. Large bulges break convexity
/// of the middle slices and are rejected, as are paths whose Hessian scan finds a
/// negative eigenvalue.
pub fn subgeodesic_make(
    u0: &SymplecticPotential,
    u1: &SymplecticPotential,
    bulge: f64,
    t_nodes: usize,
) -> Result<MetricPath> {
    if !(bulge >= 0.0) {
        return Err(LabError::InvalidArgument(format!("bulge must be nonnegative, got {bulge}")));
    }
    u0.same_grid(u1)?;
    let grid = t_grid(t_nodes)?;
    let x = u0.nodes();
    let (g0, g1) = (u0.g_values(), u1.g_values());
    let slices = grid
        .nodes()
        .iter()
        .map(|&t| {
            let g = (0..x.len())
                .map(|i| (1.0 - t) * g0[i] + t * g1[i] + bulge * t * (1.0 - t) * bulge_profile(x[i]))
                .collect();
            SymplecticPotential::with_window(g, u0.window())
        })
        .collect::<Result<Vec<_>>>()?;
    let kind = if bulge == 0.0 {
        PathKind::Geodesic
    } else {
        PathKind::Subgeodesic
    };
    let path = MetricPath::new(grid, slices, kind)?;
    if t_nodes >= 3 {
        let field = path_hessian(&path, &ScanWindow::for_grid(u0.n()))?;
        let (min_eig, t, s) = field.min_eigenvalue();
        if min_eig < -SUBGEODESIC_PSD_TOL {
            return Err(LabError::NotPsd { t, s, min_eig });
        }
    }
    Ok(path)
}

/// Smallest admissible Hessian eigenvalue on a subgeodesic.
pub const SUBGEODESIC_PSD_TOL: f64 = 1e-10;

/// The path that is affine in the Kähler potential, `φ_t = (1 − t) φ_0 + t φ_1`.
/// Not a geodesic unless the endpoints differ by a constant.
pub fn affine_potential_path(u0: &SymplecticPotential, u1: &SymplecticPotential, t_nodes: usize) -> Result<MetricPath> {
    u0.same_grid(u1)?;
    let grid = t_grid(t_nodes)?;
    let window = u0.window();
    let p0 = inverse_legendre(u0, window, DEFAULT_S_INTERVALS)?;
    let p1 = inverse_legendre(u1, window, DEFAULT_S_INTERVALS)?;
    let slices = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            if k == 0 {
                return Ok(u0.clone());
            }
            if k == grid.intervals {
                return Ok(u1.clone());
            }
            let phi = p0.values().iter().zip(p1.values()).map(|(a, b)| (1.0 - t) * a + t * b).collect();
            legendre(&RadialPotential::new(*p0.grid(), phi)?, u0.n())
        })
        .collect::<Result<Vec<_>>>()?;
    MetricPath::new(grid, slices, PathKind::Generic)
}

/// Constant path at `u`.
pub fn constant_path(u: &SymplecticPotential, t_nodes: usize) -> Result<MetricPath> {
    weak_geodesic(u, u, t_nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(n: usize, a: f64) -> SymplecticPotential {
        SymplecticPotential::from_fn(n, |x| a * (std::f64::consts::PI * x).sin().powi(2)).unwrap()
    }

    #[test]
    fn endpoints_are_exact() {
        let (a, b) = (SymplecticPotential::fubini_study(64), bump(64, 0.12));
        let p = weak_geodesic(&a, &b, 9).unwrap();
        assert_eq!(p.first().g_values(), a.g_values());
        assert_eq!(p.last().g_values(), b.g_values());
        assert_eq!(p.kind(), PathKind::Geodesic);
    }

    #[test]
    fn constants_flow_linearly() {
        let a = bump(64, 0.1);
        let b = a.add_constant(0.5);
        let p = weak_geodesic(&a, &b, 5).unwrap();
        for (t, s) in p.t_nodes().iter().zip(p.slices()) {
            for (x, y) in s.g_values().iter().zip(a.g_values()) {
                assert!((x - (y - 0.5 * t)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mismatched_grids_are_refused() {
        let e = weak_geodesic(&bump(64, 0.1), &bump(32, 0.1), 5).unwrap_err();
        assert!(matches!(e, LabError::GridMismatch { .. }));
    }

    #[test]
    fn zero_bulge_is_the_geodesic() {
        let (a, b) = (SymplecticPotential::fubini_study(64), bump(64, 0.12));
        let p = subgeodesic_make(&a, &b, 0.0, 9).unwrap();
        let q = weak_geodesic(&a, &b, 9).unwrap();
        for (x, y) in p.slices().iter().zip(q.slices()) {
            for (u, v) in x.g_values().iter().zip(y.g_values()) {
                assert!((u - v).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn large_bulge_breaks_slice_convexity() {
        let fs = SymplecticPotential::fubini_study(64);
        let e = subgeodesic_make(&fs, &fs, 12.0, 9).unwrap_err();
        assert!(matches!(e, LabError::NonConvex { .. }), "{e:?}");
    }

    #[test]
    fn path_document_round_trip() {
        let p = weak_geodesic(&SymplecticPotential::fubini_study(16), &bump(16, 0.1), 5).unwrap();
        let text = serde_json::to_string(&p.to_document()).unwrap();
        let doc: PathDocument = serde_json::from_str(&text).unwrap();
        let back = MetricPath::from_document(&doc).unwrap();
        assert_eq!(back.to_document(), p.to_document());
    }
}
