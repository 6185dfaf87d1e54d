use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use super::MetricPath;
use crate::error::{LabError, Result};
use crate::numerics::{min_eig_2x2, CubicSpline, UniformGrid};

/// The `s`-range and resolution of a Hessian scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanWindow {
    pub half_width: f64,
    pub intervals: usize,
}

impl ScanWindow {
    pub const DEFAULT_HALF_WIDTH: f64 = 10.0;

    /// Spacing proportional to `1/N`, so that refining the moment grid refines the scan.
    pub fn for_grid(n: usize) -> Self {
        Self {
            half_width: Self::DEFAULT_HALF_WIDTH,
            intervals: (n / 2).max(64),
        }
    }

    pub fn grid(&self) -> UniformGrid {
        UniformGrid::new(-self.half_width, self.half_width, self.intervals)
    }
}

/// Symmetric 2×2 matrices `[[tt, ts], [ts, ss]]` at interior `(t, s)` nodes.
#[derive(Debug, Clone, Default)]
pub struct HessianField {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    pub tt: Vec<f64>,
    pub ts: Vec<f64>,
    pub ss: Vec<f64>,
}

/// Boundary layers skipped in a direction with `len` nodes.
pub(crate) fn layers(len: usize) -> usize {
    if len >= 5 {
        2
    } else {
        1
    }
}

impl HessianField {
    /// Centered second differences of row-major samples `values[i * ns + j] = f(t_i, s_j)`.
    pub fn finite_difference(t_grid: &UniformGrid, s_grid: &UniformGrid, values: &[f64]) -> Result<Self> {
        let (nt, ns) = (t_grid.len(), s_grid.len());
        if nt < 3 {
            return Err(LabError::PathTooShort { needed: 3, found: nt });
        }
        assert_eq!(values.len(), nt * ns);
        let (ht, hs) = (t_grid.step(), s_grid.step());
        let f = |i: usize, j: usize| values[i * ns + j];
        let (lt, ls) = (layers(nt), layers(ns));
        let mut out = Self::default();
        for i in lt..nt - lt {
            for j in ls..ns - ls {
                out.t.push(t_grid.node(i));
                out.s.push(s_grid.node(j));
                out.tt.push((f(i + 1, j) - 2.0 * f(i, j) + f(i - 1, j)) / (ht * ht));
                out.ss.push((f(i, j + 1) - 2.0 * f(i, j) + f(i, j - 1)) / (hs * hs));
                out.ts.push(
                    (f(i + 1, j + 1) - f(i + 1, j - 1) - f(i - 1, j + 1) + f(i - 1, j - 1)) / (4.0 * ht * hs),
                );
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn det(&self, k: usize) -> f64 {
        self.tt[k] * self.ss[k] - self.ts[k] * self.ts[k]
    }

    pub fn min_eig(&self, k: usize) -> f64 {
        min_eig_2x2(self.tt[k], self.ts[k], self.ss[k])
    }

    /// Smallest eigenvalue over the field with its location.
    pub fn min_eigenvalue(&self) -> (f64, f64, f64) {
        (0..self.len())
            .map(|k| (self.min_eig(k), self.t[k], self.s[k]))
            .fold((f64::INFINITY, f64::NAN, f64::NAN), |a, b| if b.0 < a.0 { b } else { a })
    }

    /// Largest `|det|` over the field with its location.
    pub fn max_abs_det(&self) -> (f64, f64, f64) {
        (0..self.len())
            .map(|k| (self.det(k).abs(), self.t[k], self.s[k]))
            .fold((0.0, f64::NAN, f64::NAN), |a, b| if b.0 > a.0 { b } else { a })
    }

    /// `A + c B` on identical node sets.
    pub fn add_scaled(&self, other: &Self, c: f64) -> Self {
        let comb = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + c * y).collect();
        Self {
            t: self.t.clone(),
            s: self.s.clone(),
            tt: comb(&self.tt, &other.tt),
            ts: comb(&self.ts, &other.ts),
            ss: comb(&self.ss, &other.ss),
        }
    }

    /// Reduced wedge pairing `A_tt B_ss + A_ss B_tt − 2 A_ts B_ts` node by node.
    pub fn mixed_discriminant(&self, other: &Self) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                self.tt[k] * other.ss[k] + self.ss[k] * other.tt[k] - 2.0 * self.ts[k] * other.ts[k]
            })
            .collect()
    }

    /// CSV with columns `t,s,det,min_eig`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "s", "det", "min_eig"])?;
        for k in 0..self.len() {
            w.serialize((self.t[k], self.s[k], self.det(k), self.min_eig(k)))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples of the radial potential `Φ(t_i, s_j)` of a path, row-major.
pub(crate) fn radial_field(path: &MetricPath, s_grid: &UniformGrid) -> Vec<f64> {
    let s = s_grid.nodes();
    path.slices()
        .par_iter()
        .flat_map_iter(|p| s.iter().map(move |&s| p.radial_point(s).phi).collect::<Vec<_>>())
        .collect()
}

/// Residual scan of the homogeneous Monge–Ampère equation.
#[derive(Debug, Clone)]
pub struct HmaeReport {
    pub residual: f64,
    pub worst_t: f64,
    pub worst_s: f64,
    pub field: HessianField,
}

impl HmaeReport {
    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.field.write_csv(std::fs::File::create(path)?)
    }
}

/// Finite-difference Hessian of `Φ(t, s)` over the default scan window.
pub fn hmae_report(path: &MetricPath) -> Result<HmaeReport> {
    if path.len() < 3 {
        return Err(LabError::PathTooShort {
            needed: 3,
            found: path.len(),
        });
    }
    let s_grid = ScanWindow::for_grid(path.n()).grid();
    let values = radial_field(path, &s_grid);
    let field = HessianField::finite_difference(path.t_grid(), &s_grid, &values)?;
    let (residual, worst_t, worst_s) = field.max_abs_det();
    Ok(HmaeReport {
        residual,
        worst_t,
        worst_s,
        field,
    })
}

/// `max |det Hess Φ|` over interior nodes; vanishes in the limit on geodesics.
pub fn hmae_residual(path: &MetricPath) -> Result<f64> {
    Ok(hmae_report(path)?.residual)
}

/// Time derivatives of `g` at a slice, as splines on the moment interval.
pub(crate) struct SliceRates {
    pub gdot: CubicSpline,
    pub gddot: CubicSpline,
}

pub(crate) fn slice_rates(path: &MetricPath, i: usize) -> SliceRates {
    let n = path.len();
    let ht = path.t_grid().step();
    let grid = *path.slice(0).grid();
    let g = |k: usize| path.slice(k).g_values();
    let len = grid.len();
    let (gdot, gddot): (Vec<f64>, Vec<f64>) = if i == 0 {
        let (a, b, c) = (g(0), g(1), g(2.min(n - 1)));
        (0..len)
            .map(|m| {
                if n >= 3 {
                    ((-3.0 * a[m] + 4.0 * b[m] - c[m]) / (2.0 * ht), (a[m] - 2.0 * b[m] + c[m]) / (ht * ht))
                } else {
                    ((b[m] - a[m]) / ht, 0.0)
                }
            })
            .unzip()
    } else if i == n - 1 {
        let (a, b, c) = (g(n - 1), g(n - 2), g(n.saturating_sub(3)));
        (0..len)
            .map(|m| {
                if n >= 3 {
                    ((3.0 * a[m] - 4.0 * b[m] + c[m]) / (2.0 * ht), (a[m] - 2.0 * b[m] + c[m]) / (ht * ht))
                } else {
                    ((a[m] - b[m]) / ht, 0.0)
                }
            })
            .unzip()
    } else {
        let (a, b, c) = (g(i - 1), g(i), g(i + 1));
        (0..len)
            .map(|m| ((c[m] - a[m]) / (2.0 * ht), (c[m] - 2.0 * b[m] + a[m]) / (ht * ht)))
            .unzip()
    };
    SliceRates {
        gdot: CubicSpline::new(grid, &gdot),
        gddot: CubicSpline::new(grid, &gddot),
    }
}

/// Hessian of `Φ` from the Legendre chain rule.
///
/// With `x` the moment coordinate of `(t, s)`: `Φ_ss = 1/L''`, `Φ_ts = −ġ'/L''`,
/// `Φ_tt = −g̈ + ġ'²/L''`, hence `det = −g̈/L''`. Time derivatives of `g` come from
/// central differences of the slices, exact for paths quadratic in `t`.
pub fn path_hessian(path: &MetricPath, window: &ScanWindow) -> Result<HessianField> {
    let nt = path.len();
    if nt < 3 {
        return Err(LabError::PathTooShort { needed: 3, found: nt });
    }
    let s_grid = window.grid();
    let ns = s_grid.len();
    let (lt, ls) = (layers(nt), layers(ns));
    let s_nodes = s_grid.nodes();
    let rows: Vec<HessianField> = (lt..nt - lt)
        .into_par_iter()
        .map(|i| {
            let rates = slice_rates(path, i);
            let slice = path.slice(i);
            let t = path.t_grid().node(i);
            let mut f = HessianField::default();
            for &s in &s_nodes[ls..ns - ls] {
                let p = slice.radial_point(s);
                let q = p.curvature;
                let gd1 = rates.gdot.derivative(p.x);
                let gdd = rates.gddot.eval(p.x);
                f.t.push(t);
                f.s.push(s);
                f.tt.push(-gdd + gd1 * gd1 * q);
                f.ts.push(-gd1 * q);
                f.ss.push(q);
            }
            f
        })
        .collect();
    let mut out = HessianField::default();
    for r in rows {
        out.t.extend(r.t);
        out.s.extend(r.s);
        out.tt.extend(r.tt);
        out.ts.extend(r.ts);
        out.ss.extend(r.ss);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::{affine_potential_path, constant_path, weak_geodesic};
    use crate::potential::SymplecticPotential;

    fn perturbed(n: usize) -> SymplecticPotential {
        SymplecticPotential::from_fn(n, |x| 0.12 * (std::f64::consts::PI * x).sin().powi(2) + 0.2 * x).unwrap()
    }

    #[test]
    fn constant_path_has_zero_residual() {
        let p = constant_path(&perturbed(128), 9).unwrap();
        assert!(hmae_residual(&p).unwrap() < 1e-12);
    }

    #[test]
    fn short_path_is_refused() {
        let a = perturbed(64);
        let p = weak_geodesic(&a, &a, 2).unwrap();
        assert!(matches!(hmae_residual(&p), Err(LabError::PathTooShort { .. })));
    }

    #[test]
    fn chain_rule_matches_finite_differences() {
        let fs = SymplecticPotential::fubini_study(256);
        let p = weak_geodesic(&fs, &perturbed(256), 33).unwrap();
        let w = ScanWindow { half_width: 10.0, intervals: 1024 };
        let exact = path_hessian(&p, &w).unwrap();
        let fd = HessianField::finite_difference(p.t_grid(), &w.grid(), &radial_field(&p, &w.grid())).unwrap();
        assert_eq!(exact.len(), fd.len());
        let err = (0..fd.len())
            .map(|k| (exact.tt[k] - fd.tt[k]).abs() + (exact.ts[k] - fd.ts[k]).abs() + (exact.ss[k] - fd.ss[k]).abs())
            .fold(0.0, f64::max);
        assert!(err < 5e-3, "max deviation {err}");
        let det = (0..exact.len()).map(|k| exact.det(k).abs()).fold(0.0, f64::max);
        assert!(det < 1e-12, "analytic determinant {det}");
    }

    #[test]
    fn affine_path_is_not_geodesic() {
        let fs = SymplecticPotential::fubini_study(256);
        let p = affine_potential_path(&fs, &perturbed(256), 17).unwrap();
        assert!(hmae_residual(&p).unwrap() > 1e-3);
    }
}
