//! Weighted Bergman kernels of the adjoint bundle and their measures.
//!
//! On the sphere `H⁰(kL + K)` is spanned by `z^j dz`, `j = 0..=k−2`. Against the weight
//! `e^{−kφ}` the monomials are orthogonal, with squared norms
//! `N_j = ∫ e^{(j+1)s − kφ(s)} ds` once the angular factor `2π` is dropped (it cancels in
//! every normalized quantity). The Bergman measure is
//! `β_k = (1/k) Σ_j e^{(j+1)s − kφ(s) − log N_j} ds`, of mass `(k − 1)/k`.
//!
//! The norms are computed in the moment coordinate of each slice, where the integrand is
//! `x^j (1 − x)^{k−j−2} e^{(j+1)g' − k(xg' − g)} (1 + x(1 − x) g'')`, cell by cell on the
//! spline knots of `g` and entirely in the log domain.

mod disc;
mod scans;

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

pub use disc::{disc_bergman, glued_disc_weight};
pub use scans::{
    decomposition_inequality, log_kernel_hessian, mixed_positivity, psh_variation_check,
    DecompositionReport, MixedPositivityReport,
};

use crate::error::{LabError, Result};
use crate::geodesic::{MetricPath, PathKind};
use crate::numerics::quadrature::{gk15_rule, integrate_split};
use crate::numerics::{logsumexp, UniformGrid};
use crate::potential::{SymplecticPotential, DEFAULT_S_INTERVALS};

/// Relative accuracy demanded of every `N_j`.
pub const NORM_REL_TOL: f64 = 1e-10;

const FALLBACK_INTERVALS: usize = 200;

/// `log N_j(t)` for `j = 0..=k−2` over the `t`-nodes of a path.
#[derive(Debug, Clone)]
pub struct BergmanSystem {
    k: usize,
    t_nodes: Vec<f64>,
    log_norms: Vec<Vec<f64>>,
    slices: Vec<SymplecticPotential>,
    kind: PathKind,
}

/// `{k, t_grid, log_norms}`; `log_norms[i][j]` is `log N_j(t_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BergmanDocument {
    pub k: usize,
    pub t_grid: Vec<f64>,
    pub log_norms: Vec<Vec<f64>>,
}

impl BergmanSystem {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn exponents(&self) -> Vec<usize> {
        (0..self.k - 1).collect()
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    pub fn len(&self) -> usize {
        self.t_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_nodes.is_empty()
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn log_norms(&self) -> &[Vec<f64>] {
        &self.log_norms
    }

    pub fn slice(&self, i: usize) -> &SymplecticPotential {
        &self.slices[i]
    }

    /// Spacing of the `t`-nodes.
    pub(crate) fn t_step(&self) -> f64 {
        if self.t_nodes.len() < 2 {
            return 0.0;
        }
        self.t_nodes[1] - self.t_nodes[0]
    }

    pub fn to_document(&self) -> BergmanDocument {
        BergmanDocument {
            k: self.k,
            t_grid: self.t_nodes.clone(),
            log_norms: self.log_norms.clone(),
        }
    }

    /// A copy with `c (t − t_mid)²` added to every `log N_j`.
    ///
    /// The true norms are log-concave in `t` along subgeodesics; a large `c` makes them
    /// convex, which is the mutation the positivity scans have to catch.
    pub fn convexified(&self, c: f64) -> Self {
        let mid = 0.5 * (self.t_nodes[0] + self.t_nodes[self.t_nodes.len() - 1]);
        let mut out = self.clone();
        for (row, &t) in out.log_norms.iter_mut().zip(&self.t_nodes) {
            for l in row.iter_mut() {
                *l += c * (t - mid) * (t - mid);
            }
        }
        out
    }
}

/// `j`-independent parts of the log-integrand at the Kronrod nodes of every knot cell.
struct NormSamples {
    log_x: Vec<f64>,
    log_1mx: Vec<f64>,
    gp: Vec<f64>,
    /// `x g' − g`.
    dual: Vec<f64>,
    log_jac: Vec<f64>,
    wk: Vec<f64>,
    wg: Vec<f64>,
}

fn norm_samples(u: &SymplecticPotential) -> std::result::Result<NormSamples, f64> {
    let (xi, wk15, wg15) = gk15_rule();
    let grid = u.grid();
    let sp = u.spline();
    let n = grid.intervals;
    let cap = 15 * n;
    let mut s = NormSamples {
        log_x: Vec::with_capacity(cap),
        log_1mx: Vec::with_capacity(cap),
        gp: Vec::with_capacity(cap),
        dual: Vec::with_capacity(cap),
        log_jac: Vec::with_capacity(cap),
        wk: Vec::with_capacity(cap),
        wg: Vec::with_capacity(cap),
    };
    let h = grid.step();
    for c in 0..n {
        let mid = grid.node(c) + 0.5 * h;
        for m in 0..15 {
            let x = mid + 0.5 * h * xi[m];
            let (g, gp, gpp) = sp.eval_all(x);
            let jac = 1.0 + x * (1.0 - x) * gpp;
            if !(jac > 0.0) {
                return Err(x);
            }
            s.log_x.push(x.ln());
            s.log_1mx.push((-x).ln_1p());
            s.gp.push(gp);
            s.dual.push(x * gp - g);
            s.log_jac.push(jac.ln());
            s.wk.push(0.5 * h * wk15[m]);
            s.wg.push(0.5 * h * wg15[m]);
        }
    }
    Ok(s)
}

fn log_integrand(k: usize, j: usize, log_x: f64, log_1mx: f64, gp: f64, dual: f64, log_jac: f64) -> f64 {
    let mut v = (j + 1) as f64 * gp - k as f64 * dual + log_jac;
    if j > 0 {
        v += j as f64 * log_x;
    }
    if k - j - 2 > 0 {
        v += (k - j - 2) as f64 * log_1mx;
    }
    v
}

/// `log N_j` for one potential, or the worst `(j, relative error)` on failure.
fn slice_log_norms(u: &SymplecticPotential, k: usize) -> std::result::Result<Vec<f64>, (usize, f64)> {
    let samples = norm_samples(u).map_err(|_| (0, f64::INFINITY))?;
    (0..k - 1)
        .into_par_iter()
        .map(|j| {
            let lf: Vec<f64> = (0..samples.wk.len())
                .map(|m| {
                    log_integrand(
                        k,
                        j,
                        samples.log_x[m],
                        samples.log_1mx[m],
                        samples.gp[m],
                        samples.dual[m],
                        samples.log_jac[m],
                    )
                })
                .collect();
            let top = lf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (mut kron, mut err) = (0.0, 0.0);
            for (cell, chunk) in lf.chunks(15).enumerate() {
                let (mut a, mut b) = (0.0, 0.0);
                for (m, v) in chunk.iter().enumerate() {
                    let e = (v - top).exp();
                    a += samples.wk[15 * cell + m] * e;
                    b += samples.wg[15 * cell + m] * e;
                }
                kron += a;
                err += (a - b).abs();
            }
            if err <= NORM_REL_TOL * kron {
                return Ok(top + kron.ln());
            }
            adaptive_log_norm(u, k, j, top)
        })
        .collect()
}

fn adaptive_log_norm(u: &SymplecticPotential, k: usize, j: usize, top: f64) -> std::result::Result<f64, (usize, f64)> {
    let sp = u.spline();
    let f = |x: f64| {
        let (g, gp, gpp) = sp.eval_all(x);
        let jac = (1.0 + x * (1.0 - x) * gpp).max(f64::MIN_POSITIVE);
        (log_integrand(k, j, x.ln(), (-x).ln_1p(), gp, x * gp - g, jac.ln()) - top).exp()
    };
    let r = integrate_split(f, 0.0, 1.0, &u.grid().nodes(), NORM_REL_TOL, FALLBACK_INTERVALS);
    if r.converged && r.value > 0.0 {
        Ok(top + r.value.ln())
    } else {
        Err((j, r.error / r.value.abs().max(f64::MIN_POSITIVE)))
    }
}

/// Norms of the monomial basis along every slice of `path`.
pub fn assemble(path: &MetricPath, k: usize) -> Result<BergmanSystem> {
    if k < 3 {
        return Err(LabError::InvalidArgument(format!("Bergman level must be at least 3, got {k}")));
    }
    let rows: Vec<_> = path.slices().par_iter().map(|u| slice_log_norms(u, k)).collect();
    let mut log_norms = Vec::with_capacity(rows.len());
    for (t_index, row) in rows.into_iter().enumerate() {
        match row {
            Ok(r) => log_norms.push(r),
            Err((j, error)) => return Err(LabError::Quadrature { j, t_index, error }),
        }
    }
    Ok(BergmanSystem {
        k,
        t_nodes: path.t_nodes(),
        log_norms,
        slices: path.slices().to_vec(),
        kind: path.kind(),
    })
}

/// [`assemble`] for a single potential, as a one-node system at `t = 0`.
pub fn assemble_potential(u: &SymplecticPotential, k: usize) -> Result<BergmanSystem> {
    if k < 3 {
        return Err(LabError::InvalidArgument(format!("Bergman level must be at least 3, got {k}")));
    }
    let row = slice_log_norms(u, k).map_err(|(j, error)| LabError::Quadrature { j, t_index: 0, error })?;
    Ok(BergmanSystem {
        k,
        t_nodes: vec![0.0],
        log_norms: vec![row],
        slices: vec![u.clone()],
        kind: PathKind::Geodesic,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BergmanDomain {
    /// Density against `ds` on the log-radial axis of the sphere.
    Sphere,
    /// Density against Lebesgue area on the unit disc, sampled in the radius.
    Disc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BergmanMeasure {
    pub k: usize,
    pub domain: BergmanDomain,
    pub grid: UniformGrid,
    pub density: Vec<f64>,
    pub mass: f64,
}

impl BergmanMeasure {
    /// Largest density over the nodes in `[lo, hi]`.
    pub fn sup_on(&self, lo: f64, hi: f64) -> f64 {
        self.grid
            .nodes()
            .iter()
            .zip(&self.density)
            .filter(|(x, _)| **x >= lo && **x <= hi)
            .fold(0.0, |m, (_, d)| m.max(*d))
    }

    /// CSV with columns `s,density` (or `r,density` on the disc).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let axis = match self.domain {
            BergmanDomain::Sphere => "s",
            BergmanDomain::Disc => "r",
        };
        w.write_record([axis, "density"])?;
        for (x, d) in self.grid.nodes().iter().zip(&self.density) {
            w.serialize((x, d))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Default `s`-grid of a slice: its own window at the default resolution.
fn default_s_grid(u: &SymplecticPotential) -> UniformGrid {
    UniformGrid::new(-u.window(), u.window(), DEFAULT_S_INTERVALS)
}

/// `β_k` at slice `t_index` on the default `s`-grid.
pub fn bergman_measure(sys: &BergmanSystem, t_index: usize) -> BergmanMeasure {
    bergman_measure_on(sys, t_index, &default_s_grid(sys.slice(t_index)))
}

pub fn bergman_measure_on(sys: &BergmanSystem, t_index: usize, grid: &UniformGrid) -> BergmanMeasure {
    let u = sys.slice(t_index);
    let ell = &sys.log_norms[t_index];
    let k = sys.k as f64;
    let log_k = k.ln();
    let density: Vec<f64> = grid
        .nodes()
        .par_iter()
        .map(|&s| {
            let phi = u.radial_point(s).phi;
            let terms: Vec<f64> = ell
                .iter()
                .enumerate()
                .map(|(j, l)| (j + 1) as f64 * s - k * phi - l)
                .collect();
            (logsumexp(&terms) - log_k).exp()
        })
        .collect();
    let mass = grid.integrate(&density);
    BergmanMeasure {
        k: sys.k,
        domain: BergmanDomain::Sphere,
        grid: *grid,
        density,
        mass,
    }
}

/// `∫ |b_k − φ''| ds` over the grid of `m`.
pub fn tv_distance(m: &BergmanMeasure, u: &SymplecticPotential) -> f64 {
    let f: Vec<f64> = m
        .grid
        .nodes()
        .iter()
        .zip(&m.density)
        .map(|(&s, b)| (b - u.radial_point(s).curvature).abs())
        .collect();
    m.grid.integrate(&f)
}

/// Total-variation distance between `β_k` and `φ''` for each `k`.
pub fn tv_convergence(u: &SymplecticPotential, k_list: &[usize]) -> Result<Vec<f64>> {
    k_list
        .iter()
        .map(|&k| {
            let sys = assemble_potential(u, k)?;
            Ok(tv_distance(&bergman_measure(&sys, 0), u))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::weak_geodesic;

    fn ln_beta(a: f64, b: f64) -> f64 {
        // integer arguments only
        let lf = |n: f64| (1..n as usize).map(|i| (i as f64).ln()).sum::<f64>();
        lf(a) + lf(b) - lf(a + b)
    }

    fn bump(n: usize, a: f64) -> SymplecticPotential {
        SymplecticPotential::from_fn(n, |x| a * x * x * (1.0 - x) * (1.0 - x) + 0.1 * x).unwrap()
    }

    #[test]
    fn fubini_study_norms_are_beta_functions() {
        for k in [3, 10, 40] {
            let sys = assemble_potential(&SymplecticPotential::fubini_study(256), k).unwrap();
            for (j, l) in sys.log_norms()[0].iter().enumerate() {
                let exact = ln_beta((j + 1) as f64, (k - j - 1) as f64);
                assert!((l - exact).abs() < 1e-10, "k={k} j={j}: {l} vs {exact}");
            }
        }
    }

    #[test]
    fn shifting_the_weight_scales_the_norms() {
        let u = bump(256, 0.4);
        let k = 12;
        let a = assemble_potential(&u, k).unwrap();
        let b = assemble_potential(&u.add_constant(0.3), k).unwrap();
        for (x, y) in a.log_norms()[0].iter().zip(&b.log_norms()[0]) {
            assert!((y - x + 0.3 * k as f64).abs() < 1e-10);
        }
        let fs = assemble_potential(&SymplecticPotential::fubini_study(128), k).unwrap();
        let l = &fs.log_norms()[0];
        for j in 0..k - 1 {
            assert!((l[j] - l[k - 2 - j]).abs() < 1e-11);
        }
    }

    #[test]
    fn mass_is_the_dimension_count() {
        for k in [8, 10, 33] {
            let sys = assemble_potential(&bump(512, 0.5), k).unwrap();
            let m = bergman_measure(&sys, 0);
            let expected = (k - 1) as f64 / k as f64;
            assert!((m.mass - expected).abs() < 1e-8, "k={k}: {}", m.mass);
            assert!(m.density.iter().all(|d| *d >= 0.0));
        }
    }

    #[test]
    fn fubini_study_measure_is_symmetric_and_proportional() {
        let k = 16;
        let sys = assemble_potential(&SymplecticPotential::fubini_study(256), k).unwrap();
        let m = bergman_measure_on(&sys, 0, &UniformGrid::new(-10.0, 10.0, 400));
        let n = m.density.len();
        for i in 0..n {
            assert!((m.density[i] - m.density[n - 1 - i]).abs() < 1e-12);
        }
        // the FS kernel is exactly ((k − 1)/k) φ''
        let s = m.grid.nodes();
        for (s, d) in s.iter().zip(&m.density) {
            let exact = (k - 1) as f64 / k as f64 * crate::numerics::logistic(*s) * crate::numerics::logistic(-s);
            assert!((d - exact).abs() < 1e-11);
        }
    }

    #[test]
    fn tv_decreases() {
        let tv = tv_convergence(&bump(512, 0.6), &[8, 16, 32]).unwrap();
        assert!(tv[0] > tv[1] && tv[1] > tv[2], "{tv:?}");
        let fs = tv_convergence(&SymplecticPotential::fubini_study(256), &[64]).unwrap();
        assert!((fs[0] - 1.0 / 64.0).abs() < 1e-8, "{fs:?}");
    }

    #[test]
    fn system_document_and_mutation() {
        let p = weak_geodesic(&SymplecticPotential::fubini_study(128), &bump(128, 0.5), 5).unwrap();
        let sys = assemble(&p, 6).unwrap();
        let doc = sys.to_document();
        assert_eq!(doc.log_norms.len(), 5);
        assert_eq!(doc.log_norms[0].len(), 5);
        let text = serde_json::to_string(&doc).unwrap();
        assert!(text.starts_with("{\"k\":6,\"t_grid\":"));
        let m = sys.convexified(1.0);
        assert_eq!(m.log_norms()[2], sys.log_norms()[2]);
        assert!((m.log_norms()[0][0] - sys.log_norms()[0][0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn small_levels_are_refused() {
        assert!(assemble_potential(&SymplecticPotential::fubini_study(64), 2).is_err());
    }
}
