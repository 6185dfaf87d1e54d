use serde::Serialize;

use super::BergmanSystem;
use crate::error::{LabError, Result};
use crate::functionals::HMAE_THRESHOLD;
use crate::geodesic::{hmae_residual, layers, path_hessian, HessianField, MetricPath, PathKind, ScanWindow};
use crate::numerics::{logsumexp, UniformGrid};

fn check_kind(sys: &BergmanSystem) -> Result<()> {
    if sys.kind() == PathKind::Generic {
        return Err(LabError::WrongPathKind {
            expected: "geodesic or subgeodesic".into(),
            found: sys.kind().name().into(),
        });
    }
    if sys.len() < 3 {
        return Err(LabError::PathTooShort { needed: 3, found: sys.len() });
    }
    Ok(())
}

fn check_path(sys: &BergmanSystem, path: &MetricPath) -> Result<()> {
    if path.len() != sys.len() {
        return Err(LabError::InvalidArgument(format!(
            "system has {} t-nodes, path has {}",
            sys.len(),
            path.len()
        )));
    }
    sys.slice(0).same_grid(path.first())
}

/// Hessian in `(t, s)` of `G = log Σ_j exp((j+1)s − log N_j(t))`, the log of the
/// unweighted kernel.
///
/// With `p_j` the softmax weights at `(t, s)` and `ℓ_j = log N_j`:
/// `G_ss = Var(j+1)`, `G_ts = −Cov(j+1, ℓ'_j)`, `G_tt = E[−ℓ''_j] + Var(ℓ'_j)`, where
/// `ℓ'` and `ℓ''` are centered differences in `t`.
pub fn log_kernel_hessian(sys: &BergmanSystem, window: &ScanWindow) -> Result<HessianField> {
    if sys.len() < 3 {
        return Err(LabError::PathTooShort { needed: 3, found: sys.len() });
    }
    let nt = sys.len();
    let ht = sys.t_step();
    let s_grid = window.grid();
    let ns = s_grid.len();
    let (lt, ls) = (layers(nt), layers(ns));
    let ell = sys.log_norms();
    let nj = ell[0].len();
    let mut out = HessianField::default();
    for i in lt..nt - lt {
        let d1: Vec<f64> = (0..nj).map(|j| (ell[i + 1][j] - ell[i - 1][j]) / (2.0 * ht)).collect();
        let d2: Vec<f64> = (0..nj)
            .map(|j| (ell[i + 1][j] - 2.0 * ell[i][j] + ell[i - 1][j]) / (ht * ht))
            .collect();
        for j in ls..ns - ls {
            let s = s_grid.node(j);
            let a: Vec<f64> = (0..nj).map(|m| (m + 1) as f64 * s - ell[i][m]).collect();
            let z = logsumexp(&a);
            let p: Vec<f64> = a.iter().map(|v| (v - z).exp()).collect();
            let mean = |f: &dyn Fn(usize) -> f64| (0..nj).map(|m| p[m] * f(m)).sum::<f64>();
            let em = mean(&|m| (m + 1) as f64);
            let ed = mean(&|m| d1[m]);
            out.t.push(sys.t_nodes()[i]);
            out.s.push(s);
            out.ss.push(mean(&|m| ((m + 1) as f64 - em).powi(2)));
            out.ts.push(-mean(&|m| ((m + 1) as f64 - em) * (d1[m] - ed)));
            out.tt.push(mean(&|m| -d2[m]) + mean(&|m| (d1[m] - ed).powi(2)));
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of the Hessian of the log-kernel over interior `(t, s)` nodes.
pub fn psh_variation_check(sys: &BergmanSystem) -> Result<f64> {
    check_kind(sys)?;
    let field = log_kernel_hessian(sys, &ScanWindow::for_grid(sys.slice(0).n()))?;
    Ok(field.min_eigenvalue().0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionReport {
    /// Smallest eigenvalue of `Hess log b_k + k Hess Φ`.
    pub min_eig: f64,
    pub t: f64,
    pub s: f64,
    /// Largest entrywise gap between `Hess log b_k + k Hess Φ` and `Hess G`.
    pub identity_gap: f64,
}

/// `Hess(log b_k) + k Hess(Φ)` by centered differences of sampled `log b_k` and `Φ`.
///
/// Since `log b_k = G − kΦ − log k` the sum is `Hess G`; `identity_gap` measures how far
/// the sampled fields are from that identity.
pub fn decomposition_inequality(sys: &BergmanSystem, path: &MetricPath) -> Result<DecompositionReport> {
    check_kind(sys)?;
    check_path(sys, path)?;
    let s_grid = ScanWindow::for_grid(path.n()).grid();
    let k = sys.k() as f64;
    let (mut g, mut phi, mut logb) = (Vec::new(), Vec::new(), Vec::new());
    for (i, u) in path.slices().iter().enumerate() {
        let ell = &sys.log_norms()[i];
        for s in s_grid.nodes() {
            let a: Vec<f64> = ell.iter().enumerate().map(|(j, l)| (j + 1) as f64 * s - l).collect();
            let gv = logsumexp(&a);
            let p = u.radial_point(s).phi;
            g.push(gv);
            phi.push(p);
            logb.push(gv - k * p - k.ln());
        }
    }
    let t_grid = path.t_grid();
    let hb = HessianField::finite_difference(t_grid, &s_grid, &logb)?;
    let hp = HessianField::finite_difference(t_grid, &s_grid, &phi)?;
    let hg = HessianField::finite_difference(t_grid, &s_grid, &g)?;
    let sum = hb.add_scaled(&hp, k);
    let identity_gap = (0..sum.len())
        .map(|m| {
            (sum.tt[m] - hg.tt[m])
                .abs()
                .max((sum.ts[m] - hg.ts[m]).abs())
                .max((sum.ss[m] - hg.ss[m]).abs())
        })
        .fold(0.0, f64::max);
    let (min_eig, t, s) = sum.min_eigenvalue();
    Ok(DecompositionReport {
        min_eig,
        t,
        s,
        identity_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixedPositivityReport {
    /// Smallest reduced wedge pairing `MD(Hess Ψ_{A,k}, Hess Φ)`.
    pub min_pairing: f64,
    pub t: f64,
    pub s: f64,
    /// Nodes where the truncation `χ − A` is the active branch.
    pub truncated_nodes: usize,
}

/// `MD(Hess Ψ_{A,k}, Hess Φ)` over the scan, with `Ψ_{A,k} = max(log b_k, χ − A)`
/// (`log b_k` itself when `a` is `None`).
///
/// `χ = log σ' + 2 log(1 + e^s) − 2Φ` has `dd^c χ ≥ −2 dd^c Φ`; on the model its
/// Hessian is exactly `−2 Hess Φ`. At each node the active branch supplies the Hessian.
pub fn mixed_positivity(sys: &BergmanSystem, path: &MetricPath, a: Option<f64>) -> Result<MixedPositivityReport> {
    check_path(sys, path)?;
    if sys.len() < 3 {
        return Err(LabError::PathTooShort { needed: 3, found: sys.len() });
    }
    let residual = hmae_residual(path)?;
    if residual > HMAE_THRESHOLD {
        return Err(LabError::Tolerance(format!(
            "HMAE residual {residual:.3e} exceeds {HMAE_THRESHOLD:.0e}; mixed positivity needs a geodesic"
        )));
    }
    let window = ScanWindow::for_grid(path.n());
    let hg = log_kernel_hessian(sys, &window)?;
    let hp = path_hessian(path, &window)?;
    if hg.len() != hp.len() {
        return Err(LabError::InvalidArgument("scan node sets differ".into()));
    }
    let k = sys.k() as f64;
    let t_grid: &UniformGrid = path.t_grid();
    let mut best = (f64::INFINITY, f64::NAN, f64::NAN);
    let mut truncated_nodes = 0;
    for m in 0..hg.len() {
        let (t, s) = (hg.t[m], hg.s[m]);
        let mut psi = [
            hg.tt[m] - k * hp.tt[m],
            hg.ts[m] - k * hp.ts[m],
            hg.ss[m] - k * hp.ss[m],
        ];
        if let Some(a) = a {
            let i = ((t - t_grid.start) / t_grid.step()).round() as usize;
            let ell = &sys.log_norms()[i];
            let terms: Vec<f64> = ell.iter().enumerate().map(|(j, l)| (j + 1) as f64 * s - l).collect();
            let phi = path.slice(i).radial_point(s).phi;
            let log_b = logsumexp(&terms) - k * phi - k.ln();
            let chi = s - 2.0 * phi;
            if chi - a > log_b {
                truncated_nodes += 1;
                psi = [-2.0 * hp.tt[m], -2.0 * hp.ts[m], -2.0 * hp.ss[m]];
            }
        }
        let md = psi[0] * hp.ss[m] + psi[2] * hp.tt[m] - 2.0 * psi[1] * hp.ts[m];
        if md < best.0 {
            best = (md, t, s);
        }
    }
    Ok(MixedPositivityReport {
        min_pairing: best.0,
        t: best.1,
        s: best.2,
        truncated_nodes,
    })
}
