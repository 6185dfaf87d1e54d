use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::functionals::TwistedFunctional;
use crate::potential::{SymplecticPotential, TwistForm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescentOptions {
    pub max_iter: usize,
    /// Stop once the twisted-csc residual is below this.
    pub tol: f64,
    /// Weight of the kernel shift relative to the largest Hessian diagonal.
    pub shift: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-6,
            shift: 1e-8,
            armijo: 1e-4,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescentStep {
    pub iter: usize,
    pub value: f64,
    pub grad_norm: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct DescentOutcome {
    pub potential: SymplecticPotential,
    pub trace: Vec<DescentStep>,
}

impl DescentOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }

    pub fn residual(&self) -> f64 {
        self.trace.last().map_or(f64::INFINITY, |s| s.residual)
    }

    /// CSV with columns `iter,value,grad_norm,residual`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for step in &self.trace {
            w.serialize(step)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Damped Newton descent on the discrete twisted functional from each start.
pub fn twisted_csc_solve(alpha: &TwistForm, starts: &[SymplecticPotential]) -> Result<Vec<DescentOutcome>> {
    twisted_csc_solve_with(alpha, starts, &DescentOptions::default())
}

pub fn twisted_csc_solve_with(
    alpha: &TwistForm,
    starts: &[SymplecticPotential],
    opts: &DescentOptions,
) -> Result<Vec<DescentOutcome>> {
    let first = starts
        .first()
        .ok_or_else(|| LabError::InvalidArgument("no starting potentials".into()))?;
    for s in starts {
        first.same_grid(s)?;
    }
    let functional = TwistedFunctional::new(alpha.clone(), first.n());
    starts.iter().map(|s| descend(&functional, s, opts)).collect()
}

fn descend(j: &TwistedFunctional, start: &SymplecticPotential, opts: &DescentOptions) -> Result<DescentOutcome> {
    let x = start.nodes();
    let n = x.len();
    let ones = DVector::from_element(n, 1.0);
    let xs = DVector::from_column_slice(&x);
    // constants always lie in the kernel; affine functions only when the twist vanishes
    let mut kernel = &ones * ones.transpose();
    if j.alpha().mass() == 0.0 {
        kernel += &xs * xs.transpose();
    }
    let mut g = start.g_values().to_vec();
    let mut value = j
        .value(&g)
        .ok_or_else(|| LabError::InvalidArgument("start lies outside the functional's domain".into()))?;
    let mut trace = Vec::new();
    for iter in 0..=opts.max_iter {
        let grad = j.gradient(&g);
        let residual = j.residual(&g);
        trace.push(DescentStep {
            iter,
            value,
            grad_norm: grad.iter().map(|v| v * v).sum::<f64>().sqrt(),
            residual,
        });
        if residual <= opts.tol {
            let potential = SymplecticPotential::with_window(g, start.window())?;
            return Ok(DescentOutcome { potential, trace });
        }
        if iter == opts.max_iter {
            break;
        }
        let h = j.hessian(&g);
        let maxdiag = (0..n).map(|i| h[(i, i)]).fold(0.0, f64::max);
        let m: DMatrix<f64> = h + &kernel * (opts.shift * maxdiag);
        let gv = DVector::from_column_slice(&grad);
        let dir = match m.cholesky() {
            Some(c) => -c.solve(&gv),
            None => -gv.clone(),
        };
        let slope = gv.dot(&dir);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..opts.max_backtracks {
            let trial: Vec<f64> = g.iter().zip(dir.iter()).map(|(g, d)| g + lambda * d).collect();
            if let Some(v) = j.value(&trial) {
                if v <= value + opts.armijo * lambda * slope {
                    g = trial;
                    value = v;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let last = trace.last().map_or(f64::INFINITY, |s| s.residual);
    Err(LabError::NoConvergence {
        iterations: trace.len().saturating_sub(1),
        residual: last,
        history: trace.iter().map(|s| s.residual).collect(),
    })
}

/// `inf_c sup |g_a − g_b − c|`.
pub fn sup_distance_mod_constants(a: &SymplecticPotential, b: &SymplecticPotential) -> Result<f64> {
    a.same_grid(b)?;
    let d: Vec<f64> = a.g_values().iter().zip(b.g_values()).map(|(a, b)| a - b).collect();
    let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(0.5 * (hi - lo))
}

/// `sup |g_a − g_b − ℓ|` with `ℓ` the least-squares affine fit of `g_a − g_b`.
pub fn sup_distance_mod_affine(a: &SymplecticPotential, b: &SymplecticPotential) -> Result<f64> {
    a.same_grid(b)?;
    let x = a.nodes();
    let d: Vec<f64> = a.g_values().iter().zip(b.g_values()).map(|(a, b)| a - b).collect();
    let n = x.len() as f64;
    let (mx, md) = (x.iter().sum::<f64>() / n, d.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = x.iter().zip(&d).map(|(x, d)| (x - mx) * (d - md)).sum::<f64>() / sxx;
    Ok(x
        .iter()
        .zip(&d)
        .map(|(x, d)| (d - md - slope * (x - mx)).abs())
        .fold(0.0, f64::max))
}
