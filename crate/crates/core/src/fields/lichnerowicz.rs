use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::numerics::UniformGrid;
use crate::potential::SymplecticPotential;

/// Fewest moment intervals on which the fourth-order operator is assembled.
const MIN_INTERVALS: usize = 8;

/// Pairings of a right-hand side with the kernel above this (relative to its size) are
/// incompatible.
const COMPATIBILITY_TOL: f64 = 1e-7;

/// `𝔇*𝔇` on grid functions of the moment interval, self-adjoint for `⟨v, w⟩ = ∫ v w ω_u`.
///
/// In the moment coordinate `𝔇_u v` is `(1/L'') v''` up to a unit factor, so
/// `H(v, w) = ∫ 𝔇v 𝔇w ω_u = ∫ q² v'' w'' dx` with `q = 1/L''`. The form is assembled
/// from centered second differences at interior nodes, which makes its kernel exactly the
/// affine functions: the constants and the hamiltonian of `z∂/∂z`.
#[derive(Debug, Clone)]
pub struct LinearOperatorOnFunctions {
    grid: UniformGrid,
    weights: Vec<f64>,
    /// `q_i² / h³` at interior nodes, zero at the ends.
    coefficients: Vec<f64>,
    form: DMatrix<f64>,
}

#[derive(Serialize)]
struct OperatorDocument<'a> {
    n: usize,
    weights: &'a [f64],
    /// Row-major entries of `W⁻¹ K`.
    matrix: Vec<f64>,
}

impl LinearOperatorOnFunctions {
    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// The Gram matrix `K` of `H`.
    pub fn form_matrix(&self) -> &DMatrix<f64> {
        &self.form
    }

    /// The operator itself, `W⁻¹ K`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.form[(i, j)] / self.weights[i])
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let kv = &self.form * DVector::from_column_slice(v);
        kv.iter().zip(&self.weights).map(|(a, w)| a / w).collect()
    }

    /// `H(v, w)`, summed over second differences rather than through `K` to avoid
    /// cancellation on near-kernel inputs.
    pub fn form(&self, v: &[f64], w: &[f64]) -> f64 {
        let d2 = |f: &[f64], i: usize| f[i + 1] - 2.0 * f[i] + f[i - 1];
        (1..self.dim() - 1).map(|i| self.coefficients[i] * d2(v, i) * d2(w, i)).sum()
    }

    /// `max |⟨Ae_i, e_j⟩ − ⟨e_i, Ae_j⟩|` relative to the largest entry of `K`.
    pub fn self_adjointness_defect(&self) -> f64 {
        let a = self.matrix();
        let n = self.dim();
        let scale = self.form.amax().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                let d = self.weights[j] * a[(j, i)] - self.weights[i] * a[(i, j)];
                worst = worst.max(d.abs());
            }
        }
        worst / scale
    }

    /// `√H(v, v) / ‖v‖`, the size of `𝔇v` relative to `v`.
    pub fn kernel_residual(&self, v: &[f64]) -> f64 {
        let norm: f64 = v.iter().zip(&self.weights).map(|(v, w)| w * v * v).sum::<f64>().sqrt();
        self.form(v, v).max(0.0).sqrt() / norm.max(f64::MIN_POSITIVE)
    }

    /// `{n, weights, matrix}` with the matrix dense and row-major.
    pub fn to_json(&self) -> Result<String> {
        let a = self.matrix();
        let n = self.dim();
        let matrix = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| a[(i, j)]).collect();
        Ok(serde_json::to_string(&OperatorDocument {
            n,
            weights: &self.weights,
            matrix,
        })?)
    }
}

/// Assemble `𝔇_u*𝔇_u` on the moment grid of `u`.
pub fn lichnerowicz(u: &SymplecticPotential) -> Result<LinearOperatorOnFunctions> {
    let n = u.n();
    if n < MIN_INTERVALS {
        return Err(LabError::Resolution(format!(
            "the Lichnerowicz operator needs at least {MIN_INTERVALS} intervals, got {n}"
        )));
    }
    let h = u.grid().step();
    let q = u.nodal().q;
    let mut form = DMatrix::<f64>::zeros(n + 1, n + 1);
    let mut coefficients = vec![0.0; n + 1];
    for i in 1..n {
        let c = q[i] * q[i] / (h * h * h);
        coefficients[i] = c;
        let row = [(i - 1, 1.0), (i, -2.0), (i + 1, 1.0)];
        for &(a, ca) in &row {
            for &(b, cb) in &row {
                form[(a, b)] += c * ca * cb;
            }
        }
    }
    Ok(LinearOperatorOnFunctions {
        grid: *u.grid(),
        weights: u.grid().trapezoid_weights(),
        coefficients,
        form,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearizedSolution {
    /// Mean-zero and `ω_u`-orthogonal to the hamiltonian.
    pub v: Vec<f64>,
    /// Normwise backward error `‖Kv − b‖ / (‖K‖ ‖v‖ + ‖b‖)` in the max norm.
    pub residual: f64,
    pub constant_pairing: f64,
    pub hamiltonian_pairing: f64,
}

/// Solve `𝔇_u*𝔇_u v ω_u = ν` for a signed density `nu` against `ω_u` on the moment grid.
///
/// `ν` must annihilate the kernel. Its pairings with `1` and `x − 1/2` are checked, the
/// remainder is projected out, and the singular system is solved through
/// `(K + Z Zᵀ) v = b` with `Z` spanning the kernel.
pub fn solve_linearized(u: &SymplecticPotential, nu: &[f64]) -> Result<LinearizedSolution> {
    let op = lichnerowicz(u)?;
    let n = op.dim();
    if nu.len() != n {
        return Err(LabError::InvalidArgument(format!("{} density samples for {n} nodes", nu.len())));
    }
    let x = u.nodes();
    let b: Vec<f64> = nu.iter().zip(&op.weights).map(|(v, w)| v * w).collect();
    let size = 1.0 + b.iter().map(|v| v.abs()).sum::<f64>();
    let constant_pairing: f64 = b.iter().sum();
    let hamiltonian_pairing: f64 = b.iter().zip(&x).map(|(b, x)| b * (x - 0.5)).sum();
    if constant_pairing.abs() > COMPATIBILITY_TOL * size {
        return Err(LabError::Incompatible {
            against: "constants".into(),
            pairing: constant_pairing,
        });
    }
    if hamiltonian_pairing.abs() > COMPATIBILITY_TOL * size {
        return Err(LabError::Incompatible {
            against: "the hamiltonian of z d/dz".into(),
            pairing: hamiltonian_pairing,
        });
    }
    // Euclidean orthonormal basis of the kernel {1, x − 1/2}
    let e0 = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut e1 = DVector::from_iterator(n, x.iter().map(|x| x - 0.5));
    e1 -= &e0 * e0.dot(&e1);
    e1 /= e1.norm();
    let mut rhs = DVector::from_column_slice(&b);
    rhs -= &e0 * e0.dot(&rhs);
    rhs -= &e1 * e1.dot(&rhs);

    let k = op.form_matrix();
    let scale = (0..n).map(|i| k[(i, i)]).sum::<f64>() / n as f64;
    let m = k + (&e0 * e0.transpose() + &e1 * e1.transpose()) * scale;
    let chol = m
        .cholesky()
        .ok_or_else(|| LabError::Tolerance("regularized Lichnerowicz system is not positive definite".into()))?;
    let mut v = chol.solve(&rhs);

    // shift within the kernel to normalize against ω_u
    let w = DVector::from_column_slice(&op.weights);
    let ones = DVector::from_element(n, 1.0);
    let hx = DVector::from_iterator(n, x.iter().map(|x| x - 0.5));
    let mean = w.dot(&v) / w.sum();
    v -= &ones * mean;
    let wh = hx.component_mul(&w);
    v -= &hx * (wh.dot(&v) / wh.dot(&hx));

    let kv = k * &v;
    let residual = (&kv - &rhs).amax() / (k.amax() * v.amax() + rhs.amax()).max(f64::MIN_POSITIVE);
    Ok(LinearizedSolution {
        v: v.iter().copied().collect(),
        residual,
        constant_pairing,
        hamiltonian_pairing,
    })
}
