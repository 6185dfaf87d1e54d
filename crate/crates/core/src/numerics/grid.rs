//! Uniform partitions, trapezoid quadrature and finite-difference stencils.

use serde::{Deserialize, Serialize};

/// Uniform partition of `[start, end]` into `intervals` equal cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub start: f64,
    pub end: f64,
    pub intervals: usize,
}

impl UniformGrid {
    pub fn new(start: f64, end: f64, intervals: usize) -> Self {
        assert!(intervals >= 1, "a grid needs at least one interval");
        assert!(end > start, "grid end must exceed start");
        Self {
            start,
            end,
            intervals,
        }
    }

    /// The unit interval `[0, 1]` with `intervals` cells.
    pub fn unit(intervals: usize) -> Self {
        Self::new(0.0, 1.0, intervals)
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / self.intervals as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.intervals {
            self.end
        } else {
            self.start + i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Trapezoid weights; `weights · f` integrates `f` over the grid.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.step();
        let mut w = vec![h; self.len()];
        w[0] = 0.5 * h;
        w[self.intervals] = 0.5 * h;
        w
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        trapezoid(values, self.step())
    }

    /// Index of the cell containing `x` together with the local offset in `[0, 1]`.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let h = self.step();
        let pos = ((x - self.start) / h).clamp(0.0, self.intervals as f64);
        let i = (pos.floor() as usize).min(self.intervals - 1);
        (i, pos - i as f64)
    }

    /// Linear interpolation of nodal `values` at `x`; zero outside the grid.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        if x < self.start || x > self.end {
            return 0.0;
        }
        let (i, theta) = self.locate(x);
        values[i] * (1.0 - theta) + values[i + 1] * theta
    }

    /// Four-point Lagrange interpolation (one-sided stencils in the end cells).
    pub fn interpolate_cubic(&self, values: &[f64], x: f64) -> f64 {
        if x < self.start || x > self.end {
            return 0.0;
        }
        if self.intervals < 3 {
            return self.interpolate(values, x);
        }
        let (i, _) = self.locate(x);
        let base = i.saturating_sub(1).min(self.intervals - 3);
        let t = (x - self.node(base)) / self.step();
        let f = &values[base..base + 4];
        // Lagrange basis on the nodes 0, 1, 2, 3
        let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        l0 * f[0] + l1 * f[1] + l2 * f[2] + l3 * f[3]
    }
}

pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// Cumulative trapezoid integral, starting from zero at the first node.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// First derivative: centered in the interior, second-order one-sided at the ends.
pub fn first_derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3, "first derivative needs at least 3 nodes");
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    d
}

/// Second derivative: centered in the interior, second-order one-sided at the ends.
pub fn second_derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 4, "second derivative needs at least 4 nodes");
    let h2 = h * h;
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / h2;
    }
    d[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / h2;
    d[n - 1] =
        (2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4]) / h2;
    d
}

/// Plain second differences `f[i+1] - 2 f[i] + f[i-1]` (no scaling), length `n - 2`.
pub fn second_differences(values: &[f64]) -> Vec<f64> {
    values
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .collect()
}

pub fn first_differences(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] - w[0]).collect()
}
