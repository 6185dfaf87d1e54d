//! C² cubic spline on a uniform grid with not-a-knot end conditions.

use super::grid::UniformGrid;

#[derive(Debug, Clone)]
pub struct CubicSpline {
    grid: UniformGrid,
    values: Vec<f64>,
    /// Second derivatives at the nodes.
    moments: Vec<f64>,
}

impl CubicSpline {
    pub fn new(grid: UniformGrid, values: &[f64]) -> Self {
        assert_eq!(grid.len(), values.len());
        let n = grid.intervals;
        let h = grid.step();
        let moments = if n < 3 {
            // too few cells for not-a-knot; fall back to the natural spline
            natural_moments(values, h)
        } else {
            not_a_knot_moments(values, h)
        };
        Self {
            grid,
            values: values.to_vec(),
            moments,
        }
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    fn cell(&self, x: f64) -> (usize, f64, f64) {
        let (i, _) = self.grid.locate(x);
        let h = self.grid.step();
        // allow mild extrapolation from the end cells
        let theta = (x - self.grid.node(i)) / h;
        (i, theta, h)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, a, h) = self.cell(x);
        let b = 1.0 - a;
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        b * self.values[i] + a * self.values[i + 1]
            + h * h / 6.0 * ((b * b * b - b) * m0 + (a * a * a - a) * m1)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (i, a, h) = self.cell(x);
        let b = 1.0 - a;
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        (self.values[i + 1] - self.values[i]) / h
            + h / 6.0 * (-(3.0 * b * b - 1.0) * m0 + (3.0 * a * a - 1.0) * m1)
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        let (i, a, _) = self.cell(x);
        (1.0 - a) * self.moments[i] + a * self.moments[i + 1]
    }

    /// Value and first two derivatives in one pass.
    pub fn eval_all(&self, x: f64) -> (f64, f64, f64) {
        (self.eval(x), self.derivative(x), self.second_derivative(x))
    }

    pub fn nodal_second_derivatives(&self) -> &[f64] {
        &self.moments
    }
}

fn natural_moments(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let k = n - 2;
    let sub = vec![1.0; k];
    let diag = vec![4.0; k];
    let sup = vec![1.0; k];
    let rhs: Vec<f64> = (1..n - 1)
        .map(|i| 6.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h))
        .collect();
    let sol = solve_tridiagonal(&sub, &diag, &sup, &rhs);
    m[1..n - 1].copy_from_slice(&sol);
    m
}

/// Not-a-knot: third derivative continuous across the first and last interior knots,
/// i.e. `M0 = 2 M1 - M2` and `Mn = 2 M(n-1) - M(n-2)` on a uniform grid.
fn not_a_knot_moments(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let k = n - 2;
    let mut sub = vec![1.0; k];
    let mut diag = vec![4.0; k];
    let mut sup = vec![1.0; k];
    let rhs: Vec<f64> = (1..n - 1)
        .map(|i| 6.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h))
        .collect();
    // substitute M0 = 2 M1 - M2 into the first row: (4 + 2) M1 + (1 - 1) M2
    diag[0] = 6.0;
    sup[0] = 0.0;
    diag[k - 1] = 6.0;
    sub[k - 1] = 0.0;
    let sol = solve_tridiagonal(&sub, &diag, &sup, &rhs);
    let mut m = vec![0.0; n];
    m[1..n - 1].copy_from_slice(&sol);
    m[0] = 2.0 * m[1] - m[2];
    m[n - 1] = 2.0 * m[n - 2] - m[n - 3];
    m
}

/// Thomas algorithm; `sub[0]` and `sup[k-1]` are ignored.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let k = diag.len();
    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..k {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < k { sup[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; k];
    x[k - 1] = d[k - 1];
    for i in (0..k - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        let g = UniformGrid::new(-1.0, 1.0, 12);
        let f = |x: f64| 2.0 * x * x * x - x * x + 0.5 * x + 3.0;
        let v: Vec<f64> = g.nodes().iter().map(|&x| f(x)).collect();
        let s = CubicSpline::new(g, &v);
        for &x in &[-0.97, -0.31, 0.0, 0.42, 0.999] {
            assert!((s.eval(x) - f(x)).abs() < 1e-12);
            assert!((s.derivative(x) - (6.0 * x * x - 2.0 * x + 0.5)).abs() < 1e-10);
            assert!((s.second_derivative(x) - (12.0 * x - 2.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn fourth_order_on_smooth_data() {
        let err = |n: usize| {
            let g = UniformGrid::unit(n);
            let v: Vec<f64> = g.nodes().iter().map(|x| (3.0 * x).sin()).collect();
            let s = CubicSpline::new(g, &v);
            (0..1000)
                .map(|i| {
                    let x = (i as f64 + 0.5) / 1000.0;
                    (s.eval(x) - (3.0 * x).sin()).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(32) / err(64);
        assert!(ratio > 12.0, "ratio {ratio}");
    }
}
