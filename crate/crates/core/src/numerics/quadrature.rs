//! Adaptive Gauss–Kronrod (7/15) quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = r * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * r, ((kronrod - gauss) * r).abs())
}

/// The 15 Kronrod abscissae on `[-1, 1]` with Kronrod weights and embedded Gauss weights
/// (zero off the 7 Gauss nodes).
pub fn gk15_rule() -> ([f64; 15], [f64; 15], [f64; 15]) {
    let mut x = [0.0; 15];
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    for j in 0..7 {
        x[j] = -XGK[j];
        x[14 - j] = XGK[j];
        wk[j] = WGK[j];
        wk[14 - j] = WGK[j];
        if j % 2 == 1 {
            wg[j] = WG[j / 2];
            wg[14 - j] = WG[j / 2];
        }
    }
    wk[7] = WGK[7];
    wg[7] = WG[3];
    (x, wk, wg)
}

/// Globally adaptive bisection until the summed error estimate falls below
/// `max(abs_tol, rel_tol * |I|)` or `max_intervals` is exhausted.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Integral {
    let (v0, e0) = gk15(&f, a, b);
    let mut pieces = vec![(a, b, v0, e0)];
    let mut evaluations = 15;
    loop {
        let value: f64 = pieces.iter().map(|p| p.2).sum();
        let error: f64 = pieces.iter().map(|p| p.3).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Integral {
                value,
                error,
                evaluations,
                converged: true,
            };
        }
        if pieces.len() >= max_intervals {
            return Integral {
                value,
                error,
                evaluations,
                converged: false,
            };
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (vl, el) = gk15(&f, lo, mid);
        let (vr, er) = gk15(&f, mid, hi);
        evaluations += 30;
        pieces.push((lo, mid, vl, el));
        pieces.push((mid, hi, vr, er));
    }
}

/// Integrate over `[a, b]` after splitting at the interior points `breaks`.
pub fn integrate_split<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
    max_intervals: usize,
) -> Integral {
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&c| c > a && c < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    let mut total = Integral {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
        converged: true,
    };
    for w in cuts.windows(2) {
        let part = integrate(&f, w[0], w[1], rel_tol, 0.0, max_intervals);
        total.value += part.value;
        total.error += part.error;
        total.evaluations += part.evaluations;
        total.converged &= part.converged;
    }
    total
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_gaussian_to_high_accuracy() {
        let r = integrate(|x: f64| (-x * x).exp(), -10.0, 10.0, 1e-13, 0.0, 500);
        assert!(r.converged);
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn handles_endpoint_log_singularity() {
        // ∫_0^1 -ln x dx = 1
        let r = integrate(|x: f64| -x.ln(), 0.0, 1.0, 1e-11, 0.0, 2000);
        assert!((r.value - 1.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gk15_rule_sums_and_embeds() {
        let (x, wk, wg) = gk15_rule();
        assert!((wk.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!((wg.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let k: f64 = x.iter().zip(&wk).map(|(x, w)| w * x.powi(20)).sum();
        assert!((k - 2.0 / 21.0).abs() < 1e-14);
    }
}
