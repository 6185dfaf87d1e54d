use crate::error::{LabError, Result};
use crate::numerics::logsumexp;
use crate::potential::GridMeasure;

/// Densities below this fraction of the peak are treated as zero.
pub const DENSITY_FLOOR: f64 = 1e-14;

/// Probability weights `w_i ρ_i / Σ w ρ` of a measure under the trapezoid rule.
fn weights(m: &GridMeasure) -> Result<Vec<f64>> {
    let w = m.grid().trapezoid_weights();
    let peak = m.density().iter().copied().fold(0.0, f64::max);
    let floor = DENSITY_FLOOR * peak;
    let raw: Vec<f64> = w
        .iter()
        .zip(m.density())
        .map(|(w, d)| if *d > floor { w * d } else { 0.0 })
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(LabError::InvalidArgument("null measure".into()));
    }
    Ok(raw.into_iter().map(|p| p / total).collect())
}

fn check_common(mu: &GridMeasure, mu0: &GridMeasure) -> Result<()> {
    if mu.grid() != mu0.grid() || mu.coordinate() != mu0.coordinate() {
        return Err(LabError::GridMismatch {
            left: mu.grid().intervals,
            right: mu0.grid().intervals,
        });
    }
    Ok(())
}

fn log_ratios(mu: &GridMeasure, mu0: &GridMeasure) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    check_common(mu, mu0)?;
    let p = weights(mu)?;
    let r = weights(mu0)?;
    let lr = p
        .iter()
        .zip(&r)
        .map(|(&p, &r)| {
            if p == 0.0 {
                0.0
            } else if r == 0.0 {
                f64::INFINITY
            } else {
                (p / r).ln()
            }
        })
        .collect();
    Ok((p, r, lr))
}

/// Relative entropy `∫ log(dμ/dμ_0) dμ` of the normalized measures, `0 log 0 = 0`.
///
/// Returns `+∞` when `μ` charges a node where `μ_0` vanishes; see [`entropy_checked`]
/// for the variant that reports the node.
pub fn entropy(mu: &GridMeasure, mu0: &GridMeasure) -> Result<f64> {
    let (p, _, lr) = log_ratios(mu, mu0)?;
    Ok(p.iter().zip(&lr).map(|(p, l)| if *p == 0.0 { 0.0 } else { p * l }).sum())
}

pub fn entropy_checked(mu: &GridMeasure, mu0: &GridMeasure) -> Result<f64> {
    let (p, _, lr) = log_ratios(mu, mu0)?;
    if let Some(index) = lr.iter().position(|l| l.is_infinite()) {
        return Err(LabError::NotAbsolutelyContinuous { index });
    }
    Ok(p.iter().zip(&lr).map(|(p, l)| p * l).sum())
}

/// Entropy with the logarithm floored: `∫ max(log(dμ/dμ_0), −a) dμ`.
pub fn entropy_truncated(mu: &GridMeasure, mu0: &GridMeasure, a: f64) -> Result<f64> {
    let (p, _, lr) = log_ratios(mu, mu0)?;
    Ok(p.iter().zip(&lr).map(|(p, l)| if *p == 0.0 { 0.0 } else { p * l.max(-a) }).sum())
}

/// `H(μ|μ_0) − (∫ f dμ − log ∫ e^f dμ_0)`, nonnegative by the variational formula.
pub fn entropy_legendre_gap(mu: &GridMeasure, mu0: &GridMeasure, f: &[f64]) -> Result<f64> {
    let (p, r, lr) = log_ratios(mu, mu0)?;
    if f.len() != p.len() {
        return Err(LabError::InvalidArgument(format!("{} samples for {} nodes", f.len(), p.len())));
    }
    let h: f64 = p.iter().zip(&lr).map(|(p, l)| if *p == 0.0 { 0.0 } else { p * l }).sum();
    let mean: f64 = p.iter().zip(f).map(|(p, f)| p * f).sum();
    let terms: Vec<f64> = r
        .iter()
        .zip(f)
        .filter(|(r, _)| **r > 0.0)
        .map(|(r, f)| r.ln() + f)
        .collect();
    Ok(h - (mean - logsumexp(&terms)))
}

/// `log(dμ/dμ_0)` of the normalized measures, the optimal test function.
pub fn log_density(mu: &GridMeasure, mu0: &GridMeasure) -> Result<Vec<f64>> {
    let (p, _, lr) = log_ratios(mu, mu0)?;
    Ok(p.iter().zip(lr).map(|(p, l)| if *p == 0.0 { 0.0 } else { l }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::UniformGrid;
    use crate::potential::Coordinate;
    use proptest::prelude::*;

    fn gaussian(m: f64, s: f64) -> GridMeasure {
        let grid = UniformGrid::new(-12.0, 12.0, 4000);
        GridMeasure::from_fn(Coordinate::SAxis, grid, |x| {
            (-(x - m) * (x - m) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
        })
        .unwrap()
    }

    #[test]
    fn self_entropy_vanishes() {
        let m = gaussian(0.3, 1.2);
        assert!(entropy(&m, &m).unwrap().abs() < 1e-15);
    }

    #[test]
    fn gaussian_kl_matches_closed_form() {
        let (m1, s1, m2, s2): (f64, f64, f64, f64) = (0.4, 0.8, -0.3, 1.3);
        let kl = (s2 / s1).ln() + (s1 * s1 + (m1 - m2) * (m1 - m2)) / (2.0 * s2 * s2) - 0.5;
        let h = entropy(&gaussian(m1, s1), &gaussian(m2, s2)).unwrap();
        assert!((h - kl).abs() < 1e-5, "{h} vs {kl}");
    }

    #[test]
    fn singular_measure_is_infinite() {
        let g = UniformGrid::unit(4);
        let mu = GridMeasure::new(Coordinate::Moment, g, vec![1.0; 5]).unwrap();
        let mu0 = GridMeasure::new(Coordinate::Moment, g, vec![1.0, 1.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(entropy(&mu, &mu0).unwrap(), f64::INFINITY);
        assert!(matches!(
            entropy_checked(&mu, &mu0),
            Err(LabError::NotAbsolutelyContinuous { index: 2 })
        ));
        assert!(entropy(&mu0, &mu).unwrap().is_finite());
    }

    #[test]
    fn optimal_test_function_closes_the_gap() {
        let (mu, mu0) = (gaussian(0.5, 0.9), gaussian(0.0, 1.0));
        let f = log_density(&mu, &mu0).unwrap();
        // only the tail mass of μ_0 beyond the density floor of μ is left
        assert!(entropy_legendre_gap(&mu, &mu0, &f).unwrap().abs() < 1e-9);
        let zero = vec![0.0; f.len()];
        let gap = entropy_legendre_gap(&mu, &mu0, &zero).unwrap();
        assert!((gap - entropy(&mu, &mu0).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn truncation_converges() {
        let (mu, mu0) = (gaussian(1.0, 0.5), gaussian(0.0, 1.0));
        let h = entropy(&mu, &mu0).unwrap();
        assert!(entropy_truncated(&mu, &mu0, 1.0).unwrap() > h);
        assert!((entropy_truncated(&mu, &mu0, 200.0).unwrap() - h).abs() < 1e-14);
    }

    fn moment(d: &[f64]) -> GridMeasure {
        GridMeasure::new(Coordinate::Moment, UniformGrid::unit(d.len() - 1), d.to_vec()).unwrap()
    }

    proptest! {
        #[test]
        fn duality_gap_is_nonnegative(
            a in prop::collection::vec(0.05f64..3.0, 33),
            b in prop::collection::vec(0.05f64..3.0, 33),
            f in prop::collection::vec(-4.0f64..4.0, 33),
        ) {
            prop_assert!(entropy_legendre_gap(&moment(&a), &moment(&b), &f).unwrap() >= -1e-9);
        }

        #[test]
        fn entropy_is_convex_in_the_measure(
            a in prop::collection::vec(0.05f64..3.0, 17),
            b in prop::collection::vec(0.05f64..3.0, 17),
            c in prop::collection::vec(0.05f64..3.0, 17),
            s in 0.0f64..1.0,
        ) {
            let (m0, m1, r) = (moment(&a).normalized().unwrap(), moment(&b).normalized().unwrap(), moment(&c));
            let mid = entropy(&m0.mix(&m1, s).unwrap(), &r).unwrap();
            let chord = (1.0 - s) * entropy(&m0, &r).unwrap() + s * entropy(&m1, &r).unwrap();
            prop_assert!(mid <= chord + 1e-9);
        }

        #[test]
        fn entropy_is_lower_semicontinuous(
            a in prop::collection::vec(0.05f64..3.0, 17),
            e in prop::collection::vec(-1.0f64..1.0, 17),
        ) {
            let r = moment(&vec![1.0; 17]);
            let h = entropy(&moment(&a), &r).unwrap();
            let mut worst = f64::INFINITY;
            for k in 3..7 {
                let eps = 10f64.powi(-2 * k);
                let d: Vec<f64> = a.iter().zip(&e).map(|(a, e)| a * (1.0 + eps * e)).collect();
                worst = worst.min(entropy(&moment(&d), &r).unwrap());
            }
            prop_assert!(worst >= h - 1e-6);
        }
    }
}
