use serde::Serialize;

use super::entropy::entropy_checked;
use crate::error::Result;
use crate::potential::{
    pullback, scalar_curvature, Coordinate, GridMeasure, MomentDensity, SymplecticPotential, R_BAR,
};

/// `𝓔(u) = ∫ u (ω_u + ω_0)`.
pub fn energy_e(u: &SymplecticPotential) -> f64 {
    let geo = u.nodal();
    let f: Vec<f64> = geo.u.iter().zip(&geo.rho0).map(|(u, r)| u * (1.0 + r)).collect();
    u.grid().integrate(&f)
}

/// `𝓔^T(u) = ∫ u T`.
pub fn energy_et<M: MomentDensity + ?Sized>(u: &SymplecticPotential, t: &M) -> f64 {
    let d = pullback(t, u);
    let geo = u.nodal();
    let f: Vec<f64> = geo.u.iter().zip(&d).map(|(u, d)| u * d).collect();
    u.grid().integrate(&f)
}

/// The three terms of the K-energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MabuchiTerms {
    pub energy: f64,
    pub ricci_energy: f64,
    pub entropy: f64,
}

impl MabuchiTerms {
    pub fn total(&self) -> f64 {
        0.5 * R_BAR * self.energy - self.ricci_energy + self.entropy
    }
}

/// `𝓔`, `𝓔^{Ric ω_0}` and `H_{ω_0}(ω_u)` from one pass over the nodal geometry.
///
/// `Ric ω_0 = 2 ω_0` has constant density 2 in the reference moment coordinate,
/// so its pullback is exactly `2 ρ_0`.
pub fn mabuchi_terms(u: &SymplecticPotential) -> Result<MabuchiTerms> {
    let geo = u.nodal();
    let grid = u.grid();
    let energy = grid.integrate(&geo.u.iter().zip(&geo.rho0).map(|(u, r)| u * (1.0 + r)).collect::<Vec<_>>());
    let ricci_energy =
        R_BAR * grid.integrate(&geo.u.iter().zip(&geo.rho0).map(|(u, r)| u * r).collect::<Vec<_>>());
    let area = GridMeasure::lebesgue(u.n());
    let reference = GridMeasure::new(Coordinate::Moment, *grid, geo.rho0)?;
    let entropy = entropy_checked(&area, &reference)?;
    Ok(MabuchiTerms {
        energy,
        ricci_energy,
        entropy,
    })
}

/// The K-energy `(R̄/2) 𝓔 − 𝓔^{Ric ω_0} + H_{ω_0}(ω_u)`.
pub fn mabuchi(u: &SymplecticPotential) -> Result<f64> {
    Ok(mabuchi_terms(u)?.total())
}

/// The K-energy in symplectic form,
/// `−∫ log(1 + x(1 − x) g'') + g(0) + g(1) − 2 ∫ g`.
pub fn donaldson(u: &SymplecticPotential) -> f64 {
    let geo = u.nodal();
    let f: Vec<f64> = geo
        .x
        .iter()
        .zip(&geo.gpp)
        .map(|(x, c)| -(1.0 + x * (1.0 - x) * c).ln())
        .collect();
    let g = u.g_values();
    u.grid().integrate(&f) + g[0] + g[g.len() - 1] - 2.0 * u.grid().integrate(g)
}

/// `𝓒(u) = ∫ (S − R̄)² ω_u`.
pub fn calabi_energy(u: &SymplecticPotential) -> Result<f64> {
    let s = scalar_curvature(u)?;
    let f: Vec<f64> = s.iter().map(|s| (s - R_BAR) * (s - R_BAR)).collect();
    Ok(u.grid().integrate(&f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{ricci_reference, TwistForm};

    fn bump(n: usize) -> SymplecticPotential {
        SymplecticPotential::from_fn(n, |x| 0.6 * x * x * (1.0 - x) * (1.0 - x) + 0.1 * x).unwrap()
    }

    #[test]
    fn energy_of_constants() {
        let fs = SymplecticPotential::fubini_study(128);
        assert_eq!(energy_e(&fs), 0.0);
        assert!((energy_e(&fs.add_constant(-0.7)) + 1.4).abs() < 1e-14);
        let ric = ricci_reference();
        assert!((energy_et(&fs.add_constant(0.3), &ric) - 0.6).abs() < 1e-8);
    }

    #[test]
    fn energy_is_minus_twice_the_mean_of_g() {
        for n in [256, 1024] {
            let u = bump(n);
            let oracle = -2.0 * u.grid().integrate(u.g_values());
            assert!((energy_e(&u) - oracle).abs() < 2.0 / (n * n) as f64, "n={n}");
        }
    }

    #[test]
    fn ricci_pullback_matches_the_reference_grid() {
        let u = bump(512);
        let exact = energy_et(&u, &TwistForm::multiple_of_reference(2.0, 8).unwrap());
        assert!((energy_et(&u, &ricci_reference()) - exact).abs() < 1e-8);
    }

    #[test]
    fn mabuchi_vanishes_on_constants() {
        let fs = SymplecticPotential::fubini_study(256);
        assert_eq!(mabuchi(&fs).unwrap(), 0.0);
        assert!(mabuchi(&fs.add_constant(1.3)).unwrap().abs() < 1e-12);
        let u = bump(1024);
        assert!((mabuchi(&u.add_constant(0.4)).unwrap() - mabuchi(&u).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn mabuchi_agrees_with_the_symplectic_form() {
        let errs: Vec<f64> = [128, 256, 512]
            .iter()
            .map(|&n| {
                let u = bump(n);
                (mabuchi(&u).unwrap() - donaldson(&u)).abs()
            })
            .collect();
        assert!(errs[2] < 1e-4, "{errs:?}");
        assert!(errs[1] / errs[2] > 3.0 && errs[0] / errs[1] > 3.0, "{errs:?}");
    }

    #[test]
    fn fubini_study_minimizes() {
        let u = bump(512);
        assert!(mabuchi(&u).unwrap() > 0.0);
        assert!(donaldson(&u) > 0.0);
    }

    #[test]
    fn calabi_energy_of_the_reference_vanishes() {
        assert!(calabi_energy(&SymplecticPotential::fubini_study(256)).unwrap() < 1e-20);
        let e: Vec<f64> = [512, 1024]
            .iter()
            .map(|&n| calabi_energy(&SymplecticPotential::from_fn(n, |x| 0.05 * x * x * (1.0 - x) * (1.0 - x)).unwrap()).unwrap())
            .collect();
        assert!(e[1] > 0.0 && ((e[0] - e[1]) / e[1]).abs() < 5e-3, "{e:?}");
    }
}
