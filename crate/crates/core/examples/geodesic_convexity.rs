//! K-energy along a weak geodesic between Fubini–Study and the glued profile, and the
//! HMAE residual of the path.

use kahler_lab::experiments::glued_profile;
use kahler_lab::functionals::convexity_scan;
use kahler_lab::geodesic::{hmae_residual, weak_geodesic};
use kahler_lab::potential::SymplecticPotential;

fn main() -> kahler_lab::Result<()> {
    let u0 = SymplecticPotential::fubini_study(512);
    let u1 = glued_profile(512)?;
    let path = weak_geodesic(&u0, &u1, 33)?;
    let r = convexity_scan(&path)?;
    for (t, m) in r.t_grid.iter().zip(&r.values).step_by(4) {
        println!("t = {t:.3}  M = {m:.8}");
    }
    println!("min second difference {:.3e} (scale {:.3})", r.min_second_diff, r.scale());
    println!("HMAE residual {:.3e}", hmae_residual(&path)?);
    Ok(())
}
