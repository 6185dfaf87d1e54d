//! Bergman measures converging to the curvature form in total variation.

use kahler_lab::bergman::tv_convergence;
use kahler_lab::experiments::glued_profile;
use kahler_lab::potential::SymplecticPotential;

fn main() -> kahler_lab::Result<()> {
    let ks = [8, 16, 32, 64];
    for (name, u) in [("fubini-study", SymplecticPotential::fubini_study(512)), ("glued", glued_profile(512)?)] {
        let tv = tv_convergence(&u, &ks)?;
        for (k, tv) in ks.iter().zip(tv) {
            println!("{name:>12}  k = {k:>3}  TV = {tv:.6}");
        }
    }
    Ok(())
}
