//! First-order correction of Fubini–Study under a small skew twist.

use kahler_lab::experiments::{skew_twist, PERTURBATION_S};
use kahler_lab::fields::perturbation_order_check;
use kahler_lab::potential::SymplecticPotential;

fn main() -> kahler_lab::Result<()> {
    let r = perturbation_order_check(&SymplecticPotential::fubini_study(128), &skew_twist(), &PERTURBATION_S)?;
    for i in 0..r.s.len() {
        println!("s = {:.0e}  with v0 {:.3e}  without {:.3e}", r.s[i], r.with_correction[i], r.without_correction[i]);
    }
    println!("slope {:.3} (control {:.3}), rounding floor {:.1e}", r.slope, r.control_slope, r.rounding_floor);
    Ok(())
}
