//! The Lichnerowicz operator at Fubini–Study: kernel, a compatible solve, and a rejected
//! right-hand side.

use kahler_lab::fields::{lichnerowicz, solve_linearized};
use kahler_lab::potential::SymplecticPotential;

fn main() -> kahler_lab::Result<()> {
    let u = SymplecticPotential::fubini_study(128);
    let op = lichnerowicz(&u)?;
    println!("dimension {}, self-adjointness defect {:.3e}", op.dim(), op.self_adjointness_defect());
    let x = u.nodes();
    let nu: Vec<f64> = x.iter().map(|x| (2.0 * std::f64::consts::PI * x).cos()).collect();
    let sol = solve_linearized(&u, &nu)?;
    println!("compatible data: residual {:.3e}", sol.residual);
    let h: Vec<f64> = x.iter().map(|x| x - 0.5).collect();
    match solve_linearized(&u, &h) {
        Err(e) => println!("hamiltonian data rejected: {e}"),
        Ok(_) => println!("hamiltonian data unexpectedly accepted"),
    }
    Ok(())
}
