//! Hamiltonians, pairings, the Futaki invariant and E_V for the field z d/dz.

use kahler_lab::experiments::generate_corpus;
use kahler_lab::fields::{energy_ev, futaki, hamiltonian_residual, inner_product, GradientField};
use kahler_lab::geodesic::weak_geodesic;

fn main() -> kahler_lab::Result<()> {
    let v = GradientField::model();
    let c = generate_corpus(0, 4, 1024)?;
    for (i, u) in c[..3].iter().enumerate() {
        println!(
            "metric {i}: <V,V> = {:.9}  Futaki = {:+.3e}  contraction residual {:.3e}",
            inner_product(&v, &v, u),
            futaki(&v, u)?,
            hamiltonian_residual(&v, u)
        );
    }
    let ev = energy_ev(&weak_geodesic(&c[1], &c[2], 17)?, &v)?;
    println!("E_V along a geodesic: max |second difference| {:.3e}", ev.max_abs_second_diff());
    Ok(())
}
