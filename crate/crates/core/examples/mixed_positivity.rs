//! The decomposition inequality and mixed positivity along a geodesic.

use kahler_lab::bergman::{assemble, decomposition_inequality, mixed_positivity};
use kahler_lab::experiments::generate_corpus;
use kahler_lab::geodesic::weak_geodesic;

fn main() -> kahler_lab::Result<()> {
    let c = generate_corpus(0, 3, 256)?;
    let path = weak_geodesic(&c[1], &c[2], 17)?;
    let sys = assemble(&path, 16)?;
    let d = decomposition_inequality(&sys, &path)?;
    println!("decomposition: min eigenvalue {:+.3e}, identity gap {:.3e}", d.min_eig, d.identity_gap);
    for a in [Some(5.0), None] {
        let r = mixed_positivity(&sys, &path, a)?;
        println!("A = {a:?}: min pairing {:+.3e} at (t, s) = ({:.3}, {:.3})", r.min_pairing, r.t, r.s);
    }
    Ok(())
}
