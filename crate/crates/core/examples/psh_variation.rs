//! Plurisubharmonic variation of the Bergman kernel along a geodesic and a subgeodesic,
//! against the convexified-norm mutation.

use kahler_lab::bergman::{assemble, psh_variation_check};
use kahler_lab::experiments::generate_corpus;
use kahler_lab::geodesic::{subgeodesic_make, weak_geodesic};

fn main() -> kahler_lab::Result<()> {
    let c = generate_corpus(0, 3, 256)?;
    let paths = [("geodesic", weak_geodesic(&c[0], &c[1], 17)?), ("subgeodesic", subgeodesic_make(&c[0], &c[1], 0.2, 17)?)];
    for (name, path) in &paths {
        let sys = assemble(path, 16)?;
        println!(
            "{name:>11}: min eigenvalue {:+.3e}, mutated {:+.3e}",
            psh_variation_check(&sys)?,
            psh_variation_check(&sys.convexified(50.0))?
        );
    }
    Ok(())
}
