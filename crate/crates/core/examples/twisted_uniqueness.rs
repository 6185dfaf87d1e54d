//! Damped Newton descent on the twisted functional from several starts.

use kahler_lab::experiments::generate_corpus;
use kahler_lab::fields::{sup_distance_mod_constants, twisted_csc_solve};
use kahler_lab::potential::TwistForm;

fn main() -> kahler_lab::Result<()> {
    let c = generate_corpus(0, 5, 128)?;
    let alpha = TwistForm::multiple_of_reference(0.2, 128)?;
    let out = twisted_csc_solve(&alpha, &c[1..4])?;
    for (i, o) in out.iter().enumerate() {
        println!(
            "start {i}: {} iterations, residual {:.2e}, distance to Fubini-Study {:.2e}",
            o.iterations(),
            o.residual(),
            sup_distance_mod_constants(&o.potential, &c[0])?
        );
    }
    Ok(())
}
