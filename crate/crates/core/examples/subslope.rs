//! The sub-slope inequality between corpus neighbours.

use kahler_lab::experiments::{corpus_pairs, generate_corpus};
use kahler_lab::functionals::subslope_check;

fn main() -> kahler_lab::Result<()> {
    let corpus = generate_corpus(1, 6, 512)?;
    for (i, (a, b)) in corpus_pairs(&corpus).into_iter().enumerate() {
        let r = subslope_check(a, b)?;
        println!("pair {i}: lhs {:+.6e}  rhs {:+.6e}  slack {:.3e}", r.lhs, r.rhs, r.slack);
    }
    Ok(())
}
