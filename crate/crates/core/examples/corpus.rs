//! A seeded corpus of potentials, written to JSON and read back.

use kahler_lab::experiments::{corpus_from_json, corpus_to_json, generate_corpus};

fn main() -> kahler_lab::Result<()> {
    let corpus = generate_corpus(42, 6, 64)?;
    let json = corpus_to_json(&corpus)?;
    let back = corpus_from_json(&json)?;
    for (i, u) in back.iter().enumerate() {
        let g = u.g_values();
        println!("element {i}: g(0) = {:+.4}  g(1/2) = {:+.4}  g(1) = {:+.4}", g[0], g[32], g[64]);
    }
    println!("{} bytes of JSON", json.len());
    Ok(())
}
