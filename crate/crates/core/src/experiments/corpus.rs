use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::potential::{PotentialDocument, SymplecticPotential};

/// Degree of the Bernstein bumps.
const BUMP_DEGREE: usize = 4;
/// Bernstein coefficients are drawn from `[−c, c]`. With degree four this bounds
/// `|g''| ≤ 12 · 4c < 4 ≤ 1 / (x(1 − x))`, so every bump is strictly convex.
const BUMP_COEFF: f64 = 0.06;
/// Coefficient of the glued profile `a (x − 1/2)_+²`.
pub const GLUED_COEFF: f64 = 0.5;

fn bernstein(m: usize, d: usize, x: f64) -> f64 {
    let binom = (0..m).fold(1.0, |b, i| b * (d - i) as f64 / (i + 1) as f64);
    binom * x.powi(m as i32) * (1.0 - x).powi((d - m) as i32)
}

/// The C^{1,1} profile `g = a (x − 1/2)_+²`: curvature jumps at the equator.
pub fn glued_profile(n: usize) -> Result<SymplecticPotential> {
    SymplecticPotential::from_fn(n, |x| GLUED_COEFF * (x - 0.5).max(0.0).powi(2))
}

/// A random smooth bump `g = Σ c_m B_{m,4}(x)`.
pub fn random_bump<R: Rng>(rng: &mut R, n: usize) -> Result<SymplecticPotential> {
    let c: Vec<f64> = (0..=BUMP_DEGREE).map(|_| rng.gen_range(-BUMP_COEFF..=BUMP_COEFF)).collect();
    SymplecticPotential::from_fn(n, |x| {
        c.iter().enumerate().map(|(m, c)| c * bernstein(m, BUMP_DEGREE, x)).sum()
    })
}

/// A deterministic family of `count` potentials on `n` intervals.
///
/// Index 0 is Fubini–Study. When `count ≥ 2` the last entry is the glued profile and the
/// rest are random bumps drawn from a ChaCha stream seeded by `seed`.
pub fn generate_corpus(seed: u64, count: usize, n: usize) -> Result<Vec<SymplecticPotential>> {
    if count == 0 {
        return Err(LabError::InvalidArgument("corpus needs at least one element".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![SymplecticPotential::fubini_study(n)];
    for _ in 2..count {
        out.push(random_bump(&mut rng, n)?);
    }
    if count >= 2 {
        out.push(glued_profile(n)?);
    }
    Ok(out)
}

/// Consecutive pairs `(u_i, u_{i+1})`; the glued profile only ever appears as `u_1`.
pub fn corpus_pairs(corpus: &[SymplecticPotential]) -> Vec<(&SymplecticPotential, &SymplecticPotential)> {
    corpus.windows(2).map(|w| (&w[0], &w[1])).collect()
}

/// JSON array of potential documents.
pub fn corpus_to_json(corpus: &[SymplecticPotential]) -> Result<String> {
    let docs: Vec<PotentialDocument> = corpus.iter().map(PotentialDocument::from).collect();
    Ok(serde_json::to_string(&docs)?)
}

pub fn corpus_from_json(text: &str) -> Result<Vec<SymplecticPotential>> {
    let docs: Vec<PotentialDocument> = serde_json::from_str(text)?;
    docs.iter().map(PotentialDocument::to_symplectic).collect()
}

pub fn write_corpus(path: &Path, corpus: &[SymplecticPotential]) -> Result<()> {
    std::fs::write(path, corpus_to_json(corpus)?)?;
    Ok(())
}
