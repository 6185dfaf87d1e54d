//! The variational formula for relative entropy on the `s`-axis.

use kahler_lab::experiments::generate_corpus;
use kahler_lab::functionals::{entropy, entropy_legendre_gap, log_density};
use kahler_lab::numerics::UniformGrid;
use kahler_lab::potential::{Coordinate, GridMeasure, SymplecticPotential};

fn curvature(u: &SymplecticPotential, grid: UniformGrid) -> kahler_lab::Result<GridMeasure> {
    GridMeasure::new(Coordinate::SAxis, grid, grid.nodes().iter().map(|&s| u.radial_point(s).curvature).collect())
}

fn main() -> kahler_lab::Result<()> {
    let grid = UniformGrid::new(-30.0, 30.0, 3000);
    let c = generate_corpus(0, 3, 512)?;
    let (mu, mu0) = (curvature(&c[1], grid)?, curvature(&c[0], grid)?);
    println!("H(mu | mu0) = {:.6e}", entropy(&mu, &mu0)?);
    let zero = vec![0.0; grid.len()];
    println!("gap at f = 0:           {:.6e}", entropy_legendre_gap(&mu, &mu0, &zero)?);
    println!("gap at f = log density: {:.6e}", entropy_legendre_gap(&mu, &mu0, &log_density(&mu, &mu0)?)?);
    Ok(())
}
