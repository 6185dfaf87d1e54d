//! Bergman measures of a glued weight on the unit disc stay bounded as `k` grows.

use kahler_lab::bergman::{disc_bergman, glued_disc_weight};
use kahler_lab::numerics::UniformGrid;

fn main() -> kahler_lab::Result<()> {
    let grid = UniformGrid::unit(400);
    let phi: Vec<f64> = grid.nodes().iter().map(|&r| glued_disc_weight(r, 0.05)).collect();
    for k in [8, 16, 32, 64] {
        let m = disc_bergman(&phi, k)?;
        println!("k = {k:>2}  mass {:.6}  sup on r <= 0.9: {:.4}", m.mass, m.sup_on(0.0, 0.9));
    }
    Ok(())
}
