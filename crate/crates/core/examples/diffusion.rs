//! Continuous analog of the limit walk: the hitting probability of a
//! reflected Brownian motion with drift.

use tandem_overflow::harmonic::DiffusionAnalog;

fn main() -> tandem_overflow::Result<()> {
    let d = DiffusionAnalog::new(1.0, 2.0)?;
    for x in [[0.0, 0.0], [0.5, 0.0], [1.0, 0.5], [2.0, 1.0], [3.0, 0.0]] {
        println!(
            "V({:.1}, {:.1}) = {:.8}, LV = {:.1e}",
            x[0],
            x[1],
            d.value(x),
            d.generator_residual(x, 1e-4)
        );
    }
    for x1 in [0.1, 1.0] {
        println!(
            "dV/dx2 at ({x1:.1}, 0) = {:.1e}",
            d.neumann_residual(x1, 1e-4)
        );
    }
    Ok(())
}
