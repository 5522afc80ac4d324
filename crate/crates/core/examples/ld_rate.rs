//! Large-deviation decay rate of the overflow probability and its exact
//! counterpart for growing buffers.

use tandem_overflow::exactsolve::SolverOptions;
use tandem_overflow::report::{ld_cross_check, ld_rate};
use tandem_overflow::Rates;

fn main() -> tandem_overflow::Result<()> {
    let rates = Rates::two(0.1, 0.4, 0.5)?;
    let x = [0.3, 0.2];
    let rep = ld_rate(&rates, x)?;
    println!(
        "gamma = {:.6}, V(x) = {:.6}, r1 = {:?}, r3 = {:?}",
        rep.gamma, rep.v_of_x, rep.r1, rep.r3
    );
    for c in ld_cross_check(&rates, x, &[20, 40, 60, 80], &SolverOptions::default())? {
        println!(
            "n = {:>3}: -(1/n) log p_n = {:.8}, |diff| = {:.2e}",
            c.n, c.empirical, c.abs_diff
        );
    }
    Ok(())
}
