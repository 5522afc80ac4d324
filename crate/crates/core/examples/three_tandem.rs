//! Three stations in series: closed form against finite-horizon dynamic
//! programming, which approaches it from below.

use tandem_overflow::exactsolve::horizon_dp;
use tandem_overflow::harmonic::w_star_3d;
use tandem_overflow::{LatticePoint, Rates};

fn main() -> tandem_overflow::Result<()> {
    let rates = Rates::three(0.1, 0.4, 0.5, 0.3)?;
    let y = LatticePoint::d3(6, 1, 2);
    let w = w_star_3d(&rates, &y)?;
    println!("closed form at {y}: {w:.10}");
    for k in [10, 20, 40, 80] {
        let dp = horizon_dp(&rates, &y, k)?;
        println!(
            "horizon {k:>3}: {dp:.10} (relative gap {:.2e})",
            (w - dp) / w
        );
    }
    Ok(())
}
