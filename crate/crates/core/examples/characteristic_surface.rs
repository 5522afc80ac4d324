//! Conjugate points on the characteristic surface and its real section.

use tandem_overflow::charsurface::{eval_p, real_section, solve_alpha};
use tandem_overflow::report::alpha_grid;
use tandem_overflow::{Rates, C64};

fn main() -> tandem_overflow::Result<()> {
    let rates = Rates::two(0.1, 0.5, 0.4)?;
    let (rho1, rho2) = (rates.rho(0), rates.rho(1));
    println!("rho1 = {rho1}, rho2 = {rho2}");

    let pair = solve_alpha(&rates, C64::new(rho2, 0.0))?;
    println!(
        "beta = rho2: alpha1 = {}, alpha2 = {}",
        pair.alpha1, pair.alpha2
    );

    let beta = C64::from_polar(0.5, 1.0);
    let pair = solve_alpha(&rates, beta)?;
    for a in [pair.alpha1, pair.alpha2] {
        let res = (eval_p(&rates, beta, a)? - 1.0).norm();
        println!("beta = {beta:.4}: alpha = {a:.6}, |p - 1| = {res:.1e}");
    }

    let section = real_section(&rates, &alpha_grid(0.1, 2.0, 8))?;
    println!("real section (alpha, beta):");
    for (a, b) in section {
        println!("  {a:.4} {b:.6}");
    }
    Ok(())
}
