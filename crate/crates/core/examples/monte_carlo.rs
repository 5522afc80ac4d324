//! Seeded Monte Carlo estimates next to the exact and closed-form values.

use tandem_overflow::exactsolve::{solve_pn, SolverOptions};
use tandem_overflow::harmonic::w_star_2d;
use tandem_overflow::montecarlo::{simulate_pn, simulate_y_hit, SimConfig};
use tandem_overflow::{LatticePoint, Rates};

fn main() -> tandem_overflow::Result<()> {
    let rates = Rates::two(0.2, 0.4, 0.3)?;
    let x = LatticePoint::d2(1, 0);
    let exact = solve_pn(&rates, 6, &SolverOptions::default())?
        .get(&x)
        .expect("in A_6");
    let est = simulate_pn(&SimConfig::overflow(rates, x, 6, 200_000, 1))?;
    let (lo, hi) = est.ci95();
    println!(
        "p_6(1,0): exact {exact:.6}, estimate {:.6} in [{lo:.6}, {hi:.6}]",
        est.p_hat
    );

    let rates = Rates::two(0.1, 0.4, 0.5)?;
    let y = LatticePoint::d2(3, 1);
    let est = simulate_y_hit(&SimConfig::limit(rates.clone(), y, 40, 200_000, 1))?;
    let (lo, hi) = est.bracket();
    println!(
        "P_y(hit) at {y}: W* {:.6}, estimate {:.6} in [{lo:.6}, {hi:.6}], {} escapes",
        w_star_2d(&rates, &y)?,
        est.p_hat,
        est.escapes
    );
    println!("{}", est.to_json());
    Ok(())
}
