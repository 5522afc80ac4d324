//! Exact overflow probabilities against the closed-form approximation for a
//! buffer of 60 shared by two stations.

use tandem_overflow::exactsolve::{solve_pn, SolverOptions};
use tandem_overflow::harmonic::w_star_2d;
use tandem_overflow::model::transform_tn;
use tandem_overflow::{LatticePoint, Rates};

fn main() -> tandem_overflow::Result<()> {
    let rates = Rates::two(0.1, 0.4, 0.5)?;
    let n = 60;
    let field = solve_pn(&rates, n, &SolverOptions::default())?;
    println!("Gauss-Seidel sweeps: {}", field.sweeps());
    println!(
        "{:>8} {:>14} {:>14} {:>12}",
        "x", "exact", "W*(T_n x)", "rel err"
    );
    for x in [(1, 0), (2, 0), (9, 0), (10, 10), (30, 5)] {
        let x = LatticePoint::d2(x.0, x.1);
        let p = field.get(&x).expect("point inside A_n");
        let w = w_star_2d(&rates, &transform_tn(n, &x))?;
        println!(
            "{:>8} {p:>14.4e} {w:>14.4e} {:>12.3e}",
            x.to_string(),
            (w - p) / p
        );
    }
    Ok(())
}
