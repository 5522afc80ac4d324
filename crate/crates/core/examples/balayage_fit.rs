//! Recovers the hitting probability by least-squares fitting harmonic
//! functions to 1 on the exit face.

use tandem_overflow::harmonic::{balayage_fit, w_star_2d, BasisElement};
use tandem_overflow::{LatticePoint, Rates, C64};

fn main() -> tandem_overflow::Result<()> {
    let rates = Rates::two(0.1, 0.4, 0.5)?;
    let rho1 = C64::new(rates.rho(0), 0.0);
    let basis = [
        BasisElement::Conjugate(C64::new(rates.rho(1), 0.0)),
        BasisElement::Bracket {
            beta: rho1,
            alpha: rho1,
        },
    ];
    let samples: Vec<_> = (0..50).map(|a| LatticePoint::d2(a, a)).collect();
    let fit = balayage_fit(&rates, &basis, &vec![1.0; samples.len()], &samples)?;
    println!("weights: {:?}", fit.weights);
    println!("max boundary error: {:.2e}", fit.max_boundary_error);

    let y = LatticePoint::d2(7, 2);
    println!("fit at {y}: {:.10e}", fit.combination.eval_real(&y)?);
    println!("W* at {y}:  {:.10e}", w_star_2d(&rates, &y)?);
    Ok(())
}
