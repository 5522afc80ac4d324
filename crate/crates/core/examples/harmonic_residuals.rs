//! Checks that the closed-form hitting probabilities are harmonic for the
//! limit walk, interior and boundary alike.

use tandem_overflow::harmonic::{
    admissible_h_beta, default_sample, residual_check, w_star_3d_combination, w_star_combination,
};
use tandem_overflow::{Rates, WalkKind, C64};

fn main() -> tandem_overflow::Result<()> {
    let two = Rates::two(0.1, 0.4, 0.5)?;
    let sample2 = default_sample(2);
    let cases = [
        ("W* (two stations)", w_star_combination(&two)?),
        (
            "h_beta, beta = 0.15+0.01i",
            admissible_h_beta(&two, C64::new(0.15, 0.01))?,
        ),
    ];
    for (name, f) in cases {
        let rep = residual_check(&two, WalkKind::LimitY, &f, &sample2);
        println!(
            "{name}: max residual {:.2e} over {} points",
            rep.max_residual(),
            rep.points_checked
        );
    }

    let three = Rates::three(0.1, 0.4, 0.5, 0.3)?;
    let rep = residual_check(
        &three,
        WalkKind::LimitY,
        &w_star_3d_combination(&three)?,
        &default_sample(3),
    );
    println!(
        "W* (three stations): interior {:.2e}, boundaries {:?}",
        rep.max_interior_residual,
        rep.max_boundary_residual
            .iter()
            .map(|a| (a.axis, a.max))
            .collect::<Vec<_>>()
    );
    Ok(())
}
