//! Relative error of the approximation over the whole simplex, written as
//! CSV for plotting.

use std::fs;

use tandem_overflow::exactsolve::SolverOptions;
use tandem_overflow::report::{sweep_csv, sweep_max_errors, sweep_rows};
use tandem_overflow::Rates;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rates = Rates::two(0.1, 0.4, 0.5)?;
    let rows = sweep_rows(&rates, 60, 1, &SolverOptions::default())?;
    let (p_max, log_max) = sweep_max_errors(&rows, 5);
    println!("{} rows", rows.len());
    println!(
        "max |rel err| over x1+x2 >= 5: probabilities {p_max:.3e}, -(1/n) log scale {log_max:.3e}"
    );
    let path = std::env::temp_dir().join("tandem_sweep.csv");
    fs::write(&path, sweep_csv(&rows))?;
    println!("wrote {}", path.display());
    Ok(())
}
