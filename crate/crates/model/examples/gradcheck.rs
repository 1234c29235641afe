//! Central-difference check of the FiLM² layer and a two-layer txt2π.
//!
//! ```text
//! cargo run --release -p txt2pi --example gradcheck
//! ```

use txt2pi::gradcheck::{film2_gradcheck, txt2pi_gradcheck};
use txt2pi::ModelError;

pub fn run_example() -> Result<(), ModelError> {
    let film = film2_gradcheck(0, 1e-5)?;
    println!(
        "film2:  {} parameters, max relative error {:.3e}",
        film.parameters, film.max_relative_error
    );
    let full = txt2pi_gradcheck(0, 1e-5)?;
    println!(
        "txt2pi: {} parameters, max relative error {:.3e}",
        full.parameters, full.max_relative_error
    );
    Ok(())
}

fn main() -> Result<(), ModelError> {
    run_example()
}
