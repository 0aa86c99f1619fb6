//! The RK4 integrator on the AYS model and on the Lorenz system, each
//! against a 100x finer reference.
//!
//! ```text
//! cargo run --release --example integrator
//! ```

use ays_rl::env::{
    black_fixed_point, derivatives, integrate, integrate_step_with, normalize, Action, AysParams,
    Lorenz, NormState, DEFAULT_SUBSTEPS,
};

fn main() -> ays_rl::Result<()> {
    let params = AysParams::default();
    for action in Action::ALL {
        let coarse = integrate_step_with(NormState::START, action, &params, DEFAULT_SUBSTEPS)?;
        let fine = integrate_step_with(NormState::START, action, &params, DEFAULT_SUBSTEPS * 100)?;
        let err = coarse
            .to_array()
            .iter()
            .zip(fine.to_array())
            .map(|(c, f)| (c - f).abs())
            .fold(0.0, f64::max);
        println!("{:<8} one year from s0: {coarse:?}  |coarse - fine| = {err:.2e}", action.name());
    }

    let black = black_fixed_point(&params);
    let d = derivatives(black, &params);
    println!("Black fixed point {:?} (normalized {:?}), derivatives {d:?}", black, normalize(black));

    let lorenz = Lorenz::default();
    let start = [1.0, 1.0, 1.0];
    let coarse = integrate(start, 1.0, 1_000, |v| lorenz.rhs(v));
    let fine = integrate(start, 1.0, 100_000, |v| lorenz.rhs(v));
    let err = coarse
        .iter()
        .zip(fine)
        .map(|(c, f)| (c - f).abs())
        .fold(0.0, f64::max);
    println!("Lorenz t=1, h=1e-3: {coarse:?}  |coarse - fine| = {err:.2e}");
    Ok(())
}
