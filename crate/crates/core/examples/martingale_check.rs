//! Martingale property of the running click frequency on an after-pulsed chain.

use qkd_fluct::mc_oracle::{martingale_verify, MarkovClickModel, MartingaleMode};

fn main() -> Result<(), qkd_fluct::error::Error> {
    let model = MarkovClickModel::new(0.01, 0.04, 1)?;
    for mode in [MartingaleMode::ExactAlgebra, MartingaleMode::FixedTransition] {
        let r = martingale_verify(&model, 100_000, 10, mode)?;
        println!("{mode:?}: max residual {:.3e}", r.max_residual());
        for (k, res) in r.prefixes.iter().zip(&r.residuals) {
            println!("  k = {k:>6}  residual {res:.3e}  k*residual {:.3e}", *k as f64 * res);
        }
    }
    Ok(())
}
