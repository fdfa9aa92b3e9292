//! Key rate against loss for every estimator at two data sizes, with the
//! loss at which each curve reaches zero.

use qkd_fluct::bounds::{FailureBudget, Method};
use qkd_fluct::estimator::{evaluate_point, EstimatorOptions};
use qkd_fluct::model::{ChannelParams, SourceConfig};

fn main() -> Result<(), qkd_fluct::error::Error> {
    let budget = FailureBudget::uniform(1e-10)?.with_u_alpha(6.4)?;
    let opts = EstimatorOptions::default();
    let losses: Vec<f64> = (0..=88).map(|i| i as f64 * 0.5).collect();

    for n in [5e10, 1e12] {
        println!("N = {n:e}");
        let source = SourceConfig::default().with_n_total(n);
        for method in Method::ALL {
            let mut cutoff = None;
            let mut at_10 = 0.0;
            for &t in &losses {
                let ch = ChannelParams::default().with_loss(t);
                let r = evaluate_point(&ch, &source, &budget, method, &opts)?.point.rate;
                if r > 0.0 {
                    cutoff = Some(t);
                }
                if t == 10.0 {
                    at_10 = r;
                }
            }
            let cutoff = cutoff.map_or("none".to_string(), |t| format!("{t:.1} dB"));
            println!("  {method:>3}: R(10 dB) = {at_10:.4e}, last positive rate at {cutoff}");
        }
    }
    Ok(())
}
