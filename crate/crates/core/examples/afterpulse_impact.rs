//! Key rate with and without after-pulsing, standard-error analysis at u = 5.

use qkd_fluct::bounds::{failure_prob_for_quantile, FailureBudget, Method};
use qkd_fluct::estimator::{evaluate_point, EstimatorOptions};
use qkd_fluct::model::{ChannelParams, SourceConfig};

fn main() -> Result<(), qkd_fluct::error::Error> {
    let u = 5.0;
    let budget = FailureBudget::uniform(failure_prob_for_quantile(u))?.with_u_alpha(u)?;
    let source = SourceConfig::default().with_n_total(6e9);
    let opts = EstimatorOptions::default();

    println!("{:>5} {:>12} {:>12} {:>9}", "t_dB", "R(p_ap=0)", "R(p_ap=.04)", "reduction");
    for t in (0..=30).step_by(3) {
        let ch = ChannelParams::default().with_loss(t as f64);
        let r0 = evaluate_point(&ch.with_afterpulse(0.0), &source, &budget, Method::Sea, &opts)?.point.rate;
        let r1 = evaluate_point(&ch.with_afterpulse(0.04), &source, &budget, Method::Sea, &opts)?.point.rate;
        println!("{t:>5} {r0:>12.4e} {r1:>12.4e} {:>8.1}%", 100.0 * (1.0 - r1 / r0));
    }
    Ok(())
}
