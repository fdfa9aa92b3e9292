//! Optimises intensities, basis bias and pulse allocation at a few losses.

use qkd_fluct::bounds::{FailureBudget, Method};
use qkd_fluct::estimator::{evaluate_point, optimize_parameters, EstimatorOptions, SearchBox};
use qkd_fluct::model::{ChannelParams, SourceConfig};

fn main() -> Result<(), qkd_fluct::error::Error> {
    let budget = FailureBudget::uniform(1e-10)?;
    let base = SourceConfig::default().with_n_total(1e12);
    let opts = EstimatorOptions::default();
    for t in [10.0, 20.0, 30.0] {
        let ch = ChannelParams::default().with_loss(t);
        let before = evaluate_point(&ch, &base, &budget, Method::Azuma, &opts)?.point.rate;
        let opt = optimize_parameters(&ch, &base, &budget, Method::Azuma, &opts, &SearchBox::default())?;
        let s = opt.source;
        println!(
            "t={t:>4} dB  R {before:.3e} -> {:.3e}  mu={:.3} nu={:.3} p_z={:.3} fractions={:.3}/{:.3}/{:.3} ({} evaluations)",
            opt.point.rate, s.mu, s.nu, s.p_z, s.frac_signal, s.frac_decoy, s.frac_vacuum, opt.evaluations
        );
    }
    Ok(())
}
