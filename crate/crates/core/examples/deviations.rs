//! Q_mu deviation of each estimator against loss at N = 1e12.

use qkd_fluct::bounds::{FailureBudget, Method};
use qkd_fluct::cli::radius_order;
use qkd_fluct::estimator::{evaluate_point, EstimatorOptions};
use qkd_fluct::model::{ChannelParams, SourceConfig};

fn main() -> Result<(), qkd_fluct::error::Error> {
    let budget = FailureBudget::uniform(1e-10)?.with_u_alpha(6.4)?;
    let source = SourceConfig::default().with_n_total(1e12);
    let opts = EstimatorOptions::default();

    print!("{:>4} {:>9}", "t_dB", "Q_mu");
    for m in Method::ALL {
        print!(" {:>10}", m.tag());
    }
    println!("  order");
    for t in (0..=40).step_by(4) {
        let ch = ChannelParams::default().with_loss(t as f64);
        let mut radii = Vec::new();
        let mut q_mu = 0.0;
        for m in Method::ALL {
            let e = evaluate_point(&ch, &source, &budget, m, &opts)?;
            q_mu = e.tallies.q_mu.x_bar();
            radii.push((m, e.bounds.xi.q_mu));
        }
        print!("{t:>4} {q_mu:>9.3e}");
        for (_, r) in &radii {
            print!(" {r:>10.3e}");
        }
        println!("  {}", radius_order(&radii));
    }
    Ok(())
}
