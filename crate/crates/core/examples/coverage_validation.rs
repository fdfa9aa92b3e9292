//! Empirical failure rate of each estimator's interval on i.i.d. and
//! after-pulse-correlated click sequences.

use qkd_fluct::bounds::Method;
use qkd_fluct::mc_oracle::{coverage_rates, IntervalRule, MarkovClickModel};

fn main() -> Result<(), qkd_fluct::error::Error> {
    let (n, trials, epsilon) = (50_000, 2_000, 0.1);
    let rules: Vec<IntervalRule> = Method::ALL
        .iter()
        .map(|&method| IntervalRule::Method { method, epsilon })
        .collect();
    for p_ap in [0.0, 0.04, 0.3] {
        let model = MarkovClickModel::new(0.02, p_ap, 5)?;
        println!("p_ap = {p_ap} (stationary click rate {:.4})", model.stationary_rate());
        for r in coverage_rates(&model, &rules, n, trials)? {
            if let IntervalRule::Method { method, .. } = r.rule {
                println!("  {method:>3}: {:>5} / {trials} failures, rate {:.4}", r.failures, r.failure_rate());
            }
        }
    }
    Ok(())
}
