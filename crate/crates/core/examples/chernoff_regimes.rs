//! Which of the six Chernoff regimes fires as the observed frequency shrinks,
//! and how its radii compare with Hoeffding.

use qkd_fluct::bounds::{
    chernoff_better_than_hoeffding_threshold, chernoff_deltas, xi_hoeffding, ChernoffCase,
    FailureBudget, SampleStat,
};

fn main() -> Result<(), qkd_fluct::error::Error> {
    let budget = FailureBudget::uniform(1e-10)?;
    let m = 1_000_000u64;
    let hi = xi_hoeffding(m, budget.epsilon);
    println!("m = {m}, Hoeffding radius {hi:.4e}");
    println!("{:>10} {:>4} {:>11} {:>11}", "count", "case", "Delta", "Delta'");
    for count in [500_000, 60_000, 10_000, 1_000, 300, 100, 60, 30, 10] {
        let d = chernoff_deltas(&SampleStat::from_count(m, count)?, &budget);
        println!("{count:>10} {:>4} {:>11.4e} {:>11.4e}", d.case.id(), d.delta_lower, d.delta_upper);
    }
    println!("thresholds below which both radii beat Hoeffding:");
    for c in ChernoffCase::ALL {
        println!("  case {}: x_bar <= {}", c.id(), chernoff_better_than_hoeffding_threshold(c));
    }
    Ok(())
}
