//! Multiplicative Chernoff radii with the six-regime case split.
//!
//! With `x` the observed count out of `m` trials and `a` the unknown mean,
//! `x = a + delta` with `delta` in `[-lower, upper]` except with probability
//! `eps1 + eps2 + eps3`. Which closed form applies to each side depends on
//! three conditions on `m * a_L`, where `a_L` is a Hoeffding lower estimate
//! of the mean. All comparisons run on logarithms so tiny failure budgets
//! and huge `m` never overflow.

use super::{xi_hoeffding, FailureBudget, SampleStat};

/// `(3 / (4 sqrt 2))^2`, the exponent bound of condition (i).
pub const LOWER_TAIL_LIMIT: f64 = 9.0 / 32.0;
/// Exponent bound of condition (ii).
pub const UPPER_TAIL_TIGHT_LIMIT: f64 = 1.0 / 3.0;
/// `((2e - 1) / 2)^2`, the exponent bound of condition (iii).
pub const UPPER_TAIL_LOOSE_LIMIT: f64 = {
    let h = (2.0 * std::f64::consts::E - 1.0) / 2.0;
    h * h
};

/// Outcome of the three regime conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChernoffConditions {
    /// (i): `(2/eps2)^(1/(m a_L)) <= e^(9/32)`.
    pub lower_tail: bool,
    /// (ii): `(1/eps3)^(1/(m a_L)) <= e^(1/3)`.
    pub upper_tight: bool,
    /// (iii): `(1/eps3)^(1/(m a_L)) <= e^(((2e-1)/2)^2)`.
    pub upper_loose: bool,
}

impl ChernoffConditions {
    pub fn case(&self) -> ChernoffCase {
        match (self.lower_tail, self.upper_tight, self.upper_loose) {
            (true, true, _) => ChernoffCase::One,
            (true, false, true) => ChernoffCase::Two,
            (true, false, false) => ChernoffCase::Three,
            (false, true, _) => ChernoffCase::Four,
            (false, false, true) => ChernoffCase::Five,
            (false, false, false) => ChernoffCase::Six,
        }
    }
}

/// The six result regimes, numbered as in the usual presentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChernoffCase {
    One = 1,
    Two = 2,
    Three = 3,
    Four = 4,
    Five = 5,
    Six = 6,
}

impl ChernoffCase {
    pub const ALL: [ChernoffCase; 6] = [
        ChernoffCase::One,
        ChernoffCase::Two,
        ChernoffCase::Three,
        ChernoffCase::Four,
        ChernoffCase::Five,
        ChernoffCase::Six,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(usize::from(id).wrapping_sub(1)).copied()
    }
}

/// Evaluates conditions (i)-(iii). Returns `None` when `m * a_L <= 0`, in
/// which case only the fallback regime (6) is available.
pub fn chernoff_conditions(
    m: f64,
    a_lower: f64,
    epsilon_2: f64,
    epsilon_3: f64,
) -> Option<ChernoffConditions> {
    let scale = m * a_lower;
    if !(scale > 0.0) {
        return None;
    }
    let ln_lower = (2.0f64).ln() - epsilon_2.ln();
    let ln_upper = -epsilon_3.ln();
    Some(ChernoffConditions {
        lower_tail: ln_lower / scale <= LOWER_TAIL_LIMIT,
        upper_tight: ln_upper / scale <= UPPER_TAIL_TIGHT_LIMIT,
        upper_loose: ln_upper / scale <= UPPER_TAIL_LOOSE_LIMIT,
    })
}

/// Radii of one Chernoff evaluation. The mean lies in
/// `[x_bar - delta_upper, x_bar + delta_lower]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffDeltas {
    /// `Delta`: guards against `x < a - Delta` (budget `eps2`).
    pub delta_lower: f64,
    /// `Delta'`: guards against `x > a + Delta'` (budget `eps3`).
    pub delta_upper: f64,
    pub case: ChernoffCase,
    /// Hoeffding lower estimate of the mean used by the conditions.
    pub a_lower: f64,
}

/// `f(x, y) = sqrt(2 x / m^2 * ln(1/y))` with `x = m x_bar`, taking `ln(1/y)`.
fn relative_radius(x_bar: f64, m: f64, ln_inv_y: f64) -> f64 {
    (2.0 * x_bar * ln_inv_y / m).sqrt()
}

/// Radii for an explicitly chosen regime, bypassing the condition checks.
pub fn chernoff_radii_for_case(
    case: ChernoffCase,
    stat: &SampleStat,
    budget: &FailureBudget,
) -> (f64, f64) {
    let m = stat.m() as f64;
    let x_bar = stat.x_bar();
    let lower_rel = || {
        let ln16 = 16f64.ln();
        relative_radius(x_bar, m, ln16 - 4.0 * budget.epsilon_2.ln())
    };
    let upper_three_halves = || relative_radius(x_bar, m, -1.5 * budget.epsilon_3.ln());
    let upper_square = || relative_radius(x_bar, m, -2.0 * budget.epsilon_3.ln());
    // f(m/4, eps) reduces to the Hoeffding radius
    let fallback = || xi_hoeffding(stat.m(), budget.epsilon);
    match case {
        ChernoffCase::One => (lower_rel(), upper_three_halves()),
        ChernoffCase::Two => (lower_rel(), upper_square()),
        ChernoffCase::Three => (lower_rel(), fallback()),
        ChernoffCase::Four => (fallback(), upper_three_halves()),
        ChernoffCase::Five => (fallback(), upper_square()),
        ChernoffCase::Six => (fallback(), fallback()),
    }
}

/// Selects the regime from the observed sample and returns its radii.
pub fn chernoff_deltas(stat: &SampleStat, budget: &FailureBudget) -> ChernoffDeltas {
    let m = stat.m() as f64;
    let a_lower = stat.x_bar() - xi_hoeffding(stat.m(), budget.epsilon_1);
    let case = chernoff_conditions(m, a_lower, budget.epsilon_2, budget.epsilon_3)
        .map(|c| c.case())
        .unwrap_or(ChernoffCase::Six);
    let (delta_lower, delta_upper) = chernoff_radii_for_case(case, stat, budget);
    ChernoffDeltas {
        delta_lower,
        delta_upper,
        case,
        a_lower,
    }
}

/// Largest observed frequency for which both radii of `case` are at most
/// the Hoeffding radius, at `eps1 = eps2 = eps3 = 1e-10`.
pub fn chernoff_better_than_hoeffding_threshold(case: ChernoffCase) -> f64 {
    match case {
        ChernoffCase::One | ChernoffCase::Two | ChernoffCase::Three => 0.06,
        ChernoffCase::Four => 0.162,
        ChernoffCase::Five => 0.122,
        ChernoffCase::Six => 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> FailureBudget {
        FailureBudget::uniform(1e-10).unwrap()
    }

    #[test]
    fn constants() {
        let c = 3.0 / (4.0 * 2f64.sqrt());
        assert!((LOWER_TAIL_LIMIT - c * c).abs() < 1e-16);
        assert!((UPPER_TAIL_LOOSE_LIMIT - 4.920774270471605).abs() < 1e-14);
    }

    #[test]
    fn conditions_examples() {
        let c = chernoff_conditions(1e6, 0.01, 1e-10, 1e-10).unwrap();
        assert_eq!(c.case(), ChernoffCase::One);
        assert!(c.lower_tail && c.upper_tight && c.upper_loose);

        let huge = chernoff_conditions(1e300, 1.0, 1e-10, 1e-10).unwrap();
        assert!(huge.lower_tail && huge.upper_tight && huge.upper_loose);

        // boundary: ln(1/eps3)/(m a_L) == 1/3 is inclusive
        let eps3 = (-3.0f64).exp();
        let c = chernoff_conditions(9.0, 1.0, 1e-300, eps3).unwrap();
        assert!(c.upper_tight);
        assert!(!c.lower_tail);

        assert!(chernoff_conditions(1e6, 0.0, 1e-10, 1e-10).is_none());
        assert!(chernoff_conditions(1e6, -0.1, 1e-10, 1e-10).is_none());
    }

    #[test]
    fn case_table() {
        let mk = |a, b, c| ChernoffConditions {
            lower_tail: a,
            upper_tight: b,
            upper_loose: c,
        };
        assert_eq!(mk(true, true, true).case(), ChernoffCase::One);
        assert_eq!(mk(true, false, true).case(), ChernoffCase::Two);
        assert_eq!(mk(true, false, false).case(), ChernoffCase::Three);
        assert_eq!(mk(false, true, true).case(), ChernoffCase::Four);
        assert_eq!(mk(false, false, true).case(), ChernoffCase::Five);
        assert_eq!(mk(false, false, false).case(), ChernoffCase::Six);
        for c in ChernoffCase::ALL {
            assert_eq!(ChernoffCase::from_id(c.id()), Some(c));
        }
        assert_eq!(ChernoffCase::from_id(0), None);
        assert_eq!(ChernoffCase::from_id(7), None);
    }

    #[test]
    fn deltas_examples() {
        let stat = SampleStat::from_count(1_000_000, 10_000).unwrap();
        let d = chernoff_deltas(&stat, &budget());
        assert_eq!(d.case, ChernoffCase::One);
        // sqrt(2e-8 * ln(16e40)), sqrt(2e-8 * 1.5 * ln(1e10)), 50-digit mpmath
        assert!((d.delta_lower - 1.3775049360492441e-3).abs() < 1e-15);
        assert!((d.delta_upper - 8.3112906813455497e-4).abs() < 1e-15);
        assert!((d.delta_lower - 1.3775e-3).abs() < 5e-8);
        assert!((d.delta_upper - 8.3113e-4).abs() < 5e-9);
    }

    #[test]
    fn fallback_when_lower_estimate_nonpositive() {
        let stat = SampleStat::from_count(1_000_000, 3).unwrap();
        let d = chernoff_deltas(&stat, &budget());
        assert!(d.a_lower < 0.0);
        assert_eq!(d.case, ChernoffCase::Six);
        assert_eq!(d.delta_lower, xi_hoeffding(1_000_000, 1e-10));
        assert!((d.delta_lower - 3.3931e-3).abs() < 5e-8);
    }
}
