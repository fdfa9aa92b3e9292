//! Statistical-fluctuation estimators.
//!
//! Each estimator turns an observed frequency out of `m` samples into a
//! radius `xi` such that the expectation lies within `xi` of the
//! observation except with probability `epsilon`:
//!
//! | tag | estimator              | radius (absolute, on the frequency)        | sample model |
//! |-----|------------------------|--------------------------------------------|--------------|
//! | SEA | standard error         | `u_alpha * sqrt(x_bar / m)`                | i.i.d.       |
//! | LLN | law of large numbers   | `sqrt(2 (ln(1/eps) + 2 ln(m+1)) / m)`      | i.i.d.       |
//! | HI  | Hoeffding              | `sqrt(ln(1/eps) / (2m))`                   | independent  |
//! | CB  | Chernoff (six regimes) | see [`chernoff`]                           | independent  |
//! | AI  | Azuma on `S_n / n`     | `sqrt(2/n ln(2/eps))`                      | Markov chain |
//!
//! All radii are stored additively. The standard-error deviation is
//! naturally relative (`u_alpha / sqrt(m x_bar)`); multiplying it by the
//! observation gives the additive form above.

pub mod chernoff;

use std::fmt;
use std::str::FromStr;

use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{ensure, param, Error, Result};
use crate::model::{ModelOutputs, SourceConfig};

pub use chernoff::{
    chernoff_better_than_hoeffding_threshold, chernoff_conditions, chernoff_deltas,
    chernoff_radii_for_case, ChernoffCase, ChernoffConditions, ChernoffDeltas,
};

/// Statistical-fluctuation estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Standard error analysis (Gaussian, quantile `u_alpha`).
    Sea,
    /// Law of large numbers.
    Lln,
    /// Hoeffding's inequality.
    Hoeffding,
    /// Chernoff bound.
    Chernoff,
    /// Azuma's inequality on the click-count martingale.
    Azuma,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Sea,
        Method::Lln,
        Method::Hoeffding,
        Method::Chernoff,
        Method::Azuma,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Sea => "SEA",
            Method::Lln => "LLN",
            Method::Hoeffding => "HI",
            Method::Chernoff => "CB",
            Method::Azuma => "AI",
        }
    }

    /// Whether the estimator remains valid on Markov-correlated samples.
    pub fn handles_dependent_samples(self) -> bool {
        matches!(self, Method::Azuma)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| param("method", format!("unknown method `{s}`")))
    }
}

/// Failure probabilities spent by the estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailureBudget {
    /// Per-observable failure probability for SEA, LLN, HI and AI.
    pub epsilon: f64,
    /// Chernoff: Hoeffding lower estimate `a_L`.
    pub epsilon_1: f64,
    /// Chernoff: lower tail (`x < a - Delta`).
    pub epsilon_2: f64,
    /// Chernoff: upper tail (`x > a + Delta'`).
    pub epsilon_3: f64,
    /// Gaussian quantile used by SEA.
    pub u_alpha: f64,
}

impl FailureBudget {
    /// All four epsilons equal, `u_alpha` linked to `epsilon`.
    pub fn uniform(epsilon: f64) -> Result<Self> {
        let budget = Self {
            epsilon,
            epsilon_1: epsilon,
            epsilon_2: epsilon,
            epsilon_3: epsilon,
            u_alpha: quantile_for_failure_prob(epsilon)?,
        };
        budget.validate()?;
        Ok(budget)
    }

    /// Overrides the SEA quantile, leaving the epsilons untouched.
    pub fn with_u_alpha(mut self, u_alpha: f64) -> Result<Self> {
        self.u_alpha = u_alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, e) in [
            ("epsilon", self.epsilon),
            ("epsilon_1", self.epsilon_1),
            ("epsilon_2", self.epsilon_2),
            ("epsilon_3", self.epsilon_3),
        ] {
            ensure(e > 0.0 && e < 1.0, name, "must lie in (0, 1)")?;
        }
        ensure(self.u_alpha > 0.0, "u_alpha", "must be > 0")
    }

    /// Chernoff budget per observable, `eps1 + eps2 + eps3`.
    pub fn gamma(&self) -> f64 {
        self.epsilon_1 + self.epsilon_2 + self.epsilon_3
    }

    /// Failure probability spent on one observable by `method`.
    pub fn per_observable(&self, method: Method) -> f64 {
        match method {
            Method::Chernoff => self.gamma(),
            Method::Sea => failure_prob_for_quantile(self.u_alpha),
            _ => self.epsilon,
        }
    }
}

/// Observed detections: `count` clicks out of `m` samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleStat {
    m: u64,
    count: u64,
}

impl SampleStat {
    pub fn from_count(m: u64, count: u64) -> Result<Self> {
        ensure(m >= 1, "m", "sample count must be >= 1")?;
        ensure(count <= m, "count", "cannot exceed the sample count")?;
        Ok(Self { m, count })
    }

    /// From a frequency; `x_bar * m` must be whole up to rounding.
    pub fn new(m: u64, x_bar: f64) -> Result<Self> {
        ensure((0.0..=1.0).contains(&x_bar), "x_bar", "must lie in [0, 1]")?;
        let raw = x_bar * m as f64;
        let count = raw.round();
        ensure(
            (raw - count).abs() <= 1e-6 * count.max(1.0),
            "x_bar",
            "x_bar * m must be a whole count",
        )?;
        Self::from_count(m, count as u64)
    }

    /// Tallies a model expectation over `pulses` samples, rounding both the
    /// sample size (down) and the expected click count (to nearest).
    pub fn from_expected(pulses: f64, probability: f64) -> Result<Self> {
        ensure(pulses >= 1.0, "m", "fewer than one sample")?;
        ensure(
            (0.0..=1.0).contains(&probability),
            "probability",
            "must lie in [0, 1]",
        )?;
        let m = pulses.floor() as u64;
        let count = (m as f64 * probability).round() as u64;
        Self::from_count(m, count.min(m))
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn x_bar(&self) -> f64 {
        self.count as f64 / self.m as f64
    }
}

/// The four observables bounded by every estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    QMu,
    QNu,
    Y0,
    Q0,
}

impl Observable {
    pub const ALL: [Observable; 4] = [Observable::QMu, Observable::QNu, Observable::Y0, Observable::Q0];

    pub fn name(self) -> &'static str {
        match self {
            Observable::QMu => "Q_mu",
            Observable::QNu => "Q_nu",
            Observable::Y0 => "Y0'",
            Observable::Q0 => "Q0",
        }
    }
}

/// How many samples back the decoy-gain observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecoyCount {
    /// `N_nu^z * p_z`, the same sifting factor as the signal count.
    #[default]
    Sifted,
    /// `N_nu^z` as is (already Z-basis).
    AsIs,
}

/// Which gains the estimator treats as observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObservedGain {
    /// `Q = D / (1 + p_ap)`, the after-pulse contribution removed.
    #[default]
    AfterpulseRemoved,
    /// The raw click rate `D`.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TallyOptions {
    pub decoy_count: DecoyCount,
    pub observed_gain: ObservedGain,
}

/// Observed statistics of the four bounded observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tallies {
    pub q_mu: SampleStat,
    pub q_nu: SampleStat,
    pub y0: SampleStat,
    pub q0: SampleStat,
}

impl Tallies {
    /// Turns model expectations into observed tallies for the configured
    /// pulse allocation.
    pub fn from_model(
        outputs: &ModelOutputs,
        source: &SourceConfig,
        options: TallyOptions,
    ) -> Result<Self> {
        let (q_mu, q_nu) = match options.observed_gain {
            ObservedGain::AfterpulseRemoved => (outputs.q_mu, outputs.q_nu),
            ObservedGain::Raw => (outputs.d_mu, outputs.d_nu),
        };
        let decoy_samples = match options.decoy_count {
            DecoyCount::Sifted => source.decoy_z_pulses() * source.p_z,
            DecoyCount::AsIs => source.decoy_z_pulses(),
        };
        let vacuum = source.vacuum_pulses();
        Ok(Self {
            q_mu: SampleStat::from_expected(source.signal_pulses() * source.p_z, q_mu)?,
            q_nu: SampleStat::from_expected(decoy_samples, q_nu)?,
            y0: SampleStat::from_expected(vacuum, outputs.y0_prime)?,
            q0: SampleStat::from_expected(vacuum, outputs.q0)?,
        })
    }

    pub fn get(&self, which: Observable) -> &SampleStat {
        match which {
            Observable::QMu => &self.q_mu,
            Observable::QNu => &self.q_nu,
            Observable::Y0 => &self.y0,
            Observable::Q0 => &self.q0,
        }
    }
}

/// Additive radii, one per observable.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Radii {
    pub q_mu: f64,
    pub q_nu: f64,
    pub y0: f64,
    pub q0: f64,
}

impl Radii {
    pub fn get(&self, which: Observable) -> f64 {
        match which {
            Observable::QMu => self.q_mu,
            Observable::QNu => self.q_nu,
            Observable::Y0 => self.y0,
            Observable::Q0 => self.q0,
        }
    }
}

/// One-sided bounded observables produced by one estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub method: Method,
    /// Radius actually applied on the bounded side of each observable.
    pub xi: Radii,
    pub q_mu_upper: f64,
    pub q_nu_lower: f64,
    pub y0_lower: f64,
    /// Upper counterpart of `y0_lower`, for the conservative `Y1` direction.
    pub y0_upper: f64,
    pub q0_lower: f64,
    /// Regime that fired per observable (Chernoff only), ordered as [`Observable::ALL`].
    pub chernoff_cases: Option<[ChernoffCase; 4]>,
    /// Failure probability per observable.
    pub failure_prob: f64,
}

impl BoundResult {
    /// Bounds equal to the observations, as in the asymptotic limit.
    pub fn zero_fluctuation(method: Method, tallies: &Tallies) -> Self {
        Self::assemble(method, tallies, Radii::default(), Radii::default(), None, 0.0)
    }

    /// Failure probability summed over the four observables.
    pub fn total_failure_prob(&self) -> f64 {
        4.0 * self.failure_prob
    }

    /// Regime fired for the signal gain, if any.
    pub fn chernoff_case(&self) -> Option<ChernoffCase> {
        self.chernoff_cases.map(|c| c[0])
    }

    fn assemble(
        method: Method,
        tallies: &Tallies,
        bounded_side: Radii,
        y0_up: Radii,
        cases: Option<[ChernoffCase; 4]>,
        failure_prob: f64,
    ) -> Self {
        Self {
            method,
            xi: bounded_side,
            q_mu_upper: (tallies.q_mu.x_bar() + bounded_side.q_mu).min(1.0),
            q_nu_lower: (tallies.q_nu.x_bar() - bounded_side.q_nu).max(0.0),
            y0_lower: (tallies.y0.x_bar() - bounded_side.y0).max(0.0),
            y0_upper: (tallies.y0.x_bar() + y0_up.y0).min(1.0),
            q0_lower: (tallies.q0.x_bar() - bounded_side.q0).max(0.0),
            chernoff_cases: cases,
            failure_prob,
        }
    }
}

/// Gaussian quantile with one-sided tail probability `epsilon`.
pub fn quantile_for_failure_prob(epsilon: f64) -> Result<f64> {
    ensure(
        epsilon > 0.0 && epsilon < 1.0,
        "epsilon",
        "must lie in (0, 1)",
    )?;
    Ok(std::f64::consts::SQRT_2 * erfc_inv(2.0 * epsilon))
}

/// One-sided Gaussian tail beyond `u_alpha`.
pub fn failure_prob_for_quantile(u_alpha: f64) -> f64 {
    0.5 * erfc(u_alpha / std::f64::consts::SQRT_2)
}

/// Relative standard-error deviation `u_alpha / sqrt(m x_bar)`.
pub fn xi_standard_error(stat: &SampleStat, u_alpha: f64) -> Result<f64> {
    if stat.count() == 0 {
        return Err(Error::DegenerateSample("standard error"));
    }
    Ok(u_alpha / (stat.count() as f64).sqrt())
}

/// Additive form of [`xi_standard_error`], `u_alpha sqrt(x_bar / m)`.
pub fn standard_error_radius(stat: &SampleStat, u_alpha: f64) -> Result<f64> {
    Ok(stat.x_bar() * xi_standard_error(stat, u_alpha)?)
}

pub fn xi_lln(m: u64, epsilon: f64) -> f64 {
    let m = m as f64;
    (2.0 * (-epsilon.ln() + 2.0 * m.ln_1p()) / m).sqrt()
}

pub fn xi_hoeffding(m: u64, epsilon: f64) -> f64 {
    (-epsilon.ln() / (2.0 * m as f64)).sqrt()
}

/// Azuma radius for the `S_n / n` martingale, `epsilon` in (0, 2].
pub fn xi_azuma(n: u64, epsilon: f64) -> f64 {
    (2.0 / n as f64 * (2.0f64.ln() - epsilon.ln())).sqrt()
}

/// Bounded observables for one estimator.
pub fn bounded_observables(
    method: Method,
    tallies: &Tallies,
    budget: &FailureBudget,
) -> Result<BoundResult> {
    budget.validate()?;
    let eps = budget.epsilon;
    let symmetric = |radius: &dyn Fn(&SampleStat) -> Result<f64>| -> Result<Radii> {
        Ok(Radii {
            q_mu: radius(&tallies.q_mu)?,
            q_nu: radius(&tallies.q_nu)?,
            y0: radius(&tallies.y0)?,
            q0: radius(&tallies.q0)?,
        })
    };
    let result = match method {
        Method::Sea => {
            let r = symmetric(&|s| {
                standard_error_radius(s, budget.u_alpha)
            })?;
            BoundResult::assemble(method, tallies, r, r, None, budget.per_observable(method))
        }
        Method::Lln => {
            let r = symmetric(&|s| Ok(xi_lln(s.m(), eps)))?;
            BoundResult::assemble(method, tallies, r, r, None, eps)
        }
        Method::Hoeffding => {
            let r = symmetric(&|s| Ok(xi_hoeffding(s.m(), eps)))?;
            BoundResult::assemble(method, tallies, r, r, None, eps)
        }
        Method::Azuma => {
            let r = symmetric(&|s| Ok(xi_azuma(s.m(), eps)))?;
            BoundResult::assemble(method, tallies, r, r, None, eps)
        }
        Method::Chernoff => {
            let d = Observable::ALL.map(|o| chernoff_deltas(tallies.get(o), budget));
            // lower bounds keep the smaller of the eps1 Hoeffding radius and Delta'
            let lower = |o: Observable, cd: &ChernoffDeltas| {
                xi_hoeffding(tallies.get(o).m(), budget.epsilon_1).min(cd.delta_upper)
            };
            let bounded = Radii {
                q_mu: d[0].delta_lower,
                q_nu: lower(Observable::QNu, &d[1]),
                y0: lower(Observable::Y0, &d[2]),
                q0: lower(Observable::Q0, &d[3]),
            };
            let y0_up = Radii {
                y0: d[2].delta_lower,
                ..Radii::default()
            };
            BoundResult::assemble(
                method,
                tallies,
                bounded,
                y0_up,
                Some(d.map(|x| x.case)),
                budget.gamma(),
            )
        }
    };
    Ok(result)
}

/// Whether the standard-error radius on `Q_mu` undercuts the law-of-large-numbers
/// radius, i.e. `u_alpha sqrt(q) < sqrt(2 ln(1/eps) + 4 ln(m + 1))`.
pub fn sea_better_than_lln(q_mu: f64, m: f64, u_alpha: f64, epsilon: f64) -> bool {
    u_alpha * q_mu.sqrt() < (-2.0 * epsilon.ln() + 4.0 * m.ln_1p()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn quantile_examples() {
        let u = quantile_for_failure_prob(1e-10).unwrap();
        assert!((u - 6.4).abs() <= 0.05);
        assert!(rel(u, 6.3613409024040562) < 1e-6);
        assert!(quantile_for_failure_prob(0.5).unwrap().abs() < 1e-12);
        assert!(quantile_for_failure_prob(0.0).is_err());
        assert!(quantile_for_failure_prob(1.0).is_err());
        let back = failure_prob_for_quantile(quantile_for_failure_prob(3e-7).unwrap());
        assert!(rel(back, 3e-7) < 1e-6);
    }

    #[test]
    fn standard_error_examples() {
        let s = SampleStat::from_count(10_000, 4096).unwrap();
        assert!(rel(xi_standard_error(&s, 6.4).unwrap(), 0.1) < 1e-15);
        let s = SampleStat::from_count(5_000_000_000, 5_000_000).unwrap();
        assert!((xi_standard_error(&s, 6.4).unwrap() - 2.862e-3).abs() < 5e-7);
        let zero = SampleStat::from_count(100, 0).unwrap();
        assert!(matches!(
            xi_standard_error(&zero, 6.4),
            Err(Error::DegenerateSample(_))
        ));
        // 40.96 detections: not a whole count, so evaluate the formula directly
        assert!(rel(6.4 / 40.96f64.sqrt(), 1.0) < 1e-15);
    }

    #[test]
    fn closed_form_examples() {
        assert!((xi_lln(1_000_000, 1e-10) - 0.010065).abs() < 5e-7);
        assert!((xi_lln(1, 1.0) - 1.6651).abs() < 5e-5);
        assert!((xi_hoeffding(1_000_000, 1e-10) - 3.3931e-3).abs() < 5e-8);
        assert_eq!(xi_hoeffding(77, 1.0), 0.0);
        assert!(rel(xi_hoeffding(4_000, 1e-3) * 2.0, xi_hoeffding(1_000, 1e-3)) < 1e-15);
        // mpmath: 6.8875246802462207e-3
        assert!(rel(xi_azuma(1_000_000, 1e-10), 6.8875246802462207e-3) < 1e-14);
        assert_eq!(xi_azuma(123, 2.0), 0.0);
        assert!(rel(xi_azuma(4_000, 1e-3) * 2.0, xi_azuma(1_000, 1e-3)) < 1e-15);
        assert!(xi_lln(u64::MAX / 2, 1e-10) < 1e-8);
    }

    #[test]
    fn sample_stat_validation() {
        assert!(SampleStat::new(1000, 0.25).is_ok());
        assert!(SampleStat::new(1000, 0.2501).is_err());
        assert!(SampleStat::new(0, 0.0).is_err());
        assert!(SampleStat::new(10, 1.5).is_err());
        assert!(SampleStat::from_count(10, 11).is_err());
        let s = SampleStat::from_expected(1e12, 3.3e-3).unwrap();
        assert_eq!(s.count(), 3_300_000_000);
    }

    #[test]
    fn method_tags_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.tag().parse::<Method>().unwrap(), m);
        }
        assert!("XYZ".parse::<Method>().is_err());
    }

    fn sample_tallies() -> Tallies {
        Tallies {
            q_mu: SampleStat::from_count(1_000_000, 10_000).unwrap(),
            q_nu: SampleStat::from_count(200_000, 200).unwrap(),
            y0: SampleStat::from_count(100_000_000, 354).unwrap(),
            q0: SampleStat::from_count(100_000_000, 214).unwrap(),
        }
    }

    #[test]
    fn hoeffding_and_azuma_bounded_examples() {
        let t = sample_tallies();
        let budget = FailureBudget::uniform(1e-10).unwrap();
        let hi = bounded_observables(Method::Hoeffding, &t, &budget).unwrap();
        assert!((hi.q_mu_upper - (0.01 + 3.3931e-3)).abs() < 5e-8);
        let ai = bounded_observables(Method::Azuma, &t, &budget).unwrap();
        assert!(rel(ai.xi.y0, 6.8875246802462207e-4) < 1e-14);
        assert_eq!(ai.y0_lower, 0.0);
        assert_eq!(ai.total_failure_prob(), 4e-10);
        let cb = bounded_observables(Method::Chernoff, &t, &budget).unwrap();
        assert!((cb.failure_prob - 3e-10).abs() < 1e-24);
        assert!(cb.chernoff_cases.is_some());
    }

    #[test]
    fn zero_fluctuation_is_identity() {
        let t = sample_tallies();
        let z = BoundResult::zero_fluctuation(Method::Lln, &t);
        assert_eq!(z.q_mu_upper, t.q_mu.x_bar());
        assert_eq!(z.q_nu_lower, t.q_nu.x_bar());
        assert_eq!(z.y0_lower, t.y0.x_bar());
        assert_eq!(z.q0_lower, t.q0.x_bar());
    }

    #[test]
    fn sea_degenerate_count_errors() {
        let mut t = sample_tallies();
        t.q0 = SampleStat::from_count(100, 0).unwrap();
        let budget = FailureBudget::uniform(1e-10).unwrap();
        assert!(bounded_observables(Method::Sea, &t, &budget).is_err());
        assert!(bounded_observables(Method::Hoeffding, &t, &budget).is_ok());
    }

    #[test]
    fn sea_vs_lln_examples() {
        assert!(sea_better_than_lln(1.0, 1.0, 6.4, 1e-10));
        assert!(sea_better_than_lln(0.01, 1e12, 6.4, 1e-10));
        assert!(sea_better_than_lln(1e-300, 1.0, 6.4, 1e-10));
    }

    #[test]
    fn azuma_to_hoeffding_ratio() {
        for eps in [1e-2, 1e-5, 1e-10, 1e-20] {
            let ratio = xi_azuma(12_345, eps) / xi_hoeffding(12_345, eps);
            let closed = (4.0 * (2.0 / eps).ln() / (1.0 / eps).ln()).sqrt();
            assert!(rel(ratio, closed) < 1e-13);
            assert!(ratio > 2.0);
        }
    }

    proptest! {
        #[test]
        fn radii_monotone(m in 1u64..1_000_000_000_000, k in 1u64..1000, e_exp in -20.0f64..-0.5) {
            let eps = 10f64.powf(e_exp);
            let m2 = m.saturating_add(k);
            prop_assert!(xi_lln(m2, eps) <= xi_lln(m, eps));
            prop_assert!(xi_hoeffding(m2, eps) <= xi_hoeffding(m, eps));
            prop_assert!(xi_azuma(m2, eps) <= xi_azuma(m, eps));
            let eps2 = eps * 1.5;
            prop_assert!(xi_lln(m, eps2) <= xi_lln(m, eps));
            prop_assert!(xi_hoeffding(m, eps2) <= xi_hoeffding(m, eps));
            prop_assert!(xi_azuma(m, eps2) <= xi_azuma(m, eps));
        }

        #[test]
        fn bounds_bracket_observations(
            m in 10u64..1_000_000_000,
            frac in 0.0f64..1.0,
            e_exp in -12.0f64..-1.0,
        ) {
            let count = ((m as f64) * frac).round() as u64;
            let s = SampleStat::from_count(m, count.max(1)).unwrap();
            let t = Tallies { q_mu: s, q_nu: s, y0: s, q0: s };
            let budget = FailureBudget::uniform(10f64.powf(e_exp)).unwrap();
            for method in Method::ALL {
                let b = bounded_observables(method, &t, &budget).unwrap();
                for o in Observable::ALL {
                    prop_assert!(b.xi.get(o) >= 0.0);
                }
                prop_assert!(b.q_mu_upper >= s.x_bar());
                prop_assert!(b.q_nu_lower <= s.x_bar());
                prop_assert!(b.y0_lower <= s.x_bar());
                prop_assert!(b.y0_upper >= s.x_bar());
                prop_assert!(b.q0_lower <= s.x_bar());
                prop_assert!(b.q0_lower >= 0.0);
            }
        }
    }
}
