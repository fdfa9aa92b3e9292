//! Monte Carlo oracle for after-pulse-correlated detection sequences.
//!
//! Clicks form a two-state Markov chain. A gate following a miss clicks with
//! the base probability `Q`; a gate following a click clicks with
//! `Q + p_ap / (1 + p_ap)`, which is the one choice that keeps the long-run
//! click rate at `D = Q (1 + p_ap)`.
//!
//! Every trial draws from its own ChaCha8 stream, keyed by `(seed, trial)`,
//! so results do not depend on how trials are scheduled across threads.

use rand::distributions::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{
    chernoff_deltas, quantile_for_failure_prob, xi_azuma, xi_hoeffding, xi_lln, FailureBudget,
    Method, SampleStat,
};
use crate::error::{ensure, Result};

/// Initial state of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartState {
    /// First gate drawn from the stationary distribution.
    #[default]
    Stationary,
    /// A virtual miss precedes the first gate.
    Cold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovClickModel {
    base_click_prob: f64,
    p_ap: f64,
    seed: u64,
    start: StartState,
}

impl MarkovClickModel {
    pub fn new(base_click_prob: f64, p_ap: f64, seed: u64) -> Result<Self> {
        ensure(
            (0.0..=1.0).contains(&base_click_prob),
            "base_click_prob",
            "must lie in [0, 1]",
        )?;
        ensure((0.0..1.0).contains(&p_ap), "p_ap", "must lie in [0, 1)")?;
        ensure(
            base_click_prob * (1.0 + p_ap) <= 1.0,
            "base_click_prob",
            "stationary rate Q (1 + p_ap) exceeds 1",
        )?;
        Ok(Self {
            base_click_prob,
            p_ap,
            seed,
            start: StartState::Stationary,
        })
    }

    pub fn with_start(mut self, start: StartState) -> Self {
        self.start = start;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn base_click_prob(&self) -> f64 {
        self.base_click_prob
    }

    pub fn afterpulse_prob(&self) -> f64 {
        self.p_ap
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Long-run click frequency `D = Q (1 + p_ap)`.
    pub fn stationary_rate(&self) -> f64 {
        self.base_click_prob * (1.0 + self.p_ap)
    }

    pub fn click_after_miss(&self) -> f64 {
        self.base_click_prob
    }

    pub fn click_after_click(&self) -> f64 {
        (self.base_click_prob + self.p_ap / (1.0 + self.p_ap)).min(1.0)
    }

    /// Probability of a click given the previous gate's outcome.
    pub fn transition(&self, previous_click: bool) -> f64 {
        if previous_click {
            self.click_after_click()
        } else {
            self.click_after_miss()
        }
    }

    /// Sampler for trial `trial`; trial 0 is the stream behind [`simulate_chain`].
    pub fn sampler(&self, trial: u64) -> ChainSampler {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        let bern = |p: f64| Bernoulli::new(p).expect("probabilities validated at construction");
        ChainSampler {
            rng,
            after_miss: bern(self.click_after_miss()),
            after_click: bern(self.click_after_click()),
            first: Some(match self.start {
                StartState::Stationary => bern(self.stationary_rate()),
                StartState::Cold => bern(self.click_after_miss()),
            }),
            previous: false,
        }
    }
}

/// Infinite iterator over gate outcomes (`true` = click).
pub struct ChainSampler {
    rng: ChaCha8Rng,
    after_miss: Bernoulli,
    after_click: Bernoulli,
    first: Option<Bernoulli>,
    previous: bool,
}

impl ChainSampler {
    /// Number of clicks in the next `n` gates.
    pub fn count_clicks(&mut self, n: u64) -> u64 {
        let mut clicks = 0;
        for _ in 0..n {
            clicks += u64::from(self.next_click());
        }
        clicks
    }

    #[inline]
    fn next_click(&mut self) -> bool {
        let dist = match self.first.take() {
            Some(d) => d,
            None if self.previous => self.after_click,
            None => self.after_miss,
        };
        self.previous = dist.sample(&mut self.rng);
        self.previous
    }
}

impl Iterator for ChainSampler {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        Some(self.next_click())
    }
}

/// The first `n` gates of the chain. Deterministic in the model's seed.
pub fn simulate_chain(model: &MarkovClickModel, n: usize) -> Vec<bool> {
    model.sampler(0).take(n).collect()
}

/// How the next-step click probability is set when checking the martingale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MartingaleMode {
    /// Plug in the empirical rate `S_k / k` as the click probability.
    ExactAlgebra,
    /// Use the chain's true transition law given the last outcome.
    FixedTransition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleReport {
    /// Checked prefix lengths `k`.
    pub prefixes: Vec<usize>,
    /// `|E[M_{k+1} | S_k] - M_k|` per checked prefix.
    pub residuals: Vec<f64>,
}

impl MartingaleReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Checks `E[M_{k+1} | S_k] = M_k` for `M_k = S_k / k` on evenly spaced prefixes
/// of one simulated chain, branching over both next-step outcomes.
pub fn martingale_verify(
    model: &MarkovClickModel,
    n: usize,
    prefix_checks: usize,
    mode: MartingaleMode,
) -> Result<MartingaleReport> {
    ensure(n >= 1000, "n", "chain must have at least 1000 steps")?;
    ensure(prefix_checks >= 1, "prefix_checks", "must be >= 1")?;
    let chain = simulate_chain(model, n);
    let mut partial = Vec::with_capacity(n + 1);
    partial.push(0u64);
    for &x in &chain {
        partial.push(partial.last().unwrap() + u64::from(x));
    }

    // k = 0 has no M_k and is skipped
    let prefixes: Vec<usize> = (1..=prefix_checks)
        .map(|i| i * (n - 1) / prefix_checks)
        .filter(|&k| k > 0)
        .collect();
    let residuals = prefixes
        .iter()
        .map(|&k| {
            let s_k = partial[k] as f64;
            let k_f = k as f64;
            let m_k = s_k / k_f;
            let p_click = match mode {
                MartingaleMode::ExactAlgebra => s_k / k_f,
                MartingaleMode::FixedTransition => model.transition(chain[k - 1]),
            };
            let expected = (s_k * (1.0 - p_click) + (s_k + 1.0) * p_click) / (k_f + 1.0);
            (expected - m_k).abs()
        })
        .collect();
    Ok(MartingaleReport {
        prefixes,
        residuals,
    })
}

/// Interval construction checked by [`coverage_test`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalRule {
    /// Two-sided interval of an estimator at total failure probability `epsilon`.
    Method { method: Method, epsilon: f64 },
    /// `[x_bar - xi, x_bar + xi]`.
    Fixed(f64),
}

impl IntervalRule {
    /// Offsets `(below, above)` of the interval around the observed frequency.
    pub fn offsets(&self, stat: &SampleStat) -> Result<(f64, f64)> {
        let (method, eps) = match *self {
            IntervalRule::Fixed(xi) => return Ok((xi, xi)),
            IntervalRule::Method { method, epsilon } => (method, epsilon),
        };
        let m = stat.m();
        let sym = |r: f64| (r, r);
        Ok(match method {
            Method::Sea => {
                let u = quantile_for_failure_prob(eps / 2.0)?;
                sym(u * (stat.x_bar() / m as f64).sqrt())
            }
            Method::Lln => sym(xi_lln(m, eps)),
            Method::Hoeffding => sym(xi_hoeffding(m, eps)),
            Method::Azuma => sym(xi_azuma(m, eps)),
            Method::Chernoff => {
                let third = eps / 3.0;
                let budget = FailureBudget {
                    epsilon: third,
                    epsilon_1: third,
                    epsilon_2: third,
                    epsilon_3: third,
                    u_alpha: quantile_for_failure_prob(third)?,
                };
                let d = chernoff_deltas(stat, &budget);
                (d.delta_upper, d.delta_lower)
            }
        })
    }

    /// Whether the interval around `stat` misses `mean`.
    pub fn fails(&self, stat: &SampleStat, mean: f64) -> Result<bool> {
        let (below, above) = self.offsets(stat)?;
        let x = stat.x_bar();
        Ok(if below == above {
            (x - mean).abs() >= below
        } else {
            mean < x - below || mean > x + above
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageReport {
    pub rule: IntervalRule,
    pub failures: u64,
    pub trials: u64,
}

impl CoverageReport {
    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }

    /// `failure_rate <= epsilon + 3 sqrt(epsilon / trials)`.
    pub fn within(&self, epsilon: f64) -> bool {
        self.failure_rate() <= epsilon + 3.0 * (epsilon / self.trials as f64).sqrt()
    }
}

/// Outcome of one simulated trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub n: u64,
    pub x_bar: f64,
    /// Per rule, whether its interval contained the stationary mean.
    pub covered: Vec<bool>,
    pub martingale_residuals: Vec<f64>,
}

/// Runs trial `trial` of the coverage experiment and reports every rule.
pub fn run_trial(
    model: &MarkovClickModel,
    rules: &[IntervalRule],
    n: u64,
    trial: u64,
) -> Result<TrialReport> {
    ensure(n >= 1, "n", "must be >= 1")?;
    let clicks = model.sampler(trial).count_clicks(n);
    let stat = SampleStat::from_count(n, clicks)?;
    let mean = model.stationary_rate();
    let covered = rules
        .iter()
        .map(|r| r.fails(&stat, mean).map(|f| !f))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialReport {
        n,
        x_bar: stat.x_bar(),
        covered,
        martingale_residuals: Vec::new(),
    })
}

/// Empirical failure rates of several rules, sharing one chain per trial.
pub fn coverage_rates(
    model: &MarkovClickModel,
    rules: &[IntervalRule],
    n: u64,
    trials: u64,
) -> Result<Vec<CoverageReport>> {
    ensure(trials >= 100, "trials", "must be >= 100")?;
    ensure(n >= 1, "n", "must be >= 1")?;
    let failures = (0..trials)
        .into_par_iter()
        .map(|t| {
            run_trial(model, rules, n, t)
                .map(|r| r.covered.iter().map(|&c| u64::from(!c)).collect::<Vec<_>>())
        })
        .try_reduce(
            || vec![0u64; rules.len()],
            |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
        )?;
    Ok(rules
        .iter()
        .zip(failures)
        .map(|(&rule, failures)| CoverageReport {
            rule,
            failures,
            trials,
        })
        .collect())
}

/// Empirical failure rate of a single rule over `trials` independent chains.
pub fn coverage_test(
    model: &MarkovClickModel,
    rule: IntervalRule,
    n: u64,
    trials: u64,
) -> Result<CoverageReport> {
    Ok(coverage_rates(model, &[rule], n, trials)?[0])
}
