//! `key = value` run configuration.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::bounds::{
    failure_prob_for_quantile, DecoyCount, FailureBudget, Method,
    ObservedGain,
};
use crate::error::Error;
use crate::estimator::{EstimatorOptions, Y0Direction};
use crate::model::{ChannelParams, SourceConfig};

/// Largest accepted gap between a configured `u_alpha` and the quantile of `epsilon`.
pub const U_ALPHA_TOLERANCE: f64 = 0.05;

const KEYS: &[&str] = &[
    "loss_db_min",
    "loss_db_max",
    "loss_db_step",
    "mu",
    "nu",
    "p_z",
    "n_total",
    "frac_signal",
    "frac_decoy",
    "frac_vacuum",
    "p_dc",
    "e_d",
    "e_0",
    "p_ap",
    "f_ec",
    "detector_efficiency",
    "epsilon",
    "epsilon_1",
    "epsilon_2",
    "epsilon_3",
    "u_alpha",
    "methods",
    "mode",
    "seed",
    "trials",
    "chain_length",
    "click_prob",
    "coverage_epsilons",
    "y0_direction",
    "decoy_count",
    "observed_gain",
    "phase_error_slack",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Sweep,
    Deviations,
    Optimize,
    Validate,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sweep" => Ok(Mode::Sweep),
            "deviations" => Ok(Mode::Deviations),
            "optimize" => Ok(Mode::Optimize),
            "validate" => Ok(Mode::Validate),
            other => Err(format!(
                "unknown mode `{other}` (expected sweep, deviations, optimize or validate)"
            )),
        }
    }
}

/// Configuration problem, with the offending line when one is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub loss_db_min: f64,
    pub loss_db_max: f64,
    pub loss_db_step: f64,
    /// Loss and after-pulse fields are overridden per sweep point.
    pub channel: ChannelParams,
    pub p_ap: Vec<f64>,
    /// `n_total` is overridden per sweep point.
    pub source: SourceConfig,
    pub n_total: Vec<f64>,
    pub budget: FailureBudget,
    pub methods: Vec<Method>,
    pub mode: Mode,
    pub seed: u64,
    pub trials: u64,
    pub chain_length: u64,
    pub click_prob: f64,
    pub coverage_epsilons: Vec<f64>,
    pub estimator: EstimatorOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            loss_db_min: 0.0,
            loss_db_max: 40.0,
            loss_db_step: 1.0,
            channel: ChannelParams::default(),
            p_ap: vec![ChannelParams::default().afterpulse_prob],
            source: SourceConfig::default(),
            n_total: vec![SourceConfig::default().n_total],
            budget: FailureBudget::uniform(1e-10).expect("valid default budget"),
            methods: Method::ALL.to_vec(),
            mode: Mode::Sweep,
            seed: 0,
            trials: 1000,
            chain_length: 100_000,
            click_prob: 0.01,
            coverage_epsilons: vec![0.1, 0.01],
            estimator: EstimatorOptions::default(),
        }
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Entries(HashMap<&'static str, Entry>);

impl Entries {
    fn line(&self, key: &str) -> Option<usize> {
        self.0.get(key).map(|e| e.line)
    }

    fn parse<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.0
            .get(key)
            .map(|e| {
                e.value.parse::<T>().map_err(|err| {
                    ConfigError::at(Some(e.line), format!("`{key}`: cannot parse `{}`: {err}", e.value))
                })
            })
            .transpose()
    }

    fn list<T: FromStr>(&self, key: &'static str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let Some(e) = self.0.get(key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<T>().map_err(|err| {
                    ConfigError::at(Some(e.line), format!("`{key}`: cannot parse `{s}`: {err}"))
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn set<T: FromStr>(&self, key: &'static str, slot: &mut T) -> Result<(), ConfigError>
    where
        T::Err: fmt::Display,
    {
        if let Some(v) = self.parse(key)? {
            *slot = v;
        }
        Ok(())
    }
}

fn parse_enum<T: Copy>(
    entries: &Entries,
    key: &'static str,
    options: &[(&str, T)],
    slot: &mut T,
) -> Result<(), ConfigError> {
    if let Some(e) = entries.0.get(key) {
        let v = e.value.to_ascii_lowercase();
        *slot = options
            .iter()
            .find(|(name, _)| *name == v)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                ConfigError::at(
                    Some(e.line),
                    format!("`{key}`: expected one of {}, got `{}`", names.join(", "), e.value),
                )
            })?;
    }
    Ok(())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map: HashMap<&'static str, Entry> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::at(Some(line), format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            let known = KEYS
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| ConfigError::at(Some(line), format!("unknown key `{key}`")))?;
            if let Some(prev) = map.get(known) {
                return Err(ConfigError::at(
                    Some(line),
                    format!("duplicate key `{key}` (first set on line {})", prev.line),
                ));
            }
            map.insert(
                known,
                Entry {
                    line,
                    value: value.trim().to_string(),
                },
            );
        }
        Self::from_entries(&Entries(map))
    }

    fn from_entries(e: &Entries) -> Result<Self, ConfigError> {
        let mut c = RunConfig::default();
        e.set("loss_db_min", &mut c.loss_db_min)?;
        e.set("loss_db_max", &mut c.loss_db_max)?;
        e.set("loss_db_step", &mut c.loss_db_step)?;

        let ch = &mut c.channel;
        e.set("p_dc", &mut ch.dark_count_prob)?;
        e.set("e_d", &mut ch.misalignment)?;
        e.set("e_0", &mut ch.background_error)?;
        e.set("detector_efficiency", &mut ch.detector_efficiency)?;
        if let Some(v) = e.list("p_ap")? {
            c.p_ap = v;
        }

        let s = &mut c.source;
        e.set("mu", &mut s.mu)?;
        e.set("nu", &mut s.nu)?;
        e.set("p_z", &mut s.p_z)?;
        e.set("frac_signal", &mut s.frac_signal)?;
        e.set("frac_decoy", &mut s.frac_decoy)?;
        e.set("frac_vacuum", &mut s.frac_vacuum)?;
        e.set("f_ec", &mut s.f_ec)?;
        if let Some(v) = e.list("n_total")? {
            c.n_total = v;
        }

        if let Some(v) = e.list::<String>("methods")? {
            c.methods = v
                .iter()
                .map(|m| m.parse::<Method>())
                .collect::<Result<_, _>>()
                .map_err(|err| ConfigError::at(e.line("methods"), err.to_string()))?;
        }
        if let Some(m) = e.parse::<Mode>("mode")? {
            c.mode = m;
        }
        e.set("seed", &mut c.seed)?;
        e.set("trials", &mut c.trials)?;
        e.set("chain_length", &mut c.chain_length)?;
        e.set("click_prob", &mut c.click_prob)?;
        if let Some(v) = e.list("coverage_epsilons")? {
            c.coverage_epsilons = v;
        }

        let o = &mut c.estimator;
        parse_enum(
            e,
            "y0_direction",
            &[("lower", Y0Direction::Lower), ("conservative", Y0Direction::Conservative)],
            &mut o.y0_direction,
        )?;
        parse_enum(
            e,
            "decoy_count",
            &[("sifted", DecoyCount::Sifted), ("as_is", DecoyCount::AsIs)],
            &mut o.tallies.decoy_count,
        )?;
        parse_enum(
            e,
            "observed_gain",
            &[("afterpulse_removed", ObservedGain::AfterpulseRemoved), ("raw", ObservedGain::Raw)],
            &mut o.tallies.observed_gain,
        )?;
        e.set("phase_error_slack", &mut o.phase_error_slack)?;

        c.budget = budget_from(e)?;
        c.check(e)?;
        Ok(c)
    }

    /// Semantic checks; `e` supplies line numbers where available.
    fn check(&self, e: &Entries) -> Result<(), ConfigError> {
        let fail = |key: &str, msg: &str| Err(ConfigError::at(e.line(key), format!("`{key}`: {msg}")));
        if !(self.loss_db_min >= 0.0) {
            return fail("loss_db_min", "must be >= 0");
        }
        if !(self.loss_db_max >= self.loss_db_min) {
            return fail("loss_db_max", "must be >= loss_db_min");
        }
        if !(self.loss_db_step > 0.0) && self.loss_db_max > self.loss_db_min {
            return fail("loss_db_step", "must be > 0");
        }
        if self.n_total.is_empty() {
            return fail("n_total", "needs at least one value");
        }
        if self.p_ap.is_empty() {
            return fail("p_ap", "needs at least one value");
        }
        if self.trials < 100 {
            return fail("trials", "must be >= 100");
        }
        if self.chain_length < 1000 {
            return fail("chain_length", "must be >= 1000");
        }
        if self.coverage_epsilons.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return fail("coverage_epsilons", "each must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.click_prob) {
            return fail("click_prob", "must lie in [0, 1]");
        }

        for &n in &self.n_total {
            self.source
                .with_n_total(n)
                .validate()
                .map_err(|err| located(e, &err))?;
        }
        for &p in &self.p_ap {
            let ch = self.channel.with_loss(self.loss_db_min).with_afterpulse(p);
            ch.validate().map_err(|err| located(e, &err))?;
        }
        Ok(())
    }

    /// Loss grid, inclusive of both ends (up to rounding of the step).
    pub fn loss_grid(&self) -> Vec<f64> {
        if self.loss_db_max <= self.loss_db_min {
            return vec![self.loss_db_min];
        }
        let n = ((self.loss_db_max - self.loss_db_min) / self.loss_db_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| self.loss_db_min + i as f64 * self.loss_db_step)
            .collect()
    }
}

/// Attaches the line of the parameter named in `err`, if it was set in the file.
fn located(e: &Entries, err: &Error) -> ConfigError {
    let key = match err {
        Error::Parameter { name, .. } => match *name {
            "dark_count_prob" => "p_dc",
            "misalignment" => "e_d",
            "background_error" => "e_0",
            "afterpulse_prob" => "p_ap",
            other => other,
        },
        _ => "",
    };
    ConfigError::at(e.line(key), err.to_string())
}

/// Either of `epsilon` and `u_alpha` may be given; both must then agree to
/// within [`U_ALPHA_TOLERANCE`].
fn budget_from(e: &Entries) -> Result<FailureBudget, ConfigError> {
    let eps: Option<f64> = e.parse("epsilon")?;
    let u: Option<f64> = e.parse("u_alpha")?;
    let eps_line = e.line("epsilon");
    let u_line = e.line("u_alpha");
    let epsilon = match (eps, u) {
        (Some(x), _) => x,
        (None, Some(u)) if u > 0.0 => failure_prob_for_quantile(u),
        (None, Some(_)) => return Err(ConfigError::at(u_line, "`u_alpha`: must be > 0")),
        (None, None) => 1e-10,
    };
    let mut budget = FailureBudget::uniform(epsilon).map_err(|err| ConfigError::at(eps_line, err.to_string()))?;
    if let Some(u) = u {
        let implied = budget.u_alpha;
        if eps.is_some() && (u - implied).abs() > U_ALPHA_TOLERANCE {
            return Err(ConfigError::at(
                u_line,
                format!(
                    "`u_alpha` = {u} is inconsistent with `epsilon` (quantile {implied:.4}, tolerance {U_ALPHA_TOLERANCE})"
                ),
            ));
        }
        budget = budget
            .with_u_alpha(u)
            .map_err(|err| ConfigError::at(u_line, err.to_string()))?;
    }
    for (key, slot) in [
        ("epsilon_1", &mut budget.epsilon_1),
        ("epsilon_2", &mut budget.epsilon_2),
        ("epsilon_3", &mut budget.epsilon_3),
    ] {
        if let Some(v) = e.parse(key)? {
            *slot = v;
        }
    }
    budget.validate().map_err(|err| located(e, &err))?;
    Ok(budget)
}
