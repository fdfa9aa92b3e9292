//! Closed-form channel and detector model.
//!
//! Produces the expected gains, vacuum yield and QBER of a vacuum+weak
//! decoy-state source, with and without after-pulse contributions. A
//! detector click in one gate re-fires the next gate with probability
//! `p_ap`, so every observed gain is inflated by `(1 + p_ap)` and half of
//! the after-pulse clicks land on the wrong bit value.

use crate::error::{ensure, Error, Result};

/// Physical channel and detector constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Total channel attenuation in dB.
    pub loss_db: f64,
    /// Detector efficiency, multiplied into the channel transmittance.
    pub detector_efficiency: f64,
    /// Dark-count probability per gate (`p_dc`).
    pub dark_count_prob: f64,
    /// Probability that a photon hits the wrong detector (`e_d`).
    pub misalignment: f64,
    /// Error rate of background counts (`e_0`).
    pub background_error: f64,
    /// After-pulse probability conditioned on a click in the previous gate.
    pub afterpulse_prob: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            loss_db: 0.0,
            detector_efficiency: 1.0,
            dark_count_prob: 1.7e-6,
            misalignment: 0.033,
            background_error: 0.5,
            afterpulse_prob: 0.04,
        }
    }
}

impl ChannelParams {
    pub fn with_loss(mut self, loss_db: f64) -> Self {
        self.loss_db = loss_db;
        self
    }

    pub fn with_afterpulse(mut self, p_ap: f64) -> Self {
        self.afterpulse_prob = p_ap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.loss_db >= 0.0, "loss_db", "must be >= 0")?;
        ensure(
            self.detector_efficiency > 0.0 && self.detector_efficiency <= 1.0,
            "detector_efficiency",
            "must lie in (0, 1]",
        )?;
        ensure(
            (0.0..1.0).contains(&self.dark_count_prob),
            "p_dc",
            "must lie in [0, 1)",
        )?;
        ensure(
            (0.0..=0.5).contains(&self.misalignment),
            "e_d",
            "must lie in [0, 0.5]",
        )?;
        ensure(
            (0.0..=1.0).contains(&self.background_error),
            "e_0",
            "must lie in [0, 1]",
        )?;
        ensure(
            (0.0..1.0).contains(&self.afterpulse_prob),
            "p_ap",
            "must lie in [0, 1)",
        )
    }

    pub fn transmittance(&self) -> Result<f64> {
        transmittance_from_loss(self.loss_db, self.detector_efficiency)
    }
}

/// Source intensities, basis bias and pulse budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceConfig {
    /// Mean photon number of signal states.
    pub mu: f64,
    /// Mean photon number of weak decoy states.
    pub nu: f64,
    /// Probability of choosing the Z basis.
    pub p_z: f64,
    /// Total number of sent pulses.
    pub n_total: f64,
    pub frac_signal: f64,
    pub frac_decoy: f64,
    pub frac_vacuum: f64,
    /// Error-correction inefficiency.
    pub f_ec: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            mu: 0.5,
            nu: 0.05,
            p_z: 0.8,
            n_total: 1e12,
            frac_signal: 0.7,
            frac_decoy: 0.2,
            frac_vacuum: 0.1,
            f_ec: 1.16,
        }
    }
}

impl SourceConfig {
    pub fn with_n_total(mut self, n_total: f64) -> Self {
        self.n_total = n_total;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.nu > 0.0, "nu", "must be > 0")?;
        ensure(self.mu > self.nu, "mu", "must exceed nu")?;
        ensure(self.p_z > 0.0 && self.p_z < 1.0, "p_z", "must lie in (0, 1)")?;
        ensure(self.n_total >= 1.0, "n_total", "must be >= 1")?;
        ensure(self.f_ec >= 1.0, "f_ec", "must be >= 1")?;
        let fracs = [self.frac_signal, self.frac_decoy, self.frac_vacuum];
        ensure(
            fracs.iter().all(|f| *f >= 0.0),
            "frac_*",
            "fractions must be non-negative",
        )?;
        ensure(
            (fracs.iter().sum::<f64>() - 1.0).abs() <= 1e-9,
            "frac_*",
            "fractions must sum to 1",
        )
    }

    /// Signal pulses `N_mu`.
    pub fn signal_pulses(&self) -> f64 {
        self.frac_signal * self.n_total
    }

    /// Z-basis decoy pulses `N_nu^z`.
    pub fn decoy_z_pulses(&self) -> f64 {
        self.frac_decoy * self.n_total * self.p_z
    }

    /// Vacuum pulses `N_0`.
    pub fn vacuum_pulses(&self) -> f64 {
        self.frac_vacuum * self.n_total
    }

    /// Fraction of sent pulses that end up as sifted signal, `q = N_mu p_z / N_total`.
    pub fn sifted_signal_ratio(&self) -> f64 {
        self.signal_pulses() * self.p_z / self.n_total
    }
}

/// Expected detection statistics at one channel setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelOutputs {
    pub eta: f64,
    /// Signal gain without after-pulses.
    pub q_mu: f64,
    /// Decoy gain without after-pulses.
    pub q_nu: f64,
    /// Signal gain including after-pulses.
    pub d_mu: f64,
    /// Decoy gain including after-pulses.
    pub d_nu: f64,
    /// After-pulse-corrected vacuum yield `Y0'`.
    pub y0_prime: f64,
    /// Observed signal QBER with after-pulses.
    pub e_mu_prime: f64,
    /// Background gain `Q0 = Y0' e^{-mu}`.
    pub q0: f64,
    /// Signal QBER without after-pulses.
    pub e_mu: f64,
    /// Decoy QBER, with after-pulses.
    pub e_nu: f64,
    /// Set when any formula left [0, 1] (or [0, 0.5] for QBERs) and was clamped.
    pub clamped: bool,
}

impl ModelOutputs {
    pub fn evaluate(channel: &ChannelParams, source: &SourceConfig) -> Result<Self> {
        channel.validate()?;
        source.validate()?;
        let p_ap = channel.afterpulse_prob;
        let eta = channel.transmittance()?;
        let y0 = 2.0 * channel.dark_count_prob;
        let y0_prime = vacuum_yield(channel.dark_count_prob, p_ap);

        let q_mu = gain(eta, source.mu, y0);
        let q_nu = gain(eta, source.nu, y0);
        let (d_mu, clamp_dmu) = clamp_unit(q_mu * (1.0 + p_ap));
        let (d_nu, clamp_dnu) = clamp_unit(q_nu * (1.0 + p_ap));

        let qber = |intensity: f64, y0: f64, q: f64, d: f64, p_ap: f64| {
            observed_qber_raw(
                eta,
                intensity,
                y0,
                q,
                d,
                channel.background_error,
                channel.misalignment,
                p_ap,
            )
            .map(clamp_qber)
        };
        let (e_mu_prime, c1) = qber(source.mu, y0_prime, q_mu, d_mu, p_ap)?;
        let (e_mu, c2) = qber(source.mu, y0, q_mu, q_mu, 0.0)?;
        let (e_nu, c3) = qber(source.nu, y0_prime, q_nu, d_nu, p_ap)?;
        let (y0_prime, c4) = clamp_unit(y0_prime);

        Ok(Self {
            eta,
            q_mu,
            q_nu,
            d_mu,
            d_nu,
            y0_prime,
            e_mu_prime,
            q0: background_gain(y0_prime, source.mu),
            e_mu,
            e_nu,
            clamped: clamp_dmu || clamp_dnu || c1 || c2 || c3 || c4,
        })
    }
}

/// `eta = efficiency * 10^(-loss/10)`.
pub fn transmittance_from_loss(loss_db: f64, detector_efficiency: f64) -> Result<f64> {
    ensure(loss_db >= 0.0, "loss_db", "must be >= 0")?;
    ensure(
        detector_efficiency > 0.0 && detector_efficiency <= 1.0,
        "detector_efficiency",
        "must lie in (0, 1]",
    )?;
    Ok(detector_efficiency * 10f64.powf(-loss_db / 10.0))
}

/// Gain of a Poissonian source of mean `intensity`: `1 - e^{-eta*intensity}(1 - y0)`.
pub fn gain(eta: f64, intensity: f64, y0: f64) -> f64 {
    // 1 - e^{-x}(1 - y0) rearranged so tiny eta*intensity keeps precision
    let x = eta * intensity;
    -(-x).exp_m1() + y0 * (-x).exp()
}

pub fn apply_afterpulse(q: f64, p_ap: f64) -> f64 {
    (q * (1.0 + p_ap)).min(1.0)
}

/// `Y0' = 2 p_dc (1 + p_ap)`.
pub fn vacuum_yield(p_dc: f64, p_ap: f64) -> f64 {
    2.0 * p_dc * (1.0 + p_ap)
}

/// Observed QBER including after-pulse errors, clamped to [0, 0.5].
#[allow(clippy::too_many_arguments)]
pub fn observed_qber(
    eta: f64,
    mu: f64,
    y0_prime: f64,
    q_mu: f64,
    d_mu: f64,
    e_0: f64,
    e_d: f64,
    p_ap: f64,
) -> Result<f64> {
    observed_qber_raw(eta, mu, y0_prime, q_mu, d_mu, e_0, e_d, p_ap).map(|e| clamp_qber(e).0)
}

#[allow(clippy::too_many_arguments)]
fn observed_qber_raw(
    eta: f64,
    mu: f64,
    y0_prime: f64,
    q_mu: f64,
    d_mu: f64,
    e_0: f64,
    e_d: f64,
    p_ap: f64,
) -> Result<f64> {
    if d_mu <= 0.0 {
        return Err(Error::UndefinedQber);
    }
    let signal_clicks = -(-eta * mu).exp_m1();
    Ok((e_0 * y0_prime + e_d * signal_clicks * (1.0 - y0_prime) + p_ap * q_mu / 2.0) / d_mu)
}

/// `Q0 = Y0' e^{-mu}`.
pub fn background_gain(y0_prime: f64, mu: f64) -> f64 {
    y0_prime * (-mu).exp()
}

fn clamp_unit(x: f64) -> (f64, bool) {
    let c = x.clamp(0.0, 1.0);
    (c, c != x)
}

fn clamp_qber(x: f64) -> (f64, bool) {
    let c = x.clamp(0.0, 0.5);
    (c, c != x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn transmittance_db_convention() {
        assert_eq!(transmittance_from_loss(0.0, 1.0).unwrap(), 1.0);
        assert!(close(transmittance_from_loss(10.0, 1.0).unwrap(), 0.1, 1e-15));
        assert!(close(transmittance_from_loss(30.0, 1.0).unwrap(), 1e-3, 1e-15));
        assert!(transmittance_from_loss(-1.0, 1.0).is_err());
        assert!(transmittance_from_loss(1.0, 0.0).is_err());
    }

    #[test]
    fn gain_examples() {
        assert_eq!(gain(0.3, 0.0, 0.0), 0.0);
        assert!(close(gain(1.0, 800.0, 0.0), 1.0, 1e-15));
        // mpmath, 50 digits: 1 - exp(-0.05)*(1 - 1e-5)
        assert!(close(gain(0.1, 0.5, 1e-5), 0.048780087793531001, 1e-13));
    }

    #[test]
    fn afterpulse_and_vacuum_yield() {
        assert!(close(apply_afterpulse(0.1, 0.04), 0.104, 1e-15));
        assert_eq!(apply_afterpulse(0.37, 0.0), 0.37);
        assert_eq!(apply_afterpulse(0.0, 0.04), 0.0);
        assert_eq!(apply_afterpulse(0.99, 0.5), 1.0);
        assert!(close(vacuum_yield(1.7e-6, 0.04), 3.536e-6, 1e-14));
        assert_eq!(vacuum_yield(2.5e-6, 0.0), 5e-6);
        assert_eq!(vacuum_yield(0.0, 0.3), 0.0);
    }

    #[test]
    fn qber_limits() {
        let eta = 0.1;
        let mu = 0.5;
        // only background errors survive
        let y0 = 3.4e-6;
        let q = gain(eta, mu, y0);
        let e = observed_qber(eta, mu, y0, q, q, 0.5, 0.0, 0.0).unwrap();
        assert!(close(e, 0.5 * y0 / q, 1e-14));
        // pure misalignment
        let q = gain(eta, mu, 0.0);
        let e = observed_qber(eta, mu, 0.0, q, q, 0.5, 0.033, 0.0).unwrap();
        assert!(close(e, 0.033, 1e-14));
        assert_eq!(
            observed_qber(eta, mu, 0.0, 0.0, 0.0, 0.5, 0.033, 0.0),
            Err(Error::UndefinedQber)
        );
    }

    #[test]
    fn qber_with_afterpulse_defaults() {
        // mpmath, 50 digits, with Y0 = 2 p_dc inside Q_mu and Y0' = 2 p_dc (1 + p_ap)
        let ch = ChannelParams::default().with_loss(10.0);
        let out = ModelOutputs::evaluate(&ch, &SourceConfig::default()).unwrap();
        assert!(close(out.e_mu_prime, 0.050994176980679993, 1e-12));
        assert!(close(out.q_mu, 0.048773809679329293, 1e-12));
    }

    #[test]
    fn background_gain_examples() {
        assert_eq!(background_gain(4.2e-6, 0.0), 4.2e-6);
        assert_eq!(background_gain(0.0, 0.5), 0.0);
        assert!(close(background_gain(3.536e-6, 0.5), 2.1446924127438718e-6, 1e-13));
    }

    #[test]
    fn outputs_keep_afterpulse_identity() {
        let ch = ChannelParams::default().with_loss(3.0);
        let out = ModelOutputs::evaluate(&ch, &SourceConfig::default()).unwrap();
        assert_eq!(out.d_mu, out.q_mu * 1.04);
        assert_eq!(out.d_nu, out.q_nu * 1.04);
        assert!(!out.clamped);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut s = SourceConfig::default();
        s.nu = 0.6;
        assert!(s.validate().is_err());
        let mut s = SourceConfig::default();
        s.frac_vacuum = 0.3;
        assert!(s.validate().is_err());
        let mut c = ChannelParams::default();
        c.misalignment = 0.6;
        assert!(c.validate().is_err());
    }

    #[test]
    fn default_sweep_stays_in_unit_interval() {
        let s = SourceConfig::default();
        for p_ap in [0.0, 0.04] {
            for t in 0..=40 {
                let ch = ChannelParams::default().with_loss(t as f64).with_afterpulse(p_ap);
                let o = ModelOutputs::evaluate(&ch, &s).unwrap();
                for v in [o.q_mu, o.q_nu, o.d_mu, o.d_nu, o.y0_prime, o.q0, o.e_mu, o.e_mu_prime, o.e_nu] {
                    assert!((0.0..=1.0).contains(&v), "t={t} value {v}");
                }
            }
        }
    }

    #[test]
    fn afterpulse_raises_qber_on_loss_grid() {
        let s = SourceConfig::default();
        for t in 0..=40 {
            let base = ChannelParams::default().with_loss(t as f64);
            let without = ModelOutputs::evaluate(&base.with_afterpulse(0.0), &s).unwrap();
            let with = ModelOutputs::evaluate(&base.with_afterpulse(0.04), &s).unwrap();
            assert!(without.e_mu_prime <= with.e_mu_prime, "t={t}");
            assert_eq!(without.e_mu_prime, without.e_mu);
        }
    }
}
