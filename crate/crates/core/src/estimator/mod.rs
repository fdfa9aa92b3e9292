//! Decoy-state single-photon estimation and the secure key rate.

mod optimize;

pub use optimize::{optimize_parameters, Optimized, SearchBox};

use crate::bounds::{
    bounded_observables, BoundResult, ChernoffCase, FailureBudget, Method, Tallies, TallyOptions,
};
use crate::error::{ensure, Error, Result};
use crate::model::{ChannelParams, ModelOutputs, SourceConfig};

/// A value that may have been clamped into its admissible range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamped {
    pub value: f64,
    pub raw: f64,
}

impl Clamped {
    fn new(raw: f64, lo: f64, hi: f64) -> Self {
        Self {
            value: raw.clamp(lo, hi),
            raw,
        }
    }

    pub fn was_clamped(&self) -> bool {
        self.value != self.raw
    }
}

/// Which bound on `Y0'` enters the single-photon yield estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Y0Direction {
    /// `Y0^L` in both the yield and error-rate estimates.
    #[default]
    Lower,
    /// `Y0^U` in the yield (where `Y0'` enters negatively), `Y0^L` in the error rate.
    Conservative,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EstimatorOptions {
    pub tallies: TallyOptions,
    pub y0_direction: Y0Direction,
    /// Additive slack `theta >= 0` between the X-basis bound `e1^U` and the
    /// Z-basis phase error used in the rate.
    pub phase_error_slack: f64,
}

/// Diagnostics collected while evaluating one key-rate point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    pub model_clamped: bool,
    pub y1_clamped: bool,
    pub e1_clamped: bool,
    /// `Y1^L` came out zero, so the rate was forced to zero.
    pub estimation_failed: bool,
    /// Rate before the clamp at zero.
    pub raw_rate: f64,
    pub chernoff_cases: Option<[ChernoffCase; 4]>,
}

/// One evaluated point of a key-rate curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRatePoint {
    pub loss_db: f64,
    pub method: Method,
    pub y1_lower: f64,
    pub e1_upper: f64,
    pub q1z: f64,
    pub q0: f64,
    pub leak_ec: f64,
    /// Secure bits per sent pulse.
    pub rate: f64,
    pub diagnostics: Diagnostics,
}

/// Everything produced on the way to a key-rate point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEvaluation {
    pub model: ModelOutputs,
    pub tallies: Tallies,
    pub bounds: BoundResult,
    pub point: KeyRatePoint,
}

/// Binary Shannon entropy in bits, with `H(0) = H(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    ensure((0.0..=1.0).contains(&x), "x", "must lie in [0, 1]")?;
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// Lower bound on the single-photon yield from the vacuum+weak decoy pair.
pub fn y1_lower(q_nu_l: f64, q_mu_u: f64, y0_l: f64, mu: f64, nu: f64) -> Result<Clamped> {
    ensure(nu > 0.0, "nu", "must be > 0")?;
    ensure(mu > nu, "mu", "must exceed nu")?;
    let mu2 = mu * mu;
    let nu2 = nu * nu;
    let raw = mu / (mu * nu - nu2)
        * (q_nu_l * nu.exp() - q_mu_u * mu.exp() * nu2 / mu2 - (mu2 - nu2) / mu2 * y0_l);
    Ok(Clamped::new(raw, 0.0, 1.0))
}

/// Upper bound on the single-photon error rate, clamped to [0, 0.5].
pub fn e1_upper(e_nu: f64, q_nu_l: f64, y0_l: f64, y1_l: f64, nu: f64, e_0: f64) -> Result<Clamped> {
    ensure(nu > 0.0, "nu", "must be > 0")?;
    if !(y1_l > 0.0) {
        return Err(Error::EstimationFailure);
    }
    let raw = (e_nu * q_nu_l * nu.exp() - e_0 * y0_l) / (y1_l * nu);
    Ok(Clamped::new(raw, 0.0, 0.5))
}

/// Single-photon gain of a Poissonian source, `Y1 mu e^{-mu}`.
pub fn q1z_from_y1(y1_lower: f64, mu: f64) -> f64 {
    y1_lower * mu * (-mu).exp()
}

/// Inputs of the GLLP-style rate formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTerms {
    /// Sifted signal ratio `N_mu p_z / N_total`.
    pub sifted_ratio: f64,
    pub q0: f64,
    pub q1z: f64,
    /// Phase error rate of single-photon signals.
    pub e1: f64,
    pub f_ec: f64,
    pub q_mu: f64,
    pub e_mu: f64,
}

impl RateTerms {
    pub fn leak_ec(&self) -> Result<f64> {
        Ok(self.f_ec * self.q_mu * binary_entropy(self.e_mu)?)
    }

    /// `R = q (Q0 + Q1 (1 - H(e1)) - leak_EC)`, clamped at zero.
    pub fn key_rate(&self) -> Result<Clamped> {
        let raw = self.sifted_ratio
            * (self.q0 + self.q1z * (1.0 - binary_entropy(self.e1)?) - self.leak_ec()?);
        Ok(Clamped {
            value: raw.max(0.0),
            raw,
        })
    }
}

/// Evaluates one key-rate point with bounds produced by `method`.
pub fn evaluate_point(
    channel: &ChannelParams,
    source: &SourceConfig,
    budget: &FailureBudget,
    method: Method,
    options: &EstimatorOptions,
) -> Result<PointEvaluation> {
    let model = ModelOutputs::evaluate(channel, source)?;
    let tallies = Tallies::from_model(&model, source, options.tallies)?;
    let bounds = bounded_observables(method, &tallies, budget)?;
    evaluate_with_bounds(channel, source, model, tallies, bounds, options)
}

/// Finishes a key-rate point from precomputed bounds.
pub fn evaluate_with_bounds(
    channel: &ChannelParams,
    source: &SourceConfig,
    model: ModelOutputs,
    tallies: Tallies,
    bounds: BoundResult,
    options: &EstimatorOptions,
) -> Result<PointEvaluation> {
    ensure(
        options.phase_error_slack >= 0.0,
        "phase_error_slack",
        "must be >= 0",
    )?;
    let y0_for_yield = match options.y0_direction {
        Y0Direction::Lower => bounds.y0_lower,
        Y0Direction::Conservative => bounds.y0_upper,
    };
    let y1 = y1_lower(
        bounds.q_nu_lower,
        bounds.q_mu_upper,
        y0_for_yield,
        source.mu,
        source.nu,
    )?;
    let mut diagnostics = Diagnostics {
        model_clamped: model.clamped,
        y1_clamped: y1.was_clamped(),
        chernoff_cases: bounds.chernoff_cases,
        ..Diagnostics::default()
    };

    let e1 = match e1_upper(
        model.e_nu,
        bounds.q_nu_lower,
        bounds.y0_lower,
        y1.value,
        source.nu,
        channel.background_error,
    ) {
        Ok(e1) => {
            diagnostics.e1_clamped = e1.was_clamped();
            Some(e1.value)
        }
        Err(Error::EstimationFailure) => {
            diagnostics.estimation_failed = true;
            None
        }
        Err(e) => return Err(e),
    };

    let q1z = q1z_from_y1(y1.value, source.mu);
    let terms = RateTerms {
        sifted_ratio: source.sifted_signal_ratio(),
        q0: bounds.q0_lower,
        q1z,
        e1: (e1.unwrap_or(0.5) + options.phase_error_slack).min(0.5),
        f_ec: source.f_ec,
        q_mu: tallies.q_mu.x_bar(),
        e_mu: model.e_mu_prime,
    };
    let leak_ec = terms.leak_ec()?;
    let rate = terms.key_rate()?;
    diagnostics.raw_rate = rate.raw;

    let point = KeyRatePoint {
        loss_db: channel.loss_db,
        method: bounds.method,
        y1_lower: y1.value,
        e1_upper: e1.unwrap_or(0.5),
        q1z,
        q0: bounds.q0_lower,
        leak_ec,
        rate: if diagnostics.estimation_failed { 0.0 } else { rate.value },
        diagnostics,
    };
    Ok(PointEvaluation {
        model,
        tallies,
        bounds,
        point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::Observable;
    use crate::model::gain;

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        // mpmath, 50 digits
        assert!((binary_entropy(0.11).unwrap() - 0.49991595816452800).abs() < 1e-15);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn y1_zero_of_affine_form() {
        let (mu, nu) = (0.5f64, 0.05f64);
        let q_mu = 0.02;
        let y0 = 1e-5;
        // pick q_nu so the bracket vanishes
        let q_nu = (q_mu * mu.exp() * nu * nu / (mu * mu) + (mu * mu - nu * nu) / (mu * mu) * y0)
            / nu.exp();
        let y1 = y1_lower(q_nu, q_mu, y0, mu, nu).unwrap();
        assert!(y1.raw.abs() < 1e-15);
        assert!(y1_lower(0.1, 0.1, 0.0, 0.05, 0.05).is_err());
    }

    #[test]
    fn y1_linear_in_y0() {
        let (mu, nu) = (0.5f64, 0.05f64);
        let y0 = 3.5e-6;
        let a = y1_lower(0.005, 0.04, y0, mu, nu).unwrap().raw;
        let b = y1_lower(0.005, 0.04, 2.0 * y0, mu, nu).unwrap().raw;
        let expected = mu / (mu * nu - nu * nu) * (mu * mu - nu * nu) / (mu * mu) * y0;
        assert!(((a - b) - expected).abs() < 1e-15);
    }

    #[test]
    fn y1_below_true_single_photon_yield() {
        let (mu, nu) = (0.5f64, 0.05f64);
        let y0 = 2.0 * 1.7e-6;
        for t in 0..=40 {
            let eta = 10f64.powf(-(t as f64) / 10.0);
            let y1_true = 1.0 - (1.0 - y0) * (1.0 - eta);
            let q_mu = gain(eta, mu, y0);
            let q_nu = gain(eta, nu, y0);
            let y1 = y1_lower(q_nu, q_mu, y0, mu, nu).unwrap().value;
            assert!(y1 <= y1_true, "t={t}: {y1} > {y1_true}");
            assert!(y1 > 0.8 * y1_true, "t={t}: bound too loose");
        }
    }

    #[test]
    fn e1_examples() {
        let (nu, e0) = (0.05f64, 0.5);
        let y0 = 4e-6;
        let q_nu = 0.004;
        let e_nu = e0 * y0 / (q_nu * nu.exp());
        assert!(e1_upper(e_nu, q_nu, y0, 0.05, nu, e0).unwrap().raw.abs() < 1e-15);
        let a = e1_upper(0.03, q_nu, y0, 0.08, nu, e0).unwrap().raw;
        let b = e1_upper(0.03, q_nu, y0, 0.04, nu, e0).unwrap().raw;
        assert!((b - 2.0 * a).abs() < 1e-15);
        assert_eq!(
            e1_upper(0.03, q_nu, y0, 0.0, nu, e0),
            Err(Error::EstimationFailure)
        );
    }

    #[test]
    fn e1_above_true_single_photon_error() {
        let (mu, nu, e0, ed) = (0.5f64, 0.05f64, 0.5, 0.033);
        let y0 = 2.0 * 1.7e-6;
        for t in 0..=40 {
            let eta = 10f64.powf(-(t as f64) / 10.0);
            let y1_true = 1.0 - (1.0 - y0) * (1.0 - eta);
            let e1_true = (e0 * y0 + ed * eta) / y1_true;
            let q_mu = gain(eta, mu, y0);
            let q_nu = gain(eta, nu, y0);
            let e_nu = crate::model::observed_qber(eta, nu, y0, q_nu, q_nu, e0, ed, 0.0).unwrap();
            let y1 = y1_lower(q_nu, q_mu, y0, mu, nu).unwrap().value;
            let e1 = e1_upper(e_nu, q_nu, y0, y1, nu, e0).unwrap().value;
            assert!(e1 >= e1_true, "t={t}: {e1} < {e1_true}");
        }
    }

    #[test]
    fn q1z_examples() {
        assert_eq!(q1z_from_y1(0.0, 0.5), 0.0);
        assert!(q1z_from_y1(0.3, 1e-12) < 1e-12);
        assert!((q1z_from_y1(0.1, 0.5) - 0.030327).abs() < 5e-7);
    }

    #[test]
    fn rate_formula_edges() {
        let terms = RateTerms {
            sifted_ratio: 0.56,
            q0: 1e-6,
            q1z: 0.03,
            e1: 0.5,
            f_ec: 1.16,
            q_mu: 0.04,
            e_mu: 0.03,
        };
        // H(0.5) = 1 removes the single-photon term
        let r = terms.key_rate().unwrap();
        let expected = 0.56 * (1e-6 - terms.leak_ec().unwrap());
        assert_eq!(r.raw, expected);
        assert_eq!(r.value, 0.0);
        let none = RateTerms { sifted_ratio: 0.0, e1: 0.02, ..terms };
        assert_eq!(none.key_rate().unwrap().value, 0.0);
    }

    fn defaults(loss: f64, p_ap: f64, n: f64) -> (ChannelParams, SourceConfig) {
        (
            ChannelParams::default().with_loss(loss).with_afterpulse(p_ap),
            SourceConfig::default().with_n_total(n),
        )
    }

    #[test]
    fn zero_fluctuation_methods_agree() {
        let (ch, src) = defaults(12.0, 0.04, 1e12);
        let opts = EstimatorOptions::default();
        let model = ModelOutputs::evaluate(&ch, &src).unwrap();
        let tallies = Tallies::from_model(&model, &src, opts.tallies).unwrap();
        let rates: Vec<f64> = Method::ALL
            .iter()
            .map(|&m| {
                let b = BoundResult::zero_fluctuation(m, &tallies);
                evaluate_with_bounds(&ch, &src, model, tallies, b, &opts)
                    .unwrap()
                    .point
                    .rate
            })
            .collect();
        assert!(rates[0] > 0.0);
        assert!(rates.iter().all(|r| *r == rates[0]));
    }

    #[test]
    fn smaller_radii_never_lower_the_rate() {
        let (ch, src) = defaults(15.0, 0.04, 1e11);
        let opts = EstimatorOptions::default();
        let budget = FailureBudget::uniform(1e-10).unwrap();
        let base = evaluate_point(&ch, &src, &budget, Method::Hoeffding, &opts).unwrap();
        for o in Observable::ALL {
            let mut b = base.bounds;
            match o {
                Observable::QMu => b.q_mu_upper -= 0.5 * b.xi.q_mu,
                Observable::QNu => b.q_nu_lower += 0.5 * b.xi.q_nu,
                Observable::Y0 => b.y0_lower = b.y0_lower.max(0.5 * base.tallies.y0.x_bar()),
                Observable::Q0 => b.q0_lower = b.q0_lower.max(0.5 * base.tallies.q0.x_bar()),
            }
            let tighter =
                evaluate_with_bounds(&ch, &src, base.model, base.tallies, b, &opts).unwrap();
            if o != Observable::Y0 {
                assert!(tighter.point.y1_lower >= base.point.y1_lower, "{o:?}");
            }
            if matches!(o, Observable::QMu) {
                assert!(tighter.point.e1_upper <= base.point.e1_upper);
                assert!(tighter.point.rate >= base.point.rate);
            }
        }
    }

    #[test]
    fn afterpulse_lowers_rate_on_default_sweep() {
        let budget = FailureBudget::uniform(1e-10).unwrap();
        let opts = EstimatorOptions::default();
        for method in Method::ALL {
            for t in 0..=40 {
                let (a, src) = defaults(t as f64, 0.0, 1e12);
                let r0 = evaluate_point(&a, &src, &budget, method, &opts).unwrap().point.rate;
                let r1 = evaluate_point(&a.with_afterpulse(0.04), &src, &budget, method, &opts)
                    .unwrap()
                    .point
                    .rate;
                assert!(r1 <= r0, "{method} t={t}: {r1} > {r0}");
            }
        }
    }

    #[test]
    fn conservative_y0_direction_is_no_better() {
        let budget = FailureBudget::uniform(1e-10).unwrap();
        let (ch, src) = defaults(10.0, 0.04, 1e12);
        for method in Method::ALL {
            let lit = evaluate_point(&ch, &src, &budget, method, &EstimatorOptions::default()).unwrap();
            let cons = evaluate_point(
                &ch,
                &src,
                &budget,
                method,
                &EstimatorOptions {
                    y0_direction: Y0Direction::Conservative,
                    ..EstimatorOptions::default()
                },
            )
            .unwrap();
            assert!(cons.point.y1_lower <= lit.point.y1_lower);
            assert!(cons.point.rate <= lit.point.rate);
        }
    }

    #[test]
    fn estimation_failure_forces_zero_rate() {
        let budget = FailureBudget::uniform(1e-10).unwrap();
        let (ch, src) = defaults(60.0, 0.04, 1e8);
        let ev = evaluate_point(&ch, &src, &budget, Method::Lln, &EstimatorOptions::default()).unwrap();
        assert_eq!(ev.point.rate, 0.0);
        assert!(ev.point.diagnostics.estimation_failed);
    }
}
