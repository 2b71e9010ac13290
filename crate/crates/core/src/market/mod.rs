//! Market clearing for one tick: pollution density, the verification fixed
//! point, trust dynamics and welfare accounting.

mod anchors;
mod sim;
mod statics;
mod supply;

pub use anchors::{evaluate_static, find_anchors, Anchors, StaticOutcome};
pub use sim::{
    cell_rng, draw_populations, standard_shocks, Populations, ShockEvent, ShockKind, Simulation, TickRecord,
};
pub(crate) use sim::Economy;
pub use statics::{comparative_statics, pearson, StaticsCell, StaticsTable, SWEEP_RENTALS, SWEEP_SIGMAS};
pub use supply::{expected_supply, sampled_supply, unit_costs, Supply, SupplyTerms};

use serde::{Deserialize, Serialize};

use crate::agents::{consumer_posterior, verification_threshold, ConsumerAgent, PlatformState, Signal};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Market outcome after one tick.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MarketState {
    pub tick: usize,
    pub q_h: f64,
    pub q_l: f64,
    pub pollution: f64,
    pub verify_rate: f64,
    pub precision: f64,
    pub trust: f64,
    pub welfare: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustParams<T> {
    pub decay: T,
    pub pollution_hit: T,
    pub repair_gain: T,
    /// Exogenous repair flow `R`.
    pub repair_flow: T,
    pub t_max: T,
}

impl<T: Scalar> TrustParams<T> {
    pub fn new(decay: T, pollution_hit: T, repair_gain: T, repair_flow: T, t_max: T) -> Result<Self> {
        if !(decay > T::zero() && decay < T::one()) {
            return Err(Error::invalid("trust.decay", "must lie in (0,1)"));
        }
        if !(t_max > T::zero()) {
            return Err(Error::invalid("trust.t_max", "must be positive"));
        }
        if pollution_hit < T::zero() || repair_gain < T::zero() || repair_flow < T::zero() {
            return Err(Error::invalid("trust", "hit, gain and flow must be nonnegative"));
        }
        Ok(Self {
            decay,
            pollution_hit,
            repair_gain,
            repair_flow,
            t_max,
        })
    }

    /// Trust level at which decay balances repair less erosion.
    pub fn steady_state(&self, erosion: T) -> T {
        ((self.repair_gain * self.repair_flow - self.pollution_hit * erosion) / self.decay).clamp_to(T::zero(), self.t_max)
    }
}

/// Share of amplified, unmoderated low-quality content in total exposure.
/// Zero when nothing is exposed.
pub fn pollution_density<T: Scalar>(q_h: T, q_l: T, platform: &PlatformState<T>) -> T {
    let low = platform.gamma_l * (T::one() - platform.moderation) * q_l;
    let total = platform.gamma_h * q_h + low;
    if low <= T::zero() || total <= T::zero() {
        T::zero()
    } else {
        (low / total).clamp_to(T::zero(), T::one())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalParams<T> {
    pub base: T,
    pub pollution_slope: T,
    pub verify_slope: T,
}

impl<T: Scalar> Default for SignalParams<T> {
    fn default() -> Self {
        Self {
            base: T::lit(0.85),
            pollution_slope: T::lit(0.3),
            verify_slope: T::lit(0.1),
        }
    }
}

pub fn signal_precision<T: Scalar>(pollution: T, verify_rate: T, provenance_boost: T, p: &SignalParams<T>) -> T {
    (p.base - p.pollution_slope * pollution + p.verify_slope * verify_rate + provenance_boost).clamp_to(T::half(), T::one())
}

/// Settings of the consumers' verification game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationParams {
    pub du_high: f64,
    /// Gain from verifying low-quality content at mean risk aversion.
    pub du_low: f64,
    pub ramp: f64,
    pub damping: f64,
    pub start: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for VerificationParams {
    fn default() -> Self {
        Self {
            du_high: 0.5,
            du_low: 2.0,
            ramp: 0.01,
            damping: 0.5,
            start: 0.5,
            tolerance: 1e-8,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub verify_rate: f64,
    pub precision: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Mean verification outlay per consumer at the fixed point.
    pub spend: f64,
}

/// Probability that consumer `c` verifies after seeing a signal, smoothed
/// over a cost window of width `ramp` above the cutoff.
fn verify_weight(c: &ConsumerAgent, posterior_h: f64, vp: &VerificationParams) -> f64 {
    let du_low = vp.du_low * c.risk_aversion / crate::agents::MEAN_RISK_AVERSION;
    let cutoff = verification_threshold(posterior_h, vp.du_high, du_low);
    (1.0 + (cutoff - c.verify_cost) / vp.ramp).clamp(0.0, 1.0)
}

/// Verification rate and mean spend the population would choose if
/// signals had precision `precision`.
fn response(pollution: f64, precision: f64, consumers: &[ConsumerAgent], vp: &VerificationParams) -> (f64, f64) {
    let prior = (1.0 - pollution).clamp(0.0, 1.0);
    let p_high_signal = prior * precision + (1.0 - prior) * (1.0 - precision);
    let post_h = consumer_posterior(prior, Signal::High, precision);
    let post_l = consumer_posterior(prior, Signal::Low, precision);
    let (mut rate, mut spend) = (0.0, 0.0);
    for c in consumers {
        let v = p_high_signal * verify_weight(c, post_h, vp) + (1.0 - p_high_signal) * verify_weight(c, post_l, vp);
        rate += v;
        spend += v * c.verify_cost;
    }
    let n = consumers.len() as f64;
    (rate / n, spend / n)
}

/// The best-response map `V ↦ F(k*(π(ρ', V)))`.
pub fn verification_map(
    verify_rate: f64,
    pollution: f64,
    consumers: &[ConsumerAgent],
    provenance_boost: f64,
    signal: &SignalParams<f64>,
    vp: &VerificationParams,
) -> f64 {
    let pi = signal_precision(pollution, verify_rate, provenance_boost, signal);
    response(pollution, pi, consumers, vp).0
}

/// Damped iteration to the verification fixed point.
pub fn solve_verification_fixed_point(
    pollution: f64,
    consumers: &[ConsumerAgent],
    provenance_boost: f64,
    signal: &SignalParams<f64>,
    vp: &VerificationParams,
) -> Result<FixedPoint> {
    if consumers.is_empty() {
        return Err(Error::invalid("consumers", "population must be nonempty"));
    }
    let mut v = vp.start;
    let mut residual = f64::INFINITY;
    for it in 0..=vp.max_iter {
        let t = verification_map(v, pollution, consumers, provenance_boost, signal, vp);
        residual = (t - v).abs();
        if residual < vp.tolerance {
            let precision = signal_precision(pollution, v, provenance_boost, signal);
            let spend = response(pollution, precision, consumers, vp).1;
            return Ok(FixedPoint {
                verify_rate: v,
                precision,
                iterations: it,
                residual,
                spend,
            });
        }
        v = ((1.0 - vp.damping) * v + vp.damping * t).clamp(0.0, 1.0);
    }
    Err(Error::NoConvergence {
        iterations: vp.max_iter,
        residual,
        pollution,
    })
}

/// One explicit Euler step of the trust stock.
pub fn trust_update<T: Scalar>(trust: T, i1: T, flow: T, p: &TrustParams<T>) -> T {
    (trust - p.pollution_hit * i1 * flow + p.repair_gain * p.repair_flow - p.decay * trust).clamp_to(T::zero(), p.t_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelfareParams {
    pub v1: f64,
    pub h1: f64,
    pub h2: f64,
    pub lambda_trust: f64,
    pub feed_scale: f64,
    pub evasion: f64,
}

impl Default for WelfareParams {
    fn default() -> Self {
        Self {
            v1: 1.0,
            h1: 0.8,
            h2: 0.1,
            lambda_trust: 10.0,
            feed_scale: 10.0,
            evasion: 0.5,
        }
    }
}

impl WelfareParams {
    pub fn harm(&self, x: f64) -> f64 {
        self.h1 * x + self.h2 * x * x
    }

    pub fn marginal_harm(&self, x: f64) -> f64 {
        self.h1 + 2.0 * self.h2 * x
    }
}

/// Per-consumer inputs to the welfare function for one tick.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WelfareInputs {
    /// Amplified high-quality exposure per producer slot.
    pub exposure_h: f64,
    /// Amplified, unmoderated low-quality exposure per producer slot.
    pub exposure_l: f64,
    pub verify_rate: f64,
    pub precision: f64,
    /// Probability that verification catches low-quality content.
    pub detection: f64,
    pub trust: f64,
    /// Producer, platform and tax surplus per consumer.
    pub surplus: f64,
    pub verification_spend: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WelfareBreakdown {
    pub consumed_h: f64,
    pub consumed_l: f64,
    pub value: f64,
    pub harm: f64,
    pub surplus: f64,
    pub spend: f64,
    pub trust_term: f64,
    pub total: f64,
}

pub fn welfare(x: &WelfareInputs, p: &WelfareParams) -> WelfareBreakdown {
    let v = x.verify_rate;
    let consumed_h = p.feed_scale * x.exposure_h * ((1.0 - v) * x.precision + v);
    let consumed_l = p.feed_scale * x.exposure_l * ((1.0 - v) * (1.0 - x.precision) + v * (1.0 - x.detection));
    let value = p.v1 * consumed_h;
    let harm = p.harm(consumed_l);
    let trust_term = p.lambda_trust * x.trust;
    WelfareBreakdown {
        consumed_h,
        consumed_l,
        value,
        harm,
        surplus: x.surplus,
        spend: x.verification_spend,
        trust_term,
        total: value - harm + x.surplus - x.verification_spend + trust_term,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn platform(gh: f64, gl: f64, m: f64) -> PlatformState<f64> {
        PlatformState::new(gh, gl, m, 0.25, 4.0, 0.0, 0.0, 0.0, 2.0).unwrap()
    }

    fn consumers(costs: &[f64]) -> Vec<ConsumerAgent> {
        costs
            .iter()
            .enumerate()
            .map(|(id, &k)| ConsumerAgent {
                id,
                verify_cost: k,
                risk_aversion: 0.4,
            })
            .collect()
    }

    #[test]
    fn pollution_cases() {
        assert_eq!(pollution_density(5.0, 0.0, &platform(1.0, 1.0, 0.2)), 0.0);
        assert_eq!(pollution_density(5.0, 3.0, &platform(1.0, 1.0, 1.0)), 0.0);
        assert_eq!(pollution_density(4.0, 4.0, &platform(1.5, 1.5, 0.0)), 0.5);
        assert_eq!(pollution_density(0.0, 0.0, &platform(1.0, 1.0, 0.0)), 0.0);
        assert_eq!(pollution_density(0.0f32, 2.0, &PlatformState::new(1.0f32, 1.0, 0.0, 0.25, 4.0, 0.0, 0.0, 0.0, 2.0).unwrap()), 1.0);
    }

    #[test]
    fn precision_cases() {
        let s = SignalParams::default();
        assert_eq!(signal_precision(0.0, 0.0, 0.0, &s), 0.85);
        let steep = SignalParams { pollution_slope: 5.0, ..s };
        assert_eq!(signal_precision(1.0, 0.0, 0.0, &steep), 0.5);
        assert!((signal_precision(0.5f64, 0.4, 0.0, &s) - 0.74).abs() < 1e-12);
    }

    #[test]
    fn free_verification_is_universal() {
        let pop = consumers(&[0.0; 10]);
        let fp = solve_verification_fixed_point(0.4, &pop, 0.0, &SignalParams::default(), &VerificationParams::default()).unwrap();
        assert!((fp.verify_rate - 1.0).abs() < 1e-8);
    }

    #[test]
    fn no_benefit_leaves_only_free_verifiers() {
        let pop = consumers(&[0.0, 0.0, 1.0, 2.0, 3.0, 0.5, 0.0, 4.0]);
        let vp = VerificationParams {
            du_high: 0.0,
            du_low: 0.0,
            ..Default::default()
        };
        let fp = solve_verification_fixed_point(0.6, &pop, 0.0, &SignalParams::default(), &vp).unwrap();
        assert!((fp.verify_rate - 3.0 / 8.0).abs() < 1e-8);
    }

    #[test]
    fn empty_population_rejected() {
        assert!(solve_verification_fixed_point(0.5, &[], 0.0, &SignalParams::default(), &VerificationParams::default()).is_err());
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let pop = consumers(&[0.0, 1.0, 2.0, 3.0]);
        let vp = VerificationParams {
            max_iter: 0,
            start: 0.123,
            ..Default::default()
        };
        let err = solve_verification_fixed_point(0.5, &pop, 0.0, &SignalParams::default(), &vp).unwrap_err();
        assert!(err.is_convergence_failure());
    }

    #[test]
    fn trust_cases() {
        let p = TrustParams::new(0.05, 0.2, 1.0, 0.0, 1.0).unwrap();
        assert!((trust_update(0.6f64, 0.0, 1.0, &p) - 0.57).abs() < 1e-12);
        assert_eq!(trust_update(0.0, 5.0, 3.0, &p), 0.0);
        let p = TrustParams::new(0.05, 0.2, 1.0, 0.01, 1.0).unwrap();
        assert!((trust_update(0.5f64, 0.5, 1.0, &p) - 0.385).abs() < 1e-12);
    }

    #[test]
    fn empty_market_has_zero_welfare() {
        let w = welfare(&WelfareInputs::default(), &WelfareParams::default());
        assert_eq!(w.total, 0.0);
    }

    #[test]
    fn welfare_linear_in_trust_price() {
        let x = WelfareInputs {
            exposure_h: 1.0,
            exposure_l: 0.5,
            verify_rate: 0.3,
            precision: 0.8,
            detection: 0.9,
            trust: 0.4,
            surplus: 2.0,
            verification_spend: 0.3,
        };
        let p = WelfareParams::default();
        let a = welfare(&x, &p);
        let b = welfare(&x, &WelfareParams { lambda_trust: 2.0 * p.lambda_trust, ..p });
        assert!((b.trust_term - 2.0 * a.trust_term).abs() < 1e-12);
        assert!((b.total - a.total - a.trust_term).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn pollution_bounded(qh in 0.0f64..100.0, ql in 0.0f64..100.0, gh in 0.0f64..2.0, gl in 0.0f64..2.0, m in 0.0f64..1.0) {
            let rho = pollution_density(qh, ql, &platform(gh, gl, m));
            prop_assert!((0.0..=1.0).contains(&rho));
            prop_assert_eq!(rho == 0.0, gl * (1.0 - m) * ql == 0.0);
        }

        #[test]
        fn trust_stays_in_bounds(t in 0.0f64..1.0, i1 in 0.0f64..1.0, flow in 0.0f64..50.0, hit in 0.0f64..5.0, gain in 0.0f64..50.0, mu in 0.001f64..0.999) {
            let p = TrustParams::new(mu, hit, gain, 0.01, 1.0).unwrap();
            let next = trust_update(t, i1, flow, &p);
            prop_assert!((0.0..=1.0).contains(&next));
        }

        #[test]
        fn welfare_linear_in_value_weight(v1 in 0.0f64..5.0, eh in 0.0f64..3.0, el in 0.0f64..3.0, v in 0.0f64..1.0) {
            let x = WelfareInputs { exposure_h: eh, exposure_l: el, verify_rate: v, precision: 0.7, detection: 0.8, trust: 0.3, surplus: 1.0, verification_spend: 0.2 };
            let p = WelfareParams { v1, ..Default::default() };
            let a = welfare(&x, &p);
            let b = welfare(&x, &WelfareParams { v1: 2.0 * v1, ..p });
            prop_assert!((b.total - a.total - a.value).abs() < 1e-9);
        }

        #[test]
        fn fixed_point_residual_small(pollution in 0.0f64..1.0, seed in 0u64..50) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let pop = crate::agents::draw_consumers(60, 4.0, &mut rng).unwrap();
            let s = SignalParams::default();
            let vp = VerificationParams::default();
            let fp = solve_verification_fixed_point(pollution, &pop, 0.0, &s, &vp).unwrap();
            prop_assert!((0.0..=1.0).contains(&fp.verify_rate));
            let t = verification_map(fp.verify_rate, pollution, &pop, 0.0, &s, &vp);
            prop_assert!((t - fp.verify_rate).abs() < 1e-8);
        }
    }
}
