//! Information Pollution Index: the four dimensions, weighting, the composite
//! and the observable proxy estimators computed from platform event logs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::PlatformState;
use crate::error::{Error, Result};
use crate::market::{pollution_density, MarketState};
use crate::scalar::Scalar;

/// Default fixed weights: pollution, welfare loss, trust decay, tech risk.
pub const DEFAULT_WEIGHTS: [f64; 4] = [0.35, 0.25, 0.25, 0.15];

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimension {
    Pollution,
    Deadweight,
    TrustDecay,
    TechRisk,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Pollution,
        Dimension::Deadweight,
        Dimension::TrustDecay,
        Dimension::TechRisk,
    ];

    pub fn index(self) -> usize {
        match self {
            Dimension::Pollution => 0,
            Dimension::Deadweight => 1,
            Dimension::TrustDecay => 2,
            Dimension::TechRisk => 3,
        }
    }
}

pub fn default_weights<T: Scalar>() -> [T; 4] {
    DEFAULT_WEIGHTS.map(T::lit)
}

pub fn check_weights<T: Scalar>(w: &[T; 4]) -> Result<()> {
    let sum = w.iter().fold(T::zero(), |a, &b| a + b);
    let ok = w.iter().all(|&x| x >= T::zero() && x.is_finite())
        && (sum - T::one()).abs() <= T::lit(WEIGHT_TOL).max(T::epsilon() * T::lit(8.0));
    if ok {
        Ok(())
    } else {
        Err(Error::WeightSumViolation {
            sum: sum.to_f64().unwrap_or(f64::NAN),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IpiReading<T> {
    pub dims: [T; 4],
    pub weights: [T; 4],
    pub composite: T,
}

impl<T: Scalar> IpiReading<T> {
    pub fn new(dims: [T; 4], weights: [T; 4]) -> Result<Self> {
        let composite = composite(&dims, &weights)?;
        Ok(Self {
            dims,
            weights,
            composite,
        })
    }

    pub fn dim(&self, d: Dimension) -> T {
        self.dims[d.index()]
    }
}

/// A value that was clamped into range, with the clamp recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flagged<T> {
    pub value: T,
    pub flagged: bool,
}

/// I1: share of amplified, unmoderated low-quality content in exposure.
pub fn dim_pollution<T: Scalar>(q_h: T, q_l: T, platform: &PlatformState<T>) -> T {
    pollution_density(q_h, q_l, platform)
}

/// I2: welfare shortfall normalized between the planner optimum and the worst anchor.
pub fn dim_deadweight<T: Scalar>(w: T, w_so: T, w_min: T) -> Result<Flagged<T>> {
    if !(w_so > w_min) {
        return Err(Error::DegenerateAnchors {
            w_so: w_so.to_f64().unwrap_or(f64::NAN),
            w_min: w_min.to_f64().unwrap_or(f64::NAN),
        });
    }
    let clamped = w.clamp_to(w_min, w_so);
    Ok(Flagged {
        value: (w_so - clamped) / (w_so - w_min),
        flagged: clamped != w,
    })
}

/// I3: depletion of the trust stock.
pub fn dim_trust_decay<T: Scalar>(trust: T, t_max: T) -> T {
    ((t_max - trust) / t_max).clamp_to(T::zero(), T::one())
}

/// I4: saturating transform of the generation/detection capability log-ratio.
pub fn dim_tech_risk<T: Scalar>(cap_gen: T, cap_det: T, mu_tech: T, sigma_tech: T) -> T {
    let z = ((cap_gen / cap_det).ln() - mu_tech) / sigma_tech;
    T::half() * (T::one() + z.tanh())
}

pub fn composite<T: Scalar>(dims: &[T; 4], weights: &[T; 4]) -> Result<T> {
    check_weights(weights)?;
    Ok(dims
        .iter()
        .zip(weights)
        .fold(T::zero(), |acc, (&i, &w)| acc + w * i))
}

/// Welfare re-evaluated with one dimension's driver nudged.
pub trait WelfareProbe<T> {
    /// Welfare and dimension vector at the unperturbed point.
    fn base(&self) -> (T, [T; 4]);

    /// Welfare and the moved dimension after nudging its driver by `h`.
    fn nudge(&self, dim: Dimension, h: T) -> (T, T);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndogenousWeights<T> {
    pub weights: [T; 4],
    /// True when a flat direction forced the fixed-weight fallback.
    pub fallback: bool,
}

/// Weights proportional to `|∂W/∂I_j|`, by one-sided finite differences.
pub fn endogenous_weights<T: Scalar, P: WelfareProbe<T> + ?Sized>(probe: &P, h: T) -> EndogenousWeights<T> {
    let (w0, dims0) = probe.base();
    let flat = T::lit(1e-12);
    let mut slopes = [T::zero(); 4];
    let mut fallback = false;
    for d in Dimension::ALL {
        let (w1, moved) = probe.nudge(d, h);
        let dw = w1 - w0;
        let di = moved - dims0[d.index()];
        if dw.abs() < flat || di.abs() < flat || !dw.is_finite() || !di.is_finite() {
            fallback = true;
            break;
        }
        slopes[d.index()] = (dw / di).abs();
    }
    if fallback {
        return EndogenousWeights {
            weights: default_weights(),
            fallback: true,
        };
    }
    let total = slopes.iter().fold(T::zero(), |a, &b| a + b);
    EndogenousWeights {
        weights: slopes.map(|s| s / total),
        fallback: false,
    }
}

// ---------------------------------------------------------------------------
// Proxy system

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HarmType {
    Clickbait,
    Misinformation,
    Fraud,
}

impl HarmType {
    pub const ALL: [HarmType; 3] = [HarmType::Clickbait, HarmType::Misinformation, HarmType::Fraud];

    pub fn default_severity(self) -> f64 {
        match self {
            HarmType::Clickbait => 1.0,
            HarmType::Misinformation => 3.0,
            HarmType::Fraud => 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impression {
    pub item: usize,
    pub low_quality: bool,
    pub count: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feedback {
    pub harm: HarmType,
    pub severity: f64,
    pub count: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cohorts {
    pub churn_high: f64,
    pub churn_low: f64,
    pub churn_base: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorBench {
    pub acc_new: f64,
    pub acc_base: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SyntheticEventLog {
    pub impressions: Vec<Impression>,
    pub feedback: Vec<Feedback>,
    pub cohorts: Option<Cohorts>,
    pub detector: Option<DetectorBench>,
}

impl SyntheticEventLog {
    pub fn total_impressions(&self) -> f64 {
        self.impressions.iter().map(|i| i.count).sum()
    }
}

/// Weighted exposure pollution rate. An empty log reads as zero (flagged).
pub fn proxy_exposure(log: &SyntheticEventLog) -> Flagged<f64> {
    let total = log.total_impressions();
    if total <= 0.0 {
        return Flagged {
            value: 0.0,
            flagged: true,
        };
    }
    let low: f64 = log
        .impressions
        .iter()
        .filter(|i| i.low_quality)
        .map(|i| i.count)
        .sum();
    Flagged {
        value: low / total,
        flagged: false,
    }
}

/// Severity-weighted harm feedback per impression.
pub fn proxy_harm(log: &SyntheticEventLog) -> f64 {
    let total = log.total_impressions();
    if total <= 0.0 {
        return 0.0;
    }
    log.feedback.iter().map(|f| f.severity * f.count).sum::<f64>() / total
}

pub fn proxy_churn_gap(c: &Cohorts) -> Result<f64> {
    if c.churn_base == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok((c.churn_high - c.churn_low) / c.churn_base)
}

/// Detection accuracy gap; negative when detectors are ahead (flagged, not clamped).
pub fn proxy_detection_gap(d: &DetectorBench) -> Flagged<f64> {
    let gap = 1.0 - d.acc_new / d.acc_base;
    Flagged {
        value: gap,
        flagged: gap < 0.0,
    }
}

/// How the log synthesizer maps market quantities into events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogParams {
    /// Items logged per content type each tick.
    pub items_per_type: usize,
    /// Impressions per amplified content unit.
    pub impressions_per_unit: f64,
    /// Harm reports per effective low-quality impression.
    pub feedback_rate: f64,
    /// Share of reports by harm type (clickbait, misinformation, fraud).
    pub harm_mix: [f64; 3],
    pub severities: [f64; 3],
    pub churn_base: f64,
    pub churn_low: f64,
    pub acc_base: f64,
}

impl Default for LogParams {
    fn default() -> Self {
        Self {
            items_per_type: 20,
            impressions_per_unit: 100.0,
            feedback_rate: 0.05,
            harm_mix: [0.6, 0.3, 0.1],
            severities: HarmType::ALL.map(HarmType::default_severity),
            churn_base: 0.10,
            churn_low: 0.05,
            acc_base: 0.95,
        }
    }
}

impl LogParams {
    /// Harm proxy value that maps to dimension 1.0 (every impression low quality, none caught).
    pub fn harm_norm(&self) -> f64 {
        self.feedback_rate
            * self
                .harm_mix
                .iter()
                .zip(&self.severities)
                .map(|(m, s)| m * s)
                .sum::<f64>()
    }
}

/// Market-side inputs the synthesizer reads beyond the market state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogContext {
    /// Fraction of low-quality impressions that reach consumers undetected.
    pub undetected_share: f64,
    /// Theoretical trust-decay dimension.
    pub trust_decay: f64,
    /// Theoretical tech-risk dimension.
    pub tech_risk: f64,
}

/// Build a platform event log from one tick of the simulator.
///
/// Every field gets independent multiplicative noise `U(1-noise, 1+noise)`.
/// The RNG is consumed identically for every noise level, so logs at
/// different levels share their underlying draws.
pub fn synthesize_log<R: Rng + ?Sized>(
    state: &MarketState,
    platform: &PlatformState<f64>,
    ctx: &LogContext,
    params: &LogParams,
    noise: f64,
    rng: &mut R,
) -> SyntheticEventLog {
    let mut jitter = |x: f64| x * (1.0 + noise * (2.0 * rng.random::<f64>() - 1.0));
    let k = params.items_per_type.max(1);
    let high = platform.gamma_h * state.q_h * params.impressions_per_unit / k as f64;
    let low = platform.gamma_l * (1.0 - platform.moderation) * state.q_l * params.impressions_per_unit
        / k as f64;

    let mut impressions = Vec::with_capacity(2 * k);
    for item in 0..k {
        impressions.push(Impression {
            item,
            low_quality: false,
            count: jitter(high),
        });
    }
    for item in 0..k {
        impressions.push(Impression {
            item: k + item,
            low_quality: true,
            count: jitter(low),
        });
    }

    let reports = params.feedback_rate * low * k as f64 * ctx.undetected_share;
    let feedback = HarmType::ALL
        .iter()
        .enumerate()
        .map(|(j, &harm)| Feedback {
            harm,
            severity: params.severities[j],
            count: jitter(params.harm_mix[j] * reports),
        })
        .collect();

    let cohorts = Cohorts {
        churn_high: jitter(params.churn_low + params.churn_base * ctx.trust_decay).clamp(0.0, 1.0),
        churn_low: jitter(params.churn_low).clamp(0.0, 1.0),
        churn_base: jitter(params.churn_base).clamp(0.0, 1.0),
    };
    let detector = DetectorBench {
        acc_new: jitter(params.acc_base * (1.0 - ctx.tech_risk)).clamp(0.0, 1.0),
        acc_base: jitter(params.acc_base).clamp(f64::MIN_POSITIVE, 1.0),
    };

    SyntheticEventLog {
        impressions,
        feedback,
        cohorts: Some(cohorts),
        detector: Some(detector),
    }
}

/// Dimension estimates from the proxies, each mapped into `[0, 1]`.
pub fn proxy_dimensions(log: &SyntheticEventLog, params: &LogParams) -> Result<[f64; 4]> {
    let exposure = proxy_exposure(log).value;
    let harm = proxy_harm(log) / params.harm_norm();
    let churn = match &log.cohorts {
        Some(c) => proxy_churn_gap(c)?,
        None => 0.0,
    };
    let detect = log.detector.as_ref().map(|d| proxy_detection_gap(d).value).unwrap_or(0.0);
    Ok([exposure, harm, churn, detect].map(|x| x.clamp(0.0, 1.0)))
}

pub fn proxy_ipi(log: &SyntheticEventLog, params: &LogParams, weights: &[f64; 4]) -> Result<f64> {
    composite(&proxy_dimensions(log, params)?, weights)
}
