//! Behavioral rules for producers, consumers and the platform.

use rand::Rng;
use rand_distr::{Beta, Distribution, LogNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContentType {
    High,
    Low,
}

/// Public quality signal; same alphabet as the content type.
pub type Signal = ContentType;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProducerAgent {
    pub id: usize,
    pub prod_h: f64,
    pub prod_l: f64,
    pub rationality: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsumerAgent {
    pub id: usize,
    pub verify_cost: f64,
    pub risk_aversion: f64,
}

/// Platform governance levers and learning parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatformState<T> {
    pub gamma_h: T,
    pub gamma_l: T,
    pub moderation: T,
    pub revenue_share: T,
    pub ad_rate: T,
    pub lr_gamma: T,
    pub lr_mod: T,
    pub trust_price: T,
    /// Upper bound on amplification weights.
    pub gamma_max: T,
}

impl<T: Scalar> PlatformState<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        gamma_h: T,
        gamma_l: T,
        moderation: T,
        revenue_share: T,
        ad_rate: T,
        lr_gamma: T,
        lr_mod: T,
        trust_price: T,
        gamma_max: T,
    ) -> Result<Self> {
        let zero = T::zero();
        if !(gamma_max > zero) {
            return Err(Error::invalid("gamma_max", "must be positive"));
        }
        if !(revenue_share > zero && revenue_share < T::one()) {
            return Err(Error::invalid("revenue_share", "must lie in (0,1)"));
        }
        if !(ad_rate > zero) {
            return Err(Error::invalid("ad_rate", "must be positive"));
        }
        if lr_gamma < zero || lr_mod < zero {
            return Err(Error::invalid("learning_rate", "must be nonnegative"));
        }
        if trust_price < zero {
            return Err(Error::invalid("trust_price", "must be nonnegative"));
        }
        for (name, g) in [("gamma_h", gamma_h), ("gamma_l", gamma_l)] {
            if !(g >= zero && g <= gamma_max) {
                return Err(Error::invalid(name, "must lie in [0, gamma_max]"));
            }
        }
        if !(moderation >= zero && moderation <= T::one()) {
            return Err(Error::invalid("moderation", "must lie in [0,1]"));
        }
        Ok(Self {
            gamma_h,
            gamma_l,
            moderation,
            revenue_share,
            ad_rate,
            lr_gamma,
            lr_mod,
            trust_price,
            gamma_max,
        })
    }

    pub fn gamma(&self, content: ContentType) -> T {
        match content {
            ContentType::High => self.gamma_h,
            ContentType::Low => self.gamma_l,
        }
    }

    /// Project the levers back onto `[0, γ̄]² × [0, 1]`.
    pub fn projected(mut self) -> Self {
        self.gamma_h = self.gamma_h.clamp_to(T::zero(), self.gamma_max);
        self.gamma_l = self.gamma_l.clamp_to(T::zero(), self.gamma_max);
        self.moderation = self.moderation.clamp_to(T::zero(), T::one());
        self
    }

    pub fn is_admissible(&self) -> bool {
        let z = T::zero();
        self.gamma_h >= z
            && self.gamma_h <= self.gamma_max
            && self.gamma_l >= z
            && self.gamma_l <= self.gamma_max
            && self.moderation >= z
            && self.moderation <= T::one()
    }
}

/// Logit probability that a producer chooses high-quality content.
pub fn producer_choice_prob<T: Scalar>(profit_h: T, profit_l: T, rationality: T) -> T {
    let a = rationality * profit_h;
    let b = rationality * profit_l;
    if a == b {
        return T::half();
    }
    let m = a.max(b);
    let ea = (a - m).exp();
    let eb = (b - m).exp();
    ea / (ea + eb)
}

/// Per-unit profit `(1-θ) ρ γ_j − c_j`, less the per-unit levy on low-quality output.
pub fn unit_profit<T: Scalar>(
    content: ContentType,
    platform: &PlatformState<T>,
    cost: T,
    tax: T,
) -> Result<T> {
    if content == ContentType::High && tax > T::zero() {
        return Err(Error::TaxOnHighQuality(tax.to_f64().unwrap_or(f64::NAN)));
    }
    let revenue = (T::one() - platform.revenue_share) * platform.ad_rate * platform.gamma(content);
    Ok(revenue - cost - tax)
}

/// Bayes update of `P(q = H)` after a symmetric binary signal of the given precision.
pub fn consumer_posterior<T: Scalar>(prior_h: T, signal: Signal, precision: T) -> T {
    let (like_h, like_l) = match signal {
        ContentType::High => (precision, T::one() - precision),
        ContentType::Low => (T::one() - precision, precision),
    };
    let num = prior_h * like_h;
    let den = num + (T::one() - prior_h) * like_l;
    if den <= T::zero() {
        prior_h
    } else {
        num / den
    }
}

/// Verification threshold `p ΔU_H + (1-p) ΔU_L`.
pub fn verification_threshold<T: Scalar>(posterior_h: T, du_h: T, du_l: T) -> T {
    posterior_h * du_h + (T::one() - posterior_h) * du_l
}

/// Finite-difference gradients fed to [`platform_update`].
///
/// The `trust_*` entries are gradients of the trust deficit the platform
/// causes (the retention penalty), so a positive value argues for pulling the
/// lever back.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PlatformGradients<T> {
    pub profit_gamma_h: T,
    pub profit_gamma_l: T,
    pub profit_mod: T,
    pub trust_gamma_h: T,
    pub trust_gamma_l: T,
    pub trust_mod: T,
}

/// One projected gradient-ascent step on `(γ_H, γ_L, m)`.
pub fn platform_update<T: Scalar>(state: &PlatformState<T>, grad: &PlatformGradients<T>) -> PlatformState<T> {
    let lam = state.trust_price;
    let mut next = *state;
    next.gamma_h = state.gamma_h + state.lr_gamma * (grad.profit_gamma_h - lam * grad.trust_gamma_h);
    next.gamma_l = state.gamma_l + state.lr_gamma * (grad.profit_gamma_l - lam * grad.trust_gamma_l);
    next.moderation = state.moderation + state.lr_mod * (grad.profit_mod - lam * grad.trust_mod);
    next.projected()
}

/// Lognormal productivity draws rescaled to a target population mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductivityDraw {
    pub mean_h: f64,
    pub mean_l: f64,
    pub log_sd: f64,
}

impl ProductivityDraw {
    fn scale(&self, target_mean: f64) -> f64 {
        // E[exp(N(0, s^2))] = exp(s^2 / 2)
        target_mean / (0.5 * self.log_sd * self.log_sd).exp()
    }
}

pub fn draw_producers<R: Rng + ?Sized>(
    n: usize,
    draw: &ProductivityDraw,
    rationality: f64,
    rng: &mut R,
) -> Result<Vec<ProducerAgent>> {
    let ln = LogNormal::new(0.0, draw.log_sd)
        .map_err(|e| Error::invalid("productivity.log_sd", e.to_string()))?;
    let (sh, sl) = (draw.scale(draw.mean_h), draw.scale(draw.mean_l));
    Ok((0..n)
        .map(|id| ProducerAgent {
            id,
            prod_h: sh * ln.sample(rng),
            prod_l: sl * ln.sample(rng),
            rationality,
        })
        .collect())
}

/// Uniform verification costs on `[0, k_max]`, Beta(2,3) risk aversion.
pub fn draw_consumers<R: Rng + ?Sized>(n: usize, k_max: f64, rng: &mut R) -> Result<Vec<ConsumerAgent>> {
    if !(k_max >= 0.0) {
        return Err(Error::invalid("k_max", "must be nonnegative"));
    }
    let unit = Uniform::new(0.0, 1.0).map_err(|e| Error::invalid("k_max", e.to_string()))?;
    let beta = Beta::new(2.0, 3.0).map_err(|e| Error::invalid("risk_aversion", e.to_string()))?;
    Ok((0..n)
        .map(|id| ConsumerAgent {
            id,
            verify_cost: k_max * unit.sample(rng),
            risk_aversion: beta.sample(rng),
        })
        .collect())
}

/// Mean of the Beta(2,3) risk-aversion distribution.
pub const MEAN_RISK_AVERSION: f64 = 0.4;
