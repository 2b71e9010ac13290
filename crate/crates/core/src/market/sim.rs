use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::supply::{expected_supply, sampled_supply, unit_costs, Supply, SupplyTerms};
use super::{
    pollution_density, solve_verification_fixed_point, trust_update, welfare, Anchors, FixedPoint, MarketState,
    SignalParams, TrustParams, VerificationParams, WelfareBreakdown, WelfareInputs, WelfareParams,
};
use crate::agents::{
    draw_consumers, draw_producers, platform_update, ConsumerAgent, PlatformGradients, PlatformState, ProducerAgent,
    ProductivityDraw,
};
use crate::econ::{check_asymmetry, CesTechnology, FactorPrices};
use crate::error::{Error, Result};
use crate::ipi::{
    composite, dim_deadweight, dim_tech_risk, dim_trust_decay, endogenous_weights, Dimension, WelfareProbe,
};
use crate::params::{ModelParams, SupplyMode, WeightMode};
use crate::policy::{adaptive_tax, fiduciary_objective, PolicyConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Populations {
    pub producers: Vec<ProducerAgent>,
    pub consumers: Vec<ConsumerAgent>,
}

/// Population draws from stream 0 of the master seed. Every cell of an
/// experiment shares them.
pub fn draw_populations(p: &ModelParams, seed: u64) -> Result<Populations> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let draw = ProductivityDraw {
        mean_h: p.agents.prod_h_mean,
        mean_l: p.agents.prod_l_mean,
        log_sd: p.agents.prod_log_sd,
    };
    let producers = draw_producers(p.agents.n_producers, &draw, p.agents.rationality, &mut rng)?;
    let consumers = draw_consumers(p.agents.n_consumers, p.agents.k_max, &mut rng)?;
    Ok(Populations { producers, consumers })
}

/// In-run stream for cell `cell` of an experiment.
pub fn cell_rng(seed: u64, cell: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cell + 1);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShockKind {
    CostDrop,
    CapabilityJump,
    FakeNewsBurst,
    TrustShock,
}

impl ShockKind {
    pub const ALL: [ShockKind; 4] = [
        ShockKind::CostDrop,
        ShockKind::CapabilityJump,
        ShockKind::FakeNewsBurst,
        ShockKind::TrustShock,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShockKind::CostDrop => "cost_drop",
            ShockKind::CapabilityJump => "capability_jump",
            ShockKind::FakeNewsBurst => "fake_news_burst",
            ShockKind::TrustShock => "trust_shock",
        }
    }
}

impl fmt::Display for ShockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShockKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ShockKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown shock kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockEvent {
    pub tick: usize,
    pub kind: ShockKind,
    pub magnitude: f64,
}

/// The four configured shocks, in tick order.
pub fn standard_shocks(p: &ModelParams) -> Vec<ShockEvent> {
    let s = &p.shocks;
    let mut v = vec![
        ShockEvent { tick: s.cost_drop_tick, kind: ShockKind::CostDrop, magnitude: s.cost_drop },
        ShockEvent { tick: s.capability_tick, kind: ShockKind::CapabilityJump, magnitude: s.capability_jump },
        ShockEvent { tick: s.fake_news_tick, kind: ShockKind::FakeNewsBurst, magnitude: s.fake_news },
        ShockEvent { tick: s.trust_tick, kind: ShockKind::TrustShock, magnitude: s.trust_shock },
    ];
    v.sort_by_key(|e| e.tick);
    v
}

/// One row of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: usize,
    pub q_h: f64,
    pub q_l: f64,
    pub pollution: f64,
    pub verify_rate: f64,
    pub precision: f64,
    pub trust: f64,
    pub welfare: f64,
    pub dims: [f64; 4],
    pub weights: [f64; 4],
    pub ipi: f64,
    pub tau: f64,
    pub gamma_h: f64,
    pub gamma_l: f64,
    pub m: f64,
    pub event: String,
    /// Deadweight reading fell outside the anchors and was clamped.
    pub i2_clamped: bool,
    pub weights_fallback: bool,
    /// Share of low-quality impressions that reach consumers undetected.
    pub undetected_share: f64,
    pub ai_rental: f64,
    pub cap_gen: f64,
    pub cap_det: f64,
    pub breakdown: WelfareBreakdown,
}

impl TickRecord {
    pub fn market_state(&self) -> MarketState {
        MarketState {
            tick: self.tick,
            q_h: self.q_h,
            q_l: self.q_l,
            pollution: self.pollution,
            verify_rate: self.verify_rate,
            precision: self.precision,
            trust: self.trust,
            welfare: self.welfare,
        }
    }
}

const SETTLE_MAX_ROUNDS: usize = 200;
const SETTLE_TOLERANCE: f64 = 1e-12;

/// Validated model objects derived from the flat parameter set.
#[derive(Debug, Clone)]
pub(crate) struct Economy {
    pub tech_h: CesTechnology<f64>,
    pub tech_l: CesTechnology<f64>,
    pub prices: FactorPrices<f64>,
    pub trust: TrustParams<f64>,
    pub signal: SignalParams<f64>,
    pub verification: VerificationParams,
    pub welfare: WelfareParams,
    pub n_producers: f64,
    pub n_consumers: f64,
    pub moderation_cost: f64,
    pub amplification_cost: f64,
}

impl Economy {
    pub fn new(p: &ModelParams) -> Result<Self> {
        p.validate()?;
        let tech_h = CesTechnology::new(p.tech.tfp_h, p.tech.share_h, p.tech.sigma_h)?;
        let tech_l = CesTechnology::new(p.tech.tfp_l, p.tech.share_l, p.tech.sigma_l)?;
        check_asymmetry(&tech_h, &tech_l)?;
        let t = &p.trust;
        let s = &p.signal;
        Ok(Self {
            tech_h,
            tech_l,
            prices: FactorPrices::new(p.prices.ai_rental, p.prices.wage)?,
            trust: TrustParams::new(t.decay, t.pollution_hit, t.repair_gain, t.repair_flow, t.t_max)?,
            signal: SignalParams {
                base: s.pi_base,
                pollution_slope: s.kappa_pollution,
                verify_slope: s.kappa_verify,
            },
            verification: VerificationParams {
                du_high: p.agents.du_high,
                du_low: p.agents.du_low,
                ramp: s.ramp,
                damping: s.damping,
                start: s.start,
                tolerance: s.tolerance,
                max_iter: s.max_iter,
            },
            welfare: WelfareParams {
                v1: p.welfare.v1,
                h1: p.welfare.h1,
                h2: p.welfare.h2,
                lambda_trust: p.welfare.lambda_trust,
                feed_scale: p.welfare.feed_scale,
                evasion: p.welfare.evasion,
            },
            n_producers: p.agents.n_producers as f64,
            n_consumers: p.agents.n_consumers as f64,
            moderation_cost: p.platform.moderation_cost,
            amplification_cost: p.platform.amplification_cost,
        })
    }

    pub fn initial_platform(&self, p: &ModelParams) -> Result<PlatformState<f64>> {
        let q = &p.platform;
        PlatformState::new(
            q.gamma_h0,
            q.gamma_l0,
            q.moderation0,
            q.theta,
            q.ad_rate,
            q.lr_gamma,
            q.lr_mod,
            q.trust_price,
            q.gamma_max,
        )
    }

    /// Exposure per producer slot: `(high, unmoderated low)`.
    pub fn exposures(&self, platform: &PlatformState<f64>, q_h: f64, q_l: f64) -> (f64, f64) {
        (
            platform.gamma_h * q_h / self.n_producers,
            platform.gamma_l * (1.0 - platform.moderation) * q_l / self.n_producers,
        )
    }

    /// Platform ad revenue less moderation and amplification costs, over all slots.
    pub fn platform_profit(&self, platform: &PlatformState<f64>, q_h: f64, q_l: f64, engagement_l: f64) -> f64 {
        let (m, gh, gl) = (platform.moderation, platform.gamma_h, platform.gamma_l);
        platform.revenue_share * platform.ad_rate * (gh * q_h + gl * (1.0 - m) * engagement_l * q_l)
            - self.moderation_cost * m * m * (q_h + q_l)
            - 0.5 * self.amplification_cost * (gh * gh * q_h + gl * gl * q_l)
    }

    pub fn detection(&self, tech_risk: f64) -> f64 {
        1.0 - self.welfare.evasion * tech_risk
    }

    /// Share of low-quality impressions not flagged by verifiers.
    pub fn engagement(verify_rate: f64, detection: f64) -> f64 {
        (1.0 - verify_rate * detection).clamp(0.0, 1.0)
    }

    /// Revenue-earning share of low-quality impressions once producers and
    /// verifiers have adjusted to each other, by damped iteration from `start`.
    #[allow(clippy::too_many_arguments)]
    pub fn settle_engagement(
        &self,
        producers: &[ProducerAgent],
        consumers: &[ConsumerAgent],
        platform: &PlatformState<f64>,
        costs: (f64, f64),
        tax: f64,
        extra_l: f64,
        detection: f64,
        boost: f64,
        start: f64,
    ) -> Result<f64> {
        let mut engagement = start.clamp(0.0, 1.0);
        for _ in 0..SETTLE_MAX_ROUNDS {
            let s = expected_supply(producers, platform, &SupplyTerms::new(costs, tax, engagement))?;
            let pollution = pollution_density(s.q_h, s.q_l + extra_l, platform);
            let fp = solve_verification_fixed_point(pollution, consumers, boost, &self.signal, &self.verification)?;
            let next = Self::engagement(fp.verify_rate, detection);
            if (next - engagement).abs() < SETTLE_TOLERANCE {
                return Ok(next);
            }
            engagement = 0.5 * (engagement + next);
        }
        Ok(engagement)
    }

    pub fn assess(
        &self,
        platform: &PlatformState<f64>,
        supply: &Supply,
        fp: &FixedPoint,
        trust: f64,
        detection: f64,
        engagement_l: f64,
    ) -> WelfareBreakdown {
        let (e_h, e_l) = self.exposures(platform, supply.q_h, supply.q_l);
        let platform_profit = self.platform_profit(platform, supply.q_h, supply.q_l, engagement_l);
        let surplus = (supply.profit + platform_profit + supply.tax_revenue) / self.n_consumers;
        welfare(
            &WelfareInputs {
                exposure_h: e_h,
                exposure_l: e_l,
                verify_rate: fp.verify_rate,
                precision: fp.precision,
                detection,
                trust,
                surplus,
                verification_spend: fp.spend,
            },
            &self.welfare,
        )
    }
}

/// Everything the welfare and index evaluation needs once supply is known.
#[derive(Debug, Clone, Copy)]
struct TickInputs {
    supply: Supply,
    engagement_l: f64,
    trust: f64,
    cap_gen: f64,
    cap_det: f64,
}

#[derive(Debug, Clone, Copy)]
struct TickOutcome {
    pollution: f64,
    fp: FixedPoint,
    detection: f64,
    breakdown: WelfareBreakdown,
    dims: [f64; 4],
    i2_clamped: bool,
}

/// A single deterministic simulation run.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: ModelParams,
    econ: Economy,
    policy: PolicyConfig,
    pop: Populations,
    platform: PlatformState<f64>,
    state: MarketState,
    cap_gen: f64,
    cap_det: f64,
    tax: f64,
    anchors: Anchors,
    shocks: Vec<ShockEvent>,
    /// `(last tick, rental multiplier)` of an active cost drop.
    cost_drop: Option<(usize, f64)>,
    /// `(last tick, extra low-quality units)` of an active burst.
    burst: Option<(usize, f64)>,
    /// Revenue-earning share of low-quality impressions, settled each tick.
    engagement_l: f64,
    rng: ChaCha8Rng,
}

impl Simulation {
    /// Build a run; computes the deadweight anchors for this configuration.
    pub fn new(params: &ModelParams, policy: PolicyConfig, pop: Populations, seed: u64, cell: u64) -> Result<Self> {
        let anchors = super::find_anchors(params, &pop, &policy)?;
        Self::with_anchors(params, policy, pop, anchors, seed, cell)
    }

    pub fn with_anchors(
        params: &ModelParams,
        policy: PolicyConfig,
        pop: Populations,
        anchors: Anchors,
        seed: u64,
        cell: u64,
    ) -> Result<Self> {
        policy.validate()?;
        let econ = Economy::new(params)?;
        if pop.producers.len() != params.agents.n_producers || pop.consumers.len() != params.agents.n_consumers {
            return Err(Error::invalid("agents", "population sizes differ from the configuration"));
        }
        let platform = econ.initial_platform(params)?;
        let r = &params.tech_race;
        let detection0 = econ.detection(dim_tech_risk(r.cap_gen0, r.cap_det0, r.mu_tech, r.sigma_tech));
        Ok(Self {
            engagement_l: Economy::engagement(params.signal.start, detection0),
            params: params.clone(),
            policy,
            pop,
            platform,
            state: MarketState {
                trust: params.trust.initial,
                ..MarketState::default()
            },
            cap_gen: params.tech_race.cap_gen0,
            cap_det: params.tech_race.cap_det0,
            tax: policy.tax_l,
            anchors,
            shocks: Vec::new(),
            cost_drop: None,
            burst: None,
            rng: cell_rng(seed, cell),
            econ,
        })
    }

    pub fn with_shocks(mut self, shocks: Vec<ShockEvent>) -> Self {
        self.shocks = shocks;
        self
    }

    pub fn state(&self) -> &MarketState {
        &self.state
    }

    pub fn platform(&self) -> &PlatformState<f64> {
        &self.platform
    }

    pub fn anchors(&self) -> &Anchors {
        &self.anchors
    }

    pub fn tax(&self) -> f64 {
        self.tax
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Freeze the levy at its current value (disables the controller).
    pub fn freeze_tax(&mut self) {
        self.policy.adaptive = None;
    }

    pub fn run(&mut self, ticks: usize) -> Result<Vec<TickRecord>> {
        (0..ticks).map(|_| self.step()).collect()
    }

    fn apply_shocks(&mut self, tick: usize) -> Vec<&'static str> {
        let duration = self.params.shocks.duration;
        let mut events = Vec::new();
        for s in self.shocks.iter().filter(|s| s.tick == tick) {
            match s.kind {
                ShockKind::CostDrop => {
                    self.cost_drop = Some((tick + duration - 1, (1.0 - s.magnitude).max(1e-3)));
                }
                ShockKind::CapabilityJump => self.cap_gen *= 1.0 + s.magnitude,
                ShockKind::FakeNewsBurst => {
                    self.burst = Some((tick + duration - 1, s.magnitude * self.econ.n_producers));
                }
                ShockKind::TrustShock => {
                    self.state.trust = (self.state.trust - s.magnitude).max(0.0);
                }
            }
            events.push(s.kind.name());
        }
        events
    }

    fn tech_risk(&self, cap_gen: f64, cap_det: f64) -> f64 {
        let r = &self.params.tech_race;
        dim_tech_risk(cap_gen, cap_det, r.mu_tech, r.sigma_tech)
    }

    fn evaluate(&self, x: &TickInputs) -> Result<TickOutcome> {
        let pollution = pollution_density(x.supply.q_h, x.supply.q_l, &self.platform);
        let i4 = self.tech_risk(x.cap_gen, x.cap_det);
        let detection = self.econ.detection(i4);
        let fp = solve_verification_fixed_point(
            pollution,
            &self.pop.consumers,
            self.policy.provenance_boost,
            &self.econ.signal,
            &self.econ.verification,
        )?;
        let breakdown = self.econ.assess(&self.platform, &x.supply, &fp, x.trust, detection, x.engagement_l);
        let i2 = dim_deadweight(breakdown.total, self.anchors.w_so, self.anchors.w_min)?;
        let i3 = dim_trust_decay(x.trust, self.econ.trust.t_max);
        Ok(TickOutcome {
            pollution,
            fp,
            detection,
            breakdown,
            dims: [pollution, i2.value, i3, i4],
            i2_clamped: i2.flagged,
        })
    }

    /// Platform objective and trust deficit one tick ahead if the levers
    /// were set to `candidate`, taking this tick's supply as given.
    fn platform_outlook(
        &self,
        candidate: &PlatformState<f64>,
        s: &Supply,
        fp: &FixedPoint,
        detection: f64,
        trust: f64,
        engagement_l: f64,
    ) -> (f64, f64) {
        let profit = self.econ.platform_profit(candidate, s.q_h, s.q_l, engagement_l) / self.econ.n_producers;
        let (e_h, e_l) = self.econ.exposures(candidate, s.q_h, s.q_l);
        let i1 = pollution_density(s.q_h, s.q_l, candidate);
        let next = trust_update(trust, i1, e_h + e_l, &self.econ.trust);
        let alpha = self.policy.fiduciary;
        let objective = if alpha > 0.0 {
            let b = welfare(
                &WelfareInputs {
                    exposure_h: e_h,
                    exposure_l: e_l,
                    verify_rate: fp.verify_rate,
                    precision: fp.precision,
                    detection,
                    ..WelfareInputs::default()
                },
                &self.econ.welfare,
            );
            fiduciary_objective(profit, b.value, b.harm, alpha)
        } else {
            profit
        };
        (objective, trust - next)
    }

    fn platform_gradients(&self, x: &TickInputs, fp: &FixedPoint, detection: f64) -> PlatformGradients<f64> {
        let h = self.params.platform.fd_step;
        let pl = self.platform;
        let mut out = [(0.0, 0.0); 3];
        for (lever, slot) in out.iter_mut().enumerate() {
            let (at, hi) = match lever {
                0 => (pl.gamma_h, pl.gamma_max),
                1 => (pl.gamma_l, pl.gamma_max),
                _ => (pl.moderation, 1.0),
            };
            let (up, down) = ((at + h).min(hi), (at - h).max(0.0));
            let with = |v: f64| {
                let mut c = pl;
                match lever {
                    0 => c.gamma_h = v,
                    1 => c.gamma_l = v,
                    _ => c.moderation = v,
                }
                c
            };
            let (fu, du) = self.platform_outlook(&with(up), &x.supply, fp, detection, x.trust, x.engagement_l);
            let (fd, dd) = self.platform_outlook(&with(down), &x.supply, fp, detection, x.trust, x.engagement_l);
            let span = up - down;
            *slot = ((fu - fd) / span, (du - dd) / span);
        }
        PlatformGradients {
            profit_gamma_h: out[0].0,
            profit_gamma_l: out[1].0,
            profit_mod: out[2].0,
            trust_gamma_h: out[0].1,
            trust_gamma_l: out[1].1,
            trust_mod: out[2].1,
        }
    }

    /// Advance one tick.
    pub fn step(&mut self) -> Result<TickRecord> {
        let tick = self.state.tick + 1;
        let events = self.apply_shocks(tick);

        let mut rental = self.econ.prices.ai_rental();
        if let Some((until, k)) = self.cost_drop {
            if tick <= until {
                rental *= k;
            } else {
                self.cost_drop = None;
            }
        }
        let prices = FactorPrices::new(rental, self.econ.prices.wage())?;
        let costs = unit_costs(&self.econ.tech_h, &self.econ.tech_l, &prices);

        let extra_l = match self.burst {
            Some((until, extra)) if tick <= until => extra,
            Some(_) => {
                self.burst = None;
                0.0
            }
            None => 0.0,
        };
        let detection = self.econ.detection(self.tech_risk(self.cap_gen, self.cap_det));
        self.engagement_l = self.econ.settle_engagement(
            &self.pop.producers,
            &self.pop.consumers,
            &self.platform,
            costs,
            self.tax,
            extra_l,
            detection,
            self.policy.provenance_boost,
            self.engagement_l,
        )?;
        let terms = SupplyTerms::new(costs, self.tax, self.engagement_l);
        let mut supply = match self.params.agents.supply_mode {
            SupplyMode::Expected => expected_supply(&self.pop.producers, &self.platform, &terms)?,
            SupplyMode::Sampled => sampled_supply(&self.pop.producers, &self.platform, &terms, &mut self.rng)?,
        };
        supply.q_l += extra_l;

        let pollution = pollution_density(supply.q_h, supply.q_l, &self.platform);
        let (e_h, e_l) = self.econ.exposures(&self.platform, supply.q_h, supply.q_l);
        let trust = trust_update(self.state.trust, pollution, e_h + e_l, &self.econ.trust);

        let inputs = TickInputs {
            supply,
            engagement_l: self.engagement_l,
            trust,
            cap_gen: self.cap_gen,
            cap_det: self.cap_det,
        };
        let out = self.evaluate(&inputs)?;

        let (weights, weights_fallback) = match self.params.ipi.weight_mode {
            WeightMode::Fixed => (self.params.weights(), false),
            WeightMode::Endogenous => {
                let probe = TickProbe {
                    sim: self,
                    inputs,
                    base: out,
                };
                let ew = endogenous_weights(&probe, self.params.ipi.probe_step);
                (ew.weights, ew.fallback)
            }
        };
        let ipi = composite(&out.dims, &weights)?;

        let grad = self.platform_gradients(&inputs, &out.fp, out.detection);
        let tau = self.tax;
        let levers = self.platform;
        self.platform = platform_update(&self.platform, &grad);

        if let Some(rule) = self.policy.adaptive {
            self.tax = adaptive_tax(self.tax, ipi, rule.target, rule.eta);
        }
        let g = &self.params.tech_race;
        self.cap_det *= 1.0 + g.g_det;
        if rental < self.params.prices.ai_rental_baseline {
            self.cap_gen *= 1.0 + g.g_gen;
        }

        self.state = MarketState {
            tick,
            q_h: supply.q_h,
            q_l: supply.q_l,
            pollution: out.pollution,
            verify_rate: out.fp.verify_rate,
            precision: out.fp.precision,
            trust,
            welfare: out.breakdown.total,
        };
        let v = out.fp.verify_rate;
        Ok(TickRecord {
            tick,
            q_h: supply.q_h,
            q_l: supply.q_l,
            pollution: out.pollution,
            verify_rate: v,
            precision: out.fp.precision,
            trust,
            welfare: out.breakdown.total,
            dims: out.dims,
            weights,
            ipi,
            tau,
            gamma_h: levers.gamma_h,
            gamma_l: levers.gamma_l,
            m: levers.moderation,
            event: events.join("+"),
            i2_clamped: out.i2_clamped,
            weights_fallback,
            undetected_share: (1.0 - v) * (1.0 - out.fp.precision) + v * (1.0 - out.detection),
            ai_rental: rental,
            cap_gen: inputs.cap_gen,
            cap_det: inputs.cap_det,
            breakdown: out.breakdown,
        })
    }
}

/// Re-evaluates one tick with a single index driver moved.
struct TickProbe<'a> {
    sim: &'a Simulation,
    inputs: TickInputs,
    base: TickOutcome,
}

impl WelfareProbe<f64> for TickProbe<'_> {
    fn base(&self) -> (f64, [f64; 4]) {
        (self.base.breakdown.total, self.base.dims)
    }

    fn nudge(&self, dim: Dimension, h: f64) -> (f64, f64) {
        let mut x = self.inputs;
        let t_max = self.sim.econ.trust.t_max;
        match dim {
            Dimension::Pollution => x.supply.q_l += h * self.sim.econ.n_producers,
            Dimension::Deadweight => {
                let w = self.base.breakdown.total + h;
                let a = &self.sim.anchors;
                let i2 = dim_deadweight(w, a.w_so, a.w_min).map(|f| f.value).unwrap_or(f64::NAN);
                return (w, i2);
            }
            Dimension::TrustDecay => {
                x.trust = if x.trust + h <= t_max { x.trust + h } else { x.trust - h };
            }
            Dimension::TechRisk => x.cap_gen *= h.exp(),
        }
        match self.sim.evaluate(&x) {
            Ok(o) => (o.breakdown.total, o.dims[dim.index()]),
            Err(_) => (f64::NAN, f64::NAN),
        }
    }
}
