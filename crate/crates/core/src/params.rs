//! Model parameters with dotted keys (`section.field`), defaults, and
//! string round-tripping for config files and CLI flags.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{AdaptiveRule, PolicyConfig, Scenario, ScenarioMagnitudes, TaxMode};

/// How producer choices aggregate into supply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupplyMode {
    /// Choice probabilities summed (expected counts).
    Expected,
    /// One Bernoulli draw per producer from the run's stream.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    Fixed,
    Endogenous,
}

/// Conversion between a parameter value and its text form.
pub trait ParamValue: Sized {
    fn parse_param(key: &str, raw: &str) -> Result<Self>;
    fn format_param(&self) -> String;
}

fn bad(key: &str, raw: &str, what: &str) -> Error {
    Error::Config(format!("`{key}`: cannot parse `{raw}` as {what}"))
}

impl ParamValue for f64 {
    fn parse_param(key: &str, raw: &str) -> Result<Self> {
        let v: f64 = raw.trim().parse().map_err(|_| bad(key, raw, "a number"))?;
        if !v.is_finite() {
            return Err(bad(key, raw, "a finite number"));
        }
        Ok(v)
    }
    fn format_param(&self) -> String {
        format!("{self:?}")
    }
}

impl ParamValue for usize {
    fn parse_param(key: &str, raw: &str) -> Result<Self> {
        let t = raw.trim();
        if let Ok(v) = t.parse() {
            return Ok(v);
        }
        // accept integral floats such as `150.0` from numeric overrides
        match t.parse::<f64>() {
            Ok(f) if f >= 0.0 && f.fract() == 0.0 && f < 1e15 => Ok(f as usize),
            _ => Err(bad(key, raw, "a nonnegative integer")),
        }
    }
    fn format_param(&self) -> String {
        self.to_string()
    }
}

impl ParamValue for u64 {
    fn parse_param(key: &str, raw: &str) -> Result<Self> {
        usize::parse_param(key, raw).map(|v| v as u64)
    }
    fn format_param(&self) -> String {
        self.to_string()
    }
}

impl ParamValue for bool {
    fn parse_param(key: &str, raw: &str) -> Result<Self> {
        match raw.trim() {
            "true" | "1" | "yes" | "on" => Ok(true),
            "false" | "0" | "no" | "off" => Ok(false),
            _ => Err(bad(key, raw, "a boolean")),
        }
    }
    fn format_param(&self) -> String {
        self.to_string()
    }
}

macro_rules! text_enum {
    ($ty:ty { $($variant:path => $text:literal),* $(,)? }) => {
        impl ParamValue for $ty {
            fn parse_param(key: &str, raw: &str) -> Result<Self> {
                match raw.trim() {
                    $($text => Ok($variant),)*
                    _ => Err(bad(key, raw, concat!("one of:", $(" ", $text),*))),
                }
            }
            fn format_param(&self) -> String {
                match self {
                    $($variant => $text.to_string(),)*
                }
            }
        }
    };
}

text_enum!(SupplyMode { SupplyMode::Expected => "expected", SupplyMode::Sampled => "sampled" });
text_enum!(WeightMode { WeightMode::Fixed => "fixed", WeightMode::Endogenous => "endogenous" });
text_enum!(TaxMode { TaxMode::RevenueShare => "theta", TaxMode::Levy => "levy" });

impl FromStr for SupplyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse_param("agents.supply_mode", s)
    }
}

impl FromStr for WeightMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse_param("ipi.weight_mode", s)
    }
}

macro_rules! params {
    ($(
        $(#[$smeta:meta])*
        $section:ident : $sty:ident {
            $( $(#[$fmeta:meta])* $field:ident : $fty:ty = $default:expr ),* $(,)?
        }
    ),* $(,)?) => {
        $(
            $(#[$smeta])*
            #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
            pub struct $sty {
                $( $(#[$fmeta])* pub $field: $fty, )*
            }

            impl Default for $sty {
                fn default() -> Self {
                    Self { $( $field: $default, )* }
                }
            }
        )*

        #[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
        pub struct ModelParams {
            $( pub $section: $sty, )*
        }

        impl ModelParams {
            /// Every recognized key, in declaration order.
            pub const KEYS: &'static [&'static str] = &[
                $( $( concat!(stringify!($section), ".", stringify!($field)), )* )*
            ];

            pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
                $( $(
                    if key == concat!(stringify!($section), ".", stringify!($field)) {
                        self.$section.$field = ParamValue::parse_param(key, raw)?;
                        return Ok(());
                    }
                )* )*
                Err(Error::Config(format!("unknown key `{key}`")))
            }

            pub fn get(&self, key: &str) -> Option<String> {
                $( $(
                    if key == concat!(stringify!($section), ".", stringify!($field)) {
                        return Some(self.$section.$field.format_param());
                    }
                )* )*
                None
            }

            /// `(key, value)` pairs with all defaults expanded.
            pub fn entries(&self) -> Vec<(&'static str, String)> {
                vec![ $( $(
                    (concat!(stringify!($section), ".", stringify!($field)), self.$section.$field.format_param()),
                )* )* ]
            }
        }
    };
}

params! {
    tech: TechParams {
        sigma_h: f64 = 0.75,
        sigma_l: f64 = 1.5,
        share_h: f64 = 0.35,
        share_l: f64 = 0.65,
        tfp_h: f64 = 1.0,
        tfp_l: f64 = 1.0,
    },
    prices: PriceParams {
        ai_rental: f64 = 1.0,
        wage: f64 = 8.0,
        /// Rental rate below which generation capability accumulates.
        ai_rental_baseline: f64 = 1.0,
    },
    platform: PlatformParams {
        theta: f64 = 0.25,
        ad_rate: f64 = 4.0,
        gamma_max: f64 = 2.0,
        gamma_h0: f64 = 1.0,
        gamma_l0: f64 = 1.0,
        moderation0: f64 = 0.3,
        lr_gamma: f64 = 0.3,
        lr_mod: f64 = 0.3,
        /// Weight on the trust deficit in the platform's objective.
        trust_price: f64 = 40.0,
        /// Moderation cost per content unit at full moderation.
        moderation_cost: f64 = 1.0,
        /// Quadratic cost of amplification per content unit.
        amplification_cost: f64 = 0.2,
        fd_step: f64 = 1e-3,
    },
    agents: AgentParams {
        n_producers: usize = 80,
        n_consumers: usize = 200,
        rationality: f64 = 1.0,
        prod_h_mean: f64 = 1.0,
        prod_l_mean: f64 = 1.2,
        prod_log_sd: f64 = 0.5,
        k_max: f64 = 4.0,
        /// Gain from verifying a high-quality item.
        du_high: f64 = 0.5,
        /// Gain from verifying a low-quality item, for a consumer of mean risk aversion.
        du_low: f64 = 2.0,
        supply_mode: SupplyMode = SupplyMode::Expected,
    },
    signal: SignalConfig {
        pi_base: f64 = 0.85,
        kappa_pollution: f64 = 0.3,
        kappa_verify: f64 = 0.1,
        /// Width of the smoothed verification cutoff.
        ramp: f64 = 0.01,
        damping: f64 = 0.5,
        start: f64 = 0.5,
        tolerance: f64 = 1e-8,
        max_iter: usize = 10_000,
    },
    trust: TrustConfig {
        decay: f64 = 0.05,
        pollution_hit: f64 = 0.005,
        repair_gain: f64 = 2.5,
        repair_flow: f64 = 0.01,
        t_max: f64 = 1.0,
        initial: f64 = 0.5,
    },
    welfare: WelfareConfig {
        v1: f64 = 1.0,
        h1: f64 = 0.8,
        h2: f64 = 0.1,
        lambda_trust: f64 = 10.0,
        /// Consumption units per unit of per-slot exposure.
        feed_scale: f64 = 10.0,
        /// Share of verification failures per unit of tech risk.
        evasion: f64 = 0.5,
    },
    tech_race: TechRaceParams {
        g_gen: f64 = 0.02,
        g_det: f64 = 0.01,
        mu_tech: f64 = 0.0,
        sigma_tech: f64 = 1.0,
        cap_gen0: f64 = 1.0,
        cap_det0: f64 = 1.0,
    },
    ipi: IpiConfig {
        w1: f64 = 0.35,
        w2: f64 = 0.25,
        w3: f64 = 0.25,
        w4: f64 = 0.15,
        weight_mode: WeightMode = WeightMode::Fixed,
        probe_step: f64 = 1e-3,
        lattice_mod: usize = 9,
        lattice_gamma: usize = 5,
        lattice_tax: usize = 5,
        tax_max: f64 = 2.0,
    },
    policy: PolicyParams {
        tax_l: f64 = 0.0,
        fiduciary: f64 = 0.0,
        provenance_boost: f64 = 0.0,
        adaptive: bool = false,
        adaptive_eta: f64 = 0.05,
        ipi_target: f64 = 0.5,
    },
    scenario: ScenarioParams {
        pigouvian_theta: f64 = 0.40,
        pigouvian_levy: f64 = 0.5,
        tax_mode: TaxMode = TaxMode::RevenueShare,
        subsidy_k_max: f64 = 2.0,
        tech_g_det: f64 = 0.03,
        efficiency_prod_h: f64 = 1.2,
        first_best_boost: f64 = 0.05,
    },
    shocks: ShockParams {
        duration: usize = 5,
        cost_drop_tick: usize = 40,
        cost_drop: f64 = 0.5,
        capability_tick: usize = 70,
        capability_jump: f64 = 2.0,
        fake_news_tick: usize = 100,
        fake_news: f64 = 0.75,
        trust_tick: usize = 130,
        trust_shock: f64 = 0.3,
    },
    proxy: ProxyParams {
        items_per_type: usize = 20,
        impressions_per_unit: f64 = 100.0,
        feedback_rate: f64 = 0.05,
        churn_base: f64 = 0.10,
        churn_low: f64 = 0.05,
        acc_base: f64 = 0.95,
    },
}

impl ModelParams {
    pub fn set_f64(&mut self, key: &str, value: f64) -> Result<()> {
        self.set(key, &format!("{value:?}"))
    }

    pub fn weights(&self) -> [f64; 4] {
        [self.ipi.w1, self.ipi.w2, self.ipi.w3, self.ipi.w4]
    }

    pub fn set_weights(&mut self, w: [f64; 4]) {
        [self.ipi.w1, self.ipi.w2, self.ipi.w3, self.ipi.w4] = w;
    }

    pub fn policy_config(&self) -> PolicyConfig {
        PolicyConfig {
            tax_l: self.policy.tax_l,
            fiduciary: self.policy.fiduciary,
            provenance_boost: self.policy.provenance_boost,
            adaptive: self.policy.adaptive.then_some(AdaptiveRule {
                eta: self.policy.adaptive_eta,
                target: self.policy.ipi_target,
            }),
            scenario: Scenario::Baseline,
        }
    }

    pub fn magnitudes(&self, first_best_tax: f64) -> ScenarioMagnitudes {
        let s = &self.scenario;
        ScenarioMagnitudes {
            pigouvian_theta: s.pigouvian_theta,
            pigouvian_levy: s.pigouvian_levy,
            tax_mode: s.tax_mode,
            subsidy_k_max: s.subsidy_k_max,
            tech_g_det: s.tech_g_det,
            efficiency_prod_h: s.efficiency_prod_h,
            first_best_tax,
            first_best_boost: s.first_best_boost,
        }
    }

    /// Range checks that individual constructors do not cover.
    pub fn validate(&self) -> Result<()> {
        let a = &self.agents;
        if a.n_producers == 0 || a.n_consumers == 0 {
            return Err(Error::invalid("agents.n_producers", "populations must be nonempty"));
        }
        if !(a.rationality >= 0.0) || !(a.prod_h_mean > 0.0) || !(a.prod_l_mean > 0.0) || !(a.prod_log_sd >= 0.0) {
            return Err(Error::invalid("agents", "rationality, productivity means and spread out of range"));
        }
        if !(a.du_high >= 0.0 && a.du_low >= 0.0) {
            return Err(Error::invalid("agents.du_low", "utility gains must be nonnegative"));
        }
        let s = &self.signal;
        if !(0.5..=1.0).contains(&s.pi_base) || s.kappa_pollution < 0.0 || s.kappa_verify < 0.0 {
            return Err(Error::invalid("signal", "pi_base in [0.5,1], slopes nonnegative"));
        }
        if !(s.ramp > 0.0) || !(s.damping > 0.0 && s.damping <= 1.0) || !(0.0..=1.0).contains(&s.start) {
            return Err(Error::invalid("signal", "ramp positive, damping in (0,1], start in [0,1]"));
        }
        let t = &self.trust;
        if !(t.decay > 0.0 && t.decay < 1.0) || !(t.t_max > 0.0) || t.pollution_hit < 0.0 || t.repair_gain < 0.0 {
            return Err(Error::invalid("trust", "decay in (0,1), t_max positive, gains nonnegative"));
        }
        if !(0.0..=t.t_max).contains(&t.initial) {
            return Err(Error::invalid("trust.initial", "must lie in [0, t_max]"));
        }
        let r = &self.tech_race;
        if !(r.cap_gen0 > 0.0 && r.cap_det0 > 0.0 && r.sigma_tech > 0.0) {
            return Err(Error::invalid("tech_race", "capabilities and sigma_tech must be positive"));
        }
        if !(0.0..=1.0).contains(&self.welfare.evasion) {
            return Err(Error::invalid("welfare.evasion", "must lie in [0,1]"));
        }
        crate::ipi::check_weights(&self.weights())?;
        if self.ipi.lattice_mod < 2 || self.ipi.lattice_gamma < 2 || self.ipi.lattice_tax < 1 {
            return Err(Error::invalid("ipi.lattice_mod", "lattice needs at least two points per lever"));
        }
        if self.shocks.duration == 0 {
            return Err(Error::invalid("shocks.duration", "must be positive"));
        }
        self.policy_config().validate()
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
