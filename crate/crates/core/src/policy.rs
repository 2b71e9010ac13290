//! Policy instruments: Pigouvian levy, fiduciary blending, provenance,
//! the IPI-driven tax controller, scenario presets and max-min selection.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Baseline,
    Pigouvian,
    Subsidy,
    Joint,
    Tech,
    Efficiency,
    FirstBest,
}

impl Scenario {
    /// The six presets of the policy comparison, in report order.
    pub const COMPARISON: [Scenario; 6] = [
        Scenario::Baseline,
        Scenario::Pigouvian,
        Scenario::Subsidy,
        Scenario::Joint,
        Scenario::Tech,
        Scenario::Efficiency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Baseline => "baseline",
            Scenario::Pigouvian => "pigouvian",
            Scenario::Subsidy => "subsidy",
            Scenario::Joint => "joint",
            Scenario::Tech => "tech",
            Scenario::Efficiency => "efficiency",
            Scenario::FirstBest => "first_best",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "baseline" => Scenario::Baseline,
            "pigouvian" => Scenario::Pigouvian,
            "subsidy" => Scenario::Subsidy,
            "joint" => Scenario::Joint,
            "tech" => Scenario::Tech,
            "efficiency" => Scenario::Efficiency,
            "first_best" | "first-best" => Scenario::FirstBest,
            other => return Err(Error::Config(format!("unknown scenario `{other}`"))),
        })
    }
}

/// How the Pigouvian scenario implements the levy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaxMode {
    /// Raise the platform revenue share θ.
    RevenueShare,
    /// Per-unit levy τ_L on low-quality output.
    Levy,
}

impl FromStr for TaxMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "theta" | "revenue_share" => Ok(TaxMode::RevenueShare),
            "levy" => Ok(TaxMode::Levy),
            other => Err(Error::Config(format!("unknown tax mode `{other}`"))),
        }
    }
}

impl fmt::Display for TaxMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaxMode::RevenueShare => "theta",
            TaxMode::Levy => "levy",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveRule {
    pub eta: f64,
    pub target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub tax_l: f64,
    pub fiduciary: f64,
    pub provenance_boost: f64,
    pub adaptive: Option<AdaptiveRule>,
    pub scenario: Scenario,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            tax_l: 0.0,
            fiduciary: 0.0,
            provenance_boost: 0.0,
            adaptive: None,
            scenario: Scenario::Baseline,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tax_l >= 0.0) || !self.tax_l.is_finite() {
            return Err(Error::invalid("policy.tax_l", "must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.fiduciary) {
            return Err(Error::invalid("policy.fiduciary", "must lie in [0,1]"));
        }
        if !(self.provenance_boost >= 0.0) {
            return Err(Error::invalid("policy.provenance_boost", "must be nonnegative"));
        }
        if let Some(rule) = self.adaptive {
            if !(rule.eta > 0.0) {
                return Err(Error::invalid("policy.adaptive_eta", "must be positive"));
            }
            if !(rule.target > 0.0 && rule.target < 1.0) {
                return Err(Error::invalid("policy.ipi_target", "must lie in (0,1)"));
            }
        }
        Ok(())
    }
}

/// Marginal social damage of one more low-quality unit:
/// `d'(1-m) + λ |∂T/∂Q_L|`.
pub fn pigouvian_tax<T: Scalar>(marginal_harm: T, moderation: T, trust_price: T, trust_sensitivity: T) -> T {
    let direct = marginal_harm * (T::one() - moderation);
    (direct + trust_price * trust_sensitivity.abs()).max(T::zero())
}

/// Platform objective under a fiduciary duty of weight α.
pub fn fiduciary_objective<T: Scalar>(platform_profit: T, value_h: T, harm_l: T, alpha: T) -> T {
    (T::one() - alpha) * platform_profit + alpha * (value_h - harm_l)
}

/// State-contingent levy update, floored at zero.
pub fn adaptive_tax<T: Scalar>(tax_prev: T, ipi_prev: T, target: T, eta: T) -> T {
    (tax_prev + eta * (ipi_prev - target) / target).max(T::zero())
}

/// Magnitudes behind the scenario presets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMagnitudes {
    pub pigouvian_theta: f64,
    pub pigouvian_levy: f64,
    pub tax_mode: TaxMode,
    pub subsidy_k_max: f64,
    pub tech_g_det: f64,
    pub efficiency_prod_h: f64,
    pub first_best_tax: f64,
    pub first_best_boost: f64,
}

/// A named parameter override, applied through the parameter registry.
pub type Override = (&'static str, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSetup {
    pub policy: PolicyConfig,
    pub overrides: Vec<Override>,
}

pub fn scenario_config(scenario: Scenario, mag: &ScenarioMagnitudes) -> ScenarioSetup {
    let mut policy = PolicyConfig {
        scenario,
        ..PolicyConfig::default()
    };
    let mut overrides: Vec<Override> = Vec::new();
    let pigouvian = |policy: &mut PolicyConfig, overrides: &mut Vec<Override>| match mag.tax_mode {
        TaxMode::RevenueShare => overrides.push(("platform.theta", mag.pigouvian_theta)),
        TaxMode::Levy => policy.tax_l = mag.pigouvian_levy,
    };
    match scenario {
        Scenario::Baseline => {}
        Scenario::Pigouvian => pigouvian(&mut policy, &mut overrides),
        Scenario::Subsidy => overrides.push(("agents.k_max", mag.subsidy_k_max)),
        Scenario::Joint => {
            pigouvian(&mut policy, &mut overrides);
            overrides.push(("agents.k_max", mag.subsidy_k_max));
        }
        Scenario::Tech => overrides.push(("tech_race.g_det", mag.tech_g_det)),
        Scenario::Efficiency => overrides.push(("agents.prod_h_mean", mag.efficiency_prod_h)),
        Scenario::FirstBest => {
            policy.tax_l = mag.first_best_tax;
            policy.provenance_boost = mag.first_best_boost;
            policy.fiduciary = 1.0;
        }
    }
    ScenarioSetup { policy, overrides }
}

/// Final-window outcome of one (policy, world) cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub welfare: f64,
    pub ipi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustRow {
    pub policy_index: usize,
    pub outcomes: Vec<Option<CellOutcome>>,
    pub worst_welfare: Option<f64>,
    /// Mean IPI over worlds, used for tie-breaking.
    pub mean_ipi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustSelection {
    pub chosen: usize,
    pub rows: Vec<RobustRow>,
}

/// Max-min selection over a finite set of worlds.
///
/// Cells are evaluated in parallel on `pool` (or the global pool); the result
/// does not depend on scheduling. A policy with any failed cell is
/// disqualified. Ties on worst-case welfare go to the lower mean IPI, then to
/// list order.
pub fn robust_select<P, W, F>(policies: &[P], worlds: &[W], evaluate: F) -> Result<RobustSelection>
where
    P: Sync,
    W: Sync,
    F: Fn(&P, &W) -> Result<CellOutcome> + Sync,
{
    if policies.is_empty() || worlds.is_empty() {
        return Err(Error::Config("robust selection needs at least one policy and one world".into()));
    }
    let cells: Vec<(usize, usize)> = (0..policies.len())
        .flat_map(|p| (0..worlds.len()).map(move |w| (p, w)))
        .collect();
    let results: Vec<Result<CellOutcome>> = cells
        .par_iter()
        .map(|&(p, w)| evaluate(&policies[p], &worlds[w]))
        .collect();

    let mut rows: Vec<RobustRow> = (0..policies.len())
        .map(|policy_index| RobustRow {
            policy_index,
            outcomes: vec![None; worlds.len()],
            worst_welfare: None,
            mean_ipi: None,
        })
        .collect();
    let mut last_err = None;
    for (&(p, w), res) in cells.iter().zip(results) {
        match res {
            Ok(o) => rows[p].outcomes[w] = Some(o),
            Err(e) => last_err = Some(e.in_cell(format!("policy {p}, world {w}"))),
        }
    }
    for row in &mut rows {
        if row.outcomes.iter().all(Option::is_some) {
            let vals: Vec<CellOutcome> = row.outcomes.iter().flatten().copied().collect();
            row.worst_welfare = Some(vals.iter().map(|o| o.welfare).fold(f64::INFINITY, f64::min));
            row.mean_ipi = Some(vals.iter().map(|o| o.ipi).sum::<f64>() / vals.len() as f64);
        }
    }

    let mut best: Option<&RobustRow> = None;
    for row in &rows {
        let (Some(w), Some(i)) = (row.worst_welfare, row.mean_ipi) else {
            continue;
        };
        best = match best {
            None => Some(row),
            Some(b) => {
                let (bw, bi) = (b.worst_welfare.unwrap(), b.mean_ipi.unwrap());
                if w > bw || (w == bw && i < bi) {
                    Some(row)
                } else {
                    Some(b)
                }
            }
        };
    }
    match best {
        Some(b) => Ok(RobustSelection {
            chosen: b.policy_index,
            rows,
        }),
        None => Err(last_err.unwrap_or_else(|| Error::Config("no policy completed every world".into()))),
    }
}
