use serde::{Deserialize, Serialize};

use super::sim::{Economy, Populations};
use super::supply::{expected_supply, unit_costs, SupplyTerms};
use super::{pollution_density, solve_verification_fixed_point};
use crate::agents::PlatformState;
use crate::error::{Error, Result};
use crate::ipi::dim_tech_risk;
use crate::params::ModelParams;
use crate::policy::PolicyConfig;

/// Planner optimum and worst-case welfare for the deadweight dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchors {
    pub w_so: f64,
    pub w_min: f64,
    /// Levers `(m, γ_H, γ_L, τ)` attaining `w_so` on the lattice.
    pub best_levers: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticOutcome {
    pub welfare: f64,
    pub pollution: f64,
    pub verify_rate: f64,
    pub trust: f64,
    pub q_l: f64,
}

/// Welfare at a fixed lever setting once producers, verification and trust
/// have settled, with capabilities at their initial levels.
pub(crate) fn evaluate_levers(
    econ: &Economy,
    p: &ModelParams,
    pop: &Populations,
    platform: &PlatformState<f64>,
    tax: f64,
    boost: f64,
) -> Result<StaticOutcome> {
    let costs = unit_costs(&econ.tech_h, &econ.tech_l, &econ.prices);
    let r = &p.tech_race;
    let detection = econ.detection(dim_tech_risk(r.cap_gen0, r.cap_det0, r.mu_tech, r.sigma_tech));
    let start = Economy::engagement(p.signal.start, detection);
    let engagement = econ.settle_engagement(&pop.producers, &pop.consumers, platform, costs, tax, 0.0, detection, boost, start)?;
    let supply = expected_supply(&pop.producers, platform, &SupplyTerms::new(costs, tax, engagement))?;
    let pollution = pollution_density(supply.q_h, supply.q_l, platform);
    let fp = solve_verification_fixed_point(pollution, &pop.consumers, boost, &econ.signal, &econ.verification)?;
    let (_, e_l) = econ.exposures(platform, supply.q_h, supply.q_l);
    let trust = econ.trust.steady_state(e_l);
    let w = econ.assess(platform, &supply, &fp, trust, detection, engagement);
    Ok(StaticOutcome {
        welfare: w.total,
        pollution,
        verify_rate: fp.verify_rate,
        trust,
        q_l: supply.q_l,
    })
}

pub fn evaluate_static(
    p: &ModelParams,
    pop: &Populations,
    levers: [f64; 4],
    policy: &PolicyConfig,
) -> Result<StaticOutcome> {
    let econ = Economy::new(p)?;
    let mut pl = econ.initial_platform(p)?;
    [pl.moderation, pl.gamma_h, pl.gamma_l] = [levers[0], levers[1], levers[2]];
    if !pl.is_admissible() {
        return Err(Error::invalid("levers", "outside the admissible platform set"));
    }
    evaluate_levers(&econ, p, pop, &pl, levers[3], policy.provenance_boost)
}

fn grid(n: usize, hi: f64) -> impl Iterator<Item = f64> + Clone {
    let n = n.max(1);
    (0..n).map(move |i| if n == 1 { 0.0 } else { hi * i as f64 / (n - 1) as f64 })
}

/// Lattice search for the planner optimum; the worst anchor is the
/// unmoderated corner that amplifies only low-quality content.
pub fn find_anchors(p: &ModelParams, pop: &Populations, policy: &PolicyConfig) -> Result<Anchors> {
    let econ = Economy::new(p)?;
    let base = econ.initial_platform(p)?;
    let g = base.gamma_max;
    let boost = policy.provenance_boost;
    let ip = &p.ipi;

    let mut best = (f64::NEG_INFINITY, [0.0; 4]);
    for m in grid(ip.lattice_mod, 1.0) {
        for gh in grid(ip.lattice_gamma, g) {
            for gl in grid(ip.lattice_gamma, g) {
                for tax in grid(ip.lattice_tax, ip.tax_max) {
                    let pl = PlatformState { moderation: m, gamma_h: gh, gamma_l: gl, ..base };
                    let w = evaluate_levers(&econ, p, pop, &pl, tax, boost)?.welfare;
                    if w > best.0 {
                        best = (w, [m, gh, gl, tax]);
                    }
                }
            }
        }
    }
    let worst = PlatformState { moderation: 0.0, gamma_h: 0.0, gamma_l: g, ..base };
    let w_min = evaluate_levers(&econ, p, pop, &worst, 0.0, boost)?.welfare;
    if !(best.0 > w_min) {
        return Err(Error::DegenerateAnchors { w_so: best.0, w_min });
    }
    Ok(Anchors {
        w_so: best.0,
        w_min,
        best_levers: best.1,
    })
}
