use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{producer_choice_prob, unit_profit, ContentType, PlatformState, ProducerAgent};
use crate::econ::{unit_cost, CesTechnology, FactorPrices};
use crate::error::Result;

/// Aggregate supply and producer-side accounting for one tick.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Supply {
    pub q_h: f64,
    pub q_l: f64,
    /// Total producer profit, net of the levy.
    pub profit: f64,
    pub tax_revenue: f64,
}

/// Conditions producers face when choosing what to make.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupplyTerms {
    /// Unit costs `(high, low)` at unit productivity.
    pub costs: (f64, f64),
    /// Per-unit levy on low-quality output.
    pub tax: f64,
    /// Share of low-quality impressions that still earn ad revenue, i.e.
    /// are not flagged by verifying consumers.
    pub engagement_l: f64,
}

impl SupplyTerms {
    pub fn new(costs: (f64, f64), tax: f64, engagement_l: f64) -> Self {
        Self {
            costs,
            tax,
            engagement_l: engagement_l.clamp(0.0, 1.0),
        }
    }
}

/// Unit costs of high- and low-quality content at unit productivity.
pub fn unit_costs(
    tech_h: &CesTechnology<f64>,
    tech_l: &CesTechnology<f64>,
    prices: &FactorPrices<f64>,
) -> (f64, f64) {
    (unit_cost(tech_h, prices), unit_cost(tech_l, prices))
}

fn mean_productivity(producers: &[ProducerAgent]) -> (f64, f64) {
    let n = producers.len().max(1) as f64;
    let (h, l) = producers
        .iter()
        .fold((0.0, 0.0), |(h, l), p| (h + p.prod_h, l + p.prod_l));
    (h / n, l / n)
}

/// Per-unit profits of one producer and its probability of choosing high quality.
struct Margins {
    profit_h: f64,
    profit_l: f64,
    prob_h: f64,
}

/// Producers compare profit per unit of outlay.
fn margins(p: &ProducerAgent, platform: &PlatformState<f64>, terms: &SupplyTerms) -> Result<Margins> {
    let cost_h = terms.costs.0 / p.prod_h;
    let cost_l = terms.costs.1 / p.prod_l;
    let seen = PlatformState {
        gamma_l: platform.gamma_l * terms.engagement_l,
        ..*platform
    };
    let profit_h = unit_profit(ContentType::High, &seen, cost_h, 0.0)?;
    let profit_l = unit_profit(ContentType::Low, &seen, cost_l, terms.tax)?;
    let prob_h = producer_choice_prob(profit_h / cost_h, profit_l / cost_l, p.rationality);
    Ok(Margins {
        profit_h,
        profit_l,
        prob_h,
    })
}

/// Expected supply: each producer contributes its choice probabilities,
/// scaled by productivity relative to the population mean.
pub fn expected_supply(
    producers: &[ProducerAgent],
    platform: &PlatformState<f64>,
    terms: &SupplyTerms,
) -> Result<Supply> {
    let (mh, ml) = mean_productivity(producers);
    let mut s = Supply::default();
    for p in producers {
        let m = margins(p, platform, terms)?;
        let (uh, ul) = (p.prod_h / mh, p.prod_l / ml);
        let (wh, wl) = (m.prob_h * uh, (1.0 - m.prob_h) * ul);
        s.q_h += wh;
        s.q_l += wl;
        s.profit += wh * m.profit_h + wl * m.profit_l;
        s.tax_revenue += wl * terms.tax;
    }
    Ok(s)
}

/// Realized supply with one draw per producer.
pub fn sampled_supply<R: Rng + ?Sized>(
    producers: &[ProducerAgent],
    platform: &PlatformState<f64>,
    terms: &SupplyTerms,
    rng: &mut R,
) -> Result<Supply> {
    let (mh, ml) = mean_productivity(producers);
    let mut s = Supply::default();
    for p in producers {
        let m = margins(p, platform, terms)?;
        if rng.random::<f64>() < m.prob_h {
            let u = p.prod_h / mh;
            s.q_h += u;
            s.profit += u * m.profit_h;
        } else {
            let u = p.prod_l / ml;
            s.q_l += u;
            s.profit += u * m.profit_l;
            s.tax_revenue += u * terms.tax;
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn producers(n: usize) -> Vec<ProducerAgent> {
        (0..n)
            .map(|id| ProducerAgent {
                id,
                prod_h: 1.0 + 0.1 * id as f64,
                prod_l: 1.0,
                rationality: 1.0,
            })
            .collect()
    }

    #[test]
    fn expected_supply_conserves_units_with_equal_productivity() {
        let ps: Vec<_> = (0..10)
            .map(|id| ProducerAgent { id, prod_h: 1.0, prod_l: 1.0, rationality: 2.0 })
            .collect();
        let pl = PlatformState::new(1.0, 1.0, 0.0, 0.25, 4.0, 0.0, 0.0, 0.0, 2.0).unwrap();
        let s = expected_supply(&ps, &pl, &SupplyTerms::new((7.8, 2.8), 0.0, 1.0)).unwrap();
        assert!((s.q_h + s.q_l - 10.0).abs() < 1e-12);
        assert!(s.q_l > s.q_h);
    }

    #[test]
    fn levy_shifts_supply_toward_high_quality() {
        let ps = producers(20);
        let pl = PlatformState::new(1.0, 1.0, 0.0, 0.25, 4.0, 0.0, 0.0, 0.0, 2.0).unwrap();
        let a = expected_supply(&ps, &pl, &SupplyTerms::new((7.8, 2.8), 0.0, 1.0)).unwrap();
        let b = expected_supply(&ps, &pl, &SupplyTerms::new((7.8, 2.8), 1.0, 1.0)).unwrap();
        assert!(b.q_l < a.q_l);
        assert!(b.tax_revenue > 0.0);
    }

    #[test]
    fn flagged_impressions_shift_supply_toward_high_quality() {
        let ps = producers(20);
        let pl = PlatformState::new(1.0, 1.0, 0.0, 0.25, 4.0, 0.0, 0.0, 0.0, 2.0).unwrap();
        let a = expected_supply(&ps, &pl, &SupplyTerms::new((7.8, 2.8), 0.0, 1.0)).unwrap();
        let b = expected_supply(&ps, &pl, &SupplyTerms::new((7.8, 2.8), 0.0, 0.6)).unwrap();
        assert!(b.q_l < a.q_l);
    }

    #[test]
    fn sampled_supply_is_integral_with_unit_productivity() {
        use rand::SeedableRng;
        let ps: Vec<_> = (0..10)
            .map(|id| ProducerAgent { id, prod_h: 1.0, prod_l: 1.0, rationality: 1.0 })
            .collect();
        let pl = PlatformState::new(1.0, 1.0, 0.0, 0.25, 4.0, 0.0, 0.0, 0.0, 2.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let s = sampled_supply(&ps, &pl, &SupplyTerms::new((7.8, 2.8), 0.0, 1.0), &mut rng).unwrap();
        assert_eq!(s.q_h + s.q_l, 10.0);
        assert_eq!(s.q_h.fract(), 0.0);
    }
}
