//! Two-input CES technology: factor demand, unit cost and AI cost shares.
//!
//! Output of content type `j` is `A [δ K^ρ + (1-δ) L^ρ]^(1/ρ)` with AI capital
//! `K` rented at `r` and skilled labor `L` paid `w`. Everything here is a pure
//! function of value types; parameters are checked once at construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Below this distance from 1 the elasticity is treated as Cobb–Douglas.
pub const COBB_DOUGLAS_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CesTechnology<T> {
    tfp: T,
    share: T,
    elasticity: T,
}

impl<T: Scalar> CesTechnology<T> {
    pub fn new(tfp: T, share: T, elasticity: T) -> Result<Self> {
        if !(tfp > T::zero()) || !tfp.is_finite() {
            return Err(Error::invalid("tfp", format!("must be positive, got {tfp}")));
        }
        if !(share > T::zero() && share < T::one()) {
            return Err(Error::invalid("share", format!("must lie in (0,1), got {share}")));
        }
        if !(elasticity > T::zero()) || !elasticity.is_finite() {
            return Err(Error::invalid(
                "elasticity",
                format!("must be positive, got {elasticity}"),
            ));
        }
        Ok(Self {
            tfp,
            share,
            elasticity,
        })
    }

    pub fn tfp(&self) -> T {
        self.tfp
    }

    pub fn share(&self) -> T {
        self.share
    }

    pub fn elasticity(&self) -> T {
        self.elasticity
    }

    /// Substitution parameter `ρ = (σ-1)/σ`.
    pub fn rho(&self) -> T {
        (self.elasticity - T::one()) / self.elasticity
    }

    /// Same technology with TFP replaced.
    pub fn with_tfp(&self, tfp: T) -> Result<Self> {
        Self::new(tfp, self.share, self.elasticity)
    }

    fn is_cobb_douglas(&self) -> bool {
        (self.elasticity - T::one()).abs() < T::lit(COBB_DOUGLAS_BAND)
    }

    /// Output from explicit inputs (used by brute-force cost checks).
    pub fn output(&self, ai_capital: T, labor: T) -> T {
        let d = self.share;
        if self.is_cobb_douglas() {
            return self.tfp * ai_capital.powf(d) * labor.powf(T::one() - d);
        }
        let rho = self.rho();
        let inner = d * ai_capital.powf(rho) + (T::one() - d) * labor.powf(rho);
        self.tfp * inner.powf(T::one() / rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorPrices<T> {
    ai_rental: T,
    wage: T,
}

impl<T: Scalar> FactorPrices<T> {
    pub fn new(ai_rental: T, wage: T) -> Result<Self> {
        if !(ai_rental > T::zero()) || !ai_rental.is_finite() {
            return Err(Error::invalid("ai_rental", format!("must be positive, got {ai_rental}")));
        }
        if !(wage > T::zero()) || !wage.is_finite() {
            return Err(Error::invalid("wage", format!("must be positive, got {wage}")));
        }
        Ok(Self { ai_rental, wage })
    }

    pub fn ai_rental(&self) -> T {
        self.ai_rental
    }

    pub fn wage(&self) -> T {
        self.wage
    }

    pub fn scaled(&self, k: T) -> Result<Self> {
        Self::new(self.ai_rental * k, self.wage * k)
    }
}

/// Cost-minimizing `K_AI / L_H`.
pub fn factor_ratio<T: Scalar>(tech: &CesTechnology<T>, prices: &FactorPrices<T>) -> T {
    let d = tech.share;
    let s = tech.elasticity;
    (d / (T::one() - d)).powf(s) * (prices.wage / prices.ai_rental).powf(s)
}

/// Cost of one unit of output at the given prices.
pub fn unit_cost<T: Scalar>(tech: &CesTechnology<T>, prices: &FactorPrices<T>) -> T {
    let d = tech.share;
    let (r, w) = (prices.ai_rental, prices.wage);
    if tech.is_cobb_douglas() {
        let one_minus = T::one() - d;
        return (r / d).powf(d) * (w / one_minus).powf(one_minus) / tech.tfp;
    }
    let s = tech.elasticity;
    let e = T::one() - s;
    let inner = d.powf(s) * r.powf(e) + (T::one() - d).powf(s) * w.powf(e);
    inner.powf(T::one() / e) / tech.tfp
}

/// Share of AI capital in unit cost, equal to `∂ log c / ∂ log r`.
pub fn cost_share_ai<T: Scalar>(tech: &CesTechnology<T>, prices: &FactorPrices<T>) -> T {
    if tech.is_cobb_douglas() {
        return tech.share;
    }
    let d = tech.share;
    let s = tech.elasticity;
    let e = T::one() - s;
    let ai = d.powf(s) * prices.ai_rental.powf(e);
    let lab = (T::one() - d).powf(s) * prices.wage.powf(e);
    ai / (ai + lab)
}

/// Cost-minimizing `(K_AI, L_H)` for one unit of output.
pub fn unit_input_bundle<T: Scalar>(tech: &CesTechnology<T>, prices: &FactorPrices<T>) -> (T, T) {
    let ratio = factor_ratio(tech, prices);
    // output is homogeneous of degree one, so scale the (ratio, 1) bundle to Q = 1
    let q = tech.output(ratio, T::one());
    (ratio / q, T::one() / q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostAsymmetryRow<T> {
    pub ai_rental: T,
    pub wage: T,
    pub share_high: T,
    pub share_low: T,
    pub pass: bool,
}

/// Compare AI cost shares of the high- and low-quality technologies over a price grid.
///
/// Every grid point yields a row; failing points are reported, never dropped.
pub fn cost_asymmetry_report<T: Scalar>(
    tech_h: &CesTechnology<T>,
    tech_l: &CesTechnology<T>,
    price_grid: &[FactorPrices<T>],
) -> Result<Vec<CostAsymmetryRow<T>>> {
    check_asymmetry(tech_h, tech_l)?;
    Ok(price_grid
        .iter()
        .map(|p| {
            let share_high = cost_share_ai(tech_h, p);
            let share_low = cost_share_ai(tech_l, p);
            CostAsymmetryRow {
                ai_rental: p.ai_rental,
                wage: p.wage,
                share_high,
                share_low,
                pass: share_low > share_high,
            }
        })
        .collect())
}

/// `σ_L > 1 > σ_H > 0`.
pub fn check_asymmetry<T: Scalar>(tech_h: &CesTechnology<T>, tech_l: &CesTechnology<T>) -> Result<()> {
    if tech_l.elasticity > T::one() && tech_h.elasticity < T::one() {
        Ok(())
    } else {
        Err(Error::AssumptionViolated {
            sigma_h: tech_h.elasticity.to_f64().unwrap_or(f64::NAN),
            sigma_l: tech_l.elasticity.to_f64().unwrap_or(f64::NAN),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tech(a: f64, d: f64, s: f64) -> CesTechnology<f64> {
        CesTechnology::new(a, d, s).unwrap()
    }

    fn prices(r: f64, w: f64) -> FactorPrices<f64> {
        FactorPrices::new(r, w).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CesTechnology::new(0.0, 0.5, 1.5).is_err());
        assert!(CesTechnology::new(1.0, 1.0, 1.5).is_err());
        assert!(CesTechnology::new(1.0, 0.0, 1.5).is_err());
        assert!(CesTechnology::new(1.0, 0.5, 0.0).is_err());
        assert!(FactorPrices::new(0.0, 1.0).is_err());
        assert!(FactorPrices::new(1.0, -1.0).is_err());
    }

    #[test]
    fn symmetric_ratio_is_one() {
        assert!((factor_ratio(&tech(1.0, 0.5, 1.5), &prices(1.0, 1.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ratio_is_price_homogeneous_of_degree_zero() {
        let t = tech(1.3, 0.65, 1.5);
        let p = prices(0.7, 8.0);
        let a = factor_ratio(&t, &p);
        let b = factor_ratio(&t, &p.scaled(2.0).unwrap());
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn doubling_tfp_halves_cost() {
        let p = prices(1.0, 8.0);
        let c1 = unit_cost(&tech(1.0, 0.35, 0.75), &p);
        let c2 = unit_cost(&tech(2.0, 0.35, 0.75), &p);
        assert!((c1 / c2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_share_is_half() {
        for s in [0.3, 0.75, 1.0, 1.5, 4.0] {
            let v = cost_share_ai(&tech(1.0, 0.5, s), &prices(1.0, 1.0));
            assert!((v - 0.5).abs() < 1e-14, "sigma {s}: {v}");
        }
    }

    #[test]
    fn cobb_douglas_limit_is_continuous() {
        let p = prices(1.3, 8.0);
        let cd = unit_cost(&tech(1.0, 0.4, 1.0), &p);
        let near = unit_cost(&tech(1.0, 0.4, 1.0 + 1e-4), &p);
        let below = unit_cost(&tech(1.0, 0.4, 1.0 - 1e-4), &p);
        assert!((cd - near).abs() / cd < 1e-3);
        assert!((cd - below).abs() / cd < 1e-3);
        assert_eq!(cost_share_ai(&tech(1.0, 0.4, 1.0), &p), 0.4);
    }

    #[test]
    fn report_flags_degenerate_pair() {
        let h = tech(1.0, 0.35, 1.5);
        let l = tech(1.0, 0.65, 1.5);
        assert!(matches!(
            cost_asymmetry_report(&h, &l, &[prices(1.0, 8.0)]),
            Err(Error::AssumptionViolated { .. })
        ));
    }

    #[test]
    fn report_keeps_failing_points() {
        let h = tech(1.0, 0.5, 0.75);
        let l = tech(1.0, 0.5, 1.5);
        let rows = cost_asymmetry_report(&h, &l, &[prices(2.0, 2.0)]).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].share_high - 0.5).abs() < 1e-14);
        assert!((rows[0].share_low - 0.5).abs() < 1e-14);
        assert!(!rows[0].pass);
    }

    #[test]
    fn works_in_single_precision() {
        let t = CesTechnology::<f32>::new(1.0, 0.65, 1.5).unwrap();
        let p = FactorPrices::<f32>::new(1.0, 8.0).unwrap();
        let c = unit_cost(&t, &p);
        assert!((c as f64 - unit_cost(&tech(1.0, 0.65, 1.5), &prices(1.0, 8.0))).abs() < 1e-4);
    }

    #[test]
    fn bundle_cost_matches_and_no_grid_point_is_cheaper() {
        let cases = [(1.0, 0.35, 0.75, 1.0, 8.0), (1.0, 0.65, 1.5, 0.6, 8.0), (1.7, 0.2, 2.5, 2.0, 3.0), (0.8, 0.8, 0.4, 1.4, 11.0), (1.2, 0.5, 1.0, 0.9, 0.9)];
        for (a, d, s, r, w) in cases {
            let (t, p) = (tech(a, d, s), prices(r, w));
            let c = unit_cost(&t, &p);
            let (k, l) = unit_input_bundle(&t, &p);
            assert!((t.output(k, l) - 1.0).abs() < 1e-12);
            assert!((r * k + w * l - c).abs() < 1e-9 * c);
            for i in 0..10_000 {
                let x = (-12.0 + 24.0 * i as f64 / 9_999.0).exp();
                let grid = (r * x + w) / t.output(x, 1.0);
                assert!(grid >= c * (1.0 - 1e-12), "{grid} < {c}");
            }
        }
    }

    proptest! {
        #[test]
        fn unit_cost_is_homogeneous_of_degree_one(
            d in 0.05..0.95f64, s in 0.2..4.0f64, r in 0.1..10.0f64, w in 0.1..20.0f64, k in 0.01..100.0f64,
        ) {
            let t = tech(1.0, d, s);
            let a = unit_cost(&t, &prices(r, w).scaled(k).unwrap());
            let b = k * unit_cost(&t, &prices(r, w));
            prop_assert!((a - b).abs() <= 1e-12 * b.abs());
        }

        #[test]
        fn unit_cost_rises_with_each_price(
            d in 0.05..0.95f64, s in 0.2..4.0f64, r in 0.1..10.0f64, w in 0.1..20.0f64,
        ) {
            let t = tech(1.0, d, s);
            let c = unit_cost(&t, &prices(r, w));
            prop_assert!(unit_cost(&t, &prices(r * 1.01, w)) > c);
            prop_assert!(unit_cost(&t, &prices(r, w * 1.01)) > c);
        }

        #[test]
        fn ai_share_rises_with_the_ai_weight(
            d in 0.05..0.9f64, s in 0.2..4.0f64, r in 0.1..10.0f64, w in 0.1..20.0f64,
        ) {
            let p = prices(r, w);
            prop_assert!(cost_share_ai(&tech(1.0, d + 0.05, s), &p) > cost_share_ai(&tech(1.0, d, s), &p));
        }

        #[test]
        fn low_quality_leans_harder_on_ai_when_labor_is_dearer(
            dh in 0.05..0.9f64, gap in 0.0..0.09f64, sh in 0.2..0.99f64, sl in 1.01..4.0f64,
            r in 0.1..5.0f64, extra in 1.01..10.0f64,
        ) {
            // holds once the high-quality AI odds times the wage ratio exceed one
            let premium = ((1.0 - dh) / dh).max(1.0) * extra;
            let p = prices(r, r * premium);
            let sh_ai = cost_share_ai(&tech(1.0, dh, sh), &p);
            let sl_ai = cost_share_ai(&tech(1.0, dh + gap, sl), &p);
            prop_assert!(sl_ai > sh_ai, "{} vs {}", sl_ai, sh_ai);
        }
    }
}
