use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sim::{draw_populations, Simulation};
use crate::error::Result;
use crate::params::ModelParams;
use crate::policy::PolicyConfig;

pub const SWEEP_RENTALS: [f64; 5] = [0.6, 0.8, 1.0, 1.2, 1.4];
pub const SWEEP_SIGMAS: [f64; 4] = [1.2, 1.4, 1.6, 1.8];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticsCell {
    pub ai_rental: f64,
    pub sigma_l: f64,
    pub welfare: f64,
    pub pollution: f64,
    pub ipi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticsTable {
    pub cells: Vec<StaticsCell>,
    pub corr_rental_welfare: Option<f64>,
    pub corr_rental_pollution: Option<f64>,
}

impl StaticsTable {
    /// Mean pollution over the cells at a given rental rate.
    pub fn pollution_at(&self, ai_rental: f64) -> Option<f64> {
        let v: Vec<f64> = self
            .cells
            .iter()
            .filter(|c| (c.ai_rental - ai_rental).abs() < 1e-12)
            .map(|c| c.pollution)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Pearson correlation; `None` when either series is constant or the
/// lengths differ.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    // constant up to rounding
    let flat = |ss: f64, v: &[f64]| !(ss > 1e-24 * v.iter().map(|a| a * a).sum::<f64>());
    if flat(sxx, x) || flat(syy, y) {
        return None;
    }
    let den = (sxx * syy).sqrt();
    if !den.is_finite() {
        return None;
    }
    Some((sxy / den).clamp(-1.0, 1.0))
}

/// Runs each `(r, σ_L)` cell for `ticks` ticks and averages the last
/// `window` ticks. Cells share the population draw and run in parallel.
pub fn comparative_statics(
    grid: &[(f64, f64)],
    base: &ModelParams,
    policy: PolicyConfig,
    seed: u64,
    ticks: usize,
    window: usize,
) -> Result<StaticsTable> {
    let pop = draw_populations(base, seed)?;
    let cells: Vec<Result<StaticsCell>> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(r, sigma))| {
            let run = || -> Result<StaticsCell> {
                let mut p = base.clone();
                p.prices.ai_rental = r;
                p.tech.sigma_l = sigma;
                let mut sim = Simulation::new(&p, policy, pop.clone(), seed, i as u64)?;
                let rows = sim.run(ticks)?;
                let tail = &rows[rows.len().saturating_sub(window.max(1))..];
                let k = tail.len().max(1) as f64;
                let mean = |f: fn(&super::TickRecord) -> f64| tail.iter().map(f).sum::<f64>() / k;
                Ok(StaticsCell {
                    ai_rental: r,
                    sigma_l: sigma,
                    welfare: mean(|t| t.welfare),
                    pollution: mean(|t| t.pollution),
                    ipi: mean(|t| t.ipi),
                })
            };
            run().map_err(|e| e.in_cell(format!("cell r={r}, sigma_l={sigma}")))
        })
        .collect();
    let cells = cells.into_iter().collect::<Result<Vec<_>>>()?;
    let r: Vec<f64> = cells.iter().map(|c| c.ai_rental).collect();
    let w: Vec<f64> = cells.iter().map(|c| c.welfare).collect();
    let rho: Vec<f64> = cells.iter().map(|c| c.pollution).collect();
    Ok(StaticsTable {
        corr_rental_welfare: pearson(&r, &w),
        corr_rental_pollution: pearson(&r, &rho),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_cases() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]), None);
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[8.0, 6.0, 4.0, 2.0]).unwrap();
        assert!((r + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[1.0], &[1.0]), None);
        // constant up to rounding
        let y = [0.1 + 0.2, 0.3, 0.30000000000000004, 0.3];
        assert_eq!(pearson(&[1.0, 2.0, 3.0, 4.0], &y), None);
    }

    #[test]
    fn single_cell_grid() {
        let mut p = ModelParams::default();
        p.agents.n_producers = 10;
        p.agents.n_consumers = 20;
        p.ipi.lattice_mod = 2;
        p.ipi.lattice_gamma = 2;
        p.ipi.lattice_tax = 1;
        let t = comparative_statics(&[(1.0, 1.5)], &p, PolicyConfig::default(), 42, 5, 2).unwrap();
        assert_eq!(t.cells.len(), 1);
        assert_eq!(t.corr_rental_pollution, None);
    }
}
