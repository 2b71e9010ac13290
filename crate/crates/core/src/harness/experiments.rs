use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::record::RunRecord;
use super::stats::{final_window, tail_mean};
use crate::error::{Error, Result};
use crate::ipi::{proxy_ipi, synthesize_log, LogContext, LogParams};
use crate::agents::PlatformState;
use crate::market::{
    cell_rng, pollution_density, Economy, comparative_statics, draw_populations, pearson, standard_shocks, trust_update, ShockEvent, ShockKind,
    Simulation, StaticsTable, TickRecord, SWEEP_RENTALS, SWEEP_SIGMAS,
};
use crate::params::ModelParams;
use crate::policy::{
    pigouvian_tax, robust_select, scenario_config, CellOutcome, PolicyConfig, RobustSelection, Scenario,
};

/// Run one configuration from a fresh population draw.
pub fn simulate(
    params: &ModelParams,
    policy: PolicyConfig,
    seed: u64,
    cell: u64,
    ticks: usize,
    shocks: Vec<ShockEvent>,
) -> Result<Vec<TickRecord>> {
    let pop = draw_populations(params, seed)?;
    Simulation::new(params, policy, pop, seed, cell)?
        .with_shocks(shocks)
        .run(ticks)
}

fn final_means(rows: &[TickRecord]) -> (f64, f64, f64, f64) {
    let w = final_window(rows.len());
    let col = |f: fn(&TickRecord) -> f64| tail_mean(&rows.iter().map(f).collect::<Vec<_>>(), w);
    (col(|r| r.welfare), col(|r| r.pollution), col(|r| r.ipi), col(|r| r.trust))
}

pub fn run_baseline(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let ticks = simulate(&cfg.params, cfg.params.policy_config(), cfg.seed, 0, cfg.ticks, Vec::new())?;
    Ok(RunRecord::from_ticks(&ticks, &cfg.hash(), cfg.seed))
}

// ---------------------------------------------------------------------------
// Shocks

/// Ticks after onset searched for the peak.
pub const PEAK_WINDOW: usize = 10;
/// Post-peak ticks over which the recovery rate is averaged.
pub const RECOVERY_WINDOW: usize = 10;
const PRE_WINDOW: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockResponse {
    pub kind: String,
    pub tick: usize,
    pub magnitude: f64,
    pub pre_mean: f64,
    pub peak: f64,
    pub peak_tick: usize,
    /// Relative rise of the peak over the pre-shock mean.
    pub rise: f64,
    /// Mean IPI decline per tick over the post-peak window.
    pub recovery_rate: f64,
    /// Consecutive strictly declining ticks after the peak.
    pub declines: usize,
}

/// Response of an IPI series (index 0 is tick 1) to an event at `tick`.
pub fn shock_response(ipi: &[f64], kind: &str, tick: usize, magnitude: f64) -> Option<ShockResponse> {
    let onset = tick.checked_sub(1)?;
    if onset < PRE_WINDOW || onset >= ipi.len() {
        return None;
    }
    let pre_mean = ipi[onset - PRE_WINDOW..onset].iter().sum::<f64>() / PRE_WINDOW as f64;
    let end = (onset + PEAK_WINDOW).min(ipi.len());
    let (mut at, mut peak) = (onset, ipi[onset]);
    for (i, &v) in ipi.iter().enumerate().take(end).skip(onset) {
        if v > peak {
            (at, peak) = (i, v);
        }
    }
    let declines = ipi[at + 1..]
        .iter()
        .scan(peak, |prev, &v| {
            let down = v < *prev;
            *prev = v;
            down.then_some(())
        })
        .count();
    let later = (at + RECOVERY_WINDOW).min(ipi.len() - 1);
    let recovery_rate = if later > at { (peak - ipi[later]) / (later - at) as f64 } else { 0.0 };
    Some(ShockResponse {
        kind: kind.to_string(),
        tick,
        magnitude,
        pre_mean,
        peak,
        peak_tick: at + 1,
        rise: peak / pre_mean - 1.0,
        recovery_rate,
        declines,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShockReport {
    pub record: RunRecord,
    pub responses: Vec<ShockResponse>,
}

impl ShockReport {
    pub fn mean_rise(&self) -> f64 {
        self.responses.iter().map(|r| r.rise).sum::<f64>() / self.responses.len().max(1) as f64
    }
}

fn shock_run(cfg: &ExperimentConfig, shocks: Vec<ShockEvent>) -> Result<ShockReport> {
    for s in &shocks {
        if s.tick == 0 || s.tick > cfg.ticks {
            return Err(Error::Config(format!("{} at tick {} lies outside the horizon", s.kind, s.tick)));
        }
    }
    let ticks = simulate(&cfg.params, cfg.params.policy_config(), cfg.seed, 0, cfg.ticks, shocks.clone())?;
    let ipi: Vec<f64> = ticks.iter().map(|t| t.ipi).collect();
    let responses = shocks
        .iter()
        .filter_map(|s| shock_response(&ipi, s.kind.name(), s.tick, s.magnitude))
        .collect();
    Ok(ShockReport {
        record: RunRecord::from_ticks(&ticks, &cfg.hash(), cfg.seed),
        responses,
    })
}

pub fn run_shocks(cfg: &ExperimentConfig) -> Result<ShockReport> {
    shock_run(cfg, standard_shocks(&cfg.params))
}

// ---------------------------------------------------------------------------
// Weight sensitivity

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRow {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub corr: Option<f64>,
    /// The correlation came out positive.
    pub sign_flip: bool,
}

/// Default weights, equal weights, and the default weights with one dimension's
/// weight doubled and the vector renormalized.
pub fn default_weight_sets() -> Vec<[f64; 4]> {
    let base = crate::ipi::default_weights::<f64>();
    let mut sets = vec![base, [0.25; 4]];
    for j in 0..4 {
        let mut w = base;
        w[j] *= 2.0;
        let sum: f64 = w.iter().sum();
        sets.push(w.map(|x| x / sum));
    }
    sets
}

pub fn run_weight_sensitivity(cfg: &ExperimentConfig, sets: &[[f64; 4]]) -> Result<Vec<WeightRow>> {
    sets.par_iter()
        .enumerate()
        .map(|(i, &w)| {
            let mut p = cfg.params.clone();
            p.set_weights(w);
            p.validate()?;
            let t = simulate(&p, p.policy_config(), cfg.seed, 0, cfg.ticks, Vec::new())
                .map_err(|e| e.in_cell(format!("weight set {i}")))?;
            let ipi: Vec<f64> = t.iter().map(|r| r.ipi).collect();
            let w_: Vec<f64> = t.iter().map(|r| r.welfare).collect();
            let corr = pearson(&ipi, &w_);
            Ok(WeightRow {
                w1: w[0],
                w2: w[1],
                w3: w[2],
                w4: w[3],
                corr,
                sign_flip: corr.is_some_and(|c| c > 0.0),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Noise robustness

pub const NOISE_TRIALS: u64 = 3;
/// First in-run stream used for proxy noise; trial `k` uses this plus `k`.
pub const NOISE_STREAM: u64 = 1 << 20;

pub fn default_noise_levels() -> Vec<f64> {
    vec![0.0, 0.05, 0.1, 0.2, 0.3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub level: f64,
    /// Mean absolute gap between noisy and noise-free proxy IPI.
    pub ipi_error: f64,
    /// Standard deviation of tick-to-tick proxy IPI changes, averaged over trials.
    pub volatility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseReport {
    pub record: RunRecord,
    pub rows: Vec<NoiseRow>,
}

pub fn log_params(p: &ModelParams) -> LogParams {
    let x = &p.proxy;
    LogParams {
        items_per_type: x.items_per_type,
        impressions_per_unit: x.impressions_per_unit,
        feedback_rate: x.feedback_rate,
        churn_base: x.churn_base,
        churn_low: x.churn_low,
        acc_base: x.acc_base,
        ..LogParams::default()
    }
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Proxy IPI series from synthesized logs of a finished run.
pub fn proxy_series(p: &ModelParams, ticks: &[TickRecord], noise: f64, stream: u64, seed: u64) -> Result<Vec<f64>> {
    let lp = log_params(p);
    let weights = p.weights();
    let base = Economy::new(p)?.initial_platform(p)?;
    let mut rng = cell_rng(seed, stream);
    ticks
        .iter()
        .map(|t| {
            let platform = PlatformState {
                gamma_h: t.gamma_h,
                gamma_l: t.gamma_l,
                moderation: t.m,
                ..base
            };
            let ctx = LogContext {
                undetected_share: t.undetected_share,
                trust_decay: t.dims[2],
                tech_risk: t.dims[3],
            };
            let log = synthesize_log(&t.market_state(), &platform, &ctx, &lp, noise, &mut rng);
            proxy_ipi(&log, &lp, &weights)
        })
        .collect()
}

pub fn run_noise(cfg: &ExperimentConfig, levels: &[f64]) -> Result<NoiseReport> {
    if let Some(bad) = levels.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::Config(format!("noise level {bad} outside [0,1]")));
    }
    let ticks = simulate(&cfg.params, cfg.params.policy_config(), cfg.seed, 0, cfg.ticks, Vec::new())?;
    let clean = proxy_series(&cfg.params, &ticks, 0.0, NOISE_STREAM, cfg.seed)?;
    let rows = levels
        .par_iter()
        .map(|&level| {
            let mut err = 0.0;
            let mut vol = 0.0;
            for k in 0..NOISE_TRIALS {
                let noisy = proxy_series(&cfg.params, &ticks, level, NOISE_STREAM + k, cfg.seed)?;
                err += noisy.iter().zip(&clean).map(|(a, b)| (a - b).abs()).sum::<f64>() / noisy.len().max(1) as f64;
                let diffs: Vec<f64> = noisy.windows(2).map(|w| w[1] - w[0]).collect();
                vol += std_dev(&diffs);
            }
            let n = NOISE_TRIALS as f64;
            Ok(NoiseRow {
                level,
                ipi_error: err / n,
                volatility: vol / n,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NoiseReport {
        record: RunRecord::from_ticks(&ticks, &cfg.hash(), cfg.seed),
        rows,
    })
}

// ---------------------------------------------------------------------------
// Event detection

/// Relative IPI rise above which an event counts as detected.
pub const DETECTION_RISE: f64 = 0.10;
pub const MAX_LEAD: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadLagRow {
    pub window: usize,
    /// Correlation of IPI with the welfare drop over the following `window` ticks.
    pub corr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventReport {
    pub record: RunRecord,
    pub response: Option<ShockResponse>,
    pub detected: bool,
    pub lead_lag: Vec<LeadLagRow>,
    pub best_window: Option<usize>,
}

pub fn lead_lag(ipi: &[f64], welfare: &[f64], max_lead: usize) -> Vec<LeadLagRow> {
    (1..=max_lead)
        .map(|k| {
            let n = ipi.len().min(welfare.len()).saturating_sub(k);
            let drop: Vec<f64> = (0..n).map(|t| welfare[t] - welfare[t + k]).collect();
            LeadLagRow {
                window: k,
                corr: pearson(&ipi[..n], &drop),
            }
        })
        .collect()
}

pub fn best_window(rows: &[LeadLagRow]) -> Option<usize> {
    rows.iter()
        .filter_map(|r| r.corr.map(|c| (r.window, c)))
        .fold(None, |best: Option<(usize, f64)>, (k, c)| match best {
            Some((_, b)) if b >= c => best,
            _ => Some((k, c)),
        })
        .map(|(k, _)| k)
}

pub fn run_event_detection(cfg: &ExperimentConfig) -> Result<EventReport> {
    let s = &cfg.params.shocks;
    let event = ShockEvent {
        tick: s.fake_news_tick,
        kind: ShockKind::FakeNewsBurst,
        magnitude: s.fake_news,
    };
    let shocks = if event.magnitude > 0.0 { vec![event] } else { Vec::new() };
    let report = shock_run(cfg, shocks)?;
    let rows = &report.record.rows;
    let ipi: Vec<f64> = rows.iter().map(|r| r.ipi).collect();
    let welfare: Vec<f64> = rows.iter().map(|r| r.welfare).collect();
    let response = shock_response(&ipi, event.kind.name(), event.tick, event.magnitude);
    let lead_lag = lead_lag(&ipi, &welfare, MAX_LEAD);
    Ok(EventReport {
        detected: response.as_ref().is_some_and(|r| r.rise >= DETECTION_RISE),
        best_window: best_window(&lead_lag),
        response,
        lead_lag,
        record: report.record,
    })
}

// ---------------------------------------------------------------------------
// Cross-platform comparison

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformPreset {
    pub name: String,
    pub overrides: Vec<(String, String)>,
}

impl PlatformPreset {
    pub fn new(name: &str, overrides: &[(&str, &str)]) -> Self {
        Self {
            name: name.into(),
            overrides: overrides.iter().map(|&(k, v)| (k.into(), v.into())).collect(),
        }
    }
}

/// Platform environments varying revenue share, amplification cap, trust
/// price and consumer verification cost.
pub fn default_presets() -> Vec<PlatformPreset> {
    vec![
        PlatformPreset::new("reference", &[]),
        PlatformPreset::new("ad_heavy", &[("platform.theta", "0.4")]),
        PlatformPreset::new("wide_reach", &[("platform.gamma_max", "3")]),
        PlatformPreset::new("trust_minded", &[("platform.trust_price", "80")]),
        PlatformPreset::new("costly_checks", &[("agents.k_max", "6")]),
        PlatformPreset::new("cheap_checks", &[("agents.k_max", "2")]),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformRow {
    pub preset: String,
    pub ipi: f64,
    pub welfare: f64,
    pub pollution: f64,
    pub trust: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossPlatformReport {
    pub rows: Vec<PlatformRow>,
    pub records: Vec<RunRecord>,
    /// Max minus min final IPI.
    pub spread: f64,
}

pub fn run_cross_platform(cfg: &ExperimentConfig, presets: &[PlatformPreset]) -> Result<CrossPlatformReport> {
    let out = presets
        .par_iter()
        .map(|pre| {
            let go = || -> Result<_> {
                let mut p = cfg.params.clone();
                for (k, v) in &pre.overrides {
                    p.set(k, v)?;
                }
                let t = simulate(&p, p.policy_config(), cfg.seed, 0, cfg.ticks, Vec::new())?;
                let (welfare, pollution, ipi, trust) = final_means(&t);
                let row = PlatformRow {
                    preset: pre.name.clone(),
                    ipi,
                    welfare,
                    pollution,
                    trust,
                };
                Ok((row, RunRecord::from_ticks(&t, &cfg.hash(), cfg.seed)))
            };
            go().map_err(|e| e.in_cell(format!("preset {}", pre.name)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (rows, records): (Vec<_>, Vec<_>) = out.into_iter().unzip();
    let hi = rows.iter().map(|r| r.ipi).fold(f64::NEG_INFINITY, f64::max);
    let lo = rows.iter().map(|r| r.ipi).fold(f64::INFINITY, f64::min);
    Ok(CrossPlatformReport {
        spread: if rows.is_empty() { 0.0 } else { hi - lo },
        rows,
        records,
    })
}

// ---------------------------------------------------------------------------
// Sweep, policy comparison, robust selection

pub fn sweep_grid() -> Vec<(f64, f64)> {
    SWEEP_RENTALS
        .iter()
        .flat_map(|&r| SWEEP_SIGMAS.iter().map(move |&s| (r, s)))
        .collect()
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<StaticsTable> {
    comparative_statics(
        &sweep_grid(),
        &cfg.params,
        cfg.params.policy_config(),
        cfg.seed,
        cfg.ticks,
        final_window(cfg.ticks),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRow {
    pub scenario: String,
    pub welfare: f64,
    pub pollution: f64,
    pub ipi: f64,
    pub trust: f64,
    pub d_welfare: f64,
    pub d_pollution: f64,
    pub d_ipi: f64,
    pub d_trust: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyReport {
    pub rows: Vec<PolicyRow>,
    pub records: Vec<RunRecord>,
}

impl PolicyReport {
    pub fn row(&self, s: Scenario) -> Option<&PolicyRow> {
        self.rows.iter().find(|r| r.scenario == s.name())
    }
}

/// Parameters and policy of one scenario on top of `base`.
pub fn scenario_params(base: &ModelParams, scenario: Scenario, first_best_tax: f64) -> Result<(ModelParams, PolicyConfig)> {
    let setup = scenario_config(scenario, &base.magnitudes(first_best_tax));
    let mut p = base.clone();
    for (k, v) in &setup.overrides {
        p.set_f64(k, *v)?;
    }
    Ok((p, setup.policy))
}

pub fn run_scenario(base: &ModelParams, scenario: Scenario, seed: u64, ticks: usize) -> Result<Vec<TickRecord>> {
    let (p, policy) = scenario_params(base, scenario, 0.0)?;
    simulate(&p, policy, seed, 0, ticks, Vec::new()).map_err(|e| e.in_cell(format!("scenario {scenario}")))
}

pub fn run_policy_comparison(cfg: &ExperimentConfig) -> Result<PolicyReport> {
    let runs = Scenario::COMPARISON
        .par_iter()
        .map(|&s| run_scenario(&cfg.params, s, cfg.seed, cfg.ticks))
        .collect::<Result<Vec<_>>>()?;
    let means: Vec<_> = runs.iter().map(|t| final_means(t)).collect();
    let (bw, bp, bi, bt) = means[0];
    let rows = Scenario::COMPARISON
        .iter()
        .zip(&means)
        .map(|(s, &(w, p, i, t))| PolicyRow {
            scenario: s.name().into(),
            welfare: w,
            pollution: p,
            ipi: i,
            trust: t,
            d_welfare: w - bw,
            d_pollution: p - bp,
            d_ipi: i - bi,
            d_trust: t - bt,
        })
        .collect();
    let records = runs.iter().map(|t| RunRecord::from_ticks(t, &cfg.hash(), cfg.seed)).collect();
    Ok(PolicyReport { rows, records })
}

/// Levy equal to the marginal social damage of low-quality output at the
/// end of a baseline run.
pub fn first_best_tax(p: &ModelParams, ticks: &[TickRecord]) -> Result<f64> {
    let last = ticks.last().ok_or_else(|| Error::Config("first-best levy needs a nonempty run".into()))?;
    let econ = Economy::new(p)?;
    let n_p = p.agents.n_producers as f64;
    let platform = PlatformState {
        gamma_h: last.gamma_h,
        gamma_l: last.gamma_l,
        moderation: last.m,
        ..econ.initial_platform(p)?
    };
    let trust_after = |q_l: f64| {
        let i1 = pollution_density(last.q_h, q_l, &platform);
        let flow = (platform.gamma_h * last.q_h + platform.gamma_l * (1.0 - platform.moderation) * q_l) / n_p;
        trust_update(last.trust, i1, flow, &econ.trust)
    };
    let h = 1e-4 * last.q_l.max(1.0);
    let sensitivity = (trust_after(last.q_l + h) - trust_after((last.q_l - h).max(0.0))) / (2.0 * h);
    Ok(pigouvian_tax(
        econ.welfare.marginal_harm(last.breakdown.consumed_l),
        last.m,
        p.welfare.lambda_trust,
        sensitivity,
    ))
}

/// Rental rates defining the candidate worlds for robust selection.
pub const ROBUST_WORLDS: [f64; 3] = [0.6, 1.0, 1.4];

#[derive(Debug, Clone, PartialEq)]
pub struct RobustReport {
    pub policies: Vec<Scenario>,
    pub worlds: Vec<f64>,
    pub first_best_tax: f64,
    pub selection: RobustSelection,
}

impl RobustReport {
    pub fn chosen(&self) -> Scenario {
        self.policies[self.selection.chosen]
    }
}

pub fn run_robust_select(cfg: &ExperimentConfig) -> Result<RobustReport> {
    let base = simulate(&cfg.params, PolicyConfig::default(), cfg.seed, 0, cfg.ticks, Vec::new())?;
    let tax = first_best_tax(&cfg.params, &base)?;
    let policies: Vec<Scenario> = Scenario::COMPARISON.iter().copied().chain([Scenario::FirstBest]).collect();
    let worlds = ROBUST_WORLDS.to_vec();
    let selection = robust_select(&policies, &worlds, |&s, &r| {
        let mut world = cfg.params.clone();
        world.prices.ai_rental = r;
        let (p, policy) = scenario_params(&world, s, tax)?;
        let t = simulate(&p, policy, cfg.seed, 0, cfg.ticks, Vec::new())?;
        let (welfare, _, ipi, _) = final_means(&t);
        Ok(CellOutcome { welfare, ipi })
    })?;
    Ok(RobustReport {
        policies,
        worlds,
        first_best_tax: tax,
        selection,
    })
}
