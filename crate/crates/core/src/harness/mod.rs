//! Experiment orchestration: configuration, the procedures, persistence
//! and summary statistics.

mod config;
mod experiments;
mod record;
mod stats;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

pub use config::{ExperimentConfig, ExperimentId, DEFAULT_SEED, RUN_KEYS};
pub use experiments::{
    best_window, default_noise_levels, default_presets, default_weight_sets, first_best_tax, lead_lag, log_params,
    proxy_series, run_baseline, run_cross_platform, run_event_detection, run_noise, run_policy_comparison,
    run_robust_select, run_scenario, run_shocks, run_sweep, run_weight_sensitivity, scenario_params, shock_response,
    simulate, sweep_grid, CrossPlatformReport, EventReport, LeadLagRow, NoiseReport, NoiseRow, PlatformPreset,
    PlatformRow, PolicyReport, PolicyRow, RobustReport, ShockReport, ShockResponse, WeightRow, DETECTION_RISE,
    MAX_LEAD, NOISE_STREAM, NOISE_TRIALS, PEAK_WINDOW, RECOVERY_WINDOW, ROBUST_WORLDS,
};
pub use record::{
    read_csv, read_rows, write_csv, write_dat, write_rows, write_table, RunMeta, RunRecord, RunRow, CODE_VERSION,
    COLUMNS,
};
pub use stats::{final_window, summary_stats, tail_mean, Correlation, SummaryStats};

use crate::error::{Error, Result};

/// What an experiment wrote and its headline summary.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary_text: String,
    pub summary_json: Value,
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> Result<PathBuf> {
        let p = self.dir.join(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        self.files.push(p.clone());
        Ok(p)
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name)?;
        fs::write(p, body)?;
        Ok(())
    }

    fn run(&mut self, name: &str, record: &RunRecord) -> Result<()> {
        let p = self.path(name)?;
        write_csv(&record.rows, &p)
    }

    fn table<S: serde::Serialize>(&mut self, name: &str, rows: &[S]) -> Result<()> {
        let p = self.path(name)?;
        write_table(rows, &p)
    }

    fn series(&mut self, name: &str, header: (&str, &str), pts: Vec<(f64, f64)>) -> Result<()> {
        let p = self.path(name)?;
        write_dat(&p, header, pts)
    }

    fn time_series(&mut self, record: &RunRecord) -> Result<()> {
        let pts = |f: fn(&RunRow) -> f64| record.rows.iter().map(|r| (r.tick as f64, f(r))).collect();
        self.series("ipi.dat", ("tick", "ipi"), pts(|r| r.ipi))?;
        self.series("welfare.dat", ("tick", "welfare"), pts(|r| r.welfare))
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"))
}

fn stats_text(s: &SummaryStats) -> String {
    let mut t = format!("ticks: {} (final window {})\n", s.ticks, s.final_window);
    for c in &s.correlations {
        let _ = writeln!(t, "corr({}, {}) = {}", c.x, c.y, fmt_opt(c.value));
    }
    for (k, v) in &s.final_means {
        let _ = writeln!(t, "final {k} = {v:.4}");
    }
    if !s.non_finite.is_empty() {
        let _ = writeln!(t, "non-finite columns: {}", s.non_finite.join(", "));
    }
    t
}

fn to_json<S: serde::Serialize>(x: &S) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

/// Run the configured experiment and write its outputs.
///
/// With `jobs > 0` the work runs on a dedicated pool of that many threads.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    if cfg.jobs > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| execute_inner(cfg))
    } else {
        execute_inner(cfg)
    }
}

fn execute_inner(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut w = Writer::new(&cfg.out_dir)?;
    w.text("config.txt", &cfg.resolved())?;
    let mut text = format!(
        "experiment: {}\nseed: {}\nticks: {}\nconfig hash: {}\n",
        cfg.experiment,
        cfg.seed,
        cfg.ticks,
        cfg.hash()
    );
    let body: Value = match cfg.experiment {
        ExperimentId::Baseline => {
            let rec = run_baseline(cfg)?;
            w.run("run.csv", &rec)?;
            w.time_series(&rec)?;
            let s = summary_stats(&rec.rows);
            text.push_str(&stats_text(&s));
            json!({ "meta": to_json(&rec.meta), "stats": to_json(&s) })
        }
        ExperimentId::Shocks => {
            let rep = run_shocks(cfg)?;
            w.run("run.csv", &rep.record)?;
            w.time_series(&rep.record)?;
            w.table("shocks.csv", &rep.responses)?;
            for r in &rep.responses {
                let _ = writeln!(
                    text,
                    "{} at {}: rise {:+.1}% (peak {:.4} at {}), recovery {:.4}/tick, {} declining ticks",
                    r.kind,
                    r.tick,
                    100.0 * r.rise,
                    r.peak,
                    r.peak_tick,
                    r.recovery_rate,
                    r.declines
                );
            }
            let _ = writeln!(text, "mean rise {:+.1}%", 100.0 * rep.mean_rise());
            json!({
                "meta": to_json(&rep.record.meta),
                "responses": to_json(&rep.responses),
                "mean_rise": rep.mean_rise(),
                "stats": to_json(&summary_stats(&rep.record.rows)),
            })
        }
        ExperimentId::WeightSensitivity => {
            let rows = run_weight_sensitivity(cfg, &default_weight_sets())?;
            w.table("weights.csv", &rows)?;
            for r in &rows {
                let _ = writeln!(
                    text,
                    "weights ({:.2}, {:.2}, {:.2}, {:.2}): corr(IPI, W) = {}{}",
                    r.w1,
                    r.w2,
                    r.w3,
                    r.w4,
                    fmt_opt(r.corr),
                    if r.sign_flip { "  SIGN FLIP" } else { "" }
                );
            }
            json!({ "rows": to_json(&rows) })
        }
        ExperimentId::NoiseRobustness => {
            let rep = run_noise(cfg, &default_noise_levels())?;
            w.run("run.csv", &rep.record)?;
            w.table("noise.csv", &rep.rows)?;
            w.series(
                "noise_error.dat",
                ("level", "ipi_error"),
                rep.rows.iter().map(|r| (r.level, r.ipi_error)).collect(),
            )?;
            for r in &rep.rows {
                let _ = writeln!(
                    text,
                    "noise {:.2}: error {:.4}, volatility {:.4}",
                    r.level, r.ipi_error, r.volatility
                );
            }
            json!({ "meta": to_json(&rep.record.meta), "rows": to_json(&rep.rows) })
        }
        ExperimentId::EventDetection => {
            let rep = run_event_detection(cfg)?;
            w.run("run.csv", &rep.record)?;
            w.time_series(&rep.record)?;
            w.table("lead_lag.csv", &rep.lead_lag)?;
            match &rep.response {
                Some(r) => {
                    let _ = writeln!(
                        text,
                        "event at {}: rise {:+.1}%, recovery {:.4}/tick, detected: {}",
                        r.tick,
                        100.0 * r.rise,
                        r.recovery_rate,
                        rep.detected
                    );
                }
                None => text.push_str("no event in the horizon\n"),
            }
            for r in &rep.lead_lag {
                let _ = writeln!(text, "lead {:2}: corr {}", r.window, fmt_opt(r.corr));
            }
            let _ = writeln!(text, "best window: {:?}", rep.best_window);
            json!({
                "meta": to_json(&rep.record.meta),
                "response": to_json(&rep.response),
                "detected": rep.detected,
                "lead_lag": to_json(&rep.lead_lag),
                "best_window": rep.best_window,
            })
        }
        ExperimentId::CrossPlatform => {
            let presets = default_presets();
            let rep = run_cross_platform(cfg, &presets)?;
            w.table("platforms.csv", &rep.rows)?;
            for (pre, rec) in presets.iter().zip(&rep.records) {
                w.run(&format!("runs/{}.csv", pre.name), rec)?;
            }
            for r in &rep.rows {
                let _ = writeln!(
                    text,
                    "{:14} IPI {:.4}  W {:.4}  pollution {:.4}  trust {:.4}",
                    r.preset, r.ipi, r.welfare, r.pollution, r.trust
                );
            }
            let _ = writeln!(text, "IPI spread {:.4}", rep.spread);
            json!({ "presets": to_json(&presets), "rows": to_json(&rep.rows), "spread": rep.spread })
        }
        ExperimentId::Sweep => {
            let t = run_sweep(cfg)?;
            w.table("sweep.csv", &t.cells)?;
            let pts = crate::market::SWEEP_RENTALS
                .iter()
                .filter_map(|&r| t.pollution_at(r).map(|p| (r, p)))
                .collect();
            w.series("pollution_vs_rental.dat", ("ai_rental", "pollution"), pts)?;
            for c in &t.cells {
                let _ = writeln!(
                    text,
                    "r {:.1} sigma_l {:.1}: W {:.4} pollution {:.4} IPI {:.4}",
                    c.ai_rental, c.sigma_l, c.welfare, c.pollution, c.ipi
                );
            }
            let _ = writeln!(
                text,
                "corr(r, pollution) = {}\ncorr(r, W) = {}",
                fmt_opt(t.corr_rental_pollution),
                fmt_opt(t.corr_rental_welfare)
            );
            json!({ "table": to_json(&t) })
        }
        ExperimentId::PolicyComparison => {
            let rep = run_policy_comparison(cfg)?;
            w.table("policies.csv", &rep.rows)?;
            for (row, rec) in rep.rows.iter().zip(&rep.records) {
                w.run(&format!("runs/{}.csv", row.scenario), rec)?;
            }
            for r in &rep.rows {
                let _ = writeln!(
                    text,
                    "{:11} W {:.4} ({:+.4})  pollution {:.4} ({:+.4})  IPI {:.4}  trust {:.4}",
                    r.scenario, r.welfare, r.d_welfare, r.pollution, r.d_pollution, r.ipi, r.trust
                );
            }
            json!({ "rows": to_json(&rep.rows) })
        }
        ExperimentId::RobustSelect => {
            let rep = run_robust_select(cfg)?;
            #[derive(serde::Serialize)]
            struct Row {
                policy: String,
                worst_welfare: Option<f64>,
                mean_ipi: Option<f64>,
            }
            let rows: Vec<Row> = rep
                .selection
                .rows
                .iter()
                .map(|r| Row {
                    policy: rep.policies[r.policy_index].name().into(),
                    worst_welfare: r.worst_welfare,
                    mean_ipi: r.mean_ipi,
                })
                .collect();
            w.table("robust.csv", &rows)?;
            for r in &rows {
                let _ = writeln!(
                    text,
                    "{:11} worst W {}  mean IPI {}",
                    r.policy,
                    fmt_opt(r.worst_welfare),
                    fmt_opt(r.mean_ipi)
                );
            }
            let _ = writeln!(text, "first-best levy {:.4}\nchosen: {}", rep.first_best_tax, rep.chosen());
            json!({
                "worlds_ai_rental": rep.worlds,
                "first_best_tax": rep.first_best_tax,
                "chosen": rep.chosen().name(),
                "selection": to_json(&rep.selection),
            })
        }
    };
    let summary_json = json!({
        "experiment": cfg.experiment.name(),
        "seed": cfg.seed,
        "ticks": cfg.ticks,
        "config_hash": cfg.hash(),
        "code_version": CODE_VERSION,
        "result": body,
    });
    w.text("summary.txt", &text)?;
    let pretty = serde_json::to_string_pretty(&summary_json).map_err(|e| Error::Io(e.to_string()))?;
    w.text("summary.json", &(pretty + "\n"))?;
    Ok(Outcome {
        out_dir: w.dir.clone(),
        files: w.files,
        summary_text: text,
        summary_json,
    })
}

/// Summary of a finished output directory, recomputed from its run CSV.
pub fn report(dir: &Path) -> Result<String> {
    let mut out = String::new();
    let summary = dir.join("summary.txt");
    if summary.exists() {
        out.push_str(&fs::read_to_string(&summary)?);
    }
    let csv = dir.join("run.csv");
    if csv.exists() {
        let rows = read_csv(&csv)?;
        out.push_str("\nrecomputed from run.csv:\n");
        out.push_str(&stats_text(&summary_stats(&rows)));
    }
    if out.is_empty() {
        return Err(Error::Config(format!("{} holds no experiment output", dir.display())));
    }
    Ok(out)
}
