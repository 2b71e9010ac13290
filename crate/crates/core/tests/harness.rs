use std::fs;
use std::path::Path;

use infopol::harness::{
    self, default_presets, read_csv, read_rows, run_baseline, run_cross_platform, run_event_detection, run_noise,
    run_policy_comparison, run_shocks, run_weight_sensitivity, simulate, summary_stats, write_rows, ExperimentConfig,
    ExperimentId, PlatformPreset, RunRow,
};
use infopol::params::ModelParams;
use infopol::policy::Scenario;
use proptest::prelude::*;

fn cfg(id: ExperimentId, ticks: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(id);
    c.ticks = ticks;
    c
}

fn tail_mean(xs: &[f64]) -> f64 {
    let w = harness::final_window(xs.len());
    harness::tail_mean(xs, w)
}

fn files_under(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                let name = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((name, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn same_config_gives_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = cfg(ExperimentId::Baseline, 40);
    c.out_dir = tmp.path().join("a");
    harness::execute(&c).unwrap();
    c.out_dir = tmp.path().join("b");
    c.jobs = 3;
    harness::execute(&c).unwrap();
    let (a, b) = (files_under(&tmp.path().join("a")), files_under(&tmp.path().join("b")));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn parallel_cells_do_not_depend_on_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = cfg(ExperimentId::CrossPlatform, 30);
    c.jobs = 1;
    c.out_dir = tmp.path().join("one");
    harness::execute(&c).unwrap();
    c.jobs = 4;
    c.out_dir = tmp.path().join("four");
    harness::execute(&c).unwrap();
    let (a, b) = (files_under(&tmp.path().join("one")), files_under(&tmp.path().join("four")));
    assert_eq!(a.len(), default_presets().len() + 1);
    assert_eq!(a, b);
}

#[test]
fn zero_ticks_writes_a_header_only_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = cfg(ExperimentId::Baseline, 0);
    c.out_dir = tmp.path().to_path_buf();
    harness::execute(&c).unwrap();
    let text = fs::read_to_string(tmp.path().join("run.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("tick,q_h,q_l,"));
    assert!(read_csv(&tmp.path().join("run.csv")).unwrap().is_empty());
}

#[test]
fn every_experiment_writes_its_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = cfg(ExperimentId::EventDetection, 110);
    c.out_dir = tmp.path().to_path_buf();
    let out = harness::execute(&c).unwrap();
    let written = fs::read_to_string(tmp.path().join("config.txt")).unwrap();
    assert_eq!(written, c.resolved());
    for key in ["platform.theta", "shocks.fake_news", "ipi.w4", "run.seed"] {
        assert!(written.contains(key), "{key}");
    }
    assert!(out.summary_json["result"]["lead_lag"].is_array());
    assert!(tmp.path().join("summary.json").exists());
    let report = harness::report(tmp.path()).unwrap();
    assert!(report.contains("corr(ipi, welfare)"));
}

#[test]
fn csv_round_trip_preserves_summary_statistics() {
    let rec = run_baseline(&cfg(ExperimentId::Baseline, 60)).unwrap();
    let mut buf = Vec::new();
    write_rows(&rec.rows, &mut buf).unwrap();
    let back = read_rows(buf.as_slice()).unwrap();
    assert_eq!(back, rec.rows);
    assert_eq!(summary_stats(&back), summary_stats(&rec.rows));
}

#[test]
fn zero_magnitude_shocks_leave_the_index_flat() {
    let mut c = cfg(ExperimentId::Shocks, 150);
    for k in ["shocks.cost_drop", "shocks.capability_jump", "shocks.fake_news", "shocks.trust_shock"] {
        c.set(k, "0").unwrap();
    }
    let rep = run_shocks(&c).unwrap();
    assert_eq!(rep.responses.len(), 4);
    for r in &rep.responses {
        assert!(r.rise.abs() < 0.02, "{}: {}", r.kind, r.rise);
    }
}

#[test]
fn a_large_cost_drop_raises_the_index() {
    let mut c = cfg(ExperimentId::Shocks, 150);
    c.set("shocks.cost_drop", "0.8").unwrap();
    let rep = run_shocks(&c).unwrap();
    let r = rep.responses.iter().find(|r| r.kind == "cost_drop").unwrap();
    assert!(r.rise > 0.0, "{}", r.rise);
}

#[test]
fn shocks_outside_the_horizon_are_rejected() {
    let c = cfg(ExperimentId::Shocks, 50);
    assert!(run_shocks(&c).unwrap_err().is_config_error());
}

#[test]
fn weight_sensitivity_tables() {
    let c = cfg(ExperimentId::WeightSensitivity, 60);
    let w = [0.3, 0.3, 0.2, 0.2];
    let rows = run_weight_sensitivity(&c, &[w, w]).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].corr, rows[1].corr);
    assert_eq!(run_weight_sensitivity(&c, &[w]).unwrap().len(), 1);
    assert!(run_weight_sensitivity(&c, &[[0.5, 0.5, 0.5, 0.5]]).is_err());
}

#[test]
fn noise_error_is_zero_at_level_zero_and_grows() {
    let c = cfg(ExperimentId::NoiseRobustness, 60);
    let rep = run_noise(&c, &[0.0, 0.1, 0.3, 0.6]).unwrap();
    assert_eq!(rep.rows[0].ipi_error, 0.0);
    for pair in rep.rows.windows(2) {
        assert!(pair[1].ipi_error >= pair[0].ipi_error, "{:?}", rep.rows);
    }
    assert!(run_noise(&c, &[1.5]).is_err());
}

#[test]
fn no_event_means_no_detection() {
    let mut c = cfg(ExperimentId::EventDetection, 150);
    c.set("shocks.fake_news", "0").unwrap();
    let rep = run_event_detection(&c).unwrap();
    assert!(!rep.detected);
    assert!(rep.response.is_some_and(|r| r.rise.abs() < 0.02));
    assert!(rep.record.rows.iter().all(|r| r.event.is_empty()));
}

#[test]
fn default_burst_is_detected_with_a_window_in_range() {
    let rep = run_event_detection(&cfg(ExperimentId::EventDetection, 150)).unwrap();
    assert!(rep.detected);
    assert!(rep.response.unwrap().rise > 0.0);
    assert!(rep.best_window.is_some_and(|k| (1..=10).contains(&k)));
    assert_eq!(rep.lead_lag.len(), 10);
}

#[test]
fn identical_presets_have_zero_spread() {
    let c = cfg(ExperimentId::CrossPlatform, 40);
    let p = PlatformPreset::new("x", &[("platform.theta", "0.3")]);
    let rep = run_cross_platform(&c, &[p.clone(), p]).unwrap();
    assert_eq!(rep.spread, 0.0);
}

#[test]
fn higher_trust_price_gives_weakly_lower_pollution() {
    let c = cfg(ExperimentId::CrossPlatform, 120);
    let presets = [
        PlatformPreset::new("low", &[("platform.trust_price", "20")]),
        PlatformPreset::new("high", &[("platform.trust_price", "80")]),
    ];
    let rep = run_cross_platform(&c, &presets).unwrap();
    assert!(rep.rows[1].pollution <= rep.rows[0].pollution, "{:?}", rep.rows);
}

#[test]
fn policy_baseline_row_matches_a_plain_run() {
    let c = cfg(ExperimentId::PolicyComparison, 40);
    let rep = run_policy_comparison(&c).unwrap();
    assert_eq!(rep.rows.len(), 6);
    for s in Scenario::COMPARISON {
        assert!(rep.row(s).is_some(), "{s}");
    }
    let plain = run_baseline(&c).unwrap();
    let base = rep.row(Scenario::Baseline).unwrap();
    assert_eq!(base.welfare, tail_mean(&plain.column(|r| r.welfare)));
    assert_eq!(base.pollution, tail_mean(&plain.column(|r| r.pollution)));
    assert_eq!(base.ipi, tail_mean(&plain.column(|r| r.ipi)));
    assert_eq!(base.d_welfare, 0.0);
    assert_eq!(rep.records[0].rows, plain.rows);
}

#[test]
fn frozen_platform_without_low_quality_reach_does_not_grow_low_output() {
    let mut p = ModelParams::default();
    for (k, v) in [("platform.gamma_l0", "0"), ("platform.lr_gamma", "0"), ("platform.lr_mod", "0")] {
        p.set(k, v).unwrap();
    }
    let t = simulate(&p, p.policy_config(), 42, 0, 50, Vec::new()).unwrap();
    for pair in t.windows(2) {
        assert!(pair[1].q_l <= pair[0].q_l + 1e-9, "tick {}: {} > {}", pair[1].tick, pair[1].q_l, pair[0].q_l);
    }
}

#[test]
fn baseline_settles_into_a_quasi_steady_state() {
    let rec = run_baseline(&cfg(ExperimentId::Baseline, 150)).unwrap();
    let ipi = rec.column(|r| r.ipi);
    for w in ipi[ipi.len() - 20..].windows(2) {
        assert!((w[1] - w[0]).abs() < 0.02);
    }
}

#[test]
fn cheaper_ai_raises_low_quality_output_across_seeds() {
    for seed in [1, 2, 3, 4, 5] {
        let run = |r: f64| {
            let mut p = ModelParams::default();
            p.prices.ai_rental = r;
            let t = simulate(&p, p.policy_config(), seed, 0, 60, Vec::new()).unwrap();
            let q: Vec<f64> = t.iter().map(|x| x.q_l).collect();
            let rho: Vec<f64> = t.iter().map(|x| x.pollution).collect();
            (tail_mean(&q), tail_mean(&rho))
        };
        let (cheap, dear) = (run(0.6), run(1.4));
        assert!(cheap.0 > dear.0, "seed {seed}: {cheap:?} vs {dear:?}");
        assert!(cheap.1 > dear.1, "seed {seed}: {cheap:?} vs {dear:?}");
    }
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, Just(0.0), Just(1e-300), Just(-2.5e-17)]
}

fn row() -> impl Strategy<Value = RunRow> {
    (
        prop::collection::vec(finite(), 16),
        prop_oneof![Just(String::new()), "[a-z_+]{1,20}"],
    )
        .prop_map(|(x, event)| RunRow {
            tick: 0,
            q_h: x[0],
            q_l: x[1],
            pollution: x[2],
            verify_rate: x[3],
            precision: x[4],
            trust: x[5],
            welfare: x[6],
            i1: x[7],
            i2: x[8],
            i3: x[9],
            i4: x[10],
            ipi: x[11],
            tau: x[12],
            gamma_h: x[13],
            gamma_l: x[14],
            m: x[15],
            event,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_record_survives_a_csv_round_trip(rows in prop::collection::vec(row(), 0..40)) {
        let rows: Vec<RunRow> = rows
            .into_iter()
            .enumerate()
            .map(|(i, mut r)| { r.tick = i + 1; r })
            .collect();
        let mut buf = Vec::new();
        write_rows(&rows, &mut buf).unwrap();
        let back = read_rows(buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &rows);
        prop_assert_eq!(summary_stats(&back), summary_stats(&rows));
    }
}
