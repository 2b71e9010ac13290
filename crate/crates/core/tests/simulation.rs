use infopol::harness::{log_params, simulate};
use infopol::ipi::{dim_pollution, proxy_exposure, synthesize_log, LogContext};
use infopol::market::{cell_rng, ShockEvent, ShockKind};
use infopol::params::ModelParams;
use infopol::PlatformState;

fn small() -> ModelParams {
    let mut p = ModelParams::default();
    p.agents.n_producers = 40;
    p.agents.n_consumers = 100;
    p
}

#[test]
fn noiseless_exposure_proxy_matches_the_pollution_dimension() {
    let p = small();
    let ticks = simulate(&p, p.policy_config(), 42, 0, 40, Vec::new()).unwrap();
    let lp = log_params(&p);
    let mut rng = cell_rng(42, 1 << 20);
    for t in &ticks {
        let platform = PlatformState::new(
            t.gamma_h,
            t.gamma_l,
            t.m,
            p.platform.theta,
            p.platform.ad_rate,
            p.platform.lr_gamma,
            p.platform.lr_mod,
            0.0,
            p.platform.gamma_max,
        )
        .unwrap();
        let ctx = LogContext {
            undetected_share: t.undetected_share,
            trust_decay: t.dims[2],
            tech_risk: t.dims[3],
        };
        let log = synthesize_log(&t.market_state(), &platform, &ctx, &lp, 0.0, &mut rng);
        let proxy = proxy_exposure(&log).value;
        let theory = dim_pollution(t.q_h, t.q_l, &platform);
        assert!((proxy - theory).abs() < 1e-9, "tick {}: {proxy} vs {theory}", t.tick);
    }
}

fn one_shock(kind: ShockKind, magnitude: f64) -> (Vec<infopol::market::TickRecord>, Vec<infopol::market::TickRecord>) {
    let p = small();
    let plain = simulate(&p, p.policy_config(), 42, 0, 30, Vec::new()).unwrap();
    let shocked = simulate(&p, p.policy_config(), 42, 0, 30, vec![ShockEvent { tick: 20, kind, magnitude }]).unwrap();
    (plain, shocked)
}

#[test]
fn cost_drop_lowers_the_rental_for_the_shock_duration() {
    let (plain, shocked) = one_shock(ShockKind::CostDrop, 0.5);
    let d = small().shocks.duration;
    for (a, b) in plain.iter().zip(&shocked) {
        let expect = if (20..20 + d).contains(&a.tick) { 0.5 * a.ai_rental } else { a.ai_rental };
        assert!((b.ai_rental - expect).abs() < 1e-12, "tick {}", a.tick);
    }
    assert_eq!(shocked[19].event, "cost_drop");
    assert!(shocked[19].q_l > plain[19].q_l);
}

#[test]
fn capability_jump_scales_generation_capability() {
    let (plain, shocked) = one_shock(ShockKind::CapabilityJump, 2.0);
    assert_eq!(plain[18].cap_gen, shocked[18].cap_gen);
    assert!((shocked[19].cap_gen / plain[19].cap_gen - 3.0).abs() < 1e-12);
    assert!(shocked[19].dims[3] > plain[19].dims[3]);
}

#[test]
fn fake_news_burst_adds_temporary_low_quality_output() {
    let (plain, shocked) = one_shock(ShockKind::FakeNewsBurst, 0.5);
    let p = small();
    let extra = 0.5 * p.agents.n_producers as f64;
    assert!(shocked[19].q_l - plain[19].q_l >= 0.9 * extra);
    let after = 20 + p.shocks.duration - 1;
    assert!(shocked[after].q_l - plain[after].q_l < 0.5 * extra);
}

#[test]
fn trust_shock_cuts_the_trust_stock() {
    let (plain, shocked) = one_shock(ShockKind::TrustShock, 0.3);
    assert!(plain[19].trust - shocked[19].trust > 0.2);
    assert!(shocked[29].trust > shocked[19].trust);
}

#[test]
fn sampled_supply_runs_and_is_reproducible() {
    let mut p = small();
    p.set("agents.supply_mode", "sampled").unwrap();
    let a = simulate(&p, p.policy_config(), 7, 3, 20, Vec::new()).unwrap();
    let b = simulate(&p, p.policy_config(), 7, 3, 20, Vec::new()).unwrap();
    assert_eq!(a, b);
    let c = simulate(&p, p.policy_config(), 7, 4, 20, Vec::new()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn run_rows_respect_their_bounds() {
    let p = small();
    let ticks = simulate(&p, p.policy_config(), 42, 0, 60, Vec::new()).unwrap();
    for (i, t) in ticks.iter().enumerate() {
        assert_eq!(t.tick, i + 1);
        assert!((0.0..=1.0).contains(&t.pollution));
        assert!((0.0..=p.trust.t_max).contains(&t.trust));
        assert!((0.0..=1.0).contains(&t.verify_rate));
        assert!(t.dims.iter().all(|d| (0.0..=1.0).contains(d)));
        assert!((0.0..=1.0).contains(&t.ipi));
        assert!(t.gamma_l >= 0.0 && t.gamma_l <= p.platform.gamma_max);
        assert!((0.0..=1.0).contains(&t.m));
    }
}
