use std::fs;
use std::process::{Command, Output};

fn infopol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infopol")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_config_prints_every_resolved_key() {
    let o = infopol(&["validate-config"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("run.seed = 42"));
    assert!(text.contains("run.ticks = 150"));
    assert!(text.contains("platform.theta = 0.25"));
    assert!(text.contains("shocks.trust_tick = 130"));
}

#[test]
fn later_sources_override_earlier_ones() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.conf");
    fs::write(&file, "# test\nplatform.theta = 0.3\nrun.seed = 9\nprices.wage = 6\n").unwrap();
    let o = infopol(&[
        "--config",
        file.to_str().unwrap(),
        "--set",
        "platform.theta=0.35",
        "--platform.ad_rate",
        "5",
        "--seed",
        "11",
        "validate-config",
        "--experiment",
        "sweep",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("# experiment: sweep"));
    assert!(text.contains("run.ticks = 120"));
    assert!(text.contains("platform.theta = 0.35"));
    assert!(text.contains("platform.ad_rate = 5"));
    assert!(text.contains("prices.wage = 6"));
    assert!(text.contains("run.seed = 11"));
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        &["--set", "platform.nonsense=1", "validate-config"][..],
        &["--set", "platform.theta=abc", "baseline"],
        &["--platform.theta", "1.5", "baseline"],
        &["--seed", "0", "baseline"],
        &["--set", "novalue", "baseline"],
        &["validate-config", "--experiment", "nope"],
        &["--config", "/nonexistent/file.conf", "baseline"],
    ] {
        let o = infopol(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn convergence_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = infopol(&[
        "--out",
        dir.path().to_str().unwrap(),
        "--ticks",
        "3",
        "--signal.max_iter",
        "1",
        "--signal.tolerance",
        "1e-15",
        "baseline",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn baseline_run_writes_its_outputs_and_report_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let o = infopol(&["--out", out.to_str().unwrap(), "--ticks", "25", "--jobs", "2", "run"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["run.csv", "ipi.dat", "welfare.dat", "config.txt", "summary.txt", "summary.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let csv = fs::read_to_string(out.join("run.csv")).unwrap();
    assert_eq!(csv.lines().count(), 26);
    let json = fs::read_to_string(out.join("summary.json")).unwrap();
    assert!(json.starts_with('{') && json.contains("\"experiment\""));

    let r = infopol(&["report", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0));
    assert!(stdout(&r).contains("corr(ipi, welfare)"));

    let missing = infopol(&["report", dir.path().join("absent").to_str().unwrap()]);
    assert_ne!(missing.status.code(), Some(0));
}

