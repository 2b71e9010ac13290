use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use infopol::harness::{self, ExperimentConfig, ExperimentId};
use infopol::Error;

/// Information-market simulator: run the experiments and report results.
///
/// Any model parameter can be set with a dotted flag such as
/// `--platform.theta 0.3` or `--prices.ai_rental=0.8`.
#[derive(Debug, Parser)]
#[command(name = "infopol", version)]
struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default `results/<experiment>`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Simulation horizon in ticks.
    #[arg(long, global = true)]
    ticks: Option<usize>,
    /// Worker threads for parallel cells.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Parameter override `KEY=VALUE`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Baseline run.
    #[command(alias = "run")]
    Baseline,
    /// Four exogenous shocks and the IPI response.
    Shocks,
    /// IPI-welfare correlation under alternative weights.
    WeightSensitivity,
    /// Proxy IPI error under measurement noise.
    NoiseRobustness,
    /// Fake-news burst detection and lead-lag analysis.
    EventDetection,
    /// Final IPI and welfare across platform environments.
    CrossPlatform,
    /// AI rental rate by low-quality elasticity grid.
    Sweep,
    /// The six policy scenarios.
    PolicyComparison,
    /// Max-min policy choice over candidate worlds.
    RobustSelect,
    /// Resolve and check a configuration without running it.
    ValidateConfig {
        /// Experiment whose defaults apply.
        #[arg(long, default_value = "baseline")]
        experiment: String,
    },
    /// Print the summary of an output directory.
    Report { dir: PathBuf },
}

type Dotted = Vec<(String, String)>;

/// Pull `--section.key[=value]` flags out of the argument list.
fn split_dotted(args: Vec<String>) -> Result<(Vec<String>, Dotted), String> {
    let mut rest = Vec::new();
    let mut dotted = Vec::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let Some(flag) = a.strip_prefix("--") else {
            rest.push(a);
            continue;
        };
        let (name, inline) = match flag.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (flag.to_string(), None),
        };
        if !name.contains('.') {
            rest.push(a);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it.next().ok_or_else(|| format!("--{name} needs a value"))?,
        };
        dotted.push((name, value));
    }
    Ok((rest, dotted))
}

fn resolve(cli: &Cli, id: ExperimentId, dotted: &[(String, String)]) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::new(id);
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k, v)?;
    }
    for (k, v) in dotted {
        cfg.set(k, v)?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.ticks {
        cfg.ticks = t;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exit_for(e: &Error) -> ExitCode {
    if e.is_convergence_failure() {
        ExitCode::from(3)
    } else if e.is_config_error() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let (args, dotted) = match split_dotted(std::env::args().collect()) {
        Ok(x) => x,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    let id = match &cli.command {
        Command::Baseline => ExperimentId::Baseline,
        Command::Shocks => ExperimentId::Shocks,
        Command::WeightSensitivity => ExperimentId::WeightSensitivity,
        Command::NoiseRobustness => ExperimentId::NoiseRobustness,
        Command::EventDetection => ExperimentId::EventDetection,
        Command::CrossPlatform => ExperimentId::CrossPlatform,
        Command::Sweep => ExperimentId::Sweep,
        Command::PolicyComparison => ExperimentId::PolicyComparison,
        Command::RobustSelect => ExperimentId::RobustSelect,
        Command::ValidateConfig { experiment } => {
            return match experiment.parse().and_then(|id| resolve(&cli, id, &dotted)) {
                Ok(cfg) => {
                    print!("{}", cfg.resolved());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            };
        }
        Command::Report { dir } => {
            return match harness::report(dir) {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_for(&e)
                }
            };
        }
    };
    let result = resolve(&cli, id, &dotted).and_then(|cfg| harness::execute(&cfg));
    match result {
        Ok(out) => {
            print!("{}", out.summary_text);
            println!("wrote {} files to {}", out.files.len(), out.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn dotted_flags_are_split_out() {
        let (rest, dotted) =
            split_dotted(v(&["infopol", "--seed", "7", "--platform.theta", "0.3", "sweep", "--prices.ai_rental=0.8"]))
                .unwrap();
        assert_eq!(rest, v(&["infopol", "--seed", "7", "sweep"]));
        assert_eq!(
            dotted,
            vec![
                ("platform.theta".to_string(), "0.3".to_string()),
                ("prices.ai_rental".to_string(), "0.8".to_string())
            ]
        );
        assert!(split_dotted(v(&["infopol", "--platform.theta"])).is_err());
    }
}
