use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use todalab_core::experiment::{run, ExperimentConfig, ExperimentKind};
use todalab_core::Result;

const VERBS: [&str; 10] = [
    "run",
    "toda-t1",
    "qr-halting",
    "cg-halting",
    "universality-compare",
    "theorem1",
    "conditions",
    "lattice-shock",
    "lattice-driven",
    "fredholm-grid",
];

/// Seeded random-matrix, halting-time, lattice and Fredholm experiments.
///
/// The verb selects the experiment; `run` takes the kind from the config
/// file. Flags override the corresponding config keys.
#[derive(Debug, Parser)]
#[command(name = "todalab", version)]
struct Cli {
    #[arg(value_parser = VERBS)]
    verb: String,
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match (&cli.config, cli.verb.as_str()) {
        (Some(path), verb) => {
            let cfg = ExperimentConfig::parse(&std::fs::read_to_string(path)?)?;
            if verb != "run" && cfg.kind != verb.parse::<ExperimentKind>()? {
                return Err(todalab_core::Error::Config(format!(
                    "config kind '{}' does not match verb '{verb}'",
                    cfg.kind
                )));
            }
            cfg
        }
        (None, "run") => {
            return Err(todalab_core::Error::Config("'run' needs --config".into()));
        }
        (None, verb) => ExperimentConfig::new(verb.parse()?),
    };
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = &cli.out {
        cfg.out = v.clone();
    }
    if let Some(v) = cli.workers {
        cfg.workers = v;
    }
    if let Some(v) = cli.n {
        cfg.n = v;
    }
    if let Some(v) = cli.eps {
        cfg.epsilon = v;
    }
    if let Some(v) = cli.samples {
        cfg.samples = v;
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| todalab_core::Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match build_config(&cli).and_then(|cfg| run(&cfg)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    println!("{} config_hash={}", report.kind, report.config_hash);
    for (k, v) in &report.summary {
        println!("  {k} = {v}");
    }
    println!("  skipped_samples = {}", report.skipped_samples);
    for c in &report.checks {
        println!("  [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for f in &report.files {
        println!("  wrote {}", f.display());
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
