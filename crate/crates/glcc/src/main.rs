use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use glcc::config::{parse_mode, ExperimentConfig};
use glcc::dataset::{synthetic, TrainingDataset};
use glcc::demo::run_demo;
use glcc::mltrain::{default_training_dims, write_history, TrainConfig, TrainMode, Trainer};
use glcc::sim::{run_campaign, SimConfig};
use glcc::verify::{run_suite, SUITES};
use glcc_core::glcc::DomainLayout;
use log::info;

#[derive(Parser)]
#[command(name = "glcc", version, about = "Coded distributed polynomial evaluation: demo, benchmarks, training")]
struct Cli {
    /// Experiment file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for artifacts.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// `all-or-nothing` or `streaming`; overrides the config file.
    #[arg(long, global = true)]
    mode: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Walk through a small round over F_97 and print every step.
    Demo {
        /// Four inputs to square.
        #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 3, 4])]
        inputs: Vec<u64>,
        /// Worker whose responses are replaced with garbage.
        #[arg(long)]
        corrupt: Option<usize>,
    },
    /// Run built-in self-checks and print a JSON report.
    Verify {
        /// Comma-separated suites: field, poly, glcc, privacy, train, or all.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        suite: Vec<String>,
    },
    /// Simulate every `[[config]]` of the experiment file.
    Bench {
        /// Overrides `rounds` from the config file.
        #[arg(long)]
        rounds: Option<usize>,
    },
    /// Train one perceptron per model with coded gradients.
    Train(TrainArgs),
    /// Write a synthetic training set as CSV.
    Synth {
        #[arg(long, default_value_t = 2)]
        models: usize,
        #[arg(long, default_value_t = 200)]
        rows: usize,
        #[arg(long, default_value_t = 8)]
        features: usize,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// CSV with a `label` column; a synthetic set is generated otherwise.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Number of models when neither the config nor the CSV says.
    #[arg(long, default_value_t = 2)]
    models: usize,
    /// Evaluate gradients directly instead of through the code.
    #[arg(long)]
    plaintext: bool,
    /// Overrides `iterations` from the config file.
    #[arg(long)]
    iterations: Option<usize>,
}

enum Failure {
    /// Bad input; exit code 2.
    Config(String),
    /// The run itself failed; exit code 1.
    Runtime(String),
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GLCC_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn load_config(cli: &Cli) -> Result<Option<ExperimentConfig>, Failure> {
    let Some(path) = &cli.config else { return Ok(None) };
    let mut cfg = ExperimentConfig::load(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    if let Some(m) = &cli.mode {
        cfg.sim.mode = parse_mode(m).ok_or_else(|| Failure::Config(format!("unknown mode {m:?}")))?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(Some(cfg))
}

fn output_dir(cli: &Cli, cfg: Option<&ExperimentConfig>, default: &str) -> Result<PathBuf, Failure> {
    let dir = cli.output.clone().or_else(|| cfg.and_then(|c| c.output.clone())).unwrap_or_else(|| default.into());
    fs::create_dir_all(&dir).map_err(|e| runtime_err(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| runtime_err(format!("{}: {e}", path.display())))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    if let Some(m) = &cli.mode {
        parse_mode(m).ok_or_else(|| Failure::Config(format!("unknown mode {m:?}")))?;
    }
    let cfg = load_config(&cli)?;
    let seed = cli.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0);
    match &cli.command {
        Command::Demo { inputs, corrupt } => {
            let xs: [u64; 4] = inputs.as_slice().try_into().map_err(|_| config_err("--inputs takes four values"))?;
            let report = run_demo(&xs, *corrupt, seed).map_err(config_err)?;
            for l in &report.lines {
                println!("{l}");
            }
            Ok(report.ok)
        }
        Command::Verify { suite } => {
            let names: Vec<&str> = if suite.iter().any(|s| s == "all") {
                SUITES.to_vec()
            } else {
                suite.iter().map(String::as_str).filter(|s| !s.is_empty()).collect()
            };
            if names.is_empty() {
                return Err(config_err("no suites selected"));
            }
            let mut reports = Vec::new();
            for n in names {
                let r = run_suite(n, seed).ok_or_else(|| {
                    Failure::Config(format!("unknown suite {n:?}; expected one of {SUITES:?} or all"))
                })?;
                info!("suite {} passed={} in {:.2}s", r.suite, r.passed, r.seconds);
                reports.push(r);
            }
            let ok = reports.iter().all(|r| r.passed);
            let json = serde_json::json!({ "passed": ok, "suites": reports });
            println!("{}", serde_json::to_string_pretty(&json).map_err(runtime_err)?);
            Ok(ok)
        }
        Command::Bench { rounds } => {
            let cfg = cfg.ok_or_else(|| config_err("bench needs --config"))?;
            if cfg.cases.is_empty() {
                return Err(config_err("the config file has no [[config]] entries"));
            }
            let rounds = rounds.unwrap_or(cfg.rounds);
            if rounds == 0 {
                return Err(config_err("--rounds must be at least 1"));
            }
            let dir = output_dir(&cli, Some(&cfg), "glcc-out")?;
            let result = run_campaign(&cfg.scenarios(), rounds, cfg.seed).map_err(runtime_err)?;
            let mut csv_out = csv::Writer::from_writer(Vec::new());
            for r in &result.rounds {
                csv_out.serialize(r).map_err(runtime_err)?;
            }
            write(&dir.join("rounds.csv"), &csv_out.into_inner().map_err(runtime_err)?)?;
            let summary = serde_json::json!({
                "seed": cfg.seed,
                "rounds": rounds,
                "field_q": cfg.modulus.value(),
                "program": cfg.program_desc,
                "sim": cfg.sim,
                "scenarios": result.summaries,
            });
            write(&dir.join("summary.json"), serde_json::to_string_pretty(&summary).map_err(runtime_err)?.as_bytes())?;
            println!(
                "{:<16} {:>4} {:>6} {:>6} {:>8} {:>10} {:>10}",
                "scenario", "K", "P_u", "P_d", "success", "mean", "p99"
            );
            let fmt = |v: Option<f64>| v.map_or("-".to_owned(), |v| format!("{v:.4}"));
            for s in &result.summaries {
                println!(
                    "{:<16} {:>4} {:>6} {:>6} {:>8.3} {:>10} {:>10}",
                    s.scenario,
                    s.threshold,
                    s.upload_cost,
                    s.download_cost,
                    s.success_rate,
                    fmt(s.mean_latency),
                    fmt(s.p99_latency)
                );
            }
            Ok(true)
        }
        Command::Train(args) => train_cmd(&cli, cfg.as_ref(), args, seed),
        Command::Synth { models, rows, features } => {
            if *models == 0 || *rows == 0 || *features == 0 {
                return Err(config_err("models, rows and features must be positive"));
            }
            let (ds, _) = synthetic(*models, *rows, *features, seed);
            let dir = output_dir(&cli, cfg.as_ref(), "glcc-out")?;
            let mut buf = Vec::new();
            ds.write(&mut buf).map_err(runtime_err)?;
            let path = dir.join("dataset.csv");
            write(&path, &buf)?;
            println!("{}", path.display());
            Ok(true)
        }
    }
}

fn train_cmd(cli: &Cli, cfg: Option<&ExperimentConfig>, args: &TrainArgs, seed: u64) -> Result<bool, Failure> {
    let dims = match cfg.and_then(|c| c.cases.first()) {
        Some(case) => case.dims,
        None => default_training_dims(args.models),
    };
    let dataset = match &args.dataset {
        Some(p) => {
            TrainingDataset::from_path(p, dims.inputs).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?
        }
        None => synthetic(dims.inputs, 200, 8, seed).0,
    };
    let mut tc = cfg.and_then(|c| c.train.clone()).unwrap_or_else(TrainConfig::synthetic_default);
    if args.plaintext {
        tc.mode = TrainMode::Plaintext;
    }
    if let Some(i) = args.iterations {
        tc.iterations = i;
    }
    let (layout, mut sim) = cfg.map_or((DomainLayout::Sequential, SimConfig::default()), |c| (c.layout, c.sim.clone()));
    if let Some(m) = &cli.mode {
        sim.mode = parse_mode(m).expect("checked");
    }
    let trainer = Trainer::new(&dataset, dims, layout, tc, sim, seed).map_err(config_err)?;
    let k = trainer.params().recovery_threshold();
    info!("training {} models on N={} workers, K={k}", dims.inputs, dims.workers);
    let outcome = trainer.run().map_err(runtime_err)?;
    let dir = output_dir(cli, cfg, "glcc-out")?;
    let mut buf = Vec::new();
    write_history(&outcome.history, &mut buf).map_err(runtime_err)?;
    write(&dir.join("history.csv"), &buf)?;
    let last = outcome.history.last();
    let accuracy = last.map_or(0.0, |h| h.accuracy);
    let weights = serde_json::json!({
        "features": dataset.feature_names,
        "weights": outcome.weights,
        "accuracy": accuracy,
        "loss": last.map_or(0.0, |h| h.loss),
        "max_quantization_gap": outcome.max_quantization_gap,
    });
    write(&dir.join("weights.json"), serde_json::to_string_pretty(&weights).map_err(runtime_err)?.as_bytes())?;
    println!("final accuracy {accuracy:.4} after {} iterations", outcome.history.len());
    Ok(true)
}
