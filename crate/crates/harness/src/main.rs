use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use corrarms::model::{make_lower_bound_instance, make_prime_instance};
use corrarms::objective::log_bar;
use corrarms_harness::{
    compare, compare_estimators, run_experiment, verify_bounds, AlgorithmSpec, CapsConfig, ExperimentConfig,
    HarnessError, InstanceSpec, Truth,
};

#[derive(Parser)]
#[command(name = "corrarms", version, about = "Find the h most correlated Gaussian arms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write CSV records plus a JSON summary.
    Run(RunArgs),
    /// Write a lower-bound family instance as JSON.
    GenInstance(GenArgs),
    /// Tabulate estimator MSEs over a (rho, t) grid.
    CompareEstimators(CompareArgs),
    /// Run a named bound-verification suite.
    VerifyBounds {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print S*, every ratio, H_C and loḡ(K/h) for an instance file.
    Describe {
        #[arg(long)]
        instance: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Naive,
    SrC,
    SeC,
    PhiStar,
    OracleMode,
}

#[derive(Clone, Copy, ValueEnum)]
enum TruthArg {
    Null,
    Alternative,
}

#[derive(Args)]
struct RunArgs {
    /// TOML or JSON experiment file; the flags below are ignored when given,
    /// except --out, --trials and --seed, which override the file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Instance JSON file (see gen-instance).
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, value_enum)]
    algo: Option<Algo>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Vector count for naive.
    #[arg(long)]
    m: Option<u64>,
    /// Sample budget for sr_c and oracle_mode.
    #[arg(long)]
    n: Option<u64>,
    /// Confidence for se_c.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    rho0: Option<f64>,
    #[arg(long)]
    rho1: Option<f64>,
    /// Pair count for phi_star.
    #[arg(long)]
    t: Option<u64>,
    #[arg(long, value_enum, default_value = "null")]
    truth: TruthArg,
    /// Sample cap for se_c.
    #[arg(long)]
    max_samples: Option<u64>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "lower-bound")]
    family: String,
    /// ρ_h, ρ_{h+1}, …, ρ_K
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    rhos: Vec<f64>,
    #[arg(long)]
    h: usize,
    /// Emit the perturbed twin instead.
    #[arg(long)]
    prime: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = vec![0.0, 0.5, 0.9, 0.99])]
    rhos: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = vec![10, 100, 1000])]
    ts: Vec<u64>,
    #[arg(long, default_value_t = 1000)]
    replications: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn missing(what: &str) -> HarnessError {
    HarnessError::Validation(format!("--{what} is required"))
}

fn build_config(a: RunArgs) -> Result<ExperimentConfig, HarnessError> {
    let mut config = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let algo = a.algo.ok_or_else(|| missing("algo"))?;
            let algorithm = match algo {
                Algo::Naive => AlgorithmSpec::Naive { m: a.m.ok_or_else(|| missing("m"))? },
                Algo::SrC => AlgorithmSpec::SrC { n: a.n.ok_or_else(|| missing("n"))? },
                Algo::OracleMode => AlgorithmSpec::OracleMode { n: a.n.ok_or_else(|| missing("n"))? },
                Algo::SeC => AlgorithmSpec::SeC { delta: a.delta.ok_or_else(|| missing("delta"))? },
                Algo::PhiStar => AlgorithmSpec::PhiStar {
                    rho0: a.rho0.ok_or_else(|| missing("rho0"))?,
                    rho1: a.rho1.ok_or_else(|| missing("rho1"))?,
                    t: a.t.ok_or_else(|| missing("t"))?,
                    truth: match a.truth {
                        TruthArg::Null => Truth::Null,
                        TruthArg::Alternative => Truth::Alternative,
                    },
                },
            };
            let mut caps = CapsConfig::default();
            if let Some(cap) = a.max_samples {
                caps.max_samples = cap;
            }
            ExperimentConfig {
                instance: a.instance.clone().map(|path| InstanceSpec::File { path }),
                algorithm,
                trials: 1,
                seed: 0,
                output: None,
                caps,
            }
        }
    };
    if let Some(t) = a.trials {
        config.trials = t;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if a.out.is_some() {
        config.output = a.out;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<bool, HarnessError> {
    match cli.command {
        Command::Run(args) => {
            let config = build_config(args)?;
            let report = run_experiment(&config)?;
            let s = &report.summary;
            println!(
                "{}: {} trials, {} errors (freq {:.4}, 95% CI [{:.4}, {:.4}]), mean samples {:.1}",
                s.algorithm, s.trials, s.errors, s.error_frequency, s.error_ci.low, s.error_ci.high, s.mean_total_samples
            );
            if let Some(out) = &config.output {
                let json = report.write(out)?;
                println!("wrote {} and {}", out.display(), json.display());
            }
        }
        Command::GenInstance(g) => {
            if g.family != "lower-bound" {
                return Err(HarnessError::Validation(format!("unknown family '{}'", g.family)));
            }
            let inst = make_lower_bound_instance(&g.rhos, g.h)?;
            let file = if g.prime { make_prime_instance(&inst)?.to_file() } else { inst.to_file() };
            match g.out {
                Some(path) => file.write(&path).map_err(|e| match e {
                    corrarms::ModelError::Io(io) => HarnessError::io(&path, io),
                    other => other.into(),
                })?,
                None => println!("{}", serde_json::to_string_pretty(&file)?),
            }
        }
        Command::CompareEstimators(c) => {
            let rows = compare_estimators(&c.rhos, &c.ts, c.replications, c.seed)?;
            match c.out {
                Some(path) => compare::write_rows(&rows, &path)?,
                None => {
                    println!("rho,t,mse_difference,mse_classical,ratio");
                    for r in rows {
                        println!("{},{},{:.6e},{:.6e},{:.4}", r.rho, r.t, r.mse_difference, r.mse_classical, r.ratio);
                    }
                }
            }
        }
        Command::VerifyBounds { suite, seed, json } => {
            let report = verify_bounds(&suite, seed)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                for c in &report.checks {
                    println!("{c}");
                }
                println!("{}: {}", report.suite, if report.passed() { "pass" } else { "FAIL" });
            }
            return Ok(report.passed());
        }
        Command::Describe { instance } => {
            let inst = InstanceSpec::File { path: instance }.build()?;
            println!("K = {}, h = {}", inst.dim(), inst.h());
            println!("S* = {:?}", inst.optimal_subset());
            for (i, r) in inst.ratios().iter().enumerate() {
                println!("R[{i}] = {r}");
            }
            println!("H_C = {}", inst.complexity());
            println!("logbar(K/h) = {}", log_bar(inst.dim(), inst.h()));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
