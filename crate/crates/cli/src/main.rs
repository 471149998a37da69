mod config;
mod output;

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use conservo::harness::{compare_methods, convergence_study, integrate_decimated, registry, summarize};
use conservo::steppers::Method;

use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "conservo", version, about = "Conservative ODE integration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one experiment with one method and write trajectory, summary and defect CSVs.
    #[command(allow_negative_numbers = true)]
    Run(Overrides),
    /// Run several methods on one experiment and print a comparison table.
    #[command(allow_negative_numbers = true)]
    Table(Overrides),
    /// List registered experiments and methods.
    List,
    /// Observed order of accuracy over successive step halvings.
    #[command(allow_negative_numbers = true)]
    Convergence(Overrides),
}

const OK: u8 = 0;
const CONFIG_ERROR: u8 = 1;
const TRUNCATED: u8 = 2;

enum Failure {
    Config(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn prepare(cfg: &RunConfig) -> Result<(conservo::SystemSpec, Vec<f64>), Failure> {
    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Failure::Config(format!("output_dir: {}: {e}", cfg.output_dir.display())))?;
    cfg.experiment.build(cfg.seed, cfg.count).map_err(|e| Failure::Config(e.to_string()))
}

fn cmd_run(o: Overrides) -> Result<u8, Failure> {
    let cfg = o.resolve(true).map_err(Failure::Config)?;
    let (sys, x0) = prepare(&cfg)?;
    let e = &cfg.experiment;
    let traj = integrate_decimated(&sys, &cfg.stepper, &x0, e.t0, cfg.t_final, cfg.decimate)
        .map_err(|err| Failure::Config(err.to_string()))?;
    let report = summarize(&traj, &sys);
    let stem = format!("{}_{}", e.name, cfg.stepper.method.name());
    let dir = &cfg.output_dir;
    output::write_trajectory(&dir.join(format!("{stem}_traj.csv")), &traj, sys.dim())?;
    output::write_summary(&dir.join(format!("{stem}_summary.csv")), std::slice::from_ref(&report), sys.num_conserved())?;
    output::write_defects(&dir.join(format!("{stem}_defect.csv")), &traj, &sys)?;
    println!("{}", output::summary_header(sys.num_conserved()));
    println!("{}", output::summary_row(&report));
    match &traj.failure {
        Some(f) => {
            eprintln!("{stem}: truncated at step {} (t = {}): {}", f.step, f.t, f.error);
            Ok(TRUNCATED)
        }
        None => Ok(OK),
    }
}

fn cmd_table(o: Overrides) -> Result<u8, Failure> {
    let cfg = o.resolve(false).map_err(Failure::Config)?;
    let (sys, x0) = prepare(&cfg)?;
    let e = &cfg.experiment;
    let runs = compare_methods(&sys, &cfg.stepper, &cfg.methods, &x0, e.t0, cfg.t_final, usize::MAX);
    let mut reports = Vec::with_capacity(runs.len());
    for run in runs {
        reports.push(summarize(&run.map_err(|err| Failure::Config(err.to_string()))?, &sys));
    }
    let m = sys.num_conserved();
    println!(
        "{} (tau = {}, T = {}, delta = {:e}, epsilon = {:e}, K = {}; FPI counts corrector iterations only)",
        e.name, cfg.stepper.tau, cfg.t_final, cfg.stepper.delta, cfg.stepper.epsilon, cfg.stepper.max_iters
    );
    print!("{}", output::render_table(&reports, m));
    output::write_summary(&cfg.output_dir.join(format!("{}_table.csv", e.name)), &reports, m)?;
    Ok(OK)
}

fn cmd_convergence(o: Overrides) -> Result<u8, Failure> {
    let cfg = o.resolve(true).map_err(Failure::Config)?;
    let (sys, x0) = prepare(&cfg)?;
    let e = &cfg.experiment;
    let rows = convergence_study(&sys, &cfg.stepper, &x0, e.t0, cfg.t_final, cfg.halvings)
        .map_err(|err| Failure::Config(err.to_string()))?;
    let name = format!("{}_{}_convergence.csv", e.name, cfg.stepper.method.name());
    output::write_convergence(&cfg.output_dir.join(name), &rows)?;
    println!("{:>12}  {:>12}  {:>8}", "tau", "error", "order");
    for r in &rows {
        let order = r.observed_order.map_or("-".to_string(), |p| format!("{p:.3}"));
        println!("{:>12.4e}  {:>12.4e}  {:>8}", r.tau, r.error, order);
    }
    Ok(if rows.iter().any(|r| r.error.is_nan()) { TRUNCATED } else { OK })
}

fn cmd_list() -> u8 {
    println!("{:<14} {:>12} {:>12} {:>7} {:>7} {:>3}  description", "experiment", "tau", "T", "delta", "epsilon", "K");
    for e in registry() {
        println!(
            "{:<14} {:>12.6e} {:>12.6e} {:>7.0e} {:>7.0e} {:>3}  {}",
            e.name, e.tau, e.t_final, e.delta, e.epsilon, e.max_iters, e.description
        );
    }
    println!();
    println!("methods:");
    for m in Method::ALL {
        let note = if m.is_mn() { "" } else { " (baseline)" };
        println!("  {m}{note}");
    }
    println!();
    println!("base schemes: improved_euler (default), trapezoidal");
    OK
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { CONFIG_ERROR } else { OK });
        }
    };
    let result = match cli.command {
        Command::Run(o) => cmd_run(o),
        Command::Table(o) => cmd_table(o),
        Command::Convergence(o) => cmd_convergence(o),
        Command::List => Ok(cmd_list()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(CONFIG_ERROR)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(CONFIG_ERROR)
        }
    }
}
