use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dcl_core::harness::{run_experiment, run_identity_suite, write_report, ExperimentConfig, ExperimentReport};
use dcl_core::Error;

#[derive(Parser)]
#[command(name = "dcl", version, about = "Discrete conformal map laboratory on acute triangular lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence sweep described by a config file
    Run {
        /// Path to a flat key-value config file
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate the identity-residual suite for a config file
    Identities {
        /// Path to a flat key-value config file
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the built-in demo sweep (exp on an equilateral lattice)
    Demo,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config } => load_config(&config).and_then(|cfg| run(&cfg, false)),
        Command::Identities { config } => load_config(&config).and_then(|cfg| run(&cfg, true)),
        Command::Demo => run(&ExperimentConfig::demo(), false),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            // configuration and geometry problems are distinguished from
            // numerical failures inside a level
            match e {
                Error::InvalidConfig(_)
                | Error::NonAcuteAngles { .. }
                | Error::NonPositiveEpsilon(_)
                | Error::NotADisc(_)
                | Error::NoInteriorOrigin
                | Error::Io(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::parse(&text)
}

fn run(config: &ExperimentConfig, identities: bool) -> Result<ExitCode, Error> {
    let report = if identities {
        run_identity_suite(config)?
    } else {
        run_experiment(config)?
    };
    print_report(&report, identities);
    if let Some(dir) = &config.out {
        write_report(&report, dir)?;
        println!("wrote report.csv and plots to {}", dir.display());
    }
    if report.failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}

fn print_report(report: &ExperimentReport, identities: bool) {
    for r in &report.rows {
        if identities {
            println!(
                "eps {:.6}  vertices {}  flower {:.3e}  phi/psi/theta {:.3e}  dlap {:.3e}  contact {:.3e}",
                r.epsilon, r.vertices, r.flower_res_max, r.phi_res_max, r.dlap_s_res_max, r.contact_res_max
            );
        } else {
            println!(
                "eps {:.6}  vertices {}  newton {}  residual {:.3e}  err_u {:.3e}  err_f {:.3e}  err_s {:.3e}/{:.3e}/{:.3e}",
                r.epsilon,
                r.vertices,
                r.newton_iters,
                r.max_angle_residual,
                r.err_u_max,
                r.err_f_pl_max,
                r.err_s_max[0],
                r.err_s_max[1],
                r.err_s_max[2]
            );
        }
    }
    for (eps, e) in &report.failures {
        eprintln!("level eps {eps:.6} failed: {e}");
    }
    if !identities {
        let show = |name: &str, s: Option<f64>| match s {
            Some(v) => println!("order {name}: {v:.3}"),
            None => println!("order {name}: exact (errors at rounding level)"),
        };
        show("u", report.slope_u);
        show("f", report.slope_f);
        for (i, s) in report.slope_s.iter().enumerate() {
            show(&format!("s{}", i + 1), *s);
        }
    }
}
