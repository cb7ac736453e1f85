use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cfd_qec::code::{
    build_code_with, build_generator, overhead_qubits, verify_kl, CouplingVector, LogicalCode,
    PhaseConvention,
};
use cfd_qec::channel::superoperator_distance;
use cfd_qec::error::{Error, Result};
use cfd_qec::experiments::{
    find_pseudothreshold, log_spaced, miscalibration_study, sweep, Strategy,
};
use cfd_qec::two_qubit::{abstract_recovery, build_two_qubit_code, circuit_description, circuit_recovery};

#[derive(Parser)]
#[command(
    name = "cfd-qec",
    about = "Hardware-efficient codes for common-fluctuator dephasing: construction, verification, and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a code for the given couplings and write it as JSON.
    BuildCode {
        /// Comma-separated couplings, qubit 1 first.
        #[arg(long)]
        g: String,
        /// Free phase knob (two-qubit codes only).
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value = "code.json")]
        out: String,
    },
    /// Check a stored code against the correctability conditions.
    Verify {
        #[arg(long)]
        code: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Monte Carlo sweep of mean logical error probability over sigma.
    Sweep {
        /// Comma-separated strategy names, e.g. physical,rep3,he2.
        #[arg(
            long,
            default_value = "physical,repetition-3,repetition-5,hardware-efficient-2,hardware-efficient-3"
        )]
        strategies: String,
        #[arg(long, default_value_t = 0.02)]
        sigma_min: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma_max: f64,
        #[arg(long, default_value_t = 24)]
        sigma_points: usize,
        #[arg(long, default_value_t = 1000)]
        g_samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "results.csv")]
        out: String,
        /// Also write a long-format CSV for plotting tools.
        #[arg(long)]
        plot_data: Option<String>,
    },
    /// Crossing of the code's mean-p curve with the physical-qubit curve.
    Pseudothreshold {
        /// Register size of the hardware-efficient code.
        #[arg(long)]
        n: usize,
        /// Comma-separated sigma bracket, e.g. 0.1,0.9.
        #[arg(long, default_value = "0.05,0.9")]
        bracket: String,
        #[arg(long, default_value_t = 200)]
        g_samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Mean p of codes built from randomly miscalibrated couplings.
    Miscalibrate {
        /// True couplings, comma-separated.
        #[arg(long)]
        g: String,
        /// Relative-error levels, comma-separated.
        #[arg(long, default_value = "0.0,0.05,0.1,0.2")]
        delta_grid: String,
        #[arg(long, default_value_t = 0.1)]
        sigma: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Compare the two-qubit gate-level recovery against the abstract one.
    CircuitCheck {
        /// Two couplings, comma-separated.
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Optional path for the gate-list JSON.
        #[arg(long)]
        out: Option<String>,
    },
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidCoupling(format!("cannot parse '{t}' as a number")))
        })
        .collect()
}

fn io_err(e: std::io::Error) -> Error {
    Error::Internal(e.to_string())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BuildCode { g, theta, out } => {
            let g = CouplingVector::new(parse_f64_list(&g)?)?;
            if theta != 0.0 && g.n() != 2 {
                return Err(Error::InvalidCoupling(
                    "the phase knob --theta applies to two-qubit codes only".into(),
                ));
            }
            let phases = if g.n() == 2 {
                PhaseConvention::TwoQubitTheta(theta)
            } else {
                PhaseConvention::Zero
            };
            let code = build_code_with(&g, phases)?;
            let gen = build_generator(&g);
            let report = verify_kl(&code, &gen, code.q, 1e-9);
            let doc = code.to_document();
            let json = serde_json::to_string_pretty(&doc)
                .map_err(|e| Error::Internal(e.to_string()))?;
            fs::write(&out, json).map_err(io_err)?;
            println!(
                "n = {}, q = {} (overhead {} qubit(s)), max correctability violation {:.3e}",
                code.n,
                code.q,
                overhead_qubits(code.q),
                report.max_violation
            );
            println!("wrote {out}");
            Ok(())
        }
        Command::Verify { code, tol } => {
            let text = fs::read_to_string(&code).map_err(io_err)?;
            let doc = serde_json::from_str(&text).map_err(|e| Error::Internal(e.to_string()))?;
            let code = LogicalCode::from_document(&doc)?;
            let gen = build_generator(&code.g);
            let report = verify_kl(&code, &gen, code.q, tol);
            println!(
                "max violation {:.6e} (tolerance {:.1e}): {}",
                report.max_violation,
                report.tol,
                if report.pass { "pass" } else { "FAIL" }
            );
            if report.pass {
                Ok(())
            } else {
                Err(Error::KlViolation {
                    max_violation: report.max_violation,
                    tol: report.tol,
                })
            }
        }
        Command::Sweep {
            strategies,
            sigma_min,
            sigma_max,
            sigma_points,
            g_samples,
            seed,
            out,
            plot_data,
        } => {
            let strategies: Vec<Strategy> = strategies
                .split(',')
                .map(Strategy::parse)
                .collect::<Result<_>>()?;
            let sigmas = log_spaced(sigma_min, sigma_max, sigma_points);
            let result = sweep(&strategies, &sigmas, g_samples, seed)?;
            fs::write(&out, result.to_csv()).map_err(io_err)?;
            println!(
                "wrote {} rows to {out} ({} degenerate coupling draws redrawn)",
                result.rows.len(),
                result.degenerate_redraws
            );
            if let Some(path) = plot_data {
                fs::write(&path, result.to_plot_csv()).map_err(io_err)?;
                println!("wrote plot data to {path}");
            }
            Ok(())
        }
        Command::Pseudothreshold {
            n,
            bracket,
            g_samples,
            seed,
        } => {
            let b = parse_f64_list(&bracket)?;
            if b.len() != 2 {
                return Err(Error::InvalidNoise(
                    "--bracket needs exactly two values".into(),
                ));
            }
            let strategy = Strategy::HardwareEfficient(n);
            strategy.validate()?;
            let sigma = find_pseudothreshold(&strategy, g_samples, seed, (b[0], b[1]))?;
            println!("pseudothreshold sigma* = {sigma:.6} for {}", strategy.name());
            Ok(())
        }
        Command::Miscalibrate {
            g,
            delta_grid,
            sigma,
            samples,
            seed,
        } => {
            let g = parse_f64_list(&g)?;
            let deltas = parse_f64_list(&delta_grid)?;
            let rows = miscalibration_study(&g, &deltas, sigma, samples, seed)?;
            println!("delta,mean_p,sem_p");
            for r in rows {
                println!("{:.16e},{:.16e},{:.16e}", r.delta, r.mean_p, r.sem_p);
            }
            Ok(())
        }
        Command::CircuitCheck { g, theta, tol, out } => {
            let g = CouplingVector::new(parse_f64_list(&g)?)?;
            let code = build_two_qubit_code(&g, theta)?;
            let circuit = circuit_recovery(&code)?;
            let abstract_rec = abstract_recovery(&code)?;
            let dist = superoperator_distance(&circuit, &abstract_rec)?;
            println!("superoperator distance circuit vs abstract: {dist:.3e}");
            if let Some(path) = out {
                let json = serde_json::to_string_pretty(&circuit_description(&code))
                    .map_err(|e| Error::Internal(e.to_string()))?;
                fs::write(&path, json).map_err(io_err)?;
                println!("wrote gate list to {path}");
            }
            if dist < tol {
                Ok(())
            } else {
                Err(Error::InvalidChannel(format!(
                    "circuit deviates from abstract recovery by {dist:.3e} (tolerance {tol:.1e})"
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
