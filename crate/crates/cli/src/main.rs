//! `exasp` command-line driver.

mod commands;
mod config;

use std::path::Path;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{merged_table, resolve, Settings};

#[derive(Parser)]
#[command(name = "exasp", version, about = "Excited-state adiabatic preparation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate along the pathway; writes `<output>.csv` and `<output>.json`.
    Run(Settings),
    /// Runs the cross product of up to two swept keys; writes `<output>.csv`.
    Sweep(Settings),
    /// Eigenvalues along the pathway; writes `<output>.csv`.
    Spectrum(Settings),
    /// Optimizes a tUPS ground state; writes the checkpoint `<output>.json`.
    GroundState(Settings),
    /// Emits the Trotter circuit; writes `<output>.qasm`.
    EmitCircuit(Settings),
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(s) => {
            let cfg = resolve(&s)?;
            let (trace, summary) = commands::run(&cfg)?;
            write(&cfg.output_path("csv"), &trace.to_csv_string())?;
            write(&cfg.output_path("json"), &serde_json::to_string_pretty(&summary)?)?;
            println!(
                "fidelity {:.6} (post-selected {:.6}, p0 {:.6})",
                summary.fidelity.fid_raw, summary.fidelity.fid_postselected, summary.fidelity.p0
            );
        }
        Command::Sweep(s) => {
            let table = merged_table(&s, |k| std::env::var(k).ok())?;
            let cfg = config::from_table(table.clone())?;
            let csv = commands::sweep(&table, cfg.workers)?;
            write(&cfg.output_path("csv"), &csv)?;
        }
        Command::Spectrum(s) => {
            let cfg = resolve(&s)?;
            write(&cfg.output_path("csv"), &commands::spectrum(&cfg)?)?;
        }
        Command::GroundState(s) => {
            let cfg = resolve(&s)?;
            let ckpt = commands::ground_state(&cfg)?;
            let path = cfg.output_path("json");
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            ckpt.save(&path)?;
            println!("wrote {}", path.display());
            match (ckpt.exact_energy, ckpt.fidelity) {
                (Some(e), Some(f)) => {
                    println!("energy {:.10} (exact {e:.10}, infidelity {:.3e})", ckpt.energy, 1.0 - f)
                }
                _ => println!("energy {:.10}", ckpt.energy),
            }
        }
        Command::EmitCircuit(s) => {
            let cfg = resolve(&s)?;
            let circuit = commands::emit_circuit(&cfg)?;
            write(&cfg.output_path("qasm"), &commands::qasm(&circuit))?;
            println!("{} gates, {} CX", circuit.len(), circuit.cx_count());
        }
    }
    Ok(())
}
