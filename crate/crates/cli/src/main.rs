//! `srdt` — batch front end for the secure rate-distortion toolkit.
//!
//! Subcommands evaluate equivocation regions, regenerate figure data, run
//! finite-blocklength coding experiments, perform exact Fourier-Motzkin
//! eliminations, and check the hypergeometric counting law. All outputs are
//! deterministic given the config and seed.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod fmt;

#[derive(Parser)]
#[command(name = "srdt", version, about = "secure rate-distortion toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate region membership, corner points, or boundary sweeps.
    Region {
        /// JSON run configuration.
        #[arg(long)]
        config: std::path::PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: std::path::PathBuf,
        /// Guard: must match the configured model when given.
        #[arg(long)]
        model: Option<String>,
        /// Override the configured crossover probability.
        #[arg(long)]
        p: Option<f64>,
        /// Override the witness-search seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Emit the numeric data behind a named figure.
    Figure {
        /// One of fig6, fig7, fig9.
        #[arg(long)]
        name: String,
        /// Source crossover probability.
        #[arg(long)]
        p: f64,
        /// Distortion budget (fig6 only).
        #[arg(long)]
        d1: Option<f64>,
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Run a finite-blocklength coding experiment.
    Simulate {
        /// JSON experiment configuration.
        #[arg(long)]
        config: std::path::PathBuf,
        /// Output JSON path (config echo + report).
        #[arg(long)]
        out: std::path::PathBuf,
        /// Optional CSV row output.
        #[arg(long)]
        csv: Option<std::path::PathBuf>,
        /// Override the configured blocklength.
        #[arg(long)]
        n: Option<usize>,
        /// Override the configured trial count.
        #[arg(long)]
        trials: Option<u64>,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Project an inequality system and optionally check equivalence.
    Fme {
        /// System file path or bundled name (eq92.sys, eq114.sys, eq147.sys,
        /// eq14.sys, eq115.sys, thm5.sys).
        #[arg(long)]
        system: String,
        /// Comma-separated variables to project out, in order.
        #[arg(long)]
        project: Option<String>,
        /// Write the resulting system here.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        /// Compare the result against this system file or bundled name.
        #[arg(long)]
        check: Option<String>,
        /// Constant-assignment samples for the equivalence check.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sample the encoding-set counting law and print its moments.
    Lemma1 {
        /// Population size N.
        #[arg(long)]
        population: u64,
        /// Marked count B.
        #[arg(long)]
        marked: u64,
        /// Draws K.
        #[arg(long)]
        draws: u64,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional per-trial CSV output.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Region {
            config,
            out,
            model,
            p,
            seed,
        } => commands::region(&config, &out, model.as_deref(), p, seed),
        Command::Figure { name, p, d1, out } => commands::figure(&name, p, d1, &out),
        Command::Simulate {
            config,
            out,
            csv,
            n,
            trials,
            seed,
        } => commands::simulate(&config, &out, csv.as_deref(), n, trials, seed),
        Command::Fme {
            system,
            project,
            out,
            check,
            samples,
            seed,
        } => commands::fme(
            &system,
            project.as_deref(),
            out.as_deref(),
            check.as_deref(),
            samples,
            seed,
        ),
        Command::Lemma1 {
            population,
            marked,
            draws,
            epsilon,
            trials,
            seed,
            out,
        } => commands::lemma1(population, marked, draws, epsilon, trials, seed, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
