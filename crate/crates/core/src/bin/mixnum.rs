//! Command-line front end for the experiment runner.
//!
//! Exit status: 0 on success, 1 when a check fails or a run errors, 2 for a
//! configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mixnum::experiment::{cmd_ber_sweep, cmd_export_matrix, cmd_papr, cmd_verify};
use mixnum::{Error, ExperimentSpec, PreEqMode, Session};

#[derive(Parser)]
#[command(name = "mixnum", version, about = "Mixed-numerology edge-interference simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the coupling model and pre-equalizer against the reference chain.
    Verify(Common),
    /// BER versus Eb/N0 for each numerology.
    Ber(Common),
    /// PAPR CCDF with and without pre-equalization.
    Papr(Common),
    /// Write W and its inverse as CSV and binary.
    ExportMatrix(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment file; the reference configuration when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, conflicts_with_all = ["no_preeq", "both"])]
    preeq: bool,
    #[arg(long, conflicts_with = "both")]
    no_preeq: bool,
    #[arg(long)]
    both: bool,
}

impl Common {
    fn session(&self) -> Result<Session, Error> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::load(path)?,
            None => ExperimentSpec::nr_reference(),
        };
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(out) = &self.out {
            spec.out_dir = out.clone();
        }
        if self.preeq {
            spec.preeq = PreEqMode::On;
        } else if self.no_preeq {
            spec.preeq = PreEqMode::Off;
        } else if self.both {
            spec.preeq = PreEqMode::Both;
        }
        Session::new(spec, self.threads)
    }
}

fn run(command: &Command) -> Result<bool, Error> {
    let (Command::Verify(c) | Command::Ber(c) | Command::Papr(c) | Command::ExportMatrix(c)) = command;
    let session = c.session()?;
    let out = session.spec().out_dir.clone();
    match command {
        Command::Verify(_) => {
            let report = cmd_verify(&session, &out)?;
            print!("{}", report.render(session.config()));
            Ok(report.passed())
        }
        Command::Ber(_) => {
            let arms = session.spec().preeq.arms();
            for row in cmd_ber_sweep(&session, &arms, &out)? {
                println!(
                    "{:<10} {:<4} {:>6.1} dB  bits={:<10} errors={:<8} ber={:.3e}",
                    row.experiment, row.numerology, row.ebn0_db, row.bits, row.errors, row.ber
                );
            }
            println!("wrote {}", out.join("ber.csv").display());
            Ok(true)
        }
        Command::Papr(_) => {
            let samples = cmd_papr(&session, &out)?;
            let (pre, plain) = samples.levels_at(1e-2)?;
            println!("PAPR at CCDF 1e-2: pre-equalized {pre:.2} dB, plain {plain:.2} dB");
            println!("wrote {}", out.join("papr.csv").display());
            Ok(true)
        }
        Command::ExportMatrix(_) => {
            let paths = cmd_export_matrix(&session, &out)?;
            println!("condition number {:e}", session.model()?.condition());
            for p in [&paths.w_csv, &paths.w_bin, &paths.inverse_csv, &paths.inverse_bin, &paths.header] {
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::Config(_)) => {
            eprintln!("mixnum: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("mixnum: {e}");
            ExitCode::from(1)
        }
    }
}
