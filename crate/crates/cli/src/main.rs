//! `gptd`: perfect discrimination of product pure states in restricted
//! measurement classes.
//!
//! Exit codes: 0 success, 1 input error, 2 condition not satisfied,
//! 3 impossible at this parameter, 4 verification failure.

mod commands;
mod exit;
mod state_file;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gptd_core::ClassParameter;

use crate::exit::Failure;

#[derive(Debug, Parser)]
#[command(name = "gptd", version, about = "Product-state discrimination beyond POVMs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the sufficient condition and emit a verified measurement.
    Discriminate {
        /// JSON state file with dA, dB, a1, b1, a2, b2.
        states: PathBuf,
        #[command(flatten)]
        class: ClassArgs,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimal number of copies of two states with overlap c.
    MinCopies {
        #[arg(long)]
        overlap: f64,
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long, default_value_t = gptd_core::multicopy::DEFAULT_COPY_CAP)]
        cap: u64,
    },
    /// Boundary of the feasible (x, y) region as CSV.
    Region {
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a measurement against two product states.
    Verify {
        /// Certificate, discriminate output, or bare result JSON.
        #[arg(long)]
        measurement: PathBuf,
        #[arg(long)]
        states: PathBuf,
        #[command(flatten)]
        class: ClassArgs,
    },
    /// Randomized end-to-end audit, one JSON line per instance.
    Audit {
        #[arg(long)]
        count: u64,
        #[arg(long, env = "GPTD_SEED", default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ClassKind {
    Ms,
    Mks,
}

#[derive(Debug, Args)]
struct ClassArgs {
    #[arg(long, value_enum)]
    class: ClassKind,
    /// Negativity bound for `ms`, in [0, 1/2].
    #[arg(long, conflicts_with = "t")]
    s: Option<f64>,
    /// Cone parameter for `mks`, in [0, 1].
    #[arg(long)]
    t: Option<f64>,
}

impl ClassArgs {
    fn resolve(&self) -> Result<ClassParameter, Failure> {
        match (self.class, self.s, self.t) {
            (ClassKind::Ms, Some(s), None) => Ok(ClassParameter::ms(s)?),
            (ClassKind::Mks, None, Some(t)) => Ok(ClassParameter::mks(t)?),
            (ClassKind::Ms, _, _) => Err(Failure::input("--class ms takes --s")),
            (ClassKind::Mks, _, _) => Err(Failure::input("--class mks takes --t")),
        }
    }
}

fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Discriminate { states, class, out } => {
            commands::discriminate(&states, class.resolve()?, out.as_deref())
        }
        Command::MinCopies { overlap, class, cap } => commands::min_copies(overlap, class.resolve()?, cap),
        Command::Region { class, grid, out } => commands::region(class.resolve()?, grid, out.as_deref()),
        Command::Verify {
            measurement,
            states,
            class,
        } => commands::verify(&measurement, &states, class.resolve()?),
        Command::Audit { count, seed, out } => commands::audit(count, seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT_ERROR } else { exit::SUCCESS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    };
    ExitCode::from(code as u8)
}
