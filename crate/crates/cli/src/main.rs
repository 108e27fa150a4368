mod commands;
mod grid;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracparts::Error;

#[derive(Parser, Debug)]
#[command(name = "fracparts", version, about = "Reciprocal sums of fractional parts and their lattice counts")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
    /// Number of enumeration chunks. Output never depends on it.
    #[arg(long, global = true, default_value_t = 8)]
    pub chunks: usize,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 128)]
    pub start_bits: u32,
    #[arg(long, global = true, env = "FRACPARTS_MAX_BITS", default_value_t = 4096)]
    pub max_bits: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rigorous enclosure of the sum of 1/‖alpha·q‖ over a box.
    Sum {
        #[arg(long)]
        alpha: String,
        /// Cube half-width.
        #[arg(long, conflicts_with = "radii", required_unless_present = "radii")]
        q: Option<String>,
        /// Comma-separated per-axis half-widths.
        #[arg(long)]
        radii: Option<String>,
    },
    /// Size of M(alpha, eps, Q).
    Count {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        q: String,
    },
    /// Brute-force recount of M(alpha, eps, Q) over all (p, q).
    Oracle {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        q: String,
    },
    /// Breakpoints of the empirical phi function.
    Phi {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        qmax: String,
    },
    /// Dyadic shell counts and the sandwich check against the sum.
    Profile {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        q: String,
    },
    /// The q_i realizing 1/‖alpha·q_i‖ = Q_i^N / phi(Q_i).
    Sharpness {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        qmax: String,
    },
    /// Closed-form bound catalog at one (N, Q, phi).
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: String,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        phi_2q: Option<String>,
    },
    #[command(subcommand)]
    Verify(Verify),
}

#[derive(Subcommand, Debug)]
pub enum Verify {
    /// Counting error against (eps Q^N / phi(Q))^{N/(N+1)} over a grid.
    Prop {
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value = "1/2:1/256:1/2")]
        eps_grid: String,
        /// Default 16:1024:2 for N = 1, 16:256:2 otherwise.
        #[arg(long)]
        q_grid: Option<String>,
    },
    /// Ratios of the sum to the two-sided estimate over a grid of Q.
    Theorem {
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value = "16:4096:2")]
        q_grid: String,
    },
    /// Separation of the values ‖alpha·q‖ against phi(2Q)/(2Q)^N.
    Gap {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        q_grid: String,
        #[arg(long, default_value_t = 10_000_000)]
        cap: u64,
    },
    /// Shell differences |M(2^-k)| - |M(2^-k-1)| >= 2^-k Q^N for k in [1, K-1].
    Shells {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        q: String,
        /// Defaults to twice the max ratio of `verify prop` on its default grid.
        #[arg(long)]
        c_n: Option<String>,
    },
    /// Widmer's counting error term on the lattice of alpha.
    Widmer {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        q: String,
        /// Values of B; defaults to Q.
        #[arg(long)]
        b_grid: Option<String>,
    },
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::PrecisionExhausted { .. } => 2,
        Error::Resonance(_) => 3,
        Error::Invariant(_) => 5,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
