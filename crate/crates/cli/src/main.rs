mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use percbound::{Family, Orientation};

#[derive(Parser)]
#[command(name = "percbound", version, about = "Upper bounds and simulations for percolation thresholds on Z^d")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one bound and print it as JSON with its provenance.
    Bounds {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long)]
        d: usize,
        /// Force a method (thm1, thm2.1, ..., registry, fold) instead of the default choice.
        #[arg(long)]
        method: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Bounds for all four families over a range of dimensions.
    Table {
        #[arg(long, default_value_t = 3)]
        d_min: usize,
        #[arg(long, default_value_t = 9)]
        d_max: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        out: Output,
    },
    /// Monte Carlo estimates on Z^d.
    Simulate {
        #[command(subcommand)]
        what: Simulation,
    },
    /// Run a coupling, validate it and optionally dump step traces.
    Couple(CoupleArgs),
    /// Check a trace file or the table against the published values.
    Verify {
        #[command(subcommand)]
        what: Verification,
    },
}

#[derive(Subcommand)]
enum Simulation {
    /// Probability that the origin cluster reaches the boundary of a box.
    Survival {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 20)]
        radius: u32,
        #[arg(long, default_value_t = 1000)]
        replicas: usize,
        #[arg(long, value_enum, default_value_t = EventArg::BoundaryHit)]
        event: EventArg,
        #[command(flatten)]
        seed: Seed,
        #[command(flatten)]
        out: Output,
    },
    /// Left-right crossing probability on a grid of p (non-oriented only).
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        p_min: f64,
        #[arg(long)]
        p_max: f64,
        #[arg(long, default_value_t = 21)]
        points: usize,
        #[arg(long, default_value_t = 16)]
        radius: u32,
        #[arg(long, default_value_t = 1000)]
        replicas: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        seed: Seed,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum Verification {
    /// Consistency of a JSON-lines trace written by `couple --trace`.
    Trace { path: PathBuf },
    /// Recompute dimensions 3..=9 and compare with the published table.
    Table {
        #[arg(long, default_value_t = 2e-4)]
        tolerance: f64,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long)]
    d: usize,
}

#[derive(Args)]
struct Seed {
    #[arg(long, env = "PERCBOUND_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CoupleArgs {
    #[arg(long, value_enum)]
    kind: CouplingKind,
    /// Target dimension (edge-split, vertex-split, fold).
    #[arg(long)]
    d: Option<usize>,
    /// Source dimension for fold; must divide d.
    #[arg(long)]
    k: Option<usize>,
    /// One value, or three comma-separated values for the triangular lattice.
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<f64>,
    #[arg(long, default_value_t = false)]
    oriented: bool,
    #[arg(long, default_value_t = 1000)]
    replicas: usize,
    #[arg(long, default_value_t = 1000)]
    step_cap: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,5,10,25,50")]
    sizes: Vec<usize>,
    /// Event resolutions for calibration; 0 skips it.
    #[arg(long, default_value_t = 100_000)]
    resolutions: usize,
    /// JSON-lines trace of the first `--traces` replicas.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    traces: u64,
    #[command(flatten)]
    seed: Seed,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum EventArg {
    BoundaryHit,
    OneArm,
}

#[derive(Clone, Copy, ValueEnum)]
enum CouplingKind {
    Triangular,
    EdgeSplit,
    VertexSplit,
    Fold,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e| format!("{e}"))
}

impl CoupleArgs {
    fn orientation(&self) -> Orientation {
        if self.oriented {
            Orientation::Oriented
        } else {
            Orientation::NonOriented
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
