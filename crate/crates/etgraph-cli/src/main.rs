//! Command-line entry point binding the library modules: matrix and
//! graph construction, operator assembly, determinant identity checks,
//! closed-form and direct spectra, orbit counts, ensemble statistics,
//! and the numerical ET feasibility search.
//!
//! Conventions: exit 0 on success, 2 on validation failures, 3 on
//! numerical non-convergence; errors go to stderr as one-line JSON;
//! every stochastic subcommand takes an explicit `--seed`; file outputs
//! are written atomically.

mod commands;
mod io;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

use commands::StatsConfig;

#[derive(Parser)]
#[command(
    name = "etgraph",
    version,
    about = "Quantum graphs without back-scattering: constructions, spectra, and statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum FamilyArg {
    Neumann,
    Fourier,
    EtHadamard,
    EtCharacter,
    EtFive,
    EtSearch,
    /// First available ET construction for each valency.
    Et,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum GraphKind {
    Complete,
    Regular,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
#[value(rename_all = "UPPER")]
pub enum OperatorArg {
    U,
    M,
    W,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum SpectrumMethod {
    Theorem,
    Direct,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum StatsEmit {
    Ps,
    Vl,
    Both,
}

/// Reflection-probability selector: a named family or a bare number.
#[derive(Clone, Debug)]
pub enum RMode {
    Et,
    Fourier,
    Neumann,
    Value(f64),
}

fn parse_rmode(s: &str) -> Result<RMode, String> {
    match s {
        "et" => Ok(RMode::Et),
        "fourier" => Ok(RMode::Fourier),
        "neumann" => Ok(RMode::Neumann),
        other => other
            .parse::<f64>()
            .map(RMode::Value)
            .map_err(|_| format!("expected et, fourier, neumann, or a number; got '{other}'")),
    }
}

#[derive(Args)]
pub struct ConstructArgs {
    /// Scattering family to build.
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Matrix dimension (vertex valency). Optional when the family
    /// implies it: et-five is 5x5 and et-character has dimension P + 1.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Character modulus P (et-character only; defaults to dim - 1).
    #[arg(long)]
    pub prime: Option<u64>,
    /// Character exponent index m in [1, P-2] (defaults to the Legendre
    /// character).
    #[arg(long)]
    pub char_index: Option<u64>,
    /// RNG seed (required by et-search).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Iteration budget for et-search.
    #[arg(long, default_value_t = 5000)]
    pub max_iters: usize,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a single vertex scattering matrix (JSON).
    Construct(ConstructArgs),
    /// Generate a graph description (JSON).
    Graph {
        #[arg(long, value_enum)]
        kind: GraphKind,
        /// Vertex count.
        #[arg(long = "V")]
        vertices: usize,
        /// Valency (regular graphs).
        #[arg(long = "v")]
        valency: Option<usize>,
        /// RNG seed (required for random regular graphs).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Connectivity eigenvalues, descending (CSV `index,mu`).
    GraphSpectrum {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble a bond operator (JSON).
    Quantize {
        #[arg(long)]
        graph: PathBuf,
        /// Scattering family (required for U and M; W is family-free).
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        /// Which operator to emit.
        #[arg(long, value_enum)]
        emit: OperatorArg,
        /// RNG seed for the bond phases (required for U).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Determinant identity residuals on a circle of sample points
    /// (CSV `re_u,im_u,residual`).
    BassCheck {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classical spectrum of M (CSV `re,im,source`).
    Spectrum {
        #[arg(long)]
        graph: PathBuf,
        /// et, fourier, neumann, or a numeric reflection probability.
        #[arg(long, value_parser = parse_rmode)]
        r: RMode,
        /// theorem (closed form), direct (dense solve), or both.
        #[arg(long, value_enum, default_value = "theorem")]
        method: SpectrumMethod,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gap comparison across families (CSV `family,r,gap,condition_flags`).
    Gaps {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed non-backtracking walk counts (CSV `n,trace_Wn`).
    Orbits {
        #[arg(long)]
        graph: PathBuf,
        /// Largest walk length.
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random-phase ensemble statistics; writes ps.csv / vl.csv /
    /// summary.json into --out.
    Stats {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        realizations: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "both")]
        emit: StatsEmit,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (defaults to all cores; results are identical
        /// for any value).
        #[arg(long)]
        jobs: Option<usize>,
        /// Spacing histogram bins.
        #[arg(long, default_value_t = 50)]
        bins: usize,
        /// Spacing histogram upper edge.
        #[arg(long, default_value_t = 4.0)]
        smax: f64,
        /// Largest number-variance window.
        #[arg(long, default_value_t = 8.0)]
        lmax: f64,
    },
    /// Numerical ET feasibility search (JSON report; exit 3 when the
    /// best residual stays above the convergence bound).
    Search {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5000)]
        max_iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(command: Command) -> etgraph::Result<()> {
    match command {
        Command::Construct(args) => {
            let text = commands::construct(&args)?;
            io::emit(args.out.as_deref(), &text)
        }
        Command::Graph {
            kind,
            vertices,
            valency,
            seed,
            out,
        } => {
            let text = commands::graph_cmd(kind, vertices, valency, seed)?;
            io::emit(out.as_deref(), &text)
        }
        Command::GraphSpectrum { graph, out } => {
            let text = commands::graph_spectrum(&graph)?;
            io::emit(out.as_deref(), &text)
        }
        Command::Quantize {
            graph,
            family,
            emit,
            seed,
            out,
        } => {
            let text = commands::quantize(&graph, family, emit, seed)?;
            io::emit(out.as_deref(), &text)
        }
        Command::BassCheck { graph, samples, out } => {
            let text = commands::bass_check(&graph, samples)?;
            io::emit(out.as_deref(), &text)
        }
        Command::Spectrum {
            graph,
            r,
            method,
            out,
        } => {
            let text = commands::spectrum(&graph, &r, method)?;
            io::emit(out.as_deref(), &text)
        }
        Command::Gaps { graph, out } => {
            let text = commands::gaps(&graph)?;
            io::emit(out.as_deref(), &text)
        }
        Command::Orbits { graph, nmax, out } => {
            let text = commands::orbits(&graph, nmax)?;
            io::emit(out.as_deref(), &text)
        }
        Command::Stats {
            graph,
            family,
            realizations,
            seed,
            emit,
            out,
            jobs,
            bins,
            smax,
            lmax,
        } => {
            if jobs == Some(0) {
                return Err(etgraph::Error::InvalidArgument(
                    "--jobs must be at least 1".into(),
                ));
            }
            commands::stats(&StatsConfig {
                graph,
                family,
                realizations,
                seed,
                emit,
                out_dir: out,
                jobs,
                bins,
                s_max: smax,
                l_max: lmax,
            })
        }
        Command::Search {
            dim,
            seed,
            max_iters,
            out,
        } => commands::search(dim, seed, max_iters, out.as_deref()),
    }
}

fn main() {
    // Single-threaded BLAS keeps eigensolves bitwise reproducible; the
    // --jobs flag parallelizes across realizations instead.
    std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    std::env::set_var("OMP_NUM_THREADS", "1");
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("{}", io::error_json(&e));
        std::process::exit(io::exit_code(&e));
    }
}
