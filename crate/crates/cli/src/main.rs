// `!(x > 0.0)` style checks are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jacobi_tree::graph::{parse_graph, FiniteGraph, JacobiParams};
use jacobi_tree::models::Model;

use report::Format;

/// Periodic Jacobi matrices on universal-cover trees: spectra, gaps,
/// Green's functions.
#[derive(Parser, Debug)]
#[command(name = "jtree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a graph file and print its structural data.
    Validate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        output: Output,
    },
    /// Top eigenvalue and positive eigenvector of the finite matrix.
    Perron {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        output: Output,
    },
    /// Bands and point masses of the tree operator. CSV output is the
    /// density grid (x, density, eps_used).
    Spectrum {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Gap between the finite top eigenvalue and the top of the tree spectrum.
    GapReport {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Two-sided gap bounds from a comparison parameter set on the same graph.
    GapBounds {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        tilde: TildeSource,
        /// Reference gap of the comparison parameters [default: closed form
        /// when known, otherwise a scan]
        #[arg(long)]
        reference: Option<f64>,
        /// Bound the lower gap of a bipartite graph instead.
        #[arg(long)]
        minus: bool,
        /// Also estimate the gap by a scan and test it against the bounds.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Diagonal Green's function at every vertex (or one).
    Green {
        #[command(flatten)]
        source: Source,
        /// Energy `re,im` or `re` (real energies must lie above the top
        /// eigenvalue in absolute value)
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: num_complex::Complex64,
        /// Vertex id [default: all vertices]
        #[arg(long)]
        vertex: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Density of states on a grid.
    Dos {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Zero-energy eigenfunction checks for the (r,g) model.
    RgVerify {
        r: usize,
        g: usize,
        /// Depth K of the norm partial sum.
        #[arg(long, default_value_t = 30)]
        depth: usize,
        /// Depth K of the ball used for the Hu = 0 check (radius 2K).
        #[arg(long, default_value_t = 4)]
        hu_depth: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Top eigenvalue of the tree operator restricted to balls of growing radius.
    BallEig {
        #[command(flatten)]
        source: Source,
        /// Largest radius.
        #[arg(long, default_value_t = 8)]
        radius: usize,
        /// Base vertex id [default: first vertex]
        #[arg(long)]
        base: Option<String>,
        /// Node budget per ball.
        #[arg(long, default_value_t = 5_000_000)]
        budget: usize,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Graph file
    graph: Option<PathBuf>,
    /// Built-in model: free:d, rg:r,g, altb:b, cube, petersen, complete:n
    #[arg(long)]
    model: Option<Model>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct TildeSource {
    /// Graph file with the comparison parameters
    #[arg(long)]
    tilde: Option<PathBuf>,
    /// Built-in model with the comparison parameters
    #[arg(long)]
    tilde_model: Option<Model>,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Energy window `lo,hi` [default: -σ-1,σ+1]
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    range: Option<(f64, f64)>,
    /// Number of grid points.
    #[arg(long, default_value_t = 801)]
    resolution: usize,
    /// Broadenings; the two smallest are extrapolated to zero.
    #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4")]
    eps: Vec<f64>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Broadening at which band membership is decided.
    #[arg(long, default_value_t = 1e-12)]
    edge_eps: f64,
    /// Density above which a point belongs to a band.
    #[arg(long, default_value_t = 1e-6)]
    threshold: f64,
    /// Band-edge bisection tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args, Debug)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write to a file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("`{a}`: {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("`{b}`: {e}"))?;
    if !(lo < hi) {
        return Err(format!("need lo < hi, got {lo},{hi}"));
    }
    Ok((lo, hi))
}

fn parse_complex(s: &str) -> Result<num_complex::Complex64, String> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let re: f64 = re.trim().parse().map_err(|e| format!("`{re}`: {e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("`{im}`: {e}"))?;
    Ok(num_complex::Complex64::new(re, im))
}

#[derive(Debug)]
pub enum CliError {
    Core(jacobi_tree::Error),
    /// Bad input that is not a core error: unreadable file, bad flag value.
    Input(String),
}

impl From<jacobi_tree::Error> for CliError {
    fn from(e: jacobi_tree::Error) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(s) => f.write_str(s),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if !e.is_validation() => 2,
            _ => 1,
        }
    }
}

fn load(
    graph: &Option<PathBuf>,
    model: &Option<Model>,
) -> Result<(FiniteGraph, JacobiParams), CliError> {
    match (graph, model) {
        (_, Some(m)) => Ok(m.build()?),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read `{}`: {e}", path.display())))?;
            Ok(parse_graph(&text)?)
        }
        (None, None) => Err(CliError::Input("give a graph file or --model".into())),
    }
}

fn emit(tables: &[report::Table], output: &Output) -> Result<(), CliError> {
    let text = report::render(tables, output.format);
    match &output.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write `{}`: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    use commands as c;
    match cli.command {
        Command::Validate { source, output } => {
            let (g, params) = load(&source.graph, &source.model)?;
            emit(&c::validate(&g, &params), &output)
        }
        Command::Perron { source, output } => {
            let (g, params) = load(&source.graph, &source.model)?;
            emit(&c::perron(&g, &params)?, &output)
        }
        Command::Spectrum {
            source,
            scan,
            output,
        } => {
            let (g, params) = load(&source.graph, &source.model)?;
            let cfg = scan.config()?;
            emit(&c::spectrum(&g, &params, &cfg, output.format)?, &output)
        }
        Command::GapReport {
            source,
            scan,
            output,
        } => {
            let (g, params) = load(&source.graph, &source.model)?;
            emit(&c::gap_report(&g, &params, &scan.config()?)?, &output)
        }
        Command::GapBounds {
            source,
            tilde,
            reference,
            minus,
            check,
            scan,
            output,
        } => {
            let (g, params) = load(&source.graph, &source.model)?;
            let (gt, tilde) = load(&tilde.tilde, &tilde.tilde_model)?;
            if gt != g {
                return Err(CliError::Input(
                    "comparison graph must have the same vertices and edges as the graph".into(),
                ));
            }
            let opts = c::BoundsOptions {
                reference,
                minus,
                check,
                scan: scan.config()?,
            };
            emit(&c::gap_bounds(&g, &params, &tilde, &opts)?, &output)
        }
        Command::Green {
            source,
            z,
            vertex,
            output,
        } => {
            let (g, params) = load(&source.graph, &source.model)?;
            emit(&c::green(&g, &params, z, vertex.as_deref())?, &output)
        }
        Command::Dos {
            source,
            grid,
            output,
        } => {
            let (g, params) = load(&source.graph, &source.model)?;
            grid.check()?;
            emit(
                &c::dos(&g, &params, grid.range, grid.resolution, &grid.eps)?,
                &output,
            )
        }
        Command::RgVerify {
            r,
            g,
            depth,
            hu_depth,
            output,
        } => emit(&c::rg_verify(r, g, depth, hu_depth)?, &output),
        Command::BallEig {
            source,
            radius,
            base,
            budget,
            output,
        } => {
            let (g, params) = load(&source.graph, &source.model)?;
            emit(
                &c::ball_eig(&g, &params, radius, base.as_deref(), budget)?,
                &output,
            )
        }
    }
}

impl GridArgs {
    fn check(&self) -> Result<(), CliError> {
        if self.resolution < 10 {
            return Err(CliError::Input(format!(
                "--resolution must be at least 10, got {}",
                self.resolution
            )));
        }
        if self.eps.is_empty() || self.eps.iter().any(|&e| !(e > 0.0)) {
            return Err(CliError::Input("--eps values must be positive".into()));
        }
        Ok(())
    }
}

impl ScanArgs {
    fn config(&self) -> Result<jacobi_tree::mfunction::ScanConfig, CliError> {
        self.grid.check()?;
        if self.grid.eps.len() < 2 {
            return Err(CliError::Input(
                "--eps needs at least two broadenings for a scan".into(),
            ));
        }
        for (name, x) in [
            ("--edge-eps", self.edge_eps),
            ("--threshold", self.threshold),
            ("--tol", self.tol),
        ] {
            if !(x > 0.0) {
                return Err(CliError::Input(format!("{name} must be positive, got {x}")));
            }
        }
        Ok(jacobi_tree::mfunction::ScanConfig {
            range: self.grid.range,
            resolution: self.grid.resolution,
            eps: self.grid.eps.clone(),
            edge_eps: self.edge_eps,
            band_threshold: self.threshold,
            bisection_tol: self.tol,
            ..Default::default()
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
