use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use photon_position::{Constants, Gauge, Vec3R, C64};

mod commands;
mod output;
mod verify;

#[derive(Parser, Debug)]
#[command(name = "photon-position", version, about = "Photon position operator toolkit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Triad gauge: stereo-north, spherical or stereo-south (or 1, 2, 3).
    #[arg(long, global = true, default_value = "stereo-north", value_parser = parse_gauge_name)]
    pub gauge: String,
    /// Weight exponent s of the scalar product.
    #[arg(long, global = true, default_value_t = 0.5)]
    pub s: f64,
    /// Seed for random sampling.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Relative tolerance for adaptive integration (command default when absent).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; 1 gives byte-stable output.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Inject a known fault into `verify`.
    #[arg(long, global = true, value_enum)]
    pub fault: Option<Fault>,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub c: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Replace the position operator by Pryce's.
    Pryce,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormArg {
    Printed,
    Amended,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the invariant suite and report each check.
    Verify,
    /// Energy density of a position eigenfunction on an angular grid.
    EigenDensity {
        /// Distance |x − X|.
        #[arg(long = "distance", default_value_t = 1.0)]
        distance: f64,
        /// Coefficient c1 as `re` or `re,im`.
        #[arg(long, default_value = "1", value_parser = parse_complex)]
        c1: C64,
        #[arg(long, default_value = "0", value_parser = parse_complex)]
        c2: C64,
        #[arg(long, default_value_t = 37)]
        n_theta: usize,
        #[arg(long, default_value_t = 72)]
        n_phi: usize,
        /// Cells with |θ₁ − π/2| below this are skipped.
        #[arg(long, default_value_t = 0.02)]
        margin: f64,
        #[arg(long, value_enum, default_value = "printed")]
        form: FormArg,
    },
    /// Loop phase and parallel transport for a loop given as JSON.
    Berry {
        /// Loop spec as JSON text, or `@path` to read it from a file.
        #[arg(long = "loop")]
        spec: String,
    },
    /// Triad, helicity coefficient and connection matrices at a momentum.
    Frame {
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        k: Vec3R,
    },
    /// Phase-space image of the position operator.
    Phasespace {
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        p: Vec3R,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        x: Vec3R,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Single component (0-based); all three when absent.
        #[arg(long)]
        l: Option<usize>,
    },
}

fn parse_gauge_name(s: &str) -> Result<String, String> {
    Gauge::from_name(s)
        .map(|g| g.name().to_string())
        .ok_or_else(|| format!("unknown gauge `{s}` (expected stereo-north, spherical or stereo-south)"))
}

fn parse_vec3(s: &str) -> Result<Vec3R, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got `{s}`"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| format!("bad number `{p}`"))?;
    }
    Ok(Vec3R(v))
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|_| format!("bad number `{p}`"));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re` or `re,im`, got `{s}`")),
    }
}

/// Failure of a command, mapped to the process exit status.
pub enum Failure {
    /// Invariant check failed (status 1); the report was still written.
    Invariant,
    /// Usage or domain error (status 2).
    Usage(String),
}

impl From<photon_position::Error> for Failure {
    fn from(e: photon_position::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Output produced by a command.
pub struct Rendered {
    pub text: String,
    pub failed: bool,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    if !g.s.is_finite() {
        return Err(Failure::Usage(format!("s must be finite, got {}", g.s)));
    }
    if let Some(t) = g.tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(Failure::Usage(format!("tol must lie in (0, 1), got {t}")));
        }
    }
    let constants = Constants::new(g.hbar, g.c)?;
    if let Some(n) = g.threads {
        if n == 0 {
            return Err(Failure::Usage("threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let gauge = Gauge::from_name(&g.gauge).expect("validated by the parser");
    let rendered = match cli.command {
        Command::Verify => verify::run(g, &gauge, &constants)?,
        Command::EigenDensity {
            distance,
            c1,
            c2,
            n_theta,
            n_phi,
            margin,
            form,
        } => commands::eigen_density(g, &constants, distance, c1, c2, n_theta, n_phi, margin, form)?,
        Command::Berry { spec } => commands::berry(g, &spec)?,
        Command::Frame { k } => commands::frame(g, &gauge, k)?,
        Command::Phasespace { p, x, m, n, l } => commands::phasespace(g, &gauge, &constants, p, x, m, n, l)?,
    };
    match &g.out {
        Some(path) => std::fs::write(path, &rendered.text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(rendered.text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Usage(e.to_string()))?;
        }
    }
    if rendered.failed {
        Err(Failure::Invariant)
    } else {
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invariant) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
