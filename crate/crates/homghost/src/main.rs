//! `homghost` CLI. Exit codes: 0 success, 2 configuration error, 3 runtime
//! error. Flags override the corresponding config-file fields.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use homghost::config::{ExperimentConfig, ObjectSource, Pipeline, SpiralConfig};
use homghost::error::Error;
use homghost::runner;
use homghost::symmetry::verify_invariance;

#[derive(Parser)]
#[command(name = "homghost", version, about = "Ghost imaging with HOM-engineered biphoton states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one ghost-imaging sweep: reconstruction PGM + records CSV + sidecar
    Ghost(GhostArgs),
    /// Write a joint OAM spiral-bandwidth map (CSV + PGM heatmap)
    Spiral(SpiralArgs),
    /// Five-panel comparison: object, identity, rotated, HOM, delayed-path
    Summary(GhostArgs),
    /// Reconstruction frames from growing prefixes of a random-mask scan
    Animate(AnimateArgs),
    /// Check exchange-eigenvalue invariance under random U⊗U basis changes
    VerifySymmetry(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PipelineArg {
    NoBs,
    Hom,
    BsDelayed,
}

impl From<PipelineArg> for Pipeline {
    fn from(p: PipelineArg) -> Pipeline {
        match p {
            PipelineArg::NoBs => Pipeline::NoBs,
            PipelineArg::Hom => Pipeline::Hom,
            PipelineArg::BsDelayed => Pipeline::BsDelayed,
        }
    }
}

#[derive(Args)]
struct GhostArgs {
    /// JSON config file; omit to start from defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dove-prism half-angle θ in radians
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, value_enum)]
    pipeline: Option<PipelineArg>,
    /// Built-in object name (lambda, arrow, pi-symmetric-bar)
    #[arg(long, conflicts_with = "object_pgm")]
    object: Option<String>,
    /// Object from a PGM file (≥128 reads as white)
    #[arg(long)]
    object_pgm: Option<PathBuf>,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
    /// Detection RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Enable Poisson shot noise on the sampled counts
    #[arg(long)]
    poisson: bool,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads for the mask sweep (0 = library default)
    #[arg(long)]
    threads: Option<usize>,
}

impl GhostArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(theta) = self.theta {
            cfg.theta = theta;
        }
        if let Some(p) = self.pipeline {
            cfg.pipeline = p.into();
        }
        if let Some(name) = &self.object {
            cfg.object = ObjectSource::Builtin { name: name.clone() };
        }
        if let Some(path) = &self.object_pgm {
            cfg.object = ObjectSource::Pgm { path: path.clone() };
        }
        if let Some(w) = self.width {
            cfg.width = w;
        }
        if let Some(h) = self.height {
            cfg.height = h;
        }
        if let Some(seed) = self.seed {
            cfg.detection.seed = seed;
        }
        if self.poisson {
            cfg.detection.poisson = true;
        }
        if let Some(dir) = &self.output_dir {
            cfg.output_dir = dir.clone();
        }
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SpiralArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lmax: Option<i32>,
    /// Lorentzian spectrum width w in |a_ℓ|² ∝ 1/(1 + (ℓ/w)²)
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    /// Apply the HOM parity filter
    #[arg(long)]
    filter: bool,
    /// Keep raw rates instead of scaling the maximum to 1
    #[arg(long)]
    no_normalize: bool,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl SpiralArgs {
    fn resolve(&self) -> Result<SpiralConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => SpiralConfig::from_json_file(path)?,
            None => SpiralConfig::default(),
        };
        if let Some(l) = self.lmax {
            cfg.lmax = l;
        }
        if let Some(w) = self.width {
            cfg.width = w;
        }
        if let Some(t) = self.theta {
            cfg.theta = t;
        }
        if self.filter {
            cfg.filter = true;
        }
        if self.no_normalize {
            cfg.normalize = false;
        }
        if let Some(dir) = &self.output_dir {
            cfg.output_dir = dir.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct AnimateArgs {
    #[command(flatten)]
    ghost: GhostArgs,
    /// Masks added per frame
    #[arg(long, default_value_t = 100)]
    stride: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Trials per Hilbert-space dimension
    #[arg(long, default_value_t = 250)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Single-particle dimensions to sweep
    #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 3, 4, 8])]
    dims: Vec<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(RunError::Runtime(e)) => {
            eprintln!("runtime error: {e}");
            ExitCode::from(3)
        }
    }
}

enum RunError {
    Config(Error),
    Runtime(Error),
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Ghost(args) => {
            let cfg = args.resolve().map_err(RunError::Config)?;
            let out = runner::run_ghost(&cfg).map_err(RunError::Runtime)?;
            println!("wrote {}", out.image_path.display());
            println!("wrote {}", out.records_path.display());
            println!("wrote {}", out.sidecar_path.display());
        }
        Command::Spiral(args) => {
            let cfg = args.resolve().map_err(RunError::Config)?;
            for p in runner::run_spiral(&cfg).map_err(RunError::Runtime)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Summary(args) => {
            let cfg = args.resolve().map_err(RunError::Config)?;
            for p in runner::run_summary(&cfg).map_err(RunError::Runtime)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Animate(args) => {
            let cfg = args.ghost.resolve().map_err(RunError::Config)?;
            let paths = runner::run_animation(&cfg, args.stride).map_err(|e| match e {
                Error::InvalidArgument(_) => RunError::Config(e),
                other => RunError::Runtime(other),
            })?;
            println!("wrote {} frames", paths.len() - 1);
        }
        Command::VerifySymmetry(args) => {
            if args.dims.is_empty() || args.trials == 0 {
                return Err(RunError::Config(Error::invalid(
                    "need at least one dimension and one trial",
                )));
            }
            let report = verify_invariance(&args.dims, args.trials, args.seed);
            println!(
                "exchange symmetry preserved in {}/{} trials over dims {:?}",
                report.preserved, report.trials, args.dims
            );
            if report.preserved != report.trials {
                return Err(RunError::Runtime(Error::invalid(
                    "symmetry invariance violated",
                )));
            }
        }
    }
    Ok(())
}
