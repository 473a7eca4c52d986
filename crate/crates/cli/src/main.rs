mod config_file;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use cwr_core::density::{closed_form_histogram, monte_carlo_histogram, OrientationHistogram};
use cwr_core::experiments::{
    estimate, run_sweep, ExperimentConfig, Generator, GridPolicy, PointSource,
};
use cwr_core::geometry::{clip_voronoi, PointSet, Polygon};
use cwr_core::spectrum::{RadialBand, DEFAULT_DELTA};
use cwr_core::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "cwr",
    version,
    about = "Gradient orientation densities from wave-field power spectra"
)]
#[command(args_override_self = true)]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, env = "CWR_THREADS", default_value_t = 0, global = true)]
    threads: usize,
    /// File of `key = value` lines applied before the command-line flags.
    #[arg(long, value_name = "PATH", global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a point-set file from a named generator.
    Gen(GenArgs),
    /// Write the Voronoi cell polygons as CSV.
    Voronoi(VoronoiArgs),
    /// Write the closed-form orientation histogram as CSV.
    Density(DensityArgs),
    /// Write the Monte-Carlo orientation histogram as CSV.
    Oracle(OracleArgs),
    /// Write the spectral orientation histogram for one tau as CSV.
    Estimate(EstimateArgs),
    /// Run a tau sweep and write the convergence report.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct PointArgs {
    /// Generator name (single-center, two-sites, uniform-K, ring-K) or a point-set file.
    #[arg(long)]
    points: String,
    /// Seed for seeded generators.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Domain vertices for generators, e.g. "0,0 2,0 2,1 0,1".
    #[arg(long)]
    domain: Option<String>,
}

#[derive(Debug, Args)]
struct HistArgs {
    #[arg(long, default_value_t = 32)]
    bins: usize,
    /// Left edge of the first bin, radians.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    bin_origin: f64,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Pixels along the longer side; the sampling rule picks the grid when absent.
    #[arg(long)]
    pixels: Option<usize>,
    /// Sampling-rule oversampling factor, h = pi tau / (4 oversample).
    #[arg(long, default_value_t = 1.0, conflicts_with = "pixels")]
    oversample: f64,
    #[arg(long, default_value_t = 2)]
    pad: usize,
    /// Accept grids coarser than pi tau / 4.
    #[arg(long)]
    force: bool,
}

impl GridArgs {
    fn policy(&self) -> GridPolicy {
        match self.pixels {
            Some(pixels) => GridPolicy::Explicit { pixels },
            None => GridPolicy::SamplingRule {
                oversample: self.oversample,
            },
        }
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    points: PointArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VoronoiArgs {
    #[command(flatten)]
    points: PointArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[command(flatten)]
    points: PointArgs,
    #[command(flatten)]
    hist: HistArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    points: PointArgs,
    #[command(flatten)]
    hist: HistArgs,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    mc_seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    points: PointArgs,
    #[command(flatten)]
    hist: HistArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    tau: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Annulus half-width around unit radius.
    #[arg(long, default_value_t = DEFAULT_DELTA, conflicts_with = "full_radial")]
    delta: f64,
    /// Integrate over every radius instead of the annulus.
    #[arg(long)]
    full_radial: bool,
    /// Also dump the power spectrum to `<STEM>.bin` and `<STEM>.json`.
    #[arg(long, value_name = "STEM")]
    dump: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    points: PointArgs,
    #[command(flatten)]
    hist: HistArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Strictly decreasing tau schedule.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.02")]
    taus: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    mc_seed: u64,
    /// Fill the runtime_s column.
    #[arg(long)]
    timings: bool,
    /// Directory for the report, histogram CSVs and plots.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl PointArgs {
    fn source(&self) -> Result<PointSource> {
        let domain = self
            .domain
            .as_deref()
            .map(str::parse::<Polygon>)
            .transpose()?;
        match self.points.parse::<Generator>() {
            Ok(generator) => Ok(PointSource::Generator {
                generator,
                seed: self.seed,
                domain,
            }),
            Err(_) if domain.is_none() => Ok(PointSource::File(PathBuf::from(&self.points))),
            Err(e) => Err(e),
        }
    }

    fn resolve(&self) -> Result<PointSet> {
        self.source()?.resolve()
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn voronoi_csv(points: &PointSet) -> Result<String> {
    let diagram = clip_voronoi(points)?;
    let mut csv = String::from("site,vertex,x,y\n");
    for cell in diagram.cells() {
        for (v, p) in cell.polygon().vertices().iter().enumerate() {
            let _ = writeln!(csv, "{},{v},{},{}", cell.site_index(), p.x, p.y);
        }
    }
    Ok(csv)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen(a) => {
            let points = a.points.resolve()?;
            let comment = format!("generator {} seed {}", a.points.points, a.points.seed);
            emit(&a.out, &points.to_text(Some(&comment)))
        }
        Command::Voronoi(a) => emit(&a.out, &voronoi_csv(&a.points.resolve()?)?),
        Command::Density(a) => {
            let diagram = clip_voronoi(&a.points.resolve()?)?;
            let hist = closed_form_histogram(&diagram, a.hist.bins, a.hist.bin_origin)?;
            emit(&a.out, &hist.to_csv())
        }
        Command::Oracle(a) => {
            let points = a.points.resolve()?;
            let hist = monte_carlo_histogram(
                &points,
                a.samples,
                a.hist.bins,
                a.hist.bin_origin,
                a.mc_seed,
            )?;
            emit(&a.out, &hist.to_csv())
        }
        Command::Estimate(a) => {
            let hist = run_estimate(&a)?;
            emit(&a.out, &hist.to_csv())
        }
        Command::Sweep(a) => {
            let config = ExperimentConfig {
                points: a.points.source()?,
                epsilon: a.epsilon,
                delta: a.delta,
                bins: a.hist.bins,
                bin_origin: a.hist.bin_origin,
                taus: a.taus.clone(),
                grid: a.grid.policy(),
                pad_factor: a.grid.pad,
                mc_samples: a.samples,
                mc_seed: a.mc_seed,
                force: a.grid.force,
                record_runtime: a.timings,
                output_dir: a.out_dir.clone(),
            };
            let report = run_sweep(&config)?;
            if let Some(dir) = &config.output_dir {
                report.write(dir)?;
            }
            emit(&None, &report.to_csv())
        }
    }
}

fn run_estimate(a: &EstimateArgs) -> Result<OrientationHistogram> {
    let points = a.points.resolve()?;
    let diagram = clip_voronoi(&points)?;
    let grid = a.grid.policy().grid_for(points.domain(), a.tau)?;
    let est = estimate(
        &points,
        &diagram,
        &grid,
        a.epsilon,
        a.tau,
        a.grid.pad,
        a.grid.force,
    )?;
    if let Some(stem) = &a.dump {
        est.spectrum.dump(stem)?;
    }
    let band = if a.full_radial {
        RadialBand::AllRadii
    } else {
        RadialBand::Annulus { delta: a.delta }
    };
    let hist = est
        .spectrum
        .orientation_histogram(band, a.hist.bins, a.hist.bin_origin)?;
    eprintln!(
        "grid {}x{} h={} support_area={} band_mass={} total_mass={}",
        grid.nx,
        grid.ny,
        grid.h,
        est.mask.area,
        hist.total(),
        est.spectrum.total_mass()
    );
    Ok(hist)
}

fn usage_error(e: clap::Error) -> ExitCode {
    use clap::error::ErrorKind;
    let _ = e.print();
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
        _ => ExitCode::from(1),
    }
}

fn numeric_error(e: &Error) -> ExitCode {
    eprintln!("error: {}: {e}", e.kind());
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let root = Cli::command();
    let argv: Vec<OsString> = std::env::args_os().collect();
    let argv = match config_file::expand(argv, &root) {
        Ok(a) => a,
        Err(e) => return numeric_error(&e),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => return usage_error(e),
    };
    eprintln!("config: threads={} {:?}", cli.threads, cli.command);

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start {} worker threads: {e}", cli.threads);
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => numeric_error(&e),
    }
}
