use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use priorsens_core::reweight::PosteriorInput;
use priorsens_core::rw1::{exact_sensitivity_on, DEFAULT_TABULATION_POINTS};
use priorsens_core::{
    calibrate, circular_sensitivity, compute_grid, inverse_calibrate, summarize, Error, Family,
    ParamPoint, PolarGrid, PriorSpec, Scale, SensitivityLevel, SensitivityResult, SeriesWindow,
    DEFAULT_ANGLES, DEFAULT_EPSILON,
};

use crate::config::ConfigFile;
use crate::error::{CliError, Result, EXIT_INPUT};
use crate::ingest::ingest_timeseries;
use crate::io::{read_density_grid, write_atomic};
use crate::report::{
    grid_csv, polar_csv, rolled_csv, to_json, GridReport, Rw1Json, SensitivityReport,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PRIORSENS_OUT_DIR";

const DEFAULT_RW1_PRIOR: ParamPoint = ParamPoint::new(1.0, 0.005);

#[derive(Debug, Parser)]
#[command(
    name = "priorsens",
    version,
    about = "Local prior sensitivity in Hellinger geometry"
)]
pub struct Cli {
    /// Key-value file supplying defaults for any flag; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output directory [default: $PRIORSENS_OUT_DIR, else the current directory].
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the epsilon-contour around a base prior.
    Grid(GridArgs),
    /// Circular sensitivity of a tabulated posterior by reweighting.
    Sensitivity(SensitivityArgs),
    /// Convert between a Hellinger distance and the calibrated normal mean shift.
    Calibrate(CalibrateArgs),
    /// Sensitivity of the precision in an RW1 smoothing model of a monthly series.
    Rw1(Rw1Args),
}

#[derive(Debug, Clone, Args)]
pub struct ContourArgs {
    /// Prior distance of the contour [default: 0.00354].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Number of polar directions [default: 400].
    #[arg(long)]
    pub n_angles: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Prior family: normal (mean, precision) or gamma (shape, rate).
    #[arg(long)]
    pub family: Option<FamilyArg>,
    /// Base parameters as `gamma1,gamma2`.
    #[arg(long, value_name = "G1,G2", allow_hyphen_values = true)]
    pub gamma0: Option<Pair>,
    #[command(flatten)]
    pub contour: ContourArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub prior: GridArgs,
    /// Base posterior as `x,density` CSV.
    #[arg(long, value_name = "CSV")]
    pub posterior: Option<PathBuf>,
    /// The posterior is tabulated over the log of the parameter.
    #[arg(long)]
    pub log_scale: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    /// Hellinger distance to convert.
    #[arg(long, conflicts_with = "mu")]
    pub h: Option<f64>,
    /// Mean shift of a unit-variance normal to convert.
    #[arg(long)]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct Rw1Args {
    /// Monthly counts: one column with header, or `date,count`.
    #[arg(long, value_name = "CSV")]
    pub data: Option<PathBuf>,
    /// full, last96, or lastN for the most recent N months [default: full].
    #[arg(long)]
    pub window: Option<WindowArg>,
    /// Noise precision [default: 1 / residual variance].
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Gamma prior of the precision as `shape,rate` [default: 1,0.005].
    #[arg(
        long,
        alias = "gamma0",
        value_name = "SHAPE,RATE",
        allow_hyphen_values = true
    )]
    pub prior: Option<Pair>,
    /// exact (closed-form posterior distances) or reweight [default: exact].
    #[arg(long)]
    pub engine: Option<Engine>,
    /// Points of the log-precision posterior tabulation for the reweight engine [default: 2001].
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[command(flatten)]
    pub contour: ContourArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyArg(pub Family);

impl FromStr for FamilyArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(FamilyArg(Family::Normal)),
            "gamma" => Ok(FamilyArg(Family::Gamma)),
            other => Err(format!(
                "unknown family {other:?} (expected normal or gamma)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair(pub ParamPoint);

impl FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(format!("expected two comma-separated numbers, got {s:?}"));
        }
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| format!("{t:?} is not a number"))
        };
        Ok(Pair(ParamPoint::new(num(parts[0])?, num(parts[1])?)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowArg(pub SeriesWindow);

impl FromStr for WindowArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        if s == "full" {
            return Ok(WindowArg(SeriesWindow::Full));
        }
        match s.strip_prefix("last").map(str::parse::<usize>) {
            Some(Ok(n)) if n > 0 => Ok(WindowArg(SeriesWindow::Last(n))),
            _ => Err(format!(
                "unknown window {s:?} (expected full, last96 or lastN)"
            )),
        }
    }
}

impl fmt::Display for WindowArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            SeriesWindow::Full => write!(f, "full"),
            SeriesWindow::Last(n) => write!(f, "last{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Exact,
    Reweight,
}

impl Engine {
    fn name(self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::Reweight => "reweight",
        }
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Engine::Exact),
            "reweight" => Ok(Engine::Reweight),
            other => Err(format!(
                "unknown engine {other:?} (expected exact or reweight)"
            )),
        }
    }
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    /// One epsilon for every component of the run.
    pub epsilon: f64,
    pub n_angles: usize,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Grid {
        base: PriorSpec,
    },
    Sensitivity {
        base: PriorSpec,
        posterior: PathBuf,
        scale: Scale,
    },
    Calibrate(CalibrateInput),
    Rw1 {
        data: PathBuf,
        window: WindowArg,
        kappa: Option<f64>,
        prior: ParamPoint,
        engine: Engine,
        grid_points: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CalibrateInput {
    H(f64),
    Mu(f64),
}

fn pick<T>(flag: Option<T>, config: &ConfigFile, key: &str) -> Result<Option<T>>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => config.get(key),
    }
}

fn required<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| CliError::Input(format!("--{key} is required (flag or config file)")))
}

fn resolve_base(args: &GridArgs, config: &ConfigFile) -> Result<PriorSpec> {
    let family = required(pick(args.family, config, "family")?, "family")?;
    let point = required(pick(args.gamma0, config, "gamma0")?, "gamma0")?;
    Ok(PriorSpec::new(family.0, point.0)?)
}

impl RunConfig {
    /// Flags first, then the config file, then the environment (output
    /// directory only), then the built-in defaults.
    pub fn resolve(cli: &Cli, env_out_dir: Option<PathBuf>) -> Result<Self> {
        let config = match &cli.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let out_dir = pick(cli.out.clone(), &config, "out")?
            .or(env_out_dir)
            .unwrap_or_else(|| PathBuf::from("."));

        let contour = match &cli.command {
            Command::Grid(a) => Some(&a.contour),
            Command::Sensitivity(a) => Some(&a.prior.contour),
            Command::Rw1(a) => Some(&a.contour),
            Command::Calibrate(_) => None,
        };
        let (epsilon, n_angles) = match contour {
            Some(c) => (
                pick(c.epsilon, &config, "epsilon")?.unwrap_or(DEFAULT_EPSILON),
                pick(c.n_angles, &config, "n-angles")?.unwrap_or(DEFAULT_ANGLES),
            ),
            None => (DEFAULT_EPSILON, DEFAULT_ANGLES),
        };

        let task = match &cli.command {
            Command::Grid(a) => Task::Grid {
                base: resolve_base(a, &config)?,
            },
            Command::Sensitivity(a) => {
                let log_scale = a.log_scale || config.get::<bool>("log-scale")?.unwrap_or(false);
                Task::Sensitivity {
                    base: resolve_base(&a.prior, &config)?,
                    posterior: required(
                        pick(a.posterior.clone(), &config, "posterior")?,
                        "posterior",
                    )?,
                    scale: if log_scale {
                        Scale::LogParameter
                    } else {
                        Scale::Natural
                    },
                }
            }
            Command::Calibrate(a) => {
                let h = pick(a.h, &config, "h")?;
                let mu = pick(a.mu, &config, "mu")?;
                match (a.h, a.mu, h, mu) {
                    (Some(h), None, _, _) => Task::Calibrate(CalibrateInput::H(h)),
                    (None, Some(mu), _, _) => Task::Calibrate(CalibrateInput::Mu(mu)),
                    (None, None, Some(h), None) => Task::Calibrate(CalibrateInput::H(h)),
                    (None, None, None, Some(mu)) => Task::Calibrate(CalibrateInput::Mu(mu)),
                    _ => return Err(CliError::Input("give exactly one of --h and --mu".into())),
                }
            }
            Command::Rw1(a) => Task::Rw1 {
                data: required(pick(a.data.clone(), &config, "data")?, "data")?,
                window: pick(a.window, &config, "window")?.unwrap_or(WindowArg(SeriesWindow::Full)),
                kappa: pick(a.kappa, &config, "kappa")?,
                prior: pick(a.prior, &config, "prior")?.map_or(DEFAULT_RW1_PRIOR, |p| p.0),
                engine: pick(a.engine, &config, "engine")?.unwrap_or(Engine::Exact),
                grid_points: pick(a.grid_points, &config, "grid-points")?
                    .unwrap_or(DEFAULT_TABULATION_POINTS),
            },
        };
        Ok(RunConfig {
            task,
            epsilon,
            n_angles,
            out_dir,
        })
    }
}

/// Destinations for results and diagnostics.
pub struct Streams<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

impl Streams<'_> {
    fn say(&mut self, line: impl fmt::Display) {
        let _ = writeln!(self.out, "{line}");
    }

    fn warn(&mut self, line: impl fmt::Display) {
        let _ = writeln!(self.err, "warning: {line}");
    }

    fn note(&mut self, line: impl fmt::Display) {
        let _ = writeln!(self.err, "note: {line}");
    }
}

/// Contour for a run; a partial contour is used with a warning, an empty one is an error.
fn contour(base: &PriorSpec, cfg: &RunConfig, io: &mut Streams) -> Result<PolarGrid> {
    match compute_grid(base, cfg.epsilon, cfg.n_angles) {
        Ok(g) => Ok(g),
        Err(Error::PartialGrid(g)) if !g.points.is_empty() => {
            io.warn(format_args!(
                "partial contour: {} of {} directions unreachable at epsilon = {}; they are excluded",
                g.failed_angles.len(),
                g.n_angles,
                g.epsilon
            ));
            Ok(*g)
        }
        Err(e) => Err(e.into()),
    }
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], io: &mut Streams) -> Result<()> {
    let path = dir.join(name);
    write_atomic(&path, bytes)?;
    io.say(format_args!("wrote {}", path.display()));
    Ok(())
}

fn emit_sensitivity(
    result: &SensitivityResult,
    cfg: &RunConfig,
    scale: Scale,
    rw1: Option<Rw1Json>,
    io: &mut Streams,
) -> Result<()> {
    let report = summarize(result);
    let _ = write!(io.out, "{}", report.text);
    match report.level {
        SensitivityLevel::SuperSensitive => io.warn(format_args!(
            "super-sensitivity: worst case {:.4} exceeds 1",
            result.worst_case
        )),
        SensitivityLevel::Boundary => {
            io.warn("worst case equals 1: the data do not update this prior")
        }
        SensitivityLevel::Robust => {}
    }
    if !result.degenerate_angles.is_empty() {
        io.warn(format_args!(
            "degenerate reweighted posterior in {} directions; refine the posterior grid",
            result.degenerate_angles.len()
        ));
    }
    let json = SensitivityReport::new(result, cfg.n_angles, scale, rw1);
    write_file(&cfg.out_dir, "sensitivity.json", &to_json(&json)?, io)?;
    write_file(&cfg.out_dir, "polar.csv", &polar_csv(result)?, io)?;
    write_file(&cfg.out_dir, "rolled.csv", &rolled_csv(result)?, io)?;
    Ok(())
}

pub fn run(cfg: &RunConfig, io: &mut Streams) -> Result<()> {
    match &cfg.task {
        Task::Calibrate(CalibrateInput::H(h)) => {
            let mu = calibrate(*h)?;
            io.say(format_args!("h = {h}"));
            io.say(format_args!("mu = {mu}"));
        }
        Task::Calibrate(CalibrateInput::Mu(mu)) => {
            let h = inverse_calibrate(*mu)?;
            io.say(format_args!("mu = {mu}"));
            io.say(format_args!("h = {h}"));
        }
        Task::Grid { base } => {
            let grid = match compute_grid(base, cfg.epsilon, cfg.n_angles) {
                Ok(g) => g,
                Err(Error::PartialGrid(g)) => {
                    io.warn(format_args!(
                        "partial contour: {} of {} directions unreachable",
                        g.failed_angles.len(),
                        g.n_angles
                    ));
                    write_file(&cfg.out_dir, "grid.csv", &grid_csv(&g)?, io)?;
                    write_file(
                        &cfg.out_dir,
                        "grid.json",
                        &to_json(&GridReport::from(&*g))?,
                        io,
                    )?;
                    return Err(Error::PartialGrid(g).into());
                }
                Err(e) => return Err(e.into()),
            };
            io.say(format_args!(
                "{} contour at epsilon = {}: {} directions solved",
                base.family().name(),
                grid.epsilon,
                grid.points.len()
            ));
            write_file(&cfg.out_dir, "grid.csv", &grid_csv(&grid)?, io)?;
            write_file(
                &cfg.out_dir,
                "grid.json",
                &to_json(&GridReport::from(&grid))?,
                io,
            )?;
        }
        Task::Sensitivity {
            base,
            posterior,
            scale,
        } => {
            let tabulated = read_density_grid(posterior, *scale)?;
            let input = PosteriorInput::new(tabulated, *base)?;
            let grid = contour(base, cfg, io)?;
            let result = circular_sensitivity(&input, &grid)?;
            emit_sensitivity(&result, cfg, *scale, None, io)?;
        }
        Task::Rw1 {
            data,
            window,
            kappa,
            prior,
            engine,
            grid_points,
        } => {
            let ingested = ingest_timeseries(data, window.0, *kappa, *prior)?;
            let model = &ingested.model;
            io.note(format_args!(
                "n = {}, kappa = {} ({})",
                model.n(),
                model.kappa(),
                if ingested.kappa_overridden {
                    "override"
                } else {
                    "1 / residual variance"
                }
            ));
            let grid = contour(&model.prior_spec(), cfg, io)?;
            let result = match engine {
                Engine::Exact => exact_sensitivity_on(model, &grid)?,
                Engine::Reweight => {
                    circular_sensitivity(&model.tabulate_posterior(*grid_points)?, &grid)?
                }
            };
            let rw1 = Rw1Json {
                n: model.n(),
                window: window.to_string(),
                kappa: model.kappa(),
                kappa_estimate: ingested.kappa_estimate,
                kappa_overridden: ingested.kappa_overridden,
                engine: engine.name(),
            };
            emit_sensitivity(&result, cfg, Scale::LogParameter, Some(rw1), io)?;
        }
    }
    Ok(())
}

/// Parse `args`, run, and report errors; returns the process exit code.
pub fn main_with<I, T>(args: I, env_out_dir: Option<PathBuf>, io: &mut Streams) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { io.err } else { io.out };
            let _ = write!(sink, "{rendered}");
            return code;
        }
    };
    let outcome = RunConfig::resolve(&cli, env_out_dir).and_then(|cfg| run(&cfg, io));
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e}");
            e.exit_code()
        }
    }
}
