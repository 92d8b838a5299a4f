//! Command-line front end for the X-point collapse solutions.
//!
//! Exit codes: 0 on success, 1 when a verification check fails, 2 for
//! invalid parameters or I/O failures.

pub mod commands;
pub mod output;
pub mod params;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;
use xpoint_core::integrate::IntegratorConfig;
use xpoint_core::model::C0Definition;

use commands::{Mode, TrajectoryRequest};
use output::Format;
use params::{ConfigFile, ParamArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "xpoint",
    version,
    about = "Exact and numerical X-point collapse orbits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SamplingArgs {
    /// End of the sampled time interval
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    /// Number of samples (at least 2)
    #[arg(long)]
    pub samples: Option<usize>,
    /// Relative tolerance of the numerical oracle (default 1e-12)
    #[arg(long = "rel-tol")]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum C0Arg {
    #[default]
    Corrected,
    /// Sign convention that violates the initial condition (debugging only)
    Flipped,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report c, ε, c₀, the regime, turning points and T or T∞
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sample q(t) from the closed form, the integrator, or both
    Trajectory {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Add α₁, α₂, β₁, β₂ and b columns (needs d_e = 0)
        #[arg(long)]
        reconstruct: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Phase-plane curves (q, q̇) for a list of energies
    Portrait {
        #[arg(long)]
        c: Option<f64>,
        /// Comma-separated energies ε
        #[arg(long = "epsilon-list", allow_hyphen_values = true)]
        epsilon_list: Option<String>,
        /// Points per curve
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Period T and blow-up time T∞ over an energy grid
    Periods {
        #[arg(long)]
        c: Option<f64>,
        /// Comma-separated energies; overrides the uniform grid
        #[arg(long = "epsilon-list", allow_hyphen_values = true)]
        epsilon_list: Option<String>,
        #[arg(long = "eps-min", allow_hyphen_values = true)]
        eps_min: Option<f64>,
        #[arg(long = "eps-max", allow_hyphen_values = true)]
        eps_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the closed-form/oracle cross-checks and print a JSON summary
    Verify {
        /// Comma-separated check names; an empty list runs nothing
        #[arg(long)]
        checks: Option<String>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long = "c0-definition", value_enum)]
        c0_definition: Option<C0Arg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Field values φ, ψ, V_z, B_z on an n × n grid over [−1, 1]²
    Fields {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        /// Points per side
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Rendered output and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub out: Option<PathBuf>,
    pub exit_code: i32,
    pub warnings: Vec<String>,
}

fn parse_list(list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Invalid(format!("cannot parse {s:?} as a number")))
        })
        .collect()
}

/// Oracle tolerance used unless `--rel-tol` says otherwise.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

fn integrator(cfg: &ConfigFile, rel_tol: Option<f64>) -> Result<IntegratorConfig, CliError> {
    let mut ic = IntegratorConfig::default().with_rel_tol(DEFAULT_REL_TOL);
    if let Some(r) = cfg.pick(rel_tol, "rel-tol")? {
        ic.rel_tol = r;
    }
    ic.validate()
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    Ok(ic)
}

fn format_of(cfg: &ConfigFile, output: &OutputArgs) -> Result<Format, CliError> {
    Ok(cfg.pick_enum(output.format, "format")?.unwrap_or_default())
}

fn out_of(cfg: &ConfigFile, output: &OutputArgs) -> Result<Option<PathBuf>, CliError> {
    cfg.pick(output.out.clone(), "out")
}

fn done(text: String, out: Option<PathBuf>, warnings: Vec<String>) -> Outcome {
    Outcome {
        text,
        out,
        exit_code: 0,
        warnings,
    }
}

/// Executes a parsed command without touching stdout.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Classify { params, output } => {
            let cfg = ConfigFile::load(params.config.as_deref())?;
            let init = params.resolve(&cfg)?;
            let report = commands::classify_report(&init)?;
            Ok(done(
                report.render(format_of(&cfg, output)?),
                out_of(&cfg, output)?,
                vec![],
            ))
        }
        Command::Trajectory {
            params,
            sampling,
            mode,
            reconstruct,
            output,
        } => {
            let cfg = ConfigFile::load(params.config.as_deref())?;
            let init = params.resolve(&cfg)?;
            let req = TrajectoryRequest {
                mode: cfg.pick_enum(*mode, "mode")?.unwrap_or_default(),
                reconstruct: *reconstruct || cfg.get::<bool>("reconstruct")?.unwrap_or(false),
                t_max: cfg.pick(sampling.t_max, "t-max")?.unwrap_or(10.0),
                samples: cfg.pick(sampling.samples, "samples")?.unwrap_or(101),
                integrator: integrator(&cfg, sampling.rel_tol)?,
            };
            let table = commands::trajectory_table(&init, &req)?;
            Ok(done(
                table.render(format_of(&cfg, output)?),
                out_of(&cfg, output)?,
                vec![],
            ))
        }
        Command::Portrait {
            c,
            epsilon_list,
            samples,
            config,
            output,
        } => {
            let cfg = ConfigFile::load(config.as_deref())?;
            let c = cfg.pick(*c, "c")?.unwrap_or(params::DEFAULT_C);
            let energies = match cfg.pick(epsilon_list.clone(), "epsilon-list")? {
                Some(list) => parse_list(&list)?,
                None => vec![-1.0, -0.5, 0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5],
            };
            let samples = cfg.pick(*samples, "samples")?.unwrap_or(201);
            let (table, warnings) = commands::portrait_table(c, &energies, samples)?;
            Ok(done(
                table.render(format_of(&cfg, output)?),
                out_of(&cfg, output)?,
                warnings,
            ))
        }
        Command::Periods {
            c,
            epsilon_list,
            eps_min,
            eps_max,
            points,
            config,
            output,
        } => {
            let cfg = ConfigFile::load(config.as_deref())?;
            let c = cfg.pick(*c, "c")?.unwrap_or(params::DEFAULT_C);
            let lo = cfg.pick(*eps_min, "eps-min")?;
            let hi = cfg.pick(*eps_max, "eps-max")?;
            let n = cfg.pick(*points, "points")?;
            let energies = match cfg.pick(epsilon_list.clone(), "epsilon-list")? {
                Some(list) => parse_list(&list)?,
                None if lo.is_none() && hi.is_none() && n.is_none() => {
                    commands::default_period_grid()
                }
                None => {
                    let n = n.unwrap_or(61);
                    if n < 2 {
                        return Err(CliError::Invalid("points must be at least 2".into()));
                    }
                    commands::linspace(lo.unwrap_or(-2.0), hi.unwrap_or(2.0), n)
                }
            };
            let (table, warnings) = commands::periods_table(c, &energies)?;
            Ok(done(
                table.render(format_of(&cfg, output)?),
                out_of(&cfg, output)?,
                warnings,
            ))
        }
        Command::Verify {
            checks,
            c,
            c0_definition,
            out,
        } => {
            let opts = verify::VerifyOptions {
                c: c.unwrap_or(0.5),
                c0_definition: match c0_definition.unwrap_or_default() {
                    C0Arg::Corrected => C0Definition::Corrected,
                    C0Arg::Flipped => C0Definition::FlippedSign,
                },
            };
            if !(opts.c > 0.0) {
                return Err(CliError::Invalid(format!(
                    "unsupported parameters: c = {} <= 0 (turning-point analysis needs c > 0)",
                    opts.c
                )));
            }
            let names: Vec<String> = match checks {
                None => verify::CHECK_NAMES.iter().map(|s| s.to_string()).collect(),
                Some(list) => list
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect(),
            };
            let mut results = Vec::new();
            for name in &names {
                let r = verify::run_check(name, &opts).ok_or_else(|| {
                    CliError::Invalid(format!(
                        "unknown check {name:?}; available: {}",
                        verify::CHECK_NAMES.join(", ")
                    ))
                })?;
                results.push(r);
            }
            let (summary, all_pass) = verify::summary(&results);
            let mut text = serde_json::to_string_pretty(&summary).unwrap_or_default();
            text.push('\n');
            let warnings = if results.is_empty() {
                vec!["no checks selected".to_string()]
            } else {
                vec![]
            };
            Ok(Outcome {
                text,
                out: out.clone(),
                exit_code: if all_pass { 0 } else { 1 },
                warnings,
            })
        }
        Command::Fields {
            params,
            t,
            grid,
            output,
        } => {
            let cfg = ConfigFile::load(params.config.as_deref())?;
            let init = params.resolve(&cfg)?;
            let t = cfg.pick(*t, "t")?.unwrap_or(0.0);
            let n = cfg.pick(*grid, "grid")?.unwrap_or(11);
            let table = commands::fields_table(&init, t, n, &integrator(&cfg, None)?)?;
            Ok(done(
                table.render(format_of(&cfg, output)?),
                out_of(&cfg, output)?,
                vec![],
            ))
        }
    }
}

/// Writes the outcome to its destination.
pub fn emit(outcome: &Outcome) -> Result<(), CliError> {
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    match &outcome.out {
        Some(path) => std::fs::write(path, &outcome.text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{}", outcome.text);
            Ok(())
        }
    }
}

/// Parses `args`, runs, writes output and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli).and_then(|o| emit(&o).map(|_| o.exit_code)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
