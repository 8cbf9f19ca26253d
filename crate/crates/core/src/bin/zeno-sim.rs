use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zeno_core::runner::{
    emit, format_number, lindblad_check, run_ion_sweep, run_neutron_sweep, Config, Execution,
    Format, IonSweepConfig, LINDBLAD_AGREEMENT_TOL, STEP_OVERRIDE_ENV,
};
use zeno_core::Error;

#[derive(Parser, Debug)]
#[command(name = "zeno-sim", version, about = "Quantum Zeno effect sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output format, overrides [output].format
    #[arg(long, global = true)]
    format: Option<Format>,

    /// Output file, overrides [output].path (stdout if neither is set)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Comma-separated pulse counts, overrides [sweep].n_list
    #[arg(long, global = true, value_delimiter = ',')]
    n_list: Option<Vec<u64>>,

    /// Evaluate rows on one thread
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep P2(T) for the driven ion over the pulse count
    Ion {
        /// Also integrate the three-level master equation for every row
        #[arg(long)]
        lindblad: bool,
    },
    /// Sweep the neutron spin survival probability
    Neutron,
    /// Compare the three-level model against the projection closed form
    LindbladCheck,
    /// Parse and validate the configuration only
    Validate,
}

fn step_override() -> Result<Option<f64>, Error> {
    match std::env::var(STEP_OVERRIDE_ENV) {
        Ok(raw) => raw
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|e| Error::Config {
                path: STEP_OVERRIDE_ENV.into(),
                message: e.to_string(),
            }),
        Err(_) => Ok(None),
    }
}

fn ion_sweep_config(cfg: &Config, n_list: Vec<u64>) -> Result<IonSweepConfig, Error> {
    Ok(IonSweepConfig {
        ion: cfg.ion()?,
        schedule: cfg.schedule,
        n_list,
        lindblad: cfg.sweep.lindblad,
        step_override: step_override()?,
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let n_list = cli
        .n_list
        .clone()
        .unwrap_or_else(|| cfg.sweep.n_list.clone());
    if let Some(i) = n_list.iter().position(|&n| n == 0) {
        return Err(Error::Config {
            path: format!("--n-list[{i}]"),
            message: "pulse counts must be at least 1".into(),
        });
    }
    let format = cli.format.unwrap_or(cfg.output.format);
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };

    match cli.command {
        Command::Ion { lindblad } => {
            let mut sweep_cfg = ion_sweep_config(&cfg, n_list)?;
            sweep_cfg.lindblad |= lindblad;
            let result = run_ion_sweep(&sweep_cfg, exec)?;
            emit(&result, format, out.as_deref())
        }
        Command::Neutron => {
            let result = run_neutron_sweep(&cfg.neutron()?, &n_list, exec)?;
            emit(&result, format, out.as_deref())
        }
        Command::LindbladCheck => {
            let check = lindblad_check(&ion_sweep_config(&cfg, n_list)?, exec)?;
            for row in &check.rows {
                println!(
                    "n={} p2_lindblad={} p2_projection={} deviation={} {}",
                    row.n,
                    format_number(row.p2_lindblad),
                    format_number(row.p2_projection),
                    format_number(row.deviation),
                    row.regime_flag.as_str()
                );
            }
            println!("max_deviation={}", format_number(check.max_deviation));
            if let Some(path) = out.as_deref() {
                write_check(&check, path)?;
            }
            if check.passed() {
                Ok(())
            } else {
                Err(Error::Integration {
                    time: f64::NAN,
                    message: format!(
                        "max deviation {} exceeds {LINDBLAD_AGREEMENT_TOL}",
                        check.max_deviation
                    ),
                })
            }
        }
        Command::Validate => {
            println!("ok");
            Ok(())
        }
    }
}

fn write_check(check: &zeno_core::runner::LindbladCheck, path: &Path) -> Result<(), Error> {
    let json = serde_json::to_string_pretty(check).map_err(std::io::Error::from)?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
