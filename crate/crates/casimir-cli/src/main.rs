//! `casimir`: thermal Casimir sweeps, entropy analysis and
//! experiment-versus-theory comparison from a single config file.
//!
//! Exit codes: 0 success, 2 configuration or parse problem, 3 numerical
//! failure.

mod config;

use casimir_core::compare::{
    differences, exclusion_verdict, load_dataset, ConfidenceLevel, DatasetKind,
    LifshitzForceCurve, LifshitzPressureCurve, TheoryCurve,
};
use casimir_core::sweep::{
    fmt_sci, write_entropy_sweep, write_nernst_record, write_sweep, EntropyRow, SweepRow,
};
use casimir_core::thermo;
use casimir_core::{lifshitz, Channel, Geometry, ThermalConfiguration};
use clap::{Args, Parser, Subcommand};
use config::{Overrides, ResolvedRun};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "casimir",
    about = "Thermal Casimir free energy, pressure, force, entropy and exclusion analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Sectioned key-value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Relative tolerance override (wins over the file).
    #[arg(long)]
    tolerance: Option<f64>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Screening placement override: none, n0 or all.
    #[arg(long, value_parser = ["none", "n0", "all"])]
    screening: Option<String>,
    /// Dielectric model override: ideal, plasma, drude or drude-core.
    #[arg(long, value_parser = ["ideal", "plasma", "drude", "drude-core"])]
    model: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Plate-plate pressure sweep over the configured separations.
    Pressure(CommonArgs),
    /// Sphere-plate force sweep (proximity force approximation).
    Force(CommonArgs),
    /// Entropy sweep over the configured temperatures, with optional
    /// Nernst verdict and closed-form S(0).
    Entropy(CommonArgs),
    /// Theory-versus-experiment differences and exclusion report.
    Compare(CommonArgs),
    /// Print the pinned physical constants and exit.
    PrintConstants,
}

enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pressure(args) => run_sweep(&args, false),
        Command::Force(args) => run_sweep(&args, true),
        Command::Entropy(args) => run_entropy(&args),
        Command::Compare(args) => run_compare(&args),
        Command::PrintConstants => {
            print!("{}", constants_text());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn constants_text() -> String {
    let mut out = String::new();
    for (name, value, unit) in casimir_core::constants::constants_table() {
        out.push_str(&format!("{name} = {} {unit}\n", fmt_sci(value)));
    }
    out
}

fn load_config(args: &CommonArgs) -> Result<ResolvedRun, CliError> {
    let overrides = Overrides {
        tolerance: args.tolerance,
        screening: args.screening.clone(),
        model: args.model.clone(),
    };
    config::load(&args.config, &overrides).map_err(|e| CliError::Config(e.to_string()))
}

fn emit(args: &CommonArgs, text: &str) -> Result<(), CliError> {
    match &args.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn numerical_at(d: f64, e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(format!("at d = {:.6} nm: {e}", d * 1e9))
}

/// One sweep row at gap `d`: free energies of both channels plus the
/// observable (pressure or PFA force).
fn sweep_row(
    base: &ThermalConfiguration,
    d: f64,
    tolerance: f64,
    force: bool,
) -> Result<SweepRow, CliError> {
    let mut cfg = *base;
    cfg.gap = d;
    if force {
        if !matches!(cfg.geometry, Geometry::SpherePlate { .. }) {
            return Err(CliError::Config(
                "force requires geometry.sphere_radius_um".into(),
            ));
        }
    } else {
        cfg.geometry = Geometry::ParallelPlates;
    }
    if cfg.temperature == 0.0 {
        // zero temperature is delegated to the Abel-Plana integral path
        let te = thermo::zero_temperature_free_energy_channel(&cfg, Channel::Te, tolerance)
            .map_err(|e| numerical_at(d, e))?;
        let tm = thermo::zero_temperature_free_energy_channel(&cfg, Channel::Tm, tolerance)
            .map_err(|e| numerical_at(d, e))?;
        let observable = if force {
            thermo::zero_temperature_sphere_plate_force(&cfg, tolerance)
                .map_err(|e| numerical_at(d, e))?
        } else {
            thermo::zero_temperature_pressure(&cfg, tolerance).map_err(|e| numerical_at(d, e))?
        };
        return Ok(SweepRow {
            d_nm: d * 1e9,
            f_te: te,
            f_tm: tm,
            f_total: te + tm,
            observable,
            n_max: 0,
            err_estimate: tolerance * (te + tm).abs(),
        });
    }
    let (observable, fe) = if force {
        let (f, fe) =
            lifshitz::sphere_plate_force(&cfg, tolerance).map_err(|e| numerical_at(d, e))?;
        (f, fe)
    } else {
        let fe = lifshitz::free_energy_total(&cfg, tolerance).map_err(|e| numerical_at(d, e))?;
        let p = lifshitz::pressure(&cfg, tolerance).map_err(|e| numerical_at(d, e))?;
        (p.pressure, fe)
    };
    Ok(SweepRow {
        d_nm: d * 1e9,
        f_te: fe.te.free_energy,
        f_tm: fe.tm.free_energy,
        f_total: fe.total(),
        observable,
        n_max: fe.n_max(),
        err_estimate: fe.error_estimate(),
    })
}

fn run_sweep(args: &CommonArgs, force: bool) -> Result<(), CliError> {
    let run = load_config(args)?;
    let mut rows = Vec::with_capacity(run.gaps.len());
    for &d in &run.gaps {
        rows.push(sweep_row(&run.base, d, run.tolerance, force)?);
    }
    emit(args, &write_sweep(&rows))
}

fn run_entropy(args: &CommonArgs) -> Result<(), CliError> {
    let run = load_config(args)?;
    let entropy = run
        .entropy
        .as_ref()
        .ok_or_else(|| CliError::Config("config has no [entropy] section".into()))?;
    if entropy.temperatures.is_empty() {
        return Err(CliError::Config("entropy.temperatures_k is empty".into()));
    }
    if entropy.verdict
        && (entropy.temperatures.len() < 4 || entropy.temperatures.windows(2).any(|w| w[1] >= w[0]))
    {
        return Err(CliError::Config(
            "a Nernst verdict needs a strictly decreasing list of at least 4 temperatures".into(),
        ));
    }
    let mut rows = Vec::new();
    for &t in &entropy.temperatures {
        let p = thermo::entropy_finite_difference(&run.base, t, entropy.step)
            .map_err(|e| CliError::Numerical(format!("at T = {t} K: {e}")))?;
        rows.push(EntropyRow {
            t_k: t,
            entropy: p.entropy,
            method: "finite-difference",
            err: p.step_disagreement,
        });
    }
    if entropy.closed_form {
        let p = thermo::entropy_zero_temp_for(&run.base, run.tolerance)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        rows.push(EntropyRow {
            t_k: 0.0,
            entropy: p.entropy,
            method: "closed-form",
            err: 0.0,
        });
    }
    let mut text = write_entropy_sweep(&rows);
    if entropy.verdict {
        let report = thermo::nernst_verdict(&run.base, &entropy.temperatures, run.tolerance)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        text.push_str(&write_nernst_record(&report));
    }
    emit(args, &text)
}

fn run_compare(args: &CommonArgs) -> Result<(), CliError> {
    let run = load_config(args)?;
    let compare = run
        .compare
        .as_ref()
        .ok_or_else(|| CliError::Config("config has no [compare] section".into()))?;
    let records = load_dataset(&compare.dataset, compare.kind)
        .map_err(|e| CliError::Config(format!("dataset {}: {e}", compare.dataset.display())))?;
    let curve: Box<dyn TheoryCurve> = match compare.kind {
        DatasetKind::Pressure => Box::new(LifshitzPressureCurve {
            cfg: run.base,
            tolerance: run.tolerance,
        }),
        DatasetKind::Force => {
            if !matches!(run.base.geometry, Geometry::SpherePlate { .. }) {
                return Err(CliError::Config(
                    "a force dataset needs geometry.sphere_radius_um".into(),
                ));
            }
            Box::new(LifshitzForceCurve {
                cfg: run.base,
                tolerance: run.tolerance,
            })
        }
    };
    let diffs =
        differences(curve.as_ref(), &records).map_err(|e| CliError::Numerical(e.to_string()))?;
    let rep95 = exclusion_verdict(&diffs, &records, ConfidenceLevel::NinetyFive)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let rep70 = if !records.is_empty() && records.iter().all(|r| r.ci70_half_width.is_some()) {
        Some(
            exclusion_verdict(&diffs, &records, ConfidenceLevel::Seventy)
                .map_err(|e| CliError::Numerical(e.to_string()))?,
        )
    } else {
        None
    };
    let text = casimir_core::compare::write_report(&records, &diffs, &rep95, rep70.as_ref())
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    emit(args, &text)
}
