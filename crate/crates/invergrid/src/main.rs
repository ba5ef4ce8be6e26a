use clap::{Parser, Subcommand, ValueEnum};
use invergrid::{
    emit_csv, emit_summary, experiment_matrix, parse_config, run_scenario, MatrixRun, ModeKind,
    NetworkVariant, ScenarioSpec,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(
    name = "invergrid",
    about = "Quasi-static smart-inverter simulation on a radial LV feeder"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single scenario and write its time series as CSV.
    Run {
        /// Scenario configuration file (an empty file selects the defaults).
        #[arg(long)]
        config: PathBuf,
        /// Override the feeder variant from the config.
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        /// Override the A2 control mode from the config.
        #[arg(long = "a2-mode", value_enum)]
        a2_mode: Option<ModeArg>,
        /// Override the timeline step in seconds.
        #[arg(long)]
        dt: Option<f64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run all six variant x A2-mode combinations and write CSVs plus a summary.
    Matrix {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Resistive,
    Inductive,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Cpf,
    #[value(name = "volt_var", alias = "volt-var")]
    VoltVar,
    #[value(name = "volt_watt", alias = "volt-watt")]
    VoltWatt,
}

fn load_spec(path: &Path) -> Result<ScenarioSpec, u8> {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: cannot read config {}: {err}", path.display());
            return Err(EXIT_CONFIG);
        }
    };
    parse_config(&text).map_err(|err| {
        eprintln!("error: {err}");
        EXIT_CONFIG
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), u8> {
    std::fs::write(path, contents).map_err(|err| {
        eprintln!("error: cannot write {}: {err}", path.display());
        EXIT_SOLVER
    })
}

fn run_command(
    config: &Path,
    variant: Option<VariantArg>,
    a2_mode: Option<ModeArg>,
    dt: Option<f64>,
    out: &Path,
) -> Result<(), u8> {
    let mut spec = load_spec(config)?;
    if let Some(v) = variant {
        spec.variant = match v {
            VariantArg::Resistive => NetworkVariant::Resistive,
            VariantArg::Inductive => NetworkVariant::Inductive,
        };
    }
    if let Some(mode) = a2_mode {
        spec.a2.mode = match mode {
            ModeArg::Cpf => ModeKind::Cpf,
            ModeArg::VoltVar => ModeKind::VoltVar,
            ModeArg::VoltWatt => ModeKind::VoltWatt,
        };
    }
    if let Some(dt) = dt {
        if dt <= 0.0 {
            eprintln!("error: config error at key timeline.dt: dt must be positive (got {dt})");
            return Err(EXIT_CONFIG);
        }
        spec.timeline.dt_s = dt;
    }

    std::fs::create_dir_all(out).map_err(|err| {
        eprintln!("error: cannot create {}: {err}", out.display());
        EXIT_SOLVER
    })?;

    let records = run_scenario(&spec).map_err(|err| {
        eprintln!("error: solver abort: {err}");
        EXIT_SOLVER
    })?;
    let diverged = records.iter().filter(|r| !r.converged).count();
    let csv = emit_csv(&records).map_err(|err| {
        eprintln!("error: {err}");
        EXIT_SOLVER
    })?;
    let path = out.join("timeseries.csv");
    write_file(&path, &csv)?;
    println!(
        "wrote {} ({} records, {} non-converged steps, {} grid, a2 {})",
        path.display(),
        records.len(),
        diverged,
        spec.variant.label(),
        spec.a2.mode.label()
    );
    Ok(())
}

fn matrix_command(config: &Path, out: &Path) -> Result<(), u8> {
    let base = load_spec(config)?;
    std::fs::create_dir_all(out).map_err(|err| {
        eprintln!("error: cannot create {}: {err}", out.display());
        EXIT_SOLVER
    })?;

    let mut runs = Vec::with_capacity(6);
    for spec in experiment_matrix(&base) {
        let records = run_scenario(&spec).map_err(|err| {
            eprintln!(
                "error: solver abort in {}_{}: {err}",
                spec.variant.label(),
                spec.a2.mode.label()
            );
            EXIT_SOLVER
        })?;
        runs.push(MatrixRun { spec, records });
    }

    for run in &runs {
        let csv = emit_csv(&run.records).map_err(|err| {
            eprintln!("error: {err}");
            EXIT_SOLVER
        })?;
        write_file(&out.join(format!("run_{}.csv", run.label())), &csv)?;
    }
    let summary = emit_summary(&runs).map_err(|err| {
        eprintln!("error: {err}");
        EXIT_SOLVER
    })?;
    write_file(&out.join("summary.txt"), &summary)?;
    print!("{summary}");
    println!("\nwrote 6 CSV files and summary.txt to {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            variant,
            a2_mode,
            dt,
            out,
        } => run_command(&config, variant, a2_mode, dt, &out),
        Command::Matrix { config, out } => matrix_command(&config, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
