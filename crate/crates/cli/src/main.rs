//! Command-line front end: spectra, evolution, steady states, sweeps and
//! figure datasets from a JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use polariton_blockade::harness::{
    format_number, reproduce_figure, reproduce_from_sidecar, run_spectrum, run_steady, run_sweep, run_time_series,
    validate_effective_model, FigureId, OutputFormat, RunConfig, SweepTable,
};
use polariton_blockade::{Error, Result, SystemParams};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "polariton-blockade",
    version,
    about = "Driven Kerr cavity-magnon blockade simulator"
)]
struct Cli {
    /// JSON run configuration (or a `.resolved.json` sidecar)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; results go to stdout when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lowest eigenvalues of the configured Hamiltonian
    Spectrum {
        #[arg(long)]
        count: Option<usize>,
    },
    /// Populations over time from vacuum (closed if kappa = 0)
    Evolve,
    /// Steady-state populations and solver diagnostics
    Steady,
    /// Parameter sweep described by the config's `sweep` section
    Sweep,
    /// Regenerate a figure dataset by id, or re-run a sidecar given via --config.
    /// Writes into --out (default: current directory)
    Reproduce {
        /// fig2a..fig2d, fig3a, fig3b, fig4a..fig4d, fig5a, fig5b
        id: Option<String>,
    },
    /// Compare effective and two-mode dynamics in the polariton basis
    ValidateEffective {
        #[arg(long, default_value_t = 1500.0)]
        t_end: f64,
        #[arg(long, default_value_t = 12)]
        n_total_max: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            report(&json!({ "error": "usage", "field": null, "message": msg.trim() }));
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&json!({ "error": e.kind(), "field": e.field(), "message": e.to_string() }));
            if e.is_config() || matches!(e, Error::Io(_)) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn report(v: &Value) {
    eprintln!("{v}");
}

fn run(cli: &Cli) -> Result<()> {
    let format = OutputFormat::from(cli.format);
    match &cli.command {
        Command::Spectrum { count } => {
            let cfg = load_config(cli.config.as_deref())?;
            let table = run_spectrum(&cfg, *count)?;
            emit_table("spectrum", &table, &cfg, cli.out.as_deref(), format)
        }
        Command::Evolve => {
            let cfg = load_config(cli.config.as_deref())?;
            let table = run_time_series(&cfg)?;
            emit_table("evolve", &table, &cfg, cli.out.as_deref(), format)
        }
        Command::Sweep => {
            let cfg = load_config(cli.config.as_deref())?;
            let table = run_sweep(&cfg)?;
            emit_table("sweep", &table, &cfg, cli.out.as_deref(), format)
        }
        Command::Steady => {
            let cfg = load_config(cli.config.as_deref())?;
            let s = run_steady(&cfg)?;
            let body = match format {
                OutputFormat::Json => serde_json::to_string_pretty(&s).expect("summary serializes"),
                OutputFormat::Csv => {
                    let mut cols: Vec<String> = (0..s.populations.len()).map(|j| format!("P{j}")).collect();
                    cols.push("nbar".into());
                    cols.extend((1..s.fidelities.len()).map(|n| format!("Fp{n}")));
                    cols.extend(["residual", "min_eigenvalue", "tail_mass", "truncation_used"].map(String::from));
                    let mut vals = s.populations.clone();
                    vals.push(s.mean_excitation);
                    vals.extend(&s.fidelities[1..]);
                    vals.extend([s.residual, s.min_eigenvalue, s.tail_mass, s.truncation_used as f64]);
                    csv_line(&cols, &vals)
                }
            };
            emit("steady", &body, json!({ "config": cfg }), cli.out.as_deref(), format)
        }
        Command::ValidateEffective { t_end, n_total_max } => {
            let params = match cli.config.as_deref() {
                Some(p) => load_config(Some(p))?.params,
                None => SystemParams::effective(-0.025, 0.05, 0.005, 0.005, 0.0),
            };
            let r = validate_effective_model(&params, *n_total_max, *t_end)?;
            if let Some(w) = &r.warning {
                report(&json!({ "warning": w }));
            }
            let body = match format {
                OutputFormat::Json => serde_json::to_string_pretty(&r).expect("report serializes"),
                OutputFormat::Csv => {
                    let mut out = String::from("level,max_discrepancy\n");
                    for (j, d) in r.per_level_max.iter().enumerate() {
                        out.push_str(&format!("{j},{}\n", format_number(*d)));
                    }
                    out
                }
            };
            let provenance = json!({ "params": params, "n_total_max": n_total_max, "t_end": t_end, "report": r });
            emit("validate-effective", &body, provenance, cli.out.as_deref(), format)
        }
        Command::Reproduce { id } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let written = match (id, cli.config.as_deref()) {
                (Some(id), None) => reproduce_figure(id.parse::<FigureId>()?, &out, format)?,
                (None, Some(sidecar)) => reproduce_from_sidecar(sidecar, &out, format)?,
                (Some(_), Some(_)) => {
                    return Err(config_error("config", "give either a figure id or a sidecar, not both"));
                }
                (None, None) => return Err(config_error("id", "a figure id or --config sidecar is required")),
            };
            for p in written {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn config_error(field: &str, message: &str) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

/// Reads a run configuration, unwrapping a `{"config": ..}` sidecar.
fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let path = path.ok_or_else(|| config_error("config", "--config <path> is required"))?;
    let text = fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| config_error("<root>", &e.to_string()))?;
    match value.get("config") {
        Some(inner) if value.get("provenance").is_some() || value.as_object().is_some_and(|o| o.len() == 1) => {
            RunConfig::from_json_str(&inner.to_string())
        }
        _ => RunConfig::from_json_str(&text),
    }
}

fn csv_line(columns: &[String], values: &[f64]) -> String {
    let row: Vec<String> = values.iter().map(|&v| format_number(v)).collect();
    format!("{}\n{}\n", columns.join(","), row.join(","))
}

fn emit_table(name: &str, table: &SweepTable, cfg: &RunConfig, out: Option<&Path>, format: OutputFormat) -> Result<()> {
    let body = match format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(),
    };
    emit(
        name,
        &body,
        json!({ "config": cfg, "provenance": table.provenance }),
        out,
        format,
    )
}

/// Writes `<name>.<ext>` and `<name>.resolved.json` into `out`, or prints the body.
fn emit(name: &str, body: &str, sidecar: Value, out: Option<&Path>, format: OutputFormat) -> Result<()> {
    let Some(dir) = out else {
        print!("{body}");
        if !body.ends_with('\n') {
            println!();
        }
        return Ok(());
    };
    fs::create_dir_all(dir)?;
    let data = dir.join(format!("{name}.{}", format.extension()));
    fs::write(&data, body)?;
    let side = dir.join(format!("{name}.resolved.json"));
    fs::write(
        &side,
        serde_json::to_string_pretty(&sidecar).expect("sidecar serializes"),
    )?;
    println!("{}", data.display());
    println!("{}", side.display());
    Ok(())
}
