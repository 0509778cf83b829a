use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ddrs::harness::{
    advice_for, parse_config_over, prepare, preset, run_experiment, write_plotdata, write_records, ExperimentConfig,
    RecordFormat, RunStatus,
};

#[derive(Parser)]
#[command(
    name = "ddrs",
    version,
    about = "Decentralized Douglas-Rachford splitting on the Stiefel manifold"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its records.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Start from a named preset; keys in --config override it.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Also write one two-column `k value` file per metric.
        #[arg(long)]
        emit_plotdata: bool,
    },
    /// Print the step-size and communication-round advice as JSON.
    Advise {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
    },
    /// Print the mixing matrix checks and its second singular value.
    ValidateGraph {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
    },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_DIVERGED: u8 = 2;

fn load(config: Option<&Path>, preset_name: Option<&str>) -> Result<ExperimentConfig, String> {
    let base = preset_name.map(preset).transpose().map_err(|e| e.to_string())?;
    let text = match config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None if base.is_some() => String::new(),
        None => return Err("either --config or --preset is required".into()),
    };
    parse_config_over(&text, base.as_ref()).map_err(|e| e.to_string())
}

fn summary_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".summary.json");
    out.with_file_name(name)
}

fn run(
    config: Option<PathBuf>,
    preset: Option<String>,
    out: Option<PathBuf>,
    format: Option<Format>,
    emit_plotdata: bool,
) -> Result<ExitCode, (u8, String)> {
    let cfg_err = |e: String| (EXIT_CONFIG, e);
    let mut cfg = load(config.as_deref(), preset.as_deref()).map_err(cfg_err)?;
    if let Some(f) = format {
        cfg.format = match f {
            Format::Csv => RecordFormat::Csv,
            Format::Jsonl => RecordFormat::Jsonl,
        };
    }
    if let Some(o) = out {
        cfg.output = Some(o);
    }
    let output = cfg.output.clone().unwrap_or_else(|| {
        PathBuf::from(match cfg.format {
            RecordFormat::Csv => "records.csv",
            RecordFormat::Jsonl => "records.jsonl",
        })
    });
    let result = run_experiment(&cfg);
    let io = |e: ddrs::Error| (EXIT_CONFIG, e.to_string());
    write_records(&result.records, &output, cfg.format).map_err(io)?;
    let summary = serde_json::to_string_pretty(&result.summary).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    std::fs::write(summary_path(&output), summary).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    if emit_plotdata {
        write_plotdata(&result.records, &output).map_err(io)?;
    }
    for w in &result.summary.warnings {
        eprintln!("warning: {w}");
    }
    if result.summary.violation_count > 0 {
        eprintln!("{} neighbourhood violations", result.summary.violation_count);
    }
    if let Some(r) = &result.summary.final_record {
        println!(
            "k={} consensus_sq={:.3e} stationarity_sq={:.3e} ds={}",
            r.k,
            r.consensus_sq,
            r.stationarity_sq,
            r.ds.map_or("-".into(), |d| format!("{d:.3e}"))
        );
    }
    match result.summary.status {
        RunStatus::Completed => Ok(ExitCode::SUCCESS),
        RunStatus::Diverged => Err((
            EXIT_DIVERGED,
            format!("diverged: {}", result.summary.error.unwrap_or_default()),
        )),
        RunStatus::Failed => Err((
            EXIT_CONFIG,
            format!("failed: {}", result.summary.error.unwrap_or_default()),
        )),
    }
}

fn advise(config: Option<PathBuf>, preset: Option<String>) -> Result<ExitCode, (u8, String)> {
    let cfg = load(config.as_deref(), preset.as_deref()).map_err(|e| (EXIT_CONFIG, e))?;
    let prep = prepare(&cfg).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    let advice = advice_for(&prep, &cfg).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    let json = serde_json::json!({ "alpha": prep.alpha, "t": cfg.t, "advice": advice });
    println!("{}", serde_json::to_string_pretty(&json).expect("advice serializes"));
    Ok(ExitCode::SUCCESS)
}

fn validate_graph(config: Option<PathBuf>, preset: Option<String>) -> Result<ExitCode, (u8, String)> {
    let cfg = load(config.as_deref(), preset.as_deref()).map_err(|e| (EXIT_CONFIG, e))?;
    let seeds = ddrs::harness::Seeds::resolve(&cfg);
    let n = cfg.problem.n();
    let graph = ddrs::harness::build_graph(&cfg.graph, n, seeds.graph).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    let w = ddrs::network::metropolis_weights(&graph).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    let json = serde_json::json!({
        "n": n,
        "edges": graph.edge_count(),
        "connected": graph.is_connected(),
        "graph_seed": seeds.graph,
        "sigma2": w.sigma2(),
        "stochasticity_defect": w.stochasticity_defect(),
    });
    println!("{}", serde_json::to_string_pretty(&json).expect("report serializes"));
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Run {
            config,
            preset,
            out,
            format,
            emit_plotdata,
        } => run(config, preset, out, format, emit_plotdata),
        Command::Advise { config, preset } => advise(config, preset),
        Command::ValidateGraph { config, preset } => validate_graph(config, preset),
    };
    match result {
        Ok(code) => code,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
