use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use chrono::Utc;
use clap::{Args, Parser, Subcommand};
use zenodrive_cli::commands::{self, Table};
use zenodrive_cli::config::{ExperimentConfig, Settings};
use zenodrive_cli::output::write_run;
use zenodrive_cli::{CliError, CliResult};

/// Decoherence-assisted driving experiments; every run writes CSV tables,
/// the effective config and run metadata into one output directory.
#[derive(Parser)]
#[command(name = "zenodrive", version)]
struct Cli {
    /// Flat `key = value` config file applied over the defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: runs/<command>-<UTC timestamp>].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads [default: all cores].
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground-state gap and metric on a (lambda, chi) grid.
    MetricMap(Overrides),
    /// Discretized driving paths with step lengths and plane speed.
    Path(Overrides),
    /// Stroboscopic infidelity against the number of steps.
    Zeno(Overrides),
    /// Coherent infidelity and the minimal K that beats it.
    Compare(Overrides),
    /// Reduced coherence of the qubit + spectator gadget.
    Gadget(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// Config overrides, e.g. `--model.N=6 --zeno.K 10,100`.
    #[arg(
        trailing_var_arg = true,
        allow_hyphen_values = true,
        value_name = "--KEY=VALUE"
    )]
    set: Vec<String>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::MetricMap(_) => "metric-map",
            Self::Path(_) => "path",
            Self::Zeno(_) => "zeno",
            Self::Compare(_) => "compare",
            Self::Gadget(_) => "gadget",
        }
    }

    fn overrides(&self) -> &[String] {
        match self {
            Self::MetricMap(o)
            | Self::Path(o)
            | Self::Zeno(o)
            | Self::Compare(o)
            | Self::Gadget(o) => &o.set,
        }
    }
}

/// Splits `--key=value`, `--key value` and `key=value` tokens.
fn parse_overrides(tokens: &[String]) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = tokens.iter();
    while let Some(tok) = it.next() {
        let bare = tok.trim_start_matches('-');
        if let Some((k, v)) = bare.split_once('=') {
            out.push((k.to_string(), v.to_string()));
        } else if tok.starts_with("--") {
            let v = it
                .next()
                .ok_or_else(|| CliError::Config(format!("{tok} needs a value")))?;
            out.push((bare.to_string(), v.clone()));
        } else {
            return Err(CliError::Config(format!("cannot read override '{tok}'")));
        }
    }
    Ok(out)
}

fn run(mut cli: Cli) -> CliResult<()> {
    let started = Utc::now();
    let clock = Instant::now();
    let mut settings = Settings::default();
    let overrides = parse_overrides(cli.command.overrides())?;
    // run-control flags may also appear after the subcommand
    for (k, v) in &overrides {
        match k.as_str() {
            "config" => cli.config = Some(v.into()),
            "out" => cli.out = Some(v.into()),
            "jobs" => {
                cli.jobs = Some(
                    v.parse()
                        .map_err(|_| CliError::Config(format!("--jobs: '{v}'")))?,
                )
            }
            _ => {}
        }
    }
    if let Some(path) = &cli.config {
        settings.merge_file(path)?;
    }
    for (k, v) in &overrides {
        if !matches!(k.as_str(), "config" | "out" | "jobs") {
            settings.set(k, v)?;
        }
    }
    let cfg = ExperimentConfig::try_from(&settings)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Pool(e.to_string()))?;
    let name = cli.command.name();
    log::info!("running {name}");
    let tables: Vec<Table> = pool.install(|| match &cli.command {
        Command::MetricMap(_) => commands::metric_map(&cfg),
        Command::Path(_) => commands::path(&cfg),
        Command::Zeno(_) => commands::zeno(&cfg),
        Command::Compare(_) => commands::compare(&cfg),
        Command::Gadget(_) => commands::gadget(&cfg),
    })?;
    let dir = cli.out.unwrap_or_else(|| {
        PathBuf::from("runs").join(format!("{name}-{}", started.format("%Y%m%dT%H%M%S")))
    });
    write_run(&dir, name, &settings, &tables, started, clock.elapsed())?;
    println!("{}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
