use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use formsum_lab::{apply_seed_override, execute, preset, LabError, Scenario, PRESETS, SEED_ENV};

#[derive(Parser)]
#[command(
    name = "formsum-lab",
    version,
    about = "Run form-sum laboratory scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a built-in preset.
    Run {
        /// Scenario JSON file.
        #[arg(required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Output directory (default: the scenario's `output`, else
        /// `formsum-lab-out/<name>`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List built-in presets.
    Presets,
}

fn load(config: Option<PathBuf>, preset_name: Option<String>) -> Result<Scenario, LabError> {
    match (config, preset_name) {
        (_, Some(name)) => preset(&name),
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
            Scenario::from_json(&text)
        }
        (None, None) => Err(LabError::Config("no scenario given".into())),
    }
}

fn run(
    config: Option<PathBuf>,
    preset_name: Option<String>,
    out: Option<PathBuf>,
    threads: Option<usize>,
) -> Result<bool, LabError> {
    let mut scenario = load(config, preset_name)?;
    apply_seed_override(&mut scenario, std::env::var(SEED_ENV).ok().as_deref())?;
    if let Some(k) = threads {
        if k == 0 {
            return Err(LabError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    }
    let dir = out
        .or_else(|| scenario.output.clone())
        .unwrap_or_else(|| PathBuf::from("formsum-lab-out").join(&scenario.name));
    let manifest = execute(&scenario, &dir)?;
    for (name, holds) in &manifest.verdicts {
        println!("{:<32} {}", name, if *holds { "pass" } else { "FAIL" });
    }
    println!(
        "{} -> {} ({:.2} s)",
        manifest.scenario,
        dir.display(),
        manifest.wall_time_s
    );
    Ok(manifest.passed)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Presets => {
            for name in PRESETS {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            preset,
            out,
            threads,
        } => match run(config, preset, out, threads) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("formsum-lab: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
    }
}
