use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use toral_rigidity_cli::{cmd_analyze, cmd_certify, cmd_rigidity, RunConfig, THREADS_ENV};

#[derive(Parser)]
#[command(name = "toral-rigidity", version, about = "Analyze toral actions and trivialize circle cocycles over them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the report and diagram; without it the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Continue past a failed certification.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum, chambers and structural flags.
    Analyze(Common),
    /// Bunching, PH membership and robustness certificates.
    Certify(Common),
    /// Invariant sections, holonomies, transfer map and residuals.
    Rigidity(Common),
}

fn write_json<R: Serialize>(report: &R, common: &Common, cfg: &RunConfig, default: &str) -> Result<(), String> {
    let json = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    match (&common.out, &cfg.outputs.report) {
        (None, None) => {
            println!("{json}");
            Ok(())
        }
        (dir, name) => {
            let path = dir.as_deref().unwrap_or(Path::new(".")).join(name.as_deref().unwrap_or(Path::new(default)));
            write_file(&path, &json)
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
    }
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<bool, String> {
    let common = match &cli.command {
        Command::Analyze(c) | Command::Certify(c) | Command::Rigidity(c) => c,
    };
    let cfg = RunConfig::load(&common.config).map_err(|e| e.to_string())?;
    let seed = common.seed.unwrap_or(cfg.seed);
    match &cli.command {
        Command::Analyze(_) => {
            let a = cmd_analyze(&cfg, seed).map_err(|e| e.to_string())?;
            write_json(&a.report, common, &cfg, "analyze.json")?;
            if let Some(svg) = &a.diagram {
                if common.out.is_some() || cfg.outputs.diagram.is_some() {
                    let dir = common.out.as_deref().unwrap_or(Path::new("."));
                    write_file(&dir.join(cfg.outputs.diagram.as_deref().unwrap_or(Path::new("chambers.svg"))), svg)?;
                }
            }
            Ok(true)
        }
        Command::Certify(_) => {
            let r = cmd_certify(&cfg, seed).map_err(|e| e.to_string())?;
            write_json(&r, common, &cfg, "certify.json")?;
            Ok(r.passed)
        }
        Command::Rigidity(_) => {
            let r = cmd_rigidity(&cfg, seed, common.force).map_err(|e| e.to_string())?;
            write_json(&r, common, &cfg, "rigidity.json")?;
            if let Some(f) = &r.coboundary_failure {
                eprintln!("coboundary: {f}");
            }
            Ok(r.within_tolerance)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
