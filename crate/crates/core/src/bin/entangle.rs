use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;

use entangle_core::cli::{parse_config, run, Experiment};

/// Run one experiment from a JSON config and write CSV + .meta.json.
#[derive(Debug, Parser)]
#[command(name = "entangle", version)]
struct Args {
    /// Path to the JSON run config.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fock cutoff override.
    #[arg(long)]
    cutoff: Option<usize>,
    /// Accepted for interface compatibility; nothing here is random.
    #[arg(long)]
    seedless: bool,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<()> {
    let args = Args::parse();
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    let mut config = parse_config(&text).with_context(|| format!("in {}", args.config.display()))?;
    if let Some(n) = args.cutoff {
        if n == 0 {
            bail!("--cutoff must be >= 1");
        }
        match config.experiment() {
            Experiment::Converge => bail!("--cutoff does not apply to converge; set start_cutoff"),
            _ => config.fock_cutoff = Some(n),
        }
    }
    let out = match (&args.out, &config.output) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => bail!("no output path: give --out or set `output` in the config"),
    };
    config.output = Some(out.display().to_string());
    let report = run(&config, &out)?;
    eprintln!("wrote {} rows to {} (+ {})", report.rows, report.csv.display(), report.meta.display());
    Ok(())
}
