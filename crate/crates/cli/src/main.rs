mod commands;
mod config;
mod output;

use std::ops::Range;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Failure;

#[derive(Parser)]
#[command(name = "varosc", version, about = "Variational spectra and wave-packet evolution for polynomial potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides output.dir)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Level range a..b (half-open)
    #[arg(long, global = true, value_parser = parse_levels)]
    levels: Option<Range<usize>>,

    /// Worker threads
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Energy levels and PMS parameters
    Spectrum,
    /// Trace per basis state over a log grid of omega
    TraceScan,
    /// Wave-packet observables in time
    Evolve,
    /// Level errors against a larger reference run
    Convergence,
}

fn parse_levels(s: &str) -> Result<Range<usize>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got `{s}`"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("bad start `{a}`: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("bad end `{b}`: {e}"))?;
    if a >= b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(a..b)
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config: missing".into()))?;
    let raw = config::load(path).map_err(|e| Failure::Config(e.0))?;
    let mut run = raw.validate().map_err(|e| Failure::Config(e.0))?;
    if let Some(out) = &cli.out {
        run.out_dir = out.clone();
    }
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(Failure::Config("--threads: must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Failure::Io(e.into()))?;
    }
    std::fs::create_dir_all(&run.out_dir)
        .map_err(|e| Failure::Io(anyhow::anyhow!("creating {}: {e}", run.out_dir.display())))?;
    match cli.command {
        Command::Spectrum => commands::spectrum(&run, cli.levels.clone()),
        Command::TraceScan => commands::trace_scan(&run),
        Command::Evolve => commands::evolve(&run),
        Command::Convergence => commands::convergence(&run, cli.levels.clone()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("varosc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_ranges() {
        assert_eq!(parse_levels("0..10").unwrap(), 0..10);
        assert!(parse_levels("5..5").is_err());
        assert!(parse_levels("3").is_err());
        assert!(parse_levels("a..3").is_err());
    }
}
