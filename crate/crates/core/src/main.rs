use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use thinshell::cli::{output::version, parse_config, run, CliError};

/// Diffusion and quantum transport on thin curved shells.
#[derive(Debug, Parser)]
#[command(name = "thinshell", version = version())]
struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Suppress the summary line.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = std::env::var("THINSHELL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a pool already in place is fine; the cap is advisory
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match execute(&args) {
        Ok(summary) => {
            if !args.quiet {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("thinshell: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<String, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let base = args.config.parent().map(PathBuf::from).unwrap_or_default();
    let cfg = parse_config(&text, &base)?;
    Ok(run(&cfg, &args.out)?.summary)
}
