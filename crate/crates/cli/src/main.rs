use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use microhyp::{builtins, cache_dir, load_config, run, write_outputs, CliError, ErrorObject};
use wavefront::SpectrumCache;

#[derive(Parser)]
#[command(name = "microhyp", version, about = "Numerical checks of hypoellipticity conditions and generalized wave front sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a JSON config; exit 0 if all pass, 2 on a failure, 1 on a config or check error
    Run {
        config: PathBuf,
        /// overrides `output_dir`
        #[arg(long)]
        out: Option<PathBuf>,
        /// skip the spectrum cache
        #[arg(long)]
        no_cache: bool,
    },
    /// Print the catalog of built-in symbols as JSON
    ListBuiltins,
    /// Manage the spectrum cache (`MICROHYP_CACHE_DIR`)
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand)]
enum CacheAction {
    /// Remove every cached spectrum
    Clear,
}

fn fail(e: &CliError) -> ExitCode {
    let obj = serde_json::json!({ "error": ErrorObject::from(e) });
    eprintln!("{obj}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListBuiltins => {
            // a closed pipe (`| head`) is not an error
            let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(builtins::CATALOG).expect("static catalog"));
            ExitCode::SUCCESS
        }
        Command::Cache { action: CacheAction::Clear } => {
            let dir = cache_dir();
            match SpectrumCache::new(&dir).and_then(|c| c.clear()) {
                Ok(n) => {
                    println!("removed {n} cached spectra from {}", dir.display());
                    ExitCode::SUCCESS
                }
                Err(source) => fail(&CliError::Io { path: dir, source }),
            }
        }
        Command::Run { config, out, no_cache } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            let cache = if no_cache {
                None
            } else {
                let dir = cache_dir();
                match SpectrumCache::new(&dir) {
                    Ok(c) => Some(c),
                    Err(source) => return fail(&CliError::Io { path: dir, source }),
                }
            };
            let report = match run(&cfg, cache.as_ref()) {
                Ok(r) => r,
                Err(e) => return fail(&e),
            };
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            if let Err(e) = write_outputs(&report, &dir) {
                return fail(&e);
            }
            for c in &report.checks {
                let status = serde_json::to_string(&c.status).expect("status serializes");
                println!("{:>2} {:<18} {}", c.index, c.op, status.trim_matches('"'));
            }
            println!("report: {}", dir.join("report.json").display());
            ExitCode::from(report.exit_code as u8)
        }
    }
}
