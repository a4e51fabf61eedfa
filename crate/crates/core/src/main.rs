use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pointgap::cli::{checks, presets, run_file, RunOptions};

#[derive(Parser)]
#[command(name = "pointgap", version, about = "Point-gap topology of small non-Hermitian fermion models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one experiment config.
    Run {
        config: PathBuf,
        /// Permit sectors with more than 2000 states.
        #[arg(long)]
        allow_heavy: bool,
    },
    /// List the preset catalog.
    Presets {
        /// Also write every preset as `<name>.json` into this directory.
        #[arg(long, value_name = "DIR")]
        write: Option<PathBuf>,
    },
    /// Run the invariant and oracle property suite.
    Check,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, allow_heavy } => match run_file(&config, RunOptions { allow_heavy }) {
            Ok(manifest) => {
                for f in &manifest.files {
                    println!("{}  {}", f.sha256, f.path);
                }
                println!("done in {:.3} s", manifest.wall_time_seconds);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::Presets { write } => {
            for p in presets::catalog() {
                let flag = if p.heavy { "  [heavy]" } else { "" };
                println!("{:<34} {}{}", p.name, p.description, flag);
            }
            if let Some(dir) = write {
                match presets::write_all(&dir) {
                    Ok(paths) => println!("wrote {} presets to {}", paths.len(), dir.display()),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(3);
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Command::Check => {
            let results = checks::run_all();
            let mut failed = 0;
            for r in &results {
                let tag = if r.passed { "PASS" } else { "FAIL" };
                println!("{tag} {:<28} {:>7.3} s  {}", r.name, r.seconds, r.detail);
                failed += usize::from(!r.passed);
            }
            println!("{} of {} checks passed", results.len() - failed, results.len());
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
