use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use nullform::compare::compare_dirs;
use nullform::{catalog_listing, load_scenario, output_root, run, CliError};

#[derive(Parser)]
#[command(name = "nullform", version, about = "Runs nullform scenarios and compares them with goldens")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        config: PathBuf,
        /// Output root; defaults to $NULLFORM_OUT, then ./nullform-out.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Rerun even if the output directory holds a finished run.
        #[arg(long)]
        force: bool,
    },
    /// Compare a run directory with a golden directory.
    Compare { out: PathBuf, golden: PathBuf },
    /// List catalog potentials, profile kinds and pipelines.
    ListCatalog,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cmd: Command) -> Result<u8, CliError> {
    match cmd {
        Command::Run { config, out, jobs, force } => {
            if let Some(k) = jobs {
                if k == 0 {
                    return Err(CliError::Config { field: "--jobs".into(), message: "must be at least 1".into() });
                }
                rayon::ThreadPoolBuilder::new().num_threads(k).build_global().map_err(|e| CliError::Compare(e.to_string()))?;
            }
            let scenario = load_scenario(&config)?;
            let root = output_root(out.as_deref());
            let t = Instant::now();
            let outcome = run(&scenario, &root, force)?;
            let pass = outcome.summary.get("pass").and_then(|v| v.as_bool()).unwrap_or(false);
            if outcome.reused {
                println!("{}: up to date in {}", scenario.name, outcome.dir.display());
            } else {
                println!(
                    "{}: {} in {:.1} s -> {}",
                    scenario.name,
                    if pass { "PASS" } else { "FAIL" },
                    t.elapsed().as_secs_f64(),
                    outcome.dir.display()
                );
            }
            Ok(0)
        }
        Command::Compare { out, golden } => {
            let rep = compare_dirs(&out, &golden)?;
            for f in &rep.failures {
                println!("FAIL {f}");
            }
            if rep.pass() {
                println!("PASS {} quantities match {}", rep.checked, golden.display());
                Ok(0)
            } else {
                println!("{} of {} quantities differ", rep.failures.len(), rep.checked);
                Ok(1)
            }
        }
        Command::ListCatalog => {
            for line in catalog_listing() {
                println!("{line}");
            }
            Ok(0)
        }
    }
}
