mod args;
mod settings;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use kuiper::cone::build_cone_surface;
use kuiper::exec::{with_threads, Execution};
use kuiper::mesh::MeshOutput;
use kuiper::sweep::{run_sweep, SweepConfig};
use kuiper::verify::run_verify;
use kuiper::Error;

use args::{Cli, Command};
use settings::FileConfig;

/// Exit codes.
const VERIFY_FAILED: u8 = 1;
const INVALID: u8 = 2;
const OUT_OF_SUBSOLUTION: u8 = 3;
const IO: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn invalid(message: String) -> Self {
        Failure { code: INVALID, message }
    }

    pub fn io(message: String) -> Self {
        Failure { code: IO, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::OutOfSubsolution { .. } => OUT_OF_SUBSOLUTION,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => IO,
            _ => INVALID,
        };
        Failure { code, message: e.to_string() }
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let threads = match cli.threads {
        Some(t) => Some(t as usize),
        None => file.threads()?,
    };
    let exec = Execution::default();
    match cli.command {
        Command::Cone(args) => {
            let run = settings::cone(&args, &file)?;
            run.config.validate()?;
            let (sample, report) = with_threads(threads, || build_cone_surface(&run.config, exec))??;
            MeshOutput::from_sample(&sample, run.format)?
                .write_to(&run.out)
                .map_err(|e| Failure::io(format!("{}: {e}", run.out.display())))?;
            write_or_print(run.report.as_deref(), &(report.to_json()? + "\n"))?;
            log::info!("wrote {}", run.out.display());
            Ok(())
        }
        Command::Sweep(args) => {
            let run = settings::sweep(&args, &file)?;
            let cfg = SweepConfig { ns: run.ns, base: run.base, out_dir: run.out, format: run.format };
            let rows = with_threads(threads, || run_sweep(&cfg, exec))??;
            for row in rows {
                println!(
                    "N = {:>4}  c0 = {:.6e}  max|e11| = {:.4e}  mesh = {}",
                    row.n, row.c0_distance, row.max_e11, row.mesh
                );
            }
            Ok(())
        }
        Command::Verify(args) => {
            let run = settings::verify(&args, &file)?;
            let summary = with_threads(threads, || run_verify(&run.config, exec))??;
            write_or_print(run.report.as_deref(), &(summary.to_json()? + "\n"))?;
            for check in summary.checks.iter().filter(|c| !c.passed) {
                eprintln!("check {} failed: {}", check.name, check.detail);
            }
            if summary.passed {
                Ok(())
            } else {
                Err(Failure { code: VERIFY_FAILED, message: "verification failed".into() })
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INVALID } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
