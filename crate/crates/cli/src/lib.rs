//! Command-line front end: reads a run configuration, drives the material
//! point through the selected loading program and writes the records.
//!
//! Exit codes: 0 on success, 1 on a configuration or I/O error, 2 when the
//! stress update or the mixed-control iteration fails to converge.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use mwplast::config::{parse_program, RunConfig, ScenarioSelector};
use mwplast::driver::{run_program, LoadingProgram};
use mwplast::output::{write_records, Format, Summary};
use mwplast::{Error, Material};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NONCONVERGENCE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "mwplast", version, about = "Menetrey-Willam material-point driver")]
pub struct Args {
    /// Run configuration (flat `key = value` file).
    #[arg(long)]
    pub config: PathBuf,
    /// Preset name (2.1, 2.2, 2.2-unload, 2.3, 2.4) or program file; overrides run.scenario.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Output file; overrides run.output. Records go to stdout when neither is set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_parser = ["csv", "json-lines"])]
    pub format: String,
    /// Suppress the summary line.
    #[arg(long)]
    pub quiet: bool,
}

/// Runs with the process's standard streams.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs with explicit output streams.
pub fn run_cli_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    match execute(&args, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_convergence_failure() {
        EXIT_NONCONVERGENCE
    } else {
        EXIT_CONFIG
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Loads the configuration and the loading program. Program files named by
/// a relative path are looked up next to the configuration file.
pub fn load(args: &Args) -> Result<(RunConfig, LoadingProgram), Error> {
    let mut config = RunConfig::parse(&read(&args.config)?)?;
    if let Some(s) = &args.scenario {
        config = config.with_scenario(s);
    }
    config.validate()?;
    let program = match &config.scenario {
        None => {
            return Err(Error::Validation(
                "no scenario given (run.scenario or --scenario)".into(),
            ))
        }
        Some(ScenarioSelector::Preset(_)) => config.preset_program().expect("preset"),
        Some(ScenarioSelector::File(path)) => {
            let path = match args.config.parent() {
                Some(dir) if path.is_relative() => dir.join(path),
                _ => path.clone(),
            };
            let label = path.display().to_string();
            let program = parse_program(&read(&path)?, &label)?;
            match config.increments {
                Some(n) => program.with_increments(n),
                None => program,
            }
        }
    };
    Ok((config, program))
}

fn execute(args: &Args, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Error> {
    let (config, program) = load(args)?;
    let format: Format = args.format.parse()?;
    let material = Material::new(config.material_params()?)?;
    let tol = config.tolerances(&material.params)?;
    let records = run_program(&program, &material, &tol)?;

    let out_path = args.out.clone().or_else(|| config.output.clone());
    let summary = Summary::new(&program, &records, &material);
    match &out_path {
        Some(path) => {
            let label = path.display().to_string();
            let mut file = fs::File::create(path).map_err(|e| Error::Io {
                path: label.clone(),
                message: e.to_string(),
            })?;
            write_records(&records, format, &mut file, &label)?;
            if !args.quiet {
                let _ = writeln!(stdout, "{summary}");
            }
        }
        None => {
            write_records(&records, format, stdout, "<stdout>")?;
            if !args.quiet {
                let _ = writeln!(stderr, "{summary}");
            }
        }
    }
    Ok(())
}
