use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use poisson_spectral::homology::{verify_certificate, CommutatorCertificate};
use poisson_spectral::pipeline::{gallery, gallery_entry, run, RunConfig, RunReport};
use serde::Serialize;
use thiserror::Error;

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Agreement required between a stated and a recomputed certificate residual.
const VERIFY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] poisson_spectral::Error),
}

#[derive(Parser)]
#[command(
    name = "poisson-spectral",
    version,
    about = "Poisson homology and perfectness diagnostics on toral models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analyses named in a config file or a gallery entry.
    Run(RunArgs),
    /// List the built-in configs, or write them (and optionally their reports) to a directory.
    Gallery {
        /// Directory to write `<name>.json` configs into.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also run every entry and write `<name>.report.json`.
        #[arg(long, requires = "out")]
        run: bool,
    },
    /// Recompute the residual of every commutator certificate in a report or certificate file.
    VerifyCertificate {
        file: PathBuf,
        #[arg(long, default_value_t = VERIFY_TOLERANCE)]
        tolerance: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file.
    config: Option<PathBuf>,
    /// Use a built-in gallery config instead of a file.
    #[arg(long, conflicts_with = "config")]
    gallery: Option<String>,
    #[arg(long)]
    truncation: Option<i64>,
    #[arg(long)]
    t_grid: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    divisor_floor: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.into(),
        source,
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.into(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn load_config(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut config = match (&args.config, &args.gallery) {
        (Some(path), _) => read_json::<RunConfig>(path)?,
        (None, Some(name)) => gallery_entry(name).ok_or_else(|| {
            let names: Vec<String> = gallery().into_iter().map(|c| c.name).collect();
            CliError::Usage(format!(
                "no gallery entry '{name}'; known: {}",
                names.join(", ")
            ))
        })?,
        (None, None) => {
            return Err(CliError::Usage(
                "give a config file or --gallery NAME".into(),
            ))
        }
    };
    if let Some(n) = args.truncation {
        config.truncation = n;
    }
    if let Some(g) = args.t_grid {
        config.t_grid = g;
    }
    if let Some(t) = args.tol {
        config.tol = t;
    }
    if let Some(f) = args.divisor_floor {
        config.divisor_floor = f;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    Ok(config)
}

fn log_report(report: &RunReport) {
    eprintln!("model: {}", report.model);
    for (key, ms) in &report.timings_ms {
        eprintln!("  {key}: {ms:.1} ms");
    }
}

fn cmd_run(args: RunArgs) -> Result<u8, CliError> {
    let config = load_config(&args)?;
    eprintln!("running '{}' at N = {}", config.name, config.truncation);
    let report = run(&config)?;
    log_report(&report);
    write_json(args.out.as_deref(), &report)?;
    if report.has_numerical_failure() {
        eprintln!("numerical failure in at least one analysis; see the report");
        return Ok(EXIT_NUMERICAL);
    }
    Ok(0)
}

fn cmd_gallery(out: Option<PathBuf>, and_run: bool) -> Result<u8, CliError> {
    let Some(dir) = out else {
        for c in gallery() {
            println!("{}", c.name);
        }
        return Ok(0);
    };
    fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let mut code = 0;
    for c in gallery() {
        write_json(Some(&dir.join(format!("{}.json", c.name))), &c)?;
        if and_run {
            eprintln!("running '{}'", c.name);
            let report = run(&c)?;
            log_report(&report);
            write_json(Some(&dir.join(format!("{}.report.json", c.name))), &report)?;
            if report.has_numerical_failure() {
                code = EXIT_NUMERICAL;
            }
        }
    }
    Ok(code)
}

#[derive(Serialize)]
struct Verification {
    index: usize,
    stated_residual: f64,
    recomputed_residual: f64,
    difference: f64,
    agrees: bool,
}

/// A report carries certificates under its `decompose` result; a bare file is one certificate.
fn certificates_in(path: &Path) -> Result<Vec<CommutatorCertificate>, CliError> {
    let value: serde_json::Value = read_json(path)?;
    let as_json = |source| CliError::Json {
        path: path.into(),
        source,
    };
    if value.get("schema").is_some() {
        let report: RunReport = serde_json::from_value(value).map_err(as_json)?;
        Ok(report.certificates().into_iter().cloned().collect())
    } else {
        Ok(vec![serde_json::from_value(value).map_err(as_json)?])
    }
}

fn cmd_verify(file: PathBuf, tolerance: f64) -> Result<u8, CliError> {
    let certs = certificates_in(&file)?;
    if certs.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: no commutator certificates found",
            file.display()
        )));
    }
    let mut rows = Vec::new();
    for (index, cert) in certs.iter().enumerate() {
        let recomputed = verify_certificate(cert)?;
        let difference = (recomputed - cert.residual).abs();
        rows.push(Verification {
            index,
            stated_residual: cert.residual,
            recomputed_residual: recomputed,
            difference,
            agrees: difference <= tolerance,
        });
    }
    write_json(None, &rows)?;
    let bad = rows.iter().filter(|r| !r.agrees).count();
    if bad > 0 {
        eprintln!(
            "{bad} of {} certificates disagree with their stated residual",
            rows.len()
        );
        return Ok(EXIT_MISMATCH);
    }
    eprintln!("{} certificates verified", rows.len());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Gallery { out, run } => cmd_gallery(out, run),
        Command::VerifyCertificate { file, tolerance } => cmd_verify(file, tolerance),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
