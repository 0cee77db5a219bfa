//! `twqkd` command-line front-end: config-driven scans, curves and diagnostics.

mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::error::Error;
pub use config::Config;
use output::{write_outputs, Format, Provenance};

#[derive(Debug, Parser)]
#[command(name = "twqkd", version, about = "Holevo-information bounds and key efficiencies for two-way Gaussian QKD")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (overrides the config).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, Subcommand, PartialEq, Eq)]
pub enum Command {
    /// χ_E and E* over a (κ_S, κ_f) grid.
    ChiE,
    /// Midpoint convexity and κ_f monotonicity of E* on a grid.
    Convexity,
    /// Three-mode χ'_E against χ_E on a (κ_S, K_f) grid.
    Theorem2,
    /// Secret-key efficiency versus length.
    SkeCurve,
    /// Beam-splitter reduction of a correlation profile.
    Reduce,
    /// Heterodyne records from a Gaussian attack, as JSON lines.
    Simulate,
    /// Intrusion parameters from JSON-lines records.
    Estimate,
    /// First-order expansion around κ_f = κ_S.
    FirstOrder,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::ChiE => "chi-e",
            Command::Convexity => "convexity",
            Command::Theorem2 => "theorem2",
            Command::SkeCurve => "ske-curve",
            Command::Reduce => "reduce",
            Command::Simulate => "simulate",
            Command::Estimate => "estimate",
            Command::FirstOrder => "first-order",
        }
    }
}

/// Exit status for an error: 3 for numerical failures, 2 for everything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) => 3,
        _ => 2,
    }
}

fn error_json(e: &Error) -> String {
    let kind = match e {
        Error::Domain(_) => "domain",
        Error::Argument(_) => "argument",
        Error::Numerical(_) => "numerical",
        Error::Io(_) => "io",
        Error::Parse(_) => "parse",
    };
    serde_json::json!({ "error": kind, "message": e.to_string(), "exit_code": exit_code(e) }).to_string()
}

/// Loads the config, runs the command on a sized worker pool and writes the outputs.
/// Nothing is written unless the whole command succeeds.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, Error> {
    let path = cli.config.as_ref().ok_or_else(|| Error::argument("--config <path> is required"))?;
    let bytes = std::fs::read(path).map_err(|e| Error::argument(format!("cannot read config {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Parse("config is not UTF-8".into()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let cfg = Config::parse(&text, &base)?;
    let seed = cli.seed.or(cfg.seed);
    let workers = cli.workers.or(cfg.workers).unwrap_or(0);
    let prov = Provenance {
        command: cli.command.name().to_string(),
        config_sha256: Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect(),
        seed: if cli.command == Command::Simulate { Some(seed.unwrap_or(0)) } else { seed },
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::argument(format!("cannot start {workers} workers: {e}")))?;
    let files = pool.install(|| match cli.command {
        Command::ChiE => commands::chi_e(&cfg, &prov, cli.format),
        Command::Convexity => commands::convexity(&cfg, &prov, cli.format),
        Command::Theorem2 => commands::theorem2(&cfg, &prov, cli.format),
        Command::SkeCurve => commands::ske(&cfg, &prov, cli.format),
        Command::Reduce => commands::reduce(&cfg),
        Command::Simulate => commands::simulate(&cfg, seed.unwrap_or(0)),
        Command::Estimate => commands::estimate(&cfg, &prov, cli.format),
        Command::FirstOrder => commands::first_order(&cfg, &prov, cli.format),
    })?;
    write_outputs(&cli.out, &files)?;
    Ok(files.iter().map(|(name, _)| cli.out.join(name)).collect())
}

/// Parses arguments, runs, reports; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}
