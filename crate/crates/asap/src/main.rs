use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use asap::cli::{cmd_analyze, cmd_diff, cmd_structure, load_config, Config};

#[derive(Parser)]
#[command(name = "asap", version, about = "Analyze and structure software process pattern texts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the annotation pipeline over a corpus directory
    Analyze {
        corpus_dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Structure previously analyzed (inline-XML) documents into unified pattern XML
    Structure {
        annotated_dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a hand-annotated key against a response document
    Diff {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        response: PathBuf,
        /// Comma-separated annotation type names
        #[arg(long, value_delimiter = ',')]
        types: Vec<String>,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
}

fn resolve_config(explicit: Option<PathBuf>) -> Result<Config> {
    let path = match explicit {
        Some(p) => p,
        None => match std::env::var_os("ASAP_RESOURCES") {
            Some(root) => PathBuf::from(root).join("config/default.conf"),
            None => bail!(
                "no --config given and ASAP_RESOURCES is not set; \
                 point --config at a config file or ASAP_RESOURCES at the resource root"
            ),
        },
    };
    load_config(&path).with_context(|| format!("loading config {}", path.display()))
}

fn main() -> Result<ExitCode> {
    env_logger::init();
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze { corpus_dir, config, out } => {
            let config = resolve_config(config)?;
            let out_dir = out.unwrap_or_else(|| config.output_dir.clone());
            let manifest = cmd_analyze(&corpus_dir, &config, &out_dir)?;
            let failures = manifest.documents.iter().filter(|d| d.error.is_some()).count();
            eprintln!(
                "analyzed {} document(s), {} failure(s); outputs in {}",
                manifest.documents.len(),
                failures,
                out_dir.display()
            );
            Ok(if manifest.has_errors() { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Structure { annotated_dir, config, out } => {
            let config = resolve_config(config)?;
            let out_dir = out.unwrap_or_else(|| config.output_dir.clone());
            let manifest = cmd_structure(&annotated_dir, &config, &out_dir)?;
            let invalid = manifest
                .documents
                .iter()
                .filter(|d| d.valid == Some(false))
                .count();
            eprintln!(
                "structured {} document(s), {} invalid; outputs in {}",
                manifest.documents.len(),
                invalid,
                out_dir.display()
            );
            Ok(if manifest.has_errors() { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Diff { key, response, types, beta } => {
            if types.is_empty() {
                bail!("--types requires at least one annotation type");
            }
            let type_refs: Vec<&str> = types.iter().map(String::as_str).collect();
            let outcome = cmd_diff(&key, &response, &type_refs, beta)?;
            print!("{}", outcome.rendered);
            Ok(if outcome.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}
