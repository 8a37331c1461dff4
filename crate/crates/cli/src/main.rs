use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use conetri::run::{execute, Format, RandomSpec, RunConfig, RunOptions, Source, DEFAULT_MAX_CONES};
use conetri::CliError;
use conetri_core::verify::final_bounds;

#[derive(Parser)]
#[command(name = "conetri", version, about = "Unimodular triangulations of lattice cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(clap::Args)]
struct Common {
    /// Check every certificate and exit with status 2 if one fails.
    #[arg(long)]
    verify: bool,
    /// Refine each cone of the 2-triangulation on its own.
    #[arg(long)]
    isolated: bool,
    /// Give up on refinements that need more cones than this.
    #[arg(long, default_value_t = DEFAULT_MAX_CONES)]
    max_cones: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Triangulate the cone in a JSON document.
    Run {
        input: PathBuf,
        /// Also write the trace of the power-of-two reduction to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Triangulate seeded random cones.
    Random {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        bound: i64,
        #[arg(long)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include the final cone lists in the report.
        #[arg(long)]
        cones: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Print the length and multiplicity bounds for a multiplicity.
    Bounds {
        #[arg(long)]
        mu: u64,
        #[arg(long)]
        dim: usize,
    },
}

fn options(common: &Common, trace: bool, include_cones: bool) -> RunOptions {
    RunOptions {
        verify: common.verify,
        trace,
        isolated: common.isolated,
        include_cones,
        max_cones: Some(common.max_cones),
    }
}

fn format(f: OutputFormat) -> Format {
    match f {
        OutputFormat::Json => Format::Json,
        OutputFormat::Text => Format::Text,
    }
}

fn bounds(mu: u64, dim: usize) -> Result<String, CliError> {
    let b = final_bounds(mu, dim)?;
    let doc = serde_json::json!({
        "mu": mu,
        "dimension": dim,
        "thm": b.thm,
        "cor": b.cor,
        "mu_ceiling": b.mu_ceiling,
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, trace_path) = match cli.command {
        Command::Bounds { mu, dim } => {
            return match bounds(mu, dim) {
                Ok(doc) => {
                    print!("{doc}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            };
        }
        Command::Run {
            input,
            trace,
            common,
        } => (
            RunConfig {
                source: Source::File(input),
                seed: 0,
                format: format(common.format),
                options: options(&common, trace.is_some(), true),
            },
            trace,
        ),
        Command::Random {
            dim,
            bound,
            count,
            seed,
            cones,
            common,
        } => (
            RunConfig {
                source: Source::Random(RandomSpec {
                    dimension: dim,
                    bound,
                    count,
                }),
                seed,
                format: format(common.format),
                options: options(&common, false, cones),
            },
            None,
        ),
    };

    let execution = match execute(&cfg) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for w in &execution.warnings {
        eprintln!("warning: {w}");
    }
    if let (Some(path), Some(trace)) = (&trace_path, &execution.trace) {
        if let Err(source) = std::fs::write(path, trace) {
            let e = CliError::Write {
                path: path.clone(),
                source,
            };
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    print!("{}", execution.document);
    match execution.exit_code {
        0 => {}
        2 => eprintln!("certificate failed: {}", execution.failing.join(", ")),
        3 => eprintln!("refinement exceeded the cone limit of {}", cfg.options.max_cones.unwrap_or(0)),
        _ => {}
    }
    ExitCode::from(execution.exit_code as u8)
}
