use clap::{Parser, Subcommand, ValueEnum};
use doxa::commands::{analyze, convert, validate, AnalyzeFlags, Question};
use doxa::relevance::LatticeMode;
use doxa::report::Report;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "doxa", version, about = "Doxastic analysis of autonomous systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Lattice {
    Full,
    Frontier,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a bundle and run every validator.
    Validate {
        bundle: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer one question about a bundle.
    Analyze {
        /// dominance, best-actions, decisive, synth-autonomous, conserve-doxastic,
        /// conserve-autonomous, weak-relevance, relevance or simulate
        question: Question,
        bundle: PathBuf,
        /// Memory bound for bounded synthesis.
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long, value_enum, default_value = "full")]
        lattice: Lattice,
        /// Environment script: a name from the bundle or a file path.
        #[arg(long)]
        env: Option<String>,
        /// Comma-separated observation universe for `relevance`.
        #[arg(long, value_delimiter = ',')]
        pool: Option<Vec<String>>,
        /// Comma-separated observations replacing the bundle's.
        #[arg(long, value_delimiter = ',')]
        observe: Option<Vec<String>>,
        /// Directory for the report and its artifacts.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the JSON mirror of a bundle.
    Convert {
        bundle: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn finish(report: Report, out: Option<PathBuf>) -> ExitCode {
    let _ = std::io::stdout().write_all(report.render().as_bytes());
    if let Some(dir) = out {
        if let Err(e) = report.write_dir(&dir) {
            eprintln!("error: cannot write {}: {e}", dir.display());
            return ExitCode::from(3);
        }
    }
    ExitCode::from(report.verdict.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("DOXA_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: DOXA_THREADS ignored: {e}");
        }
    }
    let start = Instant::now();
    let code = match cli.command {
        Command::Validate { bundle, out } => finish(validate(&bundle), out),
        Command::Analyze { question, bundle, bound, lattice, env, pool, observe, out } => {
            let lattice = match lattice {
                Lattice::Full => LatticeMode::Full,
                Lattice::Frontier => LatticeMode::Frontier,
            };
            let flags = AnalyzeFlags { bound, lattice, env, pool, observe };
            finish(analyze(question, &bundle, &flags), out)
        }
        Command::Convert { bundle, out } => match convert(&bundle) {
            Ok(json) => match out {
                Some(p) => match std::fs::write(&p, json + "\n") {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => {
                        eprintln!("error: cannot write {}: {e}", p.display());
                        ExitCode::from(3)
                    }
                },
                None => {
                    let _ = writeln!(std::io::stdout(), "{json}");
                    ExitCode::SUCCESS
                }
            },
            Err(report) => finish(report, None),
        },
    };
    eprintln!("time_ms: {}", start.elapsed().as_millis());
    code
}
