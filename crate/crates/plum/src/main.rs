use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use plum::commands::{self, ReportArgs, RunArgs, ScoreArgs};
use plum::emit::Format;
use plum_core::Language;

#[derive(Parser)]
#[command(name = "plum", version, about = "Politeness experiment harness and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a prompt tree and print a per-file report.
    ValidateCorpus {
        root: PathBuf,
        /// Require all fifteen files with exactly 100 prompts each.
        #[arg(long)]
        strict: bool,
    },
    /// Dispatch the trial plan and append results to a CSV.
    Run {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "raw,pol,imp")]
        conditions: String,
        /// Continue an existing results file, retrying failed keys.
        #[arg(long)]
        resume: bool,
    },
    /// Score a results CSV with all eight parameters.
    Score {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// `mock` or the sidecar base URL.
        #[arg(long)]
        backend: String,
        #[arg(long)]
        k: Option<usize>,
        /// Config whose priming scripts define the retention context.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// ANOVA, Tukey HSD and effect sizes for one language.
    Stats {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long)]
        language: Language,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the six hypotheses.
    Hypotheses {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit every table with a digest manifest.
    Report {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv,text")]
        formats: String,
        /// Printed marginal tables to compare against.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<bool> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::ValidateCorpus { root, strict } => commands::validate_corpus(&root, strict, &mut stdout),
        Command::Run { corpus, config, out, conditions, resume } => {
            let conditions = commands::parse_conditions(&conditions)?;
            let s = commands::run(&RunArgs { corpus, config, out, conditions, resume }, &mut stdout)?;
            Ok(s.failed == 0)
        }
        Command::Score { input, out, backend, k, config } => {
            commands::score(&ScoreArgs { input, out, backend, k, config }, &mut stdout)?;
            Ok(true)
        }
        Command::Stats { fixture, language, out } => {
            let m = commands::stats(&fixture, language, &out)?;
            println!("wrote {} files to {}", m.files.len(), out.display());
            Ok(true)
        }
        Command::Hypotheses { fixture, out } => {
            let (report, _) = commands::hypotheses(&fixture, &out)?;
            for row in &report.summary {
                println!("{:<3} {:<20} {}", row.id.code(), row.verdict.as_str(), row.basis);
            }
            Ok(true)
        }
        Command::Report { fixture, out, formats, reference } => {
            let formats = Format::parse_list(&formats)?;
            let m = commands::report(&ReportArgs { fixture, out: out.clone(), formats, reference })?;
            println!("wrote {} files to {}", m.files.len(), out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
