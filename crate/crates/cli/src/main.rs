use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use degree_tool::scenario::Format;
use degree_tool::{parse_scenario, run, write_outputs, ScenarioError, EXIT_IO};

#[derive(Parser)]
#[command(name = "degree-tool", version, about = "Degree computations for maximal monotone maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    #[value(name = "json+csv")]
    JsonCsv,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its report.
    Run {
        scenario: PathBuf,
        /// Directory for the report files (default: the scenario's output path).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Check a scenario file against the schema.
    Validate { scenario: PathBuf },
    /// Gallery operators.
    Gallery {
        #[command(subcommand)]
        what: GalleryCommand,
    },
}

#[derive(Subcommand)]
enum GalleryCommand {
    /// List operator names and parameters.
    List,
}

fn load(path: &PathBuf) -> Result<degree_tool::Scenario, ExitCode> {
    let bytes = std::fs::read(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_IO as u8)
    })?;
    parse_scenario(&bytes).map_err(|e| {
        match &e {
            ScenarioError::Parse { .. } => eprintln!("{}: {e}", path.display()),
            ScenarioError::Schema(vs) => {
                eprintln!("{}: {} schema violation(s)", path.display(), vs.len());
                for v in vs {
                    eprintln!("  {}: {}", v.field, v.message);
                }
            }
        }
        ExitCode::from(EXIT_IO as u8)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Gallery { what: GalleryCommand::List } => {
            for (name, doc) in mmdegree::setval::GALLERY {
                println!("{name:<20} {doc}");
            }
            ExitCode::SUCCESS
        }
        Command::Validate { scenario } => match load(&scenario) {
            Ok(s) => {
                println!("{}: valid ({} mode)", s.name, s.mode.key());
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { scenario, out, seed, format } => {
            let s = match load(&scenario) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let format = format.map(|f| match f {
                FormatArg::Json => Format::Json,
                FormatArg::JsonCsv => Format::JsonCsv,
            });
            let outcome = run(&s, seed);
            match write_outputs(&outcome, &s, out.as_deref(), format) {
                Ok((report, csv)) => {
                    let status = match (&outcome.error, outcome.value) {
                        (Some(e), _) => format!("error {e}"),
                        (None, Some(v)) => format!("value {v}"),
                        (None, None) => "no value".into(),
                    };
                    println!(
                        "{}: {} ({status}) -> {}",
                        s.name,
                        if outcome.pass { "pass" } else { "fail" },
                        report.display()
                    );
                    if let Some(c) = csv {
                        println!("  table -> {}", c.display());
                    }
                    ExitCode::from(outcome.exit_code as u8)
                }
                Err(e) => {
                    eprintln!("error: cannot write report: {e}");
                    ExitCode::from(EXIT_IO as u8)
                }
            }
        }
    }
}
