//! Command-line front end: validation, completion, verification, DOT export
//! and closures for diagrams stored in BD1 files.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bratteli::{
    complete, hereditary_saturated_closure, parse_bd1, to_dot, verify_all, write_bd1, BratteliDiagram, Severity,
    VerifyOptions, VertexId,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bratteli",
    version,
    about = "Kumjian completion and exact verification of Bratteli diagrams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural invariants of a diagram.
    Validate {
        file: PathBuf,
        /// Allow non-final vertices that emit no edges.
        #[arg(long)]
        relax_emission: bool,
    },
    /// Write the completion of an unmarked diagram.
    Complete {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run the full verification pipeline and emit a JSON report.
    Verify {
        file: PathBuf,
        /// Verify only the first N levels of the input.
        #[arg(long = "level", value_name = "N")]
        level: Option<usize>,
        /// Pairs checked exhaustively before sampling.
        #[arg(long, value_name = "B", default_value_t = VerifyOptions::default().pair_budget)]
        pair_budget: usize,
        #[arg(long, value_name = "S", default_value_t = VerifyOptions::default().seed)]
        seed: u64,
        /// Write the report here instead of stdout.
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
    },
    /// Export a diagram as a Graphviz digraph.
    Dot {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the hereditary saturated closure of a vertex set.
    Closure {
        file: PathBuf,
        /// Comma-separated `level:index` vertices.
        #[arg(long, value_name = "VERTICES")]
        seed_set: String,
    },
}

/// Exit status with a message; 1 is a mathematical failure, 2 a usage error.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn check(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { file, relax_emission } => {
            let d = load(&file)?;
            let report = d.validate(relax_emission);
            for f in &report.findings {
                let tag = match f.severity {
                    Severity::Error => "error",
                    Severity::Warning => "warning",
                };
                println!("{tag}: {}: {}", f.location, f.message);
            }
            if report.ok {
                println!("ok: {} levels, {} vertices", d.num_levels(), d.num_vertices());
                Ok(())
            } else {
                Err(Failure::check(""))
            }
        }
        Command::Complete { file, output } => {
            let d = load(&file)?;
            let c = complete(&d).map_err(|e| Failure::check(e.to_string()))?;
            save(&output, &write_bd1(c.ke()))
        }
        Command::Verify {
            file,
            level,
            pair_budget,
            seed,
            json,
        } => {
            let d = load(&file)?;
            let options = VerifyOptions {
                level_cap: level,
                pair_budget,
                seed,
            };
            let name = file
                .file_name()
                .map_or_else(String::new, |n| n.to_string_lossy().into_owned());
            let report = verify_all(&d, &name, &options);
            match json {
                Some(path) => {
                    save(&path, &report.to_json())?;
                    for c in &report.checks {
                        println!("{} {}", if c.ok { "pass" } else { "FAIL" }, c.name);
                    }
                }
                None => print!("{}", report.to_json()),
            }
            if report.summary.ok {
                Ok(())
            } else {
                let failed: Vec<&str> = report
                    .checks
                    .iter()
                    .filter(|c| !c.ok)
                    .map(|c| c.name.as_str())
                    .collect();
                Err(Failure::check(format!("failed checks: {}", failed.join(", "))))
            }
        }
        Command::Dot { file, output } => {
            let d = load(&file)?;
            let report = d.validate(true);
            if !report.ok {
                return Err(Failure::check(format!(
                    "invalid diagram: {}",
                    report.first_error().unwrap_or("unknown")
                )));
            }
            save(&output, &to_dot(&d))
        }
        Command::Closure { file, seed_set } => {
            let d = load(&file)?;
            let seed = parse_seed_set(&seed_set)?;
            let result = hereditary_saturated_closure(&d, &seed).map_err(|e| Failure::usage(e.to_string()))?;
            for step in &result.trace {
                let witness: Vec<String> = step.witness.iter().map(VertexId::to_string).collect();
                let rule = format!("{:?}", step.rule).to_lowercase();
                println!("{} {rule} via {}", step.vertex, witness.join(","));
            }
            let closure: Vec<String> = result.closure.iter().map(VertexId::to_string).collect();
            println!("closure: {}", closure.join(","));
            let missing = d.num_vertices() - result.closure.len();
            println!("missing: {missing}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<BratteliDiagram, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    parse_bd1(&text).map_err(|e| Failure::usage(format!("{}:{}:{}: {}", path.display(), e.line, e.column, e.kind)))
}

fn save(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn parse_seed_set(s: &str) -> Result<BTreeSet<VertexId>, Failure> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.parse::<VertexId>().map_err(Failure::usage))
        .collect()
}
