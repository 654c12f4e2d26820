//! Command-line front end for the `malcev` engine: JSON file formats,
//! analysis reports and the `malcev` binary's subcommands.

pub mod commands;
pub mod format;
pub mod report;

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use malcev::Mode;
use rayon::prelude::*;

use commands::{Options, DEFAULT_MAX_CLONE_SIZE, EXIT_INPUT};
use report::{InputDigest, Report};

#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    /// The document does not match the JSON schema.
    #[error("{}: malformed document: {message}", path.display())]
    Malformed { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Invalid {
        path: PathBuf,
        source: malcev::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Bruteforce,
    Characterization,
    Both,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Bruteforce => Mode::BruteForce,
            ModeArg::Characterization => Mode::Characterization,
            ModeArg::Both => Mode::Both,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "malcev",
    version,
    about = "Congruences, commutators and polynomial interpolation in finite Mal'cev algebras"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Table entries allowed across one polynomial clone.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_CLONE_SIZE)]
    pub max_clone_size: usize,
    /// How `s1ac` is decided.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,
    /// Also write the report(s) as JSON; `-` prints JSON instead of text.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Worker threads for batches of inputs (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Leave timings out so reports are byte-for-byte reproducible.
    #[arg(long, global = true)]
    pub no_timing: bool,
    /// Re-check results with an independent computation.
    #[arg(long, global = true)]
    pub verify: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full structural analysis of algebra files.
    Analyze {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        skip_s1ac: bool,
    },
    /// Decide strict 1-affine completeness only.
    S1ac {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Interpolate a unary partial function by a polynomial.
    Interpolate { algebra: PathBuf, function: PathBuf },
    /// Congruence lattice, optionally as a DOT Hasse diagram.
    Lattice {
        path: PathBuf,
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
    },
    /// Strict 1-affine completeness of a loop.
    Loop {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

impl Cli {
    pub fn options(&self) -> Options {
        Options {
            max_clone_size: self.max_clone_size,
            mode: self.mode.into(),
            skip_s1ac: matches!(
                self.command,
                Command::Analyze {
                    skip_s1ac: true,
                    ..
                }
            ),
            verify: self.verify,
            timing: !self.no_timing,
        }
    }
}

/// Stand-in report for an input that could not be read or validated.
fn error_report(command: &str, path: &Path, err: &ToolError) -> Report {
    let mut report = Report::new(command);
    let sha256 = std::fs::read(path)
        .map(|b| format::sha256_hex(&b))
        .unwrap_or_default();
    report.inputs.push(InputDigest {
        path: path.display().to_string(),
        sha256,
    });
    report.notes.push(format!("error: {err}"));
    report.exit_code = EXIT_INPUT;
    report
}

/// Runs the command and returns the reports in input order.
pub fn execute(cli: &Cli) -> Vec<Report> {
    let opts = cli.options();
    let batch = |command: &str,
                 paths: &[PathBuf],
                 one: &(dyn Fn(&Path) -> Result<Report, ToolError> + Sync)| {
        let run = || -> Vec<Report> {
            paths
                .par_iter()
                .map(|p| one(p).unwrap_or_else(|e| error_report(command, p, &e)))
                .collect()
        };
        match rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build()
        {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        }
    };
    match &cli.command {
        Command::Analyze { paths, .. } => {
            batch("analyze", paths, &|p| commands::analyze(p, &opts, true))
        }
        Command::S1ac { paths } => batch("s1ac", paths, &|p| commands::analyze(p, &opts, false)),
        Command::Loop { paths } => batch("loop", paths, &|p| commands::loop_report(p, &opts)),
        Command::Interpolate { algebra, function } => {
            vec![commands::interpolate(algebra, function, &opts)
                .unwrap_or_else(|e| error_report("interpolate", algebra, &e))]
        }
        Command::Lattice { path, dot } => {
            vec![commands::lattice(path, dot.as_deref(), &opts)
                .unwrap_or_else(|e| error_report("lattice", path, &e))]
        }
    }
}

pub fn to_json(reports: &[Report]) -> String {
    let mut s = match reports {
        [one] => serde_json::to_string_pretty(one),
        many => serde_json::to_string_pretty(many),
    }
    .expect("reports serialize");
    s.push('\n');
    s
}

/// Runs the CLI, printing reports, and returns the process exit code: the
/// largest code over all inputs.
pub fn run(cli: &Cli) -> i32 {
    let reports = execute(cli);
    let mut code = reports.iter().map(|r| r.exit_code).max().unwrap_or(0);
    for r in &reports {
        for note in r.notes.iter().filter(|n| n.starts_with("error: ")) {
            eprintln!("{}", &note["error: ".len()..]);
        }
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let json_to_stdout = cli.json.as_deref() == Some(Path::new("-"));
    if json_to_stdout {
        let _ = out.write_all(to_json(&reports).as_bytes());
    } else {
        // Input errors already went to stderr.
        let printable: Vec<&Report> = reports
            .iter()
            .filter(|r| r.exit_code != EXIT_INPUT)
            .collect();
        for (i, r) in printable.iter().enumerate() {
            if i > 0 {
                let _ = writeln!(out);
            }
            let _ = write!(out, "{r}");
        }
        if let Some(path) = &cli.json {
            if let Err(e) = std::fs::write(path, to_json(&reports)) {
                eprintln!("{}: {e}", path.display());
                code = code.max(EXIT_INPUT);
            }
        }
    }
    code
}
