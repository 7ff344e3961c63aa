use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use dro_nested::commands;
use dro_nested::problem::Document;
use dro_nested::report::{num, Format, Report};
use dro_nested::rng::DEFAULT_SEED;
use dro_nested::verify::VerifyOptions;
use dro_nested::{Error, Result};

#[derive(Parser)]
#[command(
    name = "dro",
    version,
    about = "Distributionally robust risk functionals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed of the randomized checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Trial count for randomized checks (replaces every default).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Tolerance for checks (replaces every default).
    #[arg(long, global = true, value_parser = parse_tolerance)]
    tolerance: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Add wall-clock time to the report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Worst-case expectation over an ambiguity set.
    EvalStatic {
        file: PathBuf,
        #[arg(long)]
        variable: String,
        #[arg(long)]
        set: String,
    },
    /// Conditional robust values per atom of a partition.
    EvalConditional {
        file: PathBuf,
        #[arg(long)]
        variable: String,
        #[arg(long)]
        set: String,
        #[arg(long)]
        partition: String,
        /// Reference measure (defaults to the AVaR reference or the mass suprema).
        #[arg(long)]
        reference: Option<String>,
        /// Per-atom AVaR under the conditional reference law instead.
        #[arg(long)]
        nested_avar: bool,
    },
    /// Composite fold or rectangular recursion.
    EvalComposite {
        file: PathBuf,
        #[arg(long)]
        variable: String,
        /// Name of a composite or rectangular entry.
        #[arg(long)]
        spec: String,
        /// Enumerate the two-stage induced family.
        #[arg(long)]
        induced_set: bool,
    },
    /// Backward induction for a multistage problem.
    Solve {
        file: PathBuf,
        #[arg(long)]
        problem: String,
        /// Compare with exhaustive policy enumeration.
        #[arg(long)]
        enumerate: bool,
    },
    /// Order-1 Wasserstein distance with an optimal plan.
    Wasserstein {
        file: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        space: Option<String>,
    },
    /// Transport bounds; `--format csv` prints the radius sweep.
    Bounds {
        file: PathBuf,
        #[arg(long)]
        bound: String,
    },
    /// Invariant batteries over a file or the built-in acceptance criteria.
    Verify {
        #[arg(required_unless_present = "builtin", conflicts_with = "builtin")]
        file: Option<PathBuf>,
        #[arg(long)]
        builtin: bool,
        /// Run only these criteria (repeatable).
        #[arg(long = "criterion")]
        criteria: Vec<usize>,
    },
}

fn parse_tolerance(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
        _ => Err(format!("'{s}' is not a nonnegative number")),
    }
}

fn load(path: &Path) -> Result<Document> {
    let text = std::fs::read_to_string(path)?;
    Document::parse(&text)
}

fn run(cli: &Cli) -> Result<Report> {
    let opts = VerifyOptions {
        seed: cli.seed,
        trials: cli.trials,
        tolerance: cli.tolerance,
    };
    match &cli.command {
        Command::EvalStatic {
            file,
            variable,
            set,
        } => commands::eval_static(&load(file)?, variable, set),
        Command::EvalConditional {
            file,
            variable,
            set,
            partition,
            reference,
            nested_avar,
        } => commands::eval_conditional(
            &load(file)?,
            variable,
            set,
            partition,
            reference.as_deref(),
            *nested_avar,
        ),
        Command::EvalComposite {
            file,
            variable,
            spec,
            induced_set,
        } => commands::eval_composite(&load(file)?, variable, spec, *induced_set),
        Command::Solve {
            file,
            problem,
            enumerate,
        } => commands::solve(&load(file)?, problem, *enumerate),
        Command::Wasserstein {
            file,
            from,
            to,
            space,
        } => commands::wasserstein(&load(file)?, from, to, space.as_deref()),
        Command::Bounds { file, bound } => commands::bounds(&load(file)?, bound),
        Command::Verify {
            file,
            builtin,
            criteria,
        } => {
            if *builtin {
                Ok(commands::verify_builtin(&opts, criteria))
            } else {
                let path = file.as_ref().expect("clap requires a file");
                commands::verify_file(&load(path)?, &opts)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.timing {
        report.elapsed_ms = num(start.elapsed().as_secs_f64() * 1e3).as_f64();
    }
    let format = match cli.format {
        OutFormat::Json => Format::Json,
        OutFormat::Text => Format::Text,
        OutFormat::Csv => {
            if report.table.is_none() {
                eprintln!("error: {} has no CSV output", report.command);
                return ExitCode::from(2);
            }
            Format::Csv
        }
    };
    let body = report.render(format);
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, body) {
                eprintln!("error: {}", Error::Io(e));
                return ExitCode::from(2);
            }
        }
        None => print!("{body}"),
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        for c in report.checks.iter().filter(|c| !c.passed) {
            eprintln!("check failed: {}", c.name);
        }
        ExitCode::from(1)
    }
}
