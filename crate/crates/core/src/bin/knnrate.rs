use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use knnrate::harness::fit::FIT_HEADER;
use knnrate::harness::{
    fit_rate, parse_csv, run_experiment, to_csv, ExperimentConfig, ExperimentKind,
};
use knnrate::Error;

#[derive(Parser)]
#[command(name = "knnrate", version, about = "k-NN regression rate experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sup-norm error of k-NN regression against the uniform bound.
    Regress(RunArgs),
    /// Sup-norm error on a curve embedded in higher dimension.
    Manifold(RunArgs),
    /// Hausdorff error of the level-set estimator.
    Levelset(RunArgs),
    /// Distance from the estimated to the true maximizer.
    Maxima(RunArgs),
    /// Empirical coverage of the uniform and radius bounds.
    Coverage(RunArgs),
    /// Distinct k-NN sets over a probe grid against the counting bound.
    Setcount(RunArgs),
    /// Log-log rate fit of per-rung medians from record files.
    Fit(FitArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Suppress the summary on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct FitArgs {
    /// Record files written by the experiment subcommands.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Quantity to fit (every quantity with enough rungs when absent).
    #[arg(long)]
    quantity: Option<String>,
    /// Append fit rows to this file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    quiet: bool,
}

struct Failure {
    code: u8,
    message: String,
}

fn validation(e: Error) -> Failure {
    Failure {
        code: 1,
        message: e.to_string(),
    }
}

fn classify(e: Error) -> Failure {
    let code = match e {
        Error::Config(_)
        | Error::Parse { .. }
        | Error::InvalidParameter { .. }
        | Error::MissingParameter(_)
        | Error::InvalidK { .. }
        | Error::DimensionMismatch { .. }
        | Error::UnsupportedManifold(_) => 1,
        _ => 2,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

fn run(kind: ExperimentKind, args: RunArgs) -> Result<(), Failure> {
    let Format::Csv = args.format;
    let mut cfg = ExperimentConfig::read(&args.config).map_err(validation)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    let output = run_experiment(&cfg, kind).map_err(classify)?;
    let csv = to_csv(&output.records).map_err(classify)?;
    write_output(args.out.as_deref(), &csv)?;
    if !args.quiet {
        eprintln!("{kind}: {} records", output.records.len());
        if let Some(c) = &output.coverage {
            eprintln!(
                "coverage {:.4} over {} trials, radius-event coverage {:.4}",
                c.coverage, c.trials, c.radius_coverage
            );
            if !c.violations.is_empty() {
                let list: Vec<String> = c
                    .violations
                    .iter()
                    .map(|(n, s, k)| format!("(n={n}, seed={s}, k={k})"))
                    .collect();
                eprintln!("bound violated in {}", list.join(" "));
            }
        }
    }
    Ok(())
}

fn fit(args: FitArgs) -> Result<(), Failure> {
    let Format::Csv = args.format;
    let mut records = Vec::new();
    for path in &args.inputs {
        let text = std::fs::read_to_string(path).map_err(|e| Failure {
            code: 1,
            message: format!("{}: {e}", path.display()),
        })?;
        records.extend(parse_csv(&text, &path.display().to_string()).map_err(validation)?);
    }
    let quantities: Vec<String> = match &args.quantity {
        Some(q) => vec![q.clone()],
        None => {
            let mut qs: Vec<String> = Vec::new();
            for r in &records {
                if !r.quantity.ends_with("_failure") && !qs.contains(&r.quantity) {
                    qs.push(r.quantity.clone());
                }
            }
            qs
        }
    };
    let mut rows = Vec::new();
    for q in &quantities {
        match fit_rate(&records, q) {
            Ok(f) => {
                if !args.quiet {
                    eprintln!(
                        "{}: slope {:.4} +- {:.4} over {} rungs",
                        q,
                        f.slope,
                        f.slope_stderr,
                        f.rungs()
                    );
                }
                rows.push(f.csv_row());
            }
            Err(e) if args.quantity.is_some() => return Err(classify(e)),
            Err(e) => {
                if !args.quiet {
                    eprintln!("skipping {q}: {e}");
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(Failure {
            code: 2,
            message: "no quantity could be fitted".to_string(),
        });
    }
    let mut text = String::new();
    for r in &rows {
        text.push_str(r);
        text.push('\n');
    }
    match &args.out {
        Some(path) => {
            let fresh = std::fs::metadata(path)
                .map(|m| m.len() == 0)
                .unwrap_or(true);
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| io_failure(path, e))?;
            if fresh {
                text.insert_str(0, &format!("{FIT_HEADER}\n"));
            }
            f.write_all(text.as_bytes())
                .map_err(|e| io_failure(path, e))
        }
        None => write_output(None, &format!("{FIT_HEADER}\n{text}")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Regress(a) => run(ExperimentKind::Regress, a),
        Command::Manifold(a) => run(ExperimentKind::Manifold, a),
        Command::Levelset(a) => run(ExperimentKind::LevelSet, a),
        Command::Maxima(a) => run(ExperimentKind::Maxima, a),
        Command::Coverage(a) => run(ExperimentKind::Coverage, a),
        Command::Setcount(a) => run(ExperimentKind::SetCount, a),
        Command::Fit(a) => fit(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
