use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lad_diagnostics::classical::{classical_flags, OutlierRule};
use lad_diagnostics::data;
use lad_diagnostics::dataset::Dataset;
use lad_diagnostics::detect::{detect_leverage, detect_outliers, DetectionReport};
use lad_diagnostics::lad::fit_lad;
use lad_diagnostics::scores::{compute_scores, score_summary};

#[derive(Parser)]
#[command(
    name = "laddiag",
    about = "LAD regression diagnostics: leverage point and outlier detection",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the LAD regression model and print coefficients and residuals
    Fit(JobArgs),
    /// Print the leave-one-out L and O score table
    Scores(JobArgs),
    /// Run both detection algorithms and print the flagged sets
    Diagnose(JobArgs),
    /// Compare our detections with the classical cut-off method
    Compare(JobArgs),
    /// Generate a simulated dataset and write it as CSV to stdout
    Simulate(JobArgs),
}

#[derive(Args)]
struct JobArgs {
    /// CSV file with a header row
    #[arg(long, conflicts_with_all = ["bundled", "generate"])]
    data: Option<PathBuf>,

    /// Bundled dataset: telephone, hawkins, scottish
    #[arg(long, conflicts_with = "generate")]
    bundled: Option<String>,

    /// Generated dataset: twovariables, threevariables
    #[arg(long, requires = "seed")]
    generate: Option<String>,

    /// Seed for --generate
    #[arg(long)]
    seed: Option<u64>,

    /// Response column name (or 1-based position) for --data
    #[arg(long, default_value = "y")]
    response: String,

    /// CSV field delimiter for --data
    #[arg(long, default_value = ",")]
    delimiter: char,

    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Studentized-residual rule: one-sided (>2) or two-sided (|.|>2)
    #[arg(long, value_enum, default_value_t = RuleArg::Two)]
    outlier_rule: RuleArg,

    /// Emit the per-round audit trace of the detectors
    #[arg(long)]
    trace: bool,

    /// Worker threads for subset refits (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleArg {
    One,
    Two,
}

impl From<RuleArg> for OutlierRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::One => OutlierRule::OneSided,
            RuleArg::Two => OutlierRule::TwoSided,
        }
    }
}

fn main() -> ExitCode {
    // Die quietly when the read end of a pipe closes (e.g. `laddiag ... | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version output goes to stdout with success
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    let args = match &cli.command {
        Command::Fit(a)
        | Command::Scores(a)
        | Command::Diagnose(a)
        | Command::Compare(a)
        | Command::Simulate(a) => a,
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = args.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: failed to build thread pool: {e}");
            return ExitCode::from(3);
        }
    };

    let outcome = pool.install(|| run(&cli));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(args: &JobArgs) -> lad_diagnostics::Result<Dataset> {
    if let Some(path) = &args.data {
        data::load_csv(path, &args.response, args.delimiter as u8)
    } else if let Some(name) = &args.bundled {
        data::bundled(name)
    } else if let Some(name) = &args.generate {
        let seed = args.seed.expect("clap enforces --seed with --generate");
        match name.as_str() {
            "twovariables" => Ok(data::generate_twovariables(seed)),
            "threevariables" => Ok(data::generate_threevariables(seed)),
            other => Err(lad_diagnostics::Error::UnknownGenerated {
                name: other.to_string(),
            }),
        }
    } else {
        data::bundled("<none>").map_err(|_| lad_diagnostics::Error::UnknownBundled {
            name: "(no --data/--bundled/--generate given)".to_string(),
        })
    }
}

fn run(cli: &Cli) -> lad_diagnostics::Result<()> {
    match &cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Scores(args) => cmd_scores(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

fn fmt_set(labels: &[usize]) -> String {
    if labels.is_empty() {
        "-".to_string()
    } else {
        labels
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

fn cmd_fit(args: &JobArgs) -> lad_diagnostics::Result<()> {
    let dataset = load(args)?;
    let fit = fit_lad(&dataset)?;
    let basis_labels: Vec<usize> = fit.basis.iter().map(|&i| dataset.label(i)).collect();
    match args.format {
        Format::Json => {
            let out = json!({
                "beta": fit.beta.iter().copied().collect::<Vec<f64>>(),
                "objective": fit.objective,
                "basis": basis_labels,
                "degenerate": fit.degenerate,
                "residuals": dataset
                    .labels()
                    .iter()
                    .zip(fit.residuals.iter())
                    .map(|(l, r)| json!({"label": l, "residual": r}))
                    .collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
        Format::Csv => {
            println!("label,residual");
            for (l, r) in dataset.labels().iter().zip(fit.residuals.iter()) {
                println!("{l},{r:.10}");
            }
        }
        Format::Table => {
            for (j, b) in fit.beta.iter().enumerate() {
                println!("beta[{j}] = {b:.6}");
            }
            println!("objective = {:.6}", fit.objective);
            println!("basis = {}", fmt_set(&basis_labels));
            println!("degenerate = {}", fit.degenerate);
            println!();
            println!("{:>5} {:>14}", "label", "residual");
            for (l, r) in dataset.labels().iter().zip(fit.residuals.iter()) {
                println!("{l:>5} {r:>14.6}");
            }
        }
    }
    Ok(())
}

fn cmd_scores(args: &JobArgs) -> lad_diagnostics::Result<()> {
    let dataset = load(args)?;
    let table = compute_scores(&dataset)?;
    let summary = score_summary(&table);
    match args.format {
        Format::Json => {
            let row = |r: &lad_diagnostics::scores::ScoreRow| {
                json!({"label": r.label, "l": r.l, "o": r.o})
            };
            let out = json!({
                "n": table.n,
                "p": table.p,
                "degenerate_subsets": table.degenerate_subsets,
                "by_l": summary.by_l.iter().map(row).collect::<Vec<_>>(),
                "by_o": summary.by_o.iter().map(row).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
        Format::Csv => {
            println!("ordering,label,l,o");
            for r in &summary.by_l {
                println!("by_l,{},{},{}", r.label, r.l, r.o);
            }
            for r in &summary.by_o {
                println!("by_o,{},{},{}", r.label, r.l, r.o);
            }
        }
        Format::Table => {
            println!("by descending L:");
            println!("{:>5} {:>4} {:>4}", "label", "L", "O");
            for r in &summary.by_l {
                println!("{:>5} {:>4} {:>4}", r.label, r.l, r.o);
            }
            println!();
            println!("by descending O:");
            println!("{:>5} {:>4} {:>4}", "label", "L", "O");
            for r in &summary.by_o {
                println!("{:>5} {:>4} {:>4}", r.label, r.l, r.o);
            }
            if !table.degenerate_subsets.is_empty() {
                println!();
                println!(
                    "degenerate subset fits (deleted row): {}",
                    fmt_set(
                        &table
                            .degenerate_subsets
                            .iter()
                            .map(|&d| table.labels[d])
                            .collect::<Vec<_>>()
                    )
                );
            }
        }
    }
    Ok(())
}

fn trace_lines(report: &DetectionReport) -> Vec<String> {
    let mut lines: Vec<String> = report
        .rounds
        .iter()
        .map(|r| {
            format!(
                "round m={} k1={} score={} decision={} restored={}",
                r.m,
                r.k1,
                r.score,
                match r.decision {
                    lad_diagnostics::detect::Decision::Flag => "flag",
                    lad_diagnostics::detect::Decision::Quarantine => "quarantine",
                    lad_diagnostics::detect::Decision::Stop => "stop",
                },
                r.restored.len()
            )
        })
        .collect();
    lines.push(format!(
        "stop_reason={}",
        match report.stop_reason {
            lad_diagnostics::StopReason::SizeFloorReached => "size-floor-reached",
            lad_diagnostics::StopReason::ScoreSequenceBroken => "score-sequence-broken",
        }
    ));
    lines
}

fn cmd_diagnose(args: &JobArgs) -> lad_diagnostics::Result<()> {
    let dataset = load(args)?;
    let leverage = detect_leverage(&dataset)?;
    let outliers = detect_outliers(&dataset)?;
    match args.format {
        Format::Json => {
            let out = json!({
                "leverage": {
                    "flagged": leverage.flagged_sorted(),
                    "report": serde_json::to_value(&leverage).unwrap(),
                },
                "outliers": {
                    "flagged": outliers.flagged_sorted(),
                    "report": serde_json::to_value(&outliers).unwrap(),
                },
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
        Format::Csv => {
            println!("kind,flagged");
            println!("leverage,\"{}\"", fmt_set(&leverage.flagged_sorted()));
            println!("outliers,\"{}\"", fmt_set(&outliers.flagged_sorted()));
        }
        Format::Table => {
            println!("leverage points: {}", fmt_set(&leverage.flagged_sorted()));
            println!("outliers:        {}", fmt_set(&outliers.flagged_sorted()));
            if args.trace {
                println!();
                println!("leverage trace:");
                for line in trace_lines(&leverage) {
                    println!("  {line}");
                }
                println!("outlier trace:");
                for line in trace_lines(&outliers) {
                    println!("  {line}");
                }
            }
        }
    }
    Ok(())
}

fn cmd_compare(args: &JobArgs) -> lad_diagnostics::Result<()> {
    let dataset = load(args)?;
    let rule: OutlierRule = args.outlier_rule.into();
    let classical = classical_flags(&dataset, rule)?;
    let leverage = detect_leverage(&dataset)?;
    let outliers = detect_outliers(&dataset)?;
    match args.format {
        Format::Json => {
            let out = json!({
                "classical": {
                    "leverages": classical.leverage_flags,
                    "outliers": classical.outlier_flags,
                    "rule": serde_json::to_value(rule).unwrap(),
                },
                "ours": {
                    "leverages": leverage.flagged_sorted(),
                    "outliers": outliers.flagged_sorted(),
                },
                "note": "Hadi's method is not reproduced here",
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
        Format::Csv => {
            println!("method,leverages,outliers");
            println!(
                "classical,\"{}\",\"{}\"",
                fmt_set(&classical.leverage_flags),
                fmt_set(&classical.outlier_flags)
            );
            println!(
                "ours,\"{}\",\"{}\"",
                fmt_set(&leverage.flagged_sorted()),
                fmt_set(&outliers.flagged_sorted())
            );
        }
        Format::Table => {
            println!("{:<18} {:<22} {}", "Method", "Leverages", "Outliers");
            println!(
                "{:<18} {:<22} {}",
                "Classical Method",
                fmt_set(&classical.leverage_flags),
                fmt_set(&classical.outlier_flags)
            );
            println!(
                "{:<18} {:<22} {}",
                "Our Results",
                fmt_set(&leverage.flagged_sorted()),
                fmt_set(&outliers.flagged_sorted())
            );
            println!();
            println!("note: Hadi's method is not reproduced here");
        }
    }
    Ok(())
}

fn cmd_simulate(args: &JobArgs) -> lad_diagnostics::Result<()> {
    if args.generate.is_none() {
        return Err(lad_diagnostics::Error::UnknownGenerated {
            name: "(simulate requires --generate and --seed)".to_string(),
        });
    }
    let dataset = load(args)?;
    print!("{}", data::to_csv(&dataset));
    Ok(())
}
