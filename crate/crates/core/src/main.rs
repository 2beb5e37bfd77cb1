use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fitroom::fitting_room::{run_abs_replication_traced, run_replication, write_samples_csv, Paradigm};
use fitroom::harness::{
    calibrate, emit_report, load_config, load_reference_sample, run_experiment, CalibrationSettings,
    CalibrationTargets, ComparisonUnit, ExperimentReport, ExperimentSpec, HarnessError, ReportFormat,
};
use fitroom::stats_suite::{mann_whitney_u, variance_comparison, Sample, VarianceVerdict};

/// Fitting-room queue simulator: process-flow and agent-based models,
/// validated against observed or synthetic waiting times.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replications and, with a reference sample, the validation tests.
    Run(RunArgs),
    /// Compare two waiting-time CSV files (column `total_wait`).
    Validate(ValidateArgs),
    /// Fit service means and arrival rate to a target mean wait and workload split.
    Calibrate(CalibrateArgs),
    /// Run one agent-based replication and write every state transition.
    Trace(TraceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ParadigmChoice {
    Des,
    Abs,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitChoice {
    Customer,
    Replication,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment JSON; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    reps: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    paradigm: Option<ParadigmChoice>,
    /// Write the full JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one per-customer CSV per replication into this directory.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Reference waiting times (CSV with a `total_wait` column).
    #[arg(long, conflicts_with = "synthetic_reference")]
    reference: Option<PathBuf>,
    /// Simulate the reference sample from held-out seeds.
    #[arg(long)]
    synthetic_reference: bool,
    /// Write the summary table (model,mean,std_dev,variance) here.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Write overlaid waiting-time histograms (SVG) here.
    #[arg(long)]
    histogram: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    unit: Option<UnitChoice>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    model_samples: PathBuf,
    #[arg(long)]
    reference: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Largest variance difference, in percent, still counted as similar.
    #[arg(long, default_value_t = 10.0)]
    threshold: f64,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    target_mean_wait: f64,
    /// Job 1, 2 and 3 shares of staff busy time, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 3, default_value = "0.45,0.10,0.45")]
    workloads: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    tolerance: f64,
    #[arg(long, default_value_t = 60)]
    max_iterations: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    reps: u32,
    /// Write the calibrated scenario as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Validate(args) => validate(args),
        Command::Calibrate(args) => calibrate_cmd(args),
        Command::Trace(args) => trace(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn spec_from(config: Option<&Path>) -> Result<ExperimentSpec, HarnessError> {
    match config {
        Some(path) => load_config(path),
        None => Ok(ExperimentSpec::default()),
    }
}

/// Returns false when any validation test rejects.
fn run(args: RunArgs) -> Result<bool, HarnessError> {
    let mut spec = spec_from(args.config.as_deref())?;
    if let Some(n) = args.reps {
        spec.replications = n;
    }
    if let Some(s) = args.seed {
        spec.base_seed = s;
    }
    if let Some(p) = args.paradigm {
        spec.paradigms = match p {
            ParadigmChoice::Des => vec![Paradigm::Des],
            ParadigmChoice::Abs => vec![Paradigm::Abs],
            ParadigmChoice::Both => vec![Paradigm::Des, Paradigm::Abs],
        };
    }
    if let Some(r) = args.reference {
        spec.reference_sample_path = Some(r);
        spec.synthetic_reference = false;
    }
    if args.synthetic_reference {
        spec.synthetic_reference = true;
        spec.reference_sample_path = None;
    }
    if let Some(t) = args.threads {
        spec.threads = Some(t);
    }
    if let Some(u) = args.unit {
        spec.comparison_unit = match u {
            UnitChoice::Customer => ComparisonUnit::Customer,
            UnitChoice::Replication => ComparisonUnit::Replication,
        };
    }
    if let Some(w) = spec.scenario.stability_warning() {
        log::warn!("{w}");
    }

    let report = run_experiment(&spec)?;
    print_summary(&report);

    for (path, format) in [
        (&args.out, ReportFormat::Json),
        (&args.table, ReportFormat::Csv),
        (&args.histogram, ReportFormat::SvgHistogram),
    ] {
        if let Some(path) = path {
            emit_report(&report, format, path)?;
        }
    }
    if let Some(dir) = &args.samples {
        write_samples(&spec, dir)?;
    }
    Ok(!report.any_rejection())
}

fn print_summary(report: &ExperimentReport) {
    if let Some(r) = &report.reference {
        match r.stats {
            Some(s) => println!(
                "reference ({}): n = {}, mean = {:.4}, variance = {:.4}",
                r.source, s.n, s.mean, s.variance
            ),
            None => println!("reference ({}): values {:?}", r.source, r.values),
        }
    }
    for p in &report.paradigms {
        match p.pooled {
            Some(d) => println!(
                "{}: {} replications, {} waits, mean = {:.4}, std dev = {:.4}, variance = {:.4}",
                p.paradigm.label(),
                p.replications.len(),
                d.n,
                d.mean,
                d.std_dev,
                d.variance
            ),
            None => println!("{}: too few completed customers for statistics", p.paradigm.label()),
        }
        if let Some(f) = p.mean_workload_fractions {
            println!("  workload split: {:.3} / {:.3} / {:.3}", f[0], f[1], f[2]);
        }
        for w in &p.warnings {
            println!("  warning: {w}");
        }
    }
    for v in report.validation.iter().flatten() {
        println!("{} vs reference, Mann-Whitney: {}", v.paradigm.label(), v.mann_whitney.verdict_line());
        if let Some(c) = v.variance {
            println!(
                "{} vs reference, variance: {:.2}% difference, {:?}",
                v.paradigm.label(),
                c.percent_difference,
                c.verdict
            );
        }
    }
    if let Some(c) = &report.cross_paradigm {
        println!("DES vs ABS, Mann-Whitney: {}", c.verdict_line());
    }
}

/// Replications are deterministic in their seed, so the per-customer files
/// are produced by re-running rather than keeping every timeline in memory.
fn write_samples(spec: &ExperimentSpec, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    for &p in &spec.paradigms {
        for (i, seed) in fitroom::harness::replication_seeds(spec.base_seed, spec.replications)
            .into_iter()
            .enumerate()
        {
            let result = run_replication(p, &spec.scenario, seed)
                .map_err(|source| HarnessError::Replication { paradigm: p, index: i, source })?;
            let path = dir.join(format!("{}_{i:04}.csv", p.label().to_lowercase()));
            let io = |e: &dyn std::fmt::Display| HarnessError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            };
            let file = File::create(&path).map_err(|e| io(&e))?;
            write_samples_csv(&result, BufWriter::new(file)).map_err(|e| io(&e))?;
        }
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<bool, HarnessError> {
    let model = load_reference_sample(&args.model_samples)?;
    let model = Sample::new("model", model.values)?;
    let reference = load_reference_sample(&args.reference)?;
    let mw = mann_whitney_u(&model, &reference, args.alpha)?;
    println!(
        "Mann-Whitney U = {} (n1 = {}, n2 = {}, {:?})",
        mw.u_statistic, mw.n1, mw.n2, mw.method
    );
    println!("{}", mw.verdict_line());
    let var = variance_comparison(&model, &reference, args.threshold)?;
    println!(
        "variance: model {:.4}, reference {:.4}, {:.2}% difference: {:?}",
        var.variance_model, var.variance_reference, var.percent_difference, var.verdict
    );
    Ok(!mw.reject_null && var.verdict == VarianceVerdict::Similar)
}

fn calibrate_cmd(args: CalibrateArgs) -> Result<bool, HarnessError> {
    let workload_fractions: [f64; 3] = args.workloads.as_slice().try_into().map_err(|_| HarnessError::Validation {
        field: "workloads".into(),
        reason: "give exactly three comma-separated shares".into(),
    })?;
    let targets = CalibrationTargets {
        mean_wait: args.target_mean_wait,
        workload_fractions,
    };
    let settings = CalibrationSettings {
        tolerance: args.tolerance,
        max_iterations: args.max_iterations,
        base_seed: args.seed,
        replications: args.reps,
        ..Default::default()
    };
    let outcome = match calibrate(&targets, &settings) {
        Ok(o) => o,
        Err(HarnessError::CalibrationFailed { reason, best }) => {
            if let Some(b) = &best {
                eprintln!(
                    "best candidate: arrival rate {}, mean wait {:.4}",
                    b.config.arrival_rate, b.achieved_mean_wait
                );
            }
            return Err(HarnessError::CalibrationFailed { reason, best });
        }
        Err(e) => return Err(e),
    };
    let c = &outcome.config;
    println!("arrival rate: {}", c.arrival_rate);
    println!(
        "service means: entry {}, help {} (p = {}), return {}",
        c.entry_service.mean(),
        c.help_service.mean(),
        c.help_probability,
        c.return_service.mean()
    );
    println!(
        "achieved mean wait {:.4} min, workload split {:.3} / {:.3} / {:.3}, {} iterations",
        outcome.achieved_mean_wait,
        outcome.achieved_fractions[0],
        outcome.achieved_fractions[1],
        outcome.achieved_fractions[2],
        outcome.iterations
    );
    if let Some(path) = &args.out {
        let file = File::create(path).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        serde_json::to_writer_pretty(BufWriter::new(file), c).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    }
    Ok(true)
}

fn trace(args: TraceArgs) -> Result<bool, HarnessError> {
    let spec = spec_from(args.config.as_deref())?;
    let file = File::create(&args.out).map_err(|e| HarnessError::Io {
        path: args.out.display().to_string(),
        message: e.to_string(),
    })?;
    let r = run_abs_replication_traced(&spec.scenario, args.seed, BufWriter::new(file))?;
    println!(
        "{} customers arrived, {} completed; transitions written to {}",
        r.customers_arrived,
        r.customers_completed,
        args.out.display()
    );
    Ok(true)
}
