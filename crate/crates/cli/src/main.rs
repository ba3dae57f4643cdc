//! Command-line driver: runs an experiment, prints a record table and
//! writes results.csv, results.json and plots/ under the output directory.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use cltlab::experiments::output::{emit_outputs, ExperimentResult};
use cltlab::experiments::{
    run_lambda_experiment, run_linear_part_report, run_rate_sweep, run_tail_sweep, run_verification_suite,
    ExperimentConfig, ExperimentKind, ResultsFile,
};
use cltlab::{Method, Record};
use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "cltlab", version, about = "Normal approximation experiments for weighted sums of random vectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytic budgets, isotropy, Poincaré consequences and direction checks.
    Verify(Opts),
    /// Mean Kolmogorov distance over random directions against n.
    Rate(Opts),
    /// Survival function of the distance over directions at fixed n.
    Tail(Opts),
    /// Linear part I(t) and the non-symmetric pair quantities.
    LinearPart(Opts),
    /// Estimates of the second-order correlation constant Λ.
    Lambda(Opts),
    /// Every experiment, each in its own subdirectory of --out.
    All(Opts),
}

#[derive(Args, Debug, Clone, Default)]
struct Opts {
    /// Model name, or `all` for verify and lambda.
    #[arg(long)]
    model: Option<String>,
    /// Dimension; repeat for several.
    #[arg(long = "n")]
    n: Vec<usize>,
    /// Random directions per dimension.
    #[arg(long)]
    directions: Option<usize>,
    /// Monte Carlo samples (pairs for linear-part).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// exact, empirical, inversion or be-bound.
    #[arg(long)]
    method: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with any subset of the configuration fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Target accuracy of the inversion method.
    #[arg(long)]
    accuracy: Option<f64>,
    /// Use the single direction (1, …, 1)/√n.
    #[arg(long)]
    equal_coefficients: bool,
    /// Rule for T0, e.g. `4*sqrt(log n)`.
    #[arg(long)]
    t0_rule: Option<String>,
    /// Rule for T, e.g. `4*n` or `T0*n`.
    #[arg(long)]
    t_rule: Option<String>,
}

/// Defaults for `kind`, then the config file, then the flags.
fn build_config(kind: ExperimentKind, opts: &Opts) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default_for(kind);
    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let overlay: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let Some(fields) = overlay.as_object() else { bail!("config file must hold a JSON object") };
        let mut base = serde_json::to_value(&cfg)?;
        let obj = base.as_object_mut().expect("config is an object");
        for (k, v) in fields {
            obj.insert(k.clone(), v.clone());
        }
        cfg = serde_json::from_value(base).context("invalid config field")?;
        if !fields.contains_key("output_dir") {
            cfg.output_dir = ExperimentConfig::default_for(kind).output_dir;
        }
    }
    if let Some(m) = &opts.model {
        cfg.model_name = m.clone();
    }
    if !opts.n.is_empty() {
        cfg.n_list = opts.n.clone();
    }
    if let Some(d) = opts.directions {
        cfg.directions_per_n = d;
    }
    if let Some(s) = opts.samples {
        cfg.samples = s;
    }
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(m) = &opts.method {
        cfg.distance_method = Method::from_name(m)?;
    }
    if let Some(o) = &opts.out {
        cfg.output_dir = o.clone();
    }
    if let Some(a) = opts.accuracy {
        cfg.accuracy = a;
    }
    if opts.equal_coefficients {
        cfg.equal_coefficients = true;
    }
    if let Some(r) = &opts.t0_rule {
        cfg.t0_rule = r.clone();
    }
    if let Some(r) = &opts.t_rule {
        cfg.t_rule = r.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(kind: ExperimentKind, cfg: &ExperimentConfig) -> cltlab::Result<ExperimentResult> {
    Ok(match kind {
        ExperimentKind::Verify => ExperimentResult::Verify(run_verification_suite(cfg)?),
        ExperimentKind::Rate => ExperimentResult::Rate(run_rate_sweep(cfg)?),
        ExperimentKind::Tail => ExperimentResult::Tail(run_tail_sweep(cfg)?),
        ExperimentKind::LinearPart => ExperimentResult::LinearPart(run_linear_part_report(cfg)?),
        ExperimentKind::Lambda => ExperimentResult::Lambda(run_lambda_experiment(cfg)?),
    })
}

fn print_summary(result: &ExperimentResult) {
    match result {
        ExperimentResult::Rate(s) | ExperimentResult::Tail(s) => {
            println!("{:>6} {:>12} {:>12} {:>12} {:>12} {:>12} {:>10}", "n", "mean_rho", "median", "q90", "q99", "max", "se");
            for r in &s.records {
                println!(
                    "{:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.2e}",
                    r.n, r.mean_rho, r.median_rho, r.q90, r.q99, r.max_rho, r.se
                );
            }
            if let Some(f) = &s.fit {
                println!("slope {:.4}  95% CI [{:.4}, {:.4}]  R² {:.4}", f.slope, f.ci_low, f.ci_high, f.r_squared);
            }
            for t in &s.tail {
                println!(
                    "tail n={}: c_hat {:.4e}  R² {:.4}  monotone {}  bound holds {}  degenerate {}",
                    t.n, t.c_hat, t.r_squared, t.monotone, t.bound_holds, t.degenerate
                );
            }
        }
        ExperimentResult::LinearPart(r) => {
            for row in &r.rows {
                println!(
                    "n={:<4} I(1) {:.4e} ± {:.1e}  ∫√I/t {:.4e} (floor {:.4e})  n·E<X,Y>/R {:.4}",
                    row.n,
                    row.at_one.exact_value,
                    row.at_one.std_error,
                    row.integral,
                    row.integral_floor,
                    row.nonsymmetric.n_inner_over_r.value
                );
            }
        }
        ExperimentResult::Lambda(r) => {
            for (kind, e) in &r.estimates {
                println!("{kind:<16} n={:<3} Λ ≈ {:.4} ± {:.4}", e.n, e.value, e.se);
            }
        }
        ExperimentResult::Verify(r) => {
            for s in &r.skipped {
                println!("skipped: {s}");
            }
        }
    }
}

fn print_records(records: &[Record]) {
    let color = std::io::stdout().is_terminal();
    let paint = |ok: bool| match (color, ok) {
        (true, true) => "\x1b[32mPASS\x1b[0m",
        (true, false) => "\x1b[31mFAIL\x1b[0m",
        (false, true) => "PASS",
        (false, false) => "FAIL",
    };
    let width = records.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    for r in records {
        let rel = serde_json::to_value(r.relation).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        println!("{} {:<width$} {:>12.4e} {rel:>2} {:>12.4e}  se {:.2e}", paint(r.pass), r.name, r.lhs, r.rhs, r.se);
    }
}

/// Runs one experiment and writes its files; returns whether every gate passed.
fn execute(kind: ExperimentKind, cfg: &ExperimentConfig) -> anyhow::Result<bool> {
    let result = run(kind, cfg)?;
    let file = ResultsFile::new(cfg, vec![result]);
    println!("== {} (config_hash={} seed={})", kind.name(), file.config_hash, cfg.seed);
    print_summary(&file.results[0]);
    print_records(&file.records);
    emit_outputs(&file, &cfg.output_dir).with_context(|| format!("writing to {}", cfg.output_dir.display()))?;
    println!("wrote {}", cfg.output_dir.display());
    if !file.summary.pass {
        println!("gate failures: {}", file.summary.failures.join(", "));
    }
    Ok(file.summary.pass)
}

const ALL_KINDS: [ExperimentKind; 5] = [
    ExperimentKind::Verify,
    ExperimentKind::Rate,
    ExperimentKind::Tail,
    ExperimentKind::LinearPart,
    ExperimentKind::Lambda,
];

enum Failure {
    Usage(anyhow::Error),
    Gate,
}

fn main_inner(cli: Cli) -> Result<(), Failure> {
    let (kinds, opts): (Vec<ExperimentKind>, &Opts) = match &cli.command {
        Command::Verify(o) => (vec![ExperimentKind::Verify], o),
        Command::Rate(o) => (vec![ExperimentKind::Rate], o),
        Command::Tail(o) => (vec![ExperimentKind::Tail], o),
        Command::LinearPart(o) => (vec![ExperimentKind::LinearPart], o),
        Command::Lambda(o) => (vec![ExperimentKind::Lambda], o),
        Command::All(o) => (ALL_KINDS.to_vec(), o),
    };
    if let Some(t) = opts.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(anyhow::anyhow!("cannot start {t} threads: {e}")))?;
    }
    let nested = kinds.len() > 1;
    let configs = kinds
        .iter()
        .map(|&k| {
            let mut cfg = build_config(k, opts)?;
            if nested {
                cfg.output_dir = cfg.output_dir.join(k.name());
            }
            Ok((k, cfg))
        })
        .collect::<anyhow::Result<Vec<_>>>()
        .map_err(Failure::Usage)?;
    let mut pass = true;
    for (kind, cfg) in &configs {
        pass &= execute(*kind, cfg).map_err(Failure::Usage)?;
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Gate)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Gate) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
