use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use cdqaoa::harness::{
    emit_landscape, ensemble_stats, read_records, reindex_by_parameters, run_experiment, threshold_crossings,
    validate, write_outputs, Corruption, ExperimentConfig, LandscapeConfig, RunRecord, RunStatus, SpecFamily,
};
use cdqaoa::model::{spectrum_bounds, Variant};
use cdqaoa::optimizer::{LandscapeGrid, Method, OptimizerConfig, Strategy};
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "cdqaoa", version, about = "Counterdiabatic QAOA on Ising chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a chain and print it as JSON.
    Instance(InstanceArgs),
    /// Depth sweep on a single instance.
    Sweep(RunArgs),
    /// Depth sweeps over a seeded random ensemble.
    Ensemble(RunArgs),
    /// Depth-one cost grid of a constrained variant and its free form.
    Landscape(LandscapeArgs),
    /// Fermion simulator against the dense oracle.
    Validate(ValidateArgs),
    /// Statistics from stored records.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Interp,
    Multistart,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Interp => Strategy::Interp,
            StrategyArg::Multistart => Strategy::MultiStart,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    NelderMead,
    Bfgs,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::NelderMead => Method::NelderMead,
            MethodArg::Bfgs => Method::NumericGradientQuasiNewton,
        }
    }
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long, default_value = "ring")]
    family: SpecFamily,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    family: Option<SpecFamily>,
    #[arg(long)]
    n: Option<usize>,
    /// Repeatable.
    #[arg(long = "variant")]
    variants: Vec<Variant>,
    #[arg(long)]
    p_max: Option<usize>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    starts: Option<usize>,
    /// Applied to every selected variant.
    #[arg(long)]
    strategy: Option<StrategyArg>,
    #[arg(long)]
    method: Option<MethodArg>,
    /// Per start.
    #[arg(long)]
    max_evals: Option<usize>,
    /// Output directory for records and tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Experiment config JSON; overrides every other flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exit with status 3 if any run ran out of evaluations.
    #[arg(long)]
    require_converged: bool,
}

#[derive(Args)]
struct LandscapeArgs {
    #[arg(long, default_value = "ring")]
    family: SpecFamily,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Constrained variant.
    #[arg(long, default_value = "qaoa-cd-2p")]
    variant: Variant,
    #[arg(long, default_value_t = 61)]
    n_beta: usize,
    #[arg(long, default_value_t = 61)]
    n_gamma: usize,
    #[arg(long, default_value_t = 20)]
    starts: usize,
    #[arg(long, default_value = "landscape.csv")]
    out: PathBuf,
    /// Landscape config JSON; overrides every other flag.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Repeatable.
    #[arg(long = "n", default_values_t = [4, 6, 8])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Flip the first-order generator to check that the suite catches it.
    #[arg(long)]
    corrupt: bool,
    /// Write the full report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// `records.json`, or a directory holding one.
    records: PathBuf,
    #[arg(long, default_value_t = 1e-2)]
    threshold: f64,
    /// Write the derived tables here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn experiment_config(args: &RunArgs, ensemble: bool) -> Result<ExperimentConfig> {
    if let Some(path) = &args.config {
        return read_json(path);
    }
    let family = args
        .family
        .unwrap_or(if ensemble { SpecFamily::OpenRandom } else { SpecFamily::RingUniform });
    let mut cfg = ExperimentConfig {
        spec_family: family,
        n_sites: args.n.unwrap_or(10),
        m_instances: args.instances.unwrap_or(if ensemble { 20 } else { 1 }),
        base_seed: args.seed.unwrap_or(0),
        p_max: args.p_max.unwrap_or(5),
        n_starts: args.starts.unwrap_or(20),
        threshold: args.threshold.unwrap_or(1e-2),
        optimizer: OptimizerConfig {
            method: args.method.map_or(Method::NumericGradientQuasiNewton, Method::from),
            ..Default::default()
        },
        output_dir: args.out.clone(),
        ..Default::default()
    };
    if let Some(m) = args.max_evals {
        cfg.optimizer.max_evals = m;
    }
    if !args.variants.is_empty() {
        cfg.variants = args.variants.clone();
    }
    if let Some(s) = args.strategy {
        cfg.strategy = cfg.variants.iter().map(|&v| (v, s.into())).collect();
    }
    Ok(cfg)
}

fn print_records(records: &[RunRecord]) {
    println!("{:>8} {:>12} {:>4} {:>5} {:>22} {:>12} {:>9}  status", "instance", "variant", "p", "n_p", "energy", "residual", "evals");
    for r in records {
        println!(
            "{:>8} {:>12} {:>4} {:>5} {:>22} {:>12} {:>9}  {}",
            r.instance_id,
            r.variant.to_string(),
            r.p,
            r.n_p,
            r.energy.map(|e| format!("{e:.15}")).unwrap_or_default(),
            r.residual.map(|e| format!("{e:.4e}")).unwrap_or_default(),
            r.n_evals,
            r.status.label()
        );
    }
}

fn print_summary(records: &[RunRecord], threshold: f64) {
    println!("{:>12} {:>4} {:>12} {:>12} {:>6}", "variant", "p", "mean", "std", "count");
    for s in ensemble_stats(records) {
        println!(
            "{:>12} {:>4} {:>12.4e} {:>12.4e} {:>6}",
            s.variant.to_string(),
            s.p,
            s.mean_residual,
            s.std_residual,
            s.count
        );
    }
    for c in threshold_crossings(records, threshold) {
        let mean = c.mean_curve_crossing.map_or("none".to_string(), |p| p.to_string());
        let inst = c.instance_mean_crossing.map_or("none".to_string(), |p| format!("{p:.2}"));
        println!(
            "crossing {} eps={:e}: mean curve p={mean}, instance mean p={inst} ({}/{} crossed)",
            c.variant, c.threshold, c.instances_crossed, c.instances
        );
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Instance(a) => {
            let spec = a.family.build(a.n, a.seed)?;
            let b = spectrum_bounds(&spec);
            println!("{}", serde_json::to_string_pretty(&spec)?);
            println!("e_min {} e_max {}", b.e_min, b.e_max);
            Ok(0)
        }
        Command::Sweep(a) => run_sweep(&a, false),
        Command::Ensemble(a) => run_sweep(&a, true),
        Command::Landscape(a) => {
            let cfg = match &a.config {
                Some(path) => read_json(path)?,
                None => LandscapeConfig {
                    spec_family: a.family,
                    n_sites: a.n,
                    seed: a.seed,
                    constrained: a.variant,
                    grid: LandscapeGrid {
                        beta_range: (0.0, std::f64::consts::PI),
                        gamma_range: (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2),
                        n_beta: a.n_beta,
                        n_gamma: a.n_gamma,
                    },
                    optimizer: OptimizerConfig {
                        method: Method::NumericGradientQuasiNewton,
                        restarts: a.starts,
                        seed: a.seed,
                        ..Default::default()
                    },
                },
            };
            let path = emit_landscape(&cfg, &a.out)?;
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::Validate(a) => {
            let corruption = if a.corrupt { Corruption::FlipCd } else { Corruption::None };
            let report = validate(&a.sizes, a.trials, a.seed, corruption)?;
            println!(
                "energy checks {} (max diff {:.3e}), commutator checks {} (max diff {:.3e})",
                report.energy_checks, report.max_energy_diff, report.commutator_checks, report.max_commutator_diff
            );
            for v in &report.violations {
                println!("violation {} n={} {} {:?} error {:.3e}", v.check, v.n, v.chain, v.variant, v.error);
            }
            if let Some(path) = &a.out {
                std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
            }
            Ok(if report.passed() { 0 } else { EXIT_VALIDATION })
        }
        Command::Report(a) => {
            let path = if a.records.is_dir() { a.records.join("records.json") } else { a.records.clone() };
            let records = read_records(&path).with_context(|| format!("reading {}", path.display()))?;
            print_summary(&records, a.threshold);
            if let Some(dir) = &a.out {
                let manifest_path = path.with_file_name("manifest.json");
                let mut cfg: ExperimentConfig = if manifest_path.exists() {
                    read_json::<cdqaoa::harness::Manifest>(&manifest_path)?.config
                } else {
                    ExperimentConfig::default()
                };
                cfg.threshold = a.threshold;
                cfg.output_dir = Some(dir.clone());
                write_outputs(&cfg, &records, dir)?;
                for row in reindex_by_parameters(&records) {
                    println!("{} n_p={} p={} mean={:.4e}", row.variant, row.n_p, row.p, row.mean_residual);
                }
            }
            Ok(0)
        }
    }
}

fn run_sweep(args: &RunArgs, ensemble: bool) -> Result<u8> {
    let cfg = experiment_config(args, ensemble)?;
    if !ensemble && cfg.m_instances > 1 {
        bail!("sweep runs a single instance; use `ensemble`");
    }
    let records = run_experiment(&cfg)?;
    print_records(&records);
    print_summary(&records, cfg.threshold);
    if args.require_converged && records.iter().any(|r| r.status == RunStatus::BudgetExhausted) {
        eprintln!("evaluation budget exhausted on at least one run");
        return Ok(EXIT_BUDGET);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
