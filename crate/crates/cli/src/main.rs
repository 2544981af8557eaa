use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use graybox_core::harness::{self, AnalyzeConfig, ExperimentConfig, ProblemSpec, SweepConfig};
use graybox_core::optimizers::OptimizerSpec;
use graybox_core::structure::DependencyCheck;
use graybox_core::{Budget, GrayBoxError};

/// Gray-box optimization experiments on Walsh-decomposable problems.
#[derive(Parser)]
#[command(name = "graybox", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every optimizer on seeded instances of one problem.
    Solve(SolveArgs),
    /// Success rate and FFE over problem sizes and noise levels.
    Sweep(SweepArgs),
    /// Epistasis, clique, coefficient and cross-section statistics.
    Analyze(AnalyzeArgs),
    /// Remove small Walsh terms while the global optima stay the same.
    Denoise(InstanceArgs),
    /// Write the Walsh expansion of a problem instance.
    Transform(TransformArgs),
}

fn problem(s: &str) -> Result<ProblemSpec, String> {
    s.parse().map_err(|e: GrayBoxError| e.to_string())
}

fn optimizer(s: &str) -> Result<OptimizerSpec, String> {
    s.parse().map_err(|e: GrayBoxError| e.to_string())
}

#[derive(Clone)]
struct CheckList(Vec<DependencyCheck>);

fn checks(s: &str) -> Result<CheckList, String> {
    harness::parse_checks(s).map(CheckList).map_err(|e| e.to_string())
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory.
    #[arg(long, env = "GRAYBOX_OUT", default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct BatchArgs {
    /// Problem spec, e.g. `dec:k=8,n=40,o=0+noise(c=5,seed=7)`.
    #[arg(long, value_parser = problem)]
    problem: ProblemSpec,
    /// Optimizer spec; repeat for several.
    #[arg(long = "optimizer", value_parser = optimizer, required = true)]
    optimizers: Vec<OptimizerSpec>,
    #[arg(long, default_value_t = ExperimentConfig::DEFAULT_REPETITIONS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    #[arg(long, default_value_t = Budget::DEFAULT_MAX_FFE, value_parser = clap::value_parser!(u64).range(1..))]
    max_ffe: u64,
    /// Run i uses seed `seed + i`.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

impl BatchArgs {
    fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            problem: self.problem.clone(),
            optimizers: self.optimizers.clone(),
            repetitions: self.reps as usize,
            max_ffe: self.max_ffe,
            base_seed: self.seed,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    batch: BatchArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    batch: BatchArgs,
    /// Problem sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Walsh noise levels (coefficients per variable), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    noise: Vec<usize>,
    #[arg(long, default_value_t = 7)]
    noise_seed: u64,
    /// Minimum fitness gap of the base problem, when not known.
    #[arg(long)]
    gmin: Option<f64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, value_parser = problem)]
    problem: ProblemSpec,
    /// Dependency checks: `all` or a list of nonlinear, nonmonotone, 2dled.
    #[arg(long, value_parser = checks, default_value = "all")]
    checks: CheckList,
    #[arg(long, default_value_t = ExperimentConfig::DEFAULT_REPETITIONS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long, value_parser = problem)]
    problem: ProblemSpec,
    /// Run index selecting the seeded instance.
    #[arg(long, default_value_t = 0)]
    run: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long, value_parser = problem)]
    problem: ProblemSpec,
    #[arg(long, default_value_t = 0)]
    run: u64,
    /// Walsh file to write; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> graybox_core::Result<()> {
    match cli.command {
        Command::Solve(a) => {
            let runs = harness::solve(&a.batch.config())?;
            let successes = runs.iter().filter(|r| r.success).count();
            println!("{successes}/{} runs reached the optimum", runs.len());
            report(&[harness::write_runs(&a.batch.output.out, &runs)?]);
        }
        Command::Sweep(a) => {
            let out = harness::sweep(&SweepConfig {
                experiment: a.batch.config(),
                sizes: a.sizes,
                noise_levels: a.noise,
                noise_seed: a.noise_seed,
                noise_gap: a.gmin,
            })?;
            for row in &out.scalability {
                let largest = row.largest_n.map_or("-".to_string(), |n| n.to_string());
                println!("c={} {}: largest n = {largest}", row.noise_c, row.optimizer);
            }
            report(&harness::write_sweep(&a.batch.output.out, &out)?);
        }
        Command::Analyze(a) => {
            let out = harness::analyze(&AnalyzeConfig {
                problem: a.problem,
                checks: a.checks.0,
                repetitions: a.reps as usize,
                base_seed: a.seed,
            })?;
            report(&harness::write_analysis(&a.output.out, &out)?);
        }
        Command::Denoise(a) => {
            let r = harness::denoise_problem(&a.problem, a.run)?;
            println!(
                "removed {} of {} terms",
                r.removed_terms,
                r.removed_terms + r.retained_terms
            );
            report(&harness::write_denoise(&a.output.out, &r)?);
        }
        Command::Transform(a) => {
            let text = harness::transform(&a.problem, a.run)?.to_text();
            match a.out {
                Some(path) => {
                    write_file(&path, &text)?;
                    report(&[path]);
                }
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (GrayBoxError::Parse(_) | GrayBoxError::InvalidArgument(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
