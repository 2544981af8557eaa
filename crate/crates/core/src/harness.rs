//! Experiment harness: problem and optimizer spec strings, seeded batches
//! run on a work pool, aggregation and CSV output.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{clique_stats, cross_section_path, denoise, median, min_abs_coeff_by_mask_size, DenoiseReport};
use crate::error::{GrayBoxError, Result};
use crate::evaluation::Budget;
use crate::optimizers::{run_optimizer, OptimizerSpec, RunResult};
use crate::problems::{
    add_solution_noise, add_walsh_noise_with_gap, make_isg, make_nk, make_onemax, make_trap_concat, ProblemInstance,
    TrapKind,
};
use crate::structure::{dependency_graph_from_table, DependencyCheck};
use crate::walsh::{self, global_minima, global_optima, WalshExpansion, TOY_LIMIT};

const OPTIMIZER_STREAM: u64 = 0x6f70_7469;
const CROSS_SECTION_STREAM: u64 = 0x7863_7373;

#[derive(Clone, Debug, PartialEq)]
pub enum BaseProblem {
    Onemax {
        n: usize,
    },
    Trap {
        kind: TrapKind,
        k: usize,
        n: usize,
        overlap: usize,
    },
    Nk {
        n: usize,
        k: usize,
        seed: u64,
    },
    Isg {
        side: usize,
        seed: u64,
    },
    WalshFile {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum NoiseSpec {
    Walsh { c: usize, seed: u64, gap: Option<f64> },
    Solution { n_vol: f64, seed: u64 },
}

/// Parsed problem spec, e.g. `dec:k=8,n=40,o=0+noise(c=5,seed=7)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub base: BaseProblem,
    pub noise: Option<NoiseSpec>,
}

fn parse_params(s: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for kv in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| GrayBoxError::Parse(format!("expected key=value, got `{kv}`")))?;
        out.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
    }
    Ok(out)
}

struct Params {
    map: BTreeMap<String, String>,
}

impl Params {
    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.map.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| GrayBoxError::Parse(format!("bad value `{v}` for `{key}`"))),
        }
    }

    fn require<T: FromStr>(&mut self, key: &str, what: &str) -> Result<T> {
        self.take(key)?
            .ok_or_else(|| GrayBoxError::Parse(format!("{what} needs `{key}=`")))
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            Some(k) => Err(GrayBoxError::Parse(format!("unknown parameter `{k}`"))),
            None => Ok(()),
        }
    }
}

fn split_call(s: &str) -> Result<(&str, &str)> {
    let s = s.trim();
    match s.find('(') {
        Some(open) if s.ends_with(')') => Ok((&s[..open], &s[open + 1..s.len() - 1])),
        None => Ok((s, "")),
        _ => Err(GrayBoxError::Parse(format!("unbalanced parentheses in `{s}`"))),
    }
}

impl FromStr for ProblemSpec {
    type Err = GrayBoxError;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split('+');
        let head = parts.next().unwrap_or("").trim();
        let (name, params) = head.split_once(':').unwrap_or((head, ""));
        let mut p = Params {
            map: parse_params(params)?,
        };
        let base = match name.trim().to_ascii_lowercase().as_str() {
            "onemax" => BaseProblem::Onemax {
                n: p.require("n", "onemax")?,
            },
            tag @ ("dec" | "bim") => BaseProblem::Trap {
                kind: if tag == "dec" {
                    TrapKind::Deceptive
                } else {
                    TrapKind::Bimodal
                },
                k: p.require("k", tag)?,
                n: p.require("n", tag)?,
                overlap: p.take("o")?.unwrap_or(0),
            },
            "nk" => BaseProblem::Nk {
                n: p.require("n", "nk")?,
                k: p.require("k", "nk")?,
                seed: p.take("seed")?.unwrap_or(1),
            },
            "isg" => BaseProblem::Isg {
                side: p.require("l", "isg")?,
                seed: p.take("seed")?.unwrap_or(1),
            },
            "walsh" => BaseProblem::WalshFile {
                path: PathBuf::from(p.require::<String>("file", "walsh")?),
            },
            other => return Err(GrayBoxError::Parse(format!("unknown problem `{other}`"))),
        };
        p.finish()?;
        let mut noise = None;
        for part in parts {
            if noise.is_some() {
                return Err(GrayBoxError::Parse(format!(
                    "only one noise modifier allowed, got `{part}`"
                )));
            }
            let (kind, args) = split_call(part)?;
            let mut q = Params {
                map: parse_params(args)?,
            };
            noise = Some(match kind.trim().to_ascii_lowercase().as_str() {
                "noise" => NoiseSpec::Walsh {
                    c: q.require("c", "noise")?,
                    seed: q.take("seed")?.unwrap_or(7),
                    gap: q.take("gmin")?,
                },
                "snoise" => NoiseSpec::Solution {
                    n_vol: q.require("nvol", "snoise")?,
                    seed: q.take("seed")?.unwrap_or(7),
                },
                other => return Err(GrayBoxError::Parse(format!("unknown modifier `{other}`"))),
            });
            q.finish()?;
        }
        Ok(Self { base, noise })
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.base {
            BaseProblem::Onemax { n } => write!(f, "onemax:n={n}")?,
            BaseProblem::Trap { kind, k, n, overlap } => {
                let tag = if *kind == TrapKind::Deceptive { "dec" } else { "bim" };
                write!(f, "{tag}:k={k},n={n},o={overlap}")?
            }
            BaseProblem::Nk { n, k, seed } => write!(f, "nk:n={n},k={k},seed={seed}")?,
            BaseProblem::Isg { side, seed } => write!(f, "isg:L={side},seed={seed}")?,
            BaseProblem::WalshFile { path } => write!(f, "walsh:file={}", path.display())?,
        }
        match &self.noise {
            None => Ok(()),
            Some(NoiseSpec::Walsh { c, seed, gap: None }) => write!(f, "+noise(c={c},seed={seed})"),
            Some(NoiseSpec::Walsh { c, seed, gap: Some(g) }) => write!(f, "+noise(c={c},seed={seed},gmin={g})"),
            Some(NoiseSpec::Solution { n_vol, seed }) => write!(f, "+snoise(nVol={n_vol},seed={seed})"),
        }
    }
}

impl ProblemSpec {
    pub fn n(&self) -> Result<usize> {
        Ok(match &self.base {
            BaseProblem::Onemax { n } | BaseProblem::Trap { n, .. } | BaseProblem::Nk { n, .. } => *n,
            BaseProblem::Isg { side, .. } => side * side,
            BaseProblem::WalshFile { path } => WalshExpansion::infer_dimension(&fs::read_to_string(path)?)?,
        })
    }

    pub fn noise_c(&self) -> usize {
        match self.noise {
            Some(NoiseSpec::Walsh { c, .. }) => c,
            _ => 0,
        }
    }

    /// Same spec with problem size `n`; spin glasses need a square `n`.
    pub fn with_size(&self, n: usize) -> Result<Self> {
        let mut out = self.clone();
        match &mut out.base {
            BaseProblem::Onemax { n: m } | BaseProblem::Trap { n: m, .. } | BaseProblem::Nk { n: m, .. } => *m = n,
            BaseProblem::Isg { side, .. } => {
                let s = (n as f64).sqrt().round() as usize;
                if s * s != n {
                    return Err(GrayBoxError::InvalidArgument(format!(
                        "spin glass size {n} is not a square"
                    )));
                }
                *side = s;
            }
            BaseProblem::WalshFile { .. } => {
                return Err(GrayBoxError::InvalidArgument("Walsh files have a fixed size".into()))
            }
        }
        Ok(out)
    }

    /// Same spec with Walsh noise of `c` coefficients per variable (none
    /// for `c = 0`).
    pub fn with_noise_c(&self, c: usize, seed: u64, gap: Option<f64>) -> Self {
        let mut out = self.clone();
        out.noise = (c > 0).then_some(NoiseSpec::Walsh { c, seed, gap });
        out
    }

    /// Builds the instance of run `run`: every seed in the spec is offset
    /// by the run index, so optimizers compared on the same run share it.
    pub fn instantiate(&self, run: u64) -> Result<ProblemInstance> {
        let base = match &self.base {
            BaseProblem::Onemax { n } => make_onemax(*n)?,
            BaseProblem::Trap { kind, k, n, overlap } => make_trap_concat(*kind, *k, *n, *overlap)?,
            BaseProblem::Nk { n, k, seed } => make_nk(*n, *k, seed.wrapping_add(run))?,
            BaseProblem::Isg { side, seed } => make_isg(*side, seed.wrapping_add(run))?,
            BaseProblem::WalshFile { path } => load_walsh_instance(path)?,
        };
        match &self.noise {
            None => Ok(base),
            Some(NoiseSpec::Walsh { c, seed, gap }) => {
                add_walsh_noise_with_gap(&base, *c, seed.wrapping_add(run), *gap)
            }
            Some(NoiseSpec::Solution { n_vol, seed }) => add_solution_noise(&base, *n_vol, seed.wrapping_add(run)),
        }
    }
}

/// Reads a Walsh file; toy-sized instances get their optimum by
/// enumeration.
pub fn load_walsh_instance(path: &Path) -> Result<ProblemInstance> {
    let text = fs::read_to_string(path)?;
    let n = WalshExpansion::infer_dimension(&text)?;
    let e = WalshExpansion::parse_text(n, &text)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut p = ProblemInstance::from_expansion(name, e.clone());
    if n <= TOY_LIMIT {
        let best = e.value_table()?.into_iter().fold(f64::NEG_INFINITY, f64::max);
        p = p.with_known_optimum(best);
    }
    Ok(p)
}

pub fn optimizer_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(OPTIMIZER_STREAM);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub optimizers: Vec<OptimizerSpec>,
    pub repetitions: usize,
    pub max_ffe: u64,
    pub base_seed: u64,
}

impl ExperimentConfig {
    pub const DEFAULT_REPETITIONS: usize = 30;

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(GrayBoxError::InvalidArgument("repetitions must be at least 1".into()));
        }
        if self.max_ffe == 0 {
            return Err(GrayBoxError::InvalidArgument("max FFE must be positive".into()));
        }
        if self.optimizers.is_empty() {
            return Err(GrayBoxError::InvalidArgument(
                "at least one optimizer is required".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub problem: String,
    pub n: usize,
    pub noise_c: usize,
    pub optimizer: String,
    pub seed: u64,
    pub success: bool,
    pub ffe_to_optimum: Option<u64>,
    pub best_fitness: f64,
}

impl RunRecord {
    pub const HEADER: &'static [&'static str] = &[
        "problem",
        "n",
        "noise_c",
        "optimizer",
        "seed",
        "success",
        "ffe_to_optimum",
        "best_fitness",
    ];
}

fn run_batch(
    spec: &ProblemSpec,
    optimizers: &[OptimizerSpec],
    repetitions: usize,
    max_ffe: u64,
    base_seed: u64,
) -> Result<Vec<RunRecord>> {
    let n = spec.n()?;
    let label = spec.to_string();
    let instances: Vec<ProblemInstance> = (0..repetitions as u64)
        .into_par_iter()
        .map(|i| spec.instantiate(i))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..optimizers.len())
        .flat_map(|o| (0..repetitions).map(move |i| (o, i)))
        .collect();
    jobs.into_par_iter()
        .map(|(o, i)| {
            let seed = base_seed.wrapping_add(i as u64);
            let r: RunResult = run_optimizer(
                &instances[i],
                optimizers[o],
                Budget::new(max_ffe),
                &mut optimizer_rng(seed),
            )?;
            Ok(RunRecord {
                problem: label.clone(),
                n,
                noise_c: spec.noise_c(),
                optimizer: optimizers[o].to_string(),
                seed,
                success: r.success,
                ffe_to_optimum: r.ffe_to_optimum,
                best_fitness: r.best_fitness,
            })
        })
        .collect()
}

/// Every (optimizer, run) combination of the config.
pub fn solve(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    run_batch(
        &cfg.problem,
        &cfg.optimizers,
        cfg.repetitions,
        cfg.max_ffe,
        cfg.base_seed,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub problem: String,
    pub n: usize,
    pub noise_c: usize,
    pub optimizer: String,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub median_ffe_to_optimum: Option<f64>,
}

impl AggregateRow {
    pub const HEADER: &'static [&'static str] = &[
        "problem",
        "n",
        "noise_c",
        "optimizer",
        "runs",
        "successes",
        "success_rate",
        "median_ffe_to_optimum",
    ];
}

/// Largest size solved in at least 80% of the runs, per noise level and
/// optimizer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalabilityRow {
    pub problem: String,
    pub noise_c: usize,
    pub optimizer: String,
    pub largest_n: Option<usize>,
}

impl ScalabilityRow {
    pub const HEADER: &'static [&'static str] = &["problem", "noise_c", "optimizer", "largest_n"];
}

pub const SUCCESS_RATE_THRESHOLD: f64 = 0.8;

/// Groups run records by (problem, n, noise, optimizer), keeping first
/// appearance order.
pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateRow> {
    let mut keys: Vec<(String, usize, usize, String)> = Vec::new();
    let mut groups: BTreeMap<(String, usize, usize, String), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.problem.clone(), r.n, r.noise_c, r.optimizer.clone());
        let group = groups.entry(key.clone()).or_default();
        if group.is_empty() {
            keys.push(key);
        }
        group.push(r);
    }
    keys.into_iter()
        .map(|key| {
            let group = &groups[&key];
            let ffe: Vec<f64> = group
                .iter()
                .filter_map(|r| r.ffe_to_optimum)
                .map(|v| v as f64)
                .collect();
            let successes = group.iter().filter(|r| r.success).count();
            AggregateRow {
                problem: key.0,
                n: key.1,
                noise_c: key.2,
                optimizer: key.3,
                runs: group.len(),
                successes,
                success_rate: successes as f64 / group.len() as f64,
                median_ffe_to_optimum: median(&ffe),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub experiment: ExperimentConfig,
    pub sizes: Vec<usize>,
    pub noise_levels: Vec<usize>,
    pub noise_seed: u64,
    pub noise_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutput {
    pub runs: Vec<RunRecord>,
    pub aggregates: Vec<AggregateRow>,
    pub scalability: Vec<ScalabilityRow>,
}

pub fn sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    let ex = &cfg.experiment;
    ex.validate()?;
    if cfg.sizes.is_empty() || cfg.noise_levels.is_empty() {
        return Err(GrayBoxError::InvalidArgument("sweep axes must be nonempty".into()));
    }
    let template = ex.problem.clone();
    let mut runs = Vec::new();
    for &c in &cfg.noise_levels {
        for &n in &cfg.sizes {
            let spec = template.with_size(n)?.with_noise_c(c, cfg.noise_seed, cfg.noise_gap);
            runs.extend(run_batch(
                &spec,
                &ex.optimizers,
                ex.repetitions,
                ex.max_ffe,
                ex.base_seed,
            )?);
        }
    }
    let mut aggregates = aggregate(&runs);
    let family = template.with_noise_c(0, cfg.noise_seed, None).to_string();
    for row in aggregates.iter_mut() {
        row.problem = family.clone();
    }
    let mut scalability = Vec::new();
    for &c in &cfg.noise_levels {
        for opt in &ex.optimizers {
            let name = opt.to_string();
            let largest_n = aggregates
                .iter()
                .filter(|a| a.noise_c == c && a.optimizer == name && a.success_rate >= SUCCESS_RATE_THRESHOLD)
                .map(|a| a.n)
                .max();
            scalability.push(ScalabilityRow {
                problem: family.clone(),
                noise_c: c,
                optimizer: name,
                largest_n,
            });
        }
    }
    Ok(SweepOutput {
        runs,
        aggregates,
        scalability,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpistasisRow {
    pub instance: String,
    pub check: String,
    pub raw_epistasis: f64,
    pub denoised_epistasis: f64,
}

impl EpistasisRow {
    pub const HEADER: &'static [&'static str] = &["instance", "check", "raw_epistasis", "denoised_epistasis"];
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CliqueRow {
    pub instance: String,
    pub check: String,
    pub clique_count: usize,
    pub min_len: usize,
    pub max_len: usize,
}

impl CliqueRow {
    pub const HEADER: &'static [&'static str] = &["instance", "check", "clique_count", "min_len", "max_len"];
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinCoefficientRow {
    pub instance: String,
    pub mask_size: usize,
    pub min_abs_coefficient: f64,
}

impl MinCoefficientRow {
    pub const HEADER: &'static [&'static str] = &["instance", "mask_size", "min_abs_coefficient"];
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossSectionRow {
    pub instance: String,
    pub step: usize,
    pub fitness_original: f64,
    pub fitness_surrogate: f64,
}

impl CrossSectionRow {
    pub const HEADER: &'static [&'static str] = &["instance", "step", "fitness_original", "fitness_surrogate"];
}

/// Min / median / max of a per-instance statistic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub statistic: String,
    pub key: String,
    pub instances: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl SummaryRow {
    pub const HEADER: &'static [&'static str] = &["statistic", "key", "instances", "min", "median", "max"];

    fn new(statistic: &str, key: String, values: &[f64]) -> Self {
        Self {
            statistic: statistic.into(),
            key,
            instances: values.len(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            median: median(values).unwrap_or(f64::NAN),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnalysisOutput {
    pub epistasis: Vec<EpistasisRow>,
    pub cliques: Vec<CliqueRow>,
    pub min_coefficients: Vec<MinCoefficientRow>,
    pub cross_sections: Vec<CrossSectionRow>,
    pub summary: Vec<SummaryRow>,
    pub removed_terms: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyzeConfig {
    pub problem: ProblemSpec,
    pub checks: Vec<DependencyCheck>,
    pub repetitions: usize,
    pub base_seed: u64,
}

struct InstanceAnalysis {
    label: String,
    report: DenoiseReport,
    out: AnalysisOutput,
}

fn analyze_instance(cfg: &AnalyzeConfig, run: usize) -> Result<InstanceAnalysis> {
    let p = cfg.problem.instantiate(run as u64)?;
    walsh::check_toy(p.n())?;
    let e = match p.expansion() {
        Some(e) => e.clone(),
        None => walsh::wht_full(&p)?,
    };
    let label = format!("{}#{run}", cfg.problem);
    let report = denoise(&e)?;
    let table = e.value_table()?;
    let mut out = AnalysisOutput::default();
    for &check in &cfg.checks {
        let c = report
            .epistasis_for(check)
            .expect("denoise reports every dependency check");
        out.epistasis.push(EpistasisRow {
            instance: label.clone(),
            check: check.name().into(),
            raw_epistasis: c.before,
            denoised_epistasis: c.after,
        });
        let stats = clique_stats(&dependency_graph_from_table(&table, e.n(), check).undirected());
        out.cliques.push(CliqueRow {
            instance: label.clone(),
            check: check.name().into(),
            clique_count: stats.count,
            min_len: stats.min_len,
            max_len: stats.max_len,
        });
    }
    for (size, w) in min_abs_coeff_by_mask_size(&e) {
        out.min_coefficients.push(MinCoefficientRow {
            instance: label.clone(),
            mask_size: size,
            min_abs_coefficient: w,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.base_seed.wrapping_add(run as u64));
    rng.set_stream(CROSS_SECTION_STREAM);
    let path = cross_section_path(&global_optima(&e)?, &global_minima(&e)?, &mut rng)?;
    for (step, x) in path.iter().enumerate() {
        out.cross_sections.push(CrossSectionRow {
            instance: label.clone(),
            step,
            fitness_original: e.evaluate_unchecked(x),
            fitness_surrogate: report.surrogate.evaluate_unchecked(x),
        });
    }
    Ok(InstanceAnalysis { label, report, out })
}

/// Raw and denoised structure statistics of `repetitions` seeded
/// instances of a toy-sized problem.
pub fn analyze(cfg: &AnalyzeConfig) -> Result<AnalysisOutput> {
    if cfg.repetitions == 0 {
        return Err(GrayBoxError::InvalidArgument("repetitions must be at least 1".into()));
    }
    if cfg.checks.is_empty() {
        return Err(GrayBoxError::InvalidArgument(
            "at least one dependency check is required".into(),
        ));
    }
    let n = cfg.problem.n()?;
    walsh::check_toy(n)?;
    let parts: Vec<InstanceAnalysis> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|i| analyze_instance(cfg, i))
        .collect::<Result<_>>()?;
    let mut out = AnalysisOutput::default();
    for part in &parts {
        debug_assert!(part.out.epistasis.iter().all(|r| r.instance == part.label));
        out.epistasis.extend(part.out.epistasis.iter().cloned());
        out.cliques.extend(part.out.cliques.iter().cloned());
        out.min_coefficients.extend(part.out.min_coefficients.iter().cloned());
        out.cross_sections.extend(part.out.cross_sections.iter().cloned());
        out.removed_terms.push(part.report.removed_terms);
    }
    for &check in &cfg.checks {
        let rows = || out.epistasis.iter().filter(|r| r.check == check.name());
        let raw: Vec<f64> = rows().map(|r| r.raw_epistasis).collect();
        let den: Vec<f64> = rows().map(|r| r.denoised_epistasis).collect();
        out.summary
            .push(SummaryRow::new("raw_epistasis", check.name().into(), &raw));
        out.summary
            .push(SummaryRow::new("denoised_epistasis", check.name().into(), &den));
    }
    let mut by_size: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in &out.min_coefficients {
        by_size.entry(r.mask_size).or_default().push(r.min_abs_coefficient);
    }
    for (size, values) in by_size {
        out.summary
            .push(SummaryRow::new("min_abs_coefficient", size.to_string(), &values));
    }
    let removed: Vec<f64> = out.removed_terms.iter().map(|&r| r as f64).collect();
    out.summary
        .push(SummaryRow::new("removed_terms", "all".into(), &removed));
    Ok(out)
}

/// Denoises the first instance of a toy-sized problem.
pub fn denoise_problem(spec: &ProblemSpec, run: u64) -> Result<DenoiseReport> {
    let p = spec.instantiate(run)?;
    walsh::check_toy(p.n())?;
    match p.expansion() {
        Some(e) => denoise(e),
        None => denoise(&walsh::wht_full(&p)?),
    }
}

/// Walsh expansion of an instance: by full transform of the black box at
/// toy sizes, otherwise the generator's own expansion.
pub fn transform(spec: &ProblemSpec, run: u64) -> Result<WalshExpansion> {
    let p = spec.instantiate(run)?;
    if p.n() <= TOY_LIMIT {
        return walsh::wht_full(&p.black_box());
    }
    p.expansion()
        .cloned()
        .ok_or_else(|| GrayBoxError::MissingExpansion(p.name.clone()))
}

/// Writes `rows` with an explicit header so empty tables keep their schema.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_runs(dir: &Path, runs: &[RunRecord]) -> Result<PathBuf> {
    let path = dir.join("runs.csv");
    write_csv(&path, RunRecord::HEADER, runs)?;
    Ok(path)
}

pub fn write_sweep(dir: &Path, out: &SweepOutput) -> Result<Vec<PathBuf>> {
    let paths = vec![dir.join("runs.csv"), dir.join("sweep.csv"), dir.join("scalability.csv")];
    write_csv(&paths[0], RunRecord::HEADER, &out.runs)?;
    write_csv(&paths[1], AggregateRow::HEADER, &out.aggregates)?;
    write_csv(&paths[2], ScalabilityRow::HEADER, &out.scalability)?;
    Ok(paths)
}

pub fn write_analysis(dir: &Path, out: &AnalysisOutput) -> Result<Vec<PathBuf>> {
    let paths: Vec<PathBuf> = [
        "epistasis.csv",
        "cliques.csv",
        "min_coefficients.csv",
        "cross_section.csv",
        "analysis_summary.csv",
    ]
    .iter()
    .map(|f| dir.join(f))
    .collect();
    write_csv(&paths[0], EpistasisRow::HEADER, &out.epistasis)?;
    write_csv(&paths[1], CliqueRow::HEADER, &out.cliques)?;
    write_csv(&paths[2], MinCoefficientRow::HEADER, &out.min_coefficients)?;
    write_csv(&paths[3], CrossSectionRow::HEADER, &out.cross_sections)?;
    write_csv(&paths[4], SummaryRow::HEADER, &out.summary)?;
    Ok(paths)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DenoiseRow {
    pub check: String,
    pub raw_epistasis: f64,
    pub denoised_epistasis: f64,
    pub removed_terms: usize,
    pub retained_terms: usize,
}

impl DenoiseRow {
    pub const HEADER: &'static [&'static str] = &[
        "check",
        "raw_epistasis",
        "denoised_epistasis",
        "removed_terms",
        "retained_terms",
    ];
}

pub fn write_denoise(dir: &Path, report: &DenoiseReport) -> Result<Vec<PathBuf>> {
    let surrogate = dir.join("surrogate.walsh");
    let table = dir.join("denoise.csv");
    fs::create_dir_all(dir)?;
    fs::write(&surrogate, report.surrogate.to_text())?;
    let rows: Vec<DenoiseRow> = report
        .epistasis
        .iter()
        .map(|c| DenoiseRow {
            check: c.check.name().into(),
            raw_epistasis: c.before,
            denoised_epistasis: c.after,
            removed_terms: report.removed_terms,
            retained_terms: report.retained_terms,
        })
        .collect();
    write_csv(&table, DenoiseRow::HEADER, &rows)?;
    Ok(vec![surrogate, table])
}

pub fn parse_checks(s: &str) -> Result<Vec<DependencyCheck>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(DependencyCheck::ALL.to_vec());
    }
    s.split(',').map(|t| t.trim().parse()).collect()
}

pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| GrayBoxError::Parse(format!("bad list item `{t}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> ProblemSpec {
        s.parse().unwrap()
    }

    #[test]
    fn problem_specs_round_trip() {
        for s in [
            "onemax:n=10",
            "dec:k=8,n=104,o=0",
            "bim:k=6,n=24,o=2",
            "nk:n=20,k=4,seed=3",
            "isg:L=4,seed=3",
            "dec:k=8,n=40,o=0+noise(c=5,seed=7)",
            "nk:n=12,k=2,seed=1+noise(c=2,seed=9,gmin=0.01)",
            "onemax:n=10+snoise(nVol=1.2,seed=7)",
        ] {
            assert_eq!(spec(s).to_string(), s);
            assert_eq!(spec(&spec(s).to_string()), spec(s));
        }
        assert_eq!(spec("DEC: n=16, k=8").to_string(), "dec:k=8,n=16,o=0");
    }

    #[test]
    fn malformed_specs_name_the_token() {
        for (s, token) in [
            ("foo:n=3", "foo"),
            ("onemax:n=3,q=1", "q"),
            ("onemax:n=x", "x"),
            ("onemax:n=3+blur(c=1)", "blur"),
            ("dec:k=8", "n="),
        ] {
            let err = s.parse::<ProblemSpec>().unwrap_err().to_string();
            assert!(err.contains(token), "{s}: {err}");
        }
    }

    #[test]
    fn sizes_and_noise_axes() {
        let s = spec("dec:k=8,n=16,o=0");
        assert_eq!(s.with_size(40).unwrap().n().unwrap(), 40);
        assert_eq!(
            s.with_noise_c(5, 7, None).to_string(),
            "dec:k=8,n=16,o=0+noise(c=5,seed=7)"
        );
        assert_eq!(s.with_noise_c(0, 7, None), s);
        assert_eq!(spec("isg:L=3").with_size(16).unwrap().to_string(), "isg:L=4,seed=1");
        assert!(spec("isg:L=3").with_size(10).is_err());
    }

    #[test]
    fn runs_share_instances_across_optimizers() {
        let s = spec("nk:n=12,k=2,seed=4");
        let a = s.instantiate(3).unwrap();
        let b = s.instantiate(3).unwrap();
        let c = s.instantiate(4).unwrap();
        assert_eq!(a.known_optimum(), b.known_optimum());
        assert_eq!(a.expansion(), b.expansion());
        assert_ne!(a.expansion(), c.expansion());
    }

    #[test]
    fn nk_noise_needs_gap() {
        let err = spec("nk:n=12,k=2+noise(c=1)").instantiate(0).unwrap_err();
        assert!(matches!(err, GrayBoxError::UnknownFitnessGap));
        assert!(spec("nk:n=12,k=2+noise(c=1,gmin=0.001)").instantiate(0).is_ok());
    }

    #[test]
    fn solve_and_aggregate() {
        let cfg = ExperimentConfig {
            problem: spec("onemax:n=30"),
            optimizers: vec!["gbophe:vig=wdvig,strategy=lttop".parse().unwrap()],
            repetitions: 3,
            max_ffe: 2_000_000,
            base_seed: 1,
        };
        let runs = solve(&cfg).unwrap();
        assert_eq!(runs.len(), 3);
        assert!(runs.iter().all(|r| r.success));
        assert_eq!(runs.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![1, 2, 3]);
        let agg = aggregate(&runs);
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].success_rate, 1.0);
        let mut zero = cfg.clone();
        zero.repetitions = 0;
        assert!(solve(&zero).is_err());
    }

    #[test]
    fn sweep_noise_zero_matches_solve() {
        let ex = ExperimentConfig {
            problem: spec("dec:k=4,n=8,o=0"),
            optimizers: vec![OptimizerSpec::P3],
            repetitions: 4,
            max_ffe: 50_000,
            base_seed: 3,
        };
        let out = sweep(&SweepConfig {
            experiment: ex.clone(),
            sizes: vec![12],
            noise_levels: vec![0],
            noise_seed: 7,
            noise_gap: None,
        })
        .unwrap();
        assert_eq!(out.aggregates.len(), 1);
        let mut direct = ex.clone();
        direct.problem = ex.problem.with_size(12).unwrap();
        let direct_agg = aggregate(&solve(&direct).unwrap());
        assert_eq!(out.aggregates[0].success_rate, direct_agg[0].success_rate);
        assert_eq!(
            out.aggregates[0].median_ffe_to_optimum,
            direct_agg[0].median_ffe_to_optimum
        );
        assert_eq!(out.scalability.len(), 1);
    }

    #[test]
    fn analyze_pure_onemax() {
        let out = analyze(&AnalyzeConfig {
            problem: spec("onemax:n=6"),
            checks: DependencyCheck::ALL.to_vec(),
            repetitions: 2,
            base_seed: 1,
        })
        .unwrap();
        assert!(out
            .epistasis
            .iter()
            .all(|r| r.raw_epistasis == 0.0 && r.denoised_epistasis == 0.0));
        assert!(out
            .cliques
            .iter()
            .all(|r| r.clique_count == 6 && r.min_len == 1 && r.max_len == 1));
        assert!(out.min_coefficients.is_empty());
        assert_eq!(out.cross_sections.len(), 2 * 7);
    }

    #[test]
    fn analyze_rejects_large_problems() {
        let err = analyze(&AnalyzeConfig {
            problem: spec("onemax:n=30"),
            checks: vec![DependencyCheck::Nonlinear],
            repetitions: 1,
            base_seed: 1,
        })
        .unwrap_err();
        assert!(matches!(err, GrayBoxError::ToyLimit { .. }));
    }

    #[test]
    fn csv_headers_match_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.csv");
        let row = RunRecord {
            problem: "p".into(),
            n: 1,
            noise_c: 0,
            optimizer: "p3".into(),
            seed: 1,
            success: false,
            ffe_to_optimum: None,
            best_fitness: 0.5,
        };
        write_csv(&path, RunRecord::HEADER, &[row]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "problem,n,noise_c,optimizer,seed,success,ffe_to_optimum,best_fitness\np,1,0,p3,1,false,,0.5\n"
        );
        let empty = dir.path().join("empty.csv");
        write_csv::<CliqueRow>(&empty, CliqueRow::HEADER, &[]).unwrap();
        assert_eq!(
            fs::read_to_string(&empty).unwrap(),
            "instance,check,clique_count,min_len,max_len\n"
        );
    }

    #[test]
    fn transform_of_onemax() {
        let e = transform(&spec("onemax:n=4"), 0).unwrap();
        assert_eq!(e.coefficient(&[]), 2.0);
        assert_eq!(e.coefficient(&[2]), -0.5);
        assert_eq!(e.len(), 5);
    }

    #[test]
    fn walsh_file_problems() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.walsh");
        fs::write(&path, "1,2,3:-5\n3:2\n").unwrap();
        let s = spec(&format!("walsh:file={}", path.display()));
        let p = s.instantiate(0).unwrap();
        assert_eq!(p.n(), 3);
        assert_eq!(p.known_optimum(), Some(7.0));
    }
}
