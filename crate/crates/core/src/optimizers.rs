//! GBO-PHE and the gray-box P3 / LT-GOMEA baselines.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bits::BitVector;
use crate::error::{GrayBoxError, Result};
use crate::evaluation::{Budget, Evaluator, Individual};
use crate::linkage::{build_forest, masks_fos, LinkageForest};
use crate::operators::{fihc, om_step, px_mix, wpx, GrayBoxModel, MaskStrategy, VigKind, WpxConfig};
use crate::problems::ProblemInstance;
use crate::structure::InteractionGraph;

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub best_genotype: BitVector,
    pub best_fitness: f64,
    pub ffe_to_best: u64,
    pub ffe_to_optimum: Option<u64>,
    pub success: bool,
    pub total_ffe: u64,
    pub trajectory: Vec<(u64, f64)>,
}

impl RunResult {
    fn from_evaluator(ev: &Evaluator<'_>) -> Self {
        let best = ev.best().expect("a run evaluates at least one solution");
        Self {
            best_genotype: best.genotype.clone(),
            best_fitness: best.fitness,
            ffe_to_best: ev.ffe_to_best(),
            ffe_to_optimum: ev.ffe_to_target(),
            success: ev.target_reached(),
            total_ffe: ev.ffe(),
            trajectory: ev.trajectory().to_vec(),
        }
    }
}

/// Levels of mutually distinct individuals.
#[derive(Clone, Debug, Default)]
pub struct Pyramid {
    levels: Vec<Vec<Individual>>,
    seen: Vec<HashSet<BitVector>>,
}

impl Pyramid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, i: usize) -> &[Individual] {
        &self.levels[i]
    }

    pub fn contains(&self, level: usize, x: &BitVector) -> bool {
        self.seen.get(level).is_some_and(|s| s.contains(x))
    }

    /// Adds `ind` to `level`, creating it if it is the next one. Returns
    /// false when the genotype is already present there.
    pub fn add(&mut self, level: usize, ind: Individual) -> bool {
        assert!(level <= self.levels.len(), "pyramid levels must stay contiguous");
        if level == self.levels.len() {
            self.levels.push(Vec::new());
            self.seen.push(HashSet::new());
        }
        if !self.seen[level].insert(ind.genotype.clone()) {
            return false;
        }
        self.levels[level].push(ind);
        true
    }
}

/// Mixing operator of GBO-PHE.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mixing {
    Weighted(WpxConfig),
    Px,
}

impl Default for Mixing {
    fn default() -> Self {
        Self::Weighted(WpxConfig::default())
    }
}

/// One of the optimizers the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OptimizerSpec {
    GboPhe(Mixing),
    P3,
    LtGomea,
}

impl fmt::Display for OptimizerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GboPhe(Mixing::Px) => f.write_str("gbophe:vig=px"),
            Self::GboPhe(Mixing::Weighted(c)) => write!(f, "gbophe:vig={},strategy={}", c.vig_kind, c.strategy),
            Self::P3 => f.write_str("p3"),
            Self::LtGomea => f.write_str("ltgomea"),
        }
    }
}

impl FromStr for OptimizerSpec {
    type Err = GrayBoxError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, params) = s.split_once(':').unwrap_or((s, ""));
        let bad = |tok: &str| GrayBoxError::Parse(format!("unknown optimizer token `{tok}`"));
        match head.to_ascii_lowercase().as_str() {
            "p3" | "ltgomea" if !params.is_empty() => Err(bad(params)),
            "p3" => Ok(Self::P3),
            "ltgomea" => Ok(Self::LtGomea),
            "gbophe" => {
                let mut vig = None;
                let mut strategy = None;
                for kv in params.split(',').filter(|t| !t.is_empty()) {
                    let (k, v) = kv.split_once('=').ok_or_else(|| bad(kv))?;
                    match k.trim().to_ascii_lowercase().as_str() {
                        "vig" => vig = Some(v.trim().to_ascii_lowercase()),
                        "strategy" => strategy = Some(v.parse::<MaskStrategy>().map_err(|_| bad(v))?),
                        _ => return Err(bad(k)),
                    }
                }
                match vig.as_deref() {
                    Some("px") if strategy.is_some() => Err(bad("strategy")),
                    Some("px") => Ok(Self::GboPhe(Mixing::Px)),
                    v => {
                        let vig_kind = match v {
                            None => VigKind::WdVig,
                            Some(v) => v.parse().map_err(|_| bad(v))?,
                        };
                        Ok(Self::GboPhe(Mixing::Weighted(WpxConfig {
                            vig_kind,
                            strategy: strategy.unwrap_or(MaskStrategy::LtTop),
                        })))
                    }
                }
            }
            _ => Err(bad(head)),
        }
    }
}

fn effective_budget(p: &ProblemInstance, budget: Budget) -> Budget {
    budget.with_target(budget.target_fitness.or(p.success_threshold()))
}

/// Runs `spec` on `p`; baselines get the static VIG of the expansion.
pub fn run_optimizer<R: Rng + ?Sized>(
    p: &ProblemInstance,
    spec: OptimizerSpec,
    budget: Budget,
    rng: &mut R,
) -> Result<RunResult> {
    match spec {
        OptimizerSpec::GboPhe(mixing) => run_gbophe(p, mixing, budget, rng),
        OptimizerSpec::P3 | OptimizerSpec::LtGomea => {
            let e = p
                .expansion()
                .ok_or_else(|| GrayBoxError::MissingExpansion(p.name.clone()))?;
            let vig = crate::structure::static_vig(e);
            if spec == OptimizerSpec::P3 {
                run_p3(p, &vig, budget, rng)
            } else {
                run_ltgomea(p, &vig, budget, rng)
            }
        }
    }
}

/// Gray-box optimizer with a pyramid of hill climbers mixed by wPX.
pub fn run_gbophe<R: Rng + ?Sized>(
    p: &ProblemInstance,
    mixing: Mixing,
    budget: Budget,
    rng: &mut R,
) -> Result<RunResult> {
    let e = p
        .expansion_arc()
        .ok_or_else(|| GrayBoxError::MissingExpansion(p.name.clone()))?;
    let model = GrayBoxModel::new(e);
    let f = p.black_box();
    let mut ev = Evaluator::new(f.as_ref(), effective_budget(p, budget));
    let mut pyramid = Pyramid::new();
    let n = p.n();
    let mut order = Vec::new();
    while !ev.should_stop() {
        let x = ev.individual(BitVector::random(n, rng));
        let mut climber = fihc(&mut ev, x, rng).into_individual();
        pyramid.add(0, climber.clone());
        let mut level = 0;
        while level < pyramid.len() && !ev.should_stop() {
            let snapshot = climber.fitness;
            order.clear();
            order.extend(0..pyramid.level(level).len());
            order.shuffle(rng);
            for &d in &order {
                if ev.should_stop() {
                    break;
                }
                let donor = &pyramid.level(level)[d].genotype;
                let r = match mixing {
                    Mixing::Weighted(cfg) => wpx(&model, &mut ev, &climber, donor, cfg, rng),
                    Mixing::Px => px_mix(&model, &mut ev, &climber, donor, rng),
                };
                if r.improved {
                    climber = r.into_individual();
                }
            }
            if climber.fitness > snapshot {
                pyramid.add(level + 1, climber.clone());
            }
            level += 1;
        }
    }
    Ok(RunResult::from_evaluator(&ev))
}

fn static_forest(vig: &InteractionGraph) -> LinkageForest {
    let universe: Vec<usize> = (0..vig.n()).collect();
    build_forest(&vig.support(), &universe)
}

/// Gray-box P3: optimal mixing with a fixed forest of the true VIG.
pub fn run_p3<R: Rng + ?Sized>(
    p: &ProblemInstance,
    vig: &InteractionGraph,
    budget: Budget,
    rng: &mut R,
) -> Result<RunResult> {
    check_vig(p, vig)?;
    let forest = static_forest(vig);
    let f = p.black_box();
    let mut ev = Evaluator::new(f.as_ref(), effective_budget(p, budget));
    let mut pyramid = Pyramid::new();
    let mut donors: Vec<BitVector> = Vec::new();
    while !ev.should_stop() {
        let x = ev.individual(BitVector::random(p.n(), rng));
        let mut climber = fihc(&mut ev, x, rng).into_individual();
        if !pyramid.add(0, climber.clone()) {
            continue;
        }
        let mut level = 0;
        while level < pyramid.len() && !ev.should_stop() {
            let snapshot = climber.fitness;
            donors.clear();
            donors.extend(pyramid.level(level).iter().map(|i| i.genotype.clone()));
            let masks = masks_fos(&forest, rng);
            climber = om_step(&mut ev, climber, &masks, &donors, rng)?.into_individual();
            if climber.fitness > snapshot {
                pyramid.add(level + 1, climber.clone());
            }
            level += 1;
        }
    }
    Ok(RunResult::from_evaluator(&ev))
}

fn check_vig(p: &ProblemInstance, vig: &InteractionGraph) -> Result<()> {
    if vig.n() != p.n() {
        return Err(GrayBoxError::DimensionMismatch {
            expected: p.n(),
            found: vig.n(),
        });
    }
    Ok(())
}

struct Population {
    members: Vec<Individual>,
    alive: bool,
    generations: u64,
}

impl Population {
    fn best(&self) -> f64 {
        self.members.iter().map(|i| i.fitness).fold(f64::NEG_INFINITY, f64::max)
    }

    fn converged(&self) -> bool {
        self.members.windows(2).all(|w| w[0].genotype == w[1].genotype)
    }
}

const IMS_BASE_SIZE: usize = 2;
const IMS_SUBGENERATIONS: u64 = 4;
const IMS_MAX_POPULATIONS: usize = 40;

/// Gray-box LT-GOMEA with the interleaved multistart scheme.
pub fn run_ltgomea<R: Rng + ?Sized>(
    p: &ProblemInstance,
    vig: &InteractionGraph,
    budget: Budget,
    rng: &mut R,
) -> Result<RunResult> {
    check_vig(p, vig)?;
    let forest = static_forest(vig);
    let f = p.black_box();
    let mut ev = Evaluator::new(f.as_ref(), effective_budget(p, budget));
    let mut pops: Vec<Population> = Vec::new();
    while !ev.should_stop() {
        let start = pops.iter().position(|q| q.alive).unwrap_or(pops.len());
        if start >= IMS_MAX_POPULATIONS {
            break;
        }
        ims_step(start, &mut pops, &forest, &mut ev, p.n(), rng)?;
    }
    Ok(RunResult::from_evaluator(&ev))
}

fn ims_step<R: Rng + ?Sized>(
    i: usize,
    pops: &mut Vec<Population>,
    forest: &LinkageForest,
    ev: &mut Evaluator<'_>,
    n: usize,
    rng: &mut R,
) -> Result<()> {
    if ev.should_stop() || i >= IMS_MAX_POPULATIONS {
        return Ok(());
    }
    if i == pops.len() {
        let size = IMS_BASE_SIZE << i;
        let mut members = Vec::with_capacity(size);
        for _ in 0..size {
            if ev.should_stop() {
                break;
            }
            members.push(ev.individual(BitVector::random(n, rng)));
        }
        pops.push(Population {
            members,
            alive: true,
            generations: 0,
        });
        return Ok(());
    }
    if pops[i].alive {
        generation(&mut pops[i], forest, ev, rng)?;
        let best = pops[i].best();
        if pops[i].converged() || pops[i + 1..].iter().any(|q| q.alive && q.best() >= best) {
            pops[i].alive = false;
        }
    }
    pops[i].generations += 1;
    if pops[i].generations.is_multiple_of(IMS_SUBGENERATIONS) || !pops[i].alive {
        ims_step(i + 1, pops, forest, ev, n, rng)?;
    }
    Ok(())
}

fn generation<R: Rng + ?Sized>(
    pop: &mut Population,
    forest: &LinkageForest,
    ev: &mut Evaluator<'_>,
    rng: &mut R,
) -> Result<()> {
    let parents: Vec<BitVector> = pop.members.iter().map(|i| i.genotype.clone()).collect();
    for slot in pop.members.iter_mut() {
        if ev.should_stop() {
            break;
        }
        let masks = masks_fos(forest, rng);
        let current = slot.clone();
        *slot = om_step(ev, current, &masks, &parents, rng)?.into_individual();
    }
    Ok(())
}
