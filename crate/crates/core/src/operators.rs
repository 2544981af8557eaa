//! Variation operators: first-improvement hill climbing, partition
//! crossover masks, weighted partition crossover (wPX) and optimal mixing.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bits::BitVector;
use crate::error::{GrayBoxError, Result};
use crate::evaluation::{Evaluator, Individual};
use crate::linkage::{build_forest_dense, masks_lbot, masks_lttop};
use crate::structure::{static_vig, ws_vig, InteractionGraph, InteractionTerms};
use crate::walsh::WalshExpansion;

#[derive(Clone, Debug, PartialEq)]
pub struct MixResult {
    pub genotype: BitVector,
    pub fitness: f64,
    pub improved: bool,
    pub evaluations_used: u64,
}

impl MixResult {
    pub fn into_individual(self) -> Individual {
        Individual {
            genotype: self.genotype,
            fitness: self.fitness,
        }
    }
}

/// Flips bits in a fresh random order each pass, keeping strict
/// improvements, until a whole pass changes nothing. The stop condition is
/// checked between passes only.
pub fn fihc<R: Rng + ?Sized>(ev: &mut Evaluator<'_>, start: Individual, rng: &mut R) -> MixResult {
    let before = ev.ffe();
    let initial = start.fitness;
    let Individual {
        mut genotype,
        mut fitness,
    } = start;
    let mut order: Vec<usize> = (0..genotype.len()).collect();
    loop {
        if ev.should_stop() {
            break;
        }
        order.shuffle(rng);
        let mut changed = false;
        for &i in &order {
            genotype.flip(i);
            let v = ev.evaluate(&genotype);
            if v > fitness {
                fitness = v;
                changed = true;
            } else {
                genotype.flip(i);
            }
        }
        if !changed {
            break;
        }
    }
    MixResult {
        genotype,
        fitness,
        improved: fitness > initial,
        evaluations_used: ev.ffe() - before,
    }
}

/// Neighbour lists of a boolean interaction graph.
#[derive(Clone, Debug)]
pub struct Adjacency {
    lists: Vec<Vec<usize>>,
}

impl Adjacency {
    pub fn new(g: &InteractionGraph) -> Self {
        Self {
            lists: (0..g.n()).map(|v| g.neighbours(v).collect()).collect(),
        }
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.lists[v]
    }
}

/// Partition crossover masks: connected components of the graph restricted
/// to the positions where the parents differ. Sorted by smallest member.
pub fn px_masks(vig: &InteractionGraph, x_a: &BitVector, x_b: &BitVector) -> Result<Vec<Vec<usize>>> {
    if x_a.len() != vig.n() || x_b.len() != vig.n() {
        return Err(GrayBoxError::DimensionMismatch {
            expected: vig.n(),
            found: if x_a.len() != vig.n() { x_a.len() } else { x_b.len() },
        });
    }
    Ok(px_masks_with(&Adjacency::new(vig), x_a, x_b))
}

pub fn px_masks_with(adj: &Adjacency, x_a: &BitVector, x_b: &BitVector) -> Vec<Vec<usize>> {
    let diff = x_a.xor(x_b);
    let mut visited = BitVector::zeros(diff.len());
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in diff.ones_indices() {
        if visited.get(start) {
            continue;
        }
        visited.set(start, true);
        stack.push(start);
        let mut component = Vec::new();
        while let Some(v) = stack.pop() {
            component.push(v);
            for &u in adj.neighbours(v) {
                if diff.get(u) && !visited.get(u) {
                    visited.set(u, true);
                    stack.push(u);
                }
            }
        }
        component.sort_unstable();
        out.push(component);
    }
    out
}

/// Weighted interaction graph variants usable by wPX.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VigKind {
    /// Dynamic, `|w|` spread over the differing pairs a mask covers.
    WdVig,
    /// Dynamic, full `|w|` on every differing pair.
    WdVigNs,
    /// Static, `|w|` spread over all pairs of the mask.
    WsVig,
    /// Static, full `|w|` on every pair.
    WsVigNs,
}

impl VigKind {
    pub fn is_dynamic(self) -> bool {
        matches!(self, Self::WdVig | Self::WdVigNs)
    }

    pub fn size_weighted(self) -> bool {
        matches!(self, Self::WdVig | Self::WsVig)
    }
}

impl fmt::Display for VigKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::WdVig => "wdvig",
            Self::WdVigNs => "wdvigns",
            Self::WsVig => "wsvig",
            Self::WsVigNs => "wsvigns",
        })
    }
}

impl FromStr for VigKind {
    type Err = GrayBoxError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wdvig" => Ok(Self::WdVig),
            "wdvigns" => Ok(Self::WdVigNs),
            "wsvig" => Ok(Self::WsVig),
            "wsvigns" => Ok(Self::WsVigNs),
            _ => Err(GrayBoxError::Parse(format!("unknown weighted VIG kind `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MaskStrategy {
    LtTop,
    LBot,
}

impl fmt::Display for MaskStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LtTop => "lttop",
            Self::LBot => "lbot",
        })
    }
}

impl FromStr for MaskStrategy {
    type Err = GrayBoxError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lttop" | "ltop" | "top" => Ok(Self::LtTop),
            "lbot" | "bottom" | "bot" => Ok(Self::LBot),
            _ => Err(GrayBoxError::Parse(format!("unknown mask strategy `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WpxConfig {
    pub vig_kind: VigKind,
    pub strategy: MaskStrategy,
}

impl Default for WpxConfig {
    fn default() -> Self {
        Self {
            vig_kind: VigKind::WdVig,
            strategy: MaskStrategy::LtTop,
        }
    }
}

/// Structure derived once from an expansion and shared by every wPX or
/// PX call on it. Static weighted graphs are built on first use.
pub struct GrayBoxModel {
    expansion: Arc<WalshExpansion>,
    terms: InteractionTerms,
    ws: OnceLock<InteractionGraph>,
    ws_ns: OnceLock<InteractionGraph>,
    adjacency: OnceLock<Adjacency>,
}

impl GrayBoxModel {
    pub fn new(expansion: Arc<WalshExpansion>) -> Self {
        Self {
            terms: InteractionTerms::new(&expansion),
            expansion,
            ws: OnceLock::new(),
            ws_ns: OnceLock::new(),
            adjacency: OnceLock::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.expansion.n()
    }

    pub fn expansion(&self) -> &WalshExpansion {
        &self.expansion
    }

    pub fn adjacency(&self) -> &Adjacency {
        self.adjacency
            .get_or_init(|| Adjacency::new(&static_vig(&self.expansion)))
    }

    fn static_weights(&self, size_weighted: bool) -> &InteractionGraph {
        if size_weighted {
            self.ws.get_or_init(|| ws_vig(&self.expansion, true))
        } else {
            self.ws_ns.get_or_init(|| ws_vig(&self.expansion, false))
        }
    }

    /// Dense weights over `positions` for the chosen graph kind.
    pub fn local_weights(&self, kind: VigKind, positions: &[usize]) -> Vec<f64> {
        let m = positions.len();
        if kind.is_dynamic() {
            let mut local = vec![usize::MAX; self.n()];
            for (i, &p) in positions.iter().enumerate() {
                local[p] = i;
            }
            self.terms.dynamic_local(positions, &local, kind.size_weighted())
        } else {
            let g = self.static_weights(kind.size_weighted());
            let mut out = vec![0.0; m * m];
            for a in 0..m {
                for b in 0..m {
                    out[a * m + b] = g.weight(positions[a], positions[b]);
                }
            }
            out
        }
    }

    /// Mixing masks wPX would try for this source/donor pair, in order.
    pub fn wpx_masks<R: Rng + ?Sized>(
        &self,
        source: &BitVector,
        donor: &BitVector,
        cfg: WpxConfig,
        rng: &mut R,
    ) -> Vec<Vec<usize>> {
        let positions = source.xor(donor).ones_indices();
        if positions.is_empty() {
            return Vec::new();
        }
        let weights = self.local_weights(cfg.vig_kind, &positions);
        let forest = build_forest_dense(&positions, weights);
        match cfg.strategy {
            MaskStrategy::LtTop => masks_lttop(&forest),
            MaskStrategy::LBot => masks_lbot(&forest, rng),
        }
    }
}

/// Tries `masks` in order, copying donor genes into a fresh copy of the
/// source; stops at the first strict improvement. Rejected trials never
/// carry over to the next mask.
fn first_improving_mask(
    ev: &mut Evaluator<'_>,
    source: &Individual,
    donor: &BitVector,
    masks: &[Vec<usize>],
) -> MixResult {
    let before = ev.ffe();
    let mut trial = source.genotype.clone();
    for mask in masks {
        if ev.should_stop() {
            break;
        }
        trial.copy_from(donor, mask);
        let v = ev.evaluate(&trial);
        if v > source.fitness {
            return MixResult {
                genotype: trial,
                fitness: v,
                improved: true,
                evaluations_used: ev.ffe() - before,
            };
        }
        trial.copy_from(&source.genotype, mask);
    }
    MixResult {
        genotype: source.genotype.clone(),
        fitness: source.fitness,
        improved: false,
        evaluations_used: ev.ffe() - before,
    }
}

/// Weighted partition crossover.
pub fn wpx<R: Rng + ?Sized>(
    model: &GrayBoxModel,
    ev: &mut Evaluator<'_>,
    source: &Individual,
    donor: &BitVector,
    cfg: WpxConfig,
    rng: &mut R,
) -> MixResult {
    let masks = model.wpx_masks(&source.genotype, donor, cfg, rng);
    first_improving_mask(ev, source, donor, &masks)
}

/// Standard PX used as a drop-in for wPX: components in random order,
/// strict-improvement acceptance.
pub fn px_mix<R: Rng + ?Sized>(
    model: &GrayBoxModel,
    ev: &mut Evaluator<'_>,
    source: &Individual,
    donor: &BitVector,
    rng: &mut R,
) -> MixResult {
    let mut masks = px_masks_with(model.adjacency(), &source.genotype, donor);
    masks.shuffle(rng);
    first_improving_mask(ev, source, donor, &masks)
}

/// Optimal mixing: every mask once, each with a uniformly drawn donor,
/// keeping changes that do not decrease fitness. Masks that would not
/// change the genotype cost no evaluation.
pub fn om_step<R: Rng + ?Sized>(
    ev: &mut Evaluator<'_>,
    source: Individual,
    masks: &[Vec<usize>],
    donors: &[BitVector],
    rng: &mut R,
) -> Result<MixResult> {
    if donors.is_empty() {
        return Err(GrayBoxError::InvalidArgument("optimal mixing needs a donor".into()));
    }
    let before = ev.ffe();
    let initial = source.fitness;
    let Individual {
        mut genotype,
        mut fitness,
    } = source;
    let mut backup = Vec::new();
    for mask in masks {
        if ev.should_stop() {
            break;
        }
        let donor = &donors[rng.gen_range(0..donors.len())];
        if mask.iter().all(|&i| genotype.get(i) == donor.get(i)) {
            continue;
        }
        backup.clear();
        backup.extend(mask.iter().map(|&i| genotype.get(i)));
        genotype.copy_from(donor, mask);
        let v = ev.evaluate(&genotype);
        if v >= fitness {
            fitness = v;
        } else {
            for (&i, &b) in mask.iter().zip(&backup) {
                genotype.set(i, b);
            }
        }
    }
    Ok(MixResult {
        genotype,
        fitness,
        improved: fitness > initial,
        evaluations_used: ev.ffe() - before,
    })
}
