//! Benchmark generators and noise models.
//!
//! Every instance carries a fast black-box evaluator and, where the
//! structure is known, the matching Walsh expansion for gray-box access.

use std::fmt;
use std::sync::Arc;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitVector;
use crate::error::{GrayBoxError, Result};
use crate::walsh::{self, AdditiveFunction, PseudoBoolean, Subfunction, WalshExpansion, WalshTerm};

/// Largest spin-glass size whose optima are enumerated.
pub const ISG_ENUMERATION_LIMIT: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrapKind {
    /// Fully deceptive trap: `k` at `u = k`, otherwise `k - 1 - u`.
    Deceptive,
    /// Symmetric bimodal trap with optima at `u ∈ {0, k}`.
    Bimodal,
}

impl TrapKind {
    pub fn value(self, k: usize, u: usize) -> f64 {
        match self {
            TrapKind::Deceptive => {
                if u == k {
                    k as f64
                } else {
                    (k - 1 - u) as f64
                }
            }
            TrapKind::Bimodal => {
                let half = (k / 2) as f64;
                if u == 0 || u == k {
                    half
                } else {
                    half - 1.0 - (u as f64 - half).abs()
                }
            }
        }
    }

    pub fn maximum(self, k: usize) -> f64 {
        match self {
            TrapKind::Deceptive => k as f64,
            TrapKind::Bimodal => (k / 2) as f64,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            TrapKind::Deceptive => "dec",
            TrapKind::Bimodal => "bim",
        }
    }
}

/// Active noise model of an instance.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseConfig {
    /// Each solution is offset once by `uniform(0, nVol)`.
    PerSolution { n_vol: f64, seed: u64 },
    /// `c` random size-2 Walsh terms per variable.
    WalshSize2 { coeffs_per_var: usize, seed: u64 },
}

struct Onemax {
    n: usize,
}

impl PseudoBoolean for Onemax {
    fn dimension(&self) -> usize {
        self.n
    }

    fn value(&self, x: &BitVector) -> f64 {
        x.count_ones() as f64
    }
}

struct TrapConcat {
    n: usize,
    blocks: Vec<Vec<usize>>,
    table: Vec<f64>,
}

impl PseudoBoolean for TrapConcat {
    fn dimension(&self) -> usize {
        self.n
    }

    fn value(&self, x: &BitVector) -> f64 {
        self.blocks
            .iter()
            .map(|b| self.table[b.iter().filter(|&&i| x.get(i)).count()])
            .sum()
    }
}

struct Tabulated {
    additive: AdditiveFunction,
}

impl PseudoBoolean for Tabulated {
    fn dimension(&self) -> usize {
        self.additive.n()
    }

    fn value(&self, x: &BitVector) -> f64 {
        self.additive.value(x)
    }
}

/// `Σ J_ij s_i s_j` with `s = 2x - 1`.
struct SpinGlass {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl PseudoBoolean for SpinGlass {
    fn dimension(&self) -> usize {
        self.n
    }

    fn value(&self, x: &BitVector) -> f64 {
        self.edges
            .iter()
            .map(|&(i, j, c)| if x.get(i) == x.get(j) { c } else { -c })
            .sum()
    }
}

struct WithWalshNoise {
    base: Arc<dyn PseudoBoolean>,
    noise: WalshExpansion,
}

impl PseudoBoolean for WithWalshNoise {
    fn dimension(&self) -> usize {
        self.base.dimension()
    }

    fn value(&self, x: &BitVector) -> f64 {
        self.base.value(x) + self.noise.evaluate_unchecked(x)
    }
}

struct WithSolutionNoise {
    base: Arc<dyn PseudoBoolean>,
    n_vol: f64,
    seed: u64,
}

impl PseudoBoolean for WithSolutionNoise {
    fn dimension(&self) -> usize {
        self.base.dimension()
    }

    fn value(&self, x: &BitVector) -> f64 {
        self.base.value(x) + solution_noise(self.seed, self.n_vol, x)
    }
}

/// Deterministic `uniform(0, nVol)` offset keyed on `(seed, x)`: the seed
/// selects the ChaCha key and the solution index selects the stream.
pub fn solution_noise(seed: u64, n_vol: f64, x: &BitVector) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(x.to_index());
    let u: f64 = rng.sample(Open01);
    u * n_vol
}

#[derive(Clone)]
pub struct ProblemInstance {
    pub name: String,
    n: usize,
    expansion: Option<Arc<WalshExpansion>>,
    black_box: Arc<dyn PseudoBoolean>,
    known_optimum: Option<f64>,
    optimum_set: Option<Vec<BitVector>>,
    fitness_gap: Option<f64>,
    success_threshold: Option<f64>,
    noise: Option<NoiseConfig>,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("terms", &self.expansion.as_ref().map(|e| e.len()))
            .field("known_optimum", &self.known_optimum)
            .field("noise", &self.noise)
            .finish()
    }
}

impl ProblemInstance {
    /// Wraps an arbitrary black box, e.g. an externally defined
    /// real-world objective. Gray-box operators need an expansion, which
    /// can be attached with [`ProblemInstance::with_expansion`].
    pub fn from_black_box(name: impl Into<String>, f: Arc<dyn PseudoBoolean>) -> Self {
        Self {
            name: name.into(),
            n: f.dimension(),
            expansion: None,
            black_box: f,
            known_optimum: None,
            optimum_set: None,
            fitness_gap: None,
            success_threshold: None,
            noise: None,
        }
    }

    /// An instance whose black box is the expansion itself.
    pub fn from_expansion(name: impl Into<String>, e: WalshExpansion) -> Self {
        let e = Arc::new(e);
        let mut p = Self::from_black_box(name, e.clone());
        p.expansion = Some(e);
        p
    }

    pub fn with_expansion(mut self, e: WalshExpansion) -> Result<Self> {
        if e.n() != self.n {
            return Err(GrayBoxError::DimensionMismatch {
                expected: self.n,
                found: e.n(),
            });
        }
        self.expansion = Some(Arc::new(e));
        Ok(self)
    }

    /// Declares the optimum value; success means reaching it.
    pub fn with_known_optimum(mut self, value: f64) -> Self {
        self.known_optimum = Some(value);
        self.success_threshold = Some(value - optimum_tolerance(value));
        self
    }

    /// Declares the minimum nonzero fitness gap `g_min`.
    pub fn with_fitness_gap(mut self, gap: f64) -> Self {
        self.fitness_gap = Some(gap);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn expansion(&self) -> Option<&WalshExpansion> {
        self.expansion.as_deref()
    }

    pub fn expansion_arc(&self) -> Option<Arc<WalshExpansion>> {
        self.expansion.clone()
    }

    pub fn black_box(&self) -> Arc<dyn PseudoBoolean> {
        self.black_box.clone()
    }

    pub fn known_optimum(&self) -> Option<f64> {
        self.known_optimum
    }

    pub fn optimum_set(&self) -> Option<&[BitVector]> {
        self.optimum_set.as_deref()
    }

    pub fn fitness_gap(&self) -> Option<f64> {
        self.fitness_gap
    }

    /// Fitness level at or above which a solution counts as optimal.
    ///
    /// For Walsh-noised instances this is the base optimum minus half the
    /// base fitness gap: the noise never moves a value by more than a
    /// quarter gap, so exactly the base-optimal solutions clear it.
    pub fn success_threshold(&self) -> Option<f64> {
        self.success_threshold
    }

    pub fn noise(&self) -> Option<&NoiseConfig> {
        self.noise.as_ref()
    }

    pub fn noise_c(&self) -> usize {
        match self.noise {
            Some(NoiseConfig::WalshSize2 { coeffs_per_var, .. }) => coeffs_per_var,
            _ => 0,
        }
    }

    pub fn is_optimal(&self, fitness: f64) -> bool {
        self.success_threshold.is_some_and(|t| fitness >= t)
    }
}

impl PseudoBoolean for ProblemInstance {
    fn dimension(&self) -> usize {
        self.n
    }

    fn value(&self, x: &BitVector) -> f64 {
        self.black_box.value(x)
    }
}

fn optimum_tolerance(value: f64) -> f64 {
    1e-9 * value.abs().max(1.0)
}

pub fn make_onemax(n: usize) -> Result<ProblemInstance> {
    if n == 0 {
        return Err(GrayBoxError::InvalidArgument("onemax needs n >= 1".into()));
    }
    let subs = (0..n)
        .map(|i| Subfunction::new(vec![i], vec![0.0, 1.0]))
        .collect::<Result<Vec<_>>>()?;
    let expansion = walsh::from_additive(&AdditiveFunction::new(n, 1, subs)?)?;
    let mut p = ProblemInstance::from_black_box(format!("onemax{n}"), Arc::new(Onemax { n }))
        .with_expansion(expansion)?
        .with_known_optimum(n as f64)
        .with_fitness_gap(1.0);
    p.optimum_set = Some(vec![BitVector::ones(n)]);
    Ok(p)
}

/// Variable blocks of a (possibly cyclic, overlapping) trap concatenation.
pub fn trap_blocks(k: usize, n: usize, overlap: usize) -> Result<Vec<Vec<usize>>> {
    if k == 0 || overlap >= k {
        return Err(GrayBoxError::InvalidArgument(format!(
            "overlap {overlap} must be smaller than block size {k}"
        )));
    }
    let step = k - overlap;
    if !n.is_multiple_of(step) || n < k {
        return Err(GrayBoxError::InvalidArgument(format!(
            "n={n} must be a multiple of {step} and at least k={k}"
        )));
    }
    Ok((0..n / step)
        .map(|j| (0..k).map(|i| (j * step + i) % n).collect())
        .collect())
}

pub fn make_trap_concat(kind: TrapKind, k: usize, n: usize, overlap: usize) -> Result<ProblemInstance> {
    match kind {
        TrapKind::Deceptive if k < 2 => {
            return Err(GrayBoxError::InvalidArgument("deceptive trap needs k >= 2".into()))
        }
        TrapKind::Bimodal if k < 2 || !k.is_multiple_of(2) => {
            return Err(GrayBoxError::InvalidArgument(
                "bimodal trap needs an even k >= 2".into(),
            ))
        }
        _ => {}
    }
    if k > walsh::MAX_SUBFUNCTION_ARITY {
        return Err(GrayBoxError::InvalidArgument(format!("block size {k} too large")));
    }
    let blocks = trap_blocks(k, n, overlap)?;
    let table: Vec<f64> = (0..=k).map(|u| kind.value(k, u)).collect();
    let subs = blocks
        .iter()
        .map(|b| {
            let local = (0..1usize << k).map(|j| table[j.count_ones() as usize]).collect();
            Subfunction::new(b.clone(), local)
        })
        .collect::<Result<Vec<_>>>()?;
    let expansion = walsh::from_additive(&AdditiveFunction::new(n, k, subs)?)?;
    let optimum = blocks.len() as f64 * kind.maximum(k);
    let name = if overlap == 0 {
        format!("{}{k}_n{n}", kind.tag())
    } else {
        format!("{}{k}o{overlap}_n{n}", kind.tag())
    };
    let mut p = ProblemInstance::from_black_box(name, Arc::new(TrapConcat { n, blocks, table }))
        .with_expansion(expansion)?
        .with_known_optimum(optimum)
        .with_fitness_gap(1.0);
    if kind == TrapKind::Deceptive {
        p.optimum_set = Some(vec![BitVector::ones(n)]);
    }
    Ok(p)
}

/// NK landscape with circular adjacent neighbourhoods: variable `i`
/// contributes a table over `{i, i+1, …, i+k} mod n`.
#[derive(Clone, Debug, PartialEq)]
pub struct NkTables {
    pub n: usize,
    pub k: usize,
    pub tables: Vec<Vec<f64>>,
}

impl NkTables {
    pub fn random(n: usize, k: usize, seed: u64) -> Result<Self> {
        Self::check(n, k)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tables = (0..n)
            .map(|_| (0..1usize << (k + 1)).map(|_| rng.gen::<f64>()).collect())
            .collect();
        Ok(Self { n, k, tables })
    }

    pub fn new(n: usize, k: usize, tables: Vec<Vec<f64>>) -> Result<Self> {
        Self::check(n, k)?;
        if tables.len() != n || tables.iter().any(|t| t.len() != 1usize << (k + 1)) {
            return Err(GrayBoxError::InvalidArgument(format!(
                "NK needs {n} tables of {} entries",
                1usize << (k + 1)
            )));
        }
        Ok(Self { n, k, tables })
    }

    fn check(n: usize, k: usize) -> Result<()> {
        if n <= k {
            return Err(GrayBoxError::InvalidArgument(format!("NK needs n > k (n={n}, k={k})")));
        }
        if k + 1 > 16 {
            return Err(GrayBoxError::InvalidArgument(format!(
                "NK neighbourhood k={k} too large"
            )));
        }
        Ok(())
    }

    fn additive(&self) -> Result<AdditiveFunction> {
        let subs = self
            .tables
            .iter()
            .enumerate()
            .map(|(i, t)| Subfunction::new((0..=self.k).map(|d| (i + d) % self.n).collect(), t.clone()))
            .collect::<Result<Vec<_>>>()?;
        AdditiveFunction::new(self.n, self.k + 1, subs)
    }

    /// Exact maximum by dynamic programming over sliding windows of `k`
    /// bits, after fixing the first `k` bits (which close the cycle).
    pub fn optimum(&self) -> f64 {
        let (n, k) = (self.n, self.k);
        let window = 1usize << k;
        let window_mask = window - 1;
        // table entry for variable j is indexed by bit d = x_{j+d}
        let mut best = f64::NEG_INFINITY;
        for head in 0..window {
            // state: bits x_{i-k+1..=i}, bit d of state = x_{i-k+1+d}
            let mut dp = vec![f64::NEG_INFINITY; window];
            dp[head] = 0.0;
            for i in k..n {
                let mut next = vec![f64::NEG_INFINITY; window];
                for (state, &acc) in dp.iter().enumerate() {
                    if acc == f64::NEG_INFINITY {
                        continue;
                    }
                    for bit in 0..2usize {
                        // subfunction j = i - k covers x_{i-k..=i}
                        let idx = state | (bit << k);
                        let v = acc + self.tables[i - k][idx];
                        let ns = (idx >> 1) & window_mask;
                        if v > next[ns] {
                            next[ns] = v;
                        }
                    }
                }
                dp = next;
            }
            for (state, &acc) in dp.iter().enumerate() {
                if acc == f64::NEG_INFINITY {
                    continue;
                }
                // state holds x_{n-k..n-1}; head holds x_0..x_{k-1}
                let mut total = acc;
                for j in n - k..n {
                    let mut idx = 0usize;
                    for d in 0..=k {
                        let pos = j + d;
                        let bit = if pos < n {
                            (state >> (pos - (n - k))) & 1
                        } else {
                            (head >> (pos - n)) & 1
                        };
                        idx |= bit << d;
                    }
                    total += self.tables[j][idx];
                }
                best = best.max(total);
            }
        }
        best
    }
}

pub fn make_nk(n: usize, k: usize, seed: u64) -> Result<ProblemInstance> {
    let tables = NkTables::random(n, k, seed)?;
    nk_instance(format!("nk{k}_n{n}_s{seed}"), &tables)
}

pub fn nk_instance(name: String, tables: &NkTables) -> Result<ProblemInstance> {
    let additive = tables.additive()?;
    let expansion = walsh::from_additive(&additive)?;
    Ok(ProblemInstance::from_black_box(name, Arc::new(Tabulated { additive }))
        .with_expansion(expansion)?
        .with_known_optimum(tables.optimum()))
}

/// `±1` couplings on an `L×L` torus, one right and one down edge per node.
pub fn spin_glass_couplings(side: usize, seed: u64) -> Vec<(usize, usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(2 * side * side);
    for r in 0..side {
        for c in 0..side {
            let v = r * side + c;
            let right = r * side + (c + 1) % side;
            let down = ((r + 1) % side) * side + c;
            for u in [right, down] {
                let j = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                edges.push((v, u, j));
            }
        }
    }
    edges
}

pub fn make_isg(side: usize, seed: u64) -> Result<ProblemInstance> {
    let edges = spin_glass_couplings(side, seed);
    isg_instance(format!("isg_L{side}_s{seed}"), side, edges)
}

pub fn isg_instance(name: String, side: usize, edges: Vec<(usize, usize, f64)>) -> Result<ProblemInstance> {
    if side < 2 {
        return Err(GrayBoxError::InvalidArgument("spin glass needs L >= 2".into()));
    }
    let n = side * side;
    let terms: Vec<WalshTerm> = edges
        .iter()
        .map(|&(i, j, c)| WalshTerm {
            mask: BitVector::from_indices(n, &[i, j]),
            coefficient: c,
        })
        .collect();
    let expansion = WalshExpansion::from_terms(n, terms)?;
    let integral = edges.iter().all(|e| e.2.abs() == 1.0);
    let glass = SpinGlass { n, edges };
    let optima = (n <= ISG_ENUMERATION_LIMIT).then(|| spin_glass_optima(&glass));
    let mut p = ProblemInstance::from_black_box(name, Arc::new(glass)).with_expansion(expansion)?;
    if integral {
        // one flip changes four ±1 products by ±2 each
        p = p.with_fitness_gap(4.0);
    }
    if let Some((best, set)) = optima {
        p = p.with_known_optimum(best);
        p.optimum_set = Some(set);
    }
    Ok(p)
}

/// Gray-code enumeration with O(degree) updates per step.
fn spin_glass_optima(g: &SpinGlass) -> (f64, Vec<BitVector>) {
    let n = g.n;
    let mut incident: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(i, j, c) in &g.edges {
        incident[i].push((j, c));
        incident[j].push((i, c));
    }
    let mut x = BitVector::zeros(n);
    let mut value = g.value(&x);
    let mut best = value;
    let mut set = vec![0u64];
    for step in 1u64..1u64 << n {
        let bit = step.trailing_zeros() as usize;
        let before = x.get(bit);
        let mut delta = 0.0;
        for &(u, c) in &incident[bit] {
            if u == bit {
                continue;
            }
            let equal_before = before == x.get(u);
            delta += if equal_before { -2.0 * c } else { 2.0 * c };
        }
        x.flip(bit);
        value += delta;
        let index = x.to_index();
        if value > best {
            best = value;
            set.clear();
            set.push(index);
        } else if value == best {
            set.push(index);
        }
    }
    set.sort_unstable();
    (best, set.into_iter().map(|i| BitVector::from_index(n, i)).collect())
}

/// Adds static per-solution noise `uniform(0, nVol)` and recomputes the
/// full expansion by enumeration.
pub fn add_solution_noise(p: &ProblemInstance, n_vol: f64, seed: u64) -> Result<ProblemInstance> {
    walsh::check_toy(p.n)?;
    if !(n_vol >= 0.0) {
        return Err(GrayBoxError::InvalidArgument(format!(
            "nVol must be non-negative, got {n_vol}"
        )));
    }
    let noised: Arc<dyn PseudoBoolean> = Arc::new(WithSolutionNoise {
        base: p.black_box.clone(),
        n_vol,
        seed,
    });
    let expansion = walsh::wht_full(&noised)?;
    let table = expansion.value_table()?;
    let optima: Vec<BitVector> = walsh::argmax_indices(&table)
        .into_iter()
        .map(|i| BitVector::from_index(p.n, i as u64))
        .collect();
    let best = optima.first().map(|x| noised.value(x));
    let mut out = ProblemInstance::from_black_box(format!("{}+snoise({n_vol},{seed})", p.name), noised)
        .with_expansion(expansion)?;
    if let Some(best) = best {
        out = out.with_known_optimum(best);
    }
    out.optimum_set = Some(optima);
    out.noise = Some(NoiseConfig::PerSolution { n_vol, seed });
    Ok(out)
}

/// The random size-2 terms of the Walsh noise model, `c` per variable,
/// each with magnitude in `[ε/2, ε)` where `ε = g_min / (4·n·c)`.
pub fn walsh_noise_terms(n: usize, c: usize, fitness_gap: f64, seed: u64) -> Result<WalshExpansion> {
    if c == 0 {
        return Ok(WalshExpansion::empty(n));
    }
    if n < 2 {
        return Err(GrayBoxError::InvalidArgument("Walsh noise needs n >= 2".into()));
    }
    if !(fitness_gap > 0.0) {
        return Err(GrayBoxError::InvalidArgument(format!(
            "fitness gap must be positive, got {fitness_gap}"
        )));
    }
    let epsilon = fitness_gap / (4.0 * n as f64 * c as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::with_capacity(n * c);
    for v in 0..n {
        for _ in 0..c {
            let mut u = rng.gen_range(0..n - 1);
            if u >= v {
                u += 1;
            }
            let magnitude = rng.gen_range(epsilon / 2.0..epsilon);
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            terms.push(WalshTerm {
                mask: BitVector::from_indices(n, &[v, u]),
                coefficient: sign * magnitude,
            });
        }
    }
    WalshExpansion::from_terms(n, terms)
}

/// Adds the Walsh noise model to an instance, preserving every strict
/// order between base fitness values.
pub fn add_walsh_noise(p: &ProblemInstance, c: usize, seed: u64) -> Result<ProblemInstance> {
    add_walsh_noise_with_gap(p, c, seed, None)
}

pub fn add_walsh_noise_with_gap(p: &ProblemInstance, c: usize, seed: u64, gap: Option<f64>) -> Result<ProblemInstance> {
    let base_expansion = p
        .expansion()
        .ok_or_else(|| GrayBoxError::MissingExpansion(p.name.clone()))?;
    if c == 0 {
        return Ok(p.clone());
    }
    let gap = gap.or(p.fitness_gap).ok_or(GrayBoxError::UnknownFitnessGap)?;
    let noise = walsh_noise_terms(p.n, c, gap, seed)?;
    let expansion = base_expansion.merge(&noise)?;
    let mut out = ProblemInstance::from_black_box(
        format!("{}+noise({c},{seed})", p.name),
        Arc::new(WithWalshNoise {
            base: p.black_box.clone(),
            noise,
        }),
    )
    .with_expansion(expansion)?;
    out.fitness_gap = Some(gap / 2.0);
    if let Some(opt) = p.known_optimum {
        out.success_threshold = Some(opt - gap / 2.0);
    }
    out.noise = Some(NoiseConfig::WalshSize2 {
        coeffs_per_var: c,
        seed,
    });
    Ok(out)
}
