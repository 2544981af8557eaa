//! Variable interaction graphs.
//!
//! Static graphs come straight from the Walsh masks; the weighted variants
//! spread `|w|` over the variable pairs a mask covers, either over the
//! whole mask (static) or only over the genes two mixed solutions differ
//! in (dynamic). Check-based graphs are built from four-point dependency
//! tests on a black box.

use std::fmt::Write as _;

use crate::bits::BitVector;
use crate::error::{GrayBoxError, Result};
use crate::walsh::{self, PseudoBoolean, WalshExpansion};

/// Equality tolerance of every dependency-check comparison.
pub const DEPENDENCY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    Boolean,
    Weighted,
}

/// Symmetric `n × n` non-negative weights; the diagonal is ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionGraph {
    n: usize,
    kind: GraphKind,
    weights: Vec<f64>,
}

impl InteractionGraph {
    pub fn new(n: usize, kind: GraphKind) -> Self {
        Self {
            n,
            kind,
            weights: vec![0.0; n * n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n, GraphKind::Boolean);
        for a in 0..n {
            for b in a + 1..n {
                g.set(a, b, 1.0);
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    #[inline]
    pub fn weight(&self, g: usize, h: usize) -> f64 {
        if g == h {
            0.0
        } else {
            self.weights[g * self.n + h]
        }
    }

    #[inline]
    pub fn has_edge(&self, g: usize, h: usize) -> bool {
        self.weight(g, h) > 0.0
    }

    pub fn set(&mut self, g: usize, h: usize, w: f64) {
        assert!(w >= 0.0, "interaction weights are non-negative");
        if g == h {
            return;
        }
        self.weights[g * self.n + h] = w;
        self.weights[h * self.n + g] = w;
    }

    pub fn add(&mut self, g: usize, h: usize, w: f64) {
        if g == h {
            return;
        }
        self.weights[g * self.n + h] += w;
        self.weights[h * self.n + g] += w;
    }

    /// Nonzero pairs `(g, h, w)` with `g < h`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for g in 0..self.n {
            for h in g + 1..self.n {
                let w = self.weights[g * self.n + h];
                if w > 0.0 {
                    out.push((g, h, w));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn neighbours(&self, g: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&h| h != g && self.weights[g * self.n + h] > 0.0)
    }

    /// Fraction of the `n(n-1)/2` pairs that carry an edge.
    pub fn epistasis(&self) -> f64 {
        let pairs = self.n * self.n.saturating_sub(1) / 2;
        if pairs == 0 {
            0.0
        } else {
            self.edge_count() as f64 / pairs as f64
        }
    }

    /// Boolean support of the weights.
    pub fn support(&self) -> InteractionGraph {
        let mut out = InteractionGraph::new(self.n, GraphKind::Boolean);
        for (g, h, _) in self.edges() {
            out.set(g, h, 1.0);
        }
        out
    }

    pub fn dump(&self) -> String {
        let kind = match self.kind {
            GraphKind::Boolean => "boolean",
            GraphKind::Weighted => "weighted",
        };
        let mut out = format!("n={} kind={kind}\n", self.n);
        for (g, h, w) in self.edges() {
            let _ = writeln!(out, "{} {} {w}", g + 1, h + 1);
        }
        out
    }
}

/// Entry `(g, h)` set means "x_g depends on x_h".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedDependencyGraph {
    n: usize,
    adjacency: Vec<bool>,
}

impl DirectedDependencyGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            adjacency: vec![false; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depends(&self, g: usize, h: usize) -> bool {
        self.adjacency[g * self.n + h]
    }

    pub fn set(&mut self, g: usize, h: usize, value: bool) {
        if g != h {
            self.adjacency[g * self.n + h] = value;
        }
    }

    pub fn arc_count(&self) -> usize {
        self.adjacency.iter().filter(|&&b| b).count()
    }

    /// Fraction of the `n(n-1)` ordered pairs that carry an arc.
    pub fn epistasis(&self) -> f64 {
        let pairs = self.n * self.n.saturating_sub(1);
        if pairs == 0 {
            0.0
        } else {
            self.arc_count() as f64 / pairs as f64
        }
    }

    /// Edge wherever at least one direction is present.
    pub fn symmetrize_or(&self) -> InteractionGraph {
        self.symmetrize(|a, b| a || b)
    }

    /// Edge only where both directions are present.
    pub fn symmetrize_and(&self) -> InteractionGraph {
        self.symmetrize(|a, b| a && b)
    }

    fn symmetrize(&self, join: impl Fn(bool, bool) -> bool) -> InteractionGraph {
        let mut out = InteractionGraph::new(self.n, GraphKind::Boolean);
        for g in 0..self.n {
            for h in g + 1..self.n {
                if join(self.depends(g, h), self.depends(h, g)) {
                    out.set(g, h, 1.0);
                }
            }
        }
        out
    }

    pub fn dump(&self) -> String {
        let mut out = format!("n={} kind=directed\n", self.n);
        for g in 0..self.n {
            for h in 0..self.n {
                if self.depends(g, h) {
                    let _ = writeln!(out, "{} {} 1", g + 1, h + 1);
                }
            }
        }
        out
    }
}

/// Edge iff some nonzero term's mask covers both variables.
pub fn static_vig(e: &WalshExpansion) -> InteractionGraph {
    let mut g = InteractionGraph::new(e.n(), GraphKind::Boolean);
    for t in e.terms() {
        let idx = t.mask.ones_indices();
        for (a, &u) in idx.iter().enumerate() {
            for &v in &idx[a + 1..] {
                g.set(u, v, 1.0);
            }
        }
    }
    g
}

/// Static weighted graph. With `size_weighted` each `|w|` is spread evenly
/// over the `C(size, 2)` pairs of its mask, otherwise every pair gets the
/// full `|w|`.
pub fn ws_vig(e: &WalshExpansion, size_weighted: bool) -> InteractionGraph {
    let mut g = InteractionGraph::new(e.n(), GraphKind::Weighted);
    for t in e.terms() {
        let idx = t.mask.ones_indices();
        let size = idx.len();
        if size < 2 {
            continue;
        }
        let w = pair_share(t.coefficient.abs(), size, size_weighted);
        for (a, &u) in idx.iter().enumerate() {
            for &v in &idx[a + 1..] {
                g.add(u, v, w);
            }
        }
    }
    g
}

/// Dynamic weighted graph for a pair of solutions. Only genes where the
/// solutions differ take part; a mask covering `d ≥ 2` of them spreads
/// `|w|` over `C(d, 2)` pairs when `size_weighted`.
pub fn wd_vig(e: &WalshExpansion, x_a: &BitVector, x_b: &BitVector, size_weighted: bool) -> Result<InteractionGraph> {
    for x in [x_a, x_b] {
        if x.len() != e.n() {
            return Err(GrayBoxError::DimensionMismatch {
                expected: e.n(),
                found: x.len(),
            });
        }
    }
    let diff = x_a.xor(x_b);
    let mut g = InteractionGraph::new(e.n(), GraphKind::Weighted);
    for t in e.terms() {
        let d = t.mask.and_count(&diff);
        if d < 2 {
            continue;
        }
        let covered: Vec<usize> = t.mask.ones_indices().into_iter().filter(|&i| diff.get(i)).collect();
        let w = pair_share(t.coefficient.abs(), d, size_weighted);
        for (a, &u) in covered.iter().enumerate() {
            for &v in &covered[a + 1..] {
                g.add(u, v, w);
            }
        }
    }
    Ok(g)
}

#[inline]
fn pair_share(abs_w: f64, size: usize, size_weighted: bool) -> f64 {
    if size_weighted {
        abs_w * 2.0 / (size * (size - 1)) as f64
    } else {
        abs_w
    }
}

/// Compact view of the interacting (order ≥ 2) terms of an expansion,
/// used to build dynamic graphs restricted to a set of differing genes.
#[derive(Clone, Debug)]
pub struct InteractionTerms {
    n: usize,
    terms: Vec<(Vec<u32>, f64)>,
    by_variable: Vec<Vec<u32>>,
}

impl InteractionTerms {
    pub fn new(e: &WalshExpansion) -> Self {
        let mut terms = Vec::new();
        let mut by_variable = vec![Vec::new(); e.n()];
        for t in e.terms() {
            let idx: Vec<u32> = t.mask.ones_indices().into_iter().map(|i| i as u32).collect();
            if idx.len() < 2 {
                continue;
            }
            let id = terms.len() as u32;
            for &v in &idx {
                by_variable[v as usize].push(id);
            }
            terms.push((idx, t.coefficient.abs()));
        }
        Self {
            n: e.n(),
            terms,
            by_variable,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dynamic weights over `positions` as a dense `m × m` matrix, where
    /// `local[v]` is the row of variable `v` (or `usize::MAX` outside).
    pub fn dynamic_local(&self, positions: &[usize], local: &[usize], size_weighted: bool) -> Vec<f64> {
        let m = positions.len();
        let mut out = vec![0.0; m * m];
        let mut seen = vec![false; self.terms.len()];
        let mut covered: Vec<usize> = Vec::new();
        for &p in positions {
            for &id in &self.by_variable[p] {
                let id = id as usize;
                if seen[id] {
                    continue;
                }
                seen[id] = true;
                let (idx, abs_w) = &self.terms[id];
                covered.clear();
                covered.extend(idx.iter().map(|&v| local[v as usize]).filter(|&l| l != usize::MAX));
                let d = covered.len();
                if d < 2 {
                    continue;
                }
                let w = pair_share(*abs_w, d, size_weighted);
                for a in 0..d {
                    for b in a + 1..d {
                        let (u, v) = (covered[a], covered[b]);
                        out[u * m + v] += w;
                        out[v * m + u] += w;
                    }
                }
            }
        }
        out
    }
}

#[inline]
fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= DEPENDENCY_TOLERANCE
}

#[inline]
fn less(a: f64, b: f64) -> bool {
    a < b - DEPENDENCY_TOLERANCE
}

#[inline]
fn greater(a: f64, b: f64) -> bool {
    a > b + DEPENDENCY_TOLERANCE
}

/// Four function values around a context: `f(x)`, `f(x^g)`, `f(x^h)`,
/// `f(x^{g,h})`.
#[derive(Clone, Copy, Debug)]
pub struct FourPoint {
    pub base: f64,
    pub flip_g: f64,
    pub flip_h: f64,
    pub flip_both: f64,
}

impl FourPoint {
    pub fn sample<F: PseudoBoolean + ?Sized>(f: &F, x: &BitVector, g: usize, h: usize) -> Self {
        let mut y = x.clone();
        let base = f.value(&y);
        y.flip(g);
        let flip_g = f.value(&y);
        y.flip(h);
        let flip_both = f.value(&y);
        y.flip(g);
        let flip_h = f.value(&y);
        Self {
            base,
            flip_g,
            flip_h,
            flip_both,
        }
    }

    pub fn nonlinear(&self) -> bool {
        !approx_eq(self.base + self.flip_both, self.flip_g + self.flip_h)
    }

    /// `(C1 ∨ C2 ∨ C3, C4 ∨ C5 ∨ C6)`: whether `x_g` depends on `x_h` and
    /// whether `x_h` depends on `x_g`.
    pub fn directional(&self) -> (bool, bool) {
        let Self {
            base: f,
            flip_g: fg,
            flip_h: fh,
            flip_both: fgh,
        } = *self;
        let c1 = less(f, fg) && !less(fh, fgh);
        let c2 = approx_eq(f, fg) && !approx_eq(fh, fgh);
        let c3 = greater(f, fg) && !greater(fh, fgh);
        let c4 = less(f, fh) && !less(fg, fgh);
        let c5 = approx_eq(f, fh) && !approx_eq(fg, fgh);
        let c6 = greater(f, fh) && !greater(fg, fgh);
        (c1 || c2 || c3, c4 || c5 || c6)
    }

    pub fn nonmonotone(&self) -> bool {
        let (a, b) = self.directional();
        a || b
    }
}

fn check_pair(g: usize, h: usize) -> Result<()> {
    if g == h {
        Err(GrayBoxError::InvalidArgument(
            "dependency checks need two distinct genes".into(),
        ))
    } else {
        Ok(())
    }
}

pub fn check_nonlinearity<F: PseudoBoolean + ?Sized>(f: &F, x: &BitVector, g: usize, h: usize) -> Result<bool> {
    check_pair(g, h)?;
    Ok(FourPoint::sample(f, x, g, h).nonlinear())
}

pub fn check_nonmonotonicity<F: PseudoBoolean + ?Sized>(f: &F, x: &BitVector, g: usize, h: usize) -> Result<bool> {
    check_pair(g, h)?;
    Ok(FourPoint::sample(f, x, g, h).nonmonotone())
}

pub fn check_2dled<F: PseudoBoolean + ?Sized>(f: &F, x: &BitVector, g: usize, h: usize) -> Result<(bool, bool)> {
    check_pair(g, h)?;
    Ok(FourPoint::sample(f, x, g, h).directional())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DependencyCheck {
    Nonlinear,
    Nonmonotone,
    Dled2,
}

impl DependencyCheck {
    pub const ALL: [DependencyCheck; 3] = [Self::Nonlinear, Self::Nonmonotone, Self::Dled2];

    pub fn name(self) -> &'static str {
        match self {
            Self::Nonlinear => "nonlinear",
            Self::Nonmonotone => "nonmonotone",
            Self::Dled2 => "2dled",
        }
    }
}

impl std::str::FromStr for DependencyCheck {
    type Err = GrayBoxError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonlinear" | "nonlinearity" => Ok(Self::Nonlinear),
            "nonmonotone" | "nonmonotonicity" | "dled" => Ok(Self::Nonmonotone),
            "2dled" | "dled2" => Ok(Self::Dled2),
            other => Err(GrayBoxError::Parse(format!("unknown dependency check `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DependencyGraph {
    Symmetric(InteractionGraph),
    Directed(DirectedDependencyGraph),
}

impl DependencyGraph {
    pub fn epistasis(&self) -> f64 {
        match self {
            Self::Symmetric(g) => g.epistasis(),
            Self::Directed(d) => d.epistasis(),
        }
    }

    /// Undirected view used for clique statistics; directed graphs keep
    /// only mutual dependencies.
    pub fn undirected(&self) -> InteractionGraph {
        match self {
            Self::Symmetric(g) => g.clone(),
            Self::Directed(d) => d.symmetrize_and(),
        }
    }
}

/// Runs `check` on every pair in every one of the `2^(n-2)` contexts of a
/// full value table (indexed by [`BitVector::to_index`]). A pair is marked
/// at the first context where the check fires.
pub fn dependency_graph_from_table(table: &[f64], n: usize, check: DependencyCheck) -> DependencyGraph {
    assert_eq!(table.len(), 1usize << n, "value table must cover all inputs");
    let four = |ctx: usize, g: usize, h: usize| FourPoint {
        base: table[ctx],
        flip_g: table[ctx | 1 << g],
        flip_h: table[ctx | 1 << h],
        flip_both: table[ctx | 1 << g | 1 << h],
    };
    let contexts = |g: usize, h: usize| (0..table.len()).filter(move |c| c & (1 << g | 1 << h) == 0);
    match check {
        DependencyCheck::Nonlinear | DependencyCheck::Nonmonotone => {
            let mut out = InteractionGraph::new(n, GraphKind::Boolean);
            for g in 0..n {
                for h in g + 1..n {
                    let fires = contexts(g, h).any(|c| {
                        let p = four(c, g, h);
                        if check == DependencyCheck::Nonlinear {
                            p.nonlinear()
                        } else {
                            p.nonmonotone()
                        }
                    });
                    if fires {
                        out.set(g, h, 1.0);
                    }
                }
            }
            DependencyGraph::Symmetric(out)
        }
        DependencyCheck::Dled2 => {
            let mut out = DirectedDependencyGraph::new(n);
            for g in 0..n {
                for h in g + 1..n {
                    let (mut g_on_h, mut h_on_g) = (false, false);
                    for c in contexts(g, h) {
                        let (a, b) = four(c, g, h).directional();
                        g_on_h |= a;
                        h_on_g |= b;
                        if g_on_h && h_on_g {
                            break;
                        }
                    }
                    out.set(g, h, g_on_h);
                    out.set(h, g, h_on_g);
                }
            }
            DependencyGraph::Directed(out)
        }
    }
}

/// Exhaustive check-based graph of a black box (toy sizes only).
pub fn exhaustive_dependency_vig<F: PseudoBoolean + ?Sized>(f: &F, check: DependencyCheck) -> Result<DependencyGraph> {
    let table = walsh::value_table(f)?;
    Ok(dependency_graph_from_table(&table, f.dimension(), check))
}

/// All maximal cliques of the boolean support, via Bron–Kerbosch with
/// pivoting. Each clique is sorted; the list is sorted lexicographically.
pub fn maximal_cliques(g: &InteractionGraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let adjacency: Vec<BitVector> = (0..n)
        .map(|v| BitVector::from_indices(n, &g.neighbours(v).collect::<Vec<_>>()))
        .collect();
    let mut out = Vec::new();
    let mut r = Vec::new();
    bron_kerbosch(&adjacency, &mut r, BitVector::ones(n), BitVector::zeros(n), &mut out);
    for c in out.iter_mut() {
        c.sort_unstable();
    }
    out.sort();
    out
}

fn intersect(a: &BitVector, b: &BitVector) -> BitVector {
    let idx: Vec<usize> = a.ones_indices().into_iter().filter(|&i| b.get(i)).collect();
    BitVector::from_indices(a.len(), &idx)
}

fn bron_kerbosch(
    adjacency: &[BitVector],
    r: &mut Vec<usize>,
    mut p: BitVector,
    mut x: BitVector,
    out: &mut Vec<Vec<usize>>,
) {
    if p.count_ones() == 0 {
        if x.count_ones() == 0 && !r.is_empty() {
            out.push(r.clone());
        }
        return;
    }
    // pivot maximizing |P ∩ N(u)| over u ∈ P ∪ X
    let candidates = p.ones_indices().into_iter().chain(x.ones_indices());
    let pivot = candidates
        .max_by_key(|&u| (p.and_count(&adjacency[u]), std::cmp::Reverse(u)))
        .expect("P is nonempty");
    let to_visit: Vec<usize> = p
        .ones_indices()
        .into_iter()
        .filter(|&v| !adjacency[pivot].get(v))
        .collect();
    for v in to_visit {
        r.push(v);
        bron_kerbosch(
            adjacency,
            r,
            intersect(&p, &adjacency[v]),
            intersect(&x, &adjacency[v]),
            out,
        );
        r.pop();
        p.set(v, false);
        x.set(v, true);
    }
}
