//! Sparse Walsh expansions of pseudo-boolean functions.
//!
//! A function over `{0,1}^n` is written as `f(x) = Σ w_m · (-1)^{|m ∩ x|}`
//! where each mask `m` is a set of variables. Masks are stored as packed
//! [`BitVector`]s of length `n`; only nonzero coefficients are kept.
//!
//! Text format, one term per line, 1-based variable indices:
//!
//! ```text
//! # comment
//! const:5e0
//! 1,3,7:-5e-1
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::bits::BitVector;
use crate::error::{GrayBoxError, Result};

/// Largest dimension accepted by operations that enumerate all `2^n` inputs.
pub const TOY_LIMIT: usize = 20;

/// Relative threshold below which transformed coefficients are dropped.
pub const PRUNE_RELATIVE: f64 = 1e-12;

/// Largest subfunction arity accepted by [`from_additive`].
pub const MAX_SUBFUNCTION_ARITY: usize = 20;

/// A function that can be evaluated on bit vectors of a fixed length.
pub trait PseudoBoolean: Send + Sync {
    fn dimension(&self) -> usize;
    fn value(&self, x: &BitVector) -> f64;
}

/// Adapts a closure into a [`PseudoBoolean`].
pub struct FnFunction<F> {
    n: usize,
    f: F,
}

impl<F> FnFunction<F>
where
    F: Fn(&BitVector) -> f64 + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F> PseudoBoolean for FnFunction<F>
where
    F: Fn(&BitVector) -> f64 + Send + Sync,
{
    fn dimension(&self) -> usize {
        self.n
    }

    fn value(&self, x: &BitVector) -> f64 {
        (self.f)(x)
    }
}

impl<T: PseudoBoolean + ?Sized> PseudoBoolean for &T {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn value(&self, x: &BitVector) -> f64 {
        (**self).value(x)
    }
}

impl<T: PseudoBoolean + ?Sized> PseudoBoolean for Box<T> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn value(&self, x: &BitVector) -> f64 {
        (**self).value(x)
    }
}

impl<T: PseudoBoolean + ?Sized> PseudoBoolean for std::sync::Arc<T> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn value(&self, x: &BitVector) -> f64 {
        (**self).value(x)
    }
}

/// `(-1)^(number of ones of x under mask)`. The empty mask gives `+1`.
pub fn sign(mask: &[usize], x: &BitVector) -> Result<i32> {
    let mut ones = 0usize;
    for &i in mask {
        if i >= x.len() {
            return Err(GrayBoxError::IndexOutOfRange { index: i, n: x.len() });
        }
        ones += x.get(i) as usize;
    }
    Ok(if ones.is_multiple_of(2) { 1 } else { -1 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalshTerm {
    pub mask: BitVector,
    pub coefficient: f64,
}

impl WalshTerm {
    pub fn order(&self) -> usize {
        self.mask.count_ones()
    }

    #[inline]
    pub fn sign(&self, x: &BitVector) -> f64 {
        if x.and_parity(&self.mask) {
            -1.0
        } else {
            1.0
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalshExpansion {
    n: usize,
    terms: Vec<WalshTerm>,
}

impl WalshExpansion {
    pub fn empty(n: usize) -> Self {
        Self { n, terms: Vec::new() }
    }

    /// Builds an expansion, summing coefficients of repeated masks and
    /// dropping exact zeros.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = WalshTerm>,
    {
        let mut merged: BTreeMap<BitVector, f64> = BTreeMap::new();
        for t in terms {
            if t.mask.len() != n {
                return Err(GrayBoxError::DimensionMismatch {
                    expected: n,
                    found: t.mask.len(),
                });
            }
            *merged.entry(t.mask).or_insert(0.0) += t.coefficient;
        }
        Ok(Self::from_map(n, merged))
    }

    /// Convenience constructor from `(variable indices, coefficient)` pairs.
    pub fn from_index_terms(n: usize, terms: &[(&[usize], f64)]) -> Result<Self> {
        let mut out = Vec::with_capacity(terms.len());
        for (idx, w) in terms {
            if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
                return Err(GrayBoxError::IndexOutOfRange { index: bad, n });
            }
            out.push(WalshTerm {
                mask: BitVector::from_indices(n, idx),
                coefficient: *w,
            });
        }
        Self::from_terms(n, out)
    }

    fn from_map(n: usize, merged: BTreeMap<BitVector, f64>) -> Self {
        let mut terms: Vec<WalshTerm> = merged
            .into_iter()
            .filter(|(_, w)| *w != 0.0)
            .map(|(mask, coefficient)| WalshTerm { mask, coefficient })
            .collect();
        sort_terms(&mut terms);
        Self { n, terms }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[WalshTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the given mask, zero when absent.
    pub fn coefficient(&self, indices: &[usize]) -> f64 {
        let mask = BitVector::from_indices(self.n, indices);
        self.terms
            .iter()
            .find(|t| t.mask == mask)
            .map_or(0.0, |t| t.coefficient)
    }

    pub fn evaluate(&self, x: &BitVector) -> Result<f64> {
        if x.len() != self.n {
            return Err(GrayBoxError::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(self.evaluate_unchecked(x))
    }

    #[inline]
    pub fn evaluate_unchecked(&self, x: &BitVector) -> f64 {
        self.terms.iter().map(|t| t.coefficient * t.sign(x)).sum()
    }

    /// Term-wise sum of two expansions over the same dimension.
    pub fn merge(&self, other: &WalshExpansion) -> Result<WalshExpansion> {
        if other.n != self.n {
            return Err(GrayBoxError::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Self::from_terms(self.n, self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn scaled(&self, factor: f64) -> WalshExpansion {
        let terms = self
            .terms
            .iter()
            .map(|t| WalshTerm {
                mask: t.mask.clone(),
                coefficient: t.coefficient * factor,
            })
            .filter(|t| t.coefficient != 0.0)
            .collect();
        Self { n: self.n, terms }
    }

    /// Drops terms below `PRUNE_RELATIVE · max(1, max|w|)`.
    pub fn pruned(mut self) -> WalshExpansion {
        let threshold = prune_threshold(self.terms.iter().map(|t| t.coefficient));
        self.terms.retain(|t| t.coefficient.abs() >= threshold);
        self
    }

    pub fn without_term(&self, index: usize) -> WalshExpansion {
        let mut terms = self.terms.clone();
        terms.remove(index);
        Self { n: self.n, terms }
    }

    /// Keeps only the terms selected by `keep`.
    pub fn filtered<F: Fn(&WalshTerm) -> bool>(&self, keep: F) -> WalshExpansion {
        Self {
            n: self.n,
            terms: self.terms.iter().filter(|t| keep(t)).cloned().collect(),
        }
    }

    /// Dense coefficient vector indexed by mask integer. Toy sizes only.
    pub fn dense_coefficients(&self) -> Result<Vec<f64>> {
        check_toy(self.n)?;
        let mut dense = vec![0.0; 1usize << self.n];
        for t in &self.terms {
            dense[t.mask.to_index() as usize] += t.coefficient;
        }
        Ok(dense)
    }

    /// Function values for all `2^n` inputs, indexed by
    /// [`BitVector::to_index`].
    pub fn value_table(&self) -> Result<Vec<f64>> {
        let mut table = self.dense_coefficients()?;
        fwht(&mut table);
        Ok(table)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            let idx = t.mask.ones_indices();
            if idx.is_empty() {
                out.push_str("const");
            } else {
                let joined: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
                out.push_str(&joined.join(","));
            }
            let _ = writeln!(out, ":{:e}", t.coefficient);
        }
        out
    }

    /// Parses the text format. `n` fixes the dimension; indices are 1-based.
    pub fn parse_text(n: usize, text: &str) -> Result<WalshExpansion> {
        let mut terms = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| GrayBoxError::Parse(format!("line {}: {msg}: {raw:?}", lineno + 1));
            let (lhs, rhs) = line.split_once(':').ok_or_else(|| err("missing ':'"))?;
            let coefficient: f64 = rhs
                .trim()
                .replace('\u{2212}', "-")
                .parse()
                .map_err(|_| err("bad coefficient"))?;
            let lhs = lhs.trim();
            let mut indices = Vec::new();
            if lhs != "const" {
                for tok in lhs.split(',') {
                    let i: usize = tok.trim().parse().map_err(|_| err("bad index"))?;
                    if i == 0 || i > n {
                        return Err(err("index out of range"));
                    }
                    indices.push(i - 1);
                }
            }
            terms.push(WalshTerm {
                mask: BitVector::from_indices(n, &indices),
                coefficient,
            });
        }
        Self::from_terms(n, terms)
    }

    /// Smallest dimension able to hold every index in a text document.
    pub fn infer_dimension(text: &str) -> Result<usize> {
        let mut n = 0usize;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((lhs, _)) = line.split_once(':') {
                if lhs.trim() == "const" {
                    continue;
                }
                for tok in lhs.split(',') {
                    let i: usize = tok
                        .trim()
                        .parse()
                        .map_err(|_| GrayBoxError::Parse(format!("bad index in {line:?}")))?;
                    n = n.max(i);
                }
            }
        }
        Ok(n)
    }
}

impl PseudoBoolean for WalshExpansion {
    fn dimension(&self) -> usize {
        self.n
    }

    fn value(&self, x: &BitVector) -> f64 {
        self.evaluate_unchecked(x)
    }
}

fn sort_terms(terms: &mut [WalshTerm]) {
    terms.sort_by_cached_key(|t| {
        let idx = t.mask.ones_indices();
        (idx.len(), idx)
    });
}

fn prune_threshold<I: Iterator<Item = f64>>(coefficients: I) -> f64 {
    let max = coefficients.fold(0.0f64, |m, w| m.max(w.abs()));
    PRUNE_RELATIVE * max.max(1.0)
}

pub(crate) fn check_toy(n: usize) -> Result<()> {
    if n > TOY_LIMIT {
        Err(GrayBoxError::ToyLimit { n, limit: TOY_LIMIT })
    } else {
        Ok(())
    }
}

/// In-place unnormalized fast Walsh-Hadamard transform. Applying it twice
/// multiplies the input by `len`.
pub fn fwht(data: &mut [f64]) {
    let len = data.len();
    assert!(len.is_power_of_two(), "fwht length must be a power of two");
    let mut half = 1;
    while half < len {
        for block in (0..len).step_by(half * 2) {
            for i in block..block + half {
                let a = data[i];
                let b = data[i + half];
                data[i] = a + b;
                data[i + half] = a - b;
            }
        }
        half *= 2;
    }
}

/// Values of `f` on all `2^n` inputs, indexed by [`BitVector::to_index`].
pub fn value_table<F: PseudoBoolean + ?Sized>(f: &F) -> Result<Vec<f64>> {
    let n = f.dimension();
    check_toy(n)?;
    Ok((0..1u64 << n).map(|i| f.value(&BitVector::from_index(n, i))).collect())
}

/// Expansion of a dense coefficient vector (indexed by mask integer), pruned.
pub fn expansion_from_dense(n: usize, dense: &[f64]) -> WalshExpansion {
    let threshold = prune_threshold(dense.iter().copied());
    let mut terms: Vec<WalshTerm> = dense
        .iter()
        .enumerate()
        .filter(|(_, w)| w.abs() >= threshold && **w != 0.0)
        .map(|(i, &w)| WalshTerm {
            mask: BitVector::from_index(n, i as u64),
            coefficient: w,
        })
        .collect();
    sort_terms(&mut terms);
    WalshExpansion { n, terms }
}

/// Complete Walsh transform of a black-box function by enumeration.
pub fn wht_full<F: PseudoBoolean + ?Sized>(f: &F) -> Result<WalshExpansion> {
    let n = f.dimension();
    let mut table = value_table(f)?;
    fwht(&mut table);
    let scale = 1.0 / (1u64 << n) as f64;
    for w in table.iter_mut() {
        *w *= scale;
    }
    Ok(expansion_from_dense(n, &table))
}

/// Inputs attaining the maximum of a value table, within a relative
/// tolerance of `1e-9 · max(1, |max|)`.
pub fn argmax_indices(values: &[f64]) -> Vec<usize> {
    extreme_indices(values, true)
}

pub fn argmin_indices(values: &[f64]) -> Vec<usize> {
    extreme_indices(values, false)
}

fn extreme_indices(values: &[f64], maximize: bool) -> Vec<usize> {
    let best = if maximize {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        values.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let tol = 1e-9 * best.abs().max(1.0);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| (v - best).abs() <= tol)
        .map(|(i, _)| i)
        .collect()
}

/// All maximizers of the expansion, enumerated over `2^n` inputs.
pub fn global_optima(e: &WalshExpansion) -> Result<Vec<BitVector>> {
    let table = e.value_table()?;
    Ok(argmax_indices(&table)
        .into_iter()
        .map(|i| BitVector::from_index(e.n, i as u64))
        .collect())
}

pub fn global_minima(e: &WalshExpansion) -> Result<Vec<BitVector>> {
    let table = e.value_table()?;
    Ok(argmin_indices(&table)
        .into_iter()
        .map(|i| BitVector::from_index(e.n, i as u64))
        .collect())
}

/// One subfunction of an additive form. Entry `j` of `table` is the value
/// when variable `vars[b]` equals bit `b` of `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Subfunction {
    pub vars: Vec<usize>,
    pub table: Vec<f64>,
}

impl Subfunction {
    pub fn new(vars: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        if vars.len() > MAX_SUBFUNCTION_ARITY {
            return Err(GrayBoxError::InvalidArgument(format!(
                "subfunction arity {} exceeds {MAX_SUBFUNCTION_ARITY}",
                vars.len()
            )));
        }
        if table.len() != 1usize << vars.len() {
            return Err(GrayBoxError::InvalidArgument(format!(
                "subfunction over {} variables needs {} table entries, got {}",
                vars.len(),
                1usize << vars.len(),
                table.len()
            )));
        }
        Ok(Self { vars, table })
    }

    #[inline]
    pub fn local_index(&self, x: &BitVector) -> usize {
        self.vars
            .iter()
            .enumerate()
            .fold(0usize, |acc, (b, &v)| acc | ((x.get(v) as usize) << b))
    }

    #[inline]
    pub fn value(&self, x: &BitVector) -> f64 {
        self.table[self.local_index(x)]
    }
}

/// `f(x) = Σ_s f_s(x_{I_s})` with every `|I_s| ≤ k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdditiveFunction {
    n: usize,
    k_bound: usize,
    subfunctions: Vec<Subfunction>,
}

impl AdditiveFunction {
    pub fn new(n: usize, k_bound: usize, subfunctions: Vec<Subfunction>) -> Result<Self> {
        for s in &subfunctions {
            if s.vars.len() > k_bound {
                return Err(GrayBoxError::InvalidArgument(format!(
                    "subfunction over {} variables exceeds k-bound {k_bound}",
                    s.vars.len()
                )));
            }
            if let Some(&bad) = s.vars.iter().find(|&&v| v >= n) {
                return Err(GrayBoxError::IndexOutOfRange { index: bad, n });
            }
            let mut sorted = s.vars.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != s.vars.len() {
                return Err(GrayBoxError::InvalidArgument(
                    "subfunction variables must be distinct".into(),
                ));
            }
        }
        Ok(Self {
            n,
            k_bound,
            subfunctions,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_bound(&self) -> usize {
        self.k_bound
    }

    pub fn subfunctions(&self) -> &[Subfunction] {
        &self.subfunctions
    }

    pub fn evaluate(&self, x: &BitVector) -> Result<f64> {
        if x.len() != self.n {
            return Err(GrayBoxError::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(self.value(x))
    }
}

impl PseudoBoolean for AdditiveFunction {
    fn dimension(&self) -> usize {
        self.n
    }

    fn value(&self, x: &BitVector) -> f64 {
        self.subfunctions.iter().map(|s| s.value(x)).sum()
    }
}

/// Walsh expansion of an additive function via one small transform per
/// subfunction.
pub fn from_additive(a: &AdditiveFunction) -> Result<WalshExpansion> {
    let n = a.n;
    let mut merged: BTreeMap<BitVector, f64> = BTreeMap::new();
    for s in &a.subfunctions {
        let arity = s.vars.len();
        if arity > MAX_SUBFUNCTION_ARITY {
            return Err(GrayBoxError::InvalidArgument(format!(
                "subfunction arity {arity} exceeds {MAX_SUBFUNCTION_ARITY}"
            )));
        }
        let mut local = s.table.clone();
        fwht(&mut local);
        let scale = 1.0 / local.len() as f64;
        for (local_mask, w) in local.into_iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let mut mask = BitVector::zeros(n);
            for (b, &v) in s.vars.iter().enumerate() {
                if (local_mask >> b) & 1 == 1 {
                    mask.set(v, true);
                }
            }
            *merged.entry(mask).or_insert(0.0) += w * scale;
        }
    }
    Ok(WalshExpansion::from_map(n, merged).pruned())
}
