//! Toy-scale structural analysis: denoising, landscape cross-sections and
//! coefficient statistics.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bits::BitVector;
use crate::error::{GrayBoxError, Result};
use crate::structure::{dependency_graph_from_table, maximal_cliques, DependencyCheck, InteractionGraph};
use crate::walsh::{self, argmax_indices, PseudoBoolean, WalshExpansion};

/// How [`denoise`] reacts to a removal that would change the optima.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DenoiseMode {
    /// The first failed removal ends the walk.
    #[default]
    StopAtFirstFailure,
    /// Failed removals are undone and the walk continues.
    SkipFailures,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckEpistasis {
    pub check: DependencyCheck,
    pub before: f64,
    pub after: f64,
}

#[derive(Clone, Debug)]
pub struct DenoiseReport {
    pub surrogate: WalshExpansion,
    pub removed_terms: usize,
    pub retained_terms: usize,
    pub optima_preserved: bool,
    pub epistasis: Vec<CheckEpistasis>,
}

impl DenoiseReport {
    pub fn epistasis_for(&self, check: DependencyCheck) -> Option<&CheckEpistasis> {
        self.epistasis.iter().find(|c| c.check == check)
    }
}

pub fn denoise(e: &WalshExpansion) -> Result<DenoiseReport> {
    denoise_with(e, DenoiseMode::default())
}

/// Removes terms in ascending `|w|` order as long as the set of global
/// optima stays exactly the same.
pub fn denoise_with(e: &WalshExpansion, mode: DenoiseMode) -> Result<DenoiseReport> {
    let n = e.n();
    let original = e.value_table()?;
    let optima = argmax_indices(&original);
    let mut order: Vec<usize> = (0..e.len()).collect();
    order.sort_by(|&a, &b| {
        e.terms()[a]
            .coefficient
            .abs()
            .total_cmp(&e.terms()[b].coefficient.abs())
    });

    let mut table = original.clone();
    let mut removed = vec![false; e.len()];
    let mut scratch = vec![0.0; table.len()];
    for &t in &order {
        let term = &e.terms()[t];
        let mask = term.mask.to_index() as usize;
        for (x, v) in scratch.iter_mut().enumerate() {
            let odd = (x & mask).count_ones() & 1 == 1;
            let s = if odd { -term.coefficient } else { term.coefficient };
            *v = table[x] - s;
        }
        if argmax_indices(&scratch) == optima {
            std::mem::swap(&mut table, &mut scratch);
            removed[t] = true;
        } else if mode == DenoiseMode::StopAtFirstFailure {
            break;
        }
    }

    let surrogate = WalshExpansion::from_terms(
        n,
        e.terms()
            .iter()
            .zip(&removed)
            .filter(|(_, &r)| !r)
            .map(|(t, _)| t.clone()),
    )?;
    let preserved = argmax_indices(&table) == optima;
    assert!(preserved, "denoising changed the global optima");
    let epistasis = DependencyCheck::ALL
        .iter()
        .map(|&check| CheckEpistasis {
            check,
            before: dependency_graph_from_table(&original, n, check).epistasis(),
            after: dependency_graph_from_table(&table, n, check).epistasis(),
        })
        .collect();
    let removed_terms = removed.iter().filter(|&&r| r).count();
    Ok(DenoiseReport {
        surrogate,
        removed_terms,
        retained_terms: e.len() - removed_terms,
        optima_preserved: preserved,
        epistasis,
    })
}

/// Genotypes visited by the cross-section walk: complement of an optimum,
/// then one flip at a time to a minimum, then to the optimum.
pub fn cross_section_path<R: Rng + ?Sized>(
    optima: &[BitVector],
    minima: &[BitVector],
    rng: &mut R,
) -> Result<Vec<BitVector>> {
    let o = optima
        .choose(rng)
        .ok_or_else(|| GrayBoxError::InvalidArgument("cross-section needs an optimum".into()))?;
    let m = minima
        .choose(rng)
        .ok_or_else(|| GrayBoxError::InvalidArgument("cross-section needs a minimum".into()))?;
    if o.len() != m.len() {
        return Err(GrayBoxError::DimensionMismatch {
            expected: o.len(),
            found: m.len(),
        });
    }
    let mut x = o.complement();
    let mut path = vec![x.clone()];
    for target in [m, o] {
        let mut diff = x.xor(target).ones_indices();
        diff.shuffle(rng);
        for i in diff {
            x.flip(i);
            path.push(x.clone());
        }
    }
    Ok(path)
}

pub fn landscape_cross_section<F: PseudoBoolean + ?Sized, R: Rng + ?Sized>(
    f: &F,
    optima: &[BitVector],
    minima: &[BitVector],
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(cross_section_path(optima, minima, rng)?
        .iter()
        .map(|x| f.value(x))
        .collect())
}

/// Smallest `|w|` per mask size, for sizes of at least two.
pub fn min_abs_coeff_by_mask_size(e: &WalshExpansion) -> BTreeMap<usize, f64> {
    let mut out = BTreeMap::new();
    for t in e.terms().iter().filter(|t| t.order() >= 2) {
        let w = t.coefficient.abs();
        out.entry(t.order())
            .and_modify(|m: &mut f64| *m = m.min(w))
            .or_insert(w);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CliqueStats {
    pub count: usize,
    pub min_len: usize,
    pub max_len: usize,
}

pub fn clique_stats(g: &InteractionGraph) -> CliqueStats {
    let cliques = maximal_cliques(g);
    CliqueStats {
        count: cliques.len(),
        min_len: cliques.iter().map(Vec::len).min().unwrap_or(0),
        max_len: cliques.iter().map(Vec::len).max().unwrap_or(0),
    }
}

/// Median of a sample; the mean of the two middle values for even sizes.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

/// Global optima of a black box by enumeration.
pub fn black_box_optima<F: PseudoBoolean + ?Sized>(f: &F) -> Result<(Vec<BitVector>, Vec<BitVector>)> {
    let table = walsh::value_table(f)?;
    let n = f.dimension();
    let to_bits = |v: Vec<usize>| v.into_iter().map(|i| BitVector::from_index(n, i as u64)).collect();
    Ok((to_bits(argmax_indices(&table)), to_bits(walsh::argmin_indices(&table))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{add_solution_noise, make_onemax};
    use crate::walsh::{global_minima, global_optima};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn onemax_expansion(n: usize) -> WalshExpansion {
        make_onemax(n).unwrap().expansion().unwrap().clone()
    }

    #[test]
    fn onemax_keeps_everything_under_strict_stop() {
        let e = onemax_expansion(6);
        let r = denoise(&e).unwrap();
        assert_eq!(r.removed_terms, 0);
        assert_eq!(r.retained_terms, 7);
    }

    #[test]
    fn onemax_skip_mode_drops_only_constant() {
        let e = onemax_expansion(6);
        let r = denoise_with(&e, DenoiseMode::SkipFailures).unwrap();
        assert_eq!(r.removed_terms, 1);
        assert!(r.surrogate.terms().iter().all(|t| t.order() == 1));
        assert_eq!(r.surrogate.len(), 6);
    }

    #[test]
    fn smallest_term_decides_optimum() {
        // x0 alone breaks the tie between the two optima of the pair term
        let e = WalshExpansion::from_index_terms(3, &[(&[0], -0.1), (&[0, 1], -5.0), (&[2], -3.0)]).unwrap();
        let r = denoise(&e).unwrap();
        assert_eq!(r.removed_terms, 0);
    }

    #[test]
    fn denoise_preserves_optima_and_sheds_noise() {
        for seed in 0..5 {
            let p = add_solution_noise(&make_onemax(8).unwrap(), 1.0, seed).unwrap();
            let e = p.expansion().unwrap();
            let r = denoise(e).unwrap();
            assert_eq!(global_optima(&r.surrogate).unwrap(), global_optima(e).unwrap());
            assert!(r.removed_terms >= 1);
            for c in &r.epistasis {
                assert!(c.before >= 0.0 && c.before <= 1.0 && c.after <= 1.0);
            }
            assert_eq!(r.epistasis_for(DependencyCheck::Nonlinear).unwrap().before, 1.0);
            for t in r.surrogate.terms() {
                assert_eq!(e.coefficient(&t.mask.ones_indices()), t.coefficient);
            }
        }
    }

    #[test]
    fn cross_section_onemax() {
        let e = onemax_expansion(10);
        let optima = global_optima(&e).unwrap();
        let minima = global_minima(&e).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = landscape_cross_section(&e, &optima, &minima, &mut rng).unwrap();
        assert_eq!(s.len(), 11);
        assert!(s.windows(2).all(|w| w[1] == w[0] + 1.0));
        assert_eq!(*s.last().unwrap(), 10.0);
        assert!(landscape_cross_section(&e, &[], &minima, &mut rng).is_err());
    }

    #[test]
    fn cross_section_endpoints_and_length() {
        let p = add_solution_noise(&make_onemax(8).unwrap(), 2.5, 3).unwrap();
        let e = p.expansion().unwrap();
        let optima = global_optima(e).unwrap();
        let minima = global_minima(e).unwrap();
        let path = cross_section_path(&optima, &minima, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let (o, m) = (&optima[0], &minima[0]);
        assert_eq!(path.len(), 1 + o.complement().hamming(m) + m.hamming(o));
        assert_eq!(path[o.complement().hamming(m)], *m);
        assert_eq!(path.last().unwrap(), o);
        let again = cross_section_path(&optima, &minima, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(path, again);
    }

    #[test]
    fn min_coefficients() {
        assert!(min_abs_coeff_by_mask_size(&onemax_expansion(5)).is_empty());
        let e = WalshExpansion::from_index_terms(2, &[(&[0, 1], 3.0)]).unwrap();
        assert_eq!(min_abs_coeff_by_mask_size(&e), BTreeMap::from([(2, 3.0)]));
        let e = WalshExpansion::from_index_terms(4, &[(&[0, 1], -3.0), (&[2, 3], 0.5), (&[0, 1, 2], 1.0)]).unwrap();
        assert_eq!(min_abs_coeff_by_mask_size(&e), BTreeMap::from([(2, 0.5), (3, 1.0)]));
    }

    #[test]
    fn median_values() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }

    #[test]
    fn clique_stats_of_onemax() {
        let g = crate::structure::static_vig(&onemax_expansion(4));
        assert_eq!(
            clique_stats(&g),
            CliqueStats {
                count: 4,
                min_len: 1,
                max_len: 1
            }
        );
    }
}
