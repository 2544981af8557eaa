//! Fitness evaluation with FFE accounting and stop conditions.

use crate::bits::BitVector;
use crate::walsh::PseudoBoolean;

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub genotype: BitVector,
    pub fitness: f64,
}

/// Computational budget of one optimizer run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Budget {
    pub max_ffe: u64,
    /// Fitness at or above which the run counts as successful and stops.
    pub target_fitness: Option<f64>,
}

impl Budget {
    pub const DEFAULT_MAX_FFE: u64 = 2_000_000;

    pub fn new(max_ffe: u64) -> Self {
        assert!(max_ffe > 0, "budget needs at least one evaluation");
        Self {
            max_ffe,
            target_fitness: None,
        }
    }

    pub fn with_target(mut self, target: Option<f64>) -> Self {
        self.target_fitness = target;
        self
    }

    pub fn unlimited() -> Self {
        Self {
            max_ffe: u64::MAX,
            target_fitness: None,
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::new(Self::DEFAULT_MAX_FFE)
    }
}

/// Every fitness evaluation of a run goes through one `Evaluator`, which
/// counts it, tracks the best solution and records when the target was
/// first reached.
pub struct Evaluator<'a> {
    f: &'a dyn PseudoBoolean,
    budget: Budget,
    ffe: u64,
    best: Option<Individual>,
    ffe_to_best: u64,
    ffe_to_target: Option<u64>,
    trajectory: Vec<(u64, f64)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(f: &'a dyn PseudoBoolean, budget: Budget) -> Self {
        Self {
            f,
            budget,
            ffe: 0,
            best: None,
            ffe_to_best: 0,
            ffe_to_target: None,
            trajectory: Vec::new(),
        }
    }

    pub fn unlimited(f: &'a dyn PseudoBoolean) -> Self {
        Self::new(f, Budget::unlimited())
    }

    pub fn dimension(&self) -> usize {
        self.f.dimension()
    }

    pub fn evaluate(&mut self, x: &BitVector) -> f64 {
        self.ffe += 1;
        let v = self.f.value(x);
        if self.best.as_ref().is_none_or(|b| v > b.fitness) {
            self.best = Some(Individual {
                genotype: x.clone(),
                fitness: v,
            });
            self.ffe_to_best = self.ffe;
            self.trajectory.push((self.ffe, v));
        }
        if self.ffe_to_target.is_none() && self.budget.target_fitness.is_some_and(|t| v >= t) {
            self.ffe_to_target = Some(self.ffe);
        }
        v
    }

    pub fn individual(&mut self, genotype: BitVector) -> Individual {
        let fitness = self.evaluate(&genotype);
        Individual { genotype, fitness }
    }

    pub fn ffe(&self) -> u64 {
        self.ffe
    }

    pub fn target_reached(&self) -> bool {
        self.ffe_to_target.is_some()
    }

    pub fn budget_exhausted(&self) -> bool {
        self.ffe >= self.budget.max_ffe
    }

    pub fn should_stop(&self) -> bool {
        self.budget_exhausted() || self.target_reached()
    }

    pub fn best(&self) -> Option<&Individual> {
        self.best.as_ref()
    }

    pub fn ffe_to_best(&self) -> u64 {
        self.ffe_to_best
    }

    pub fn ffe_to_target(&self) -> Option<u64> {
        self.ffe_to_target
    }

    pub fn trajectory(&self) -> &[(u64, f64)] {
        &self.trajectory
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walsh::FnFunction;

    #[test]
    fn tracks_best_and_target() {
        let f = FnFunction::new(3, |x: &BitVector| x.count_ones() as f64);
        let mut ev = Evaluator::new(&f, Budget::new(3).with_target(Some(3.0)));
        ev.evaluate(&"100".parse().unwrap());
        ev.evaluate(&"000".parse().unwrap());
        assert!(!ev.should_stop());
        ev.evaluate(&"111".parse().unwrap());
        assert_eq!(ev.ffe(), 3);
        assert_eq!(ev.ffe_to_target(), Some(3));
        assert_eq!(ev.ffe_to_best(), 3);
        assert_eq!(ev.trajectory(), &[(1, 1.0), (3, 3.0)]);
        assert!(ev.should_stop());
    }
}
