//! Gray-box pseudo-boolean optimization on top of Walsh expansions.
//!
//! The crate covers the whole pipeline: sparse Walsh expansions
//! ([`walsh`]), benchmark generators and noise models ([`problems`]),
//! static, weighted and check-based interaction graphs ([`structure`]),
//! single-linkage forests and mask selection ([`linkage`]), variation
//! operators including weighted partition crossover ([`operators`]), the
//! pyramid optimizer and its baselines ([`optimizers`]), toy-scale
//! structural analysis ([`analysis`]) and the experiment harness behind
//! the command-line tool ([`harness`]).

pub mod analysis;
pub mod bits;
pub mod error;
pub mod evaluation;
pub mod harness;
pub mod linkage;
pub mod operators;
pub mod optimizers;
pub mod problems;
pub mod structure;
pub mod walsh;

pub use bits::BitVector;
pub use error::{GrayBoxError, Result};
pub use evaluation::{Budget, Evaluator, Individual};
pub use walsh::{AdditiveFunction, PseudoBoolean, Subfunction, WalshExpansion, WalshTerm};
