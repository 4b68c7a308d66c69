//! Finite structures and formula evaluation.

mod definable;
mod engine;
mod relation;
mod structure;

pub use definable::{
    definable_algebra, definable_algebra_with, is_boolean_algebra, same_theory_on, AlgebraConfig,
    DefinableAlgebra, DefinableMember, SentenceComparison, TheoryReport,
};
pub use engine::{solution_set, solution_set_with, EngineConfig};
pub use relation::Relation;
pub(crate) use relation::space_size;
pub use structure::{
    eval_formula, eval_term, load_model, Assignment, EvalError, Model, ModelError,
};

use crate::logic::Formula;
use std::collections::BTreeSet;

/// A definable set: a formula, an ordered list of free variables closing it,
/// and the materialized extension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefinableSet {
    pub formula: Formula,
    pub vars: Vec<String>,
    pub parameters: Vec<usize>,
    pub tuples: BTreeSet<Vec<usize>>,
}

impl DefinableSet {
    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.tuples.contains(tuple)
    }
}
