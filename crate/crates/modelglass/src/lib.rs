//! A workbench for first-order logic over finite structures.
//!
//! The crate is organized around the classical pipeline from syntax to
//! combinatorics:
//!
//! - [`logic`] — signatures, terms, formulas, a concrete grammar with parser
//!   and canonical printer, and a builder for the injective-implies-surjective
//!   polynomial-map sentences used in the Ax transfer argument.
//! - [`model`] — finite structures, Tarskian evaluation, and a bitset-backed
//!   solution-set engine that materializes definable sets bottom-up over the
//!   subformula DAG.
//! - [`filters`] — filters and ultrafilters on finite base sets, with limit
//!   points and principal-ultrafilter enumeration.
//! - [`types`] — partial types as filters of solution sets, rank-bounded
//!   complete-type partitions, the symbolic type space of a dense linear
//!   order, and embedding-relative saturation reports.
//! - [`ultraproduct`] — the ultraproduct construction over finite index sets,
//!   Łoś-transfer checking, and isomorphism search for the principal collapse.
//! - [`graphs`] — half-graph (order-property) detection, exact-rational edge
//!   density and ε-regularity checks, regularity partitioning of stable
//!   graphs, and maximum clique / independent set search.
//!
//! Everything is deterministic: randomized operations take explicit seeds,
//! densities and thresholds are exact rationals, and caps fail with errors
//! rather than silently truncating.

pub mod filters;
pub mod graphs;
pub mod logic;
pub mod model;
pub mod types;
pub mod ultraproduct;

pub use logic::{parse_formula, parse_signature, print_formula, Formula, Signature, Term};
pub use model::{eval_formula, eval_term, solution_set, Assignment, DefinableSet, Model};
