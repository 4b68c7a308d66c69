//! Definable sets: the boolean algebra of extensions of rank-bounded
//! formulas with parameters.
//!
//! The enumeration is extension-driven: atomic formulas are evaluated first,
//! then the family is closed under complement and pairwise intersection, and
//! each rank layer adds quantifier eliminations of the previous layer before
//! re-closing. Deduplication is by extension, keeping the first witness
//! formula found, so the result is the family of distinct extensions rather
//! than a stream of syntactically distinct formulas.

use std::collections::{BTreeSet, HashMap};

use super::engine::{formula_relation, EngineConfig};
use super::relation::Relation;
use super::structure::{EvalError, Model};
use crate::logic::{Formula, Term};

/// One extension with a witness formula of minimal discovered rank layer.
#[derive(Debug, Clone)]
pub struct DefinableMember {
    pub tuples: BTreeSet<Vec<usize>>,
    pub witness: Formula,
    pub rank: usize,
}

#[derive(Debug, Clone)]
pub struct DefinableAlgebra {
    pub var_count: usize,
    pub rank_bound: usize,
    pub params: Vec<usize>,
    pub members: Vec<DefinableMember>,
    /// Fixpoint reached within caps and the atomic basis was exhaustive.
    pub complete: bool,
    /// Fixpoint reached within the formula/member caps.
    pub closure_complete: bool,
    /// False when function symbols force a term-depth cutoff on atoms.
    pub atoms_exhaustive: bool,
    pub formulas_considered: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct AlgebraConfig {
    /// Hard cap on formulas considered during enumeration.
    pub max_formulas: usize,
    /// Cap on distinct extensions tracked.
    pub max_members: usize,
    /// Function nesting depth allowed in atomic formulas.
    pub term_depth: usize,
}

impl Default for AlgebraConfig {
    fn default() -> Self {
        AlgebraConfig {
            max_formulas: 100_000,
            max_members: 4096,
            term_depth: 1,
        }
    }
}

/// The distinct extensions of `k`-variable formulas with parameters among
/// `params` and quantifier rank at most `rank_bound`.
pub fn definable_algebra(
    model: &Model,
    params: &[usize],
    rank_bound: usize,
    k: usize,
) -> Result<DefinableAlgebra, EvalError> {
    definable_algebra_with(model, params, rank_bound, k, &AlgebraConfig::default())
}

pub fn definable_algebra_with(
    model: &Model,
    params: &[usize],
    rank_bound: usize,
    k: usize,
    cfg: &AlgebraConfig,
) -> Result<DefinableAlgebra, EvalError> {
    assert!(k >= 1, "definable sets need at least one free variable");
    for &p in params {
        if p >= model.size() {
            return Err(EvalError::ElementOutOfRange {
                element: p,
                size: model.size(),
            });
        }
    }
    let width = k + rank_bound;
    let var_names: Vec<String> = if k == 1 {
        let mut v = vec!["x".to_string()];
        v.extend((1..=rank_bound).map(|i| format!("y{i}")));
        v
    } else {
        let mut v: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
        v.extend((1..=rank_bound).map(|i| format!("y{i}")));
        v
    };

    let mut closure = Closure {
        model,
        var_names: &var_names,
        engine_cfg: EngineConfig::default(),
        cfg,
        by_bits: HashMap::new(),
        members: Vec::new(),
        considered: 0,
        hit_cap: false,
    };

    // Layer 0: atomic extensions, closed under boolean operations.
    let (atoms, atoms_exhaustive) = atomic_formulas(model, params, &var_names, cfg.term_depth);
    for atom in atoms {
        closure.insert_formula(&atom, 0)?;
        if closure.hit_cap {
            break;
        }
    }
    closure.boolean_close(0);

    // Each further layer adds one level of quantification and re-closes.
    for rank in 1..=rank_bound {
        if closure.hit_cap {
            break;
        }
        let snapshot: Vec<usize> = (0..closure.members.len()).collect();
        for idx in snapshot {
            if closure.members[idx].rank <= rank - 1 {
                closure.quantify(idx, rank, width);
            }
            if closure.hit_cap {
                break;
            }
        }
        closure.boolean_close(rank);
    }

    let closure_complete = !closure.hit_cap;
    // Report only extensions that do not depend on the padding variables.
    let mut members = Vec::new();
    for m in &closure.members {
        if let Some(projected) = project_to_prefix(&m.relation, k, model.size()) {
            let mut witness = m.witness.clone();
            for name in var_names.iter().skip(k) {
                if witness.free_variables().contains(name) {
                    witness = witness.substitute(name, &Term::Element(0));
                }
            }
            members.push(DefinableMember {
                tuples: projected,
                witness,
                rank: m.rank,
            });
        }
    }
    // Dedup k-projections (distinct padded extensions can project equally).
    let mut seen = BTreeSet::new();
    members.retain(|m| seen.insert(m.tuples.clone()));
    members.sort_by(|a, b| a.tuples.cmp(&b.tuples));

    Ok(DefinableAlgebra {
        var_count: k,
        rank_bound,
        params: params.to_vec(),
        members,
        complete: closure_complete && atoms_exhaustive,
        closure_complete,
        atoms_exhaustive,
        formulas_considered: closure.considered,
    })
}

struct TrackedMember {
    relation: Relation,
    witness: Formula,
    rank: usize,
}

struct Closure<'m, 'c> {
    model: &'m Model,
    var_names: &'c [String],
    engine_cfg: EngineConfig,
    cfg: &'c AlgebraConfig,
    by_bits: HashMap<Relation, usize>,
    members: Vec<TrackedMember>,
    considered: usize,
    hit_cap: bool,
}

impl<'m, 'c> Closure<'m, 'c> {
    fn budget(&mut self) -> bool {
        self.considered += 1;
        if self.considered > self.cfg.max_formulas || self.members.len() > self.cfg.max_members {
            self.hit_cap = true;
        }
        !self.hit_cap
    }

    fn insert_formula(&mut self, f: &Formula, rank: usize) -> Result<(), EvalError> {
        if !self.budget() {
            return Ok(());
        }
        let names: Vec<&str> = self.var_names.iter().map(|s| s.as_str()).collect();
        let rel = formula_relation(self.model, f, &names, &self.engine_cfg)?;
        self.insert_relation(rel, f.clone(), rank);
        Ok(())
    }

    fn insert_relation(&mut self, rel: Relation, witness: Formula, rank: usize) {
        if self.by_bits.contains_key(&rel) {
            return;
        }
        self.by_bits.insert(rel.clone(), self.members.len());
        self.members.push(TrackedMember {
            relation: rel,
            witness,
            rank,
        });
    }

    /// Closes the tracked family under complement and pairwise intersection.
    fn boolean_close(&mut self, rank: usize) {
        let mut next = 0;
        while next < self.members.len() {
            if self.hit_cap {
                return;
            }
            let current = next;
            next += 1;

            if !self.budget() {
                return;
            }
            let mut comp = self.members[current].relation.clone();
            comp.complement();
            let witness = Formula::not(self.members[current].witness.clone());
            let r = self.members[current].rank.max(rank.min(rank));
            self.insert_relation(comp, witness, r);

            for other in 0..next.min(self.members.len()) {
                if !self.budget() {
                    return;
                }
                let meet = self.members[current]
                    .relation
                    .combine_same_vars(&self.members[other].relation, super::relation::BoolOp::And);
                if !self.by_bits.contains_key(&meet) {
                    let witness = Formula::and(
                        self.members[current].witness.clone(),
                        self.members[other].witness.clone(),
                    );
                    let r = self.members[current].rank.max(self.members[other].rank);
                    self.insert_relation(meet, witness, r);
                }
            }
        }
    }

    /// Adds existential and universal eliminations of a member over every
    /// variable position, re-padded to full width.
    fn quantify(&mut self, idx: usize, rank: usize, width: usize) {
        let target: Vec<u32> = (0..width as u32).collect();
        for pos in 0..width {
            for universal in [false, true] {
                if !self.budget() {
                    return;
                }
                let eliminated = self.members[idx].relation.eliminate(pos as u32, universal);
                let padded = eliminated.materialize_over(&target);
                if !self.by_bits.contains_key(&padded) {
                    let name = &self.var_names[pos];
                    let witness = if universal {
                        Formula::forall(name, self.members[idx].witness.clone())
                    } else {
                        Formula::exists(name, self.members[idx].witness.clone())
                    };
                    self.insert_relation(padded, witness, rank);
                }
            }
        }
    }
}

/// The k-tuple projection of a padded relation when it is a cylinder over the
/// padding positions; `None` when it genuinely depends on them.
fn project_to_prefix(rel: &Relation, k: usize, n: usize) -> Option<BTreeSet<Vec<usize>>> {
    let width = rel.vars().len();
    for pos in k..width {
        let base = rel.restrict(pos as u32, 0);
        for v in 1..n {
            if rel.restrict(pos as u32, v) != base {
                return None;
            }
        }
    }
    let mut reduced = rel.clone();
    for pos in (k..width).rev() {
        reduced = reduced.restrict(pos as u32, 0);
    }
    let mut out = BTreeSet::new();
    reduced.for_each_tuple(|t| {
        out.insert(t.to_vec());
    });
    Some(out)
}

/// All atomic formulas over the variables, parameters, and signature symbols
/// with function nesting up to `term_depth`. The second component is false
/// when the depth cap may have truncated the basis.
fn atomic_formulas(
    model: &Model,
    params: &[usize],
    var_names: &[String],
    term_depth: usize,
) -> (Vec<Formula>, bool) {
    let sig = model.signature();
    let mut terms: Vec<Term> = Vec::new();
    for v in var_names {
        terms.push(Term::var(v));
    }
    for &p in params {
        terms.push(Term::Element(p));
    }
    for c in sig.constant_names() {
        terms.push(Term::constant(c));
    }
    let has_functions = sig.function_names().next().is_some();
    let mut frontier = terms.clone();
    for _ in 0..term_depth {
        if !has_functions {
            break;
        }
        let mut next = Vec::new();
        for f in sig.function_names() {
            let arity = sig.function(f).unwrap().arity;
            let mut tuple = vec![0usize; arity];
            loop {
                // At least one argument from the frontier keeps depth growing.
                if tuple.iter().any(|&i| i >= terms.len() - frontier.len()) {
                    let args: Vec<Term> = tuple.iter().map(|&i| terms[i].clone()).collect();
                    next.push(Term::apply(f, args));
                }
                if !increment_mixed(&mut tuple, terms.len()) {
                    break;
                }
            }
        }
        terms.extend(next.iter().cloned());
        frontier = next;
        if terms.len() > 2000 {
            break;
        }
    }

    let mut rel_names: Vec<&str> = sig.relation_names().collect();
    rel_names.push("=");
    let mut atoms = Vec::new();
    for r in rel_names {
        let arity = if r == "=" { 2 } else { sig.relation(r).unwrap().arity };
        let mut tuple = vec![0usize; arity];
        loop {
            let args: Vec<Term> = tuple.iter().map(|&i| terms[i].clone()).collect();
            atoms.push(Formula::atomic(r, args));
            if !increment_mixed(&mut tuple, terms.len()) {
                break;
            }
        }
    }
    let _ = model;
    (atoms, !has_functions)
}

fn increment_mixed(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// True iff the family contains the empty set and the base and is closed
/// under complement and pairwise intersection.
pub fn is_boolean_algebra<T: Ord + Clone>(base: &BTreeSet<T>, family: &[BTreeSet<T>]) -> bool {
    let family_set: BTreeSet<&BTreeSet<T>> = family.iter().collect();
    let empty = BTreeSet::new();
    if !family_set.contains(&empty) || !family_set.contains(base) {
        return false;
    }
    for a in family {
        let complement: BTreeSet<T> = base.difference(a).cloned().collect();
        if !family_set.contains(&complement) {
            return false;
        }
        for b in family {
            let meet: BTreeSet<T> = a.intersection(b).cloned().collect();
            if !family_set.contains(&meet) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone)]
pub struct SentenceComparison {
    pub sentence: Formula,
    pub holds_in_first: bool,
    pub holds_in_second: bool,
}

#[derive(Debug, Clone)]
pub struct TheoryReport {
    pub rows: Vec<SentenceComparison>,
    pub agree: bool,
}

/// Evaluates each sentence in both models. Agreement on the list is a
/// necessary condition for elementary equivalence, never a sufficient one.
pub fn same_theory_on(
    first: &Model,
    second: &Model,
    sentences: &[Formula],
) -> Result<TheoryReport, EvalError> {
    let mut rows = Vec::new();
    for s in sentences {
        let free = s.free_variables();
        if !free.is_empty() {
            return Err(EvalError::NotASentence(free.into_iter().collect()));
        }
        rows.push(SentenceComparison {
            sentence: s.clone(),
            holds_in_first: first.sat(s)?,
            holds_in_second: second.sat(s)?,
        });
    }
    let agree = rows.iter().all(|r| r.holds_in_first == r.holds_in_second);
    Ok(TheoryReport { rows, agree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, Signature};

    fn domain_set(n: usize) -> BTreeSet<Vec<usize>> {
        (0..n).map(|e| vec![e]).collect()
    }

    #[test]
    fn edgeless_graph_rank_zero_gives_trivial_algebra() {
        let m = Model::builder(Signature::graph(), 3).finish().unwrap();
        let alg = definable_algebra(&m, &[], 0, 1).unwrap();
        assert!(alg.complete);
        let exts: Vec<&BTreeSet<Vec<usize>>> = alg.members.iter().map(|m| &m.tuples).collect();
        assert_eq!(exts.len(), 2);
        assert_eq!(*exts[0], BTreeSet::new());
        assert_eq!(*exts[1], domain_set(3));
    }

    #[test]
    fn dlo_chain_with_midpoint_parameter_gives_eight_sets() {
        // Atoms x < 2 and x = 2 generate an 8-element boolean algebra.
        let m = Model::chain(5);
        let alg = definable_algebra(&m, &[2], 0, 1).unwrap();
        assert!(alg.complete);
        assert_eq!(alg.members.len(), 8);
        let all: BTreeSet<BTreeSet<Vec<usize>>> =
            alg.members.iter().map(|m| m.tuples.clone()).collect();
        let expect = |elems: &[usize]| -> BTreeSet<Vec<usize>> {
            elems.iter().map(|&e| vec![e]).collect()
        };
        for set in [
            expect(&[]),
            expect(&[0, 1]),
            expect(&[2]),
            expect(&[3, 4]),
            expect(&[0, 1, 2]),
            expect(&[0, 1, 3, 4]),
            expect(&[2, 3, 4]),
            expect(&[0, 1, 2, 3, 4]),
        ] {
            assert!(all.contains(&set), "missing {set:?}");
        }
    }

    #[test]
    fn witnesses_reproduce_their_extensions() {
        let m = Model::chain(4);
        let alg = definable_algebra(&m, &[1], 1, 1).unwrap();
        for member in &alg.members {
            let s = crate::model::solution_set(&m, &member.witness, &["x"]).unwrap();
            assert_eq!(s.tuples, member.tuples, "witness {:?}", member.witness);
            assert!(member.witness.quantifier_rank() <= 1);
        }
    }

    #[test]
    fn complete_algebra_is_boolean_algebra() {
        let m = Model::chain(5);
        let alg = definable_algebra(&m, &[2], 0, 1).unwrap();
        assert!(alg.complete);
        let base = domain_set(5);
        let family: Vec<BTreeSet<Vec<usize>>> =
            alg.members.iter().map(|m| m.tuples.clone()).collect();
        assert!(is_boolean_algebra(&base, &family));
    }

    #[test]
    fn is_boolean_algebra_examples() {
        let base: BTreeSet<usize> = [0, 1].into_iter().collect();
        let empty: BTreeSet<usize> = BTreeSet::new();
        let zero: BTreeSet<usize> = [0].into_iter().collect();
        assert!(is_boolean_algebra(&base, &[empty.clone(), base.clone()]));
        assert!(!is_boolean_algebra(
            &base,
            &[empty.clone(), zero, base.clone()]
        ));
        assert!(!is_boolean_algebra(&base, &[base.clone()]));
    }

    #[test]
    fn same_theory_on_model_with_itself_agrees() {
        let m = Model::chain(3);
        let s = parse_formula("exists x. exists y. x < y", m.signature()).unwrap();
        let report = same_theory_on(&m, &m, &[s]).unwrap();
        assert!(report.agree);
    }

    #[test]
    fn chains_of_different_length_disagree_on_three_element_sentence() {
        let two = Model::chain(2);
        let three = Model::chain(3);
        let s = parse_formula(
            "exists x. exists y. exists z. (x < y & y < z)",
            two.signature(),
        )
        .unwrap();
        let report = same_theory_on(&two, &three, &[s]).unwrap();
        assert!(!report.agree);
        assert!(!report.rows[0].holds_in_first);
        assert!(report.rows[0].holds_in_second);
    }

    #[test]
    fn odd_rings_agree_on_halving_sentence() {
        let z5 = Model::modular_ring(5);
        let z7 = Model::modular_ring(7);
        let s = parse_formula("forall x. exists y. y + y = x", z5.signature()).unwrap();
        let report = same_theory_on(&z5, &z7, &[s]).unwrap();
        assert!(report.agree);
        assert!(report.rows[0].holds_in_first && report.rows[0].holds_in_second);
    }

    #[test]
    fn non_sentence_rejected() {
        let m = Model::chain(2);
        let f = parse_formula("x < 1", m.signature()).unwrap();
        assert!(same_theory_on(&m, &m, &[f]).is_err());
    }
}
