//! The ultraproduct construction over finite index sets.
//!
//! Elements of the product are identified when they agree on a set belonging
//! to the ultrafilter; relations hold when they hold on an ultrafilter-large
//! set of coordinates; functions are computed coordinatewise and quotiented.
//! On a finite index set every ultrafilter is principal at some index, so the
//! result is canonically isomorphic to that factor. The construction is
//! still executed generically and the isomorphism is verified by search, not
//! assumed.

use std::collections::HashMap;

use thiserror::Error;

use crate::filters::Ultrafilter;
use crate::logic::{Formula, Term};
use crate::model::{EvalError, Model};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum UltraproductError {
    #[error("index set is empty")]
    EmptyFamily,
    #[error("factor {index} has a different signature")]
    SignatureMismatch { index: usize },
    #[error("ultrafilter base size {base} does not match the {factors} factors")]
    BaseMismatch { base: usize, factors: usize },
    #[error("product has {needed} tuples, above the cap {cap}")]
    ProductTooLarge { needed: usize, cap: usize },
    #[error("sentence mentions element literals {0:?}; transfer only covers the pure language")]
    ElementLiteralInSentence(Vec<usize>),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// A family of models over one signature, indexed by 0..len.
#[derive(Debug, Clone)]
pub struct IndexedFamily {
    models: Vec<Model>,
}

impl IndexedFamily {
    pub fn new(models: Vec<Model>) -> Result<IndexedFamily, UltraproductError> {
        if models.is_empty() {
            return Err(UltraproductError::EmptyFamily);
        }
        for (i, m) in models.iter().enumerate().skip(1) {
            if !m.signature().same_symbols(models[0].signature()) {
                return Err(UltraproductError::SignatureMismatch { index: i });
            }
        }
        Ok(IndexedFamily { models })
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn models(&self) -> &[Model] {
        &self.models
    }
}

/// The quotient model plus the bookkeeping that built it: one representative
/// tuple per element (the lexicographically least of its class) and the
/// ultrafilter used.
#[derive(Debug, Clone)]
pub struct UltraproductModel {
    pub model: Model,
    pub representatives: Vec<Vec<usize>>,
    pub ultrafilter: Ultrafilter,
}

/// Default cap on the number of product tuples enumerated.
pub const DEFAULT_PRODUCT_CAP: usize = 1 << 20;

/// Builds the ultraproduct of the family by the ultrafilter.
pub fn ultraproduct(
    family: &IndexedFamily,
    d: &Ultrafilter,
) -> Result<UltraproductModel, UltraproductError> {
    ultraproduct_capped(family, d, DEFAULT_PRODUCT_CAP)
}

pub fn ultraproduct_capped(
    family: &IndexedFamily,
    d: &Ultrafilter,
    cap: usize,
) -> Result<UltraproductModel, UltraproductError> {
    let m = family.len();
    if d.base_size() != m {
        return Err(UltraproductError::BaseMismatch {
            base: d.base_size(),
            factors: m,
        });
    }
    let sizes: Vec<usize> = family.models.iter().map(|f| f.size()).collect();
    let mut total = 1usize;
    for &s in &sizes {
        total = total
            .checked_mul(s)
            .filter(|&t| t <= cap)
            .ok_or(UltraproductError::ProductTooLarge {
                needed: usize::MAX,
                cap,
            })?;
    }

    // Quotient the product tuples: lexicographic enumeration makes each
    // class representative the least tuple of its class.
    let mut representatives: Vec<Vec<usize>> = Vec::new();
    let mut class_of: HashMap<Vec<usize>, usize> = HashMap::with_capacity(total);
    let mut tuple = vec![0usize; m];
    for _ in 0..total {
        let class = representatives
            .iter()
            .position(|rep| d_equivalent(rep, &tuple, d))
            .unwrap_or_else(|| {
                representatives.push(tuple.clone());
                representatives.len() - 1
            });
        class_of.insert(tuple.clone(), class);
        increment_mixed(&mut tuple, &sizes);
    }

    let sig = family.models[0].signature().clone();
    let mut builder = Model::builder(sig.clone(), representatives.len());

    for r in sig.relation_names() {
        let arity = sig.relation(r).unwrap().arity;
        let mut classes = vec![0usize; arity];
        loop {
            // Large-set semantics: the coordinates where the relation holds
            // of the representatives must form an ultrafilter member.
            let holds: Vec<usize> = (0..m)
                .filter(|&i| {
                    let coord: Vec<usize> =
                        classes.iter().map(|&c| representatives[c][i]).collect();
                    family.models[i].rel_holds(r, &coord).unwrap()
                })
                .collect();
            if d.contains(&holds) {
                builder.add_rel_tuple(r, &classes)?;
            }
            if !next_radix(&mut classes, representatives.len()) {
                break;
            }
        }
    }

    for f in sig.function_names() {
        let arity = sig.function(f).unwrap().arity;
        let mut classes = vec![0usize; arity];
        loop {
            let image: Vec<usize> = (0..m)
                .map(|i| {
                    let coord: Vec<usize> =
                        classes.iter().map(|&c| representatives[c][i]).collect();
                    family.models[i].fun_value(f, &coord).unwrap()
                })
                .collect();
            builder.set_function(f, &classes, class_of[&image])?;
            if !next_radix(&mut classes, representatives.len()) {
                break;
            }
        }
    }

    for c in sig.constant_names() {
        let image: Vec<usize> = (0..m)
            .map(|i| family.models[i].constant_value(c).unwrap())
            .collect();
        builder.set_constant(c, class_of[&image])?;
    }

    Ok(UltraproductModel {
        model: builder.finish()?,
        representatives,
        ultrafilter: d.clone(),
    })
}

fn d_equivalent(a: &[usize], b: &[usize], d: &Ultrafilter) -> bool {
    let agree: Vec<usize> = (0..a.len()).filter(|&i| a[i] == b[i]).collect();
    d.contains(&agree)
}

fn increment_mixed(digits: &mut [usize], radix: &[usize]) {
    for (d, &r) in digits.iter_mut().zip(radix).rev() {
        *d += 1;
        if *d < r {
            return;
        }
        *d = 0;
    }
}

fn next_radix(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// Łoś transfer check for one sentence: the sentence holds in the
/// ultraproduct iff the set of factors where it holds belongs to the
/// ultrafilter. Any disagreement is a construction bug.
#[derive(Debug, Clone)]
pub struct LosReport {
    pub sentence: Formula,
    pub holds_in_product: bool,
    pub factors_where_true: Vec<usize>,
    pub factor_set_in_ultrafilter: bool,
    pub transfer_holds: bool,
}

pub fn los_check(
    family: &IndexedFamily,
    d: &Ultrafilter,
    sentence: &Formula,
) -> Result<LosReport, UltraproductError> {
    let free = sentence.free_variables();
    if !free.is_empty() {
        return Err(UltraproductError::Eval(EvalError::NotASentence(
            free.into_iter().collect(),
        )));
    }
    // An element literal names a different element in each factor, so it is
    // not a symbol of the shared language.
    let literals = sentence.element_literals();
    if !literals.is_empty() {
        return Err(UltraproductError::ElementLiteralInSentence(
            literals.into_iter().collect(),
        ));
    }
    let up = ultraproduct(family, d)?;
    let holds_in_product = up.model.sat(sentence)?;
    let factors_where_true: Vec<usize> = family
        .models
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.sat(sentence).map(|b| b.then_some(i)).transpose())
        .collect::<Result<Vec<_>, _>>()?;
    let factor_set_in_ultrafilter = d.contains(&factors_where_true);
    Ok(LosReport {
        sentence: sentence.clone(),
        holds_in_product,
        factors_where_true,
        factor_set_in_ultrafilter,
        transfer_holds: holds_in_product == factor_set_in_ultrafilter,
    })
}

// ---------------------------------------------------------------------------
// Isomorphism checking.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoResult {
    /// `map[a]` is the image in the second model of element `a`.
    Isomorphic { map: Vec<usize> },
    /// No isomorphism exists; a distinguishing sentence is attached when the
    /// generated pool contains one.
    NotIsomorphic { witness: Option<Formula> },
    /// Search budget exhausted before a conclusion.
    Inconclusive { nodes_explored: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct IsoConfig {
    pub node_budget: usize,
}

impl Default for IsoConfig {
    fn default() -> Self {
        IsoConfig {
            node_budget: 1_000_000,
        }
    }
}

/// Backtracking isomorphism search with color-refinement pruning.
pub fn iso_check(a: &Model, b: &Model, cfg: &IsoConfig) -> Result<IsoResult, UltraproductError> {
    if !a.signature().same_symbols(b.signature()) {
        return Err(UltraproductError::SignatureMismatch { index: 1 });
    }
    if a.size() != b.size() {
        let k = a.size().min(b.size()) + 1;
        return Ok(IsoResult::NotIsomorphic {
            witness: Some(distinct_elements_sentence(k)),
        });
    }
    let colors_a = refine_colors(a);
    let colors_b = refine_colors(b);
    let mut hist_a: Vec<u64> = colors_a.clone();
    let mut hist_b: Vec<u64> = colors_b.clone();
    hist_a.sort_unstable();
    hist_b.sort_unstable();
    if hist_a != hist_b {
        let witness = find_distinguishing_sentence(a, b);
        return Ok(IsoResult::NotIsomorphic { witness });
    }

    let mut search = IsoSearch {
        a,
        b,
        colors_a: &colors_a,
        colors_b: &colors_b,
        map: vec![usize::MAX; a.size()],
        used: vec![false; b.size()],
        nodes: 0,
        budget: cfg.node_budget,
    };
    match search.solve(0) {
        SearchOutcome::Found => Ok(IsoResult::Isomorphic { map: search.map }),
        SearchOutcome::Exhausted => {
            let witness = find_distinguishing_sentence(a, b);
            Ok(IsoResult::NotIsomorphic { witness })
        }
        SearchOutcome::OutOfBudget => Ok(IsoResult::Inconclusive {
            nodes_explored: search.nodes,
        }),
    }
}

/// exists x1..xk, pairwise distinct.
fn distinct_elements_sentence(k: usize) -> Formula {
    let names: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
    let mut distinct = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            distinct.push(Formula::not(Formula::equal(
                Term::var(&names[i]),
                Term::var(&names[j]),
            )));
        }
    }
    let mut f = Formula::conjoin(distinct);
    for name in names.iter().rev() {
        f = Formula::exists(name, f);
    }
    f
}

/// Iterated color refinement: the initial color is the atomic profile of the
/// element, then colors absorb the multiset of colors of related elements.
fn refine_colors(m: &Model) -> Vec<u64> {
    let n = m.size();
    let sig = m.signature();
    let mut colors: Vec<u64> = (0..n)
        .map(|e| {
            let mut h = Hasher::new();
            for r in sig.relation_names() {
                let arity = sig.relation(r).unwrap().arity;
                let mut tuple = vec![0usize; arity];
                loop {
                    if tuple.contains(&e) && m.rel_holds(r, &tuple).unwrap() {
                        for (pos, &t) in tuple.iter().enumerate() {
                            h.mix(pos as u64 + 1);
                            h.mix(if t == e { 1 } else { 0 });
                        }
                        h.mix(0xabcd);
                    }
                    if !next_radix(&mut tuple, n) {
                        break;
                    }
                }
            }
            for c in sig.constant_names() {
                if m.constant_value(c) == Some(e) {
                    h.mix_str(c);
                }
            }
            h.finish()
        })
        .collect();

    for _round in 0..n {
        let mut next: Vec<u64> = Vec::with_capacity(n);
        for e in 0..n {
            let mut h = Hasher::new();
            h.mix(colors[e]);
            for r in sig.relation_names().collect::<Vec<_>>() {
                let arity = sig.relation(r).unwrap().arity;
                if arity == 2 {
                    let mut outs: Vec<u64> = (0..n)
                        .filter(|&v| m.rel_holds(r, &[e, v]).unwrap())
                        .map(|v| colors[v])
                        .collect();
                    outs.sort_unstable();
                    for o in outs {
                        h.mix(o);
                    }
                    h.mix(0x1111);
                    let mut ins: Vec<u64> = (0..n)
                        .filter(|&u| m.rel_holds(r, &[u, e]).unwrap())
                        .map(|u| colors[u])
                        .collect();
                    ins.sort_unstable();
                    for i in ins {
                        h.mix(i);
                    }
                    h.mix(0x2222);
                }
            }
            for f in sig.function_names() {
                if sig.function(f).unwrap().arity == 1 {
                    h.mix(colors[m.fun_value(f, &[e]).unwrap()]);
                }
            }
            next.push(h.finish());
        }
        if next == colors {
            break;
        }
        colors = next;
    }
    colors
}

struct Hasher(u64);

impl Hasher {
    fn new() -> Hasher {
        Hasher(0xcbf29ce484222325)
    }
    fn mix(&mut self, v: u64) {
        self.0 ^= v.wrapping_add(0x9e3779b97f4a7c15);
        self.0 = self.0.wrapping_mul(0x100000001b3).rotate_left(17);
    }
    fn mix_str(&mut self, s: &str) {
        for b in s.bytes() {
            self.mix(b as u64);
        }
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

enum SearchOutcome {
    Found,
    Exhausted,
    OutOfBudget,
}

struct IsoSearch<'a> {
    a: &'a Model,
    b: &'a Model,
    colors_a: &'a [u64],
    colors_b: &'a [u64],
    map: Vec<usize>,
    used: Vec<bool>,
    nodes: usize,
    budget: usize,
}

impl<'a> IsoSearch<'a> {
    fn solve(&mut self, next: usize) -> SearchOutcome {
        if next == self.a.size() {
            return if self.full_check() {
                SearchOutcome::Found
            } else {
                SearchOutcome::Exhausted
            };
        }
        for candidate in 0..self.b.size() {
            if self.used[candidate] || self.colors_a[next] != self.colors_b[candidate] {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return SearchOutcome::OutOfBudget;
            }
            self.map[next] = candidate;
            self.used[candidate] = true;
            if self.consistent(next) {
                match self.solve(next + 1) {
                    SearchOutcome::Found => return SearchOutcome::Found,
                    SearchOutcome::OutOfBudget => return SearchOutcome::OutOfBudget,
                    SearchOutcome::Exhausted => {}
                }
            }
            self.map[next] = usize::MAX;
            self.used[candidate] = false;
        }
        SearchOutcome::Exhausted
    }

    /// Checks all atomic facts among the mapped prefix that involve the
    /// newest element.
    fn consistent(&self, newest: usize) -> bool {
        let sig = self.a.signature();
        let mapped: Vec<usize> = (0..=newest).collect();
        for r in sig.relation_names() {
            let arity = sig.relation(r).unwrap().arity;
            if !self.tuples_agree(&mapped, newest, arity, |t| {
                (
                    self.a.rel_holds(r, t).unwrap(),
                    self.b
                        .rel_holds(r, &t.iter().map(|&x| self.map[x]).collect::<Vec<_>>())
                        .unwrap(),
                )
            }) {
                return false;
            }
        }
        for f in sig.function_names() {
            let arity = sig.function(f).unwrap().arity;
            let n = newest + 1;
            let mut tuple = vec![0usize; arity];
            loop {
                if tuple.contains(&newest) {
                    let img = self.a.fun_value(f, &tuple).unwrap();
                    if img <= newest {
                        let mapped_tuple: Vec<usize> =
                            tuple.iter().map(|&x| self.map[x]).collect();
                        if self.b.fun_value(f, &mapped_tuple).unwrap() != self.map[img] {
                            return false;
                        }
                    }
                }
                if !next_radix(&mut tuple, n) {
                    break;
                }
            }
        }
        for c in sig.constant_names() {
            let ca = self.a.constant_value(c).unwrap();
            if ca <= newest && self.map[ca] != self.b.constant_value(c).unwrap() {
                return false;
            }
        }
        true
    }

    fn tuples_agree(
        &self,
        mapped: &[usize],
        newest: usize,
        arity: usize,
        check: impl Fn(&[usize]) -> (bool, bool),
    ) -> bool {
        let mut idxs = vec![0usize; arity];
        loop {
            let tuple: Vec<usize> = idxs.iter().map(|&i| mapped[i]).collect();
            if tuple.contains(&newest) {
                let (x, y) = check(&tuple);
                if x != y {
                    return false;
                }
            }
            if !next_radix(&mut idxs, mapped.len()) {
                break;
            }
        }
        true
    }

    /// Functions may map into not-yet-assigned elements during the search;
    /// re-validate everything on a complete assignment.
    fn full_check(&self) -> bool {
        let sig = self.a.signature();
        let n = self.a.size();
        for f in sig.function_names() {
            let arity = sig.function(f).unwrap().arity;
            let mut tuple = vec![0usize; arity];
            loop {
                let img = self.a.fun_value(f, &tuple).unwrap();
                let mapped_tuple: Vec<usize> = tuple.iter().map(|&x| self.map[x]).collect();
                if self.b.fun_value(f, &mapped_tuple).unwrap() != self.map[img] {
                    return false;
                }
                if !next_radix(&mut tuple, n) {
                    break;
                }
            }
        }
        true
    }
}

/// Searches a pool of small sentences for one the models disagree on.
fn find_distinguishing_sentence(a: &Model, b: &Model) -> Option<Formula> {
    for sentence in sentence_pool(a) {
        if let (Ok(x), Ok(y)) = (a.sat(&sentence), b.sat(&sentence)) {
            if x != y {
                return Some(sentence);
            }
        }
    }
    None
}

/// Distinctness sentences and small relational patterns.
fn sentence_pool(m: &Model) -> Vec<Formula> {
    let sig = m.signature();
    let mut pool = Vec::new();
    for k in 2..=m.size().min(6) + 1 {
        pool.push(distinct_elements_sentence(k));
    }
    let x = || Term::var("x");
    let y = || Term::var("y");
    for r in sig.relation_names() {
        if sig.relation(r).unwrap().arity != 2 {
            continue;
        }
        let atom_xy = Formula::atomic(r, vec![x(), y()]);
        let atom_xx = Formula::atomic(r, vec![x(), x()]);
        pool.push(Formula::exists("x", Formula::exists("y", atom_xy.clone())));
        pool.push(Formula::exists("x", atom_xx.clone()));
        pool.push(Formula::forall(
            "x",
            Formula::forall("y", Formula::implies(atom_xy.clone(), Formula::atomic(r, vec![y(), x()]))),
        ));
        pool.push(Formula::forall(
            "x",
            Formula::exists("y", atom_xy.clone()),
        ));
        pool.push(Formula::exists(
            "x",
            Formula::forall("y", Formula::implies(Formula::not(Formula::equal(x(), y())), atom_xy.clone())),
        ));
        // Counting-style: at least k elements with an outgoing edge.
        for k in 1..=3usize {
            let names: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
            let mut parts = Vec::new();
            for i in 0..k {
                parts.push(Formula::exists(
                    "y",
                    Formula::atomic(r, vec![Term::var(&names[i]), y()]),
                ));
                for j in i + 1..k {
                    parts.push(Formula::not(Formula::equal(
                        Term::var(&names[i]),
                        Term::var(&names[j]),
                    )));
                }
            }
            let mut f = Formula::conjoin(parts);
            for name in names.iter().rev() {
                f = Formula::exists(name, f);
            }
            pool.push(f);
        }
    }
    pool
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::Ultrafilter;
    use crate::logic::parse_formula;

    fn principal(base: usize, at: usize) -> Ultrafilter {
        Ultrafilter::principal(base, at).unwrap()
    }

    #[test]
    fn principal_ultraproduct_is_isomorphic_to_its_factor() {
        let family =
            IndexedFamily::new(vec![Model::chain(2), Model::chain(3), Model::chain(4)]).unwrap();
        let d = principal(3, 1);
        let up = ultraproduct(&family, &d).unwrap();
        assert_eq!(up.model.size(), 3);
        let res = iso_check(&up.model, &family.models()[1], &IsoConfig::default()).unwrap();
        assert!(matches!(res, IsoResult::Isomorphic { .. }));
    }

    #[test]
    fn ultrapower_of_identical_factors_is_isomorphic_to_the_factor() {
        let m = Model::modular_ring(3);
        let family = IndexedFamily::new(vec![m.clone(), m.clone(), m.clone()]).unwrap();
        for at in 0..3 {
            let up = ultraproduct(&family, &principal(3, at)).unwrap();
            let res = iso_check(&up.model, &m, &IsoConfig::default()).unwrap();
            assert!(matches!(res, IsoResult::Isomorphic { .. }), "index {at}");
        }
    }

    #[test]
    fn singleton_index_set() {
        let m = Model::chain(4);
        let family = IndexedFamily::new(vec![m.clone()]).unwrap();
        let up = ultraproduct(&family, &principal(1, 0)).unwrap();
        let res = iso_check(&up.model, &m, &IsoConfig::default()).unwrap();
        assert!(matches!(res, IsoResult::Isomorphic { .. }));
    }

    #[test]
    fn representatives_are_lexicographically_least() {
        let family =
            IndexedFamily::new(vec![Model::chain(2), Model::chain(2), Model::chain(2)]).unwrap();
        let up = ultraproduct(&family, &principal(3, 0)).unwrap();
        // Classes keyed by coordinate 0; least representatives are (0,0,0)
        // and (1,0,0).
        assert_eq!(up.representatives, vec![vec![0, 0, 0], vec![1, 0, 0]]);
    }

    #[test]
    fn tautology_transfers() {
        let family =
            IndexedFamily::new(vec![Model::chain(2), Model::chain(3), Model::chain(4)]).unwrap();
        let s = parse_formula("forall x. x = x", family.models()[0].signature()).unwrap();
        let report = los_check(&family, &principal(3, 2), &s).unwrap();
        assert!(report.holds_in_product);
        assert_eq!(report.factors_where_true, vec![0, 1, 2]);
        assert!(report.transfer_holds);
    }

    #[test]
    fn three_element_sentence_on_mixed_chains() {
        let family =
            IndexedFamily::new(vec![Model::chain(2), Model::chain(3), Model::chain(4)]).unwrap();
        let s = parse_formula(
            "exists x. exists y. exists z. (x < y & y < z)",
            family.models()[0].signature(),
        )
        .unwrap();
        let report = los_check(&family, &principal(3, 2), &s).unwrap();
        assert!(report.holds_in_product);
        assert_eq!(report.factors_where_true, vec![1, 2]);
        assert!(report.factor_set_in_ultrafilter);
        assert!(report.transfer_holds);
    }

    #[test]
    fn chains_of_different_lengths_not_isomorphic() {
        let res = iso_check(&Model::chain(2), &Model::chain(3), &IsoConfig::default()).unwrap();
        match res {
            IsoResult::NotIsomorphic { witness: Some(w) } => {
                assert!(Model::chain(3).sat(&w).unwrap() != Model::chain(2).sat(&w).unwrap());
            }
            other => panic!("expected witnessed non-isomorphism, got {other:?}"),
        }
    }

    #[test]
    fn edgeless_and_complete_two_vertex_graphs_distinguished() {
        let sig = crate::logic::Signature::graph();
        let edgeless = Model::builder(sig.clone(), 2).finish().unwrap();
        let mut b = Model::builder(sig.clone(), 2);
        b.add_rel_tuple("E", &[0, 1]).unwrap();
        b.add_rel_tuple("E", &[1, 0]).unwrap();
        let complete = b.finish().unwrap();
        let res = iso_check(&edgeless, &complete, &IsoConfig::default()).unwrap();
        match res {
            IsoResult::NotIsomorphic { witness: Some(w) } => {
                assert!(!edgeless.sat(&w).unwrap() && complete.sat(&w).unwrap()
                    || edgeless.sat(&w).unwrap() && !complete.sat(&w).unwrap());
            }
            other => panic!("expected witnessed non-isomorphism, got {other:?}"),
        }
    }

    #[test]
    fn well_definedness_under_representative_permutation() {
        // Replacing representatives by D-equivalent tuples changes no truth
        // value: check a relation on classes via several representatives.
        let family =
            IndexedFamily::new(vec![Model::chain(3), Model::chain(3), Model::chain(3)]).unwrap();
        let d = principal(3, 1);
        let up = ultraproduct(&family, &d).unwrap();
        for (c1, rep1) in up.representatives.iter().enumerate() {
            for (c2, rep2) in up.representatives.iter().enumerate() {
                let expected = up.model.rel_holds("<", &[c1, c2]).unwrap();
                // Any tuple agreeing with the representative at the principal
                // index is equivalent.
                for variant1 in 0..3 {
                    for variant2 in 0..3 {
                        let t1 = vec![variant1, rep1[1], rep1[2]];
                        let t2 = vec![variant2, rep2[1], rep2[2]];
                        let holds: Vec<usize> = (0..3)
                            .filter(|&i| family.models()[i].rel_holds("<", &[t1[i], t2[i]]).unwrap())
                            .collect();
                        assert_eq!(d.contains(&holds), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn base_mismatch_rejected() {
        let family = IndexedFamily::new(vec![Model::chain(2), Model::chain(2)]).unwrap();
        let d = principal(3, 0);
        assert!(matches!(
            ultraproduct(&family, &d),
            Err(UltraproductError::BaseMismatch { .. })
        ));
    }

    #[test]
    fn signature_mismatch_rejected() {
        let res = IndexedFamily::new(vec![Model::chain(2), Model::modular_ring(2)]);
        assert!(matches!(
            res,
            Err(UltraproductError::SignatureMismatch { index: 1 })
        ));
    }
}
