//! Bottom-up solution-set engine.
//!
//! Formulas are compiled to an arena with binders alpha-renamed to integer
//! variable ids, and every subformula is evaluated to a [`Relation`] over its
//! unassigned free variables. Conjunctions of relations over disjoint,
//! ordered variable blocks stay symbolic as block outer products so that
//! quantifier folds can consume them word-parallel without materializing the
//! product space. Quantifier blocks whose body would be too large to
//! materialize are streamed: the engine enumerates assignments to the bound
//! block, evaluates the body with those variables substituted, and folds the
//! results together. Results are memoized per (subformula, relevant part of
//! the substitution); the cache lives for a single invocation.

use std::collections::HashMap;
use std::rc::Rc;

use super::relation::{increment, sorted_union, space_size, BoolOp, Relation};
use super::structure::{EvalError, Model};
use super::DefinableSet;
use crate::logic::{Formula, Term};

#[derive(Debug, Clone, Copy)]
pub struct EngineConfig {
    /// Quantifier bodies up to this many bits are materialized directly;
    /// larger bodies are streamed.
    pub materialize_threshold_bits: usize,
    /// Hard cap on any single materialized relation.
    pub max_relation_bits: usize,
    /// Cap on the number of streamed assignments per quantifier block.
    pub max_stream_assignments: usize,
    /// Cap on entries of a single term value table.
    pub max_term_entries: usize,
    /// Cap on tuples returned by `solution_set`.
    pub max_solution_tuples: usize,
    /// Relations above this size are not memoized.
    pub max_memo_bits: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            materialize_threshold_bits: 1 << 28,
            max_relation_bits: 1 << 28,
            max_stream_assignments: 1 << 24,
            max_term_entries: 1 << 22,
            max_solution_tuples: 1 << 20,
            max_memo_bits: 1 << 20,
        }
    }
}

/// Materializes the solution set of `formula` over the ordered variable list
/// `vars` (which must cover the free variables).
pub fn solution_set(
    model: &Model,
    formula: &Formula,
    vars: &[&str],
) -> Result<DefinableSet, EvalError> {
    solution_set_with(model, formula, vars, &EngineConfig::default())
}

pub fn solution_set_with(
    model: &Model,
    formula: &Formula,
    vars: &[&str],
    cfg: &EngineConfig,
) -> Result<DefinableSet, EvalError> {
    let rel = formula_relation(model, formula, vars, cfg)?;
    let count = rel.count();
    if count > cfg.max_solution_tuples {
        return Err(EvalError::TupleCapExceeded {
            cap: cfg.max_solution_tuples,
        });
    }
    let mut tuples = std::collections::BTreeSet::new();
    rel.for_each_tuple(|t| {
        tuples.insert(t.to_vec());
    });
    Ok(DefinableSet {
        formula: formula.clone(),
        vars: vars.iter().map(|s| s.to_string()).collect(),
        parameters: formula.element_literals().into_iter().collect(),
        tuples,
    })
}

/// The extension as a relation whose columns follow `vars` in the given
/// order.
pub(crate) fn formula_relation(
    model: &Model,
    formula: &Formula,
    vars: &[&str],
    cfg: &EngineConfig,
) -> Result<Relation, EvalError> {
    formula
        .validate(model.signature())
        .map_err(EvalError::UnknownSymbol)?;
    let mut free_ids: HashMap<String, u32> = HashMap::new();
    for (i, v) in vars.iter().enumerate() {
        if free_ids.insert(v.to_string(), i as u32).is_some() {
            return Err(EvalError::DuplicateVar(v.to_string()));
        }
    }
    let free = formula.free_variables();
    let missing: Vec<String> = free
        .iter()
        .filter(|f| !free_ids.contains_key(*f))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(EvalError::VarsDontCoverFree {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            free: missing,
        });
    }

    let arena = Arena::build(formula, model, &free_ids)?;
    let mut engine = Engine {
        model,
        arena: &arena,
        cfg,
        n: model.size(),
        env: vec![None; arena.var_count],
        memo_rel: HashMap::new(),
        memo_term: HashMap::new(),
    };
    let lazy = engine.eval_node(arena.root)?;
    let rel = engine.materialize(lazy)?;
    let target: Vec<u32> = (0..vars.len() as u32).collect();
    Ok(rel.materialize_over(&target))
}

impl Model {
    /// Evaluates a sentence with the solution-set engine.
    pub fn sat(&self, sentence: &Formula) -> Result<bool, EvalError> {
        self.sat_with(sentence, &EngineConfig::default())
    }

    pub fn sat_with(&self, sentence: &Formula, cfg: &EngineConfig) -> Result<bool, EvalError> {
        let free = sentence.free_variables();
        if !free.is_empty() {
            return Err(EvalError::NotASentence(free.into_iter().collect()));
        }
        let rel = formula_relation(self, sentence, &[], cfg)?;
        Ok(rel.get_tuple(&[]))
    }
}

// ---------------------------------------------------------------------------
// Arena: formulas compiled to nodes with alpha-renamed variables.

#[derive(Debug)]
enum TermKind {
    Var(u32),
    /// A constant or element literal, resolved to its element.
    Value(usize),
    Apply {
        fun: String,
        args: Vec<usize>,
    },
}

#[derive(Debug)]
struct TermNode {
    kind: TermKind,
    vars: Vec<u32>,
}

#[derive(Debug)]
enum NodeKind {
    Atomic { rel: String, args: Vec<usize> },
    Not(usize),
    Bin(BoolOp, usize, usize),
    Quant { universal: bool, var: u32, body: usize },
}

#[derive(Debug)]
struct Node {
    kind: NodeKind,
    free: Vec<u32>,
}

struct Arena {
    nodes: Vec<Node>,
    terms: Vec<TermNode>,
    root: usize,
    var_count: usize,
}

impl Arena {
    fn build(
        formula: &Formula,
        model: &Model,
        free_ids: &HashMap<String, u32>,
    ) -> Result<Arena, EvalError> {
        let mut b = ArenaBuilder {
            nodes: Vec::new(),
            terms: Vec::new(),
            model,
            free_ids,
            scope: Vec::new(),
            next_id: free_ids.len() as u32,
        };
        let root = b.formula(formula)?;
        Ok(Arena {
            nodes: b.nodes,
            terms: b.terms,
            root,
            var_count: b.next_id as usize,
        })
    }
}

struct ArenaBuilder<'a> {
    nodes: Vec<Node>,
    terms: Vec<TermNode>,
    model: &'a Model,
    free_ids: &'a HashMap<String, u32>,
    scope: Vec<(String, u32)>,
    next_id: u32,
}

impl<'a> ArenaBuilder<'a> {
    fn lookup(&self, name: &str) -> Option<u32> {
        self.scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, id)| *id)
            .or_else(|| self.free_ids.get(name).copied())
    }

    fn term(&mut self, term: &Term) -> Result<usize, EvalError> {
        let node = match term {
            Term::Var(v) => {
                let id = self
                    .lookup(v)
                    .ok_or_else(|| EvalError::UnassignedVariable(v.clone()))?;
                TermNode {
                    kind: TermKind::Var(id),
                    vars: vec![id],
                }
            }
            Term::Const(c) => {
                let value = self
                    .model
                    .constant_value(c)
                    .ok_or_else(|| EvalError::UnknownSymbol(c.clone()))?;
                TermNode {
                    kind: TermKind::Value(value),
                    vars: Vec::new(),
                }
            }
            Term::Element(e) => {
                if *e >= self.model.size() {
                    return Err(EvalError::ElementOutOfRange {
                        element: *e,
                        size: self.model.size(),
                    });
                }
                TermNode {
                    kind: TermKind::Value(*e),
                    vars: Vec::new(),
                }
            }
            Term::Apply(f, args) => {
                let ids: Vec<usize> = args
                    .iter()
                    .map(|a| self.term(a))
                    .collect::<Result<_, _>>()?;
                let mut vars = Vec::new();
                for &id in &ids {
                    vars = sorted_union(&vars, &self.terms[id].vars);
                }
                TermNode {
                    kind: TermKind::Apply {
                        fun: f.clone(),
                        args: ids,
                    },
                    vars,
                }
            }
        };
        self.terms.push(node);
        Ok(self.terms.len() - 1)
    }

    fn formula(&mut self, f: &Formula) -> Result<usize, EvalError> {
        let node = match f {
            Formula::Atomic(r, terms) => {
                let args: Vec<usize> = terms
                    .iter()
                    .map(|t| self.term(t))
                    .collect::<Result<_, _>>()?;
                let mut free = Vec::new();
                for &a in &args {
                    free = sorted_union(&free, &self.terms[a].vars);
                }
                Node {
                    kind: NodeKind::Atomic {
                        rel: r.clone(),
                        args,
                    },
                    free,
                }
            }
            Formula::Not(g) => {
                let c = self.formula(g)?;
                Node {
                    kind: NodeKind::Not(c),
                    free: self.nodes[c].free.clone(),
                }
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                let op = match f {
                    Formula::And(_, _) => BoolOp::And,
                    Formula::Or(_, _) => BoolOp::Or,
                    Formula::Implies(_, _) => BoolOp::Implies,
                    _ => BoolOp::Iff,
                };
                let ca = self.formula(a)?;
                let cb = self.formula(b)?;
                let free = sorted_union(&self.nodes[ca].free, &self.nodes[cb].free);
                Node {
                    kind: NodeKind::Bin(op, ca, cb),
                    free,
                }
            }
            Formula::ForAll(v, body) | Formula::Exists(v, body) => {
                let universal = matches!(f, Formula::ForAll(_, _));
                let id = self.next_id;
                self.next_id += 1;
                self.scope.push((v.clone(), id));
                let c = self.formula(body)?;
                self.scope.pop();
                let free: Vec<u32> = self.nodes[c]
                    .free
                    .iter()
                    .copied()
                    .filter(|&x| x != id)
                    .collect();
                Node {
                    kind: NodeKind::Quant {
                        universal,
                        var: id,
                        body: c,
                    },
                    free,
                }
            }
        };
        self.nodes.push(node);
        Ok(self.nodes.len() - 1)
    }
}

// ---------------------------------------------------------------------------
// Evaluation.

#[derive(Debug, Clone, PartialEq, Eq)]
struct TermTable {
    vars: Vec<u32>,
    values: Vec<usize>,
}

#[derive(Clone)]
enum Lazy {
    Mat(Rc<Relation>),
    /// (a x b), complemented when `negated`; a's variables all precede b's.
    Product {
        a: Rc<Relation>,
        b: Rc<Relation>,
        negated: bool,
    },
    Uniform {
        vars: Vec<u32>,
        value: bool,
    },
}

impl Lazy {
    fn vars(&self) -> Vec<u32> {
        match self {
            Lazy::Mat(r) => r.vars().to_vec(),
            Lazy::Product { a, b, .. } => {
                let mut v = a.vars().to_vec();
                v.extend_from_slice(b.vars());
                v
            }
            Lazy::Uniform { vars, .. } => vars.clone(),
        }
    }
}

type EnvKey = Vec<(u32, usize)>;

struct Engine<'m, 'a> {
    model: &'m Model,
    arena: &'a Arena,
    cfg: &'m EngineConfig,
    n: usize,
    env: Vec<Option<usize>>,
    memo_rel: HashMap<(usize, EnvKey), Lazy>,
    memo_term: HashMap<(usize, EnvKey), Rc<TermTable>>,
}

impl<'m, 'a> Engine<'m, 'a> {
    fn unassigned(&self, vars: &[u32]) -> Vec<u32> {
        vars.iter()
            .copied()
            .filter(|&v| self.env[v as usize].is_none())
            .collect()
    }

    fn env_key(&self, vars: &[u32]) -> EnvKey {
        vars.iter()
            .filter_map(|&v| self.env[v as usize].map(|val| (v, val)))
            .collect()
    }

    fn checked_space(&self, k: usize, cap: usize, unit: &'static str) -> Result<usize, EvalError> {
        space_size(self.n, k)
            .filter(|&s| s <= cap)
            .ok_or(EvalError::CapExceeded {
                needed: space_size(self.n, k).unwrap_or(usize::MAX),
                cap,
                unit,
            })
    }

    fn materialize(&self, lazy: Lazy) -> Result<Relation, EvalError> {
        match lazy {
            Lazy::Mat(r) => Ok(Rc::try_unwrap(r).unwrap_or_else(|rc| (*rc).clone())),
            Lazy::Uniform { vars, value } => Ok(Relation::new_uniform(vars, self.n, value)),
            Lazy::Product { a, b, negated } => {
                let mut r = a.product_and(&b).ok_or(EvalError::CapExceeded {
                    needed: usize::MAX,
                    cap: self.cfg.max_relation_bits,
                    unit: "bits",
                })?;
                if negated {
                    r.complement();
                }
                Ok(r)
            }
        }
    }

    fn eval_term_table(&mut self, id: usize) -> Result<Rc<TermTable>, EvalError> {
        let node = &self.arena.terms[id];
        let key = (id, self.env_key(&node.vars));
        if let Some(t) = self.memo_term.get(&key) {
            return Ok(t.clone());
        }
        let table = match &node.kind {
            TermKind::Var(v) => match self.env[*v as usize] {
                Some(val) => TermTable {
                    vars: vec![],
                    values: vec![val],
                },
                None => TermTable {
                    vars: vec![*v],
                    values: (0..self.n).collect(),
                },
            },
            TermKind::Value(e) => TermTable {
                vars: vec![],
                values: vec![*e],
            },
            TermKind::Apply { fun, args } => {
                let tables: Vec<Rc<TermTable>> = args
                    .iter()
                    .map(|&a| self.eval_term_table(a))
                    .collect::<Result<_, _>>()?;
                let vars = self.unassigned(&node.vars);
                let size = self.checked_space(vars.len(), self.cfg.max_term_entries, "term entries")?;
                let table = self
                    .model
                    .fun_table(fun)
                    .ok_or_else(|| EvalError::UnknownSymbol(fun.clone()))?;
                let weights: Vec<Vec<usize>> =
                    tables.iter().map(|t| table_weights(&vars, t, self.n)).collect();
                let k = vars.len();
                let mut digits = vec![0usize; k];
                let mut idxs = vec![0usize; tables.len()];
                let mut values = Vec::with_capacity(size);
                let mut argvals = vec![0usize; tables.len()];
                for step in 0..size {
                    let mut fidx = 0usize;
                    for (ti, t) in tables.iter().enumerate() {
                        argvals[ti] = t.values[idxs[ti]];
                        fidx = fidx * self.n + argvals[ti];
                    }
                    values.push(table.values[fidx]);
                    if step + 1 < size {
                        let mut pos = k - 1;
                        loop {
                            digits[pos] += 1;
                            for (ti, w) in weights.iter().enumerate() {
                                idxs[ti] += w[pos];
                            }
                            if digits[pos] < self.n {
                                break;
                            }
                            digits[pos] = 0;
                            for (ti, w) in weights.iter().enumerate() {
                                idxs[ti] -= self.n * w[pos];
                            }
                            pos -= 1;
                        }
                    }
                }
                TermTable { vars, values }
            }
        };
        let rc = Rc::new(table);
        self.memo_term.insert(key, rc.clone());
        Ok(rc)
    }

    fn eval_node(&mut self, id: usize) -> Result<Lazy, EvalError> {
        let free = self.arena.nodes[id].free.clone();
        let key = (id, self.env_key(&free));
        if let Some(l) = self.memo_rel.get(&key) {
            return Ok(l.clone());
        }
        let lazy = self.eval_node_uncached(id)?;
        let lazy = self.normalize(lazy);
        let cache_ok = match &lazy {
            Lazy::Mat(r) => r.size() <= self.cfg.max_memo_bits,
            Lazy::Product { a, b, .. } => a.size() <= self.cfg.max_memo_bits && b.size() <= self.cfg.max_memo_bits,
            Lazy::Uniform { .. } => true,
        };
        if cache_ok {
            self.memo_rel.insert(key, lazy.clone());
        }
        Ok(lazy)
    }

    /// Zero-variable relations become uniforms so the boolean simplifications
    /// can see them.
    fn normalize(&self, lazy: Lazy) -> Lazy {
        if let Lazy::Mat(r) = &lazy {
            if r.vars().is_empty() {
                return Lazy::Uniform {
                    vars: vec![],
                    value: r.get_tuple(&[]),
                };
            }
        }
        lazy
    }

    fn eval_node_uncached(&mut self, id: usize) -> Result<Lazy, EvalError> {
        match &self.arena.nodes[id].kind {
            NodeKind::Atomic { .. } => self.eval_atomic(id),
            NodeKind::Not(c) => {
                let child = self.eval_node(*c)?;
                Ok(match child {
                    Lazy::Uniform { vars, value } => Lazy::Uniform { vars, value: !value },
                    Lazy::Product { a, b, negated } => Lazy::Product {
                        a,
                        b,
                        negated: !negated,
                    },
                    Lazy::Mat(r) => {
                        let mut m = (*r).clone();
                        m.complement();
                        Lazy::Mat(Rc::new(m))
                    }
                })
            }
            NodeKind::Bin(op, a, b) => {
                let (op, a, b) = (*op, *a, *b);
                self.eval_binary(id, op, a, b)
            }
            NodeKind::Quant { .. } => self.eval_quant(id),
        }
    }

    fn eval_atomic(&mut self, id: usize) -> Result<Lazy, EvalError> {
        let (rel, args) = match &self.arena.nodes[id].kind {
            NodeKind::Atomic { rel, args } => (rel.clone(), args.clone()),
            _ => unreachable!(),
        };
        let vars = self.unassigned(&self.arena.nodes[id].free);
        let size = self.checked_space(vars.len(), self.cfg.max_relation_bits, "bits")?;
        let tables: Vec<Rc<TermTable>> = args
            .iter()
            .map(|&a| self.eval_term_table(a))
            .collect::<Result<_, _>>()?;
        let weights: Vec<Vec<usize>> = tables
            .iter()
            .map(|t| table_weights(&vars, t, self.n))
            .collect();
        let is_equality = rel == "=";
        let table = if is_equality {
            None
        } else {
            Some(
                self.model
                    .rel_table(&rel)
                    .ok_or_else(|| EvalError::UnknownSymbol(rel.clone()))?,
            )
        };

        let n = self.n;
        let k = vars.len();
        let mut out = Relation::new_uniform(vars, n, false);
        let mut digits = vec![0usize; k];
        let mut idxs = vec![0usize; tables.len()];
        for step in 0..size {
            let bit = if is_equality {
                tables[0].values[idxs[0]] == tables[1].values[idxs[1]]
            } else {
                let mut ridx = 0usize;
                for (ti, t) in tables.iter().enumerate() {
                    ridx = ridx * n + t.values[idxs[ti]];
                }
                table.unwrap().bits.get(ridx)
            };
            if bit {
                out.bits.set(step, true);
            }
            if step + 1 < size {
                let mut pos = k - 1;
                loop {
                    digits[pos] += 1;
                    for (ti, w) in weights.iter().enumerate() {
                        idxs[ti] += w[pos];
                    }
                    if digits[pos] < n {
                        break;
                    }
                    digits[pos] = 0;
                    for (ti, w) in weights.iter().enumerate() {
                        idxs[ti] -= n * w[pos];
                    }
                    pos -= 1;
                }
            }
        }
        Ok(Lazy::Mat(Rc::new(out)))
    }

    fn eval_binary(&mut self, id: usize, op: BoolOp, a: usize, b: usize) -> Result<Lazy, EvalError> {
        let la = self.eval_node(a)?;
        let lb = self.eval_node(b)?;
        let uvars = self.unassigned(&self.arena.nodes[id].free);

        // Uniform short circuits.
        if let Lazy::Uniform { value, .. } = la {
            return Ok(match (op, value) {
                (BoolOp::And, false) => Lazy::Uniform {
                    vars: uvars,
                    value: false,
                },
                (BoolOp::And, true) | (BoolOp::Iff, true) => self.cylindrify(lb, &uvars)?,
                (BoolOp::Or, true) => Lazy::Uniform {
                    vars: uvars,
                    value: true,
                },
                (BoolOp::Or, false) => self.cylindrify(lb, &uvars)?,
                (BoolOp::Implies, false) => Lazy::Uniform {
                    vars: uvars,
                    value: true,
                },
                (BoolOp::Implies, true) => self.cylindrify(lb, &uvars)?,
                (BoolOp::Iff, false) => {
                    let not_b = self.eval_lazy_not(lb);
                    self.cylindrify(not_b, &uvars)?
                }
            });
        }
        if let Lazy::Uniform { value, .. } = lb {
            return Ok(match (op, value) {
                (BoolOp::And, false) => Lazy::Uniform {
                    vars: uvars,
                    value: false,
                },
                (BoolOp::And, true) | (BoolOp::Iff, true) => self.cylindrify(la, &uvars)?,
                (BoolOp::Or, true) | (BoolOp::Implies, true) => Lazy::Uniform {
                    vars: uvars,
                    value: true,
                },
                (BoolOp::Or, false) => self.cylindrify(la, &uvars)?,
                (BoolOp::Implies, false) | (BoolOp::Iff, false) => {
                    let not_a = self.eval_lazy_not(la);
                    self.cylindrify(not_a, &uvars)?
                }
            });
        }

        let ra = Rc::new(self.materialize(la)?);
        let rb = Rc::new(self.materialize(lb)?);

        // Outer products for conjunction-like ops over disjoint ordered blocks.
        let disjoint_ordered = |x: &Relation, y: &Relation| {
            !x.vars().is_empty()
                && !y.vars().is_empty()
                && x.vars().last().unwrap() < y.vars().first().unwrap()
        };
        match op {
            BoolOp::And => {
                if disjoint_ordered(&ra, &rb) {
                    return Ok(Lazy::Product {
                        a: ra,
                        b: rb,
                        negated: false,
                    });
                }
                if disjoint_ordered(&rb, &ra) {
                    return Ok(Lazy::Product {
                        a: rb,
                        b: ra,
                        negated: false,
                    });
                }
            }
            BoolOp::Implies => {
                // a -> b == !(a & !b)
                if disjoint_ordered(&ra, &rb) {
                    let mut nb = (*rb).clone();
                    nb.complement();
                    return Ok(Lazy::Product {
                        a: ra,
                        b: Rc::new(nb),
                        negated: true,
                    });
                }
                if disjoint_ordered(&rb, &ra) {
                    let mut nb = (*rb).clone();
                    nb.complement();
                    return Ok(Lazy::Product {
                        a: Rc::new(nb),
                        b: ra,
                        negated: true,
                    });
                }
            }
            BoolOp::Or => {
                // a | b == !(!a & !b)
                if disjoint_ordered(&ra, &rb) || disjoint_ordered(&rb, &ra) {
                    let mut na = (*ra).clone();
                    na.complement();
                    let mut nb = (*rb).clone();
                    nb.complement();
                    let (x, y) = if disjoint_ordered(&ra, &rb) {
                        (na, nb)
                    } else {
                        (nb, na)
                    };
                    return Ok(Lazy::Product {
                        a: Rc::new(x),
                        b: Rc::new(y),
                        negated: true,
                    });
                }
            }
            BoolOp::Iff => {}
        }

        if ra.vars() == rb.vars() {
            return Ok(Lazy::Mat(Rc::new(ra.combine_same_vars(&rb, op))));
        }
        let union = sorted_union(ra.vars(), rb.vars());
        self.checked_space(union.len(), self.cfg.max_relation_bits, "bits")?;
        let out = ra
            .combine_general(&rb, op)
            .ok_or(EvalError::CapExceeded {
                needed: usize::MAX,
                cap: self.cfg.max_relation_bits,
                unit: "bits",
            })?;
        Ok(Lazy::Mat(Rc::new(out)))
    }

    fn eval_lazy_not(&self, lazy: Lazy) -> Lazy {
        match lazy {
            Lazy::Uniform { vars, value } => Lazy::Uniform { vars, value: !value },
            Lazy::Product { a, b, negated } => Lazy::Product {
                a,
                b,
                negated: !negated,
            },
            Lazy::Mat(r) => {
                let mut m = (*r).clone();
                m.complement();
                Lazy::Mat(Rc::new(m))
            }
        }
    }

    /// Extends a lazy relation to exactly the variable set `target` (sorted).
    fn cylindrify(&self, lazy: Lazy, target: &[u32]) -> Result<Lazy, EvalError> {
        if lazy.vars() == target {
            return Ok(lazy);
        }
        match lazy {
            Lazy::Uniform { value, .. } => Ok(Lazy::Uniform {
                vars: target.to_vec(),
                value,
            }),
            other => {
                let rel = self.materialize(other)?;
                self.checked_space(target.len(), self.cfg.max_relation_bits, "bits")?;
                Ok(Lazy::Mat(Rc::new(rel.materialize_over(target))))
            }
        }
    }

    fn eval_quant(&mut self, id: usize) -> Result<Lazy, EvalError> {
        // Collect the maximal block of same-flavor quantifiers.
        let universal = match self.arena.nodes[id].kind {
            NodeKind::Quant { universal, .. } => universal,
            _ => unreachable!(),
        };
        let mut block = Vec::new();
        let mut body = id;
        while let NodeKind::Quant {
            universal: u,
            var,
            body: b,
        } = self.arena.nodes[body].kind
        {
            if u != universal {
                break;
            }
            block.push(var);
            body = b;
        }

        let result_vars = self.unassigned(&self.arena.nodes[id].free);
        let body_free = self.unassigned(&self.arena.nodes[body].free);
        let body_size = space_size(self.n, body_free.len());

        let materializable = body_size
            .map(|s| s <= self.cfg.materialize_threshold_bits)
            .unwrap_or(false);
        let stream_vars: Vec<u32> = block
            .iter()
            .copied()
            .filter(|v| body_free.contains(v))
            .collect();

        if materializable || stream_vars.is_empty() {
            let size = self.checked_space(body_free.len(), self.cfg.max_relation_bits, "bits")?;
            let _ = size;
            let lazy = self.eval_node(body)?;
            let mut rel = self.materialize(lazy)?;
            for &q in &stream_vars {
                rel = rel.eliminate(q, universal);
            }
            debug_assert_eq!(rel.vars(), &result_vars[..]);
            return Ok(Lazy::Mat(Rc::new(rel)));
        }

        // Stream the block: enumerate assignments, fold the body results.
        let assignments = space_size(self.n, stream_vars.len())
            .filter(|&s| s <= self.cfg.max_stream_assignments)
            .ok_or(EvalError::CapExceeded {
                needed: space_size(self.n, stream_vars.len()).unwrap_or(usize::MAX),
                cap: self.cfg.max_stream_assignments,
                unit: "assignments",
            })?;
        self.checked_space(result_vars.len(), self.cfg.max_relation_bits, "bits")?;
        let mut acc = Relation::new_uniform(result_vars.clone(), self.n, universal);
        let check_early_exit = acc.size() <= (1 << 23);
        let mut digits = vec![0usize; stream_vars.len()];
        let mut done = false;
        for step in 0..assignments {
            for (i, &v) in stream_vars.iter().enumerate() {
                self.env[v as usize] = Some(digits[i]);
            }
            let lazy = self.eval_node(body)?;
            let early = self.fold_into(&mut acc, lazy, universal)?;
            if early || (check_early_exit && step % 64 == 63 && fold_saturated(&acc, universal)) {
                done = true;
            }
            if step + 1 < assignments {
                increment(&mut digits, self.n);
            }
            if done {
                break;
            }
        }
        for &v in &stream_vars {
            self.env[v as usize] = None;
        }
        Ok(Lazy::Mat(Rc::new(acc)))
    }

    /// Folds one streamed body result into the accumulator. Returns true when
    /// the fold is saturated and iteration can stop.
    fn fold_into(&self, acc: &mut Relation, lazy: Lazy, universal: bool) -> Result<bool, EvalError> {
        match lazy {
            Lazy::Uniform { value, .. } => {
                if universal && !value {
                    *acc = Relation::new_uniform(acc.vars().to_vec(), self.n, false);
                    Ok(true)
                } else if !universal && value {
                    *acc = Relation::new_uniform(acc.vars().to_vec(), self.n, true);
                    Ok(true)
                } else {
                    Ok(false)
                }
            }
            Lazy::Product { a, b, negated } => {
                debug_assert_eq!(
                    {
                        let mut v = a.vars().to_vec();
                        v.extend_from_slice(b.vars());
                        v
                    },
                    acc.vars().to_vec()
                );
                match (universal, negated) {
                    (true, true) => Relation::andnot_product_into(acc, &a, &b),
                    (true, false) => Relation::and_product_into(acc, &a, &b),
                    (false, false) => Relation::or_product_into(acc, &a, &b),
                    (false, true) => {
                        let rel = self.materialize(Lazy::Product { a, b, negated })?;
                        acc.bits.or_assign(&rel.bits);
                    }
                }
                Ok(false)
            }
            Lazy::Mat(r) => {
                debug_assert_eq!(r.vars(), acc.vars());
                if universal {
                    acc.bits.and_assign(&r.bits);
                } else {
                    acc.bits.or_assign(&r.bits);
                }
                Ok(false)
            }
        }
    }
}

fn fold_saturated(acc: &Relation, universal: bool) -> bool {
    if universal {
        acc.is_empty_set()
    } else {
        acc.is_full_set()
    }
}

/// Weight of each position of `space_vars` within a term table's index
/// (0 when the table does not depend on that variable).
fn table_weights(space_vars: &[u32], table: &TermTable, n: usize) -> Vec<usize> {
    let k = table.vars.len();
    let mut w = vec![1usize; k];
    for j in (0..k.saturating_sub(1)).rev() {
        w[j] = w[j + 1] * n;
    }
    space_vars
        .iter()
        .map(|v| {
            table
                .vars
                .iter()
                .position(|x| x == v)
                .map(|p| w[p])
                .unwrap_or(0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, Signature};
    use crate::model::structure::{eval_formula, Assignment};

    #[test]
    fn solution_set_of_reflexivity_is_full_domain() {
        let m = Model::chain(4);
        let f = parse_formula("x = x", m.signature()).unwrap();
        let s = solution_set(&m, &f, &["x"]).unwrap();
        assert_eq!(s.tuples.len(), 4);
    }

    #[test]
    fn dlo_initial_segment() {
        // 0 < 1 < 2 < 3 < 4; x < 2 has solutions {0, 1}.
        let m = Model::chain(5);
        let f = parse_formula("x < 2", m.signature()).unwrap();
        let s = solution_set(&m, &f, &["x"]).unwrap();
        let got: Vec<Vec<usize>> = s.tuples.iter().cloned().collect();
        assert_eq!(got, vec![vec![0], vec![1]]);
        assert_eq!(s.parameters, vec![2]);
    }

    #[test]
    fn z5_quadratic_residue_pairs_by_brute_force() {
        let m = Model::modular_ring(5);
        let f = parse_formula("exists x. y + x*x = z", m.signature()).unwrap();
        let s = solution_set(&m, &f, &["y", "z"]).unwrap();
        // Oracle: brute force over all 25 pairs with the naive evaluator.
        let mut expected = std::collections::BTreeSet::new();
        for a in 0..5 {
            for b in 0..5 {
                let mut asg = Assignment::new();
                asg.insert("y".into(), a);
                asg.insert("z".into(), b);
                if eval_formula(&m, &f, &asg).unwrap() {
                    expected.insert(vec![a, b]);
                }
            }
        }
        assert_eq!(s.tuples, expected);
        // Quadratic residues mod 5 are {0, 1, 4}.
        for t in &s.tuples {
            assert!([0usize, 1, 4].contains(&((5 + t[1] - t[0]) % 5)));
        }
        assert_eq!(s.tuples.len(), 15);
    }

    #[test]
    fn requested_vars_may_exceed_free_vars() {
        let m = Model::chain(3);
        let f = parse_formula("x < 1", m.signature()).unwrap();
        let s = solution_set(&m, &f, &["x", "y"]).unwrap();
        assert_eq!(s.tuples.len(), 3);
        assert!(s.tuples.contains(&vec![0, 2]));
    }

    #[test]
    fn vars_must_cover_free_vars() {
        let m = Model::chain(3);
        let f = parse_formula("x < y", m.signature()).unwrap();
        assert!(matches!(
            solution_set(&m, &f, &["x"]),
            Err(EvalError::VarsDontCoverFree { .. })
        ));
    }

    #[test]
    fn engine_agrees_with_naive_evaluator_on_sentences() {
        let m = Model::modular_ring(3);
        for text in [
            "forall x. x + 0 = x",
            "exists x. x * x = 1 + 1",
            "forall x. exists y. x + y = 0",
            "forall x. forall y. x * y = y * x",
            "exists x. !(x = 0) & x * x = 0",
            "forall x. (exists y. y + y = x) -> x = x",
        ] {
            let f = parse_formula(text, m.signature()).unwrap();
            let naive = eval_formula(&m, &f, &Assignment::new()).unwrap();
            assert_eq!(m.sat(&f).unwrap(), naive, "disagreement on {text}");
        }
    }

    #[test]
    fn shadowed_quantifier_variables_are_independent() {
        let m = Model::chain(3);
        // forall x. (exists x. x < 1) — inner x rebinds; sentence is true.
        let f = parse_formula("forall x. (exists x. x < 1)", m.signature()).unwrap();
        assert!(m.sat(&f).unwrap());
        let naive = eval_formula(&m, &f, &Assignment::new()).unwrap();
        assert!(naive);
    }

    #[test]
    fn streaming_path_matches_materialized_path() {
        let m = Model::modular_ring(3);
        let f = parse_formula(
            "forall x. forall y. exists z. x + z = y & z * 1 = z",
            m.signature(),
        )
        .unwrap();
        let default = m.sat(&f).unwrap();
        let tiny = EngineConfig {
            materialize_threshold_bits: 1,
            ..EngineConfig::default()
        };
        assert_eq!(m.sat_with(&f, &tiny).unwrap(), default);
    }

    #[test]
    fn non_sentence_rejected_by_sat() {
        let m = Model::chain(2);
        let f = parse_formula("x < 1", m.signature()).unwrap();
        assert!(matches!(m.sat(&f), Err(EvalError::NotASentence(_))));
    }

    #[test]
    fn element_literal_out_of_range() {
        let m = Model::chain(2);
        let f = parse_formula("x < 7", m.signature()).unwrap();
        assert!(matches!(
            solution_set(&m, &f, &["x"]),
            Err(EvalError::ElementOutOfRange { element: 7, .. })
        ));
    }

    #[test]
    fn small_ax_sentence_true_in_prime_fields() {
        let phi = crate::logic::build_ax_sentence(1, 1).unwrap();
        for p in [2usize, 3] {
            let m = Model::modular_ring(p);
            assert!(m.sat(&phi).unwrap(), "phi_1_1 false in F_{p}");
            let naive = eval_formula(&m, &phi, &Assignment::new()).unwrap();
            assert!(naive);
        }
    }

    #[test]
    fn ax_sentence_false_in_non_field() {
        // In Z/4 the map x -> 2x is not injective... but it is also not
        // surjective, so phi_1_1 needs a genuinely injective non-surjective
        // witness to fail; no such thing exists on a finite domain, so
        // phi_1_1 is true even in Z/4. The engine must confirm that.
        let m = Model::modular_ring(4);
        let phi = crate::logic::build_ax_sentence(1, 1).unwrap();
        assert!(m.sat(&phi).unwrap());
    }
}
