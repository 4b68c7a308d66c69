//! Finite structures: a domain `0..size` plus interpretations of the
//! signature's symbols, and the direct Tarskian evaluator.

use std::collections::BTreeMap;

use thiserror::Error;

use super::relation::{space_size, Bits};
use crate::logic::{Formula, Signature, Term};

/// A partial map from variable names to elements.
pub type Assignment = BTreeMap<String, usize>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("domain must be nonempty")]
    EmptyDomain,
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("tuple {tuple:?} for `{symbol}` out of range (domain size {size})")]
    TupleOutOfRange {
        symbol: String,
        tuple: Vec<usize>,
        size: usize,
    },
    #[error("tuple {tuple:?} has wrong arity for `{symbol}` (expected {expected})")]
    ArityMismatch {
        symbol: String,
        tuple: Vec<usize>,
        expected: usize,
    },
    #[error("function redefinition: `{symbol}` at {tuple:?}")]
    FunctionRedefinition { symbol: String, tuple: Vec<usize> },
    #[error("missing function value: `{symbol}` at {tuple:?}")]
    MissingFunctionValue { symbol: String, tuple: Vec<usize> },
    #[error("constant `{0}` defined twice")]
    ConstantRedefinition(String),
    #[error("constant `{0}` has no value")]
    MissingConstant(String),
    #[error("the equality relation is built in and cannot be given tuples")]
    EqualityRedefined,
    #[error("interpretation table for `{symbol}` would need {needed} entries, above the cap")]
    TableTooLarge { symbol: String, needed: usize },
    #[error("line {line}: {message}")]
    Malformed { message: String, line: usize },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable `{0}` is not assigned")]
    UnassignedVariable(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("element literal {element} out of range (domain size {size})")]
    ElementOutOfRange { element: usize, size: usize },
    #[error("formula has free variables {0:?}, expected a sentence")]
    NotASentence(Vec<String>),
    #[error("requested variables {vars:?} do not cover free variables {free:?}")]
    VarsDontCoverFree { vars: Vec<String>, free: Vec<String> },
    #[error("evaluation would materialize {needed} {unit}, above the cap {cap}; raise the cap or shrink the instance")]
    CapExceeded {
        needed: usize,
        cap: usize,
        unit: &'static str,
    },
    #[error("solution set has more than {cap} tuples")]
    TupleCapExceeded { cap: usize },
    #[error("duplicate variable `{0}` in requested variable list")]
    DuplicateVar(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RelTable {
    pub arity: usize,
    pub bits: Bits,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct FunTable {
    pub arity: usize,
    pub values: Vec<usize>,
}

/// A finite model: domain `0..size` with interpretations for every symbol of
/// the signature. Equality is interpreted as true equality and never stored.
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    sig: Signature,
    size: usize,
    relations: BTreeMap<String, RelTable>,
    functions: BTreeMap<String, FunTable>,
    constants: BTreeMap<String, usize>,
}

/// Maximum entries in a single interpretation table.
const TABLE_CAP: usize = 1 << 28;

impl Model {
    pub fn builder(sig: Signature, size: usize) -> ModelBuilder {
        ModelBuilder {
            sig,
            size,
            relations: BTreeMap::new(),
            functions: BTreeMap::new(),
            constants: BTreeMap::new(),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub(crate) fn rel_table(&self, name: &str) -> Option<&RelTable> {
        self.relations.get(name)
    }

    pub(crate) fn fun_table(&self, name: &str) -> Option<&FunTable> {
        self.functions.get(name)
    }

    pub fn constant_value(&self, name: &str) -> Option<usize> {
        self.constants.get(name).copied()
    }

    /// Whether the relation holds of the tuple; `=` is true equality.
    pub fn rel_holds(&self, name: &str, tuple: &[usize]) -> Result<bool, EvalError> {
        if name == "=" {
            if tuple.len() != 2 {
                return Err(EvalError::ArityMismatch {
                    symbol: "=".into(),
                    expected: 2,
                    got: tuple.len(),
                });
            }
            return Ok(tuple[0] == tuple[1]);
        }
        let table = self
            .relations
            .get(name)
            .ok_or_else(|| EvalError::UnknownSymbol(name.to_string()))?;
        if table.arity != tuple.len() {
            return Err(EvalError::ArityMismatch {
                symbol: name.to_string(),
                expected: table.arity,
                got: tuple.len(),
            });
        }
        Ok(table.bits.get(table_index(self.size, tuple)))
    }

    pub fn fun_value(&self, name: &str, args: &[usize]) -> Result<usize, EvalError> {
        let table = self
            .functions
            .get(name)
            .ok_or_else(|| EvalError::UnknownSymbol(name.to_string()))?;
        if table.arity != args.len() {
            return Err(EvalError::ArityMismatch {
                symbol: name.to_string(),
                expected: table.arity,
                got: args.len(),
            });
        }
        Ok(table.values[table_index(self.size, args)])
    }

    /// The ring of integers mod `m` over `{+, *, 0, 1}`.
    pub fn modular_ring(m: usize) -> Model {
        assert!(m >= 1);
        let mut b = Model::builder(Signature::ring(), m);
        for x in 0..m {
            for y in 0..m {
                b.set_function("+", &[x, y], (x + y) % m).unwrap();
                b.set_function("*", &[x, y], (x * y) % m).unwrap();
            }
        }
        b.set_constant("0", 0).unwrap();
        b.set_constant("1", 1 % m).unwrap();
        b.finish().unwrap()
    }

    /// The linear order 0 < 1 < ... < size-1 over `{<}`.
    pub fn chain(size: usize) -> Model {
        let mut b = Model::builder(Signature::linear_order(), size);
        for x in 0..size {
            for y in x + 1..size {
                b.add_rel_tuple("<", &[x, y]).unwrap();
            }
        }
        b.finish().unwrap()
    }
}

fn table_index(n: usize, tuple: &[usize]) -> usize {
    let mut idx = 0;
    for &t in tuple {
        debug_assert!(t < n);
        idx = idx * n + t;
    }
    idx
}

pub struct ModelBuilder {
    sig: Signature,
    size: usize,
    relations: BTreeMap<String, RelTable>,
    functions: BTreeMap<String, FunTable>,
    // Option so redefinition can be told apart from the default.
    constants: BTreeMap<String, usize>,
}

impl ModelBuilder {
    fn check_tuple(&self, symbol: &str, tuple: &[usize], arity: usize) -> Result<(), ModelError> {
        if tuple.len() != arity {
            return Err(ModelError::ArityMismatch {
                symbol: symbol.to_string(),
                tuple: tuple.to_vec(),
                expected: arity,
            });
        }
        if tuple.iter().any(|&t| t >= self.size) {
            return Err(ModelError::TupleOutOfRange {
                symbol: symbol.to_string(),
                tuple: tuple.to_vec(),
                size: self.size,
            });
        }
        Ok(())
    }

    fn table_size(&self, symbol: &str, arity: usize) -> Result<usize, ModelError> {
        space_size(self.size, arity)
            .filter(|&s| s <= TABLE_CAP)
            .ok_or_else(|| ModelError::TableTooLarge {
                symbol: symbol.to_string(),
                needed: usize::MAX,
            })
    }

    pub fn add_rel_tuple(&mut self, name: &str, tuple: &[usize]) -> Result<(), ModelError> {
        if name == "=" {
            return Err(ModelError::EqualityRedefined);
        }
        let decl = self
            .sig
            .relation(name)
            .ok_or_else(|| ModelError::UnknownSymbol(name.to_string()))?;
        self.check_tuple(name, tuple, decl.arity)?;
        let size = self.table_size(name, decl.arity)?;
        let table = self.relations.entry(name.to_string()).or_insert_with(|| RelTable {
            arity: decl.arity,
            bits: Bits::new(size, false),
        });
        table.bits.set(table_index(self.size, tuple), true);
        Ok(())
    }

    pub fn set_function(&mut self, name: &str, args: &[usize], value: usize) -> Result<(), ModelError> {
        let decl = self
            .sig
            .function(name)
            .ok_or_else(|| ModelError::UnknownSymbol(name.to_string()))?;
        self.check_tuple(name, args, decl.arity)?;
        if value >= self.size {
            return Err(ModelError::TupleOutOfRange {
                symbol: name.to_string(),
                tuple: vec![value],
                size: self.size,
            });
        }
        let size = self.table_size(name, decl.arity)?;
        let table = self
            .functions
            .entry(name.to_string())
            .or_insert_with(|| FunTable {
                arity: decl.arity,
                values: vec![usize::MAX; size],
            });
        let idx = table_index(self.size, args);
        if table.values[idx] != usize::MAX {
            return Err(ModelError::FunctionRedefinition {
                symbol: name.to_string(),
                tuple: args.to_vec(),
            });
        }
        table.values[idx] = value;
        Ok(())
    }

    pub fn set_constant(&mut self, name: &str, value: usize) -> Result<(), ModelError> {
        if !self.sig.is_constant(name) {
            return Err(ModelError::UnknownSymbol(name.to_string()));
        }
        if value >= self.size {
            return Err(ModelError::TupleOutOfRange {
                symbol: name.to_string(),
                tuple: vec![value],
                size: self.size,
            });
        }
        if self.constants.insert(name.to_string(), value).is_some() {
            return Err(ModelError::ConstantRedefinition(name.to_string()));
        }
        Ok(())
    }

    /// Validates totality of functions and presence of constants.
    pub fn finish(mut self) -> Result<Model, ModelError> {
        if self.size == 0 {
            return Err(ModelError::EmptyDomain);
        }
        // Relations may be empty; materialize empty tables for undeclared ones.
        let rel_names: Vec<String> = self.sig.relation_names().map(String::from).collect();
        for name in rel_names {
            let decl = self.sig.relation(&name).unwrap();
            let size = self.table_size(&name, decl.arity)?;
            self.relations.entry(name.clone()).or_insert_with(|| RelTable {
                arity: decl.arity,
                bits: Bits::new(size, false),
            });
        }
        let fun_names: Vec<String> = self.sig.function_names().map(String::from).collect();
        for name in fun_names {
            let decl = self.sig.function(&name).unwrap();
            match self.functions.get(&name) {
                None => {
                    return Err(ModelError::MissingFunctionValue {
                        symbol: name,
                        tuple: vec![0; decl.arity],
                    })
                }
                Some(table) => {
                    if let Some(idx) = table.values.iter().position(|&v| v == usize::MAX) {
                        let mut tuple = vec![0usize; decl.arity];
                        let mut i = idx;
                        for p in (0..decl.arity).rev() {
                            tuple[p] = i % self.size;
                            i /= self.size;
                        }
                        return Err(ModelError::MissingFunctionValue {
                            symbol: name,
                            tuple,
                        });
                    }
                }
            }
        }
        for name in self.sig.constant_names() {
            if !self.constants.contains_key(name) {
                return Err(ModelError::MissingConstant(name.to_string()));
            }
        }
        Ok(Model {
            sig: self.sig,
            size: self.size,
            relations: self.relations,
            functions: self.functions,
            constants: self.constants,
        })
    }
}

/// Loads a model from its text format:
///
/// ```text
/// # comment
/// model 5
/// rel E: (0,1) (1,2)
/// fun +: (0,0)->0 (0,1)->1 ...
/// const 0 = 0
/// ```
///
/// Whitespace is insignificant beyond separating words.
pub fn load_model(text: &str, sig: &Signature) -> Result<Model, ModelError> {
    let mut words: Vec<(String, usize)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut cur = String::new();
        for c in line.chars() {
            if c.is_whitespace() {
                if !cur.is_empty() {
                    words.push((cur.clone(), lineno + 1));
                    cur.clear();
                }
            } else if matches!(c, '(' | ')' | ',') {
                if !cur.is_empty() {
                    words.push((cur.clone(), lineno + 1));
                    cur.clear();
                }
                words.push((c.to_string(), lineno + 1));
            } else {
                cur.push(c);
                // `->` after a tuple, possibly glued to the value.
                if cur.ends_with("->") {
                    let head = cur[..cur.len() - 2].to_string();
                    if !head.is_empty() {
                        words.push((head, lineno + 1));
                    }
                    words.push(("->".to_string(), lineno + 1));
                    cur.clear();
                }
            }
        }
        if !cur.is_empty() {
            words.push((cur, lineno + 1));
        }
    }

    let mut p = FileParser { words, pos: 0 };
    let kw = p.next_word()?;
    if kw.0 != "model" {
        return Err(ModelError::Malformed {
            message: format!("expected `model SIZE`, got `{}`", kw.0),
            line: kw.1,
        });
    }
    let size = p.next_number()?;
    if size == 0 {
        return Err(ModelError::EmptyDomain);
    }
    let mut b = Model::builder(sig.clone(), size);
    while let Some((word, line)) = p.peek() {
        match word.as_str() {
            "rel" => {
                p.advance();
                let name = p.next_word()?.0;
                let name = name.strip_suffix(':').unwrap_or(&name).to_string();
                while p.at_tuple() {
                    let tuple = p.next_tuple()?;
                    b.add_rel_tuple(&name, &tuple)?;
                }
            }
            "fun" => {
                p.advance();
                let name = p.next_word()?.0;
                let name = name.strip_suffix(':').unwrap_or(&name).to_string();
                while p.at_tuple() {
                    let args = p.next_tuple()?;
                    p.expect("->")?;
                    let value = p.next_number()?;
                    b.set_function(&name, &args, value)?;
                }
            }
            "const" => {
                p.advance();
                let name = p.next_word()?.0;
                p.expect("=")?;
                let value = p.next_number()?;
                b.set_constant(&name, value)?;
            }
            other => {
                return Err(ModelError::Malformed {
                    message: format!("expected `rel`, `fun`, or `const`, got `{other}`"),
                    line: *line,
                });
            }
        }
    }
    b.finish()
}

struct FileParser {
    words: Vec<(String, usize)>,
    pos: usize,
}

impl FileParser {
    fn peek(&self) -> Option<&(String, usize)> {
        self.words.get(self.pos)
    }

    fn advance(&mut self) {
        self.pos += 1;
    }

    fn line(&self) -> usize {
        self.words
            .get(self.pos.min(self.words.len().saturating_sub(1)))
            .map(|w| w.1)
            .unwrap_or(0)
    }

    fn next_word(&mut self) -> Result<(String, usize), ModelError> {
        let w = self.words.get(self.pos).cloned().ok_or(ModelError::Malformed {
            message: "unexpected end of file".into(),
            line: self.line(),
        })?;
        self.pos += 1;
        Ok(w)
    }

    fn next_number(&mut self) -> Result<usize, ModelError> {
        let (w, line) = self.next_word()?;
        w.parse().map_err(|_| ModelError::Malformed {
            message: format!("expected a number, got `{w}`"),
            line,
        })
    }

    fn expect(&mut self, token: &str) -> Result<(), ModelError> {
        let (w, line) = self.next_word()?;
        if w == token {
            Ok(())
        } else {
            Err(ModelError::Malformed {
                message: format!("expected `{token}`, got `{w}`"),
                line,
            })
        }
    }

    fn at_tuple(&self) -> bool {
        self.peek().map(|w| w.0 == "(").unwrap_or(false)
    }

    fn next_tuple(&mut self) -> Result<Vec<usize>, ModelError> {
        self.expect("(")?;
        let mut out = vec![self.next_number()?];
        loop {
            let (w, line) = self.next_word()?;
            match w.as_str() {
                ")" => return Ok(out),
                "," => out.push(self.next_number()?),
                other => {
                    return Err(ModelError::Malformed {
                        message: format!("expected `,` or `)`, got `{other}`"),
                        line,
                    })
                }
            }
        }
    }
}

/// Evaluates a term under an assignment covering its variables.
pub fn eval_term(model: &Model, term: &Term, assignment: &Assignment) -> Result<usize, EvalError> {
    match term {
        Term::Var(v) => assignment
            .get(v)
            .copied()
            .ok_or_else(|| EvalError::UnassignedVariable(v.clone())),
        Term::Const(c) => model
            .constant_value(c)
            .ok_or_else(|| EvalError::UnknownSymbol(c.clone())),
        Term::Element(e) => {
            if *e < model.size() {
                Ok(*e)
            } else {
                Err(EvalError::ElementOutOfRange {
                    element: *e,
                    size: model.size(),
                })
            }
        }
        Term::Apply(f, args) => {
            let vals: Vec<usize> = args
                .iter()
                .map(|a| eval_term(model, a, assignment))
                .collect::<Result<_, _>>()?;
            model.fun_value(f, &vals)
        }
    }
}

/// Direct Tarskian satisfaction: quantifiers range over the whole domain.
/// This is the reference evaluator; the solution-set engine must agree with
/// it pointwise.
pub fn eval_formula(
    model: &Model,
    formula: &Formula,
    assignment: &Assignment,
) -> Result<bool, EvalError> {
    let mut scope = assignment.clone();
    eval_rec(model, formula, &mut scope)
}

fn eval_rec(model: &Model, formula: &Formula, scope: &mut Assignment) -> Result<bool, EvalError> {
    match formula {
        Formula::Atomic(r, terms) => {
            let vals: Vec<usize> = terms
                .iter()
                .map(|t| eval_term(model, t, scope))
                .collect::<Result<_, _>>()?;
            model.rel_holds(r, &vals)
        }
        Formula::Not(f) => Ok(!eval_rec(model, f, scope)?),
        Formula::And(a, b) => Ok(eval_rec(model, a, scope)? && eval_rec(model, b, scope)?),
        Formula::Or(a, b) => Ok(eval_rec(model, a, scope)? || eval_rec(model, b, scope)?),
        Formula::Implies(a, b) => Ok(!eval_rec(model, a, scope)? || eval_rec(model, b, scope)?),
        Formula::Iff(a, b) => Ok(eval_rec(model, a, scope)? == eval_rec(model, b, scope)?),
        Formula::ForAll(v, body) => {
            let saved = scope.get(v).copied();
            for e in 0..model.size() {
                scope.insert(v.clone(), e);
                if !eval_rec(model, body, scope)? {
                    restore(scope, v, saved);
                    return Ok(false);
                }
            }
            restore(scope, v, saved);
            Ok(true)
        }
        Formula::Exists(v, body) => {
            let saved = scope.get(v).copied();
            for e in 0..model.size() {
                scope.insert(v.clone(), e);
                if eval_rec(model, body, scope)? {
                    restore(scope, v, saved);
                    return Ok(true);
                }
            }
            restore(scope, v, saved);
            Ok(false)
        }
    }
}

fn restore(scope: &mut Assignment, var: &str, saved: Option<usize>) {
    match saved {
        Some(v) => {
            scope.insert(var.to_string(), v);
        }
        None => {
            scope.remove(var);
        }
    }
}
