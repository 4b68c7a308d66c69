//! Abstract syntax of terms and formulas.

use std::collections::BTreeSet;

use super::signature::Signature;

/// A term: an elaborate name for an element.
///
/// `Element` is a literal element index of a finite structure; numerals in
/// the concrete syntax resolve to a declared constant of that name when one
/// exists and to an element literal otherwise. Element literals are how
/// parameters from a model enter formulas.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
    Element(usize),
    Apply(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(name.to_string())
    }

    pub fn apply(name: &str, args: Vec<Term>) -> Term {
        Term::Apply(name.to_string(), args)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) | Term::Element(_) => {}
            Term::Apply(_, args) => {
                for a in args {
                    a.collect_variables(out);
                }
            }
        }
    }

    /// Element literals occurring anywhere in the term.
    pub fn element_literals(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_elements(&mut out);
        out
    }

    fn collect_elements(&self, out: &mut BTreeSet<usize>) {
        match self {
            Term::Element(e) => {
                out.insert(*e);
            }
            Term::Var(_) | Term::Const(_) => {}
            Term::Apply(_, args) => {
                for a in args {
                    a.collect_elements(out);
                }
            }
        }
    }

    fn substitute(&self, var: &str, replacement: &Term) -> Term {
        match self {
            Term::Var(v) if v == var => replacement.clone(),
            Term::Var(_) | Term::Const(_) | Term::Element(_) => self.clone(),
            Term::Apply(f, args) => Term::Apply(
                f.clone(),
                args.iter().map(|a| a.substitute(var, replacement)).collect(),
            ),
        }
    }

    fn rename_var(&self, from: &str, to: &str) -> Term {
        self.substitute(from, &Term::Var(to.to_string()))
    }

    /// Checks symbols and arities against a signature.
    pub fn validate(&self, sig: &Signature) -> Result<(), String> {
        match self {
            Term::Var(_) | Term::Element(_) => Ok(()),
            Term::Const(c) => {
                if sig.is_constant(c) {
                    Ok(())
                } else {
                    Err(format!("unknown constant `{c}`"))
                }
            }
            Term::Apply(f, args) => {
                let decl = sig
                    .function(f)
                    .ok_or_else(|| format!("unknown function `{f}`"))?;
                if decl.arity != args.len() {
                    return Err(format!(
                        "function `{f}` has arity {}, applied to {} arguments",
                        decl.arity,
                        args.len()
                    ));
                }
                for a in args {
                    a.validate(sig)?;
                }
                Ok(())
            }
        }
    }
}

/// A first-order formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atomic(String, Vec<Term>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    ForAll(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn atomic(rel: &str, terms: Vec<Term>) -> Formula {
        Formula::Atomic(rel.to_string(), terms)
    }

    pub fn equal(lhs: Term, rhs: Term) -> Formula {
        Formula::Atomic("=".to_string(), vec![lhs, rhs])
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Formula {
        Formula::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn iff(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Iff(Box::new(lhs), Box::new(rhs))
    }

    pub fn forall(var: &str, body: Formula) -> Formula {
        Formula::ForAll(var.to_string(), Box::new(body))
    }

    pub fn exists(var: &str, body: Formula) -> Formula {
        Formula::Exists(var.to_string(), Box::new(body))
    }

    /// Left-associated conjunction of a nonempty list.
    pub fn conjoin(mut fs: Vec<Formula>) -> Formula {
        assert!(!fs.is_empty(), "conjoin of empty list");
        let mut acc = fs.remove(0);
        for f in fs {
            acc = Formula::and(acc, f);
        }
        acc
    }

    /// The free variables, by the standard inductive definition.
    pub fn free_variables(&self) -> BTreeSet<String> {
        match self {
            Formula::Atomic(_, terms) => {
                let mut out = BTreeSet::new();
                for t in terms {
                    t.collect_variables(&mut out);
                }
                out
            }
            Formula::Not(f) => f.free_variables(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                let mut out = a.free_variables();
                out.extend(b.free_variables());
                out
            }
            Formula::ForAll(v, f) | Formula::Exists(v, f) => {
                let mut out = f.free_variables();
                out.remove(v);
                out
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Maximum nesting depth of quantifiers.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::Atomic(_, _) => 0,
            Formula::Not(f) => f.quantifier_rank(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.quantifier_rank().max(b.quantifier_rank()),
            Formula::ForAll(_, f) | Formula::Exists(_, f) => 1 + f.quantifier_rank(),
        }
    }

    /// All variable names occurring in the formula, free or bound.
    fn all_variables(&self) -> BTreeSet<String> {
        match self {
            Formula::Atomic(_, terms) => {
                let mut out = BTreeSet::new();
                for t in terms {
                    t.collect_variables(&mut out);
                }
                out
            }
            Formula::Not(f) => f.all_variables(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                let mut out = a.all_variables();
                out.extend(b.all_variables());
                out
            }
            Formula::ForAll(v, f) | Formula::Exists(v, f) => {
                let mut out = f.all_variables();
                out.insert(v.clone());
                out
            }
        }
    }

    pub fn element_literals(&self) -> BTreeSet<usize> {
        match self {
            Formula::Atomic(_, terms) => {
                let mut out = BTreeSet::new();
                for t in terms {
                    t.collect_elements(&mut out);
                }
                out
            }
            Formula::Not(f) => f.element_literals(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                let mut out = a.element_literals();
                out.extend(b.element_literals());
                out
            }
            Formula::ForAll(_, f) | Formula::Exists(_, f) => f.element_literals(),
        }
    }

    /// Capture-avoiding substitution of `replacement` for free occurrences of
    /// `var`. Bound variables are renamed with a prime-appending scheme when
    /// capture would occur.
    pub fn substitute(&self, var: &str, replacement: &Term) -> Formula {
        let replacement_vars = replacement.variables();
        self.substitute_inner(var, replacement, &replacement_vars)
    }

    fn substitute_inner(
        &self,
        var: &str,
        replacement: &Term,
        replacement_vars: &BTreeSet<String>,
    ) -> Formula {
        match self {
            Formula::Atomic(r, terms) => Formula::Atomic(
                r.clone(),
                terms.iter().map(|t| t.substitute(var, replacement)).collect(),
            ),
            Formula::Not(f) => {
                Formula::not(f.substitute_inner(var, replacement, replacement_vars))
            }
            Formula::And(a, b) => Formula::and(
                a.substitute_inner(var, replacement, replacement_vars),
                b.substitute_inner(var, replacement, replacement_vars),
            ),
            Formula::Or(a, b) => Formula::or(
                a.substitute_inner(var, replacement, replacement_vars),
                b.substitute_inner(var, replacement, replacement_vars),
            ),
            Formula::Implies(a, b) => Formula::implies(
                a.substitute_inner(var, replacement, replacement_vars),
                b.substitute_inner(var, replacement, replacement_vars),
            ),
            Formula::Iff(a, b) => Formula::iff(
                a.substitute_inner(var, replacement, replacement_vars),
                b.substitute_inner(var, replacement, replacement_vars),
            ),
            Formula::ForAll(v, body) => {
                let (v, body) =
                    prepare_quantifier(v, body, var, replacement, replacement_vars);
                Formula::ForAll(v, Box::new(body))
            }
            Formula::Exists(v, body) => {
                let (v, body) =
                    prepare_quantifier(v, body, var, replacement, replacement_vars);
                Formula::Exists(v, Box::new(body))
            }
        }
    }
}

/// Handles the quantifier case of substitution: stop at shadowing binders and
/// rename the bound variable when the replacement would capture it.
fn prepare_quantifier(
    bound: &str,
    body: &Formula,
    var: &str,
    replacement: &Term,
    replacement_vars: &BTreeSet<String>,
) -> (String, Formula) {
    if bound == var {
        // The binder shadows `var`; nothing to substitute below.
        return (bound.to_string(), (*body).clone());
    }
    if replacement_vars.contains(bound) && body.free_variables().contains(var) {
        // Capture: pick a fresh name by appending primes.
        let mut taken = body.all_variables();
        taken.extend(replacement_vars.iter().cloned());
        taken.insert(var.to_string());
        let mut fresh = format!("{bound}'");
        while taken.contains(&fresh) {
            fresh.push('\'');
        }
        let renamed = body.rename_free(bound, &fresh);
        (
            fresh.clone(),
            renamed.substitute_inner(var, replacement, replacement_vars),
        )
    } else {
        (
            bound.to_string(),
            body.substitute_inner(var, replacement, replacement_vars),
        )
    }
}

impl Formula {
    /// Renames free occurrences of a variable. Used only with fresh target
    /// names, so no capture check is needed.
    fn rename_free(&self, from: &str, to: &str) -> Formula {
        match self {
            Formula::Atomic(r, terms) => Formula::Atomic(
                r.clone(),
                terms.iter().map(|t| t.rename_var(from, to)).collect(),
            ),
            Formula::Not(f) => Formula::not(f.rename_free(from, to)),
            Formula::And(a, b) => Formula::and(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Or(a, b) => Formula::or(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Implies(a, b) => {
                Formula::implies(a.rename_free(from, to), b.rename_free(from, to))
            }
            Formula::Iff(a, b) => Formula::iff(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::ForAll(v, f) if v == from => Formula::ForAll(v.clone(), f.clone()),
            Formula::Exists(v, f) if v == from => Formula::Exists(v.clone(), f.clone()),
            Formula::ForAll(v, f) => Formula::forall(v, f.rename_free(from, to)),
            Formula::Exists(v, f) => Formula::exists(v, f.rename_free(from, to)),
        }
    }

    /// Checks relation/function symbols and arities against a signature.
    pub fn validate(&self, sig: &Signature) -> Result<(), String> {
        match self {
            Formula::Atomic(r, terms) => {
                let decl = sig
                    .relation(r)
                    .ok_or_else(|| format!("unknown relation `{r}`"))?;
                if decl.arity != terms.len() {
                    return Err(format!(
                        "relation `{r}` has arity {}, applied to {} arguments",
                        decl.arity,
                        terms.len()
                    ));
                }
                for t in terms {
                    t.validate(sig)?;
                }
                Ok(())
            }
            Formula::Not(f) => f.validate(sig),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.validate(sig)?;
                b.validate(sig)
            }
            Formula::ForAll(_, f) | Formula::Exists(_, f) => f.validate(sig),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Term {
        Term::var("x")
    }
    fn y() -> Term {
        Term::var("y")
    }

    #[test]
    fn free_variables_of_quantified_formula() {
        // exists x. y + x*x = z  has free variables {y, z}
        let f = Formula::exists(
            "x",
            Formula::equal(
                Term::apply("+", vec![y(), Term::apply("*", vec![x(), x()])]),
                Term::var("z"),
            ),
        );
        let free: Vec<_> = f.free_variables().into_iter().collect();
        assert_eq!(free, vec!["y".to_string(), "z".to_string()]);
    }

    #[test]
    fn sentences_have_no_free_variables() {
        let f = Formula::forall("x", Formula::equal(x(), x()));
        assert!(f.is_sentence());
    }

    #[test]
    fn shadowing_leaves_outer_occurrence_free() {
        // x < y & exists y. y = x  has free variables {x, y}
        let f = Formula::and(
            Formula::atomic("<", vec![x(), y()]),
            Formula::exists("y", Formula::equal(y(), x())),
        );
        let free: Vec<_> = f.free_variables().into_iter().collect();
        assert_eq!(free, vec!["x".to_string(), "y".to_string()]);
    }

    #[test]
    fn substitute_free_occurrence()
    {
        let f = Formula::atomic("<", vec![x(), y()]);
        let g = f.substitute("x", &Term::constant("c"));
        assert_eq!(g, Formula::atomic("<", vec![Term::constant("c"), y()]));
    }

    #[test]
    fn substitute_avoids_capture() {
        // (exists y. y = x)[x := y]  ==  exists y'. y' = y
        let f = Formula::exists("y", Formula::equal(y(), x()));
        let g = f.substitute("x", &y());
        assert_eq!(
            g,
            Formula::exists("y'", Formula::equal(Term::var("y'"), y()))
        );
    }

    #[test]
    fn substitute_into_sentence_is_identity() {
        let f = Formula::forall("x", Formula::equal(x(), x()));
        assert_eq!(f.substitute("x", &Term::constant("c")), f);
    }

    #[test]
    fn substitution_removes_variable_when_term_closed() {
        let f = Formula::and(
            Formula::atomic("<", vec![x(), y()]),
            Formula::exists("y", Formula::equal(y(), x())),
        );
        let g = f.substitute("x", &Term::Element(3));
        let mut expected = f.free_variables();
        expected.remove("x");
        assert_eq!(g.free_variables(), expected);
    }

    #[test]
    fn quantifier_rank_rules() {
        let atom = Formula::equal(x(), x());
        assert_eq!(atom.quantifier_rank(), 0);
        let q = Formula::forall("x", atom.clone());
        assert_eq!(q.quantifier_rank(), 1);
        assert_eq!(Formula::not(q.clone()).quantifier_rank(), 1);
        assert_eq!(Formula::and(q.clone(), atom).quantifier_rank(), 1);
        assert_eq!(Formula::exists("y", q).quantifier_rank(), 2);
    }
}
