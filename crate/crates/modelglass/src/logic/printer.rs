//! Canonical printing. Fully parenthesized except quantifier chains, so the
//! printed form re-parses to a structurally identical tree.

use super::ast::{Formula, Term};
use super::signature::{Fixity, Signature};

pub fn print_term(term: &Term, sig: &Signature) -> String {
    let mut out = String::new();
    write_term(term, sig, &mut out);
    out
}

fn write_term(term: &Term, sig: &Signature, out: &mut String) {
    match term {
        Term::Var(v) => out.push_str(v),
        Term::Const(c) => out.push_str(c),
        Term::Element(e) => out.push_str(&e.to_string()),
        Term::Apply(f, args) => {
            let infix = sig
                .function(f)
                .map(|d| d.fixity == Fixity::Infix)
                .unwrap_or(false);
            if infix && args.len() == 2 {
                out.push('(');
                write_term(&args[0], sig, out);
                out.push(' ');
                out.push_str(f);
                out.push(' ');
                write_term(&args[1], sig, out);
                out.push(')');
            } else {
                out.push_str(f);
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_term(a, sig, out);
                }
                out.push(')');
            }
        }
    }
}

pub fn print_formula(formula: &Formula, sig: &Signature) -> String {
    let mut out = String::new();
    write_formula(formula, sig, &mut out);
    out
}

fn write_formula(f: &Formula, sig: &Signature, out: &mut String) {
    match f {
        Formula::Atomic(r, terms) => {
            let infix = sig
                .relation(r)
                .map(|d| d.fixity == Fixity::Infix)
                .unwrap_or(r == "=");
            if infix && terms.len() == 2 {
                out.push('(');
                write_term(&terms[0], sig, out);
                out.push(' ');
                out.push_str(r);
                out.push(' ');
                write_term(&terms[1], sig, out);
                out.push(')');
            } else {
                out.push_str(r);
                out.push('(');
                for (i, t) in terms.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_term(t, sig, out);
                }
                out.push(')');
            }
        }
        Formula::Not(g) => {
            out.push('!');
            write_operand(g, sig, out);
        }
        Formula::And(a, b) => write_binary(a, "&", b, sig, out),
        Formula::Or(a, b) => write_binary(a, "|", b, sig, out),
        Formula::Implies(a, b) => write_binary(a, "->", b, sig, out),
        Formula::Iff(a, b) => write_binary(a, "<->", b, sig, out),
        Formula::ForAll(v, body) => {
            out.push_str("forall ");
            out.push_str(v);
            out.push_str(". ");
            write_formula(body, sig, out);
        }
        Formula::Exists(v, body) => {
            out.push_str("exists ");
            out.push_str(v);
            out.push_str(". ");
            write_formula(body, sig, out);
        }
    }
}

fn write_binary(a: &Formula, op: &str, b: &Formula, sig: &Signature, out: &mut String) {
    out.push('(');
    write_operand(a, sig, out);
    out.push(' ');
    out.push_str(op);
    out.push(' ');
    write_operand(b, sig, out);
    out.push(')');
}

/// Quantified operands get explicit parentheses to stop the quantifier's
/// maximal scope from swallowing the rest of the group.
fn write_operand(f: &Formula, sig: &Signature, out: &mut String) {
    match f {
        Formula::ForAll(_, _) | Formula::Exists(_, _) => {
            out.push('(');
            write_formula(f, sig, out);
            out.push(')');
        }
        _ => write_formula(f, sig, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parser::parse_formula;

    #[test]
    fn canonical_form_of_identity_axiom() {
        let sig = Signature::ring();
        let f = parse_formula("forall x. x + 0 = x", &sig).unwrap();
        assert_eq!(print_formula(&f, &sig), "forall x. ((x + 0) = x)");
    }

    #[test]
    fn atomic_equality_is_parenthesized() {
        let sig = Signature::new();
        let f = Formula::equal(Term::var("x"), Term::var("x"));
        assert_eq!(print_formula(&f, &sig), "(x = x)");
    }

    #[test]
    fn quantifier_chains_stay_flat() {
        let sig = Signature::graph();
        let f = parse_formula("forall x. forall y. E(x, y)", &sig).unwrap();
        assert_eq!(print_formula(&f, &sig), "forall x. forall y. E(x, y)");
    }

    #[test]
    fn quantified_operand_gets_parentheses() {
        let sig = Signature::graph();
        let f = Formula::and(
            Formula::exists("x", Formula::atomic("E", vec![Term::var("x"), Term::var("x")])),
            Formula::atomic("E", vec![Term::var("y"), Term::var("y")]),
        );
        let printed = print_formula(&f, &sig);
        assert_eq!(printed, "((exists x. E(x, x)) & E(y, y))");
        assert_eq!(parse_formula(&printed, &sig).unwrap(), f);
    }
}
