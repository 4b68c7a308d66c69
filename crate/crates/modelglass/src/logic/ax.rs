//! Builder for the polynomial-map transfer sentences.
//!
//! For arity `n` and degree `k`, the sentence asserts in the ring language
//! `{+, *, 0, 1}` that every polynomial self-map of the n-fold product given
//! by polynomials of degree at most `k` is surjective whenever it is
//! injective. Coefficients are universally quantified domain elements, and
//! the polynomials are written out as expanded terms over them.

use thiserror::Error;

use super::ast::{Formula, Term};

/// Default bound on the number of coefficient quantifiers, `n * C(n+k, k)`.
pub const DEFAULT_COEFFICIENT_CAP: usize = 64;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AxError {
    #[error("arity must be at least 1")]
    ZeroArity,
    #[error("degree must be at least 1; degree-0 maps are constant and the sentence degenerates")]
    ZeroDegree,
    #[error("sentence would need {coefficients} coefficient quantifiers, above the cap {cap}")]
    TooLarge { coefficients: usize, cap: usize },
}

/// Builds the sentence for arity `n` and degree `k` under the default
/// coefficient cap.
pub fn build_ax_sentence(n: usize, k: usize) -> Result<Formula, AxError> {
    build_ax_sentence_capped(n, k, DEFAULT_COEFFICIENT_CAP)
}

pub fn build_ax_sentence_capped(n: usize, k: usize, cap: usize) -> Result<Formula, AxError> {
    if n == 0 {
        return Err(AxError::ZeroArity);
    }
    if k == 0 {
        return Err(AxError::ZeroDegree);
    }
    let monomials = monomials_graded_lex(n, k);
    let coeff_count = n * monomials.len();
    if coeff_count > cap {
        return Err(AxError::TooLarge {
            coefficients: coeff_count,
            cap,
        });
    }

    let xs = argument_vars("x", n);
    let ys = argument_vars("y", n);
    let zs = argument_vars("z", n);

    // One coefficient name per (polynomial, monomial), in quantifier order.
    let mut names = coefficient_names();
    let coeffs: Vec<Vec<String>> = (0..n)
        .map(|_| (0..monomials.len()).map(|_| names.next().unwrap()).collect())
        .collect();

    let poly = |i: usize, args: &[String]| -> Term {
        let mut summands = Vec::new();
        for (j, mono) in monomials.iter().enumerate() {
            let mut t = Term::var(&coeffs[i][j]);
            for (v, &e) in mono.iter().enumerate() {
                for _ in 0..e {
                    t = Term::apply("*", vec![t, Term::var(&args[v])]);
                }
            }
            summands.push(t);
        }
        let mut sum = summands.remove(0);
        for s in summands {
            sum = Term::apply("+", vec![sum, s]);
        }
        sum
    };

    let injective = {
        let same_image = Formula::conjoin(
            (0..n)
                .map(|i| Formula::equal(poly(i, &xs), poly(i, &ys)))
                .collect(),
        );
        let same_point = Formula::conjoin(
            (0..n)
                .map(|i| Formula::equal(Term::var(&xs[i]), Term::var(&ys[i])))
                .collect(),
        );
        let mut f = Formula::implies(same_image, same_point);
        for v in ys.iter().rev().chain(xs.iter().rev()) {
            f = Formula::forall(v, f);
        }
        f
    };

    let surjective = {
        let hits = Formula::conjoin(
            (0..n)
                .map(|i| Formula::equal(poly(i, &xs), Term::var(&zs[i])))
                .collect(),
        );
        let mut f = hits;
        for v in xs.iter().rev() {
            f = Formula::exists(v, f);
        }
        for v in zs.iter().rev() {
            f = Formula::forall(v, f);
        }
        f
    };

    let mut sentence = Formula::implies(injective, surjective);
    for cs in coeffs.iter().rev() {
        for c in cs.iter().rev() {
            sentence = Formula::forall(c, sentence);
        }
    }
    Ok(sentence)
}

/// Exponent vectors of total degree <= k over n variables, sorted by total
/// degree descending, then lexicographically descending. For n = 1, k = 1
/// this is [x, 1].
fn monomials_graded_lex(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; n];
    collect_exponents(n, k, 0, &mut current, &mut out);
    out.sort_by(|a, b| {
        let da: usize = a.iter().sum();
        let db: usize = b.iter().sum();
        db.cmp(&da).then_with(|| b.cmp(a))
    });
    out
}

fn collect_exponents(
    n: usize,
    budget: usize,
    pos: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if pos == n {
        out.push(current.clone());
        return;
    }
    for e in 0..=budget {
        current[pos] = e;
        collect_exponents(n, budget - e, pos + 1, current, out);
    }
    current[pos] = 0;
}

fn argument_vars(stem: &str, n: usize) -> Vec<String> {
    if n == 1 {
        vec![stem.to_string()]
    } else {
        (1..=n).map(|i| format!("{stem}{i}")).collect()
    }
}

/// a, b, c, ..., w, a', b', ... — skipping x, y, z, which name the map's
/// arguments and targets.
fn coefficient_names() -> impl Iterator<Item = String> {
    (0..).flat_map(|round| {
        ('a'..='w').map(move |c| {
            let mut s = c.to_string();
            for _ in 0..round {
                s.push('\'');
            }
            s
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::printer::print_formula;
    use crate::logic::signature::Signature;

    #[test]
    fn arity_one_degree_one_matches_hand_construction() {
        let got = build_ax_sentence(1, 1).unwrap();
        // forall a. forall b.
        //   (forall x. forall y. (a*x + b = a*y + b -> x = y))
        //   -> (forall z. exists x. a*x + b = z)
        let p = |arg: &str| {
            Term::apply(
                "+",
                vec![
                    Term::apply("*", vec![Term::var("a"), Term::var(arg)]),
                    Term::var("b"),
                ],
            )
        };
        let injective = Formula::forall(
            "x",
            Formula::forall(
                "y",
                Formula::implies(
                    Formula::equal(p("x"), p("y")),
                    Formula::equal(Term::var("x"), Term::var("y")),
                ),
            ),
        );
        let surjective = Formula::forall(
            "z",
            Formula::exists("x", Formula::equal(p("x"), Term::var("z"))),
        );
        let expected = Formula::forall(
            "a",
            Formula::forall("b", Formula::implies(injective, surjective)),
        );
        assert_eq!(got, expected);
    }

    #[test]
    fn arity_one_degree_one_quantifier_rank_is_four() {
        let f = build_ax_sentence(1, 1).unwrap();
        assert_eq!(f.quantifier_rank(), 4);
    }

    #[test]
    fn degree_zero_rejected() {
        assert_eq!(build_ax_sentence(1, 0), Err(AxError::ZeroDegree));
    }

    #[test]
    fn built_sentences_are_sentences_and_validate() {
        let sig = Signature::ring();
        for (n, k) in [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1)] {
            let f = build_ax_sentence(n, k).unwrap();
            assert!(f.is_sentence(), "({n},{k}) has free variables");
            f.validate(&sig).unwrap();
        }
    }

    #[test]
    fn coefficient_count_respects_cap() {
        // n * C(n+k, k) with n=3, k=3 is 3 * 20 = 60; cap 10 must reject it.
        let err = build_ax_sentence_capped(3, 3, 10).unwrap_err();
        assert_eq!(
            err,
            AxError::TooLarge {
                coefficients: 60,
                cap: 10
            }
        );
    }

    #[test]
    fn printed_sentence_reparses() {
        let sig = Signature::ring();
        for (n, k) in [(1, 1), (2, 1), (1, 2)] {
            let f = build_ax_sentence(n, k).unwrap();
            let printed = print_formula(&f, &sig);
            assert_eq!(crate::logic::parse_formula(&printed, &sig).unwrap(), f);
        }
    }
}
