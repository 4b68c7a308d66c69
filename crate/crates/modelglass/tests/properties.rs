//! Property tests for the spec-level invariants that quantify over random
//! structures. Strategies draw a seed and generate through the shared
//! deterministic generators, so failures reproduce from the seed alone.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::*;
use modelglass::filters::{
    generated_filter, is_filter, is_ultrafilter, limit_points, SetFamily,
};
use modelglass::logic::{parse_formula, print_formula, Formula, Term};
use modelglass::model::{
    definable_algebra, eval_formula, eval_term, is_boolean_algebra, Assignment,
};

proptest! {
    /// parse(print(f)) == f for random formulas over random signatures.
    #[test]
    fn parser_print_round_trip(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let sig = random_signature(&mut rng);
        let f = random_formula(&mut rng, &sig, 5);
        let printed = print_formula(&f, &sig);
        prop_assert_eq!(parse_formula(&printed, &sig).unwrap(), f);
    }

    /// Substituting a closed term eliminates exactly the substituted
    /// variable from the free-variable set.
    #[test]
    fn substitution_of_closed_term_removes_variable(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let sig = random_signature(&mut rng);
        let f = random_formula(&mut rng, &sig, 4);
        let g = f.substitute("x", &Term::Element(0));
        let mut expected = f.free_variables();
        expected.remove("x");
        prop_assert_eq!(g.free_variables(), expected);
    }

    /// The substitution lemma: evaluating f[x := t] equals evaluating f with
    /// x bound to the value of t, over random models of size at most 4.
    #[test]
    fn substitution_lemma_on_small_models(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let sig = random_signature(&mut rng);
        let size = rng.random_range(1..=4usize);
        let model = random_model(&mut rng, &sig, size);
        let f = random_formula(&mut rng, &sig, 3);
        if f.element_literals().iter().any(|&e| e >= size) {
            return Ok(());
        }
        let t = Term::Element(rng.random_range(0..size));
        let g = f.substitute("x", &t);

        // One assignment per free-variable frame suffices per seed.
        let mut assignment = Assignment::new();
        for v in f.free_variables().union(&g.free_variables()) {
            assignment.insert(v.clone(), rng.random_range(0..size));
        }
        let mut shifted = assignment.clone();
        shifted.insert("x".to_string(), eval_term(&model, &t, &assignment).unwrap());
        prop_assert_eq!(
            eval_formula(&model, &g, &assignment).unwrap(),
            eval_formula(&model, &f, &shifted).unwrap()
        );
    }

    /// Rank laws: negation preserves rank, quantifiers add one.
    #[test]
    fn quantifier_rank_laws(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let sig = random_signature(&mut rng);
        let f = random_formula(&mut rng, &sig, 4);
        let r = f.quantifier_rank();
        prop_assert_eq!(Formula::not(f.clone()).quantifier_rank(), r);
        prop_assert_eq!(Formula::forall("q", f.clone()).quantifier_rank(), r + 1);
        prop_assert_eq!(Formula::exists("q", f).quantifier_rank(), r + 1);
    }

    /// Filters generated from families with the finite intersection property
    /// have nonempty limit-point sets that are themselves members, are
    /// ultrafilters exactly when the limit set is a single point, and
    /// regenerate to themselves.
    #[test]
    fn generated_filters_behave(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let base = rng.random_range(1..=8usize);
        let count = rng.random_range(1..=4usize);
        // Force the finite intersection property by seeding a common point.
        let anchor = rng.random_range(0..base);
        let sets: Vec<Vec<usize>> = (0..count)
            .map(|_| {
                let mut s: BTreeSet<usize> = [anchor].into();
                for e in 0..base {
                    if rng.random_bool(0.4) {
                        s.insert(e);
                    }
                }
                s.into_iter().collect()
            })
            .collect();
        let gens = SetFamily::new(base, &sets).unwrap();
        let filter = generated_filter(&gens).unwrap();
        prop_assert!(is_filter(filter.family()).is_ok());

        let limits = limit_points(&filter);
        prop_assert!(!limits.is_empty());
        prop_assert!(filter.contains(&limits));
        prop_assert_eq!(is_ultrafilter(&filter), limits.len() == 1);

        let again = generated_filter(filter.family()).unwrap();
        prop_assert_eq!(&again, &filter);
    }

    /// Complete definable-algebra runs are boolean algebras and contain no
    /// duplicate extensions.
    #[test]
    fn definable_algebra_closure(seed in any::<u64>()) {
        let mut rng = rng(seed);
        // Relational signatures keep the atomic basis exhaustive.
        let sig = match rng.random_range(0..3) {
            0 => modelglass::logic::parse_signature("rel E /2").unwrap(),
            1 => modelglass::logic::parse_signature("rel < /2 infix").unwrap(),
            _ => modelglass::logic::parse_signature("rel P /1; rel R /2").unwrap(),
        };
        let size = rng.random_range(1..=4usize);
        let model = random_model(&mut rng, &sig, size);
        let params: Vec<usize> = (0..size).filter(|_| rng.random_bool(0.3)).collect();
        let alg = definable_algebra(&model, &params, 0, 1).unwrap();
        prop_assert!(alg.complete);

        let family: Vec<BTreeSet<Vec<usize>>> =
            alg.members.iter().map(|m| m.tuples.clone()).collect();
        let distinct: BTreeSet<&BTreeSet<Vec<usize>>> = family.iter().collect();
        prop_assert_eq!(distinct.len(), family.len(), "duplicate extensions");

        let base: BTreeSet<Vec<usize>> = (0..size).map(|e| vec![e]).collect();
        prop_assert!(is_boolean_algebra(&base, &family));
    }

    /// Solution sets commute with conjunction and negation on random
    /// two-variable frames (the cached engine against itself under the
    /// boolean structure).
    #[test]
    fn solution_sets_respect_boolean_structure(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let sig = random_signature(&mut rng);
        let size = rng.random_range(1..=4usize);
        let model = random_model(&mut rng, &sig, size);
        let mut draw = |rng: &mut rand::rngs::SmallRng| loop {
            let mut c = random_formula(rng, &sig, 2);
            if c.element_literals().iter().any(|&e| e >= size) {
                continue;
            }
            for v in c.free_variables() {
                if v != "x" && v != "y" {
                    c = Formula::exists(&v, c);
                }
            }
            break c;
        };
        let f = draw(&mut rng);
        let g = draw(&mut rng);
        let vars = ["x", "y"];
        let sf = modelglass::model::solution_set(&model, &f, &vars).unwrap();
        let sg = modelglass::model::solution_set(&model, &g, &vars).unwrap();
        let sand = modelglass::model::solution_set(
            &model,
            &Formula::and(f.clone(), g.clone()),
            &vars,
        )
        .unwrap();
        let meet: BTreeSet<Vec<usize>> = sf.tuples.intersection(&sg.tuples).cloned().collect();
        prop_assert_eq!(&sand.tuples, &meet);

        let snot = modelglass::model::solution_set(&model, &Formula::not(f), &vars).unwrap();
        let full: BTreeSet<Vec<usize>> = tuples(size, 2).into_iter().collect();
        let complement: BTreeSet<Vec<usize>> = full.difference(&sf.tuples).cloned().collect();
        prop_assert_eq!(&snot.tuples, &complement);
    }
}
