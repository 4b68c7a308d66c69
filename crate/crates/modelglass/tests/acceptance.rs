//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measurements when it succeeds (run with `--nocapture` to see them).
//! Tolerances, trial counts, and runtime budgets are pinned in the code.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use num_rational::Ratio;
use rand::Rng;

use common::*;
use modelglass::filters::Ultrafilter;
use modelglass::graphs::{
    complete_multipartite, find_half_graph, gnp_half, half_graph, max_homogeneous,
    regular_pair_exact, regular_pair_sampled, stable_ramsey_report, stable_regularity,
    union_of_cliques, ExactVerdict, Graph, RamseyFamily, RegularityConfig, SampledVerdict,
};
use modelglass::logic::{build_ax_sentence, parse_formula, print_formula, Formula};
use modelglass::model::{eval_formula, solution_set, Assignment, Model};
use modelglass::types::{check_partial_type, count_dlo_types};
use modelglass::ultraproduct::{iso_check, los_check, ultraproduct, IndexedFamily, IsoConfig, IsoResult};

/// Parser round-trip: 1000 seeded random formulas of depth <= 6 over random
/// signatures satisfy parse(print(f)) == f, in under 10 seconds.
#[test]
fn acceptance_parser_round_trip() {
    let start = Instant::now();
    let mut rng = rng(0xA11CE);
    for i in 0..1000 {
        let sig = random_signature(&mut rng);
        let f = random_formula(&mut rng, &sig, 6);
        let printed = print_formula(&f, &sig);
        let reparsed = parse_formula(&printed, &sig)
            .unwrap_or_else(|e| panic!("formula {i} failed to reparse: {e}\n{printed}"));
        assert_eq!(reparsed, f, "round-trip mismatch at formula {i}: {printed}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("ACCEPTANCE parser-round-trip: PASS (1000 formulas in {elapsed:?})");
}

/// Evaluation coherence: solution-set membership matches pointwise direct
/// evaluation on models of size <= 5 over 3 fixed signatures and 500 random
/// formulas; the boolean and projection identities hold exactly; under 60 s.
#[test]
fn acceptance_evaluation_coherence() {
    let start = Instant::now();
    let sigs = [
        modelglass::logic::parse_signature("rel E /2").unwrap(),
        modelglass::logic::parse_signature("rel < /2 infix").unwrap(),
        modelglass::logic::parse_signature("fun + /2 infix; fun s /1; const 0").unwrap(),
    ];
    let mut rng = rng(0xC0DE);
    let vars = ["x", "y"];
    for trial in 0..500 {
        let sig = &sigs[trial % 3];
        let size = rng.random_range(1..=5);
        let model = random_model(&mut rng, sig, size);
        // Formulas over the fixed two-variable frame: stray free variables
        // are closed off existentially, bad element literals regenerated.
        let mut draw = |rng: &mut rand::rngs::SmallRng, depth: usize| loop {
            let mut c = random_formula(rng, sig, depth);
            if c.element_literals().iter().any(|&e| e >= size) {
                continue;
            }
            for v in c.free_variables() {
                if !vars.contains(&v.as_str()) {
                    c = Formula::exists(&v, c);
                }
            }
            break c;
        };
        let f = draw(&mut rng, 3);
        let g = draw(&mut rng, 2);
        let sol_f = solution_set(&model, &f, &vars).unwrap();
        for tuple in tuples(size, 2) {
            let mut a = Assignment::new();
            a.insert("x".into(), tuple[0]);
            a.insert("y".into(), tuple[1]);
            let direct = eval_formula(&model, &f, &a).unwrap();
            assert_eq!(
                sol_f.contains(&tuple),
                direct,
                "trial {trial}: membership mismatch at {tuple:?} for {}",
                print_formula(&f, sig)
            );
        }
        // Boolean identities.
        let sol_g = solution_set(&model, &g, &vars).unwrap();
        let sol_and = solution_set(&model, &Formula::and(f.clone(), g.clone()), &vars).unwrap();
        let meet: BTreeSet<Vec<usize>> =
            sol_f.tuples.intersection(&sol_g.tuples).cloned().collect();
        assert_eq!(sol_and.tuples, meet, "trial {trial}: conjunction identity");
        let sol_not = solution_set(&model, &Formula::not(f.clone()), &vars).unwrap();
        let full: BTreeSet<Vec<usize>> = tuples(size, 2).into_iter().collect();
        let complement: BTreeSet<Vec<usize>> =
            full.difference(&sol_f.tuples).cloned().collect();
        assert_eq!(sol_not.tuples, complement, "trial {trial}: negation identity");
        // Projection identity: sol(exists y. f) over x is the projection.
        let sol_ex = solution_set(&model, &Formula::exists("y", f.clone()), &["x"]).unwrap();
        let projected: BTreeSet<Vec<usize>> =
            sol_f.tuples.iter().map(|t| vec![t[0]]).collect();
        assert_eq!(sol_ex.tuples, projected, "trial {trial}: projection identity");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!("ACCEPTANCE evaluation-coherence: PASS (500 trials in {elapsed:?})");
}

/// Finite compactness: every family of one-variable formulas accepted as a
/// partial type has a nonempty realization set, and empty intersections are
/// rejected, across 500 seeded trials.
#[test]
fn acceptance_finite_compactness() {
    let mut rng = rng(0xF171E);
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    for trial in 0..500 {
        let sig = random_signature(&mut rng);
        let size = rng.random_range(1..=6);
        let model = random_model(&mut rng, &sig, size);
        let count = rng.random_range(1..=4);
        let mut formulas = Vec::new();
        let mut params: BTreeSet<usize> = BTreeSet::new();
        while formulas.len() < count {
            let f = random_formula(&mut rng, &sig, 2);
            let free = f.free_variables();
            if free.len() == 1 && free.contains("x") {
                if f.element_literals().iter().any(|&e| e >= size) {
                    continue;
                }
                params.extend(f.element_literals());
                formulas.push(f);
            }
        }
        let params: Vec<usize> = params.into_iter().collect();
        let check = check_partial_type(&model, &params, &formulas).unwrap();
        // Independent oracle: intersect by direct evaluation.
        let realized: Vec<usize> = (0..size)
            .filter(|&e| {
                formulas.iter().all(|f| {
                    let mut a = Assignment::new();
                    a.insert("x".into(), e);
                    eval_formula(&model, f, &a).unwrap()
                })
            })
            .collect();
        assert_eq!(
            check.is_partial_type,
            !realized.is_empty(),
            "trial {trial}: verdict disagrees with direct intersection"
        );
        assert_eq!(check.realizations, realized, "trial {trial}");
        if check.is_partial_type {
            assert!(!check.realizations.is_empty());
            accepted += 1;
        } else {
            rejected += 1;
        }
    }
    println!(
        "ACCEPTANCE finite-compactness: PASS (500 trials: {accepted} partial types realized, {rejected} empty intersections rejected)"
    );
}

/// The type space of a dense linear order over n parameters has exactly
/// 2n+1 complete types for n = 0..8, matching the sign-vector oracle.
#[test]
fn acceptance_dlo_stone_space() {
    for n in 0..=8usize {
        let space = count_dlo_types(n);
        assert_eq!(space.count, 2 * n + 1, "closed form at n={n}");
        assert_eq!(space.count, dlo_oracle(n), "oracle at n={n}");
        assert_eq!(space.shapes.len(), space.count);
        // Element types realized; cut and end types omitted.
        let realized = space.shapes.iter().filter(|s| s.realized()).count();
        assert_eq!(realized, if n == 0 { 1 } else { n });
    }
    println!("ACCEPTANCE dlo-stone-space: PASS (2n+1 for n = 0..8, oracle-matched)");
}

/// Sign-vector oracle: count consistent assignments of (x < a_i, x = a_i)
/// under the axioms of a dense linear order without endpoints.
fn dlo_oracle(n: usize) -> usize {
    if n == 0 {
        return 1;
    }
    let mut count = 0;
    for less in 0u32..(1 << n) {
        'outer: for eq in 0u32..(1 << n) {
            if eq.count_ones() > 1 {
                continue;
            }
            let lt = |i: usize| less >> i & 1 == 1;
            let at = |i: usize| eq >> i & 1 == 1;
            for i in 0..n {
                if at(i) {
                    for j in 0..n {
                        if lt(j) != (j > i) {
                            continue 'outer;
                        }
                    }
                }
                if lt(i) {
                    for j in i + 1..n {
                        if !lt(j) {
                            continue 'outer;
                        }
                    }
                    if (i..n).any(at) {
                        continue 'outer;
                    }
                }
            }
            count += 1;
        }
    }
    count
}

/// Łoś transfer: 200 seeded (family, principal ultrafilter, sentence)
/// triples all satisfy the transfer equivalence, and the principal collapse
/// passes the isomorphism check on every trial; under 120 s.
#[test]
fn acceptance_los_transfer() {
    let start = Instant::now();
    let mut rng = rng(0x105);
    for trial in 0..200 {
        let sig = random_signature(&mut rng);
        let m = rng.random_range(1..=4usize);
        let models: Vec<Model> = (0..m)
            .map(|_| {
                let size = rng.random_range(1..=8);
                random_model(&mut rng, &sig, size)
            })
            .collect();
        let family = IndexedFamily::new(models).unwrap();
        let at = rng.random_range(0..m);
        let d = Ultrafilter::principal(m, at).unwrap();
        // Element literals are not symbols of the shared language; transfer
        // is only claimed for pure sentences.
        let sentence = loop {
            let s = random_sentence(&mut rng, &sig, 3);
            if s.element_literals().is_empty() {
                break s;
            }
        };

        let report = los_check(&family, &d, &sentence).unwrap();
        assert!(
            report.transfer_holds,
            "trial {trial}: transfer violated for {} (product: {}, factors: {:?})",
            print_formula(&sentence, &sig),
            report.holds_in_product,
            report.factors_where_true
        );

        let up = ultraproduct(&family, &d).unwrap();
        assert_eq!(up.model.size(), family.models()[at].size(), "trial {trial}");
        let iso = iso_check(&up.model, &family.models()[at], &IsoConfig::default()).unwrap();
        assert!(
            matches!(iso, IsoResult::Isomorphic { .. }),
            "trial {trial}: principal collapse failed"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!("ACCEPTANCE los-transfer: PASS (200 triples in {elapsed:?})");
}

/// The polynomial-map sentences hold in small prime fields under the generic
/// engine evaluation, each instance within its 5-minute budget.
#[test]
fn acceptance_ax_check() {
    let mut cases = Vec::new();
    for n in [1usize, 2] {
        for k in [1usize, 2] {
            for p in [2usize, 3, 5] {
                cases.push((n, k, p));
            }
        }
    }
    cases.push((1, 1, 7));
    cases.push((1, 2, 7));
    let mut timings = Vec::new();
    for (n, k, p) in cases {
        let phi = build_ax_sentence(n, k).unwrap();
        let field = Model::modular_ring(p);
        let start = Instant::now();
        let holds = field.sat(&phi).unwrap();
        let elapsed = start.elapsed();
        assert!(holds, "phi_{n}_{k} must hold in F_{p}");
        assert!(
            elapsed.as_secs_f64() < 300.0,
            "phi_{n}_{k} in F_{p} took {elapsed:?}"
        );
        timings.push(format!("({n},{k},{p}) {elapsed:?}"));
    }
    println!("ACCEPTANCE ax-check: PASS [{}]", timings.join(", "));
}

/// The split pair of the explicit height-8 half-graph is irregular at
/// eps = 1/4, with a concrete violating sub-pair.
#[test]
fn acceptance_half_graph_irregularity() {
    let g = half_graph(8);
    let a_side: Vec<usize> = (0..8).collect();
    let b_side: Vec<usize> = (8..16).collect();
    let eps = Ratio::new(1i64, 4);
    match regular_pair_exact(&g, &a_side, &b_side, eps, 12).unwrap() {
        ExactVerdict::Irregular {
            xs_sub,
            ys_sub,
            sub_density,
            pair_density,
        } => {
            // Independent re-validation of the witness.
            assert!(xs_sub.len() >= 2 && ys_sub.len() >= 2);
            let d = modelglass::graphs::edge_density(&g, &xs_sub, &ys_sub).unwrap();
            assert_eq!(d, sub_density);
            let dev = if d > pair_density { d - pair_density } else { pair_density - d };
            assert!(dev > eps, "witness deviation {dev} not above {eps}");
            println!(
                "ACCEPTANCE half-graph-irregularity: PASS (witness X' = {:?}, Y' = {:?}, d = {}, pair d = {})",
                xs_sub, ys_sub, sub_density, pair_density
            );
        }
        ExactVerdict::Regular => panic!("the half-graph split pair must be irregular at 1/4"),
    }
}

/// Twenty seeded 3-stable graphs (clique unions, complete multipartite, and
/// complements) on 32..64 vertices all get pass certificates with zero
/// irregular pairs at eps = 1/4, and every certificate re-validates under
/// independent pair re-checking.
#[test]
fn acceptance_stable_partition_certificates() {
    let mut rng = rng(0x57AB1E);
    let eps = Ratio::new(1i64, 4);
    let mut checked = 0usize;
    while checked < 20 {
        let n = rng.random_range(32..=64usize);
        let parts = rng.random_range(2..=6usize);
        let g = match checked % 4 {
            0 => union_of_cliques(n, parts),
            1 => complete_multipartite(n, parts),
            2 => union_of_cliques(n, parts).complement(),
            _ => complete_multipartite(n, parts).complement(),
        };
        // The generator contract: instances must be certified 3-stable.
        if find_half_graph(&g, 3).is_some() {
            panic!("generator produced an unstable instance (n={n}, parts={parts})");
        }
        let cfg = RegularityConfig {
            seed: checked as u64,
            ..RegularityConfig::default()
        };
        let cert = stable_regularity(&g, eps, 3, &cfg).unwrap();
        assert!(cert.passed, "instance {checked} (n={n}, parts={parts}) failed");
        assert_eq!(cert.irregular_pairs(), 0);
        // Independent re-validation of every pair with a fresh seed.
        for report in &cert.pair_reports {
            let xs = &cert.blocks[report.left];
            let ys = &cert.blocks[report.right];
            let ok = if xs.len() <= 12 && ys.len() <= 12 {
                matches!(
                    regular_pair_exact(&g, xs, ys, eps, 12).unwrap(),
                    ExactVerdict::Regular
                )
            } else {
                matches!(
                    regular_pair_sampled(&g, xs, ys, eps, 4000, 0xDEAD + checked as u64).unwrap(),
                    SampledVerdict::NoViolationFound { .. }
                )
            };
            assert!(ok, "instance {checked}: pair ({}, {}) failed re-validation", report.left, report.right);
            assert!(report.verdict.is_regular_outcome());
        }
        checked += 1;
    }
    println!("ACCEPTANCE stable-partition-certificates: PASS (20 instances, all pairs re-validated)");
}

/// Clique-union instances at sizes 16, 32, 64 have hom(G) >= sqrt(n), while
/// G(n, 1/2) controls are rejected as unstable at k = 4 in at least 18 of 20
/// seeds.
#[test]
fn acceptance_stable_ramsey_trend() {
    let sizes = [16usize, 32, 64];
    let report = stable_ramsey_report(RamseyFamily::CliqueUnions, &sizes, 3, 0);
    assert_eq!(report.skipped, 0, "clique unions must be 3-stable");
    for row in &report.rows {
        let hom = row.hom.expect("stable row");
        assert!(
            hom * hom >= row.n,
            "hom(G) = {hom} below sqrt({}) on the clique-union family",
            row.n
        );
    }
    let mut rejected_seeds = 0usize;
    for seed in 0..20u64 {
        let all_unstable = sizes
            .iter()
            .all(|&n| find_half_graph(&gnp_half(n, seed), 4).is_some());
        if all_unstable {
            rejected_seeds += 1;
        }
    }
    assert!(
        rejected_seeds >= 18,
        "only {rejected_seeds}/20 control seeds rejected as unstable"
    );
    println!(
        "ACCEPTANCE stable-ramsey-trend: PASS (hom >= sqrt(n) on all clique unions; {rejected_seeds}/20 control seeds rejected)"
    );
}

/// Oracle equivalences: the half-graph search agrees with the exhaustive
/// all-tuples oracle on sampled graphs up to 7 vertices, and every 6-vertex
/// graph has a homogeneous set of size 3 (the R(3,3) suite).
#[test]
fn acceptance_oracle_equivalences() {
    let start = Instant::now();
    let mut rng = rng(0x0AC1E);
    let mut compared = 0usize;
    for n in 4..=7usize {
        for _ in 0..2000 {
            let g = random_graph(&mut rng, n, 0.5);
            for k in 2..=(n / 2) {
                let fast = find_half_graph(&g, k);
                let slow = brute_force_half_graph(&g, k);
                assert_eq!(fast.is_some(), slow.is_some(), "disagreement at n={n}, k={k}");
                if let Some(w) = fast {
                    assert!(w.validate(&g));
                }
                compared += 1;
            }
        }
    }

    // Exhaustive R(3,3): all 2^15 graphs on 6 vertices.
    for mask in 0u32..(1 << 15) {
        let mut g = Graph::new(6);
        let mut bit = 0;
        for u in 0..6 {
            for v in u + 1..6 {
                if mask >> bit & 1 == 1 {
                    g.add_edge(u, v).unwrap();
                }
                bit += 1;
            }
        }
        let hom = max_homogeneous(&g).hom;
        assert!(hom >= 3, "graph {mask:#x} has hom {hom} < 3");
    }
    let elapsed = start.elapsed();
    println!(
        "ACCEPTANCE oracle-equivalences: PASS ({compared} half-graph comparisons, 32768 R(3,3) graphs, {elapsed:?})"
    );
}
