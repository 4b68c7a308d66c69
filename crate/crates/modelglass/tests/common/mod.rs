//! Seeded random generators and independent oracles shared by the
//! integration suites. Everything here is deliberately separate from the
//! library's own evaluation paths so that cross-checks stay meaningful.

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

use modelglass::graphs::{Graph, HalfGraphWitness};
use modelglass::logic::{Fixity, Formula, Signature, Term};
use modelglass::model::Model;

pub fn rng(seed: u64) -> SmallRng {
    SmallRng::seed_from_u64(seed)
}

/// A random small signature. Symbol names never collide with the variable
/// pool, and numeric constant names are avoided so element literals print
/// unambiguously.
pub fn random_signature(rng: &mut SmallRng) -> Signature {
    let mut sig = Signature::new();
    let rel_pool: [(&str, usize, Fixity); 4] = [
        ("P", 1, Fixity::Prefix),
        ("R", 2, Fixity::Prefix),
        ("<", 2, Fixity::Infix),
        ("~", 2, Fixity::Infix),
    ];
    let fun_pool: [(&str, usize, Fixity); 4] = [
        ("f", 1, Fixity::Prefix),
        ("g", 2, Fixity::Prefix),
        ("+", 2, Fixity::Infix),
        ("*", 2, Fixity::Infix),
    ];
    for (name, arity, fixity) in rel_pool {
        if rng.random_bool(0.5) {
            sig.declare_relation(name, arity, fixity).unwrap();
        }
    }
    for (name, arity, fixity) in fun_pool {
        if rng.random_bool(0.4) {
            sig.declare_function(name, arity, fixity).unwrap();
        }
    }
    for name in ["c", "d"] {
        if rng.random_bool(0.5) {
            sig.declare_constant(name).unwrap();
        }
    }
    sig
}

pub const VAR_POOL: [&str; 5] = ["x", "y", "z", "u", "w"];

pub fn random_term(rng: &mut SmallRng, sig: &Signature, depth: usize) -> Term {
    let functions: Vec<String> = sig.function_names().map(String::from).collect();
    let constants: Vec<String> = sig.constant_names().map(String::from).collect();
    let roll = rng.random_range(0..10);
    if depth > 0 && !functions.is_empty() && roll < 4 {
        let f = &functions[rng.random_range(0..functions.len())];
        let arity = sig.function(f).unwrap().arity;
        let args = (0..arity).map(|_| random_term(rng, sig, depth - 1)).collect();
        Term::apply(f, args)
    } else if !constants.is_empty() && roll < 6 {
        Term::constant(&constants[rng.random_range(0..constants.len())])
    } else if roll == 6 {
        // Element literal, skipping numerals shadowed by constants.
        let e = rng.random_range(0..4usize);
        if sig.is_constant(&e.to_string()) {
            Term::var(VAR_POOL[rng.random_range(0..VAR_POOL.len())])
        } else {
            Term::Element(e)
        }
    } else {
        Term::var(VAR_POOL[rng.random_range(0..VAR_POOL.len())])
    }
}

fn random_atom(rng: &mut SmallRng, sig: &Signature, term_depth: usize) -> Formula {
    let mut relations: Vec<String> = sig.relation_names().map(String::from).collect();
    relations.push("=".to_string());
    let r = &relations[rng.random_range(0..relations.len())];
    let arity = if r == "=" { 2 } else { sig.relation(r).unwrap().arity };
    let terms = (0..arity)
        .map(|_| random_term(rng, sig, term_depth))
        .collect();
    Formula::atomic(r, terms)
}

/// A random formula of quantifier/connective depth at most `depth`.
pub fn random_formula(rng: &mut SmallRng, sig: &Signature, depth: usize) -> Formula {
    if depth == 0 {
        return random_atom(rng, sig, 1);
    }
    match rng.random_range(0..8) {
        0 => random_atom(rng, sig, 2),
        1 => Formula::not(random_formula(rng, sig, depth - 1)),
        2 => Formula::and(
            random_formula(rng, sig, depth - 1),
            random_formula(rng, sig, depth - 1),
        ),
        3 => Formula::or(
            random_formula(rng, sig, depth - 1),
            random_formula(rng, sig, depth - 1),
        ),
        4 => Formula::implies(
            random_formula(rng, sig, depth - 1),
            random_formula(rng, sig, depth - 1),
        ),
        5 => Formula::iff(
            random_formula(rng, sig, depth - 1),
            random_formula(rng, sig, depth - 1),
        ),
        6 => Formula::forall(
            VAR_POOL[rng.random_range(0..VAR_POOL.len())],
            random_formula(rng, sig, depth - 1),
        ),
        _ => Formula::exists(
            VAR_POOL[rng.random_range(0..VAR_POOL.len())],
            random_formula(rng, sig, depth - 1),
        ),
    }
}

/// Closes a random formula into a sentence by quantifying its free variables.
pub fn random_sentence(rng: &mut SmallRng, sig: &Signature, depth: usize) -> Formula {
    let mut f = random_formula(rng, sig, depth);
    for v in f.free_variables() {
        f = if rng.random_bool(0.5) {
            Formula::forall(&v, f)
        } else {
            Formula::exists(&v, f)
        };
    }
    f
}

/// A random model of the given size: relation tuples coin-flipped, function
/// values and constants uniform.
pub fn random_model(rng: &mut SmallRng, sig: &Signature, size: usize) -> Model {
    let mut b = Model::builder(sig.clone(), size);
    let rel_names: Vec<String> = sig.relation_names().map(String::from).collect();
    for r in rel_names {
        let arity = sig.relation(&r).unwrap().arity;
        for tuple in tuples(size, arity) {
            if rng.random_bool(0.5) {
                b.add_rel_tuple(&r, &tuple).unwrap();
            }
        }
    }
    let fun_names: Vec<String> = sig.function_names().map(String::from).collect();
    for f in fun_names {
        let arity = sig.function(&f).unwrap().arity;
        for tuple in tuples(size, arity) {
            b.set_function(&f, &tuple, rng.random_range(0..size)).unwrap();
        }
    }
    let const_names: Vec<String> = sig.constant_names().map(String::from).collect();
    for c in const_names {
        b.set_constant(&c, rng.random_range(0..size)).unwrap();
    }
    b.finish().unwrap()
}

pub fn tuples(n: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for e in 0..n {
                let mut t = t.clone();
                t.push(e);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

pub fn random_graph(rng: &mut SmallRng, n: usize, p: f64) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    g
}

/// All-ordered-tuples half-graph oracle, independent of the search's pruning.
pub fn brute_force_half_graph(g: &Graph, k: usize) -> Option<HalfGraphWitness> {
    let n = g.vertex_count();
    if 2 * k > n {
        return None;
    }
    let mut chosen = Vec::new();
    search_tuples(n, 2 * k, &mut chosen, &mut |tuple: &[usize]| {
        let w = HalfGraphWitness {
            a: tuple[..k].to_vec(),
            b: tuple[k..].to_vec(),
        };
        w.validate(g).then_some(w)
    })
}

fn search_tuples<T>(
    n: usize,
    len: usize,
    chosen: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]) -> Option<T>,
) -> Option<T> {
    if chosen.len() == len {
        return f(chosen);
    }
    for v in 0..n {
        if chosen.contains(&v) {
            continue;
        }
        chosen.push(v);
        if let Some(t) = search_tuples(n, len, chosen, f) {
            return Some(t);
        }
        chosen.pop();
    }
    None
}
