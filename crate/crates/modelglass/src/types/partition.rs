//! Rank-bounded complete types over a finite model, computed as the
//! Ehrenfeucht–Fraïssé refinement: two elements share a block iff they
//! satisfy the same one-free-variable formulas of quantifier rank at most
//! `rank` with parameters from `A`. In a finite model every complete type is
//! the type of an element, so blocks are the canonical representation.

use std::collections::HashMap;

use crate::model::{EvalError, Model};

#[derive(Debug, Clone, Copy)]
pub struct TypePartitionConfig {
    /// Cap on n^(rank+1), the number of tuples refined.
    pub max_tuples: usize,
    /// Function nesting depth in the atomic diagram.
    pub term_depth: usize,
}

impl Default for TypePartitionConfig {
    fn default() -> Self {
        TypePartitionConfig {
            max_tuples: 1 << 20,
            term_depth: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypePartition {
    pub params: Vec<usize>,
    pub rank: usize,
    /// Disjoint blocks covering the domain, each sorted, ordered by least
    /// element.
    pub blocks: Vec<Vec<usize>>,
    /// Least element of each block.
    pub witnesses: Vec<usize>,
    /// False when function symbols truncated the atomic diagram at the term
    /// depth cap, making the partition an upper approximation.
    pub atoms_exhaustive: bool,
}

impl TypePartition {
    pub fn block_of(&self, element: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.contains(&element))
            .expect("element outside domain")
    }
}

pub fn complete_types(
    model: &Model,
    params: &[usize],
    rank: usize,
) -> Result<TypePartition, EvalError> {
    complete_types_with(model, params, rank, &TypePartitionConfig::default())
}

pub fn complete_types_with(
    model: &Model,
    params: &[usize],
    rank: usize,
    cfg: &TypePartitionConfig,
) -> Result<TypePartition, EvalError> {
    let n = model.size();
    for &p in params {
        if p >= n {
            return Err(EvalError::ElementOutOfRange {
                element: p,
                size: n,
            });
        }
    }
    let width = rank + 1;
    crate::model::space_size(n, width)
        .filter(|&s| s <= cfg.max_tuples)
        .ok_or(EvalError::CapExceeded {
            needed: crate::model::space_size(n, width).unwrap_or(usize::MAX),
            cap: cfg.max_tuples,
            unit: "tuples",
        })?;

    // Level 0 for every tuple length 1..=width: atomic types.
    let mut levels: Vec<Vec<Vec<u32>>> = Vec::new(); // levels[j][m-1] = ids of length-m tuples
    let mut level0: Vec<Vec<u32>> = Vec::new();
    for m in 1..=width {
        let count = pow(n, m);
        let mut interner: HashMap<Vec<bool>, u32> = HashMap::new();
        let mut ids = Vec::with_capacity(count);
        let mut tuple = vec![0usize; m];
        for _ in 0..count {
            let key = atomic_key(model, &tuple, params, cfg.term_depth);
            let next = interner.len() as u32;
            let id = *interner.entry(key).or_insert(next);
            ids.push(id);
            increment(&mut tuple, n);
        }
        level0.push(ids);
    }
    levels.push(level0);

    // Level j from level j-1: id(a) = (prev id(a), { prev id(a.b) : b }).
    for j in 1..=rank {
        let prev = &levels[j - 1];
        let mut level: Vec<Vec<u32>> = Vec::new();
        for m in 1..=width - j {
            let count = pow(n, m);
            let mut interner: HashMap<(u32, Vec<u32>), u32> = HashMap::new();
            let mut ids = Vec::with_capacity(count);
            for idx in 0..count {
                let own = prev[m - 1][idx];
                let mut extensions: Vec<u32> =
                    (0..n).map(|b| prev[m][idx * n + b]).collect();
                extensions.sort_unstable();
                extensions.dedup();
                let key = (own, extensions);
                let next = interner.len() as u32;
                let id = *interner.entry(key).or_insert(next);
                ids.push(id);
            }
            level.push(ids);
        }
        levels.push(level);
    }

    let final_ids = &levels[rank][0];
    let mut blocks_by_id: HashMap<u32, Vec<usize>> = HashMap::new();
    for (e, &id) in final_ids.iter().enumerate() {
        blocks_by_id.entry(id).or_default().push(e);
    }
    let mut blocks: Vec<Vec<usize>> = blocks_by_id.into_values().collect();
    blocks.sort_by_key(|b| b[0]);
    let witnesses = blocks.iter().map(|b| b[0]).collect();
    Ok(TypePartition {
        params: params.to_vec(),
        rank,
        blocks,
        witnesses,
        atoms_exhaustive: model.signature().function_names().next().is_none(),
    })
}

fn pow(n: usize, k: usize) -> usize {
    n.pow(k as u32)
}

fn increment(digits: &mut [usize], n: usize) {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < n {
            return;
        }
        *d = 0;
    }
}

/// The atomic diagram of the pool [tuple, params, constants, function
/// closure to `term_depth`]: for every relation (equality included) and every
/// argument selection from the pool, one bit.
fn atomic_key(model: &Model, tuple: &[usize], params: &[usize], term_depth: usize) -> Vec<bool> {
    let sig = model.signature();
    let mut pool: Vec<usize> = tuple.to_vec();
    pool.extend_from_slice(params);
    for c in sig.constant_names() {
        pool.push(model.constant_value(c).unwrap());
    }
    let mut lo = 0;
    for _ in 0..term_depth {
        let hi = pool.len();
        if sig.function_names().next().is_none() || pool.len() > 24 {
            break;
        }
        for f in sig.function_names().map(String::from).collect::<Vec<_>>() {
            let arity = sig.function(&f).unwrap().arity;
            let mut sel = vec![0usize; arity];
            loop {
                if sel.iter().any(|&i| i >= lo) {
                    let args: Vec<usize> = sel.iter().map(|&i| pool[i]).collect();
                    pool.push(model.fun_value(&f, &args).unwrap());
                }
                if !increment_radix(&mut sel, hi) {
                    break;
                }
            }
        }
        lo = hi;
    }

    let mut key = Vec::new();
    // Equality pattern.
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            key.push(pool[i] == pool[j]);
        }
    }
    for r in sig.relation_names() {
        let arity = sig.relation(r).unwrap().arity;
        let mut sel = vec![0usize; arity];
        loop {
            let args: Vec<usize> = sel.iter().map(|&i| pool[i]).collect();
            key.push(model.rel_holds(r, &args).unwrap());
            if !increment_radix(&mut sel, pool.len()) {
                break;
            }
        }
    }
    key
}

fn increment_radix(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Signature;
    use crate::model::solution_set;

    #[test]
    fn dlo_chain_with_midpoint_parameter() {
        // Rank 0 over {2}: below, equal, above.
        let m = Model::chain(5);
        let p = complete_types(&m, &[2], 0).unwrap();
        assert_eq!(p.blocks, vec![vec![0, 1], vec![2], vec![3, 4]]);
        assert_eq!(p.witnesses, vec![0, 2, 3]);
    }

    #[test]
    fn full_parameter_set_isolates_every_element() {
        let m = Model::chain(4);
        let p = complete_types(&m, &[0, 1, 2, 3], 0).unwrap();
        assert_eq!(p.blocks.len(), 4);
        assert!(p.blocks.iter().all(|b| b.len() == 1));
    }

    #[test]
    fn edgeless_graph_has_one_type() {
        let m = Model::builder(Signature::graph(), 5).finish().unwrap();
        for rank in 0..=2 {
            let p = complete_types(&m, &[], rank).unwrap();
            assert_eq!(p.blocks.len(), 1, "rank {rank}");
        }
    }

    /// Orbit oracle: elements in the same automorphism orbit must share a
    /// block, so blocks are unions of orbits.
    #[test]
    fn blocks_are_unions_of_automorphism_orbits() {
        let mut b = Model::builder(Signature::graph(), 5);
        // A path 0-1-2 plus two isolated vertices 3, 4.
        for (u, v) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
            b.add_rel_tuple("E", &[u, v]).unwrap();
        }
        let m = b.finish().unwrap();
        let orbits = automorphism_orbits(&m);
        for rank in 0..=2 {
            let p = complete_types(&m, &[], rank).unwrap();
            for orbit in &orbits {
                let blocks: std::collections::BTreeSet<usize> =
                    orbit.iter().map(|&e| p.block_of(e)).collect();
                assert_eq!(blocks.len(), 1, "orbit {orbit:?} split at rank {rank}");
            }
        }
        // Rank 1 sees only "has a neighbor", so the path is one block;
        // telling the degree-2 midpoint apart needs two nested quantifiers.
        let p1 = complete_types(&m, &[], 1).unwrap();
        assert_eq!(p1.blocks, vec![vec![0, 1, 2], vec![3, 4]]);
        let p2 = complete_types(&m, &[], 2).unwrap();
        assert_eq!(p2.blocks, vec![vec![0, 2], vec![1], vec![3, 4]]);
    }

    fn automorphism_orbits(m: &Model) -> Vec<Vec<usize>> {
        let n = m.size();
        let mut orbit_of: Vec<usize> = (0..n).collect();
        permutations(n, &mut |perm| {
            if is_automorphism(m, perm) {
                for e in 0..n {
                    let root = orbit_of[e].min(orbit_of[perm[e]]);
                    let (a, b) = (orbit_of[e], orbit_of[perm[e]]);
                    for x in orbit_of.iter_mut() {
                        if *x == a || *x == b {
                            *x = root;
                        }
                    }
                }
            }
        });
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for e in 0..n {
            groups.entry(orbit_of[e]).or_default().push(e);
        }
        groups.into_values().collect()
    }

    fn is_automorphism(m: &Model, perm: &[usize]) -> bool {
        let n = m.size();
        for u in 0..n {
            for v in 0..n {
                if m.rel_holds("E", &[u, v]).unwrap()
                    != m.rel_holds("E", &[perm[u], perm[v]]).unwrap()
                {
                    return false;
                }
            }
        }
        true
    }

    fn permutations(n: usize, f: &mut impl FnMut(&[usize])) {
        let mut perm: Vec<usize> = (0..n).collect();
        heap_permute(&mut perm, n, f);
    }

    fn heap_permute(perm: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k <= 1 {
            f(perm);
            return;
        }
        for i in 0..k {
            heap_permute(perm, k - 1, f);
            if k % 2 == 0 {
                perm.swap(i, k - 1);
            } else {
                perm.swap(0, k - 1);
            }
        }
    }

    #[test]
    fn raising_rank_only_refines() {
        let mut b = Model::builder(Signature::graph(), 6);
        for (u, v) in [(0, 1), (1, 2), (2, 3), (3, 4)] {
            b.add_rel_tuple("E", &[u, v]).unwrap();
            b.add_rel_tuple("E", &[v, u]).unwrap();
        }
        let m = b.finish().unwrap();
        let mut prev = complete_types(&m, &[], 0).unwrap();
        for rank in 1..=3 {
            let cur = complete_types(&m, &[], rank).unwrap();
            for block in &cur.blocks {
                let parents: std::collections::BTreeSet<usize> =
                    block.iter().map(|&e| prev.block_of(e)).collect();
                assert_eq!(parents.len(), 1, "rank {rank} merged blocks");
            }
            assert!(cur.blocks.len() >= prev.blocks.len());
            prev = cur;
        }
    }

    /// Elements of one block satisfy the same sampled rank-bounded formulas.
    #[test]
    fn blocks_agree_on_sampled_formulas() {
        let m = Model::chain(5);
        let p = complete_types(&m, &[2], 1).unwrap();
        // A fixed pool of rank-<=1 formulas with parameter 2.
        let texts = [
            "x < 2",
            "x = 2",
            "2 < x",
            "exists y. (x < y & y < 2)",
            "exists y. (2 < y & y < x)",
            "forall y. (y < x -> y < 2)",
            "exists y. y < x",
            "forall y. x < y | x = y | y < x",
        ];
        for text in texts {
            let f = crate::logic::parse_formula(text, m.signature()).unwrap();
            let sol = solution_set(&m, &f, &["x"]).unwrap();
            for block in &p.blocks {
                let vals: std::collections::BTreeSet<bool> = block
                    .iter()
                    .map(|&e| sol.tuples.contains(&vec![e]))
                    .collect();
                assert_eq!(vals.len(), 1, "block {block:?} disagrees on {text}");
            }
        }
    }
}
