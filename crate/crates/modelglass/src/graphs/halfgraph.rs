//! Half-graph detection: ordered vertex sequences a1..ak, b1..bk with an
//! edge between a_i and b_j exactly when i < j, all 2k vertices distinct.
//! Nothing is required among the a's or among the b's. The same search,
//! run on the directed satisfaction matrix of a two-variable formula, decides
//! the order property.

use crate::logic::Formula;
use crate::model::{solution_set, EvalError, Model};

use super::Graph;

/// Ordered witness lists: edge(a_i, b_j) iff i < j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfGraphWitness {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl HalfGraphWitness {
    pub fn height(&self) -> usize {
        self.a.len()
    }

    /// Validates the defining edge pattern, independently of any search.
    pub fn validate(&self, g: &Graph) -> bool {
        let k = self.a.len();
        if self.b.len() != k {
            return false;
        }
        let mut all: Vec<usize> = self.a.iter().chain(&self.b).copied().collect();
        all.sort_unstable();
        all.dedup();
        if all.len() != 2 * k {
            return false;
        }
        for i in 0..k {
            for j in 0..k {
                if g.has_edge(self.a[i], self.b[j]) != (i < j) {
                    return false;
                }
            }
        }
        true
    }
}

/// Exact backtracking search for a height-k half-graph. Requires k >= 1 and
/// 2k <= n for a witness to be possible.
pub fn find_half_graph(g: &Graph, k: usize) -> Option<HalfGraphWitness> {
    let n = g.vertex_count();
    if k == 0 || 2 * k > n {
        return None;
    }
    let rows: Vec<&[u64]> = (0..n).map(|v| g.row(v)).collect();
    pattern_search(&rows, &rows, n, k).map(|(a, b)| HalfGraphWitness { a, b })
}

/// Order-property search for a formula with designated variable split
/// (x; y): elements a1..ak, b1..bk, all distinct, with phi(a_i; b_j) iff
/// i < j. Agreement with `find_half_graph` on graphs with phi = E(x, y) is a
/// cross-check of both searches.
pub fn order_property(
    model: &Model,
    phi: &Formula,
    x: &str,
    y: &str,
    k: usize,
) -> Result<Option<HalfGraphWitness>, EvalError> {
    let free = phi.free_variables();
    let expected: std::collections::BTreeSet<String> =
        [x.to_string(), y.to_string()].into_iter().collect();
    let got: std::collections::BTreeSet<String> = free.into_iter().collect();
    if got != expected || x == y {
        return Err(EvalError::VarsDontCoverFree {
            vars: vec![x.to_string(), y.to_string()],
            free: got.into_iter().collect(),
        });
    }
    let n = model.size();
    if k == 0 || 2 * k > n {
        return Ok(None);
    }
    let sol = solution_set(model, phi, &[x, y])?;
    let words = n.div_ceil(64);
    let mut rows_out = vec![vec![0u64; words]; n];
    let mut cols_in = vec![vec![0u64; words]; n];
    for t in &sol.tuples {
        let (a, b) = (t[0], t[1]);
        rows_out[a][b / 64] |= 1 << (b % 64);
        cols_in[b][a / 64] |= 1 << (a % 64);
    }
    let out_refs: Vec<&[u64]> = rows_out.iter().map(|r| r.as_slice()).collect();
    let in_refs: Vec<&[u64]> = cols_in.iter().map(|r| r.as_slice()).collect();
    Ok(pattern_search(&out_refs, &in_refs, n, k).map(|(a, b)| HalfGraphWitness { a, b }))
}

/// Backtracking over interleaved choices a_1, b_1, a_2, b_2, ...
///
/// Candidate invariants at step i (0-based):
///   - a_i must relate to none of b_1..b_i, so the a-candidates shrink by
///     the in-neighborhood of each chosen b;
///   - b_i must relate to all of a_1..a_i and not to a_{i+1}, so the
///     b-candidates shrink to the out-neighborhood of each chosen a.
fn pattern_search(
    rows_out: &[&[u64]],
    cols_in: &[&[u64]],
    n: usize,
    k: usize,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let words = n.div_ceil(64);
    let mut full = vec![!0u64; words];
    if n % 64 != 0 {
        full[words - 1] = (1u64 << (n % 64)) - 1;
    }
    let mut a = Vec::with_capacity(k);
    let mut b = Vec::with_capacity(k);
    let mut used = vec![0u64; words];
    if search_step(
        rows_out, cols_in, n, k, &full, &full, &mut used, &mut a, &mut b,
    ) {
        Some((a, b))
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn search_step(
    rows_out: &[&[u64]],
    cols_in: &[&[u64]],
    n: usize,
    k: usize,
    cand_a: &[u64],
    cand_b: &[u64],
    used: &mut Vec<u64>,
    a: &mut Vec<usize>,
    b: &mut Vec<usize>,
) -> bool {
    if a.len() == k {
        return true;
    }
    let remaining = k - a.len();
    if count_excluding(cand_a, used) < remaining || count_excluding(cand_b, used) < remaining {
        return false;
    }
    for ai in iter_bits(cand_a, n) {
        if get(used, ai) {
            continue;
        }
        set(used, ai, true);
        a.push(ai);
        // b_i: related to all earlier a's (already in cand_b), not to a_i.
        let bcand: Vec<u64> = (0..cand_b.len())
            .map(|w| cand_b[w] & !rows_out[ai][w])
            .collect();
        for bi in iter_bits(&bcand, n) {
            if get(used, bi) {
                continue;
            }
            set(used, bi, true);
            b.push(bi);
            let next_a: Vec<u64> = (0..cand_a.len())
                .map(|w| cand_a[w] & !cols_in[bi][w])
                .collect();
            let next_b: Vec<u64> = (0..cand_b.len())
                .map(|w| cand_b[w] & rows_out[ai][w])
                .collect();
            if search_step(rows_out, cols_in, n, k, &next_a, &next_b, used, a, b) {
                return true;
            }
            b.pop();
            set(used, bi, false);
        }
        a.pop();
        set(used, ai, false);
    }
    false
}

fn get(mask: &[u64], i: usize) -> bool {
    mask[i / 64] >> (i % 64) & 1 == 1
}

fn set(mask: &mut [u64], i: usize, value: bool) {
    if value {
        mask[i / 64] |= 1 << (i % 64);
    } else {
        mask[i / 64] &= !(1 << (i % 64));
    }
}

fn count_excluding(mask: &[u64], used: &[u64]) -> usize {
    mask.iter()
        .zip(used)
        .map(|(m, u)| (m & !u).count_ones() as usize)
        .sum()
}

fn iter_bits<'a>(mask: &'a [u64], n: usize) -> impl Iterator<Item = usize> + 'a {
    (0..n).filter(move |&i| get(mask, i))
}
