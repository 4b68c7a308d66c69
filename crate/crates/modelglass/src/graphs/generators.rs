//! Deterministic graph generators for benchmarks and tests.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Graph;

/// Disjoint union of `parts` cliques with sizes differing by at most one.
pub fn union_of_cliques(n: usize, parts: usize) -> Graph {
    assert!(parts >= 1 && parts <= n.max(1));
    let mut g = Graph::new(n);
    for (lo, hi) in part_bounds(n, parts) {
        for u in lo..hi {
            for v in u + 1..hi {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    g
}

/// Complete multipartite graph with `parts` classes of near-equal size: all
/// edges across classes, none within. The complement of a clique union with
/// the same class sizes.
pub fn complete_multipartite(n: usize, parts: usize) -> Graph {
    union_of_cliques(n, parts).complement()
}

fn part_bounds(n: usize, parts: usize) -> Vec<(usize, usize)> {
    let base = n / parts;
    let extra = n % parts;
    let mut out = Vec::with_capacity(parts);
    let mut lo = 0;
    for i in 0..parts {
        let size = base + usize::from(i < extra);
        out.push((lo, lo + size));
        lo += size;
    }
    out
}

/// Complete bipartite graph with sides of size m and n.
pub fn complete_bipartite(m: usize, n: usize) -> Graph {
    let mut g = Graph::new(m + n);
    for u in 0..m {
        for v in m..m + n {
            g.add_edge(u, v).unwrap();
        }
    }
    g
}

/// The explicit half-graph of height k: vertices 0..k are the a-side,
/// k..2k the b-side, with an edge a_i b_j exactly when i < j (1-based).
pub fn half_graph(k: usize) -> Graph {
    let mut g = Graph::new(2 * k);
    for i in 1..=k {
        for j in 1..=k {
            if i < j {
                g.add_edge(i - 1, k + j - 1).unwrap();
            }
        }
    }
    g
}

/// Erdős–Rényi G(n, 1/2), deterministic under the seed.
pub fn gnp_half(n: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(0.5) {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    g
}
