//! Maximum clique and independent set by branch and bound with greedy
//! coloring bounds; hom(G) is the larger of the two.

use super::Graph;

#[derive(Debug, Clone, Copy)]
pub struct HomogeneousConfig {
    /// Largest vertex count solved exactly; beyond it a greedy lower bound
    /// is reported and flagged.
    pub exact_cap: usize,
}

impl Default for HomogeneousConfig {
    fn default() -> Self {
        HomogeneousConfig { exact_cap: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneousReport {
    pub clique: Vec<usize>,
    pub independent: Vec<usize>,
    pub hom: usize,
    /// False when the size cap degraded the search to a heuristic.
    pub exact: bool,
}

pub fn max_homogeneous(g: &Graph) -> HomogeneousReport {
    max_homogeneous_with(g, &HomogeneousConfig::default())
}

pub fn max_homogeneous_with(g: &Graph, cfg: &HomogeneousConfig) -> HomogeneousReport {
    let exact = g.vertex_count() <= cfg.exact_cap;
    let complement = g.complement();
    let (clique, independent) = if exact {
        (max_clique_exact(g), max_clique_exact(&complement))
    } else {
        (max_clique_greedy(g), max_clique_greedy(&complement))
    };
    let hom = clique.len().max(independent.len());
    HomogeneousReport {
        clique,
        independent,
        hom,
        exact,
    }
}

/// Exact maximum clique: branch and bound where candidates are greedily
/// colored and processed in descending color, pruning when the current
/// clique plus the color bound cannot beat the incumbent. Ties break toward
/// the lowest vertex index throughout, so the reported optimum is
/// deterministic.
fn max_clique_exact(g: &Graph) -> Vec<usize> {
    let n = g.vertex_count();
    if n == 0 {
        return Vec::new();
    }
    let mut best: Vec<usize> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let candidates: Vec<usize> = (0..n).collect();
    expand(g, &candidates, &mut current, &mut best);
    best.sort_unstable();
    best
}

fn expand(g: &Graph, candidates: &[usize], current: &mut Vec<usize>, best: &mut Vec<usize>) {
    if candidates.is_empty() {
        if current.len() > best.len() {
            *best = current.clone();
        }
        return;
    }
    // Greedy coloring in ascending vertex order; color number bounds the
    // clique size within the candidate set.
    let mut color_classes: Vec<Vec<usize>> = Vec::new();
    for &v in candidates {
        match color_classes
            .iter_mut()
            .find(|class| class.iter().all(|&u| !g.has_edge(u, v)))
        {
            Some(class) => class.push(v),
            None => color_classes.push(vec![v]),
        }
    }
    let mut order: Vec<(usize, usize)> = Vec::with_capacity(candidates.len());
    for (ci, class) in color_classes.iter().enumerate() {
        for &v in class {
            order.push((v, ci + 1));
        }
    }
    // Process in descending color bound.
    for i in (0..order.len()).rev() {
        let (v, bound) = order[i];
        if current.len() + bound <= best.len() {
            return;
        }
        current.push(v);
        let next: Vec<usize> = order[..i]
            .iter()
            .map(|&(u, _)| u)
            .filter(|&u| g.has_edge(u, v))
            .collect();
        expand(g, &next, current, best);
        current.pop();
    }
}

/// Greedy lower bound: scan vertices by descending degree (ties toward the
/// lower index) and keep those adjacent to everything kept.
fn max_clique_greedy(g: &Graph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    let mut kept: Vec<usize> = Vec::new();
    for v in order {
        if kept.iter().all(|&u| g.has_edge(u, v)) {
            kept.push(v);
        }
    }
    kept.sort_unstable();
    kept
}
