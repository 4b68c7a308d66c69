//! Homogeneous-set growth reports across graph families.
//!
//! Each instance is certified half-graph-free before it contributes a row;
//! unstable instances are skipped and logged. The report tabulates hom(G)
//! and the empirical exponent log_n hom(G) so that polynomial growth shows
//! up as a roughly constant column; no constant is asserted beyond the data.

use std::fmt;
use std::str::FromStr;

use super::generators::{complete_multipartite, gnp_half, union_of_cliques};
use super::{find_half_graph, max_homogeneous, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RamseyFamily {
    /// Disjoint cliques, about sqrt(n) of them.
    CliqueUnions,
    /// Complete multipartite with about sqrt(n) classes.
    Multipartite,
    /// G(n, 1/2) control; expected to be rejected as unstable.
    Gnp,
}

impl RamseyFamily {
    pub fn generate(self, n: usize, seed: u64) -> Graph {
        let parts = isqrt(n).max(1);
        match self {
            RamseyFamily::CliqueUnions => union_of_cliques(n, parts),
            RamseyFamily::Multipartite => complete_multipartite(n, parts),
            RamseyFamily::Gnp => gnp_half(n, seed),
        }
    }
}

impl FromStr for RamseyFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cliques" => Ok(RamseyFamily::CliqueUnions),
            "multipartite" => Ok(RamseyFamily::Multipartite),
            "gnp" => Ok(RamseyFamily::Gnp),
            other => Err(format!(
                "unknown family `{other}` (expected cliques, multipartite, or gnp)"
            )),
        }
    }
}

impl fmt::Display for RamseyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RamseyFamily::CliqueUnions => write!(f, "cliques"),
            RamseyFamily::Multipartite => write!(f, "multipartite"),
            RamseyFamily::Gnp => write!(f, "gnp"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RamseyRow {
    pub n: usize,
    /// Certified free of half-graphs of the report's height.
    pub stable: bool,
    /// hom(G) for stable instances; skipped instances carry none.
    pub hom: Option<usize>,
    pub clique_size: Option<usize>,
    pub independent_size: Option<usize>,
    /// log_n hom(G).
    pub exponent: Option<f64>,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RamseyReport {
    pub family: RamseyFamily,
    pub half_graph_bound: usize,
    pub seed: u64,
    pub rows: Vec<RamseyRow>,
    pub skipped: usize,
}

/// Runs the family at each size, certifying k-stability per instance.
pub fn stable_ramsey_report(
    family: RamseyFamily,
    sizes: &[usize],
    k: usize,
    seed: u64,
) -> RamseyReport {
    let mut rows = Vec::with_capacity(sizes.len());
    let mut skipped = 0;
    for (idx, &n) in sizes.iter().enumerate() {
        let g = family.generate(n, seed.wrapping_add(idx as u64));
        let stable = find_half_graph(&g, k).is_none();
        if !stable {
            skipped += 1;
            rows.push(RamseyRow {
                n,
                stable: false,
                hom: None,
                clique_size: None,
                independent_size: None,
                exponent: None,
                exact: false,
            });
            continue;
        }
        let report = max_homogeneous(&g);
        let exponent = if n > 1 && report.hom > 0 {
            Some((report.hom as f64).ln() / (n as f64).ln())
        } else {
            None
        };
        rows.push(RamseyRow {
            n,
            stable: true,
            hom: Some(report.hom),
            clique_size: Some(report.clique.len()),
            independent_size: Some(report.independent.len()),
            exponent,
            exact: report.exact,
        });
    }
    RamseyReport {
        family,
        half_graph_bound: k,
        seed,
        rows,
        skipped,
    }
}

fn isqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    while r * r > n {
        r -= 1;
    }
    r
}
