//! The symbolic type space of a dense linear order without endpoints over a
//! finite parameter set.
//!
//! Over parameters a1 < ... < an there are exactly 2n+1 complete 1-types:
//! one realized type per parameter, one type per interior gap, and the two
//! end types below and above everything. The infinite model realizes only
//! the parameter types; cuts and ends are omitted. No finite structure is
//! involved here; the shapes are derived from the order axioms alone and
//! cross-checked by the sign-vector oracle in the tests.

use serde::Serialize;

/// Shape of a complete 1-type over parameters a1 < ... < an.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DloTypeShape {
    /// x = a_i (1-based), realized by the parameter itself.
    Element { index: usize },
    /// a_i < x < a_{i+1}: an interior gap, omitted.
    Gap { left: usize, right: usize },
    /// x < a_1, omitted.
    BelowAll,
    /// x > a_n, omitted.
    AboveAll,
    /// No parameters: the unique type x = x.
    Unconstrained,
}

impl DloTypeShape {
    pub fn realized(&self) -> bool {
        matches!(self, DloTypeShape::Element { .. } | DloTypeShape::Unconstrained)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DloTypeSpace {
    pub param_count: usize,
    pub count: usize,
    pub shapes: Vec<DloTypeShape>,
    pub descriptions: Vec<String>,
}

/// The complete 1-types of a dense linear order without endpoints over n
/// parameters: 2n+1 of them.
pub fn count_dlo_types(param_count: usize) -> DloTypeSpace {
    let n = param_count;
    let mut shapes = Vec::new();
    if n == 0 {
        shapes.push(DloTypeShape::Unconstrained);
    } else {
        shapes.push(DloTypeShape::BelowAll);
        for i in 1..=n {
            shapes.push(DloTypeShape::Element { index: i });
            if i < n {
                shapes.push(DloTypeShape::Gap { left: i, right: i + 1 });
            }
        }
        shapes.push(DloTypeShape::AboveAll);
    }
    let descriptions = shapes
        .iter()
        .map(|s| match s {
            DloTypeShape::Unconstrained => "x = x".to_string(),
            DloTypeShape::BelowAll => "x < a1".to_string(),
            DloTypeShape::AboveAll => format!("x > a{n}"),
            DloTypeShape::Element { index } => format!("x = a{index}"),
            DloTypeShape::Gap { left, right } => format!("a{left} < x < a{right}"),
        })
        .collect();
    DloTypeSpace {
        param_count: n,
        count: shapes.len(),
        shapes,
        descriptions,
    }
}
