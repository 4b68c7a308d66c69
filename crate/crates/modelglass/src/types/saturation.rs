//! Embedding-relative saturation reports: which rank-bounded types of the
//! larger structure are realized inside the image of an embedded one.

use std::collections::BTreeSet;

use super::partial::TypeError;
use super::partition::{complete_types_with, TypePartitionConfig};
use crate::model::Model;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeRealization {
    /// The realization set of the type in the big model.
    pub block: Vec<usize>,
    /// Least element of the block (always realizes the type in the big
    /// model).
    pub witness: usize,
    /// An image element realizing the type, when one exists.
    pub realized_by_image: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaturationReport {
    pub rank: usize,
    pub params: Vec<usize>,
    pub types: Vec<TypeRealization>,
    /// Types realized in the big model but missed by the image.
    pub omitted_count: usize,
}

impl SaturationReport {
    pub fn omitted(&self) -> impl Iterator<Item = &TypeRealization> {
        self.types.iter().filter(|t| t.realized_by_image.is_none())
    }
}

/// Lists the complete rank-bounded types of `big` over `params` (which must
/// lie in the image of the embedding), marking each as realized or omitted
/// by the image. `embedding[e]` is the image in `big` of element `e` of
/// `small`; it must be injective and preserve and reflect all atomic
/// formulas.
pub fn saturation_report(
    small: &Model,
    big: &Model,
    embedding: &[usize],
    params: &[usize],
    rank: usize,
) -> Result<SaturationReport, TypeError> {
    check_embedding(small, big, embedding)?;
    let image: BTreeSet<usize> = embedding.iter().copied().collect();
    for &p in params {
        if !image.contains(&p) {
            return Err(TypeError::NotAnEmbedding(format!(
                "parameter {p} is not in the image of the embedding"
            )));
        }
    }
    let partition = complete_types_with(big, params, rank, &TypePartitionConfig::default())
        .map_err(TypeError::Eval)?;
    let types: Vec<TypeRealization> = partition
        .blocks
        .iter()
        .map(|block| TypeRealization {
            block: block.clone(),
            witness: block[0],
            realized_by_image: block.iter().copied().find(|e| image.contains(e)),
        })
        .collect();
    let omitted_count = types.iter().filter(|t| t.realized_by_image.is_none()).count();
    Ok(SaturationReport {
        rank,
        params: params.to_vec(),
        types,
        omitted_count,
    })
}

fn check_embedding(small: &Model, big: &Model, embedding: &[usize]) -> Result<(), TypeError> {
    let err = |msg: String| Err(TypeError::NotAnEmbedding(msg));
    if !small.signature().same_symbols(big.signature()) {
        return err("signatures differ".to_string());
    }
    if embedding.len() != small.size() {
        return err(format!(
            "map has {} entries for a domain of size {}",
            embedding.len(),
            small.size()
        ));
    }
    let mut seen = BTreeSet::new();
    for &img in embedding {
        if img >= big.size() {
            return err(format!("image element {img} out of range"));
        }
        if !seen.insert(img) {
            return err(format!("map is not injective at image {img}"));
        }
    }
    let sig = small.signature();
    let n = small.size();
    for r in sig.relation_names() {
        let arity = sig.relation(r).unwrap().arity;
        let mut tuple = vec![0usize; arity];
        loop {
            let mapped: Vec<usize> = tuple.iter().map(|&e| embedding[e]).collect();
            let here = small.rel_holds(r, &tuple).map_err(TypeError::Eval)?;
            let there = big.rel_holds(r, &mapped).map_err(TypeError::Eval)?;
            if here != there {
                return err(format!(
                    "relation {r} not preserved at {tuple:?} (image {mapped:?})"
                ));
            }
            if !next_tuple(&mut tuple, n) {
                break;
            }
        }
    }
    for f in sig.function_names() {
        let arity = sig.function(f).unwrap().arity;
        let mut tuple = vec![0usize; arity];
        loop {
            let mapped: Vec<usize> = tuple.iter().map(|&e| embedding[e]).collect();
            let here = small.fun_value(f, &tuple).map_err(TypeError::Eval)?;
            let there = big.fun_value(f, &mapped).map_err(TypeError::Eval)?;
            if embedding[here] != there {
                return err(format!("function {f} not preserved at {tuple:?}"));
            }
            if !next_tuple(&mut tuple, n) {
                break;
            }
        }
    }
    for c in sig.constant_names() {
        if embedding[small.constant_value(c).unwrap()] != big.constant_value(c).unwrap() {
            return err(format!("constant {c} not preserved"));
        }
    }
    Ok(())
}

fn next_tuple(digits: &mut [usize], n: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < n {
            return true;
        }
        *d = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_type_omitted_by_sparse_embedding() {
        // 0 < 1 embeds into 0 < 1 < 2 as 0 -> 0, 1 -> 2; the middle element
        // realizes the gap type, which the image omits.
        let small = Model::chain(2);
        let big = Model::chain(3);
        let report = saturation_report(&small, &big, &[0, 2], &[0, 2], 0).unwrap();
        assert_eq!(report.types.len(), 3);
        assert_eq!(report.omitted_count, 1);
        let omitted: Vec<&TypeRealization> = report.omitted().collect();
        assert_eq!(omitted[0].block, vec![1]);
    }

    #[test]
    fn identity_embedding_omits_nothing() {
        let m = Model::chain(4);
        let id: Vec<usize> = (0..4).collect();
        let report = saturation_report(&m, &m, &id, &[1, 2], 1).unwrap();
        assert_eq!(report.omitted_count, 0);
    }

    #[test]
    fn order_breaking_map_rejected() {
        let small = Model::chain(2);
        let big = Model::chain(3);
        // 0 -> 2, 1 -> 0 reverses the order.
        let err = saturation_report(&small, &big, &[2, 0], &[0], 0).unwrap_err();
        assert!(matches!(err, TypeError::NotAnEmbedding(_)));
    }

    #[test]
    fn non_injective_map_rejected() {
        let small = Model::chain(2);
        let big = Model::chain(3);
        assert!(matches!(
            saturation_report(&small, &big, &[1, 1], &[1], 0),
            Err(TypeError::NotAnEmbedding(_))
        ));
    }

    #[test]
    fn parameters_must_lie_in_image() {
        let small = Model::chain(2);
        let big = Model::chain(3);
        assert!(matches!(
            saturation_report(&small, &big, &[0, 2], &[1], 0),
            Err(TypeError::NotAnEmbedding(_))
        ));
    }
}
