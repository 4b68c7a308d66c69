//! Filters and ultrafilters on finite base sets.
//!
//! Subsets of the base are bit patterns in a `u64`, families are sorted sets
//! of patterns. On a finite base every filter is the up-set of its kernel
//! (the intersection of its members), so ultrafilters are exactly the
//! principal ones; the enumeration cap exists because an ultrafilter on a
//! base of size b has 2^(b-1) members.

use std::collections::BTreeSet;

use thiserror::Error;

/// Default cap on base sizes for operations that materialize whole filters.
pub const DEFAULT_BASE_CAP: usize = 12;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FilterError {
    #[error("base size {size} exceeds the cap {cap} (a filter on it can have 2^{} members)", .size - 1)]
    BaseTooLarge { size: usize, cap: usize },
    #[error("member {member:?} is not a subset of the base (size {size})")]
    MemberOutOfBase { member: Vec<usize>, size: usize },
    #[error("generators have empty intersection: {witness:?}")]
    EmptyIntersection { witness: Vec<Vec<usize>> },
    #[error("the family is not a filter: {0}")]
    NotAFilter(String),
}

/// A family of subsets of `{0, .., base_size-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFamily {
    base_size: usize,
    members: BTreeSet<u64>,
}

fn to_mask(set: &[usize], base_size: usize) -> Result<u64, FilterError> {
    let mut mask = 0u64;
    for &e in set {
        if e >= base_size {
            return Err(FilterError::MemberOutOfBase {
                member: set.to_vec(),
                size: base_size,
            });
        }
        mask |= 1 << e;
    }
    Ok(mask)
}

fn from_mask(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

impl SetFamily {
    pub fn new(base_size: usize, members: &[Vec<usize>]) -> Result<SetFamily, FilterError> {
        if base_size > 63 {
            return Err(FilterError::BaseTooLarge {
                size: base_size,
                cap: 63,
            });
        }
        let members = members
            .iter()
            .map(|m| to_mask(m, base_size))
            .collect::<Result<_, _>>()?;
        Ok(SetFamily { base_size, members })
    }

    pub(crate) fn from_masks(base_size: usize, members: BTreeSet<u64>) -> SetFamily {
        SetFamily { base_size, members }
    }

    pub fn base_size(&self) -> usize {
        self.base_size
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn base_mask(&self) -> u64 {
        if self.base_size == 64 {
            !0
        } else {
            (1u64 << self.base_size) - 1
        }
    }

    pub fn contains(&self, set: &[usize]) -> bool {
        to_mask(set, self.base_size)
            .map(|m| self.members.contains(&m))
            .unwrap_or(false)
    }

    pub fn members(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.members.iter().map(|&m| from_mask(m))
    }

}

/// Why a family fails to be a filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterViolation {
    /// A filter contains at least the base; the empty family does not.
    EmptyFamily,
    /// The empty set is a member.
    ContainsEmpty,
    /// `member` is in the family but `superset` is not.
    NotUpwardClosed {
        member: Vec<usize>,
        superset: Vec<usize>,
    },
    /// Both sets are members but their intersection is not.
    NotIntersectionClosed { a: Vec<usize>, b: Vec<usize> },
}

/// Checks the three filter conditions; `Err` carries a concrete violation.
pub fn is_filter(family: &SetFamily) -> Result<(), FilterViolation> {
    if family.members.is_empty() {
        return Err(FilterViolation::EmptyFamily);
    }
    if family.members.contains(&0) {
        return Err(FilterViolation::ContainsEmpty);
    }
    let base = family.base_mask();
    for &m in &family.members {
        // Upward closure is equivalent to closure under adding one point.
        let mut missing = base & !m;
        while missing != 0 {
            let bit = missing & missing.wrapping_neg();
            missing &= missing - 1;
            if !family.members.contains(&(m | bit)) {
                return Err(FilterViolation::NotUpwardClosed {
                    member: from_mask(m),
                    superset: from_mask(m | bit),
                });
            }
        }
    }
    for &a in &family.members {
        for &b in &family.members {
            if a < b && !family.members.contains(&(a & b)) {
                return Err(FilterViolation::NotIntersectionClosed {
                    a: from_mask(a),
                    b: from_mask(b),
                });
            }
        }
    }
    Ok(())
}

/// A filter: upward closed, intersection closed, without the empty set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filter {
    family: SetFamily,
}

impl Filter {
    /// Validates the filter conditions.
    pub fn new(family: SetFamily) -> Result<Filter, FilterError> {
        is_filter(&family).map_err(|v| FilterError::NotAFilter(format!("{v:?}")))?;
        Ok(Filter { family })
    }

    pub fn family(&self) -> &SetFamily {
        &self.family
    }

    pub fn base_size(&self) -> usize {
        self.family.base_size
    }

    pub fn contains(&self, set: &[usize]) -> bool {
        self.family.contains(set)
    }

}

/// The smallest filter containing the generators: all supersets of the total
/// intersection. Fails when the generators lack the finite intersection
/// property, naming an empty intersection.
pub fn generated_filter(gens: &SetFamily) -> Result<Filter, FilterError> {
    if gens.base_size > DEFAULT_BASE_CAP {
        return Err(FilterError::BaseTooLarge {
            size: gens.base_size,
            cap: DEFAULT_BASE_CAP,
        });
    }
    let base = gens.base_mask();
    let kernel = gens.members.iter().fold(base, |acc, &m| acc & m);
    if kernel == 0 && !gens.members.is_empty() {
        // Greedily shrink to a small witness subfamily with empty meet.
        let mut witness: Vec<u64> = gens.members.iter().copied().collect();
        let mut i = 0;
        while i < witness.len() {
            let without: u64 = witness
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(base, |acc, (_, &m)| acc & m);
            if without == 0 {
                witness.remove(i);
            } else {
                i += 1;
            }
        }
        return Err(FilterError::EmptyIntersection {
            witness: witness.into_iter().map(from_mask).collect(),
        });
    }
    // Up-set of the kernel, materialized over the missing positions.
    let mut members = BTreeSet::new();
    let free = base & !kernel;
    let mut sub = 0u64;
    loop {
        members.insert(kernel | sub);
        if sub == free {
            break;
        }
        sub = (sub.wrapping_sub(free)) & free;
    }
    Ok(Filter {
        family: SetFamily::from_masks(gens.base_size, members),
    })
}

/// True iff for every subset of the base, the set or its complement belongs
/// to the filter.
pub fn is_ultrafilter(filter: &Filter) -> bool {
    let base = filter.family.base_mask();
    // On a finite base a filter is the up-set of its kernel, so maximality is
    // equivalent to the kernel being a single point; checked directly against
    // the definition anyway.
    let size = filter.family.base_size;
    if size > DEFAULT_BASE_CAP {
        return limit_points_mask(filter).count_ones() == 1;
    }
    let mut a = 0u64;
    loop {
        if !filter.family.members.contains(&a) && !filter.family.members.contains(&(base & !a)) {
            return false;
        }
        if a == base {
            return true;
        }
        a = (a.wrapping_sub(base)) & base;
    }
}

/// A filter maximal among filters on its base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ultrafilter {
    filter: Filter,
}

impl Ultrafilter {
    pub fn new(filter: Filter) -> Result<Ultrafilter, FilterError> {
        if !is_ultrafilter(&filter) {
            return Err(FilterError::NotAFilter(
                "filter is not maximal".to_string(),
            ));
        }
        Ok(Ultrafilter { filter })
    }

    /// The principal ultrafilter at a point.
    pub fn principal(base_size: usize, point: usize) -> Result<Ultrafilter, FilterError> {
        if base_size > DEFAULT_BASE_CAP {
            return Err(FilterError::BaseTooLarge {
                size: base_size,
                cap: DEFAULT_BASE_CAP,
            });
        }
        let gens = SetFamily::new(base_size, &[vec![point]])?;
        Ok(Ultrafilter {
            filter: generated_filter(&gens)?,
        })
    }

    pub fn filter(&self) -> &Filter {
        &self.filter
    }

    pub fn base_size(&self) -> usize {
        self.filter.base_size()
    }

    pub fn contains(&self, set: &[usize]) -> bool {
        self.filter.contains(set)
    }


    /// The generator point (finite ultrafilters are principal).
    pub fn principal_point(&self) -> usize {
        limit_points_mask(&self.filter).trailing_zeros() as usize
    }
}

/// All ultrafilters on the base: exactly the principal ones. The convention
/// that ultrafilters contain all co-finite sets selects nonprincipal
/// ultrafilters on infinite sets; on a finite base it is vacuous (every set
/// is co-finite) and no nonprincipal ultrafilter exists to witness it.
pub fn enumerate_ultrafilters(base_size: usize) -> Result<Vec<Ultrafilter>, FilterError> {
    enumerate_ultrafilters_capped(base_size, DEFAULT_BASE_CAP)
}

pub fn enumerate_ultrafilters_capped(
    base_size: usize,
    cap: usize,
) -> Result<Vec<Ultrafilter>, FilterError> {
    if base_size > cap {
        return Err(FilterError::BaseTooLarge {
            size: base_size,
            cap,
        });
    }
    (0..base_size)
        .map(|p| Ultrafilter::principal(base_size, p))
        .collect()
}

fn limit_points_mask(filter: &Filter) -> u64 {
    filter
        .family
        .members
        .iter()
        .fold(filter.family.base_mask(), |acc, &m| acc & m)
}

/// The elements of the base belonging to every member of the filter.
pub fn limit_points(filter: &Filter) -> Vec<usize> {
    from_mask(limit_points_mask(filter))
}

/// Parses brace notation like `{{2,3},{3,4}} over 5`.
pub fn parse_family(text: &str) -> Result<SetFamily, FilterError> {
    let malformed = |msg: &str| FilterError::NotAFilter(msg.to_string());
    let (sets_part, base_part) = text
        .rsplit_once("over")
        .ok_or_else(|| malformed("expected `{{..},{..}} over N`"))?;
    let base_size: usize = base_part
        .trim()
        .parse()
        .map_err(|_| malformed("base size must be a number"))?;
    let sets_part = sets_part.trim();
    let inner = sets_part
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| malformed("family must be wrapped in braces"))?;
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for c in inner.chars() {
        match c {
            '{' => {
                depth += 1;
                current.clear();
            }
            '}' => {
                if depth == 0 {
                    return Err(malformed("unbalanced braces"));
                }
                depth -= 1;
                let set: Vec<usize> = current
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse().map_err(|_| malformed("bad element")))
                    .collect::<Result<_, _>>()?;
                members.push(set);
            }
            ',' if depth == 0 => {}
            _ if depth == 1 => current.push(c),
            _ if c.is_whitespace() => {}
            _ => return Err(malformed("unexpected character")),
        }
    }
    SetFamily::new(base_size, &members)
}
