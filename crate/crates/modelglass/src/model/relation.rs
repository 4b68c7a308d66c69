//! Dense bitset relations over mixed-radix tuple spaces.
//!
//! A `Relation` is a set of assignments to an ordered list of variables, all
//! ranging over the same finite domain `0..n`. Tuples are indexed row-major
//! with the first variable most significant, and the characteristic function
//! is stored as a bit vector, so boolean combinations of relations over the
//! same variables are word-parallel.

/// A packed bit vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn new(len: usize, fill: bool) -> Bits {
        let nwords = len.div_ceil(64);
        let mut bits = Bits {
            words: vec![if fill { !0u64 } else { 0 }; nwords],
            len,
        };
        bits.mask_tail();
        bits
    }

    fn mask_tail(&mut self) {
        let tail = self.len % 64;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_all_false(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_all_true(&self) -> bool {
        self.count_ones() == self.len
    }

    pub fn complement(&mut self) {
        for w in &mut self.words {
            *w = !*w;
        }
        self.mask_tail();
    }

    pub fn or_assign(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn and_assign(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn for_each_set(&self, mut f: impl FnMut(usize)) {
        for (wi, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                f(wi * 64 + b);
                w &= w - 1;
            }
        }
    }

    /// Reads up to 64 bits starting at `pos` (low bit first).
    #[inline]
    fn read_chunk(&self, pos: usize, k: usize) -> u64 {
        debug_assert!(k >= 1 && k <= 64 && pos + k <= self.len);
        let wi = pos / 64;
        let off = pos % 64;
        let mut w = self.words[wi] >> off;
        if off != 0 && wi + 1 < self.words.len() {
            w |= self.words[wi + 1] << (64 - off);
        }
        if k < 64 {
            w &= (1u64 << k) - 1;
        }
        w
    }

    /// dst[pos..pos+k] |= chunk
    #[inline]
    fn or_chunk(&mut self, pos: usize, chunk: u64, k: usize) {
        debug_assert!(k >= 1 && k <= 64 && pos + k <= self.len);
        let wi = pos / 64;
        let off = pos % 64;
        self.words[wi] |= chunk << off;
        if off != 0 && off + k > 64 {
            self.words[wi + 1] |= chunk >> (64 - off);
        }
    }

    /// dst[pos..pos+k] &= !chunk
    #[inline]
    fn andnot_chunk(&mut self, pos: usize, chunk: u64, k: usize) {
        let wi = pos / 64;
        let off = pos % 64;
        self.words[wi] &= !(chunk << off);
        if off != 0 && off + k > 64 {
            self.words[wi + 1] &= !(chunk >> (64 - off));
        }
    }

    /// dst[pos..pos+k] &= chunk  (bits outside the window untouched)
    #[inline]
    fn and_chunk(&mut self, pos: usize, chunk: u64, k: usize) {
        let mask = if k < 64 { (1u64 << k) - 1 } else { !0u64 };
        self.andnot_chunk(pos, !chunk & mask, k);
    }

    pub fn or_range(&mut self, dst_off: usize, src: &Bits, src_off: usize, len: usize) {
        let mut done = 0;
        while done < len {
            let take = (len - done).min(64);
            let chunk = src.read_chunk(src_off + done, take);
            self.or_chunk(dst_off + done, chunk, take);
            done += take;
        }
    }

    pub fn and_range(&mut self, dst_off: usize, src: &Bits, src_off: usize, len: usize) {
        let mut done = 0;
        while done < len {
            let take = (len - done).min(64);
            let chunk = src.read_chunk(src_off + done, take);
            self.and_chunk(dst_off + done, chunk, take);
            done += take;
        }
    }

    pub fn andnot_range(&mut self, dst_off: usize, src: &Bits, src_off: usize, len: usize) {
        let mut done = 0;
        while done < len {
            let take = (len - done).min(64);
            let chunk = src.read_chunk(src_off + done, take);
            self.andnot_chunk(dst_off + done, chunk, take);
            done += take;
        }
    }

    pub fn zero_range(&mut self, dst_off: usize, len: usize) {
        let mut done = 0;
        while done < len {
            let take = (len - done).min(64);
            self.andnot_chunk(dst_off + done, if take < 64 { (1 << take) - 1 } else { !0 }, take);
            done += take;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BoolOp {
    And,
    Or,
    Implies,
    Iff,
}

impl BoolOp {
    #[inline]
    fn apply(self, a: bool, b: bool) -> bool {
        match self {
            BoolOp::And => a && b,
            BoolOp::Or => a || b,
            BoolOp::Implies => !a || b,
            BoolOp::Iff => a == b,
        }
    }

    #[inline]
    fn apply_words(self, a: u64, b: u64) -> u64 {
        match self {
            BoolOp::And => a & b,
            BoolOp::Or => a | b,
            BoolOp::Implies => !a | b,
            BoolOp::Iff => !(a ^ b),
        }
    }
}

/// A set of assignments to `vars` (strictly increasing variable ids) over the
/// domain `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    pub(crate) vars: Vec<u32>,
    pub(crate) n: usize,
    pub(crate) bits: Bits,
}

/// n^k with overflow checking.
pub(crate) fn space_size(n: usize, k: usize) -> Option<usize> {
    let mut size = 1usize;
    for _ in 0..k {
        size = size.checked_mul(n)?;
    }
    Some(size)
}

impl Relation {
    pub(crate) fn new_uniform(vars: Vec<u32>, n: usize, value: bool) -> Relation {
        debug_assert!(vars.windows(2).all(|w| w[0] < w[1]));
        let size = space_size(n, vars.len()).expect("relation size overflow");
        Relation {
            vars,
            n,
            bits: Bits::new(size, value),
        }
    }

    #[cfg(test)]
    pub(crate) fn from_fn(
        vars: Vec<u32>,
        n: usize,
        mut f: impl FnMut(&[usize]) -> bool,
    ) -> Relation {
        let mut rel = Relation::new_uniform(vars, n, false);
        let k = rel.vars.len();
        let mut digits = vec![0usize; k];
        for i in 0..rel.bits.len() {
            if f(&digits) {
                rel.bits.set(i, true);
            }
            increment(&mut digits, n);
        }
        rel
    }

    pub fn vars(&self) -> &[u32] {
        &self.vars
    }

    pub fn size(&self) -> usize {
        self.bits.len()
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty_set(&self) -> bool {
        self.bits.is_all_false()
    }

    pub fn is_full_set(&self) -> bool {
        self.bits.is_all_true()
    }

    /// Weight (stride) of each variable position: first variable most
    /// significant.
    pub(crate) fn weights(&self) -> Vec<usize> {
        let k = self.vars.len();
        let mut w = vec![1usize; k];
        for j in (0..k.saturating_sub(1)).rev() {
            w[j] = w[j + 1] * self.n;
        }
        w
    }

    pub fn get_tuple(&self, digits: &[usize]) -> bool {
        debug_assert_eq!(digits.len(), self.vars.len());
        let mut idx = 0usize;
        for &d in digits {
            idx = idx * self.n + d;
        }
        self.bits.get(idx)
    }

    pub(crate) fn complement(&mut self) {
        self.bits.complement();
    }

    /// Word-parallel combination; both relations must have identical vars.
    pub(crate) fn combine_same_vars(&self, other: &Relation, op: BoolOp) -> Relation {
        debug_assert_eq!(self.vars, other.vars);
        let mut out = self.clone();
        for (a, b) in out.bits.words.iter_mut().zip(&other.bits.words) {
            *a = op.apply_words(*a, *b);
        }
        out.bits.mask_tail();
        out
    }

    /// General combination over the sorted union of variables.
    pub(crate) fn combine_general(&self, other: &Relation, op: BoolOp) -> Option<Relation> {
        let union = sorted_union(&self.vars, &other.vars);
        let size = space_size(self.n, union.len())?;
        let n = self.n;
        let wa = embedded_weights(&union, self);
        let wb = embedded_weights(&union, other);
        let mut out = Relation {
            vars: union.clone(),
            n,
            bits: Bits::new(size, false),
        };
        let k = union.len();
        let mut digits = vec![0usize; k];
        let (mut ia, mut ib) = (0usize, 0usize);
        for i in 0..size {
            let bit = op.apply(self.bits.get(ia), other.bits.get(ib));
            if bit {
                out.bits.set(i, true);
            }
            // Odometer increment with incremental child indices.
            if i + 1 < size {
                let mut pos = k - 1;
                loop {
                    digits[pos] += 1;
                    ia += wa[pos];
                    ib += wb[pos];
                    if digits[pos] < n {
                        break;
                    }
                    digits[pos] = 0;
                    ia -= n * wa[pos];
                    ib -= n * wb[pos];
                    pos -= 1;
                }
            }
        }
        Some(out)
    }

    /// The conjunction of two relations over disjoint variable blocks where
    /// every variable of `self` precedes every variable of `other`: the
    /// result is the block outer product.
    pub(crate) fn product_and(&self, other: &Relation) -> Option<Relation> {
        debug_assert!(self
            .vars
            .last()
            .zip(other.vars.first())
            .map(|(a, b)| a < b)
            .unwrap_or(true));
        let mut vars = self.vars.clone();
        vars.extend_from_slice(&other.vars);
        let size = space_size(self.n, vars.len())?;
        let mut out = Relation {
            vars,
            n: self.n,
            bits: Bits::new(size, false),
        };
        let bsize = other.bits.len();
        self.bits.for_each_set(|ia| {
            out.bits.or_range(ia * bsize, &other.bits, 0, bsize);
        });
        Some(out)
    }

    /// acc |= self x other, where acc's variables are self's followed by
    /// other's.
    pub(crate) fn or_product_into(acc: &mut Relation, a: &Relation, b: &Relation) {
        let bsize = b.bits.len();
        a.bits.for_each_set(|ia| {
            acc.bits.or_range(ia * bsize, &b.bits, 0, bsize);
        });
    }

    /// acc &= !(self x other).
    pub(crate) fn andnot_product_into(acc: &mut Relation, a: &Relation, b: &Relation) {
        let bsize = b.bits.len();
        a.bits.for_each_set(|ia| {
            acc.bits.andnot_range(ia * bsize, &b.bits, 0, bsize);
        });
    }

    /// acc &= (self x other).
    pub(crate) fn and_product_into(acc: &mut Relation, a: &Relation, b: &Relation) {
        let bsize = b.bits.len();
        for ia in 0..a.bits.len() {
            if a.bits.get(ia) {
                acc.bits.and_range(ia * bsize, &b.bits, 0, bsize);
            } else {
                acc.bits.zero_range(ia * bsize, bsize);
            }
        }
    }

    /// Fixes `var` to `value` and drops it from the variable list.
    pub(crate) fn restrict(&self, var: u32, value: usize) -> Relation {
        let pos = self
            .vars
            .iter()
            .position(|&v| v == var)
            .expect("restrict: variable not present");
        let weights = self.weights();
        let w = weights[pos];
        let vars: Vec<u32> = self
            .vars
            .iter()
            .copied()
            .filter(|&v| v != var)
            .collect();
        let prefix_count = self.bits.len() / (w * self.n);
        let mut out = Relation {
            vars,
            n: self.n,
            bits: Bits::new(self.bits.len() / self.n, false),
        };
        for q in 0..prefix_count {
            let src_off = (q * self.n + value) * w;
            out.bits.or_range(q * w, &self.bits, src_off, w);
        }
        out
    }

    /// Eliminates `var` by disjunction (exists) or conjunction (forall) over
    /// its values. A variable not present is vacuous over a nonempty domain.
    pub(crate) fn eliminate(&self, var: u32, universal: bool) -> Relation {
        if !self.vars.contains(&var) {
            return self.clone();
        }
        let mut acc = self.restrict(var, 0);
        for v in 1..self.n {
            let r = self.restrict(var, v);
            if universal {
                acc.bits.and_assign(&r.bits);
            } else {
                acc.bits.or_assign(&r.bits);
            }
        }
        acc
    }

    /// Re-materializes over a target variable list (any order, must contain
    /// all of this relation's variables); missing variables are unconstrained.
    pub(crate) fn materialize_over(&self, target: &[u32]) -> Relation {
        let size = space_size(self.n, target.len()).expect("relation size overflow");
        // Weight of each target position inside this relation's index.
        let weights = self.weights();
        let wt: Vec<usize> = target
            .iter()
            .map(|v| {
                self.vars
                    .iter()
                    .position(|x| x == v)
                    .map(|p| weights[p])
                    .unwrap_or(0)
            })
            .collect();
        for v in &self.vars {
            assert!(target.contains(v), "materialize_over: target must cover vars");
        }
        let n = self.n;
        let k = target.len();
        let mut out = Relation {
            vars: target.to_vec(),
            n,
            bits: Bits::new(size, false),
        };
        let mut digits = vec![0usize; k];
        let mut idx = 0usize;
        for i in 0..size {
            if self.bits.get(idx) {
                out.bits.set(i, true);
            }
            if i + 1 < size {
                let mut pos = k - 1;
                loop {
                    digits[pos] += 1;
                    idx += wt[pos];
                    if digits[pos] < n {
                        break;
                    }
                    digits[pos] = 0;
                    idx -= n * wt[pos];
                    pos -= 1;
                }
            }
        }
        out
    }

    /// Iterates set tuples in lexicographic order.
    pub fn for_each_tuple(&self, mut f: impl FnMut(&[usize])) {
        let k = self.vars.len();
        let mut digits = vec![0usize; k];
        for i in 0..self.bits.len() {
            if self.bits.get(i) {
                f(&digits);
            }
            increment(&mut digits, self.n);
        }
    }
}

pub(crate) fn increment(digits: &mut [usize], n: usize) {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < n {
            return;
        }
        *d = 0;
    }
}

pub(crate) fn sorted_union(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                out.push(x);
                i += 1;
                j += 1;
            }
            (Some(&x), Some(&y)) if x < y => {
                out.push(x);
                i += 1;
            }
            (Some(_), Some(&y)) => {
                out.push(y);
                j += 1;
            }
            (Some(&x), None) => {
                out.push(x);
                i += 1;
            }
            (None, Some(&y)) => {
                out.push(y);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Weight of each position of `union` inside `rel`'s index (0 when absent).
fn embedded_weights(union: &[u32], rel: &Relation) -> Vec<usize> {
    let weights = rel.weights();
    union
        .iter()
        .map(|v| {
            rel.vars
                .iter()
                .position(|x| x == v)
                .map(|p| weights[p])
                .unwrap_or(0)
        })
        .collect()
}
