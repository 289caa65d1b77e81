//! Binary relations as dense bit matrices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::MAX_RELATION_UNIVERSE;

/// A binary relation on `{0, .., size-1}`, stored row-major as bits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinRel {
    size: usize,
    stride: usize,
    bits: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct RelationFile {
    size: usize,
    pairs: Vec<[u32; 2]>,
}

impl BinRel {
    /// The empty relation. Panics above the universe cap; use
    /// [`BinRel::try_empty`] for untrusted sizes.
    pub fn empty(size: usize) -> Self {
        Self::try_empty(size).expect("relation universe within cap")
    }

    pub fn try_empty(size: usize) -> Result<Self> {
        if size > MAX_RELATION_UNIVERSE {
            return Err(Error::Resource(format!(
                "relation universe {size} exceeds {MAX_RELATION_UNIVERSE}"
            )));
        }
        let stride = size.div_ceil(64).max(1);
        Ok(BinRel { size, stride, bits: vec![0; stride * size] })
    }

    pub fn diagonal(size: usize) -> Self {
        let mut r = Self::empty(size);
        for i in 0..size {
            r.insert(i, i);
        }
        r
    }

    pub fn full(size: usize) -> Self {
        let mut r = Self::empty(size);
        for i in 0..size {
            for j in 0..size {
                r.insert(i, j);
            }
        }
        r
    }

    pub fn from_pairs(size: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut r = Self::try_empty(size)?;
        for (a, b) in pairs {
            if a >= size || b >= size {
                return Err(Error::OutOfRange { value: a.max(b), size });
            }
            r.insert(a, b);
        }
        Ok(r)
    }

    /// The relation `{(x, y) | f(x, y)}`.
    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut r = Self::empty(size);
        for i in 0..size {
            for j in 0..size {
                if f(i, j) {
                    r.insert(i, j);
                }
            }
        }
        r
    }

    /// Kernel of a map: pairs with equal images.
    pub fn kernel<K: PartialEq>(size: usize, f: impl Fn(usize) -> K) -> Self {
        let keys: Vec<K> = (0..size).map(f).collect();
        Self::from_fn(size, |i, j| keys[i] == keys[j])
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn contains(&self, a: usize, b: usize) -> bool {
        a < self.size && b < self.size && self.bits[a * self.stride + b / 64] >> (b % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, a: usize, b: usize) -> bool {
        let w = &mut self.bits[a * self.stride + b / 64];
        let m = 1u64 << (b % 64);
        let fresh = *w & m == 0;
        *w |= m;
        fresh
    }

    pub fn remove(&mut self, a: usize, b: usize) -> bool {
        let w = &mut self.bits[a * self.stride + b / 64];
        let m = 1u64 << (b % 64);
        let had = *w & m != 0;
        *w &= !m;
        had
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub(crate) fn row(&self, a: usize) -> &[u64] {
        &self.bits[a * self.stride..(a + 1) * self.stride]
    }

    fn row_mut(&mut self, a: usize) -> &mut [u64] {
        &mut self.bits[a * self.stride..(a + 1) * self.stride]
    }

    /// Successors of `a` in increasing order.
    pub fn successors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        bits_iter(self.row(a))
    }

    /// All pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.size).flat_map(move |a| self.successors(a).map(move |b| (a, b)))
    }

    fn check_same(&self, other: &BinRel) -> Result<()> {
        if self.size == other.size {
            Ok(())
        } else {
            Err(Error::SizeMismatch(self.size, other.size))
        }
    }

    pub fn compose(&self, other: &BinRel) -> Result<BinRel> {
        self.check_same(other)?;
        let mut out = BinRel::empty(self.size);
        for a in 0..self.size {
            let (stride, dst_off) = (self.stride, a * self.stride);
            for m in self.successors(a) {
                let src = other.row(m);
                for w in 0..stride {
                    out.bits[dst_off + w] |= src[w];
                }
            }
        }
        Ok(out)
    }

    /// `k` alternating factors starting with `self`; zero factors give the diagonal.
    pub fn compose_alt(&self, other: &BinRel, k: usize) -> Result<BinRel> {
        self.check_same(other)?;
        let mut out = BinRel::diagonal(self.size);
        for i in 0..k {
            out = out.compose(if i % 2 == 0 { self } else { other })?;
        }
        Ok(out)
    }

    pub fn meet(&self, other: &BinRel) -> Result<BinRel> {
        self.check_same(other)?;
        let mut out = self.clone();
        out.bits.iter_mut().zip(&other.bits).for_each(|(a, b)| *a &= b);
        Ok(out)
    }

    /// Set union; not closed under anything.
    pub fn union_raw(&self, other: &BinRel) -> Result<BinRel> {
        self.check_same(other)?;
        let mut out = self.clone();
        out.bits.iter_mut().zip(&other.bits).for_each(|(a, b)| *a |= b);
        Ok(out)
    }

    pub fn converse(&self) -> BinRel {
        let mut out = BinRel::empty(self.size);
        for (a, b) in self.pairs() {
            out.insert(b, a);
        }
        out
    }

    pub fn transitive_closure(&self) -> BinRel {
        let mut out = self.clone();
        let stride = self.stride;
        for k in 0..self.size {
            let row_k: Vec<u64> = out.row(k).to_vec();
            for i in 0..self.size {
                if out.contains(i, k) {
                    let r = out.row_mut(i);
                    for w in 0..stride {
                        r[w] |= row_k[w];
                    }
                }
            }
        }
        out
    }

    pub fn is_subset(&self, other: &BinRel) -> bool {
        self.size == other.size && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// Least pair of `self` missing from `other`, in lexicographic order.
    pub fn first_missing(&self, other: &BinRel) -> Option<(usize, usize)> {
        self.pairs().find(|&(a, b)| !other.contains(a, b))
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.size).all(|i| self.contains(i, i))
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().all(|(a, b)| self.contains(b, a))
    }

    pub fn is_transitive(&self) -> bool {
        self.compose(self).map(|c| c.is_subset(self)).unwrap_or(false)
    }

    /// Image of a set (given as bits) under the relation.
    pub(crate) fn image_of(&self, set: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.stride];
        for a in bits_iter(set) {
            for (o, r) in out.iter_mut().zip(self.row(a)) {
                *o |= r;
            }
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: RelationFile = serde_json::from_str(text)?;
        Self::from_pairs(f.size, f.pairs.iter().map(|p| (p[0] as usize, p[1] as usize)))
    }

    pub fn to_json(&self) -> String {
        let f = RelationFile {
            size: self.size,
            pairs: self.pairs().map(|(a, b)| [a as u32, b as u32]).collect(),
        };
        serde_json::to_string(&f).expect("relation serializes")
    }

    pub fn pair_list(&self) -> Vec<[u32; 2]> {
        self.pairs().map(|(a, b)| [a as u32, b as u32]).collect()
    }
}

pub(crate) fn bits_iter(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let t = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(wi * 64 + t)
        })
    })
}

impl fmt::Debug for BinRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinRel({}; ", self.size)?;
        f.debug_set().entries(self.pairs()).finish()?;
        write!(f, ")")
    }
}
