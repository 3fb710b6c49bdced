//! Bitset encoding of finite point subsets.
//!
//! Subsets of a space with at most [`PointSet::CAPACITY`] points are stored
//! as a single `u64`. The canonical order on subsets is by cardinality, then
//! by the integer value of the mask; every report and every vertex list in
//! the crate uses it.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PointSet(u64);

impl PointSet {
    pub const CAPACITY: usize = 64;

    pub const fn empty() -> Self {
        PointSet(0)
    }

    pub const fn from_bits(bits: u64) -> Self {
        PointSet(bits)
    }

    pub fn singleton(i: usize) -> Self {
        debug_assert!(i < Self::CAPACITY);
        PointSet(1u64 << i)
    }

    /// All points `0..n`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= Self::CAPACITY);
        if n == 64 {
            PointSet(u64::MAX)
        } else {
            PointSet((1u64 << n) - 1)
        }
    }

    pub fn from_points<I: IntoIterator<Item = usize>>(points: I) -> Self {
        points.into_iter().fold(PointSet(0), |acc, p| acc.with(p))
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < Self::CAPACITY && (self.0 >> i) & 1 == 1
    }

    #[must_use]
    pub fn with(self, i: usize) -> Self {
        debug_assert!(i < Self::CAPACITY);
        PointSet(self.0 | (1u64 << i))
    }

    #[must_use]
    pub fn union(self, other: Self) -> Self {
        PointSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: Self) -> Self {
        PointSet(self.0 & other.0)
    }

    #[must_use]
    pub fn difference(self, other: Self) -> Self {
        PointSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_proper_subset(self, other: Self) -> bool {
        self.is_subset(other) && self.0 != other.0
    }

    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> Points {
        Points(self.0)
    }

    /// Image of the subset under a permutation of the points.
    #[must_use]
    pub fn permute(self, perm: &[usize]) -> Self {
        self.iter().fold(PointSet(0), |acc, p| acc.with(perm[p]))
    }

    /// Canonical order: cardinality first, then mask value.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }

    /// All subsets of `self`, the empty set included, in increasing mask order.
    pub fn subsets(self) -> impl Iterator<Item = PointSet> {
        let mask = self.0;
        let mut cur: Option<u64> = Some(0);
        std::iter::from_fn(move || {
            let out = cur?;
            cur = if out == mask { None } else { Some((out.wrapping_sub(mask)) & mask) };
            Some(PointSet(out))
        })
    }
}

impl PartialOrd for PointSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Total order used for sorting; this is the canonical order.
impl Ord for PointSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_cmp(other)
    }
}

pub struct Points(u64);

impl Iterator for Points {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for PointSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for PointSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let pts = Vec::<usize>::deserialize(d)?;
        if let Some(bad) = pts.iter().find(|&&p| p >= Self::CAPACITY) {
            return Err(serde::de::Error::custom(format!("point {bad} exceeds the {}-point capacity", Self::CAPACITY)));
        }
        Ok(PointSet::from_points(pts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = PointSet::from_points([0, 2, 5]);
        assert_eq!(a.len(), 3);
        assert!(a.contains(2) && !a.contains(1));
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 2, 5]);
        assert!(PointSet::from_points([0, 5]).is_proper_subset(a));
        assert_eq!(a.to_string(), "{0,2,5}");
        assert_eq!(a.subsets().count(), 8);
        assert_eq!(PointSet::full(3).bits(), 7);
    }

    #[test]
    fn permute_rotation() {
        let rot: Vec<usize> = (0..6).map(|i| (i + 1) % 6).collect();
        let s = PointSet::from_points([0, 3]);
        assert_eq!(s.permute(&rot), PointSet::from_points([1, 4]));
    }

    #[test]
    fn canonical_order_is_card_then_mask() {
        let mut v = vec![PointSet::from_points([0, 1]), PointSet::from_points([3]), PointSet::from_points([0])];
        v.sort();
        assert_eq!(v, vec![PointSet::from_points([0]), PointSet::from_points([3]), PointSet::from_points([0, 1])]);
    }
}
