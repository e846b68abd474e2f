//! Small sets of marking labels, stored as bitmasks.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest marking label an [`IndexSet`] can hold.
pub const MAX_LABEL: usize = 31;

/// A set of marking labels in `1..=31`.
///
/// Ordering is by cardinality first, then lexicographic on the sorted
/// elements, so `{2,3} < {2,4} < {3,4} < {2,3,4}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct IndexSet(u32);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn from_bits(bits: u32) -> Self {
        IndexSet(bits & !1)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Builds a set from labels. Panics on a label outside `1..=31`.
    pub fn from_labels<I: IntoIterator<Item = usize>>(labels: I) -> Self {
        let mut bits = 0u32;
        for l in labels {
            assert!((1..=MAX_LABEL).contains(&l), "label {l} out of range");
            bits |= 1 << l;
        }
        IndexSet(bits)
    }

    pub fn singleton(label: usize) -> Self {
        Self::from_labels([label])
    }

    /// `{lo, lo+1, ..., hi}`.
    pub fn range(lo: usize, hi: usize) -> Self {
        Self::from_labels(lo..=hi)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, label: usize) -> bool {
        label <= MAX_LABEL && self.0 & (1 << label) != 0
    }

    pub fn insert(&mut self, label: usize) {
        *self = self.union(Self::singleton(label));
    }

    pub fn is_subset(self, other: IndexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: IndexSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Nested (either contains the other) or disjoint.
    pub fn is_compatible(self, other: IndexSet) -> bool {
        self.is_subset(other) || other.is_subset(self) || self.is_disjoint(other)
    }

    pub fn union(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & other.0)
    }

    pub fn difference(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & !other.0)
    }

    pub fn min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 31 - self.0.leading_zeros() as usize)
    }

    /// Elements in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `self` of the given size, in lexicographic order.
    pub fn subsets_of_size(self, k: usize) -> Vec<IndexSet> {
        let elems = self.to_vec();
        let mut out = Vec::new();
        let mut chosen = Vec::with_capacity(k);
        fn rec(elems: &[usize], k: usize, start: usize, chosen: &mut Vec<usize>, out: &mut Vec<IndexSet>) {
            if chosen.len() == k {
                out.push(IndexSet::from_labels(chosen.iter().copied()));
                return;
            }
            for i in start..elems.len() {
                chosen.push(elems[i]);
                rec(elems, k, i + 1, chosen, out);
                chosen.pop();
            }
        }
        rec(&elems, k, 0, &mut chosen, &mut out);
        out
    }
}

impl Ord for IndexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for IndexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse index set {0:?}")]
pub struct ParseIndexSetError(pub String);

impl FromStr for IndexSet {
    type Err = ParseIndexSetError;

    /// Accepts `{3,4,5}` or `3,4,5`, whitespace-tolerant.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseIndexSetError(s.to_string());
        let t = s.trim();
        let t = t.strip_prefix('{').map_or(t, |r| r.strip_suffix('}').unwrap_or(r)).trim();
        if t.is_empty() {
            return Ok(IndexSet::EMPTY);
        }
        let mut set = IndexSet::EMPTY;
        for part in t.split(',') {
            let l: usize = part.trim().parse().map_err(|_| err())?;
            if !(1..=MAX_LABEL).contains(&l) || set.contains(l) {
                return Err(err());
            }
            set.insert(l);
        }
        Ok(set)
    }
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(deserializer)?;
        if v.iter().any(|l| !(1..=MAX_LABEL).contains(l)) {
            return Err(serde::de::Error::custom("label out of range"));
        }
        Ok(IndexSet::from_labels(v))
    }
}
