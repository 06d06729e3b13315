use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest index an [`IndexSet`] can hold.
pub const MAX_INDEX: usize = 63;

/// A set of 1-based indices `1..=63`, stored as a bit mask.
///
/// Iteration is always in increasing order, and the derived `Ord` is the mask
/// order; use [`IndexSet::cmp_by_members`] where member-wise order matters.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct IndexSet(u64);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    /// `{1, ..., n}`.
    pub fn full(n: usize) -> IndexSet {
        assert!(n <= MAX_INDEX, "index set too large: {n}");
        if n == 0 {
            IndexSet(0)
        } else {
            IndexSet((u64::MAX >> (64 - n)) << 1)
        }
    }

    pub fn singleton(i: usize) -> IndexSet {
        assert!((1..=MAX_INDEX).contains(&i), "index out of range: {i}");
        IndexSet(1 << i)
    }

    pub fn from_bits(bits: u64) -> IndexSet {
        assert!(bits & 1 == 0, "bit 0 is not a valid index");
        IndexSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i <= MAX_INDEX && self.0 & (1 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        *self = self.with(i);
    }

    pub fn with(self, i: usize) -> IndexSet {
        self.union(IndexSet::singleton(i))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
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

    /// Complement inside `{1, ..., n}`.
    pub fn complement(self, n: usize) -> IndexSet {
        IndexSet::full(n).difference(self)
    }

    pub fn is_subset(self, other: IndexSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// True iff exactly one of `i`, `j` is a member.
    pub fn separates(self, i: usize, j: usize) -> bool {
        self.contains(i) != self.contains(j)
    }

    pub fn min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

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

    /// Orders by `(size, sorted member list)`.
    pub fn cmp_by_members(&self, other: &IndexSet) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut s = IndexSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
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

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let members = Vec::<usize>::deserialize(deserializer)?;
        if let Some(bad) = members.iter().find(|&&i| !(1..=MAX_INDEX).contains(&i)) {
            return Err(serde::de::Error::custom(format!(
                "index {bad} outside 1..={MAX_INDEX}"
            )));
        }
        Ok(members.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a: IndexSet = [1, 3].into_iter().collect();
        assert_eq!(a.len(), 2);
        assert!(a.contains(3) && !a.contains(2));
        assert_eq!(a.complement(4).to_vec(), vec![2, 4]);
        assert!(a.separates(1, 2));
        assert!(!a.separates(1, 3));
        assert_eq!(IndexSet::full(3).to_vec(), vec![1, 2, 3]);
        assert_eq!(IndexSet::full(63).len(), 63);
        assert_eq!(a.to_string(), "{1,3}");
        assert_eq!(a.min(), Some(1));
        assert_eq!(a.max(), Some(3));
    }

    #[test]
    fn member_order() {
        let mut sets: Vec<IndexSet> = vec![
            [2, 3].into_iter().collect(),
            [3].into_iter().collect(),
            [1].into_iter().collect(),
            [1, 2].into_iter().collect(),
        ];
        sets.sort_by(IndexSet::cmp_by_members);
        let shown: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
        assert_eq!(shown, ["{1}", "{3}", "{1,2}", "{2,3}"]);
    }

    #[test]
    fn serde_round_trip() {
        let a: IndexSet = [2, 5].into_iter().collect();
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, "[2,5]");
        assert_eq!(serde_json::from_str::<IndexSet>(&json).unwrap(), a);
        assert!(serde_json::from_str::<IndexSet>("[0]").is_err());
    }
}
