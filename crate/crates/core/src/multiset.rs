//! Finite multisets with the `A↾c` restriction used by bounded aggregation.

use std::collections::BTreeMap;

/// A multiset backed by an ordered map, so equality and iteration order do
/// not depend on insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multiset<T: Ord> {
    counts: BTreeMap<T, usize>,
}

impl<T: Ord> Default for Multiset<T> {
    fn default() -> Self {
        Self {
            counts: BTreeMap::new(),
        }
    }
}

impl<T: Ord> Multiset<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, item: T) {
        self.insert_many(item, 1);
    }

    pub fn insert_many(&mut self, item: T, count: usize) {
        if count > 0 {
            *self.counts.entry(item).or_insert(0) += count;
        }
    }

    pub fn multiplicity(&self, item: &T) -> usize {
        self.counts.get(item).copied().unwrap_or(0)
    }

    /// Total number of elements, counted with multiplicity.
    pub fn len(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// `(element, multiplicity)` pairs in ascending element order.
    pub fn iter(&self) -> impl Iterator<Item = (&T, usize)> {
        self.counts.iter().map(|(k, &v)| (k, v))
    }

    /// `A↾c`: every multiplicity above `c` becomes `c`.
    ///
    /// # Panics
    /// If `c == 0`.
    pub fn restrict(mut self, c: usize) -> Self {
        assert!(c >= 1, "restriction bound must be at least 1");
        for m in self.counts.values_mut() {
            *m = (*m).min(c);
        }
        self
    }

    /// `A =_c B`.
    pub fn eq_bounded(&self, other: &Self, c: usize) -> bool
    where
        T: Clone,
    {
        self.clone().restrict(c) == other.clone().restrict(c)
    }

    pub fn into_vec(self) -> Vec<(T, usize)> {
        self.counts.into_iter().collect()
    }
}

impl<T: Ord> FromIterator<T> for Multiset<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut m = Self::new();
        for item in iter {
            m.insert(item);
        }
        m
    }
}

/// Restriction of a multiset.
pub fn restrict_multiset<T: Ord>(a: Multiset<T>, c: usize) -> Multiset<T> {
    a.restrict(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn caps_large_multiplicities() {
        let mut a = Multiset::new();
        a.insert_many('x', 5);
        let r = a.restrict(2);
        assert_eq!(r.multiplicity(&'x'), 2);
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn small_multiplicities_unchanged() {
        let a: Multiset<char> = "xyy".chars().collect();
        assert_eq!(a.clone().restrict(3), a);
    }

    #[test]
    fn bounded_equality() {
        let mut a = Multiset::new();
        a.insert_many('x', 5);
        let mut b = Multiset::new();
        b.insert_many('x', 3);
        assert!(a.eq_bounded(&b, 2));
        assert!(!a.eq_bounded(&b, 4));
    }

    #[test]
    fn order_independent_equality() {
        let a: Multiset<u8> = [3, 1, 2, 1].into_iter().collect();
        let b: Multiset<u8> = [1, 1, 2, 3].into_iter().collect();
        assert_eq!(a, b);
    }

    fn multiset() -> impl Strategy<Value = Multiset<u8>> {
        prop::collection::vec((0u8..6, 1usize..7), 0..6).prop_map(|pairs| {
            let mut m = Multiset::new();
            for (k, n) in pairs {
                m.insert_many(k, n);
            }
            m
        })
    }

    proptest! {
        #[test]
        fn restrict_is_idempotent(a in multiset(), c in 1usize..4) {
            let once = a.restrict(c);
            prop_assert_eq!(once.clone().restrict(c), once);
        }

        #[test]
        fn restrict_is_monotone(a in multiset(), c in 1usize..4, extra in 0usize..3) {
            let wider = c + extra;
            prop_assert_eq!(a.clone().restrict(wider).restrict(c), a.restrict(c));
        }
    }
}
