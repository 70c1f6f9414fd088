use serde::{Deserialize, Serialize};
use std::fmt;

/// Maximum number of atomic propositions a single world may declare.
pub const MAX_PROPS: usize = 128;

/// A set of interned proposition ids, stored as a 128-bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct PropSet(u128);

impl PropSet {
    pub const EMPTY: PropSet = PropSet(0);

    pub fn full(n: usize) -> Self {
        if n >= MAX_PROPS {
            PropSet(u128::MAX)
        } else {
            PropSet((1u128 << n) - 1)
        }
    }

    pub fn singleton(p: usize) -> Self {
        PropSet(1u128 << p)
    }

    pub fn from_bits(bits: u128) -> Self {
        PropSet(bits)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn contains(self, p: usize) -> bool {
        self.0 >> p & 1 == 1
    }

    pub fn insert(&mut self, p: usize) {
        self.0 |= 1u128 << p;
    }

    pub fn remove(&mut self, p: usize) {
        self.0 &= !(1u128 << p);
    }

    pub fn union(self, other: PropSet) -> PropSet {
        PropSet(self.0 | other.0)
    }

    pub fn intersect(self, other: PropSet) -> PropSet {
        PropSet(self.0 & other.0)
    }

    pub fn minus(self, other: PropSet) -> PropSet {
        PropSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: PropSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: PropSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let p = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(p)
            }
        })
    }
}

impl FromIterator<usize> for PropSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = PropSet::EMPTY;
        for p in iter {
            s.insert(p);
        }
        s
    }
}

impl fmt::Debug for PropSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_ops() {
        let a: PropSet = [0, 3, 127].into_iter().collect();
        let b: PropSet = [3, 4].into_iter().collect();
        assert_eq!(a.intersect(b), PropSet::singleton(3));
        assert_eq!(a.union(b).len(), 4);
        assert!(a.contains(127));
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 3, 127]);
        assert!(PropSet::singleton(3).is_subset(b));
        assert_eq!(PropSet::full(128).len(), 128);
        assert_eq!(PropSet::full(5).len(), 5);
    }
}
