use std::fmt;

use serde::{Deserialize, Serialize};

/// A set of attributes encoded as a bit mask in declaration order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct AttributeSubset(u64);

impl AttributeSubset {
    pub const EMPTY: Self = Self(0);
    pub const CAPACITY: usize = 64;

    pub fn from_mask(mask: u64) -> Self {
        Self(mask)
    }

    /// # Panics
    /// If an index is not below [`Self::CAPACITY`].
    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        Self(indices.into_iter().fold(0, |m, i| {
            assert!(i < Self::CAPACITY, "attribute index {i} out of range");
            m | 1 << i
        }))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Number of members, i.e. the lattice level of the node.
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, index: usize) -> bool {
        index < Self::CAPACITY && self.0 >> index & 1 == 1
    }

    pub fn insert(&mut self, index: usize) {
        self.0 |= 1 << index;
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Greatest lower bound.
    pub fn meet(self, other: Self) -> Self {
        Self(self.0 & other.0)
    }

    /// Least upper bound.
    pub fn join(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// Member indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            (rest != 0).then(|| {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                i
            })
        })
    }

    /// Every subset of `self`, in ascending mask order, starting with the empty set.
    pub fn subsets(self) -> impl Iterator<Item = Self> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            // Next submask in increasing order: add one, keep only bits of `full`.
            next = (cur != full).then(|| (cur | !full).wrapping_add(1) & full);
            Some(Self(cur))
        })
    }
}

impl fmt::Display for AttributeSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "#{i}")?;
        }
        write!(f, "}}")
    }
}
