//! Recognition subproblems: items [A,i,j] and slashed items [A,i,j]/[B,k,l].
//! Positions are 1-based and inclusive on both ends.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Item {
    pub nt: String,
    pub i: usize,
    pub j: usize,
}

impl Item {
    pub fn new(nt: impl Into<String>, i: usize, j: usize) -> Item {
        let it = Item { nt: nt.into(), i, j };
        debug_assert!(1 <= it.i && it.i <= it.j);
        it
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.nt, self.i, self.j)
    }
}

/// The claim that `outer.nt` derives w_i…w_{k−1} ⟨inner.nt⟩ w_{l+1}…w_j.
/// The degenerate case (k,l) = (i,j) is excluded by invariant: CNF has no
/// unit productions, so it could only mean A ⇒* B as a lone nonterminal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlashedItem {
    pub outer: Item,
    pub inner: Item,
}

impl SlashedItem {
    pub fn new(outer: Item, inner: Item) -> SlashedItem {
        debug_assert!(outer.i <= inner.i && inner.j <= outer.j);
        debug_assert!((inner.i, inner.j) != (outer.i, outer.j));
        SlashedItem { outer, inner }
    }
}

impl fmt::Display for SlashedItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.outer, self.inner)
    }
}
