use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bitstring::BitString;
use crate::error::{Error, Result};
use crate::tree::ClopenTree;

/// An explicit finite prefix-closed set of strings.
///
/// Iteration is in length-lexicographic order, so nodes come level by level.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FiniteTree {
    nodes: BTreeSet<BitString>,
}

impl FiniteTree {
    pub fn empty() -> Self {
        FiniteTree::default()
    }

    /// `{λ}`.
    pub fn root() -> Self {
        FiniteTree {
            nodes: BTreeSet::from([BitString::EMPTY]),
        }
    }

    /// Validates prefix-closure.
    pub fn new(nodes: impl IntoIterator<Item = BitString>) -> Result<Self> {
        let nodes: BTreeSet<_> = nodes.into_iter().collect();
        for s in &nodes {
            if let Some(p) = s.parent() {
                if !nodes.contains(&p) {
                    return Err(Error::NotPrefixClosed(s.to_string()));
                }
            }
        }
        Ok(FiniteTree { nodes })
    }

    /// Downward closure of the given strings.
    pub fn closure(strings: impl IntoIterator<Item = BitString>) -> Self {
        let mut nodes = BTreeSet::new();
        for s in strings {
            nodes.extend(s.prefixes());
        }
        FiniteTree { nodes }
    }

    /// `2^{≤n}`, every string of length at most `n`.
    pub fn full(n: u32) -> Self {
        FiniteTree {
            nodes: BitString::all_up_to(n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, s: &BitString) -> bool {
        self.nodes.contains(s)
    }

    pub fn nodes(&self) -> impl DoubleEndedIterator<Item = &BitString> + '_ {
        self.nodes.iter()
    }

    pub fn node_set(&self) -> &BTreeSet<BitString> {
        &self.nodes
    }

    pub fn child_count(&self, s: &BitString) -> usize {
        if s.len() >= BitString::CAPACITY {
            return 0;
        }
        usize::from(self.contains(&s.child(false))) + usize::from(self.contains(&s.child(true)))
    }

    pub fn is_leaf(&self, s: &BitString) -> bool {
        self.contains(s) && self.child_count(s) == 0
    }

    pub fn leaves(&self) -> impl Iterator<Item = BitString> + '_ {
        self.nodes
            .iter()
            .copied()
            .filter(move |s| self.child_count(s) == 0)
    }

    /// `‖U‖ = max{|σ|+1 : σ ∈ U}`, 0 for the empty tree.
    pub fn norm(&self) -> u32 {
        self.nodes.iter().next_back().map_or(0, |s| s.len() + 1)
    }

    /// `U ∩ 2^n`.
    pub fn level(&self, n: u32) -> impl Iterator<Item = &BitString> + '_ {
        let lo = BitString::from_index(0, n);
        self.nodes.range(lo..).take_while(move |s| s.len() == n)
    }

    pub fn level_count(&self, n: u32) -> usize {
        self.level(n).count()
    }

    pub fn insert_with_prefixes(&mut self, s: BitString) {
        self.nodes.extend(s.prefixes());
    }

    pub fn union(&self, other: &FiniteTree) -> FiniteTree {
        FiniteTree {
            nodes: self.nodes.union(&other.nodes).copied().collect(),
        }
    }

    pub fn is_subset(&self, other: &FiniteTree) -> bool {
        self.nodes.is_subset(&other.nodes)
    }

    /// `U ∩ 2^{<n}`.
    pub fn truncate(&self, n: u32) -> FiniteTree {
        FiniteTree {
            nodes: self.nodes.iter().copied().filter(|s| s.len() < n).collect(),
        }
    }

    /// Whether `self` end-extends `initial`: `initial ⊆ self` and every node
    /// of `self` is in `initial` or extends a leaf of `initial`.
    pub fn end_extends(&self, initial: &FiniteTree) -> bool {
        if !initial.is_subset(self) {
            return false;
        }
        self.nodes.iter().all(|s| {
            initial.contains(s) || s.prefixes().any(|p| initial.is_leaf(&p))
        })
    }

    /// Drops every node whose cylinder in `ambient` has measure zero.
    pub fn trim(&self, ambient: &ClopenTree) -> FiniteTree {
        FiniteTree {
            nodes: self
                .nodes
                .iter()
                .copied()
                .filter(|s| ambient.contains_node(s))
                .collect(),
        }
    }

    /// Returns `n` when the tree is shaped like `2^{<n}`.
    ///
    /// The shape holds when the tree is the downward closure of a perfect
    /// embedding `e` of `2^{<n}` with `e(λ) = λ`: every root-to-leaf path
    /// passes through the same number `n - 1` of branching nodes, and a tree
    /// without any branching node must be `{λ}`. Unary chains between
    /// branchings are allowed.
    pub fn binary_shape(&self) -> Option<u32> {
        if self.is_empty() {
            return None;
        }
        let mut height = None;
        for leaf in self.leaves() {
            let branchings = (0..leaf.len())
                .filter(|&l| self.child_count(&leaf.prefix(l)) == 2)
                .count() as u32;
            match height {
                None => height = Some(branchings),
                Some(h) if h != branchings => return None,
                _ => {}
            }
        }
        let h = height?;
        if h == 0 && self.len() != 1 {
            return None;
        }
        Some(h + 1)
    }
}

impl std::fmt::Debug for FiniteTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.nodes.iter()).finish()
    }
}

impl FromIterator<BitString> for FiniteTree {
    /// Downward closure of the collected strings.
    fn from_iter<I: IntoIterator<Item = BitString>>(iter: I) -> Self {
        FiniteTree::closure(iter)
    }
}

/// Serialized as the list of nodes in length-lexicographic order.
impl Serialize for FiniteTree {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.nodes.iter())
    }
}

impl<'de> Deserialize<'de> for FiniteTree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let nodes = Vec::<BitString>::deserialize(deserializer)?;
        FiniteTree::new(nodes).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ft(nodes: &[&str]) -> FiniteTree {
        FiniteTree::new(nodes.iter().map(|s| s.parse().unwrap())).unwrap()
    }

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn rejects_non_prefix_closed() {
        assert!(matches!(
            FiniteTree::new([b(""), b("01")]),
            Err(Error::NotPrefixClosed(_))
        ));
    }

    #[test]
    fn norm_and_leaves() {
        assert_eq!(FiniteTree::empty().norm(), 0);
        assert_eq!(FiniteTree::root().norm(), 1);
        let u = ft(&["", "0", "1", "00"]);
        assert_eq!(u.norm(), 3);
        let leaves: Vec<_> = u.leaves().collect();
        assert_eq!(leaves, vec![b("1"), b("00")]);
        assert_eq!(u.level_count(1), 2);
        assert_eq!(u.level_count(2), 1);
        assert_eq!(u.level_count(3), 0);
        assert_eq!(FiniteTree::full(3).len(), 15);
    }

    #[test]
    fn end_extension_examples() {
        assert!(ft(&["", "0", "1", "00"]).end_extends(&ft(&["", "0", "1"])));
        assert!(!ft(&["", "0"]).end_extends(&ft(&["", "0", "1"])));
        assert!(ft(&["", "0", "1"]).end_extends(&ft(&[""])));
        // grows an internal node of F
        assert!(!ft(&["", "0", "1", "00"]).end_extends(&ft(&["", "0", "00"])));
        assert!(FiniteTree::empty().end_extends(&FiniteTree::empty()));
    }

    #[test]
    fn trim_examples() {
        let ambient = ClopenTree::from_leaves(2, [b("00")]).unwrap();
        assert_eq!(ft(&["", "0", "1"]).trim(&ambient), ft(&["", "0"]));
        let full = ClopenTree::full(2).unwrap();
        let u = ft(&["", "0", "1", "10"]);
        assert_eq!(u.trim(&full), u);
        assert_eq!(FiniteTree::empty().trim(&ambient), FiniteTree::empty());
        let once = u.trim(&ambient);
        assert_eq!(once.trim(&ambient), once);
    }

    #[test]
    fn shapes() {
        assert_eq!(ft(&[""]).binary_shape(), Some(1));
        assert_eq!(ft(&["", "0", "1"]).binary_shape(), Some(2));
        assert_eq!(ft(&["", "0", "1", "10"]).binary_shape(), Some(2));
        assert_eq!(ft(&["", "0", "00", "01"]).binary_shape(), Some(2));
        assert_eq!(ft(&["", "0"]).binary_shape(), None);
        assert_eq!(ft(&["", "0", "1", "00", "01"]).binary_shape(), None);
        assert_eq!(FiniteTree::full(2).binary_shape(), Some(3));
        assert_eq!(FiniteTree::empty().binary_shape(), None);
    }
}
