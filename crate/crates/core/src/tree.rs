//! Finite-resolution trees in Cantor space.
//!
//! A [`ClopenTree`] of depth `d` is a set of length-`d` leaves. Its node set is
//! derived: a string of length at most `d` is a node iff it prefixes some leaf,
//! and a longer string is a node iff its length-`d` prefix is a leaf. The path
//! set is the finite union of the leaf cylinders, so every measure is exact and
//! there are never dead branches.

use crate::bitstring::BitString;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Depth limit enforced by every constructor.
pub const MAX_DEPTH: u32 = 24;

fn check_depth(depth: u32) -> Result<()> {
    if depth > MAX_DEPTH {
        Err(Error::DepthExceeded {
            requested: depth,
            limit: MAX_DEPTH,
        })
    } else {
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ClopenTree {
    depth: u32,
    // bit i of the leaf bitset lives at words[i / 64] >> (i % 64)
    words: Vec<u64>,
}

impl ClopenTree {
    pub fn empty(depth: u32) -> Result<Self> {
        check_depth(depth)?;
        let n = 1usize << depth;
        Ok(ClopenTree {
            depth,
            words: vec![0; n.div_ceil(64)],
        })
    }

    pub fn full(depth: u32) -> Result<Self> {
        let mut t = Self::empty(depth)?;
        let n = 1u64 << depth;
        for i in 0..n {
            t.set(i, true);
        }
        Ok(t)
    }

    pub fn from_leaf_indices(depth: u32, leaves: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut t = Self::empty(depth)?;
        for i in leaves {
            if i >= t.width() {
                return Err(Error::InvalidArgument(format!(
                    "leaf index {i} out of range for depth {depth}"
                )));
            }
            t.set(i, true);
        }
        Ok(t)
    }

    pub fn from_leaves(depth: u32, leaves: impl IntoIterator<Item = BitString>) -> Result<Self> {
        let mut t = Self::empty(depth)?;
        for s in leaves {
            if s.len() != depth {
                return Err(Error::InvalidArgument(format!(
                    "leaf {s} does not have length {depth}"
                )));
            }
            t.set(s.index(), true);
        }
        Ok(t)
    }

    /// Builds from raw little-endian words; bits beyond `2^depth` must be clear.
    pub(crate) fn from_words(depth: u32, words: Vec<u64>) -> Result<Self> {
        let t = Self::empty(depth)?;
        if words.len() != t.words.len() {
            return Err(Error::Parse("leaf bitset has the wrong length".into()));
        }
        let width = t.width();
        if width < 64 && words[0] >> width != 0 {
            return Err(Error::Parse("padding bits beyond 2^depth are set".into()));
        }
        Ok(ClopenTree { depth, words })
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Number of strings of length `depth`.
    pub fn width(&self) -> u64 {
        1u64 << self.depth
    }

    pub fn is_leaf_index(&self, i: u64) -> bool {
        (self.words[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    fn set(&mut self, i: u64, on: bool) {
        let w = &mut self.words[(i / 64) as usize];
        if on {
            *w |= 1 << (i % 64);
        } else {
            *w &= !(1 << (i % 64));
        }
    }

    pub fn leaf_count(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn leaf_indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros();
                w &= w - 1;
                Some(wi as u64 * 64 + u64::from(b))
            })
        })
    }

    pub fn leaves(&self) -> impl Iterator<Item = BitString> + '_ {
        self.leaf_indices()
            .map(move |i| BitString::from_index(i, self.depth))
    }

    /// Exact measure of the path set: `|leaves| · 2^-depth`.
    pub fn measure(&self) -> Dyadic {
        Dyadic::from_count(self.leaf_count(), self.depth)
    }

    fn count_range(&self, lo: u64, hi: u64) -> u64 {
        let mut count = 0u64;
        let mut i = lo;
        while i < hi {
            let wi = (i / 64) as usize;
            let off = i % 64;
            let take = (64 - off).min(hi - i);
            let mask = if take == 64 {
                u64::MAX
            } else {
                ((1u64 << take) - 1) << off
            };
            count += u64::from((self.words[wi] & mask).count_ones());
            i += take;
        }
        count
    }

    /// Number of leaves extending `sigma` (`|sigma| <= depth`).
    pub fn count_below(&self, sigma: &BitString) -> u64 {
        assert!(sigma.len() <= self.depth);
        let shift = self.depth - sigma.len();
        let lo = sigma.index() << shift;
        self.count_range(lo, lo + (1u64 << shift))
    }

    /// `μ([T_σ])` for any `σ`, including strings longer than the depth.
    pub fn mass(&self, sigma: &BitString) -> Dyadic {
        if sigma.len() <= self.depth {
            Dyadic::from_count(self.count_below(sigma), self.depth)
        } else if self.is_leaf_index(sigma.prefix(self.depth).index()) {
            Dyadic::pow2_neg(sigma.len())
        } else {
            Dyadic::zero()
        }
    }

    /// Whether `σ` is a node of the derived (infinite) node set.
    pub fn contains_node(&self, sigma: &BitString) -> bool {
        if sigma.len() <= self.depth {
            self.count_below(sigma) > 0
        } else {
            self.is_leaf_index(sigma.prefix(self.depth).index())
        }
    }

    /// Whether `[T_σ]` is the whole cylinder of `σ`.
    pub fn is_full_below(&self, sigma: &BitString) -> bool {
        if sigma.len() <= self.depth {
            self.count_below(sigma) == 1u64 << (self.depth - sigma.len())
        } else {
            self.contains_node(sigma)
        }
    }

    /// `T_σ`: the leaves comparable with `σ`.
    pub fn restrict(&self, sigma: &BitString) -> Result<ClopenTree> {
        if sigma.len() > self.depth {
            return Err(Error::DepthExceeded {
                requested: sigma.len(),
                limit: self.depth,
            });
        }
        let mut out = ClopenTree::empty(self.depth)?;
        let shift = self.depth - sigma.len();
        let lo = sigma.index() << shift;
        for i in lo..lo + (1u64 << shift) {
            if self.is_leaf_index(i) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// Clears every leaf extending `σ`; returns the number removed.
    pub(crate) fn remove_cylinder(&mut self, sigma: &BitString) -> u64 {
        let shift = self.depth - sigma.len();
        let lo = sigma.index() << shift;
        let mut removed = 0;
        for i in lo..lo + (1u64 << shift) {
            if self.is_leaf_index(i) {
                self.set(i, false);
                removed += 1;
            }
        }
        removed
    }

    /// `|T ∩ 2^n|` for `n <= depth`.
    pub fn level_count(&self, n: u32) -> u64 {
        assert!(n <= self.depth);
        let shift = self.depth - n;
        let mut count = 0;
        let mut last = None;
        for i in self.leaf_indices() {
            let p = i >> shift;
            if last != Some(p) {
                count += 1;
                last = Some(p);
            }
        }
        count
    }

    /// `|T ∩ 2^n|` for every `n` in `0..=depth`.
    pub fn level_counts(&self) -> Vec<u64> {
        let nc = self.node_counts();
        (0..=self.depth)
            .map(|n| nc.level(n).iter().filter(|&&c| c > 0).count() as u64)
            .collect()
    }

    /// Growth rate `k ↦ min{m : |T ∩ 2^m| ≥ 2^k}` within the resolution.
    pub fn growth_rate(&self, k: u32) -> Result<u32> {
        let none = Error::NoSuchLevel {
            k,
            depth: self.depth,
        };
        if k >= 64 {
            return Err(none);
        }
        let need = 1u64 << k;
        self.level_counts()
            .iter()
            .position(|&c| c >= need)
            .map(|m| m as u32)
            .ok_or(none)
    }

    /// The same path set at a finer resolution.
    pub fn refine(&self, depth: u32) -> Result<ClopenTree> {
        if depth < self.depth {
            return Err(Error::InvalidArgument(format!(
                "cannot refine depth {} to {depth}",
                self.depth
            )));
        }
        let mut out = ClopenTree::empty(depth)?;
        let shift = depth - self.depth;
        for i in self.leaf_indices() {
            let lo = i << shift;
            for j in lo..lo + (1u64 << shift) {
                out.set(j, true);
            }
        }
        Ok(out)
    }

    /// `T ∩ S` at the finer of the two resolutions.
    pub fn intersect(&self, other: &ClopenTree) -> Result<ClopenTree> {
        let depth = self.depth.max(other.depth);
        let mut a = self.refine(depth)?;
        let b = other.refine(depth)?;
        for (x, y) in a.words.iter_mut().zip(&b.words) {
            *x &= *y;
        }
        Ok(a)
    }

    /// Path-set inclusion `[self] ⊆ [other]`.
    pub fn is_subset_of(&self, other: &ClopenTree) -> bool {
        let depth = self.depth.max(other.depth);
        match (self.refine(depth), other.refine(depth)) {
            (Ok(a), Ok(b)) => a.words.iter().zip(&b.words).all(|(x, y)| x & !y == 0),
            _ => false,
        }
    }

    pub fn node_counts(&self) -> NodeCounts {
        NodeCounts::new(self)
    }
}

impl std::fmt::Debug for ClopenTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let leaves: Vec<String> = self.leaves().take(16).map(|s| s.to_string()).collect();
        f.debug_struct("ClopenTree")
            .field("depth", &self.depth)
            .field("leaf_count", &self.leaf_count())
            .field("leaves", &leaves)
            .finish()
    }
}

/// Leaf counts below every node of a [`ClopenTree`], one vector per level.
///
/// Scans over all nodes read from here instead of recounting bit ranges.
#[derive(Clone, Debug)]
pub struct NodeCounts {
    depth: u32,
    levels: Vec<Vec<u32>>,
}

impl NodeCounts {
    fn new(tree: &ClopenTree) -> Self {
        let d = tree.depth;
        let mut bottom = vec![0u32; 1usize << d];
        for i in tree.leaf_indices() {
            bottom[i as usize] = 1;
        }
        let mut levels = vec![bottom];
        for _ in 0..d {
            let below = levels.last().unwrap();
            let up: Vec<u32> = below.chunks(2).map(|c| c[0] + c[1]).collect();
            levels.push(up);
        }
        levels.reverse();
        NodeCounts { depth: d, levels }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn level(&self, n: u32) -> &[u32] {
        &self.levels[n as usize]
    }

    pub fn get(&self, sigma: &BitString) -> u32 {
        self.levels[sigma.len() as usize][sigma.index() as usize]
    }

    pub(crate) fn clear_cylinder(&mut self, sigma: &BitString) {
        let removed = self.get(sigma);
        if removed == 0 {
            return;
        }
        for n in 0..sigma.len() {
            let p = sigma.prefix(n);
            self.levels[n as usize][p.index() as usize] -= removed;
        }
        for n in sigma.len()..=self.depth {
            let shift = n - sigma.len();
            let lo = (sigma.index() << shift) as usize;
            self.levels[n as usize][lo..lo + (1usize << shift)].fill(0);
        }
    }
}

/// Exact integer form of `mass(σ) > x · 2^-|σ|` at depth `d`:
/// `count(σ) > floor(x · 2^(d-|σ|))`.
pub(crate) fn density_bounds(x: &Dyadic, depth: u32) -> Vec<i128> {
    (0..=depth).map(|l| x.floor_scaled_i128(depth - l)).collect()
}

/// Exact integer form of `mass(σ) > y` at depth `d`: `count(σ) > floor(y · 2^d)`.
pub(crate) fn mass_bound(y: &Dyadic, depth: u32) -> i128 {
    y.floor_scaled_i128(depth)
}
