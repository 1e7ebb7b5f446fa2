//! Perfect embeddings of `2^{<k}` and homogeneous-subtree search.

use serde::{Deserialize, Serialize};

use crate::bitstring::BitString;
use crate::error::{Error, Result};

/// Position of `σ` in length-lexicographic order, `2^|σ| − 1 + value`.
fn heap_index(s: &BitString) -> usize {
    ((1u64 << s.len()) - 1 + s.index()) as usize
}

/// A map `e` from `2^{<k}` into strings with `e(σ0)`, `e(σ1)` incomparable
/// strict extensions of `e(σ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerfectEmbedding {
    k: u32,
    images: Vec<BitString>,
}

impl PerfectEmbedding {
    /// `images[i]` is the image of the `i`-th string of `2^{<k}` in
    /// length-lexicographic order.
    pub fn new(k: u32, images: Vec<BitString>) -> Result<Self> {
        if images.len() as u64 != (1u64 << k) - 1 {
            return Err(Error::InvalidArgument(format!(
                "an embedding of 2^<{k} needs {} images",
                (1u64 << k) - 1
            )));
        }
        Ok(PerfectEmbedding { k, images })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn domain(&self) -> impl Iterator<Item = BitString> {
        BitString::all_up_to(self.k.saturating_sub(1)).take(self.images.len())
    }

    pub fn image(&self, sigma: &BitString) -> BitString {
        assert!(sigma.len() < self.k);
        self.images[heap_index(sigma)]
    }

    pub fn images(&self) -> &[BitString] {
        &self.images
    }

    /// `(σ, e(σ))` pairs in length-lexicographic order of `σ`.
    pub fn pairs(&self) -> impl Iterator<Item = (BitString, BitString)> + '_ {
        self.domain().zip(self.images.iter().copied())
    }

    /// Checks the embedding laws on every pair of domain strings.
    pub fn is_valid(&self) -> bool {
        let pairs: Vec<_> = self.pairs().collect();
        for &(s, es) in &pairs {
            if s.len() + 1 < self.k {
                let e0 = self.image(&s.child(false));
                let e1 = self.image(&s.child(true));
                if !es.is_strict_prefix_of(&e0) || !es.is_strict_prefix_of(&e1) || e0.comparable(&e1) {
                    return false;
                }
            }
            for &(t, et) in &pairs {
                if s.is_prefix_of(&t) && !es.is_prefix_of(&et) {
                    return false;
                }
                if !s.comparable(&t) && es.comparable(&et) {
                    return false;
                }
            }
        }
        true
    }
}

impl Serialize for PerfectEmbedding {
    /// Association list `[[σ, e(σ)], …]`.
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.pairs())
    }
}

impl<'de> Deserialize<'de> for PerfectEmbedding {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<(BitString, BitString)>::deserialize(deserializer)?;
        let n = pairs.len() as u64 + 1;
        if !n.is_power_of_two() {
            return Err(serde::de::Error::custom("embedding size is not 2^k - 1"));
        }
        let k = n.trailing_zeros();
        for ((s, _), expected) in pairs.iter().zip(BitString::all_up_to(k.saturating_sub(1))) {
            if *s != expected {
                return Err(serde::de::Error::custom(format!(
                    "embedding domain out of order at {s}"
                )));
            }
        }
        PerfectEmbedding::new(k, pairs.into_iter().map(|(_, e)| e).collect())
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchStrategy {
    Greedy,
    Exhaustive,
}

/// Strict extensions of `v` up to length `depth`, length-lexicographically.
fn strict_extensions(v: BitString, depth: u32) -> impl Iterator<Item = BitString> {
    (v.len() + 1..=depth).flat_map(move |l| v.extensions_of_length(l))
}

/// Least pair `(u0, u1)` from `candidates` (sorted length-lexicographically)
/// with `u0` before `u1` and the two incomparable.
fn least_incomparable_pair(candidates: &[BitString]) -> Option<(BitString, BitString)> {
    for (i, u0) in candidates.iter().enumerate() {
        if let Some(u1) = candidates[i + 1..].iter().find(|u1| !u0.comparable(u1)) {
            return Some((*u0, *u1));
        }
    }
    None
}

/// Level-by-level search: root is the least admissible node, and each image
/// gets the least admissible strict extension followed by the least admissible
/// extension incomparable with it. No lookahead, so it can dead-end.
fn greedy(depth: u32, k: u32, admissible: &dyn Fn(&BitString) -> bool) -> Option<PerfectEmbedding> {
    let root = BitString::all_up_to(depth).find(|s| admissible(s))?;
    let mut images = vec![root];
    for sigma in BitString::all_up_to(k.saturating_sub(2)).take(((1u64 << (k - 1)) - 1) as usize) {
        let v = images[heap_index(&sigma)];
        let u0 = strict_extensions(v, depth).find(|u| admissible(u))?;
        let u1 = strict_extensions(v, depth).find(|u| admissible(u) && !u.comparable(&u0))?;
        images.push(u0);
        images.push(u1);
    }
    PerfectEmbedding::new(k, images).ok()
}

/// Exact search. `can[h][v]` holds when some embedding of `2^{<h}` has root
/// image `v`; a node qualifies at height `h` when it is admissible and some
/// node at or below it has both children reaching height `h − 1`.
fn exhaustive(depth: u32, k: u32, admissible: &dyn Fn(&BitString) -> bool) -> Option<PerfectEmbedding> {
    let size = ((1u64 << (depth + 1)) - 1) as usize;
    let nodes: Vec<BitString> = BitString::all_up_to(depth).collect();
    let base: Vec<bool> = nodes.iter().map(admissible).collect();
    let children = |i: usize| (2 * i + 1, 2 * i + 2);

    let mut can = vec![base.clone()];
    for _ in 2..=k {
        let prev = can.last().unwrap();
        let mut reach = vec![false; size];
        let mut split_below = vec![false; size];
        for i in (0..size).rev() {
            let (c0, c1) = children(i);
            if c1 < size {
                reach[i] = prev[i] || reach[c0] || reach[c1];
                split_below[i] = (reach[c0] && reach[c1]) || split_below[c0] || split_below[c1];
            } else {
                reach[i] = prev[i];
            }
        }
        let next = (0..size).map(|i| base[i] && split_below[i]).collect();
        can.push(next);
    }

    let root_idx = can[k as usize - 1].iter().position(|&x| x)?;
    let mut images = vec![nodes[root_idx]];
    for sigma in BitString::all_up_to(k.saturating_sub(2)).take(((1u64 << (k - 1)) - 1) as usize) {
        let v = images[heap_index(&sigma)];
        let child_height = k - sigma.len() - 1;
        let table = &can[child_height as usize - 1];
        let candidates: Vec<BitString> = strict_extensions(v, depth)
            .filter(|u| table[heap_index(u)])
            .collect();
        let (u0, u1) = least_incomparable_pair(&candidates)?;
        images.push(u0);
        images.push(u1);
    }
    PerfectEmbedding::new(k, images).ok()
}

/// Searches `2^{≤depth}` for a perfect embedding of `2^{<k}` whose images all
/// satisfy `admissible`. Greedy first, exhaustive on failure.
pub fn find_embedding(
    depth: u32,
    k: u32,
    admissible: &dyn Fn(&BitString) -> bool,
) -> Option<(PerfectEmbedding, SearchStrategy)> {
    if k == 0 {
        return PerfectEmbedding::new(0, vec![]).ok().map(|e| (e, SearchStrategy::Greedy));
    }
    if k > depth + 1 {
        return None;
    }
    if let Some(e) = greedy(depth, k, admissible) {
        return Some((e, SearchStrategy::Greedy));
    }
    exhaustive(depth, k, admissible).map(|e| (e, SearchStrategy::Exhaustive))
}

/// Whether any embedding exists, without constructing one.
pub fn embedding_exists(depth: u32, k: u32, admissible: &dyn Fn(&BitString) -> bool) -> bool {
    k == 0 || (k <= depth + 1 && exhaustive(depth, k, admissible).is_some())
}

/// A finite coloring of `2^{≤depth}` with `arity` colors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Coloring {
    pub depth: u32,
    pub arity: u32,
    /// Colors in length-lexicographic node order.
    pub colors: Vec<u32>,
}

impl Coloring {
    pub fn new(depth: u32, arity: u32, colors: Vec<u32>) -> Result<Self> {
        if depth >= BitString::CAPACITY || depth > crate::tree::MAX_DEPTH {
            return Err(Error::DepthExceeded {
                requested: depth,
                limit: crate::tree::MAX_DEPTH,
            });
        }
        if arity == 0 {
            return Err(Error::InvalidArgument("a coloring needs at least one color".into()));
        }
        if colors.len() as u64 != (1u64 << (depth + 1)) - 1 {
            return Err(Error::InvalidArgument(format!(
                "depth {depth} needs {} colors, got {}",
                (1u64 << (depth + 1)) - 1,
                colors.len()
            )));
        }
        if let Some(c) = colors.iter().find(|&&c| c >= arity) {
            return Err(Error::InvalidArgument(format!("color {c} is not below {arity}")));
        }
        Ok(Coloring {
            depth,
            arity,
            colors,
        })
    }

    pub fn from_fn(depth: u32, arity: u32, f: impl Fn(&BitString) -> u32) -> Result<Self> {
        Coloring::new(depth, arity, BitString::all_up_to(depth).map(|s| f(&s)).collect())
    }

    pub fn color(&self, s: &BitString) -> u32 {
        self.colors[heap_index(s)]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Homogeneous {
    pub color: u32,
    pub embedding: PerfectEmbedding,
    pub strategy: SearchStrategy,
}

/// Lowest color with a monochromatic perfect copy of `2^{<k}`.
pub fn tt1_homogeneous(coloring: &Coloring, k: u32) -> Result<Homogeneous> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    for color in 0..coloring.arity {
        let admissible = |s: &BitString| coloring.color(s) == color;
        if let Some((embedding, strategy)) = find_embedding(coloring.depth, k, &admissible) {
            return Ok(Homogeneous {
                color,
                embedding,
                strategy,
            });
        }
    }
    Err(Error::NoHomogeneousTree {
        k,
        depth: coloring.depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    /// Brute force: try every assignment of images level by level.
    fn brute_force_exists(depth: u32, k: u32, ok: &dyn Fn(&BitString) -> bool) -> bool {
        fn extend(
            depth: u32,
            k: u32,
            ok: &dyn Fn(&BitString) -> bool,
            images: &mut Vec<BitString>,
        ) -> bool {
            let n = images.len() as u64;
            if n == (1u64 << k) - 1 {
                return PerfectEmbedding::new(k, images.clone()).unwrap().is_valid();
            }
            let sigma = BitString::all_up_to(k).nth(n as usize).unwrap();
            let candidates: Vec<BitString> = match sigma.parent() {
                None => BitString::all_up_to(depth).filter(|s| ok(s)).collect(),
                Some(p) => {
                    let v = images[heap_index(&p)];
                    strict_extensions(v, depth).filter(|s| ok(s)).collect()
                }
            };
            for c in candidates {
                images.push(c);
                if extend(depth, k, ok, images) {
                    return true;
                }
                images.pop();
            }
            false
        }
        extend(depth, k, ok, &mut Vec::new())
    }

    #[test]
    fn constant_coloring_identity() {
        let c = Coloring::from_fn(2, 1, |_| 0).unwrap();
        let h = tt1_homogeneous(&c, 2).unwrap();
        assert_eq!(h.color, 0);
        assert_eq!(h.embedding.images(), &[b(""), b("0"), b("1")]);
    }

    #[test]
    fn length_parity_coloring() {
        let c = Coloring::from_fn(4, 2, |s| s.len() % 2).unwrap();
        let h = tt1_homogeneous(&c, 2).unwrap();
        assert_eq!(h.color, 0);
        assert_eq!(h.embedding.images(), &[b(""), b("00"), b("01")]);
        assert!(h.embedding.is_valid());
        assert!(h.embedding.images().iter().all(|s| s.len() % 2 == 0));
    }

    #[test]
    fn depth_one_has_no_homogeneous_tree() {
        let c = Coloring::new(1, 2, vec![0, 1, 1]).unwrap();
        assert!(matches!(
            tt1_homogeneous(&c, 2),
            Err(Error::NoHomogeneousTree { .. })
        ));
        for color in 0..2 {
            assert!(!brute_force_exists(1, 2, &|s: &BitString| c.color(s) == color));
        }
    }

    #[test]
    fn greedy_dead_end_falls_back() {
        // admissible: λ, 0, 00, 01 and 1 is missing; only 0's subtree splits,
        // greedy takes 0 then finds no partner incomparable with it
        let ok = |s: &BitString| ["", "0", "00", "01"].contains(&s.to_string().replace('λ', "").as_str());
        assert!(greedy(2, 2, &ok).is_none());
        let (e, strategy) = find_embedding(2, 2, &ok).unwrap();
        assert_eq!(strategy, SearchStrategy::Exhaustive);
        assert!(e.is_valid());
        assert_eq!(e.images(), &[b(""), b("00"), b("01")]);
    }

    #[test]
    fn exhaustive_agrees_with_brute_force() {
        // every admissible set over 2^{≤2} (7 nodes), k = 2
        for mask in 0u32..128 {
            let ok = |s: &BitString| mask >> heap_index(s) & 1 == 1;
            let fast = embedding_exists(2, 2, &ok);
            assert_eq!(fast, brute_force_exists(2, 2, &ok), "mask {mask:07b}");
            if let Some((e, _)) = find_embedding(2, 2, &ok) {
                assert!(e.is_valid());
                assert!(e.images().iter().all(ok));
            }
        }
        // pseudo-random admissible sets at depth 4, k = 3
        let mut x = 0x9e3779b97f4a7c15u64;
        for _ in 0..300 {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            let bits = x;
            let ok = move |s: &BitString| (bits >> (heap_index(s) % 64)) & 1 == 1 || s.len() > 3;
            let fast = embedding_exists(4, 3, &ok);
            assert_eq!(fast, brute_force_exists(4, 3, &ok));
            if let Some((e, _)) = find_embedding(4, 3, &ok) {
                assert!(e.is_valid());
                assert!(e.images().iter().all(ok));
            }
        }
    }

    #[test]
    fn invalid_embeddings_detected() {
        let e = PerfectEmbedding::new(2, vec![b(""), b("0"), b("01")]).unwrap();
        assert!(!e.is_valid());
        let e = PerfectEmbedding::new(2, vec![b("0"), b("1"), b("00")]).unwrap();
        assert!(!e.is_valid());
        assert!(PerfectEmbedding::new(2, vec![b("")]).is_err());
    }

    #[test]
    fn serde_association_list() {
        let e = PerfectEmbedding::new(2, vec![b(""), b("00"), b("01")]).unwrap();
        let text = serde_json::to_string(&e).unwrap();
        assert_eq!(text, r#"[["",""],["0","00"],["1","01"]]"#);
        let back: PerfectEmbedding = serde_json::from_str(&text).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn k_bounds() {
        let c = Coloring::from_fn(2, 1, |_| 0).unwrap();
        assert!(tt1_homogeneous(&c, 0).is_err());
        assert!(tt1_homogeneous(&c, 3).is_ok());
        assert!(matches!(tt1_homogeneous(&c, 4), Err(Error::NoHomogeneousTree { .. })));
    }
}
