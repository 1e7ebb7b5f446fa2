//! Simulated halting tables, their modulus, and the sparse-ones class `C`.
//!
//! `C = {X : p^X(n) ≥ m(n) for all n}` where `p^X(n)` is the position of the
//! `n`-th one of `X` (0-based) and `m` is the modulus of the table. Any member
//! with enough ones recovers the table: entry `e` halts iff its halt time is at
//! most `p^X(e+1)`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bitstring::BitString;
use crate::embed::PerfectEmbedding;
use crate::error::{Error, Result};
use crate::tree::ClopenTree;

pub const HALTING_FORMAT: &str = "halting-table/v1";

/// Halt time of each `e < size`; `None` is divergence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HaltingTable {
    entries: Vec<Option<u64>>,
}

impl HaltingTable {
    pub fn new(entries: Vec<Option<u64>>) -> Self {
        HaltingTable { entries }
    }

    pub fn all_divergent(size: usize) -> Self {
        HaltingTable {
            entries: vec![None; size],
        }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Option<u64>] {
        &self.entries
    }

    pub fn halt_time(&self, e: usize) -> Option<u64> {
        self.entries[e]
    }

    /// `H ↾ n`.
    pub fn restrict(&self, n: usize) -> HaltingTable {
        HaltingTable {
            entries: self.entries[..n.min(self.size())].to_vec(),
        }
    }

    /// Halting pattern with times forgotten.
    pub fn halts(&self) -> Vec<bool> {
        self.entries.iter().map(Option::is_some).collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum HaltTimeRecord {
    Steps(u64),
    Word(String),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct EntryRecord {
    e: usize,
    halt_time: HaltTimeRecord,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableRecord {
    format: String,
    entries: Vec<EntryRecord>,
}

impl Serialize for HaltingTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TableRecord {
            format: HALTING_FORMAT.to_string(),
            entries: self
                .entries
                .iter()
                .enumerate()
                .map(|(e, t)| EntryRecord {
                    e,
                    halt_time: match t {
                        Some(t) => HaltTimeRecord::Steps(*t),
                        None => HaltTimeRecord::Word("divergent".into()),
                    },
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HaltingTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let record = TableRecord::deserialize(deserializer)?;
        if record.format != HALTING_FORMAT {
            return Err(D::Error::custom(format!("unknown format {}", record.format)));
        }
        let mut entries = Vec::with_capacity(record.entries.len());
        for (i, entry) in record.entries.into_iter().enumerate() {
            if entry.e != i {
                return Err(D::Error::custom(format!("expected entry {i}, found {}", entry.e)));
            }
            entries.push(match entry.halt_time {
                HaltTimeRecord::Steps(t) => Some(t),
                HaltTimeRecord::Word(w) if w == "divergent" => None,
                HaltTimeRecord::Word(w) => {
                    return Err(D::Error::custom(format!("bad halt time {w:?}")))
                }
            });
        }
        Ok(HaltingTable { entries })
    }
}

/// `m(x)`: least `s` bounding every finite halt time below `x`.
pub fn modulus(h: &HaltingTable, x: usize) -> Result<u64> {
    if x > h.size() {
        return Err(Error::OutOfTable {
            index: x,
            size: h.size(),
        });
    }
    Ok(h.entries[..x].iter().flatten().copied().max().unwrap_or(0))
}

fn moduli(h: &HaltingTable) -> Vec<u64> {
    let mut out = Vec::with_capacity(h.size() + 1);
    let mut m = 0;
    out.push(0);
    for t in h.entries.iter() {
        if let Some(t) = t {
            m = m.max(*t);
        }
        out.push(m);
    }
    out
}

fn clears(m: &[u64], sigma: &BitString) -> bool {
    sigma
        .one_positions()
        .into_iter()
        .take(m.len())
        .enumerate()
        .all(|(n, p)| u64::from(p) >= m[n])
}

/// Whether every defined `p^σ(n)` with `n ≤ size` clears `m(n)`.
pub fn in_c(h: &HaltingTable, sigma: &BitString) -> bool {
    clears(&moduli(h), sigma)
}

/// Depth-`d` truncation of `C`.
pub fn adversarial_tree(h: &HaltingTable, depth: u32) -> Result<ClopenTree> {
    if depth == 0 {
        return Err(Error::InvalidArgument("adversarial trees need depth at least 1".into()));
    }
    let probe = ClopenTree::empty(depth)?;
    let m = moduli(h);
    let leaves = (0..probe.width()).filter(|&i| clears(&m, &BitString::from_index(i, depth)));
    ClopenTree::from_leaf_indices(depth, leaves)
}

/// Recovers `H ↾ count` from a member of `C` with more than `count` ones.
pub fn decode_halting(sigma: &BitString, count: usize, h: &HaltingTable) -> Result<HaltingTable> {
    let ones = sigma.one_positions();
    if ones.len() <= count {
        return Err(Error::InsufficientOnes {
            ones: ones.len(),
            count,
        });
    }
    if !in_c(h, sigma) {
        return Err(Error::NotInC);
    }
    if count > h.size() {
        return Err(Error::OutOfTable {
            index: count,
            size: h.size(),
        });
    }
    let entries = (0..count)
        .map(|e| {
            let budget = u64::from(ones[e + 1]);
            h.entries[e].filter(|&t| t <= budget)
        })
        .collect();
    Ok(HaltingTable { entries })
}

/// Leaves of `tree` extending the images of the top level of `embedding`
/// with at least `ones` ones, in leaf order.
pub fn branch_leaves(
    tree: &ClopenTree,
    embedding: &PerfectEmbedding,
    ones: usize,
) -> Vec<BitString> {
    let k = embedding.k();
    if k == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for tip in BitString::all_of_length(k - 1) {
        let image = embedding.image(&tip);
        if image.len() > tree.depth() {
            continue;
        }
        out.extend(
            image
                .extensions_of_length(tree.depth())
                .filter(|leaf| tree.is_leaf_index(leaf.index()) && leaf.count_ones() as usize >= ones),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn sample() -> HaltingTable {
        HaltingTable::new(vec![Some(5), None, Some(3)])
    }

    fn ones_at(positions: &[u32], len: u32) -> BitString {
        let mut bits = 0u64;
        for &p in positions {
            bits |= 1 << (len - 1 - p);
        }
        BitString::from_index(bits, len)
    }

    #[test]
    fn modulus_examples() {
        let h = sample();
        assert_eq!(modulus(&h, 0).unwrap(), 0);
        assert_eq!(modulus(&h, 1).unwrap(), 5);
        assert_eq!(modulus(&h, 2).unwrap(), 5);
        assert_eq!(modulus(&h, 3).unwrap(), 5);
        assert!(matches!(modulus(&h, 4), Err(Error::OutOfTable { .. })));
        assert_eq!(moduli(&h), vec![0, 5, 5, 5]);
    }

    #[test]
    fn membership_examples() {
        let h = sample();
        assert!(in_c(&h, &b("000000")));
        assert!(!in_c(&h, &b("110000")));
        assert!(in_c(&h, &b("100001")));
        assert!(in_c(&h, &BitString::EMPTY));
    }

    #[test]
    fn tree_examples() {
        let t = adversarial_tree(&HaltingTable::all_divergent(4), 5).unwrap();
        assert_eq!(t, ClopenTree::full(5).unwrap());
        let h = sample();
        let t = adversarial_tree(&h, 6).unwrap();
        assert!(t.is_leaf_index(b("000000").index()));
        assert!(t.is_leaf_index(b("100001").index()));
        assert!(!t.is_leaf_index(b("110000").index()));
        let brute = BitString::all_of_length(6).filter(|s| in_c(&h, s)).count();
        assert_eq!(t.leaf_count() as usize, brute);
        assert!(adversarial_tree(&h, 0).is_err());
    }

    #[test]
    fn measure_non_increasing_in_depth() {
        let h = HaltingTable::new(vec![Some(2), Some(4), None, Some(1)]);
        let mut prev = None;
        for d in 1..=12 {
            let m = adversarial_tree(&h, d).unwrap().measure();
            if let Some(p) = prev {
                assert!(m <= p);
            }
            prev = Some(m);
        }
    }

    #[test]
    fn decode_examples() {
        let h = sample();
        let sigma = ones_at(&[0, 5, 11, 17], 18);
        assert!(in_c(&h, &sigma));
        assert_eq!(decode_halting(&sigma, 3, &h).unwrap(), h);
        assert!(matches!(
            decode_halting(&ones_at(&[0, 5], 6), 3, &h),
            Err(Error::InsufficientOnes { ones: 2, count: 3 })
        ));
        assert!(matches!(
            decode_halting(&b("11110000"), 3, &h),
            Err(Error::NotInC)
        ));
        let div = HaltingTable::all_divergent(3);
        assert_eq!(decode_halting(&b("1111"), 3, &div).unwrap(), div);
    }

    #[test]
    fn decode_exhaustive_small() {
        let h = HaltingTable::new(vec![Some(3), None, Some(6)]);
        for sigma in BitString::all_up_to(10) {
            if in_c(&h, &sigma) && sigma.count_ones() as usize > 3 {
                assert_eq!(decode_halting(&sigma, 3, &h).unwrap(), h);
            }
            for e in 0..3 {
                if in_c(&h, &sigma) && sigma.count_ones() as usize > e {
                    assert_eq!(decode_halting(&sigma, e, &h).unwrap(), h.restrict(e));
                }
            }
        }
    }

    #[test]
    fn serde_shape() {
        let text = serde_json::to_string(&sample()).unwrap();
        assert_eq!(
            text,
            r#"{"format":"halting-table/v1","entries":[{"e":0,"haltTime":5},{"e":1,"haltTime":"divergent"},{"e":2,"haltTime":3}]}"#
        );
        let back: HaltingTable = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sample());
        assert!(serde_json::from_str::<HaltingTable>(
            r#"{"format":"halting-table/v1","entries":[{"e":1,"haltTime":5}]}"#
        )
        .is_err());
        assert!(serde_json::from_str::<HaltingTable>(
            r#"{"format":"halting-table/v1","entries":[{"e":0,"haltTime":"never"}]}"#
        )
        .is_err());
    }
}
