//! Versioned text formats and content digests.
//!
//! A tree file is a JSON record
//!
//! ```text
//! {
//!   "format": "clopen-tree/v1",
//!   "depth": 2,
//!   "leaves": "07"
//! }
//! ```
//!
//! `leaves` is the leaf bitset in lowercase hexadecimal, little-endian by byte:
//! byte `j` holds leaves `8j..8j+8`, leaf `i` at bit `i % 8`. Leaf `i` is the
//! length-`depth` string whose MSB-first binary value is `i`. The byte count is
//! `ceil(2^depth / 8)`; padding bits must be zero.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tree::ClopenTree;

pub const TREE_FORMAT: &str = "clopen-tree/v1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeRecord {
    pub format: String,
    pub depth: u32,
    pub leaves: String,
}

impl TreeRecord {
    pub fn from_tree(tree: &ClopenTree) -> Self {
        let nbytes = (tree.width() as usize).div_ceil(8);
        let bytes: Vec<u8> = tree
            .words()
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(nbytes)
            .collect();
        TreeRecord {
            format: TREE_FORMAT.to_string(),
            depth: tree.depth(),
            leaves: hex::encode(bytes),
        }
    }

    pub fn to_tree(&self) -> Result<ClopenTree> {
        if self.format != TREE_FORMAT {
            return Err(Error::UnknownVersion(self.format.clone()));
        }
        let probe = ClopenTree::empty(self.depth)?;
        let nbytes = (probe.width() as usize).div_ceil(8);
        let bytes = hex::decode(&self.leaves)
            .map_err(|e| Error::Parse(format!("leaf bitset is not hexadecimal: {e}")))?;
        if bytes.len() != nbytes {
            return Err(Error::Parse(format!(
                "leaf bitset has {} bytes, depth {} needs {nbytes}",
                bytes.len(),
                self.depth
            )));
        }
        let words = bytes
            .chunks(8)
            .map(|c| {
                let mut buf = [0u8; 8];
                buf[..c.len()].copy_from_slice(c);
                u64::from_le_bytes(buf)
            })
            .collect();
        ClopenTree::from_words(self.depth, words)
    }
}

impl Serialize for ClopenTree {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TreeRecord::from_tree(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ClopenTree {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        TreeRecord::deserialize(deserializer)?
            .to_tree()
            .map_err(serde::de::Error::custom)
    }
}

/// Canonical pretty JSON with a trailing newline.
pub fn to_canonical_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn tree_to_text(tree: &ClopenTree) -> String {
    to_canonical_text(&TreeRecord::from_tree(tree))
}

pub fn tree_from_text(text: &str) -> Result<ClopenTree> {
    let record: TreeRecord = serde_json::from_str(text)?;
    record.to_tree()
}

/// Lowercase hex SHA-256.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of the canonical tree file.
pub fn tree_digest(tree: &ClopenTree) -> String {
    digest(tree_to_text(tree).as_bytes())
}
