use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite binary string, packed most-significant-bit first.
///
/// The packed value of a string of length `d` is the index of the
/// corresponding leaf in a depth-`d` bitset. The derived ordering compares
/// length first and then the packed value, which is length-lexicographic
/// order; [`BitString::cmp_lex`] gives plain lexicographic order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString {
    len: u32,
    bits: u64,
}

impl BitString {
    /// Storage bound of the packed representation.
    pub const CAPACITY: u32 = 63;

    pub const EMPTY: BitString = BitString { len: 0, bits: 0 };

    pub fn empty() -> Self {
        Self::EMPTY
    }

    /// The string of length `len` whose packed value is `bits`.
    pub fn from_index(bits: u64, len: u32) -> Self {
        assert!(len <= Self::CAPACITY, "bit string too long");
        assert!(len == 64 || bits >> len == 0, "index out of range");
        BitString { len, bits }
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.len() > Self::CAPACITY as usize {
            return Err(Error::StringTooLong {
                limit: Self::CAPACITY,
            });
        }
        let mut s = Self::EMPTY;
        for &b in bits {
            s = s.child(b);
        }
        Ok(s)
    }

    /// `b^n`.
    pub fn repeat(bit: bool, n: u32) -> Self {
        assert!(n <= Self::CAPACITY);
        let bits = if bit { (1u64 << n) - 1 } else { 0 };
        BitString { len: n, bits }
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Packed value; equals the leaf index when `len` is the tree depth.
    pub fn index(&self) -> u64 {
        self.bits
    }

    pub fn bit(&self, i: u32) -> bool {
        assert!(i < self.len);
        (self.bits >> (self.len - 1 - i)) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }

    pub fn child(&self, bit: bool) -> Self {
        assert!(self.len < Self::CAPACITY, "bit string too long");
        BitString {
            len: self.len + 1,
            bits: (self.bits << 1) | u64::from(bit),
        }
    }

    pub fn parent(&self) -> Option<Self> {
        (self.len > 0).then(|| BitString {
            len: self.len - 1,
            bits: self.bits >> 1,
        })
    }

    /// The length-`n` prefix (`n <= len`).
    pub fn prefix(&self, n: u32) -> Self {
        assert!(n <= self.len);
        BitString {
            len: n,
            bits: self.bits >> (self.len - n),
        }
    }

    /// All prefixes, shortest first, ending with `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = BitString> + '_ {
        (0..=self.len).map(move |n| self.prefix(n))
    }

    /// `self ⊑ other`.
    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len <= other.len && other.prefix(self.len) == *self
    }

    pub fn is_strict_prefix_of(&self, other: &BitString) -> bool {
        self.len < other.len && self.is_prefix_of(other)
    }

    pub fn comparable(&self, other: &BitString) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn concat(&self, other: &BitString) -> Self {
        assert!(self.len + other.len <= Self::CAPACITY, "bit string too long");
        BitString {
            len: self.len + other.len,
            bits: (self.bits << other.len) | other.bits,
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Positions `i` with `self(i) = 1`, ascending.
    pub fn one_positions(&self) -> Vec<u32> {
        (0..self.len).filter(|&i| self.bit(i)).collect()
    }

    /// Lexicographic order (a proper prefix sorts first).
    pub fn cmp_lex(&self, other: &BitString) -> std::cmp::Ordering {
        let n = self.len.min(other.len);
        self.prefix(n)
            .bits
            .cmp(&other.prefix(n).bits)
            .then(self.len.cmp(&other.len))
    }

    /// Every string of length `len`, in lexicographic order.
    pub fn all_of_length(len: u32) -> impl Iterator<Item = BitString> {
        assert!(len < 64);
        (0..1u64 << len).map(move |i| BitString::from_index(i, len))
    }

    /// Every string of length at most `max_len`, in length-lexicographic order.
    pub fn all_up_to(max_len: u32) -> impl Iterator<Item = BitString> {
        (0..=max_len).flat_map(BitString::all_of_length)
    }

    /// Extensions of `self` of length exactly `len`, in lexicographic order.
    pub fn extensions_of_length(&self, len: u32) -> impl Iterator<Item = BitString> {
        assert!(len >= self.len && len < 64);
        let shift = len - self.len;
        let lo = self.bits << shift;
        (lo..lo + (1u64 << shift)).map(move |i| BitString::from_index(i, len))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("λ");
        }
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses a string of `0`/`1` characters; the empty string and `λ` both
/// denote the empty string.
impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "λ" {
            return Ok(Self::EMPTY);
        }
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("not a bit string: {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }
}

/// Serialized as the plain `0`/`1` text; the empty string is `""`.
impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        serializer.serialize_str(&s)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cmp::Ordering;

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn basics() {
        let s = b("0110");
        assert_eq!(s.len(), 4);
        assert_eq!(s.index(), 6);
        assert!(!s.bit(0) && s.bit(1) && s.bit(2) && !s.bit(3));
        assert_eq!(s.to_string(), "0110");
        assert_eq!(b("").to_string(), "λ");
        assert_eq!(b("λ"), BitString::EMPTY);
        assert_eq!(s.prefix(2), b("01"));
        assert_eq!(s.parent(), Some(b("011")));
        assert_eq!(BitString::EMPTY.parent(), None);
        assert_eq!(b("01").concat(&b("10")), s);
        assert_eq!(s.one_positions(), vec![1, 2]);
        assert_eq!(BitString::repeat(false, 3), b("000"));
        assert_eq!(BitString::repeat(true, 2), b("11"));
    }

    #[test]
    fn prefix_relations() {
        assert!(b("").is_prefix_of(&b("101")));
        assert!(b("10").is_prefix_of(&b("101")));
        assert!(b("101").is_prefix_of(&b("101")));
        assert!(!b("101").is_strict_prefix_of(&b("101")));
        assert!(!b("11").is_prefix_of(&b("101")));
        assert!(!b("0").comparable(&b("1")));
        assert!(b("1").comparable(&b("10")));
    }

    #[test]
    fn orders() {
        // length-lex: shorter first
        assert!(b("1") < b("00"));
        assert!(b("00") < b("01"));
        // lex: prefix first, then by first difference
        assert_eq!(b("1").cmp_lex(&b("00")), Ordering::Greater);
        assert_eq!(b("0").cmp_lex(&b("00")), Ordering::Less);
        assert_eq!(b("01").cmp_lex(&b("1")), Ordering::Less);
        let all: Vec<_> = BitString::all_up_to(2).map(|s| s.to_string()).collect();
        assert_eq!(all, ["λ", "0", "1", "00", "01", "10", "11"]);
        let ext: Vec<_> = b("1").extensions_of_length(3).map(|s| s.to_string()).collect();
        assert_eq!(ext, ["100", "101", "110", "111"]);
    }

    #[test]
    fn orders_consistent_with_prefix() {
        for s in BitString::all_up_to(4) {
            for t in BitString::all_up_to(4) {
                if s.is_strict_prefix_of(&t) {
                    assert!(s < t);
                    assert_eq!(s.cmp_lex(&t), Ordering::Less);
                }
            }
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!("012".parse::<BitString>().is_err());
        assert!("0".repeat(64).parse::<BitString>().is_err());
    }
}
