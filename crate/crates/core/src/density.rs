//! Density witnesses: `σ` with `μ([T_σ]) > (1 − ε) · 2^-|σ|`.
//!
//! Two searches. The greedy one scans all nodes length-lexicographically. The
//! maximization one fixes `n` with `2^-n < εδ`, measures the complement
//! `c_l = |2^l \ T|` of every level, and picks the level where
//! `j_l = min(2^n, ⌊c_l · 2^(n-l)⌋)` is largest. If every node of `T` at that
//! level failed, the complement further down would exceed `(j_l + 1) · 2^-n`.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::bitstring::BitString;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::tree::{density_bounds, ClopenTree};

fn check_epsilon(epsilon: &Dyadic) -> Result<()> {
    if epsilon.is_positive() && *epsilon < Dyadic::one() {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon { below_one: true })
    }
}

/// `μ([T_σ]) > (1 − ε) · 2^-|σ|`, exactly.
pub fn is_density_witness(tree: &ClopenTree, sigma: &BitString, epsilon: &Dyadic) -> bool {
    let x = &Dyadic::one() - epsilon;
    tree.mass(sigma) > x.mul_pow2(-i64::from(sigma.len()))
}

/// Length-lexicographically least witness.
pub fn density_witness_greedy(tree: &ClopenTree, epsilon: &Dyadic) -> Result<BitString> {
    check_epsilon(epsilon)?;
    if tree.is_empty() {
        return Err(Error::EmptyTree);
    }
    let depth = tree.depth();
    let bounds = density_bounds(&(&Dyadic::one() - epsilon), depth);
    let counts = tree.node_counts();
    for l in 0..=depth {
        if let Some(i) = counts
            .level(l)
            .iter()
            .position(|&c| i128::from(c) > bounds[l as usize])
        {
            return Ok(BitString::from_index(i as u64, l));
        }
    }
    Err(Error::WitnessNotFound { level: depth })
}

mod bigint_text {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MaximizationWitness {
    pub witness: BitString,
    /// Least `n` with `2^-n < εδ`.
    pub precision_n: u32,
    #[serde(with = "bigint_text")]
    pub k: BigInt,
    /// Least level attaining `k`.
    pub level: u32,
    /// Levels `0..=depth` were scanned; deeper levels do not exist.
    pub levels_scanned: u32,
}

/// Least `n` with `2^-n < x`, for `x > 0`.
pub fn precision_for(x: &Dyadic) -> u32 {
    assert!(x.is_positive());
    let mut n = 0;
    while Dyadic::pow2_neg(n) >= *x {
        n += 1;
    }
    n
}

/// `j_l = min(2^n, ⌊c_l · 2^(n-l)⌋)` for every level `l ≤ depth`.
pub fn level_scores(tree: &ClopenTree, n: u32) -> Vec<BigInt> {
    let cap = BigInt::one() << n;
    (0..=tree.depth())
        .map(|l| {
            let complement = BigInt::from((1u64 << l) - tree.level_count(l));
            let scaled = if n >= l {
                complement << (n - l)
            } else {
                complement >> (l - n)
            };
            scaled.min(cap.clone())
        })
        .collect()
}

fn check_delta(tree: &ClopenTree, delta: &Dyadic) -> Result<()> {
    if !delta.is_positive() {
        return Err(Error::InvalidDelta);
    }
    if tree.is_empty() {
        return Err(Error::EmptyTree);
    }
    let measure = tree.measure();
    if measure <= *delta {
        return Err(Error::MeasureBelowDelta {
            measure: measure.to_string(),
            delta: delta.to_string(),
        });
    }
    Ok(())
}

/// Witness at the least level maximizing `j_l`.
pub fn density_witness_maximization(
    tree: &ClopenTree,
    epsilon: &Dyadic,
    delta: &Dyadic,
) -> Result<MaximizationWitness> {
    check_epsilon(epsilon)?;
    check_delta(tree, delta)?;
    let n = precision_for(&(epsilon * delta));
    let scores = level_scores(tree, n);
    let k = scores.iter().max().cloned().expect("depth + 1 levels");
    let level = scores.iter().position(|s| *s == k).unwrap() as u32;
    let depth = tree.depth();
    let bound = (&Dyadic::one() - epsilon).floor_scaled_i128(depth - level);
    let witness = BitString::all_of_length(level)
        .find(|s| i128::from(tree.count_below(s)) > bound)
        .ok_or(Error::WitnessNotFound { level })?;
    Ok(MaximizationWitness {
        witness,
        precision_n: n,
        k,
        level,
        levels_scanned: depth + 1,
    })
}

/// The counting step behind the maximization search, on one level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailingLevel {
    pub level: u32,
    /// `|2^d \ T| · 2^-d`.
    pub deep_complement: Dyadic,
    /// `c_l · 2^-l + |T ∩ 2^l| · ε · 2^-l`.
    pub deficit_lower_bound: Dyadic,
    /// `j_l · 2^-n + εδ`.
    pub score_bound: Dyadic,
}

impl FailingLevel {
    pub fn holds(&self) -> bool {
        self.deep_complement >= self.deficit_lower_bound && self.deep_complement > self.score_bound
    }
}

/// When no node of `T` at `level` is a witness, recomputes the complement at
/// the bottom level and the two bounds it must exceed. `None` if some node at
/// `level` is a witness.
pub fn failing_level(
    tree: &ClopenTree,
    epsilon: &Dyadic,
    delta: &Dyadic,
    level: u32,
) -> Result<Option<FailingLevel>> {
    check_epsilon(epsilon)?;
    check_delta(tree, delta)?;
    let depth = tree.depth();
    if level > depth {
        return Err(Error::NoSuchLevel { k: level, depth });
    }
    let alive: Vec<BitString> = BitString::all_of_length(level)
        .filter(|s| tree.contains_node(s))
        .collect();
    if alive.iter().any(|s| is_density_witness(tree, s, epsilon)) {
        return Ok(None);
    }
    let n = precision_for(&(epsilon * delta));
    let score = level_scores(tree, n)[level as usize].clone();
    let complement_at = |l: u32| Dyadic::from_count((1u64 << l) - tree.level_count(l), l);
    let alive_mass = Dyadic::from_count(alive.len() as u64, level);
    Ok(Some(FailingLevel {
        level,
        deep_complement: complement_at(depth),
        deficit_lower_bound: &complement_at(level) + &(epsilon * &alive_mass),
        score_bound: &Dyadic::new(score, n) + &(epsilon * delta),
    }))
}
