//! Seeded random positive trees.
//!
//! Start from the full leaf set at depth `d`. While dropping one more leaf
//! keeps the measure at or above the target, draw `r` from ChaCha8 (seeded
//! with `seed_from_u64(seed)`), take index `⌊r · len / 2^64⌋` into the current
//! leaf list, and `swap_remove` it. The list starts in increasing index order.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::tree::{ClopenTree, MAX_DEPTH};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GenSpec {
    pub depth: u32,
    pub target: Dyadic,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(depth: u32, target: Dyadic, seed: u64) -> Result<Self> {
        let spec = GenSpec {
            depth,
            target,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth > MAX_DEPTH {
            return Err(Error::DepthExceeded {
                requested: self.depth,
                limit: MAX_DEPTH,
            });
        }
        if !self.target.is_positive() || self.target > Dyadic::one() {
            return Err(Error::InvalidArgument(format!(
                "target measure {} is not in (0, 1]",
                self.target
            )));
        }
        Ok(())
    }
}

/// Uniform index below `len` from one 64-bit draw.
pub fn draw_index(rng: &mut impl RngCore, len: usize) -> usize {
    ((u128::from(rng.next_u64()) * len as u128) >> 64) as usize
}

pub fn gen_random_positive_tree(spec: &GenSpec) -> Result<ClopenTree> {
    spec.validate()?;
    let d = spec.depth;
    // least leaf count with measure ≥ target
    let floor = spec.target.floor_scaled(d);
    let exact = Dyadic::new(floor.clone(), d) == spec.target;
    let floor = u64::try_from(floor).expect("target ≤ 1");
    let need = if exact { floor } else { floor + 1 };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut leaves: Vec<u64> = (0..1u64 << d).collect();
    while leaves.len() as u64 > need {
        let i = draw_index(&mut rng, leaves.len());
        leaves.swap_remove(i);
    }
    ClopenTree::from_leaf_indices(d, leaves)
}
