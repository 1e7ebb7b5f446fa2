//! Shared inputs for the benchmarks.

use cantorkit::gen::gen_random_positive_tree;
use cantorkit::{ClopenTree, Dyadic, GenSpec};

pub fn dyadic(s: &str) -> Dyadic {
    s.parse().expect("valid dyadic literal")
}

/// Seeded tree of measure at least `target`.
pub fn tree(depth: u32, target: &str, seed: u64) -> ClopenTree {
    let spec = GenSpec::new(depth, dyadic(target), seed).expect("valid spec");
    gen_random_positive_tree(&spec).expect("generation succeeds")
}
