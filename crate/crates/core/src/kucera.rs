//! Measure pruning with a summable threshold schedule.
//!
//! `rho(ε, σ) = ε · 2^(-2|σ|-1)`. There are `2^n` strings of length `n`, so the
//! thresholds sum to `ε · Σ 2^(-n-1) = ε` over all of `2^{<ω}`. Pruning removes
//! every cylinder whose surviving mass does not exceed its threshold, until no
//! such cylinder is left. Each node is pruned at most once, so the removed
//! mass is below `ε`.

use serde::{Deserialize, Serialize};

use crate::bitstring::BitString;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::tree::ClopenTree;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PruneReport {
    pub epsilon: Dyadic,
    pub input_measure: Dyadic,
    pub output_measure: Dyadic,
    /// Maximal pruned nodes; pairwise incomparable, their cylinders cover
    /// exactly the removed leaves.
    pub pruned: Vec<BitString>,
    /// Every pruning event in scan order (a node may be pruned after one of
    /// its descendants).
    pub events: Vec<BitString>,
}

impl PruneReport {
    /// `Σ rho(ε, σ)` over all pruning events.
    pub fn event_threshold_sum(&self) -> Dyadic {
        self.events.iter().fold(Dyadic::zero(), |acc, s| {
            acc + rho_at(&self.epsilon, s.len())
        })
    }

    /// `μ(T) − μ(S) ≤ Σ_events rho < ε`, exactly.
    pub fn mass_bound_holds(&self) -> bool {
        let lost = &self.input_measure - &self.output_measure;
        let budget = self.event_threshold_sum();
        lost <= budget && budget < self.epsilon
    }
}

fn check_epsilon(epsilon: &Dyadic) -> Result<()> {
    if epsilon.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon { below_one: false })
    }
}

fn rho_at(epsilon: &Dyadic, len: u32) -> Dyadic {
    epsilon.mul_pow2(-(2 * i64::from(len) + 1))
}

/// `ρ_ε(σ) = ε · 2^(-2|σ|-1)`.
pub fn rho(epsilon: &Dyadic, sigma: &BitString) -> Result<Dyadic> {
    rho_for_length(epsilon, sigma.len())
}

/// `ρ_ε` of any string of length `len`.
pub fn rho_for_length(epsilon: &Dyadic, len: u32) -> Result<Dyadic> {
    check_epsilon(epsilon)?;
    Ok(rho_at(epsilon, len))
}

/// Prunes `tree` to the largest subtree in which every nonempty cylinder
/// carries mass strictly above its threshold.
///
/// Scans by increasing length, lexicographically within a length, and repeats
/// until a full scan removes nothing.
pub fn prune(tree: &ClopenTree, epsilon: &Dyadic) -> Result<(ClopenTree, PruneReport)> {
    check_epsilon(epsilon)?;
    let depth = tree.depth();
    let bounds: Vec<i128> = (0..=depth)
        .map(|l| rho_at(epsilon, l).floor_scaled_i128(depth))
        .collect();

    let mut out = tree.clone();
    let mut counts = tree.node_counts();
    let mut events = Vec::new();
    loop {
        let mut changed = false;
        for len in 0..=depth {
            for idx in 0..1u64 << len {
                let sigma = BitString::from_index(idx, len);
                let c = counts.get(&sigma);
                if c > 0 && i128::from(c) <= bounds[len as usize] {
                    out.remove_cylinder(&sigma);
                    counts.clear_cylinder(&sigma);
                    events.push(sigma);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let pruned = events
        .iter()
        .copied()
        .filter(|s| !events.iter().any(|t| t.is_strict_prefix_of(s)))
        .collect();
    let report = PruneReport {
        epsilon: epsilon.clone(),
        input_measure: tree.measure(),
        output_measure: out.measure(),
        pruned,
        events,
    };
    if out.is_empty() {
        return Err(Error::EmptyAfterPruning(Box::new(report)));
    }
    Ok((out, report))
}

/// Scans every `σ` with `|σ| ≤ depth` and checks
/// `[S_σ] ≠ ∅ ⇒ μ([S_σ]) > ρ_ε(σ)`.
pub fn threshold_property_holds(tree: &ClopenTree, epsilon: &Dyadic) -> bool {
    if !epsilon.is_positive() {
        return false;
    }
    let depth = tree.depth();
    let counts = tree.node_counts();
    (0..=depth).all(|len| {
        let bound = rho_at(epsilon, len);
        counts.level(len).iter().all(|&c| {
            c == 0 || Dyadic::from_count(u64::from(c), depth) > bound
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(&d("1/4"), &b("")).unwrap(), d("1/8"));
        assert_eq!(rho(&d("1/4"), &b("1")).unwrap(), d("1/32"));
        assert_eq!(rho(&d("1/2"), &b("010")).unwrap(), d("1/2^8"));
        assert!(matches!(
            rho(&Dyadic::zero(), &b("")),
            Err(Error::InvalidEpsilon { .. })
        ));
        assert!(rho(&d("-1/2"), &b("")).is_err());
    }

    #[test]
    fn rho_sums_below_epsilon() {
        let eps = d("3/8");
        let mut total = Dyadic::zero();
        for n in 0..12 {
            let per = rho_for_length(&eps, n).unwrap();
            total = total + per.mul_pow2(i64::from(n));
        }
        // partial sums: ε (1 − 2^-12)
        assert_eq!(total, &eps - &eps.mul_pow2(-12));
    }

    #[test]
    fn full_tree_unchanged() {
        let t = ClopenTree::full(4).unwrap();
        let (s, report) = prune(&t, &d("1/4")).unwrap();
        assert_eq!(s, t);
        assert!(report.pruned.is_empty());
        assert!(report.events.is_empty());
    }

    #[test]
    fn single_leaf_prunes_to_empty() {
        let t = ClopenTree::from_leaves(3, [b("000")]).unwrap();
        match prune(&t, &d("1/2")) {
            Err(Error::EmptyAfterPruning(report)) => {
                assert_eq!(report.pruned, vec![b("")]);
                assert_eq!(report.output_measure, Dyadic::zero());
                assert_eq!(report.input_measure, d("1/8"));
            }
            other => panic!("expected EmptyAfterPruning, got {other:?}"),
        }
    }

    #[test]
    fn three_quarter_tree_unchanged() {
        let t = ClopenTree::from_leaves(2, [b("00"), b("01"), b("10")]).unwrap();
        // oracle: every node against rho by hand
        for s in BitString::all_up_to(2) {
            let m = t.mass(&s);
            if m.is_positive() {
                assert!(m > rho(&d("1/4"), &s).unwrap(), "{s}");
            }
        }
        let (s, report) = prune(&t, &d("1/4")).unwrap();
        assert_eq!(s, t);
        assert!(report.pruned.is_empty());
    }

    #[test]
    fn upward_cascade_is_accounted_for_by_events() {
        // λ passes the first scan with 5/16 > 1/4; pruning node 1 (1/16 ≤ 1/16)
        // drops λ to 1/4, which the second scan removes.
        let t = ClopenTree::from_leaves(
            4,
            ["0000", "0001", "0010", "0011", "1000"].iter().map(|s| b(s)),
        )
        .unwrap();
        let Err(Error::EmptyAfterPruning(report)) = prune(&t, &d("1/2")) else {
            panic!("expected the cascade to empty the tree");
        };
        assert_eq!(report.events, vec![b("1"), b("")]);
        assert_eq!(report.pruned, vec![b("")]);
        // lost mass 5/16 exceeds rho over the maximal list (1/4) but not over events
        assert_eq!(report.event_threshold_sum(), d("5/16"));
        assert!(report.mass_bound_holds());
    }

    #[test]
    fn pruned_list_incomparable_and_output_inside_input() {
        let t = ClopenTree::from_leaf_indices(5, [0, 1, 2, 3, 4, 5, 6, 7, 9, 17, 18, 30]).unwrap();
        for eps in ["1/2", "1/4", "1/8"] {
            let eps = d(eps);
            let Ok((s, report)) = prune(&t, &eps) else { continue };
            for (i, x) in report.pruned.iter().enumerate() {
                for y in &report.pruned[i + 1..] {
                    assert!(!x.comparable(y));
                }
            }
            assert!(report.mass_bound_holds());
            assert!(threshold_property_holds(&s, &eps));
            assert!(s.is_subset_of(&t));
            assert!(s.measure() > &t.measure() - &eps);
        }
    }

    #[test]
    fn fixpoint() {
        let t = ClopenTree::from_leaf_indices(6, (0..64).filter(|i| i % 3 != 0 || i % 7 == 0))
            .unwrap();
        for eps in ["1/2", "1/4", "1/8"] {
            let eps = d(eps);
            let (s, _) = prune(&t, &eps).unwrap();
            let (again, report) = prune(&s, &eps).unwrap();
            assert_eq!(again, s);
            assert!(report.events.is_empty());
        }
    }
}
