//! Perfect-subtree extraction with a measure guarantee.
//!
//! The pipeline prunes the input with `ε/2`, derives a growth schedule `g` of
//! splitting levels and a density bound `δ`, and selects a finite tree `U` from
//! the family of trees that stay inside the pruned tree, keep more than
//! `δ·2^n` nodes on every level `n`, and split twice between consecutive
//! schedule levels. The selected `U` is the full set of live nodes up to the
//! deepest schedule level that fits, which is the leftmost maximal member of
//! the family.

use serde::{Deserialize, Serialize};

use crate::bitstring::BitString;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::finite::FiniteTree;
use crate::format::tree_digest;
use crate::kucera::{prune, rho_for_length, PruneReport};
use crate::tree::{mass_bound, ClopenTree};

/// Splitting levels `g(0) = 0 < g(1) < …`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GrowthSchedule {
    pub epsilon: Dyadic,
    pub values: Vec<u32>,
    /// Set when generation stopped because the next level would pass `dmax`.
    pub truncated: bool,
}

impl GrowthSchedule {
    pub fn get(&self, i: usize) -> Option<u32> {
        self.values.get(i).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Least `l > from` with `2^-l < r`, where `r = min{ρ_ε(σ) : |σ| ≤ from}`.
pub fn next_schedule_level(epsilon: &Dyadic, from: u32) -> Result<u32> {
    // ρ_ε decreases with length, so the minimum sits at length `from`
    let r = rho_for_length(epsilon, from)?;
    let mut l = from + 1;
    while Dyadic::pow2_neg(l) >= r {
        l += 1;
    }
    Ok(l)
}

/// First `count` schedule values, stopping early (and flagging it) when the
/// next value would exceed `dmax`.
pub fn growth_schedule(epsilon: &Dyadic, count: usize, dmax: u32) -> Result<GrowthSchedule> {
    if count == 0 {
        return Err(Error::InvalidArgument("schedule count must be at least 1".into()));
    }
    let mut values = vec![0u32];
    let mut truncated = false;
    while values.len() < count {
        let next = next_schedule_level(epsilon, *values.last().unwrap())?;
        if next > dmax {
            truncated = true;
            break;
        }
        values.push(next);
    }
    Ok(GrowthSchedule {
        epsilon: epsilon.clone(),
        values,
        truncated,
    })
}

/// `δ = μS − ε/4`, which lies strictly between `μS − ε/2` and `μS`.
pub fn choose_delta(measure: &Dyadic, epsilon: &Dyadic) -> Result<Dyadic> {
    if !epsilon.is_positive() {
        return Err(Error::InvalidEpsilon { below_one: false });
    }
    let quarter = epsilon.mul_pow2(-2);
    if measure <= &quarter {
        return Err(Error::MeasureTooSmall {
            measure: measure.to_string(),
            bound: quarter.to_string(),
        });
    }
    Ok(measure - &quarter)
}

/// Outcome of checking family membership, one flag per clause.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FamilyCheck {
    /// Every node of `U` is a node of `S`.
    pub subset: bool,
    /// `|U ∩ 2^n| > δ·2^n` for all `n < ‖U‖`.
    pub density: bool,
    /// Nodes on each schedule level `g(i)` have two extensions on `g(i+1)`
    /// whenever `g(i+1) < ‖U‖`.
    pub splitting: bool,
}

impl FamilyCheck {
    pub fn holds(&self) -> bool {
        self.subset && self.density && self.splitting
    }
}

pub fn family_check(
    u: &FiniteTree,
    s: &ClopenTree,
    delta: &Dyadic,
    schedule: &GrowthSchedule,
) -> FamilyCheck {
    let norm = u.norm();
    let subset = u.nodes().all(|x| s.contains_node(x));
    let density = (0..norm).all(|n| {
        let count = u.level_count(n) as u64;
        Dyadic::from_count(count, 0) > delta.mul_pow2(i64::from(n))
    });
    let splitting = schedule.values.windows(2).all(|w| {
        let (lo, hi) = (w[0], w[1]);
        if hi >= norm {
            return true;
        }
        u.level(lo).all(|sigma| {
            u.level(hi)
                .filter(|tau| sigma.is_prefix_of(tau))
                .take(2)
                .count()
                == 2
        })
    });
    FamilyCheck {
        subset,
        density,
        splitting,
    }
}

/// Membership of `U` in the family determined by `S`, `δ` and `g`.
pub fn in_family(
    u: &FiniteTree,
    s: &ClopenTree,
    delta: &Dyadic,
    schedule: &GrowthSchedule,
) -> bool {
    family_check(u, s, delta, schedule).holds()
}

/// `U_n = {σ ∈ S : |σ| ≤ g(n+1), μ([S_σ]) > ρ_ε(σ)}`.
pub fn build_un(
    s: &ClopenTree,
    epsilon: &Dyadic,
    schedule: &GrowthSchedule,
    n: usize,
) -> Result<FiniteTree> {
    let top = schedule.get(n + 1).ok_or_else(|| {
        Error::InvalidArgument(format!("schedule has no entry g({})", n + 1))
    })?;
    if top > s.depth() {
        return Err(Error::ScheduleExceedsDepth {
            level: top,
            depth: s.depth(),
        });
    }
    let counts = s.node_counts();
    let mut nodes = Vec::new();
    for len in 0..=top {
        let bound = mass_bound(&rho_for_length(epsilon, len)?, s.depth());
        for (idx, &c) in counts.level(len).iter().enumerate() {
            if i128::from(c) > bound {
                nodes.push(BitString::from_index(idx as u64, len));
            }
        }
    }
    FiniteTree::new(nodes)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtractionParams {
    pub epsilon: Dyadic,
    /// Pruning parameter, `ε/2`.
    pub prune_epsilon: Dyadic,
    pub delta: Dyadic,
    pub schedule: GrowthSchedule,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtractionChecks {
    pub family: FamilyCheck,
    /// `|U ∩ 2^h| · 2^-h ≥ δ` at `h = ‖U‖ − 1`.
    pub final_level_mass: bool,
    /// `μ` of the output exceeds `μ(T̂) − ε`.
    pub measure_guarantee: bool,
    pub level_counts: Vec<u64>,
}

impl ExtractionChecks {
    pub fn holds(&self) -> bool {
        self.family.holds() && self.final_level_mass && self.measure_guarantee
    }
}

/// Everything needed to re-verify an extraction against its input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtractionCertificate {
    pub params: ExtractionParams,
    pub input_digest: String,
    pub input_measure: Dyadic,
    /// Selection rule standing in for a basis-theorem path choice.
    pub selection: String,
    /// Index `n` of the selected `U_n`.
    pub level_index: usize,
    pub output: FiniteTree,
    pub output_measure: Dyadic,
    pub checks: ExtractionChecks,
}

pub const SELECTION_RULE: &str = "leftmost-maximal";

#[derive(Clone, Debug)]
pub struct Extraction {
    pub pruned: ClopenTree,
    pub report: PruneReport,
    pub certificate: ExtractionCertificate,
}

impl Extraction {
    pub fn output(&self) -> &FiniteTree {
        &self.certificate.output
    }
}

/// Clopen tree whose leaves are the deepest level of `U`.
pub fn frontier_tree(u: &FiniteTree) -> Result<ClopenTree> {
    let h = u.norm().saturating_sub(1);
    ClopenTree::from_leaves(h, u.level(h).copied())
}

fn checks_for(
    input: &ClopenTree,
    s: &ClopenTree,
    params: &ExtractionParams,
    u: &FiniteTree,
) -> Result<ExtractionChecks> {
    let family = family_check(u, s, &params.delta, &params.schedule);
    let h = u.norm().saturating_sub(1);
    let out_measure = frontier_tree(u)?.measure();
    Ok(ExtractionChecks {
        family,
        final_level_mass: !u.is_empty() && out_measure >= params.delta,
        measure_guarantee: out_measure > &input.measure() - &params.epsilon,
        level_counts: (0..=h).map(|n| u.level_count(n) as u64).collect(),
    })
}

/// Runs the whole pipeline on `input` with total loss budget `ε`.
///
/// The schedule is generated from the largest power of two not above `ε`
/// (for `ε = 1/2` that is `[0, 3, 9]`). With that choice every schedule gap
/// satisfies `2^-g(i+1) ≤ ρ_{ε/2}` at level `g(i)`, so the threshold property
/// of the pruned tree forces the required splits.
pub fn extract_perfect(input: &ClopenTree, epsilon: &Dyadic) -> Result<Extraction> {
    if !epsilon.is_positive() {
        return Err(Error::InvalidEpsilon { below_one: false });
    }
    let mu = input.measure();
    if mu <= *epsilon {
        return Err(Error::MeasureTooSmall {
            measure: mu.to_string(),
            bound: epsilon.to_string(),
        });
    }
    let prune_epsilon = epsilon.half();
    let (s, report) = prune(input, &prune_epsilon)?;
    let schedule_eps = epsilon.floor_pow2();
    let schedule = growth_schedule(&schedule_eps, s.depth() as usize + 2, s.depth())?;
    if schedule.len() < 2 {
        return Err(Error::ScheduleTooCoarse {
            level: next_schedule_level(&schedule_eps, 0)?,
            depth: s.depth(),
        });
    }
    let delta = choose_delta(&s.measure(), epsilon)?;
    let level_index = schedule.len() - 2;
    let u = build_un(&s, &prune_epsilon, &schedule, level_index)?;
    let params = ExtractionParams {
        epsilon: epsilon.clone(),
        prune_epsilon,
        delta,
        schedule,
    };
    let checks = checks_for(input, &s, &params, &u)?;
    let output_measure = frontier_tree(&u)?.measure();
    let certificate = ExtractionCertificate {
        params,
        input_digest: tree_digest(input),
        input_measure: mu,
        selection: SELECTION_RULE.to_string(),
        level_index,
        output: u,
        output_measure,
        checks,
    };
    Ok(Extraction {
        pruned: s,
        report,
        certificate,
    })
}

impl ExtractionCertificate {
    /// Re-derives every field from `input` and compares.
    pub fn verify(&self, input: &ClopenTree) -> bool {
        match extract_perfect(input, &self.params.epsilon) {
            Ok(fresh) => {
                let c = &fresh.certificate;
                c == self && self.checks.holds()
            }
            Err(_) => false,
        }
    }

    /// Recomputes only the checks against a supplied pruned tree.
    pub fn recheck(&self, input: &ClopenTree, pruned: &ClopenTree) -> Result<ExtractionChecks> {
        checks_for(input, pruned, &self.params, &self.output)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn schedule_examples() {
        let g = growth_schedule(&d("1/2"), 3, 20).unwrap();
        assert_eq!(g.values, vec![0, 3, 9]);
        assert!(!g.truncated);
        let g = growth_schedule(&d("1/4"), 3, 20).unwrap();
        assert_eq!(g.values, vec![0, 4, 12]);
        let g = growth_schedule(&d("3/8"), 1, 0).unwrap();
        assert_eq!(g.values, vec![0]);
        let g = growth_schedule(&d("1/2"), 5, 9).unwrap();
        assert_eq!(g.values, vec![0, 3, 9]);
        assert!(g.truncated);
    }

    #[test]
    fn schedule_matches_recurrence_by_hand() {
        // r(n) = min over |σ| ≤ g(n) of ρ, brute forced over all strings
        for eps in ["1/2", "1/4", "3/8", "5/16"] {
            let eps = d(eps);
            let g = growth_schedule(&eps, 4, 40).unwrap();
            for w in g.values.windows(2) {
                let r = BitString::all_up_to(w[0].min(10))
                    .map(|s| crate::kucera::rho(&eps, &s).unwrap())
                    .min()
                    .unwrap();
                let r = if w[0] > 10 {
                    crate::kucera::rho_for_length(&eps, w[0]).unwrap()
                } else {
                    r
                };
                assert!(Dyadic::pow2_neg(w[1]) < r);
                assert!(w[1] == w[0] + 1 || Dyadic::pow2_neg(w[1] - 1) >= r);
            }
        }
    }

    #[test]
    fn delta_examples() {
        let delta = choose_delta(&d("3/4"), &d("1/4")).unwrap();
        assert_eq!(delta, d("11/16"));
        assert!(delta > d("5/8") && delta < d("3/4"));
        assert_eq!(choose_delta(&d("1"), &d("1/2")).unwrap(), d("7/8"));
        assert!(matches!(
            choose_delta(&d("1/8"), &d("1/2")),
            Err(Error::MeasureTooSmall { .. })
        ));
    }

    #[test]
    fn family_examples() {
        let s = ClopenTree::full(4).unwrap();
        let g = growth_schedule(&d("1/2"), 3, 20).unwrap();
        assert!(in_family(&FiniteTree::full(3), &s, &d("7/8"), &g));

        // λ reaches level 3 through a single node while ‖U‖ = 5 > g(1)
        let chain = FiniteTree::closure([b("0000")]);
        let check = family_check(&chain, &s, &Dyadic::zero(), &g);
        assert!(!check.splitting);

        // one node on level 1 against δ = 1/2
        let thin = FiniteTree::closure([b("0")]);
        let check = family_check(&thin, &s, &d("1/2"), &g);
        assert!(!check.density);

        let outside = ClopenTree::from_leaves(2, [b("00")]).unwrap();
        assert!(!family_check(&FiniteTree::full(1), &outside, &Dyadic::zero(), &g).subset);
    }

    #[test]
    fn build_un_examples() {
        let s = ClopenTree::full(4).unwrap();
        let g = growth_schedule(&d("1/2"), 3, 20).unwrap();
        assert_eq!(build_un(&s, &d("1/2"), &g, 0).unwrap(), FiniteTree::full(3));
        assert!(matches!(
            build_un(&s, &d("1/2"), &g, 1),
            Err(Error::ScheduleExceedsDepth { level: 9, depth: 4 })
        ));

        // a cylinder at or below its threshold drops out; brute-force filter
        let t = ClopenTree::from_leaf_indices(4, (0..16).filter(|&i| i != 9 && i != 10 && i != 11))
            .unwrap();
        let eps = d("1/2");
        let u = build_un(&t, &eps, &g, 0).unwrap();
        for x in BitString::all_up_to(3) {
            let expect = t.mass(&x) > crate::kucera::rho(&eps, &x).unwrap();
            assert_eq!(u.contains(&x), expect, "{x}");
        }
        assert!(!u.contains(&b("101")));
    }

    #[test]
    fn extract_full_depth_nine() {
        let t = ClopenTree::full(9).unwrap();
        let ex = extract_perfect(&t, &d("1/2")).unwrap();
        let c = &ex.certificate;
        assert_eq!(c.params.schedule.values, vec![0, 3, 9]);
        assert_eq!(c.output, FiniteTree::full(9));
        assert_eq!(c.params.delta, d("7/8"));
        assert!(c.checks.holds());
        assert!(c.verify(&t));
    }

    #[test]
    fn extract_rejects_small_measure() {
        let t = ClopenTree::from_leaf_indices(4, [0]).unwrap();
        assert!(matches!(
            extract_perfect(&t, &d("1/2")),
            Err(Error::MeasureTooSmall { .. })
        ));
    }

    #[test]
    fn extract_too_coarse() {
        let t = ClopenTree::full(2).unwrap();
        assert!(matches!(
            extract_perfect(&t, &d("1/2")),
            Err(Error::ScheduleTooCoarse { level: 3, depth: 2 })
        ));
    }

    #[test]
    fn extract_non_power_of_two_epsilon() {
        let t = ClopenTree::from_leaf_indices(9, (0..512).filter(|i| i % 11 != 3)).unwrap();
        let ex = extract_perfect(&t, &d("3/4")).unwrap();
        assert!(ex.certificate.checks.holds());
    }

    #[test]
    fn tampered_certificate_fails() {
        let t = ClopenTree::full(9).unwrap();
        let mut c = extract_perfect(&t, &d("1/2")).unwrap().certificate;
        c.output_measure = d("1/2");
        assert!(!c.verify(&t));
    }
}
