//! Conditions `(F, T)` over an ambient tree `T̂`, bounded-use tree functionals,
//! and the split / constant dichotomy.
//!
//! A condition pairs a finite tree `F` shaped like `2^{<n}` with a clopen
//! reservoir `T`. Every leaf `σ` of `F` must keep mass above
//! `3/4 · 2^-|σ|` in `W = T ∩ T̂`.
//!
//! Functionals read a finite tree `E` through an [`Oracle`]. A query is
//! answered `In` when the string is a node of `E`, `Out` when it leaves `E`
//! at an internal node, and is unresolved when it strictly extends a leaf of
//! `E`. Unresolved queries, queries at or beyond the use bound, and trees with
//! `‖E‖` below the use bound make the computation undefined. Outputs are
//! therefore stable under end-extension.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitstring::BitString;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::finite::FiniteTree;
use crate::tree::ClopenTree;

/// Largest number of candidate extensions a search will enumerate.
pub const SEARCH_LIMIT: u128 = 1 << 18;

/// `1 − 2^-2`.
pub fn leaf_threshold() -> Dyadic {
    Dyadic::new(3, 2)
}

/// `1 − 2^-1`.
pub fn coarse_threshold() -> Dyadic {
    Dyadic::new(1, 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Condition {
    pub frontier: FiniteTree,
    pub reservoir: ClopenTree,
    pub ambient: ClopenTree,
}

impl Condition {
    pub fn new(frontier: FiniteTree, reservoir: ClopenTree, ambient: ClopenTree) -> Self {
        Condition {
            frontier,
            reservoir,
            ambient,
        }
    }

    /// `({λ}, T, T̂)`.
    pub fn initial(reservoir: ClopenTree, ambient: ClopenTree) -> Self {
        Condition::new(FiniteTree::root(), reservoir, ambient)
    }

    /// `T ∩ T̂`.
    pub fn working_tree(&self) -> Result<ClopenTree> {
        self.reservoir.intersect(&self.ambient)
    }

    pub fn is_valid(&self) -> bool {
        is_condition(&self.frontier, &self.reservoir, &self.ambient)
    }

    fn require_valid(&self) -> Result<ClopenTree> {
        if self.frontier.binary_shape().is_none() {
            return Err(Error::InvalidCondition(format!(
                "frontier {:?} is not shaped like 2^<n",
                self.frontier
            )));
        }
        let w = self.working_tree()?;
        let thr = leaf_threshold();
        if let Some(leaf) = self.frontier.leaves().find(|s| !dense_at(&w, s, &thr)) {
            return Err(Error::InvalidCondition(format!(
                "leaf {leaf} has mass {} not above 3/4 · 2^-{}",
                w.mass(&leaf),
                leaf.len()
            )));
        }
        Ok(w)
    }
}

/// `μ([T_σ]) > thr · 2^-|σ|`.
pub fn dense_at(tree: &ClopenTree, sigma: &BitString, threshold: &Dyadic) -> bool {
    tree.mass(sigma) > threshold.mul_pow2(-i64::from(sigma.len()))
}

pub fn is_condition(frontier: &FiniteTree, reservoir: &ClopenTree, ambient: &ClopenTree) -> bool {
    is_condition_with(frontier, reservoir, ambient, &leaf_threshold())
}

pub fn is_condition_with(
    frontier: &FiniteTree,
    reservoir: &ClopenTree,
    ambient: &ClopenTree,
    threshold: &Dyadic,
) -> bool {
    let Ok(w) = reservoir.intersect(ambient) else {
        return false;
    };
    frontier.binary_shape().is_some() && frontier.leaves().all(|s| dense_at(&w, &s, threshold))
}

/// Length-lexicographically least `τ ⊒ σ` with `μ([T_τ]) > thr · 2^-|τ|`.
pub fn density_extend(tree: &ClopenTree, sigma: &BitString, threshold: &Dyadic) -> Result<BitString> {
    if *threshold >= Dyadic::one() {
        return Err(Error::InvalidArgument(format!(
            "density threshold {threshold} is not below 1"
        )));
    }
    if !tree.contains_node(sigma) {
        return Err(Error::EmptyCylinder);
    }
    let depth = tree.depth();
    if sigma.len() >= depth {
        return Ok(*sigma);
    }
    for len in sigma.len()..=depth {
        let bound = threshold.floor_scaled_i128(depth - len);
        if let Some(tau) = sigma
            .extensions_of_length(len)
            .find(|t| i128::from(tree.count_below(t)) > bound)
        {
            return Ok(tau);
        }
    }
    unreachable!("a leaf below σ has relative density 1")
}

/// Splits every leaf of `F`: `τ(σ,i) = densityExtend(W, σi, 3/4)`.
pub fn splitting_extend(c: &Condition) -> Result<Condition> {
    let w = c.require_valid()?;
    let thr = leaf_threshold();
    let mut tips = Vec::new();
    for leaf in c.frontier.leaves() {
        for bit in [false, true] {
            let tau = density_extend(&w, &leaf.child(bit), &thr).map_err(|_| {
                Error::InvalidCondition(format!("child {} of leaf {leaf} is empty", leaf.child(bit)))
            })?;
            tips.push(tau);
        }
    }
    Ok(Condition {
        frontier: c.frontier.union(&FiniteTree::closure(tips)),
        reservoir: c.reservoir.clone(),
        ambient: c.ambient.clone(),
    })
}

/// Read access to a finite tree below a use bound.
pub struct Oracle<'a> {
    tree: &'a FiniteTree,
    use_bound: u32,
}

impl<'a> Oracle<'a> {
    /// `Some(membership)`, or `None` when the answer is not determined by
    /// the tree or lies at or beyond the use bound.
    pub fn ask(&self, rho: &BitString) -> Option<bool> {
        if rho.len() >= self.use_bound {
            return None;
        }
        if self.tree.contains(rho) {
            return Some(true);
        }
        let deepest = rho.prefixes().take_while(|p| self.tree.contains(p)).last();
        match deepest {
            Some(p) if self.tree.is_leaf(&p) => None,
            _ => Some(false),
        }
    }
}

/// A deterministic evaluator with a finite input domain and per-input use.
pub trait TreeFunctional: fmt::Debug + Send + Sync {
    fn id(&self) -> String;

    /// Inputs `0..inputs()` are in the domain.
    fn inputs(&self) -> usize;

    /// Queries on input `x` have length below this bound.
    fn use_bound(&self, x: usize) -> u32;

    fn compute(&self, oracle: &Oracle<'_>, x: usize) -> Option<bool>;
}

/// `Φ(E; x)`, `None` when undefined.
pub fn evaluate(phi: &dyn TreeFunctional, e: &FiniteTree, x: usize) -> Option<bool> {
    if x >= phi.inputs() {
        return None;
    }
    let u = phi.use_bound(x);
    if e.norm() < u {
        return None;
    }
    phi.compute(&Oracle { tree: e, use_bound: u }, x)
}

#[derive(Clone, Debug)]
pub struct ConstantFunctional {
    id: String,
    outputs: Vec<Option<bool>>,
}

impl ConstantFunctional {
    pub fn new(id: impl Into<String>, outputs: Vec<Option<bool>>) -> Self {
        ConstantFunctional {
            id: id.into(),
            outputs,
        }
    }
}

impl TreeFunctional for ConstantFunctional {
    fn id(&self) -> String {
        self.id.clone()
    }
    fn inputs(&self) -> usize {
        self.outputs.len()
    }
    fn use_bound(&self, _x: usize) -> u32 {
        1
    }
    fn compute(&self, _oracle: &Oracle<'_>, x: usize) -> Option<bool> {
        self.outputs[x]
    }
}

/// `Φ(E; x) = [b^{x+1} ∈ E]`, use `x + 2`.
#[derive(Clone, Debug)]
pub struct MembershipProbe {
    pub bit: bool,
    pub inputs: usize,
}

impl TreeFunctional for MembershipProbe {
    fn id(&self) -> String {
        format!("probe{}", u8::from(self.bit))
    }
    fn inputs(&self) -> usize {
        self.inputs
    }
    fn use_bound(&self, x: usize) -> u32 {
        x as u32 + 2
    }
    fn compute(&self, oracle: &Oracle<'_>, x: usize) -> Option<bool> {
        oracle.ask(&BitString::repeat(self.bit, x as u32 + 1))
    }
}

/// `Φ(E; x) = |E ∩ 2^x| mod 2`, use `x + 1`.
#[derive(Clone, Debug)]
pub struct LevelParity {
    pub inputs: usize,
}

impl TreeFunctional for LevelParity {
    fn id(&self) -> String {
        "parity".into()
    }
    fn inputs(&self) -> usize {
        self.inputs
    }
    fn use_bound(&self, x: usize) -> u32 {
        x as u32 + 1
    }
    fn compute(&self, oracle: &Oracle<'_>, x: usize) -> Option<bool> {
        let mut odd = false;
        for rho in BitString::all_of_length(x as u32) {
            odd ^= oracle.ask(&rho)?;
        }
        Some(odd)
    }
}

/// Strict majority of memberships over a fixed query set, on every input.
#[derive(Clone, Debug)]
pub struct MajorityVote {
    pub queries: Vec<BitString>,
    pub inputs: usize,
}

impl TreeFunctional for MajorityVote {
    fn id(&self) -> String {
        "majority".into()
    }
    fn inputs(&self) -> usize {
        self.inputs
    }
    fn use_bound(&self, _x: usize) -> u32 {
        self.queries.iter().map(|q| q.len() + 1).max().unwrap_or(1)
    }
    fn compute(&self, oracle: &Oracle<'_>, _x: usize) -> Option<bool> {
        let mut yes = 0;
        for q in &self.queries {
            yes += usize::from(oracle.ask(q)?);
        }
        Some(2 * yes > self.queries.len())
    }
}

pub const DECISION_TABLE_FORMAT: &str = "decision-table/v1";

/// A user-supplied functional: `table[x][mask]` where bit `i` of `mask` is the
/// answer to `queries[i]`; `null` entries are undefined.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionTable {
    pub format: String,
    pub id: String,
    pub queries: Vec<BitString>,
    pub table: Vec<Vec<Option<bool>>>,
}

impl DecisionTable {
    pub fn new(id: impl Into<String>, queries: Vec<BitString>, table: Vec<Vec<Option<bool>>>) -> Result<Self> {
        let t = DecisionTable {
            format: DECISION_TABLE_FORMAT.to_string(),
            id: id.into(),
            queries,
            table,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != DECISION_TABLE_FORMAT {
            return Err(Error::UnknownVersion(self.format.clone()));
        }
        if self.queries.len() > 16 {
            return Err(Error::InvalidArgument("at most 16 queries per table".into()));
        }
        let width = 1usize << self.queries.len();
        if let Some(row) = self.table.iter().position(|r| r.len() != width) {
            return Err(Error::InvalidArgument(format!(
                "row {row} needs {width} entries"
            )));
        }
        Ok(())
    }
}

impl TreeFunctional for DecisionTable {
    fn id(&self) -> String {
        self.id.clone()
    }
    fn inputs(&self) -> usize {
        self.table.len()
    }
    fn use_bound(&self, _x: usize) -> u32 {
        self.queries.iter().map(|q| q.len() + 1).max().unwrap_or(1)
    }
    fn compute(&self, oracle: &Oracle<'_>, x: usize) -> Option<bool> {
        let mut mask = 0usize;
        for (i, q) in self.queries.iter().enumerate() {
            if oracle.ask(q)? {
                mask |= 1 << i;
            }
        }
        self.table[x][mask]
    }
}

pub const BUILTIN_FUNCTIONALS: &[&str] =
    &["const0", "const1", "undef", "probe0", "probe1", "parity", "majority"];

/// Built-in functional by identifier, on inputs `0..inputs`.
pub fn lookup(id: &str, inputs: usize) -> Result<Box<dyn TreeFunctional>> {
    Ok(match id {
        "const0" => Box::new(ConstantFunctional::new(id, vec![Some(false); inputs])),
        "const1" => Box::new(ConstantFunctional::new(id, vec![Some(true); inputs])),
        "undef" => Box::new(ConstantFunctional::new(id, vec![None; inputs])),
        "probe0" => Box::new(MembershipProbe { bit: false, inputs }),
        "probe1" => Box::new(MembershipProbe { bit: true, inputs }),
        "parity" => Box::new(LevelParity { inputs }),
        "majority" => Box::new(MajorityVote {
            queries: BitString::all_of_length(2).collect(),
            inputs,
        }),
        _ => return Err(Error::UnknownFunctional(id.to_string())),
    })
}

fn count_rooted(w: &ClopenTree, root: BitString, lmax: u32) -> u128 {
    if root.len() + 1 >= lmax {
        return 1;
    }
    [false, true]
        .into_iter()
        .map(|b| root.child(b))
        .filter(|c| w.contains_node(c))
        .fold(1u128, |acc, c| acc.saturating_mul(1 + count_rooted(w, c, lmax)))
}

/// Finite subtrees of `W` rooted at `root` with every node shorter than `lmax`.
fn rooted_subtrees(w: &ClopenTree, root: BitString, lmax: u32) -> Vec<Vec<BitString>> {
    let mut out = vec![vec![root]];
    if root.len() + 1 >= lmax {
        return out;
    }
    for bit in [false, true] {
        let c = root.child(bit);
        if !w.contains_node(&c) {
            continue;
        }
        let subs = rooted_subtrees(w, c, lmax);
        let mut next = Vec::with_capacity(out.len() * (subs.len() + 1));
        for base in &out {
            next.push(base.clone());
            for sub in &subs {
                let mut t = base.clone();
                t.extend_from_slice(sub);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Every finite `D ⊆ W` end-extending `F` with `‖D‖ ≤ lmax`, ordered by node
/// count and then by node list in length-lexicographic order.
pub fn end_extensions(frontier: &FiniteTree, w: &ClopenTree, lmax: u32) -> Result<Vec<FiniteTree>> {
    if frontier.is_empty() || frontier.norm() > lmax || frontier.nodes().any(|s| !w.contains_node(s)) {
        return Ok(Vec::new());
    }
    let leaves: Vec<BitString> = frontier.leaves().collect();
    let total = leaves
        .iter()
        .fold(1u128, |acc, l| acc.saturating_mul(count_rooted(w, *l, lmax)));
    if total > SEARCH_LIMIT {
        return Err(Error::SearchSpaceTooLarge {
            count: total,
            limit: SEARCH_LIMIT,
        });
    }
    let mut all: Vec<Vec<BitString>> = vec![frontier.nodes().copied().collect()];
    for leaf in leaves {
        let subs = rooted_subtrees(w, leaf, lmax);
        let mut next = Vec::with_capacity(all.len() * subs.len());
        for base in &all {
            for sub in &subs {
                let mut t = base.clone();
                t.extend_from_slice(&sub[1..]);
                next.push(t);
            }
        }
        all = next;
    }
    for t in &mut all {
        t.sort_unstable();
    }
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(all
        .into_iter()
        .map(FiniteTree::closure)
        .collect())
}

/// Branching nodes strictly above `leaf`.
fn branchings(tree: &FiniteTree, leaf: &BitString) -> u32 {
    (0..leaf.len())
        .filter(|&l| tree.child_count(&leaf.prefix(l)) == 2)
        .count() as u32
}

/// End-extends `D` inside `W` until every leaf sits below the same number of
/// branchings. Short leaves run down to the least full cylinder below them and
/// grow a complete binary tree of the missing height there.
pub fn complete_shape(d: &FiniteTree, w: &ClopenTree) -> FiniteTree {
    if d.len() <= 1 {
        return d.clone();
    }
    let leaves: Vec<BitString> = d.leaves().collect();
    let counts: Vec<u32> = leaves.iter().map(|l| branchings(d, l)).collect();
    let target = counts.iter().copied().max().unwrap_or(0).max(1);
    let mut out = d.clone();
    for (leaf, c) in leaves.iter().zip(counts) {
        if c == target {
            continue;
        }
        let h = target - c;
        let top = leaf.len().max(w.depth());
        let base = (leaf.len()..=top)
            .flat_map(|len| leaf.extensions_of_length(len))
            .find(|t| w.is_full_below(t))
            .expect("nodes of W reach a full cylinder by the depth");
        for rho in BitString::all_of_length(h) {
            out.insert_with_prefixes(base.concat(&rho));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SplitWitness {
    /// First searched tree on which `Φ` disagrees with `X`.
    pub found: FiniteTree,
    /// `found` completed to a `2^{<l}` shape.
    pub completed: FiniteTree,
    /// Leaves of `completed` pushed to density above 3/4.
    pub extension: FiniteTree,
    pub n: usize,
}

/// Least `(D, n)` with `Φ(D; n)` defined and different from `X(n)`.
pub fn e_split_search(
    c: &Condition,
    phi: &dyn TreeFunctional,
    target: &[bool],
    lmax: u32,
) -> Result<Option<SplitWitness>> {
    let w = c.require_valid()?;
    let inputs = phi.inputs().min(target.len());
    for d in end_extensions(&c.frontier, &w, lmax)? {
        let hit = (0..inputs).find(|&n| evaluate(phi, &d, n).is_some_and(|v| v != target[n]));
        if let Some(n) = hit {
            let completed = complete_shape(&d, &w);
            let thr = leaf_threshold();
            let tips = completed
                .leaves()
                .map(|l| density_extend(&w, &l, &thr))
                .collect::<Result<Vec<_>>>()?;
            let extension = completed.union(&FiniteTree::closure(tips));
            return Ok(Some(SplitWitness {
                found: d,
                completed,
                extension,
                n,
            }));
        }
    }
    Ok(None)
}

/// A pair of end-extensions with different defined outputs at `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisagreeingPair {
    pub first: FiniteTree,
    pub second: FiniteTree,
    pub x: usize,
}

/// Least `x` and first trees in enumeration order witnessing disagreement.
pub fn find_disagreement(
    s: &ClopenTree,
    frontier: &FiniteTree,
    phi: &dyn TreeFunctional,
    lmax: u32,
) -> Result<Option<DisagreeingPair>> {
    let ds = end_extensions(frontier, s, lmax)?;
    for x in 0..phi.inputs() {
        let mut seen: [Option<&FiniteTree>; 2] = [None, None];
        for d in &ds {
            if let Some(v) = evaluate(phi, d, x) {
                seen[usize::from(v)].get_or_insert(d);
            }
        }
        if let [Some(a), Some(b)] = seen {
            return Ok(Some(DisagreeingPair {
                first: a.clone(),
                second: b.clone(),
                x,
            }));
        }
    }
    Ok(None)
}

/// No two end-extensions of `F` in `S` with `‖E‖ ≤ lmax` give different
/// defined outputs.
pub fn u_class_check(s: &ClopenTree, frontier: &FiniteTree, phi: &dyn TreeFunctional, lmax: u32) -> Result<bool> {
    Ok(find_disagreement(s, frontier, phi, lmax)?.is_none())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "camelCase")]
pub enum StepResult {
    #[serde(rename_all = "camelCase")]
    Split { extension: FiniteTree, n: usize },
    #[serde(rename_all = "camelCase")]
    Constant { tree: ClopenTree, proof_depth: u32 },
}

/// Split when some end-extension diagonalizes against `X`; otherwise the
/// outputs are oracle-independent up to `lmax` and the step is constant.
pub fn forcing_step(
    c: &Condition,
    phi: &dyn TreeFunctional,
    target: &[bool],
    lmax: u32,
) -> Result<StepResult> {
    let w = c.require_valid()?;
    if target.len() < phi.inputs() {
        return Err(Error::TargetTooShort {
            len: target.len(),
            inputs: phi.inputs(),
        });
    }
    if let Some(hit) = e_split_search(c, phi, target, lmax)? {
        return Ok(StepResult::Split {
            extension: hit.extension,
            n: hit.n,
        });
    }
    debug_assert!(u_class_check(&w, &c.frontier, phi, lmax)?);
    Ok(StepResult::Constant {
        tree: w,
        proof_depth: lmax,
    })
}
