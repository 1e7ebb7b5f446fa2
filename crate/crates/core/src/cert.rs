//! Self-checking result certificates.
//!
//! A certificate carries the inputs of a run, its result, and a checklist.
//! Verification recomputes the checklist from the certificate alone, so a
//! perturbed field shows up as a failing or mismatched entry.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::adversary::{adversarial_tree, decode_halting, in_c, HaltingTable};
use crate::bitstring::BitString;
use crate::density::{density_witness_greedy, density_witness_maximization, is_density_witness, MaximizationWitness};
use crate::dyadic::Dyadic;
use crate::embed::{tt1_homogeneous, Coloring, Homogeneous};
use crate::error::{Error, Result};
use crate::extract::ExtractionCertificate;
use crate::finite::FiniteTree;
use crate::forcing::{
    evaluate, forcing_step, is_condition, lookup, splitting_extend, u_class_check, Condition,
    DecisionTable, StepResult, TreeFunctional,
};
use crate::format::{digest, to_canonical_text, tree_digest};
use crate::gen::{gen_random_positive_tree, GenSpec};
use crate::kucera::{prune, threshold_property_holds, PruneReport};
use crate::tree::ClopenTree;

pub const CERT_VERSION: &str = "cert/v1";
pub const CONDITION_FORMAT: &str = "condition/v1";
pub const COLORING_FORMAT: &str = "coloring/v1";

/// A functional named in a certificate or on the command line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum FunctionalSpec {
    Builtin { id: String, inputs: usize },
    Table { table: DecisionTable },
}

impl FunctionalSpec {
    pub fn instantiate(&self) -> Result<Box<dyn TreeFunctional>> {
        match self {
            FunctionalSpec::Builtin { id, inputs } => lookup(id, *inputs),
            FunctionalSpec::Table { table } => {
                table.validate()?;
                Ok(Box::new(table.clone()))
            }
        }
    }

    pub fn id(&self) -> String {
        match self {
            FunctionalSpec::Builtin { id, .. } => id.clone(),
            FunctionalSpec::Table { table } => table.id.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Payload {
    #[serde(rename_all = "camelCase")]
    Gen {
        spec: GenSpec,
        tree: ClopenTree,
        measure: Dyadic,
    },
    #[serde(rename_all = "camelCase")]
    Prune {
        input: ClopenTree,
        epsilon: Dyadic,
        /// `None` when pruning emptied the tree.
        output: Option<ClopenTree>,
        report: PruneReport,
    },
    #[serde(rename_all = "camelCase")]
    Extract {
        input: ClopenTree,
        extraction: ExtractionCertificate,
    },
    #[serde(rename_all = "camelCase")]
    Density {
        tree: ClopenTree,
        epsilon: Dyadic,
        delta: Dyadic,
        greedy: BitString,
        maximization: MaximizationWitness,
    },
    #[serde(rename_all = "camelCase")]
    AdversaryEncode {
        table: HaltingTable,
        depth: u32,
        tree: ClopenTree,
        leaf_count: u64,
        measure: Dyadic,
    },
    #[serde(rename_all = "camelCase")]
    AdversaryDecode {
        table: HaltingTable,
        sigma: BitString,
        count: usize,
        decoded: HaltingTable,
    },
    #[serde(rename_all = "camelCase")]
    ForceStep {
        condition: Condition,
        functional: FunctionalSpec,
        target: Vec<bool>,
        lmax: u32,
        result: StepResult,
    },
    #[serde(rename_all = "camelCase")]
    ForceSplit { condition: Condition, result: Condition },
    #[serde(rename_all = "camelCase")]
    Tt1 {
        coloring: Coloring,
        k: u32,
        result: Homogeneous,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub pass: bool,
}

fn entry(name: &str, pass: bool) -> CheckEntry {
    CheckEntry {
        name: name.to_string(),
        pass,
    }
}

fn text_digest<T: Serialize>(value: &T) -> String {
    digest(to_canonical_text(value).as_bytes())
}

pub fn bits_text(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

impl Payload {
    pub fn command(&self) -> &'static str {
        match self {
            Payload::Gen { .. } => "gen",
            Payload::Prune { .. } => "prune",
            Payload::Extract { .. } => "extract",
            Payload::Density { .. } => "density",
            Payload::AdversaryEncode { .. } => "adversary encode",
            Payload::AdversaryDecode { .. } => "adversary decode",
            Payload::ForceStep { .. } => "force step",
            Payload::ForceSplit { .. } => "force split",
            Payload::Tt1 { .. } => "tt1",
        }
    }

    pub fn input_digests(&self) -> BTreeMap<String, String> {
        let (name, d) = match self {
            Payload::Gen { spec, .. } => ("spec", text_digest(spec)),
            Payload::Prune { input, .. } | Payload::Extract { input, .. } => ("tree", tree_digest(input)),
            Payload::Density { tree, .. } => ("tree", tree_digest(tree)),
            Payload::AdversaryEncode { table, .. } | Payload::AdversaryDecode { table, .. } => {
                ("table", text_digest(table))
            }
            Payload::ForceStep { condition, .. } | Payload::ForceSplit { condition, .. } => {
                ("condition", text_digest(&ConditionFile::from(condition.clone())))
            }
            Payload::Tt1 { coloring, .. } => ("coloring", text_digest(&ColoringFile::from(coloring.clone()))),
        };
        BTreeMap::from([(name.to_string(), d)])
    }

    pub fn parameters(&self) -> BTreeMap<String, String> {
        let pairs: Vec<(&str, String)> = match self {
            Payload::Gen { spec, .. } => vec![
                ("depth", spec.depth.to_string()),
                ("seed", spec.seed.to_string()),
                ("target", spec.target.to_string()),
            ],
            Payload::Prune { epsilon, .. } => vec![("epsilon", epsilon.to_string())],
            Payload::Extract { extraction, .. } => vec![("epsilon", extraction.params.epsilon.to_string())],
            Payload::Density { epsilon, delta, .. } => {
                vec![("epsilon", epsilon.to_string()), ("delta", delta.to_string())]
            }
            Payload::AdversaryEncode { depth, .. } => vec![("depth", depth.to_string())],
            Payload::AdversaryDecode { sigma, count, .. } => {
                vec![("count", count.to_string()), ("sigma", sigma.to_string())]
            }
            Payload::ForceStep {
                functional,
                target,
                lmax,
                ..
            } => vec![
                ("functional", functional.id()),
                ("lmax", lmax.to_string()),
                ("target", bits_text(target)),
            ],
            Payload::ForceSplit { .. } => vec![],
            Payload::Tt1 { k, .. } => vec![("k", k.to_string())],
        };
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Result-specific checks, recomputed from the payload.
    pub fn checks(&self) -> Vec<CheckEntry> {
        match self {
            Payload::Gen { spec, tree, measure } => vec![
                entry("measure_matches", tree.measure() == *measure),
                entry("meets_target", tree.measure() >= spec.target),
                entry(
                    "regenerates",
                    gen_random_positive_tree(spec).is_ok_and(|t| t == *tree),
                ),
            ],
            Payload::Prune {
                input,
                epsilon,
                output,
                report,
            } => {
                let fresh = match prune(input, epsilon) {
                    Ok((s, r)) => Some((Some(s), r)),
                    Err(Error::EmptyAfterPruning(r)) => Some((None, *r)),
                    Err(_) => None,
                };
                let report_ok = report.input_measure == input.measure()
                    && report.output_measure
                        == output.as_ref().map_or(Dyadic::zero(), |s| s.measure());
                let mut out = vec![
                    entry(
                        "regenerates",
                        fresh.is_some_and(|(s, r)| s == *output && r == *report),
                    ),
                    entry("report_consistent", report_ok),
                    entry("mass_bound", report.mass_bound_holds()),
                ];
                if let Some(s) = output {
                    out.push(entry("inside_input", s.is_subset_of(input)));
                    out.push(entry(
                        "measure_loss_below_epsilon",
                        s.measure() > &input.measure() - epsilon,
                    ));
                    out.push(entry("threshold_property", threshold_property_holds(s, epsilon)));
                }
                out
            }
            Payload::Extract { input, extraction } => {
                let pruned = prune(input, &extraction.params.prune_epsilon).ok();
                let rechecked = pruned
                    .as_ref()
                    .and_then(|(s, _)| extraction.recheck(input, s).ok());
                vec![
                    entry("input_digest", extraction.input_digest == tree_digest(input)),
                    entry("input_measure", extraction.input_measure == input.measure()),
                    entry(
                        "family_conditions",
                        rechecked.as_ref().is_some_and(|c| c.family.holds()),
                    ),
                    entry(
                        "final_level_mass",
                        rechecked.as_ref().is_some_and(|c| c.final_level_mass),
                    ),
                    entry(
                        "measure_guarantee",
                        rechecked.as_ref().is_some_and(|c| c.measure_guarantee),
                    ),
                    entry("regenerates", extraction.verify(input)),
                ]
            }
            Payload::Density {
                tree,
                epsilon,
                delta,
                greedy,
                maximization,
            } => vec![
                entry("greedy_valid", is_density_witness(tree, greedy, epsilon)),
                entry(
                    "greedy_least",
                    density_witness_greedy(tree, epsilon).is_ok_and(|g| g == *greedy),
                ),
                entry(
                    "maximization_valid",
                    is_density_witness(tree, &maximization.witness, epsilon),
                ),
                entry(
                    "maximization_regenerates",
                    density_witness_maximization(tree, epsilon, delta).is_ok_and(|m| m == *maximization),
                ),
            ],
            Payload::AdversaryEncode {
                table,
                depth,
                tree,
                leaf_count,
                measure,
            } => vec![
                entry(
                    "tree_matches_class",
                    adversarial_tree(table, *depth).is_ok_and(|t| t == *tree),
                ),
                entry("leaf_count", tree.leaf_count() == *leaf_count),
                entry("measure", tree.measure() == *measure),
            ],
            Payload::AdversaryDecode {
                table,
                sigma,
                count,
                decoded,
            } => vec![
                entry("in_c", in_c(table, sigma)),
                entry("enough_ones", sigma.count_ones() as usize > *count),
                entry(
                    "decodes",
                    decode_halting(sigma, *count, table).is_ok_and(|d| d == *decoded),
                ),
                entry("matches_table", *decoded == table.restrict(*count)),
            ],
            Payload::ForceStep {
                condition,
                functional,
                target,
                lmax,
                result,
            } => {
                let Ok(phi) = functional.instantiate() else {
                    return vec![entry("functional", false)];
                };
                let mut out = vec![
                    entry("input_condition", condition.is_valid()),
                    entry(
                        "regenerates",
                        forcing_step(condition, phi.as_ref(), target, *lmax).is_ok_and(|r| r == *result),
                    ),
                ];
                match result {
                    StepResult::Split { extension, n } => {
                        out.push(entry(
                            "diagonalizes",
                            *n < target.len()
                                && evaluate(phi.as_ref(), extension, *n).is_some_and(|v| v != target[*n]),
                        ));
                        out.push(entry(
                            "extension_is_condition",
                            is_condition(extension, &condition.reservoir, &condition.ambient),
                        ));
                        out.push(entry("end_extends", extension.end_extends(&condition.frontier)));
                    }
                    StepResult::Constant { tree, proof_depth } => {
                        out.push(entry(
                            "working_tree",
                            condition.working_tree().is_ok_and(|w| w == *tree),
                        ));
                        out.push(entry(
                            "u_class_check",
                            u_class_check(tree, &condition.frontier, phi.as_ref(), *proof_depth)
                                .unwrap_or(false),
                        ));
                    }
                }
                out
            }
            Payload::ForceSplit { condition, result } => {
                let before = condition.frontier.binary_shape();
                let after = result.frontier.binary_shape();
                vec![
                    entry("input_condition", condition.is_valid()),
                    entry("output_condition", result.is_valid()),
                    entry(
                        "shape_grows",
                        before.is_some() && after == before.map(|n| n + 1),
                    ),
                    entry("end_extends", result.frontier.end_extends(&condition.frontier)),
                    entry(
                        "reservoir_unchanged",
                        result.reservoir == condition.reservoir && result.ambient == condition.ambient,
                    ),
                    entry(
                        "regenerates",
                        splitting_extend(condition).is_ok_and(|c| c == *result),
                    ),
                ]
            }
            Payload::Tt1 { coloring, k, result } => vec![
                entry(
                    "embedding_valid",
                    result.embedding.k() == *k && result.embedding.is_valid(),
                ),
                entry(
                    "monochromatic",
                    result
                        .embedding
                        .images()
                        .iter()
                        .all(|s| s.len() <= coloring.depth && coloring.color(s) == result.color),
                ),
                entry(
                    "regenerates",
                    tt1_homogeneous(coloring, *k).is_ok_and(|h| h == *result),
                ),
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub version: String,
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub parameters: BTreeMap<String, String>,
    pub payload: Payload,
    pub checklist: Vec<CheckEntry>,
}

impl Certificate {
    pub fn issue(payload: Payload) -> Self {
        let mut cert = Certificate {
            version: CERT_VERSION.to_string(),
            command: payload.command().to_string(),
            inputs: payload.input_digests(),
            parameters: payload.parameters(),
            payload,
            checklist: Vec::new(),
        };
        cert.checklist = cert.recompute();
        cert
    }

    /// Every checklist entry, recomputed.
    pub fn recompute(&self) -> Vec<CheckEntry> {
        let mut out = vec![
            entry("command", self.command == self.payload.command()),
            entry("input_digests", self.inputs == self.payload.input_digests()),
            entry("parameters", self.parameters == self.payload.parameters()),
        ];
        out.extend(self.payload.checks());
        out
    }

    pub fn all_pass(&self) -> bool {
        self.checklist.iter().all(|c| c.pass)
    }

    pub fn to_text(&self) -> String {
        to_canonical_text(self)
    }

    /// Parses a certificate, reporting the version tag before the body.
    pub fn from_text(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::MalformedCertificate(e.to_string()))?;
        match value.get("version").and_then(|v| v.as_str()) {
            Some(CERT_VERSION) => {}
            Some(other) => return Err(Error::UnknownVersion(other.to_string())),
            None => return Err(Error::MalformedCertificate("missing version tag".into())),
        }
        serde_json::from_value(value).map_err(|e| Error::MalformedCertificate(e.to_string()))
    }
}

/// True iff the recomputed checklist equals the stored one and all entries pass.
pub fn verify_certificate(cert: &Certificate) -> Result<bool> {
    if cert.version != CERT_VERSION {
        return Err(Error::UnknownVersion(cert.version.clone()));
    }
    Ok(cert.recompute() == cert.checklist && cert.all_pass())
}

pub fn verify_certificate_text(text: &str) -> Result<bool> {
    verify_certificate(&Certificate::from_text(text)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ConditionFile {
    pub format: String,
    pub frontier: FiniteTree,
    pub reservoir: ClopenTree,
    pub ambient: ClopenTree,
}

impl From<Condition> for ConditionFile {
    fn from(c: Condition) -> Self {
        ConditionFile {
            format: CONDITION_FORMAT.to_string(),
            frontier: c.frontier,
            reservoir: c.reservoir,
            ambient: c.ambient,
        }
    }
}

impl ConditionFile {
    pub fn into_condition(self) -> Result<Condition> {
        if self.format != CONDITION_FORMAT {
            return Err(Error::UnknownVersion(self.format));
        }
        Ok(Condition::new(self.frontier, self.reservoir, self.ambient))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ColoringFile {
    pub format: String,
    pub depth: u32,
    pub arity: u32,
    pub colors: Vec<u32>,
}

impl From<Coloring> for ColoringFile {
    fn from(c: Coloring) -> Self {
        ColoringFile {
            format: COLORING_FORMAT.to_string(),
            depth: c.depth,
            arity: c.arity,
            colors: c.colors,
        }
    }
}

impl ColoringFile {
    pub fn into_coloring(self) -> Result<Coloring> {
        if self.format != COLORING_FORMAT {
            return Err(Error::UnknownVersion(self.format));
        }
        Coloring::new(self.depth, self.arity, self.colors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::extract_perfect;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn gen_cert() -> Certificate {
        let spec = GenSpec::new(6, d("3/4"), 9).unwrap();
        let tree = gen_random_positive_tree(&spec).unwrap();
        let measure = tree.measure();
        Certificate::issue(Payload::Gen { spec, tree, measure })
    }

    #[test]
    fn fresh_certificates_verify() {
        let cert = gen_cert();
        assert!(verify_certificate(&cert).unwrap());

        let input = ClopenTree::full(9).unwrap();
        let ex = extract_perfect(&input, &d("1/2")).unwrap();
        let cert = Certificate::issue(Payload::Extract {
            input,
            extraction: ex.certificate,
        });
        assert!(verify_certificate(&cert).unwrap(), "{:?}", cert.checklist);
    }

    #[test]
    fn text_round_trip() {
        let cert = gen_cert();
        let text = cert.to_text();
        let back = Certificate::from_text(&text).unwrap();
        assert_eq!(back, cert);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn tampering_is_detected() {
        let mut cert = gen_cert();
        if let Payload::Gen { measure, .. } = &mut cert.payload {
            *measure = &*measure + &d("1/64");
        }
        assert!(!verify_certificate(&cert).unwrap());

        let mut cert = gen_cert();
        cert.checklist[0].pass = false;
        assert!(!verify_certificate(&cert).unwrap());

        let mut cert = gen_cert();
        cert.parameters.insert("seed".into(), "10".into());
        assert!(!verify_certificate(&cert).unwrap());
    }

    #[test]
    fn version_and_shape_errors() {
        let text = gen_cert().to_text().replace("cert/v1", "v999");
        assert!(matches!(
            Certificate::from_text(&text),
            Err(Error::UnknownVersion(v)) if v == "v999"
        ));
        assert!(matches!(
            Certificate::from_text("{\"version\":\"cert/v1\"}"),
            Err(Error::MalformedCertificate(_))
        ));
        assert!(matches!(
            Certificate::from_text("not json"),
            Err(Error::MalformedCertificate(_))
        ));
    }
}
