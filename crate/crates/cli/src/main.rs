//! `cantorkit` command-line workbench.
//!
//! Every subcommand issues a certificate. `--out FILE` writes it, `--json`
//! prints it on stdout instead of the plain summary, and `--emit FILE` writes
//! the secondary artifact (a tree or a condition) where one exists.
//!
//! Exit codes: 0 success, 1 verification or precondition failure, 2 malformed
//! input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cantorkit::adversary::{adversarial_tree, decode_halting};
use cantorkit::cert::{
    bits_text, verify_certificate, Certificate, ColoringFile, ConditionFile, FunctionalSpec,
};
use cantorkit::density::{density_witness_greedy, density_witness_maximization};
use cantorkit::embed::tt1_homogeneous;
use cantorkit::format::{to_canonical_text, tree_from_text, tree_to_text};
use cantorkit::forcing::{forcing_step, splitting_extend, DecisionTable};
use cantorkit::gen::gen_random_positive_tree;
use cantorkit::{
    extract_perfect, prune, BitString, ClopenTree, Condition, Dyadic, Error, GenSpec,
    HaltingTable, Payload, StepResult,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cantorkit", version, about = "Exact computation on clopen subtrees of Cantor space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the certificate here.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Print the certificate instead of a summary.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Seeded random tree of measure at least the target.
    Gen {
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value = "3/2^2")]
        target: Dyadic,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the tree here.
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Remove every cylinder below its measure threshold.
    Prune {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long)]
        epsilon: Dyadic,
        /// Write the pruned tree here.
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Extract a finite perfect subtree of large measure.
    Extract {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long)]
        epsilon: Dyadic,
        #[command(flatten)]
        output: Output,
    },
    /// Greedy and maximization density witnesses.
    Density {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long)]
        epsilon: Dyadic,
        /// Defaults to half the measure of the tree.
        #[arg(long)]
        delta: Option<Dyadic>,
        #[command(flatten)]
        output: Output,
    },
    /// Tree coding a halting table, and its decoder.
    #[command(subcommand)]
    Adversary(AdversaryCommand),
    /// Forcing condition steps.
    #[command(subcommand)]
    Force(ForceCommand),
    /// Homogeneous perfect subtree of a finite coloring.
    Tt1 {
        /// Coloring file.
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Recompute a certificate's checklist.
    Verify {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum AdversaryCommand {
    Encode {
        /// Halting table file.
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long)]
        depth: u32,
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    Decode {
        /// Halting table file.
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long)]
        sigma: BitString,
        #[arg(long)]
        count: usize,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct ConditionSource {
    /// Condition file.
    #[arg(long = "in", value_name = "FILE", conflicts_with_all = ["reservoir", "ambient"])]
    input: Option<PathBuf>,
    /// Start from the root condition over these two trees instead.
    #[arg(long, value_name = "FILE", requires = "ambient")]
    reservoir: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires = "reservoir")]
    ambient: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ForceCommand {
    /// Split or prove constancy for one functional.
    Step {
        #[command(flatten)]
        source: ConditionSource,
        /// Built-in functional id.
        #[arg(long, conflicts_with = "table", required_unless_present = "table")]
        functional: Option<String>,
        /// Decision table file.
        #[arg(long, value_name = "FILE")]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        inputs: usize,
        /// Target bits, e.g. 101.
        #[arg(long)]
        target: String,
        #[arg(long)]
        lmax: u32,
        /// Write the extended condition here on a split.
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Grow the frontier by one splitting level.
    Split {
        #[command(flatten)]
        source: ConditionSource,
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
}

enum Failure {
    Precondition(String),
    Malformed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::UnknownVersion(_)
            | Error::MalformedCertificate(_)
            | Error::NotPrefixClosed(_)
            | Error::StringTooLong { .. } => Failure::Malformed(e.to_string()),
            _ => Failure::Precondition(e.to_string()),
        }
    }
}

type Run = Result<bool, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Malformed(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Precondition(format!("{}: {e}", path.display())))
}

fn read_tree(path: &Path) -> Result<ClopenTree, Failure> {
    Ok(tree_from_text(&read(path)?)?)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Malformed(format!("{}: {e}", path.display())))
}

fn read_condition(source: &ConditionSource) -> Result<Condition, Failure> {
    match (&source.input, &source.reservoir, &source.ambient) {
        (Some(p), _, _) => Ok(read_json::<ConditionFile>(p)?.into_condition()?),
        (None, Some(r), Some(a)) => Ok(Condition::initial(read_tree(r)?, read_tree(a)?)),
        _ => Err(Failure::Malformed(
            "give --in or both --reservoir and --ambient".into(),
        )),
    }
}

fn parse_bits(s: &str) -> Result<Vec<bool>, Failure> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Failure::Malformed(format!("not a bit string: {s:?}"))),
        })
        .collect()
}

/// Writes and prints the certificate; summary lines go to stdout unless
/// `--json` is set.
fn finish(payload: Payload, output: &Output, summary: &[String]) -> Run {
    let cert = Certificate::issue(payload);
    let text = cert.to_text();
    if let Some(p) = &output.out {
        write(p, &text)?;
    }
    if output.json {
        println!("{text}");
    } else {
        for line in summary {
            println!("{line}");
        }
    }
    Ok(cert.all_pass())
}

fn run(cli: Cli) -> Run {
    match cli.command {
        Command::Gen {
            depth,
            target,
            seed,
            emit,
            output,
        } => {
            let spec = GenSpec::new(depth, target, seed)?;
            let tree = gen_random_positive_tree(&spec)?;
            if let Some(p) = &emit {
                write(p, &tree_to_text(&tree))?;
            }
            let summary = vec![
                format!("depth: {depth}"),
                format!("leaves: {}", tree.leaf_count()),
                format!("measure: {}", tree.measure()),
            ];
            let measure = tree.measure();
            finish(Payload::Gen { spec, tree, measure }, &output, &summary)
        }
        Command::Prune {
            input,
            epsilon,
            emit,
            output,
        } => {
            let tree = read_tree(&input)?;
            let (out, report) = match prune(&tree, &epsilon) {
                Ok((s, report)) => (Some(s), report),
                Err(Error::EmptyAfterPruning(report)) => (None, *report),
                Err(e) => return Err(e.into()),
            };
            if let (Some(p), Some(s)) = (&emit, &out) {
                write(p, &tree_to_text(s))?;
            }
            let summary = vec![
                format!("input measure: {}", report.input_measure),
                format!("output measure: {}", report.output_measure),
                format!("pruned nodes: {}", report.pruned.len()),
                format!("empty: {}", out.is_none()),
            ];
            finish(
                Payload::Prune {
                    input: tree,
                    epsilon,
                    output: out,
                    report,
                },
                &output,
                &summary,
            )
        }
        Command::Extract {
            input,
            epsilon,
            output,
        } => {
            let tree = read_tree(&input)?;
            let ex = extract_perfect(&tree, &epsilon)?;
            let c = &ex.certificate;
            let summary = vec![
                format!("schedule: {:?}", c.params.schedule.values),
                format!("delta: {}", c.params.delta),
                format!("selected level index: {}", c.level_index),
                format!("output height: {}", c.output.norm()),
                format!("output measure: {}", c.output_measure),
            ];
            finish(
                Payload::Extract {
                    input: tree,
                    extraction: ex.certificate,
                },
                &output,
                &summary,
            )
        }
        Command::Density {
            input,
            epsilon,
            delta,
            output,
        } => {
            let tree = read_tree(&input)?;
            let delta = delta.unwrap_or_else(|| tree.measure().half());
            let greedy = density_witness_greedy(&tree, &epsilon)?;
            let maximization = density_witness_maximization(&tree, &epsilon, &delta)?;
            let summary = vec![
                format!("greedy: {greedy}"),
                format!("maximization: {}", maximization.witness),
                format!("precision n: {}", maximization.precision_n),
                format!("k: {}", maximization.k),
                format!("level: {}", maximization.level),
            ];
            finish(
                Payload::Density {
                    tree,
                    epsilon,
                    delta,
                    greedy,
                    maximization,
                },
                &output,
                &summary,
            )
        }
        Command::Adversary(AdversaryCommand::Encode {
            input,
            depth,
            emit,
            output,
        }) => {
            let table: HaltingTable = read_json(&input)?;
            let tree = adversarial_tree(&table, depth)?;
            if let Some(p) = &emit {
                write(p, &tree_to_text(&tree))?;
            }
            let summary = vec![
                format!("leaves: {}", tree.leaf_count()),
                format!("measure: {}", tree.measure()),
            ];
            finish(
                Payload::AdversaryEncode {
                    table,
                    depth,
                    leaf_count: tree.leaf_count(),
                    measure: tree.measure(),
                    tree,
                },
                &output,
                &summary,
            )
        }
        Command::Adversary(AdversaryCommand::Decode {
            input,
            sigma,
            count,
            output,
        }) => {
            let table: HaltingTable = read_json(&input)?;
            let decoded = decode_halting(&sigma, count, &table)?;
            let summary = (0..decoded.size())
                .map(|e| match decoded.halt_time(e) {
                    Some(t) => format!("{e}: halts at stage {t}"),
                    None => format!("{e}: divergent"),
                })
                .collect::<Vec<_>>();
            finish(
                Payload::AdversaryDecode {
                    table,
                    sigma,
                    count,
                    decoded,
                },
                &output,
                &summary,
            )
        }
        Command::Force(ForceCommand::Step {
            source,
            functional,
            table,
            inputs,
            target,
            lmax,
            emit,
            output,
        }) => {
            let condition = read_condition(&source)?;
            let functional = match (functional, table) {
                (_, Some(p)) => FunctionalSpec::Table {
                    table: read_json::<DecisionTable>(&p)?,
                },
                (Some(id), None) => FunctionalSpec::Builtin { id, inputs },
                (None, None) => unreachable!("clap requires one of the two"),
            };
            let phi = functional.instantiate()?;
            let target = parse_bits(&target)?;
            let result = forcing_step(&condition, phi.as_ref(), &target, lmax)?;
            let summary = match &result {
                StepResult::Split { extension, n } => {
                    if let Some(p) = &emit {
                        let next = Condition::new(
                            extension.clone(),
                            condition.reservoir.clone(),
                            condition.ambient.clone(),
                        );
                        write(p, &to_canonical_text(&ConditionFile::from(next)))?;
                    }
                    vec![
                        "branch: split".to_string(),
                        format!("n: {n}"),
                        format!("target: {}", bits_text(&target)),
                        format!("extension nodes: {}", extension.len()),
                    ]
                }
                StepResult::Constant { tree, proof_depth } => vec![
                    "branch: constant".to_string(),
                    format!("proof depth: {proof_depth}"),
                    format!("tree measure: {}", tree.measure()),
                ],
            };
            finish(
                Payload::ForceStep {
                    condition,
                    functional,
                    target,
                    lmax,
                    result,
                },
                &output,
                &summary,
            )
        }
        Command::Force(ForceCommand::Split {
            source,
            emit,
            output,
        }) => {
            let condition = read_condition(&source)?;
            let result = splitting_extend(&condition)?;
            if let Some(p) = &emit {
                write(p, &to_canonical_text(&ConditionFile::from(result.clone())))?;
            }
            let summary = vec![
                format!(
                    "shape: {}",
                    result
                        .frontier
                        .binary_shape()
                        .map_or("irregular".to_string(), |n| format!("2^<{n}"))
                ),
                format!("leaves: {}", result.frontier.leaves().count()),
            ];
            finish(Payload::ForceSplit { condition, result }, &output, &summary)
        }
        Command::Tt1 { input, k, output } => {
            let coloring = read_json::<ColoringFile>(&input)?.into_coloring()?;
            let result = tt1_homogeneous(&coloring, k)?;
            let summary = vec![
                format!("color: {}", result.color),
                format!("search: {:?}", result.strategy).to_lowercase(),
                format!(
                    "images: {}",
                    result
                        .embedding
                        .images()
                        .iter()
                        .map(|s| s.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                ),
            ];
            finish(Payload::Tt1 { coloring, k, result }, &output, &summary)
        }
        Command::Verify { input, json } => {
            let cert = Certificate::from_text(&read(&input)?)?;
            let ok = verify_certificate(&cert)?;
            let recomputed = cert.recompute();
            if json {
                let report = serde_json::json!({
                    "verified": ok,
                    "command": cert.command,
                    "checklist": recomputed,
                });
                println!("{report}");
            } else {
                for check in &recomputed {
                    let stored = cert.checklist.iter().find(|c| c.name == check.name);
                    let mark = match stored {
                        Some(s) if s.pass == check.pass => if check.pass { "pass" } else { "fail" },
                        Some(_) => "mismatch",
                        None => "missing",
                    };
                    println!("{mark:>8}  {}", check.name);
                }
                println!("{}", if ok { "verified" } else { "rejected" });
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Precondition(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Malformed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
