//! Exact finite-resolution computation on positive-measure subtrees of Cantor
//! space.
//!
//! Clopen trees are stored as leaf bitsets at a fixed depth and every measure
//! is an exact dyadic rational. On top of that sit measure pruning, perfect
//! subtree extraction, a halting-table adversary, a forcing-condition engine
//! over bounded-use tree functionals, density-witness searches, homogeneous
//! subtree search, and self-checking certificates.

pub mod adversary;
pub mod bitstring;
pub mod cert;
pub mod density;
pub mod dyadic;
pub mod embed;
pub mod error;
pub mod extract;
pub mod finite;
pub mod forcing;
pub mod format;
pub mod gen;
pub mod kucera;
pub mod tree;

pub use adversary::HaltingTable;
pub use bitstring::BitString;
pub use cert::{verify_certificate, Certificate, Payload};
pub use dyadic::Dyadic;
pub use embed::{Coloring, PerfectEmbedding};
pub use error::{Error, Result};
pub use extract::{extract_perfect, Extraction, ExtractionCertificate, GrowthSchedule};
pub use finite::FiniteTree;
pub use forcing::{Condition, StepResult, TreeFunctional};
pub use gen::GenSpec;
pub use kucera::{prune, PruneReport};
pub use tree::{ClopenTree, MAX_DEPTH};
