//! Hamiltonicity laboratory for dense seed graphs perturbed by sparse random edges.
//!
//! The crate is organised around one experiment pipeline:
//!
//! * [`graph`] holds the dense bit-matrix graph representation and set machinery.
//! * [`gen`] produces seeded random graphs, perturbation plans and seed families.
//! * [`oracle`] answers Hamiltonicity and longest-path questions exactly at small sizes.
//! * [`posa`] is the rotation-extension engine: path growth, endpoint closures,
//!   booster discovery and edge-stream sprinkling.
//! * [`expansion`] certifies or falsifies vertex-expansion properties.
//! * [`harness`] runs seeded trials, threshold sweeps and obstruction experiments.
//! * [`cli`] exposes the whole pipeline as a command line tool.

pub mod cli;
pub mod gen;
pub mod graph;
pub mod oracle;
pub mod expansion;
pub mod harness;
pub mod posa;

pub use gen::RngStream;
pub use graph::{Graph, VertexSet};
