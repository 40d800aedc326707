//! Isomorphism testing for graphs excluding a topological clique, built from
//! Weisfeiler-Leman refinement, bounded closures and permutation-group search.

pub mod closure;
pub mod decompose;
pub mod error;
pub mod format;
pub mod generate;
pub mod graph;
pub mod group;
pub mod hyper;
pub mod iso;
pub mod oracle;
pub mod perm;
pub mod refine;
pub mod report;

pub use error::{ClosureError, GraphError, GroupError, IsoError, OracleError, ParseError, RefineError};
pub use graph::ColoredGraph;
pub use perm::Permutation;
pub use refine::TupleColoring;
