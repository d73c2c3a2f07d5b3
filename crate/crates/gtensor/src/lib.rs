//! Graph tensors and certified upper bounds on the asymptotic rank and
//! circuit-complexity exponents of tensors with many modes.
//!
//! The crate builds tensors from graphs (one mode per vertex, one index per
//! edge assignment), manipulates them with exact rational arithmetic, and
//! derives complexity bounds from graph decompositions:
//!
//! * [`graphs`] — fractional multigraphs, their algebra and named families;
//! * [`tensors`] — sparse exact-arithmetic tensors, Kronecker products,
//!   flattening ranks, projections and degenerations;
//! * [`circuits`] — an arithmetic circuit IR with generators (Yates powers,
//!   tree-decomposition contraction, vertex-set contraction);
//! * [`treewidth`] — exact treewidth for small graphs and line-treewidth;
//! * [`exponents`] — the bound calculus: star sums, conic triangle
//!   decompositions, the LP-based decomposition optimizer and the summary
//!   table;
//! * [`laser`] — entropy computations for the improved 4-clique exponent;
//! * [`reductions`] — executable permanent-from-grid and
//!   hyperclique-from-incidence reductions with independent oracles.
//!
//! Everything is deterministic: operations are pure functions over immutable
//! values, and all reported numbers are reproducible from the inputs.

pub mod circuits;
pub mod config;
pub mod exponents;
pub mod graphs;
pub mod laser;
pub mod reductions;
pub mod report;
pub mod simplex;
pub mod tensors;
pub mod treewidth;
pub mod util;
pub mod verify;

pub use graphs::FractionalGraph;
pub use tensors::SparseTensor;
pub use treewidth::TreeDecomposition;
pub use util::Rat;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input exceeds a configured size limit; the message names the budget.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// No feasible solution within the configured search space.
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
