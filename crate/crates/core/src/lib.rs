//! Numerical toolkit for the Lᵖ theory of sparse graph convergence: weighted
//! graphs, step-function graphons, cut-norm and cut-distance solvers, weak
//! regularity partitioners, upper-regularity checkers, W-random graph
//! samplers, and homomorphism-density computations.
//!
//! Everything is finite and explicit: graphons are step functions on a
//! partition of [0,1], partitions refine the current grid, and every solver
//! reports whether its output is exact or a certified one-sided bound.

// `!(x > 0.0)` guards reject NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Indexed loops mirror the matrix algebra they implement.
#![allow(clippy::needless_range_loop)]

pub mod counting;
pub mod cutmetric;
pub mod graph;
pub mod graphon;
pub mod partition;
pub mod regularity;
pub mod rng;
pub mod sampling;
pub mod upperreg;

pub use graph::WeightedGraph;
pub use graphon::StepGraphon;
pub use partition::Partition;

use std::fmt;

/// Absolute tolerance for floating-point comparisons unless stated otherwise.
pub const ABS_TOL: f64 = 1e-9;

/// Tolerance for representation invariants (measure sums, symmetry).
pub const REP_TOL: f64 = 1e-12;

/// Default cap on the number of graphon classes a refining routine may create.
pub const DEFAULT_MAX_CLASSES: usize = 4096;

/// Resolution guard, overridable through `GRAPHONLAB_MAX_CLASSES`.
pub fn max_classes() -> usize {
    std::env::var("GRAPHONLAB_MAX_CLASSES")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_MAX_CLASSES)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A graph with no vertices was passed where a norm or density is needed.
    EmptyGraph,
    /// An edge-density block is empty or has zero weight.
    EmptyBlock,
    /// Normalization of a graph with `‖G‖₁ = 0`.
    NoEdges,
    /// Two graphons were combined without first refining to a common grid.
    GridMismatch { left: usize, right: usize },
    /// A partition label points outside the base object.
    LabelOutOfRange { label: usize, classes: usize },
    /// Two partitions of different base objects were combined.
    PartitionMismatch,
    /// Exact enumeration requested beyond its feasibility guard.
    TooManyClasses { classes: usize, limit: usize },
    /// A refining routine would exceed the class-resolution guard.
    ResolutionGuard { requested: usize, limit: usize },
    /// The requested accuracy needs more classes than the resolution guard allows.
    EpsTooSmallForGrid,
    /// A vertex carries more than `η·α_G` of the total weight.
    DominantNode { vertex: usize },
    /// Exact set-partition enumeration guard.
    TooManyVertices { vertices: usize, limit: usize },
    /// A constructed object would exceed its size guard.
    SizeGuard { size: usize, limit: usize },
    /// Quasirandomness certification failed within the retry budget.
    RetryCapExceeded,
    /// The refinement loop ran out of iterations; the input cannot be
    /// upper regular at the stated parameters.
    UpperRegularityViolated(Box<crate::regularity::RegularityViolation>),
    /// A parameter is outside its documented range.
    InvalidParameter(String),
    /// Malformed graph or graphon file.
    Parse(String),
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyGraph => write!(f, "empty graph"),
            Error::EmptyBlock => write!(f, "empty block"),
            Error::NoEdges => write!(f, "no edges"),
            Error::GridMismatch { left, right } => {
                write!(f, "graphon grids differ ({left} vs {right} classes); refine first")
            }
            Error::LabelOutOfRange { label, classes } => {
                write!(f, "partition label {label} out of range for {classes} cells")
            }
            Error::PartitionMismatch => write!(f, "partitions have different parents"),
            Error::TooManyClasses { classes, limit } => {
                write!(f, "{classes} classes exceed exact-solver limit {limit}; use heuristic")
            }
            Error::ResolutionGuard { requested, limit } => {
                write!(f, "{requested} classes exceed resolution guard {limit}")
            }
            Error::EpsTooSmallForGrid => write!(f, "eps too small for grid cap"),
            Error::DominantNode { vertex } => write!(f, "dominant node: vertex {vertex}"),
            Error::TooManyVertices { vertices, limit } => {
                write!(f, "{vertices} vertices exceed exact-checker limit {limit}; use falsify")
            }
            Error::SizeGuard { size, limit } => {
                write!(f, "size guard: {size} exceeds limit {limit}")
            }
            Error::RetryCapExceeded => write!(f, "could not certify quasirandomness"),
            Error::UpperRegularityViolated(v) => {
                if v.partition.is_some() {
                    write!(f, "upper regularity violated (worst stepped norm {:.6})", v.worst_value)
                } else {
                    write!(
                        f,
                        "upper regularity violated: refinement exhausted after {} iterations without a certificate partition",
                        v.iterations
                    )
                }
            }
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
