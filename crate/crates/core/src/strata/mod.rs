//! Dimensions, degenerations and boundary structure of the strata indexed by
//! decorated and ribbon trees.

mod dimension;
mod faces;
mod forget;
mod glue;
mod poset;
mod shrink;

use thiserror::Error;

use crate::divisor_trees::RibbonError;
use crate::palette::PaletteError;
use crate::trees::TreeError;

pub use dimension::{
    stratum_dimension, tree_dimension, vertex_dimension, Corrections, DimensionReport,
};
pub use faces::{boundary_faces, Face, FaceCensus};
pub use forget::{forget_boundary_mark, Forgotten};
pub use glue::{glue, split, Glued};
pub use poset::{
    close_under_moves, closure, closure_axioms, shrink_leq, ClosureReport, Poset, Stratum,
};
pub use shrink::{flatten, level0_edge_shrink, level_shrink};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrataError {
    #[error(transparent)]
    Palette(#[from] PaletteError),
    #[error(transparent)]
    Ribbon(#[from] RibbonError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("level {level} out of range for {levels} levels")]
    LevelOutOfRange { level: usize, levels: usize },
    #[error("edge into vertex {0} does not join two interior level-0 vertices")]
    NotLevel0Edge(usize),
    #[error("strata of different types")]
    TypeMismatch,
    #[error("dimension identity violated: sum {sum}, closed form {closed}")]
    IdentityViolation { sum: i64, closed: i64 },
    #[error("cannot glue a strip ending at {left} to one starting at {right}")]
    EndpointMismatch { left: String, right: String },
    #[error("operation needs a {0} tree")]
    WrongKind(&'static str),
    #[error("marked point {j} out of range 1..={k}")]
    IndexOutOfRange { j: usize, k: usize },
    #[error("the root marked point cannot be forgotten")]
    CannotForgetRoot,
    #[error("forgetting leaves no interior vertex")]
    Degenerate,
    #[error("search exceeds the cap of {0}")]
    BoundsTooLoose(usize),
}
