//! Dataset model, evaluation grids and revealed-preference graphs.

pub mod dataset;
pub mod graph;
pub mod grid;

pub use dataset::{Dataset, DatasetError, EvaluationPoint, Observation, SourceRef};
pub use graph::{
    find_cycle, garp_check, revealed_relation, to_dot, topological_order, Edge, EdgeKind, GarpResult, RevealedGraph,
    TieMode,
};
pub use grid::{Grid, GridError, GridMode, GridPoint};
