//! Exact search and proof-checking tools for r-dynamic coloring, paintability games,
//! reducible configurations and discharging on surface-embedded graphs.

pub mod bounds;
pub mod coloring;
pub mod configs;
pub mod discharge;
pub mod embedding;
pub mod format;
pub mod game;
pub mod generators;
pub mod graph;

pub use embedding::{EmbeddedGraph, EmbeddingError, Face, RotationSystem};
pub use graph::{Graph, GraphError, Vertex, VertexRemap};
