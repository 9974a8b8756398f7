//! Finite graph sequences with relational morphisms.
pub mod category;
pub mod clique;
pub mod dot;
pub mod fan;
pub mod generators;
pub mod graph;
pub mod io;
pub mod poset;
pub mod relation;
pub mod sample;
pub mod sequence;

pub use category::{CategoryName, CategorySpec};
pub use generators::{generate, GeneratorName};
pub use graph::{Graph, GraphClass, GraphError, VertexSet};
pub use relation::{enumerate_morphisms, FiberKind, MorphProperty, Morphism, MorphismError, SearchOptions};
pub use sequence::{Guarantee, Property, Sequence, SequenceError, Verdict, Witness};
