//! Message format toolchain: a specification language for binary message
//! formats, a graph model of those formats, derivation of validation and
//! accessor functions from the graph, an interpreter running them against byte
//! buffers, and a generator emitting the same functions as Rust source.

pub mod codegen;
pub mod derive;
pub mod dsl;
pub mod model;
pub mod runtime;
