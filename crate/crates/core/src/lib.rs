//! Walk counting, distances and shortest cycles in directed graphs, answered
//! from a Frobenius normal form of the adjacency matrix over a prime field.

pub mod bench;
pub mod cli;
pub mod error;
pub mod field;
pub mod frobenius;
pub mod graph;
pub mod graph_algos;
pub mod hankel;
pub mod io;
pub mod matrix;
pub mod oracle;
pub mod poly;
pub mod walk_oracle;

pub use error::{Error, Result};
pub use field::{FieldElem, PrimeField};
pub use graph::Graph;
pub use matrix::DenseMatrix;
pub use walk_oracle::{build_index, preprocess, WalkIndex};
