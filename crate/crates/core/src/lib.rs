//! Move Method refactoring recommendation.
//!
//! Methods are embedded twice: structurally, from the method dependency
//! (call) graph, and semantically, from leaf-to-leaf AST path contexts.
//! Both embeddings are normalized and fused into one hybrid vector per
//! method; a class is the mean of its methods. A binary classifier trained
//! on (method, class) pairs then scores candidate target classes.

pub mod cli;
pub mod code;
pub mod config;
pub mod evaluation;
pub mod depgraph;
pub mod error;
pub mod frontend;
pub mod fusion;
pub mod graph;
pub mod linalg;
pub mod model;
pub mod paths;
pub mod persist;
pub mod pipeline;
pub mod recommend;
pub mod rng;
pub mod training;

pub use config::Config;
pub use error::{Error, Result};
