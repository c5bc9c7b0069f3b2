//! Library form of the CLI internals: the expression grammar and the
//! JSON model-file loader. The binary in `main.rs` is a thin command
//! dispatcher over these.

pub mod expr;
pub mod model;
